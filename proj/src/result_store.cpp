#include "iotchain/result_store.hpp"

#include <fstream>
#include <iterator>

#include "iotchain/crypto.hpp"

namespace iotchain {

ResultStore::ResultStore(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  std::filesystem::create_directories(*directory_);
}

ContentHash ResultStore::put(ByteView blob) {
  auto hash = crypto::hash_content(blob);
  std::lock_guard lock(mutex_);
  if (blobs_.contains(hash)) return hash;
  blobs_.emplace(hash, Bytes(blob.begin(), blob.end()));
  if (directory_) {
    auto path = *directory_ / hash.hex();
    if (!std::filesystem::exists(path)) {
      auto tmp = path;
      tmp += ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
        if (!out) throw std::runtime_error("failed to write " + tmp.string());
      }
      std::filesystem::rename(tmp, path);
    }
  }
  return hash;
}

std::optional<Bytes> ResultStore::load_from_disk(const ContentHash& hash) const {
  if (!directory_) return std::nullopt;
  auto path = *directory_ / hash.hex();
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

Bytes ResultStore::get(const ContentHash& hash) const {
  Bytes bytes;
  {
    std::lock_guard lock(mutex_);
    auto it = blobs_.find(hash);
    if (it != blobs_.end()) {
      bytes = it->second;
    } else if (auto disk = load_from_disk(hash)) {
      bytes = std::move(*disk);
    } else {
      throw NotFound("no blob with hash " + hash.hex());
    }
  }
  if (crypto::hash_content(bytes) != hash) {
    throw IntegrityError("blob " + hash.hex() + " does not match its hash");
  }
  return bytes;
}

bool ResultStore::has(const ContentHash& hash) const {
  std::lock_guard lock(mutex_);
  if (blobs_.contains(hash)) return true;
  return directory_ && std::filesystem::exists(*directory_ / hash.hex());
}

std::size_t ResultStore::size() const {
  std::lock_guard lock(mutex_);
  return blobs_.size();
}

std::map<ContentHash, Bytes> ResultStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return blobs_;
}

void ResultStore::corrupt_for_testing(const ContentHash& hash, Bytes bytes) {
  std::lock_guard lock(mutex_);
  blobs_[hash] = std::move(bytes);
}

}  // namespace iotchain
