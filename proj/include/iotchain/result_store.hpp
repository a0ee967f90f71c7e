#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>

#include "iotchain/bytes.hpp"

namespace iotchain {

class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Raised when stored bytes no longer hash to their key.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Content-addressed blob store. Blobs are keyed by the SHA-256 of their
// bytes. With a directory configured, each blob is also written verbatim to
// <dir>/<hex-hash>, and misses fall through to disk. Thread-safe.
class ResultStore {
 public:
  ResultStore() = default;
  explicit ResultStore(std::filesystem::path directory);

  /// Idempotent; identical bytes map to one entry.
  ContentHash put(ByteView blob);
  /// Throws NotFound on a miss, IntegrityError if the bytes were altered.
  Bytes get(const ContentHash& hash) const;
  bool has(const ContentHash& hash) const;
  std::size_t size() const;

  /// Every stored blob, in hash order.
  std::map<ContentHash, Bytes> snapshot() const;

  const std::optional<std::filesystem::path>& directory() const {
    return directory_;
  }

  // Test hook: replaces the bytes behind a hash without re-keying.
  void corrupt_for_testing(const ContentHash& hash, Bytes bytes);

 private:
  std::optional<Bytes> load_from_disk(const ContentHash& hash) const;

  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> directory_;
  std::map<ContentHash, Bytes> blobs_;
};

}  // namespace iotchain
