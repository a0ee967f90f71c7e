#include "iotchain/crypto.hpp"

#include <sodium.h>

#include <cstring>

namespace iotchain::crypto {
namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) {
    throw std::runtime_error("libsodium initialization failed");
  }
}

std::array<std::uint8_t, 32> to_curve_public(const PublicKey& key) {
  std::array<std::uint8_t, 32> out{};
  if (crypto_sign_ed25519_pk_to_curve25519(out.data(), key.data()) != 0) {
    throw MalformedKey("public key is not a valid Ed25519 point");
  }
  return out;
}

std::array<std::uint8_t, 32> derive_symmetric_key(
    const std::array<std::uint8_t, 32>& shared, const PublicKey& ephemeral,
    const PublicKey& recipient) {
  std::array<std::uint8_t, 32> key{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key.size());
  crypto_generichash_update(&st, shared.data(), shared.size());
  crypto_generichash_update(&st, ephemeral.data(), ephemeral.size());
  crypto_generichash_update(&st, recipient.data(), recipient.size());
  crypto_generichash_final(&st, key.data(), key.size());
  return key;
}

std::array<std::uint8_t, 1 + 32 + 32> associated_data(
    const PublicKey& ephemeral, const PublicKey& recipient) {
  std::array<std::uint8_t, 1 + 32 + 32> ad{};
  ad[0] = kEnvelopeFormat;
  std::memcpy(ad.data() + 1, ephemeral.data(), 32);
  std::memcpy(ad.data() + 33, recipient.data(), 32);
  return ad;
}

SealedEnvelope seal_with(ByteView plaintext, const PublicKey& recipient,
                         const KeyPair& ephemeral, const Nonce& nonce) {
  auto shared = agree(ephemeral.private_key, recipient);
  auto key = derive_symmetric_key(shared, ephemeral.public_key, recipient);
  auto ad = associated_data(ephemeral.public_key, recipient);

  SealedEnvelope env;
  env.ephemeral_public_key = ephemeral.public_key;
  env.nonce = nonce;
  env.ciphertext.resize(plaintext.size() +
                        crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(
      env.ciphertext.data(), &written, plaintext.data(), plaintext.size(),
      ad.data(), ad.size(), nullptr, nonce.data(), key.data());
  env.ciphertext.resize(written);
  sodium_memzero(key.data(), key.size());
  sodium_memzero(shared.data(), shared.size());
  return env;
}

}  // namespace

SecretKey::~SecretKey() { sodium_memzero(bytes_.data(), bytes_.size()); }

Seed derive_seed(ByteView material) {
  ensure_sodium();
  Seed seed{};
  crypto_hash_sha256(seed.data(), material.data(), material.size());
  return seed;
}

KeyPair generate_keypair() {
  ensure_sodium();
  Seed seed{};
  randombytes_buf(seed.data(), seed.size());
  auto pair = generate_keypair(seed);
  sodium_memzero(seed.data(), seed.size());
  return pair;
}

KeyPair generate_keypair(const Seed& seed) {
  ensure_sodium();
  std::array<std::uint8_t, 32> pk{};
  std::array<std::uint8_t, 64> sk{};
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
  KeyPair pair{PublicKey(pk), SecretKey(sk)};
  sodium_memzero(sk.data(), sk.size());
  return pair;
}

PublicKey public_key_of(const SecretKey& key) {
  ensure_sodium();
  std::array<std::uint8_t, 32> pk{};
  crypto_sign_ed25519_sk_to_pk(pk.data(), key.data());
  return PublicKey(pk);
}

bool is_valid_public_key(const PublicKey& key) {
  ensure_sodium();
  std::array<std::uint8_t, 32> curve{};
  return crypto_sign_ed25519_pk_to_curve25519(curve.data(), key.data()) == 0;
}

Signature sign(ByteView message, const SecretKey& key) {
  ensure_sodium();
  std::array<std::uint8_t, 64> sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       key.data());
  return Signature(sig);
}

bool verify(ByteView message, const Signature& signature,
            const PublicKey& key) {
  ensure_sodium();
  return crypto_sign_verify_detached(signature.data(), message.data(),
                                     message.size(), key.data()) == 0;
}

ContentHash hash_content(ByteView bytes) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(), bytes.data(), bytes.size());
  return ContentHash(out);
}

std::array<std::uint8_t, 32> agree(const SecretKey& own,
                                   const PublicKey& peer) {
  ensure_sodium();
  std::array<std::uint8_t, 32> own_curve{};
  crypto_sign_ed25519_sk_to_curve25519(own_curve.data(), own.data());
  auto peer_curve = to_curve_public(peer);
  std::array<std::uint8_t, 32> shared{};
  int rc = crypto_scalarmult(shared.data(), own_curve.data(),
                             peer_curve.data());
  sodium_memzero(own_curve.data(), own_curve.size());
  if (rc != 0) {
    throw MalformedKey("key agreement produced a low-order point");
  }
  return shared;
}

Bytes SealedEnvelope::serialize() const {
  Bytes out;
  out.reserve(1 + 32 + 24 + ciphertext.size());
  out.push_back(kEnvelopeFormat);
  append(out, ephemeral_public_key.view());
  append(out, nonce.view());
  append(out, ciphertext);
  return out;
}

SealedEnvelope SealedEnvelope::parse(ByteView bytes) {
  if (bytes.size() < kEnvelopeOverhead) {
    throw DecryptionFailure("envelope truncated");
  }
  if (bytes[0] != kEnvelopeFormat) {
    throw DecryptionFailure("unknown envelope format tag");
  }
  SealedEnvelope env;
  env.ephemeral_public_key = PublicKey::from_view(bytes.subspan(1, 32));
  env.nonce = Nonce::from_view(bytes.subspan(33, 24));
  auto body = bytes.subspan(57);
  env.ciphertext.assign(body.begin(), body.end());
  return env;
}

SealedEnvelope seal(ByteView plaintext, const PublicKey& recipient) {
  ensure_sodium();
  auto ephemeral = generate_keypair();
  std::array<std::uint8_t, 24> n{};
  randombytes_buf(n.data(), n.size());
  return seal_with(plaintext, recipient, ephemeral, Nonce(n));
}

SealedEnvelope seal(ByteView plaintext, const PublicKey& recipient,
                    const Seed& seed) {
  auto ephemeral = generate_keypair(seed);
  // The nonce is bound to the seed so a fixed seed gives a fixed envelope.
  Bytes material(seed.begin(), seed.end());
  append(material, as_bytes("envelope-nonce"));
  auto digest = derive_seed(material);
  std::array<std::uint8_t, 24> n{};
  std::memcpy(n.data(), digest.data(), n.size());
  return seal_with(plaintext, recipient, ephemeral, Nonce(n));
}

Bytes open(const SealedEnvelope& envelope, const SecretKey& recipient) {
  ensure_sodium();
  if (envelope.ciphertext.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    throw DecryptionFailure("ciphertext shorter than authentication tag");
  }
  std::array<std::uint8_t, 32> shared{};
  try {
    shared = agree(recipient, envelope.ephemeral_public_key);
  } catch (const MalformedKey& e) {
    throw DecryptionFailure(std::string("bad ephemeral key: ") + e.what());
  }
  auto own_public = public_key_of(recipient);
  auto key =
      derive_symmetric_key(shared, envelope.ephemeral_public_key, own_public);
  auto ad = associated_data(envelope.ephemeral_public_key, own_public);

  Bytes plain(envelope.ciphertext.size() -
              crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long written = 0;
  int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      plain.data(), &written, nullptr, envelope.ciphertext.data(),
      envelope.ciphertext.size(), ad.data(), ad.size(),
      envelope.nonce.data(), key.data());
  sodium_memzero(key.data(), key.size());
  sodium_memzero(shared.data(), shared.size());
  if (rc != 0) {
    throw DecryptionFailure("authentication failed");
  }
  plain.resize(written);
  return plain;
}

Bytes serialize_public_key(const PublicKey& key) {
  Bytes out{kPublicKeyFormat};
  append(out, key.view());
  return out;
}

PublicKey parse_public_key(ByteView bytes) {
  if (bytes.size() != 33 || bytes[0] != kPublicKeyFormat) {
    throw MalformedKey("serialized public key must be tag 0x01 + 32 bytes");
  }
  return PublicKey::from_view(bytes.subspan(1));
}

Bytes serialize_signature(const Signature& sig) {
  Bytes out{kSignatureFormat};
  append(out, sig.view());
  return out;
}

Signature parse_signature(ByteView bytes) {
  if (bytes.size() != 65 || bytes[0] != kSignatureFormat) {
    throw MalformedKey("serialized signature must be tag 0x01 + 64 bytes");
  }
  return Signature::from_view(bytes.subspan(1));
}

}  // namespace iotchain::crypto
