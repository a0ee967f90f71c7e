#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "iotchain/bytes.hpp"

// Hashing, signatures and hybrid encryption.
//
// One key type serves both signing and key agreement: keys are Ed25519 and
// are mapped to X25519 when used in a Diffie-Hellman exchange. Envelopes use
// an ephemeral key per seal, a BLAKE2b-derived symmetric key and
// XChaCha20-Poly1305, so any tampering is detected when opening.
namespace iotchain::crypto {

struct PublicKeyTag {};
struct SecretKeyTag {};
struct SignatureTag {};
struct NonceTag {};

using PublicKey = FixedBytes<32, PublicKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;
using Nonce = FixedBytes<24, NonceTag>;
using Seed = std::array<std::uint8_t, 32>;

/// Ed25519 secret key (seed || public key). Never stored on the ledger.
class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(const std::array<std::uint8_t, 64>& bytes)
      : bytes_(bytes) {}
  SecretKey(const SecretKey&) = default;
  SecretKey& operator=(const SecretKey&) = default;
  ~SecretKey();

  ByteView view() const { return bytes_; }
  const std::uint8_t* data() const { return bytes_.data(); }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;

 private:
  std::array<std::uint8_t, 64> bytes_{};
};

struct KeyPair {
  PublicKey public_key;
  SecretKey private_key;
};

// Format tags for serialized objects.
inline constexpr std::uint8_t kPublicKeyFormat = 0x01;
inline constexpr std::uint8_t kSignatureFormat = 0x01;
inline constexpr std::uint8_t kEnvelopeFormat = 0x01;

class MalformedKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecryptionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Seed derive_seed(ByteView material);

KeyPair generate_keypair();
KeyPair generate_keypair(const Seed& seed);
PublicKey public_key_of(const SecretKey& key);
/// True if the key can take part in key agreement.
bool is_valid_public_key(const PublicKey& key);

Signature sign(ByteView message, const SecretKey& key);
bool verify(ByteView message, const Signature& signature,
            const PublicKey& key);

ContentHash hash_content(ByteView bytes);

/// SHA-256 of the empty string.
inline constexpr std::string_view kEmptyContentHashHex =
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

/// Raw X25519 shared secret between `own` and `peer`.
/// Throws MalformedKey if `peer` is not a valid curve point or yields a
/// low-order result.
std::array<std::uint8_t, 32> agree(const SecretKey& own,
                                   const PublicKey& peer);

struct SealedEnvelope {
  Bytes ciphertext;
  PublicKey ephemeral_public_key;
  Nonce nonce;

  // [tag:1][ephemeral_public_key:32][nonce:24][ciphertext:rest]
  Bytes serialize() const;
  // Throws DecryptionFailure on unknown tag or truncated input.
  static SealedEnvelope parse(ByteView bytes);

  friend bool operator==(const SealedEnvelope&,
                         const SealedEnvelope&) = default;
};

inline constexpr std::size_t kEnvelopeOverhead = 1 + 32 + 24 + 16;

SealedEnvelope seal(ByteView plaintext, const PublicKey& recipient);
SealedEnvelope seal(ByteView plaintext, const PublicKey& recipient,
                    const Seed& seed);

/// Throws DecryptionFailure for a wrong key or any modification.
Bytes open(const SealedEnvelope& envelope, const SecretKey& recipient);

Bytes serialize_public_key(const PublicKey& key);
PublicKey parse_public_key(ByteView bytes);
Bytes serialize_signature(const Signature& sig);
Signature parse_signature(ByteView bytes);

}  // namespace iotchain::crypto
