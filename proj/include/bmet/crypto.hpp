#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace bmet {

using Hash256 = std::array<std::uint8_t, 32>;

inline constexpr std::string_view kHashAlgorithm = "sha256";

Hash256 sha256(std::string_view data);
std::string to_hex(const Hash256& h);

/// Simulated key material. The public key is a digest of the secret.
struct KeyPair {
  std::string public_key;
  Hash256 secret_key{};
};

/// sign(msg, sk) = H(sk || msg).
Hash256 sign(const Hash256& secret_key, std::string_view msg);

/// Stand-in for a PKI: issues deterministic key pairs and verifies
/// signatures by recomputation. Immutable once setup is done, so nodes may
/// share a const reference.
class KeyRegistry {
 public:
  explicit KeyRegistry(std::uint64_t seed = 0) : seed_(seed) {}

  /// Issues (or returns the already issued) key pair for `id`.
  KeyPair issue(const std::string& id);

  bool has(const std::string& id) const { return by_id_.count(id) != 0; }
  const std::string& public_key(const std::string& id) const;
  bool verify(const std::string& id, std::string_view msg, const Hash256& sig) const;

 private:
  std::uint64_t seed_;
  std::map<std::string, KeyPair> by_id_;
};

}  // namespace bmet
