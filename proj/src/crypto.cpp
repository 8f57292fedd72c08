#include "bmet/crypto.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace bmet {

Hash256 sha256(std::string_view data) {
  Hash256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw std::runtime_error("sha256: digest failed");
  return out;
}

std::string to_hex(const Hash256& h) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (std::uint8_t b : h) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

Hash256 sign(const Hash256& secret_key, std::string_view msg) {
  std::string buf(reinterpret_cast<const char*>(secret_key.data()), secret_key.size());
  buf.append(msg);
  return sha256(buf);
}

KeyPair KeyRegistry::issue(const std::string& id) {
  if (auto it = by_id_.find(id); it != by_id_.end()) return it->second;
  KeyPair kp;
  kp.secret_key = sha256("sk|" + std::to_string(seed_) + "|" + id);
  kp.public_key = to_hex(sha256("pk|" + to_hex(kp.secret_key)));
  by_id_.emplace(id, kp);
  return kp;
}

const std::string& KeyRegistry::public_key(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw std::out_of_range("KeyRegistry: unknown id " + id);
  return it->second.public_key;
}

bool KeyRegistry::verify(const std::string& id, std::string_view msg, const Hash256& sig) const {
  auto it = by_id_.find(id);
  return it != by_id_.end() && sign(it->second.secret_key, msg) == sig;
}

}  // namespace bmet
