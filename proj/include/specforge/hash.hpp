#pragma once

#include <string>
#include <string_view>

namespace specforge {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 over several fields. Each field is length-prefixed so
/// ("ab", "c") and ("a", "bc") hash differently.
class Sha256Builder {
 public:
  Sha256Builder();
  ~Sha256Builder();
  Sha256Builder(const Sha256Builder&) = delete;
  Sha256Builder& operator=(const Sha256Builder&) = delete;

  Sha256Builder& add(std::string_view field);
  std::string hex();

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace specforge
