#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "conlab/common.hpp"

namespace conlab {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hierarchical content name. The root prefix "/" has no components.
// Ordering is component-wise lexicographic, which keeps every name carrying a
// given prefix contiguous in an ordered container.
class Name {
 public:
  Name() = default;
  // Throws std::invalid_argument on an empty component or one containing '/'.
  explicit Name(std::vector<std::string> components);

  static Name parse(std::string_view text);

  const std::vector<std::string>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  bool is_root() const { return components_.empty(); }

  // First n components (n is clamped to size()).
  Name prefix(std::size_t n) const;
  Name append(std::string component) const;

  std::string to_string() const;

  auto operator<=>(const Name&) const = default;
  bool operator==(const Name&) const = default;

 private:
  std::vector<std::string> components_;
};

Name parse_name(std::string_view text);

// True iff y's components are a leading subsequence of x's (equality included).
bool is_prefix_of(const Name& y, const Name& x);

struct Interest {
  Name name;
  // Remaining hop budget; nullopt means unlimited.
  std::optional<std::uint32_t> scope;
  std::set<Name> exclusions;
  std::uint64_t nonce = 0;
  // Routers traversed so far (simulator bookkeeping, not part of matching).
  std::uint32_t hop_count = 0;
};

using PublisherId = std::array<std::uint8_t, 32>;

struct ContentObject {
  Name name;
  Bytes payload;
  Bytes signature;
  PublisherId signer{};
};

bool matches_interest(const Interest& interest, const ContentObject& object);
bool matches_interest(const Interest& interest, const Name& object_name);

}  // namespace conlab
