#include "conlab/names.hpp"

#include <algorithm>

namespace conlab {

Name::Name(std::vector<std::string> components) : components_(std::move(components)) {
  for (const auto& c : components_) {
    if (c.empty()) throw std::invalid_argument("name component must not be empty");
    if (c.find('/') != std::string::npos)
      throw std::invalid_argument("name component must not contain '/'");
  }
}

Name Name::parse(std::string_view text) {
  if (text.empty() || text.front() != '/')
    throw ParseError("name must start with '/': \"" + std::string(text) + "\"");
  std::vector<std::string> parts;
  std::string_view rest = text.substr(1);
  // A single trailing slash is tolerated ("/a/" == "/a").
  if (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  while (!rest.empty()) {
    const auto slash = rest.find('/');
    const auto part = rest.substr(0, slash);
    if (part.empty()) throw ParseError("empty name component in \"" + std::string(text) + "\"");
    parts.emplace_back(part);
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
    if (rest.empty()) throw ParseError("empty name component in \"" + std::string(text) + "\"");
  }
  Name n;
  n.components_ = std::move(parts);
  return n;
}

Name Name::prefix(std::size_t n) const {
  Name out;
  out.components_.assign(components_.begin(),
                         components_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return out;
}

Name Name::append(std::string component) const {
  auto parts = components_;
  parts.push_back(std::move(component));
  return Name(std::move(parts));
}

std::string Name::to_string() const {
  if (components_.empty()) return "/";
  std::string out;
  for (const auto& c : components_) {
    out.push_back('/');
    out += c;
  }
  return out;
}

Name parse_name(std::string_view text) { return Name::parse(text); }

bool is_prefix_of(const Name& y, const Name& x) {
  const auto& yc = y.components();
  const auto& xc = x.components();
  if (yc.size() > xc.size()) return false;
  return std::equal(yc.begin(), yc.end(), xc.begin());
}

bool matches_interest(const Interest& interest, const Name& object_name) {
  return is_prefix_of(interest.name, object_name) && !interest.exclusions.contains(object_name);
}

bool matches_interest(const Interest& interest, const ContentObject& object) {
  return matches_interest(interest, object.name);
}

}  // namespace conlab
