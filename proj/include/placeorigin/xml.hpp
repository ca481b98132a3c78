#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace placeorigin::xml {

/// Element with qualified (unresolved) names. `text` concatenates the
/// character data that appears directly inside the element.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;

  const std::string* attribute(std::string_view qname) const;
};

struct Document {
  Element root;
  /// General entities declared in the internal DTD subset.
  std::map<std::string, std::string> entities;
};

/// Non-validating parser for well-formed XML 1.0: elements, attributes,
/// character and entity references (predefined plus internal-subset general
/// entities), CDATA, comments and processing instructions. Throws
/// Error(ParseError) with a byte offset.
Document parse(std::string_view input);

std::string escape_text(std::string_view s);
std::string escape_attribute(std::string_view s);

/// Splits "prefix:local"; prefix is empty when there is no colon.
std::pair<std::string_view, std::string_view> split_qname(std::string_view qname);

bool is_ncname(std::string_view s);

/// Namespace scope for walking a parsed tree.
class NamespaceScope {
 public:
  /// Registers xmlns / xmlns:p attributes of `e` and returns a child scope.
  NamespaceScope enter(const Element& e) const;
  std::optional<std::string> resolve_prefix(std::string_view prefix) const;
  /// Expands a qualified name to prefix-namespace + local; nullopt for an
  /// undeclared prefix.
  std::optional<std::string> expand(std::string_view qname) const;

 private:
  std::map<std::string, std::string, std::less<>> bindings_{
      {"xml", "http://www.w3.org/XML/1998/namespace"}};
};

}  // namespace placeorigin::xml
