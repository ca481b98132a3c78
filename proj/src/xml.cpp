#include "placeorigin/xml.hpp"

#include <charconv>

#include "placeorigin/error.hpp"

namespace placeorigin::xml {

const std::string* Element::attribute(std::string_view qname) const {
  for (const auto& [k, v] : attributes) {
    if (k == qname) return &v;
  }
  return nullptr;
}

namespace {

bool is_name_start(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
         c == ':' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view in) : in_(in) {}

  Document run() {
    Document doc;
    skip_prolog(doc);
    if (!peek_is("<")) fail("expected root element");
    doc.root = element(doc);
    skip_misc();
    if (pos_ != in_.size()) fail("content after root element");
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                "xml at byte " + std::to_string(pos_) + ": " + msg);
  }

  bool peek_is(std::string_view s) const { return in_.substr(pos_).starts_with(s); }

  void expect(std::string_view s) {
    if (!peek_is(s)) fail("expected '" + std::string(s) + "'");
    pos_ += s.size();
  }

  void skip_ws() {
    while (pos_ < in_.size() && is_space(in_[pos_])) ++pos_;
  }

  void skip_until(std::string_view end) {
    const auto p = in_.find(end, pos_);
    if (p == std::string_view::npos) fail("unterminated construct");
    pos_ = p + end.size();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (peek_is("<!--")) {
        skip_until("-->");
      } else if (peek_is("<?")) {
        skip_until("?>");
      } else {
        return;
      }
    }
  }

  std::string name() {
    const std::size_t start = pos_;
    if (pos_ >= in_.size() || !is_name_start(static_cast<unsigned char>(in_[pos_]))) {
      fail("expected a name");
    }
    while (pos_ < in_.size() && is_name_char(static_cast<unsigned char>(in_[pos_]))) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  std::string quoted_raw() {
    if (pos_ >= in_.size() || (in_[pos_] != '"' && in_[pos_] != '\'')) {
      fail("expected quoted value");
    }
    const char q = in_[pos_++];
    const auto end = in_.find(q, pos_);
    if (end == std::string_view::npos) fail("unterminated quoted value");
    std::string v(in_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return v;
  }

  void skip_prolog(Document& doc) {
    for (;;) {
      skip_misc();
      if (peek_is("<!DOCTYPE")) {
        doctype(doc);
      } else {
        return;
      }
    }
  }

  void doctype(Document& doc) {
    expect("<!DOCTYPE");
    while (pos_ < in_.size() && in_[pos_] != '[' && in_[pos_] != '>') {
      if (in_[pos_] == '"' || in_[pos_] == '\'') {
        quoted_raw();
      } else {
        ++pos_;
      }
    }
    if (peek_is("[")) {
      ++pos_;
      for (;;) {
        skip_ws();
        if (peek_is("]")) {
          ++pos_;
          break;
        }
        if (peek_is("<!ENTITY")) {
          pos_ += 8;
          skip_ws();
          if (peek_is("%")) fail("parameter entities are not supported");
          auto n = name();
          skip_ws();
          if (peek_is("SYSTEM") || peek_is("PUBLIC")) fail("external entities are not supported");
          const auto raw = quoted_raw();
          // Entity replacement text: expand character references only.
          doc.entities.emplace(std::move(n), expand_refs(raw, doc, /*chars_only=*/true));
          skip_ws();
          expect(">");
        } else if (peek_is("<!--")) {
          skip_until("-->");
        } else if (peek_is("<?")) {
          skip_until("?>");
        } else if (peek_is("<!")) {
          // ELEMENT / ATTLIST / NOTATION declarations carry no data we use.
          while (pos_ < in_.size() && in_[pos_] != '>') {
            if (in_[pos_] == '"' || in_[pos_] == '\'') {
              quoted_raw();
            } else {
              ++pos_;
            }
          }
          expect(">");
        } else {
          fail("unexpected content in internal subset");
        }
      }
      skip_ws();
    }
    expect(">");
  }

  std::string expand_refs(std::string_view raw, const Document& doc,
                          bool chars_only = false, int depth = 0) const {
    if (depth > 8) fail("entity nesting too deep");
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated reference");
      const auto ref = raw.substr(i + 1, semi - i - 1);
      if (!ref.empty() && ref[0] == '#') {
        std::uint32_t cp = 0;
        const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
        const auto digits = ref.substr(hex ? 2 : 1);
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                       cp, hex ? 16 : 10);
        if (ec != std::errc() || p != digits.data() + digits.size() || digits.empty()) {
          fail("bad character reference");
        }
        append_utf8(out, cp);
      } else if (chars_only) {
        out.append(raw.substr(i, semi - i + 1));
      } else if (ref == "lt") {
        out.push_back('<');
      } else if (ref == "gt") {
        out.push_back('>');
      } else if (ref == "amp") {
        out.push_back('&');
      } else if (ref == "apos") {
        out.push_back('\'');
      } else if (ref == "quot") {
        out.push_back('"');
      } else {
        const auto it = doc.entities.find(std::string(ref));
        if (it == doc.entities.end()) fail("undeclared entity '" + std::string(ref) + "'");
        out.append(expand_refs(it->second, doc, false, depth + 1));
      }
      i = semi;
    }
    return out;
  }

  Element element(const Document& doc) {
    expect("<");
    Element e;
    e.name = name();
    for (;;) {
      skip_ws();
      if (peek_is("/>")) {
        pos_ += 2;
        return e;
      }
      if (peek_is(">")) {
        ++pos_;
        break;
      }
      auto key = name();
      skip_ws();
      expect("=");
      skip_ws();
      const auto raw = quoted_raw();
      if (raw.find('<') != std::string::npos) fail("'<' in attribute value");
      auto value = expand_refs(raw, doc);
      for (const auto& [k, v] : e.attributes) {
        if (k == key) fail("duplicate attribute " + key);
      }
      e.attributes.emplace_back(std::move(key), std::move(value));
    }
    for (;;) {
      if (pos_ >= in_.size()) fail("unterminated element " + e.name);
      if (peek_is("</")) {
        pos_ += 2;
        const auto closing = name();
        if (closing != e.name) fail("mismatched closing tag " + closing);
        skip_ws();
        expect(">");
        return e;
      }
      if (peek_is("<!--")) {
        skip_until("-->");
      } else if (peek_is("<![CDATA[")) {
        pos_ += 9;
        const auto end = in_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        e.text.append(in_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (peek_is("<?")) {
        skip_until("?>");
      } else if (peek_is("<")) {
        e.children.push_back(element(doc));
      } else {
        const auto end = in_.find('<', pos_);
        if (end == std::string_view::npos) fail("unterminated element " + e.name);
        e.text.append(expand_refs(in_.substr(pos_, end - pos_), doc));
        pos_ = end;
      }
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

Document parse(std::string_view input) { return Parser(input).run(); }

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attribute(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::pair<std::string_view, std::string_view> split_qname(std::string_view qname) {
  const auto colon = qname.find(':');
  if (colon == std::string_view::npos) return {{}, qname};
  return {qname.substr(0, colon), qname.substr(colon + 1)};
}

bool is_ncname(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s[0]);
  if (!is_name_start(first) || first == ':') return false;
  for (unsigned char c : s) {
    if (!is_name_char(c) || c == ':') return false;
  }
  return true;
}

NamespaceScope NamespaceScope::enter(const Element& e) const {
  NamespaceScope child = *this;
  for (const auto& [k, v] : e.attributes) {
    if (k == "xmlns") {
      child.bindings_[""] = v;
    } else if (k.starts_with("xmlns:")) {
      child.bindings_[k.substr(6)] = v;
    }
  }
  return child;
}

std::optional<std::string> NamespaceScope::resolve_prefix(std::string_view prefix) const {
  const auto it = bindings_.find(prefix);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> NamespaceScope::expand(std::string_view qname) const {
  const auto [prefix, local] = split_qname(qname);
  const auto ns = resolve_prefix(prefix);
  if (!ns) return std::nullopt;
  return *ns + std::string(local);
}

}  // namespace placeorigin::xml
