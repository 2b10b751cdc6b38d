#include "devassist/xml.hpp"

#include <cctype>
#include <optional>

namespace devassist::xml {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  Element document() {
    skip_misc();
    if (eof()) error("document has no root element");
    if (peek() != '<') error("expected '<'");
    Element root = element();
    skip_misc();
    if (!eof()) error("content after root element");
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  [[noreturn]] void error(const std::string& what) const { throw XmlError(what, line_, col_); }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos_ < s_.size(); ++i) {
      if (s_[pos_++] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    while (!eof() && !starts_with(terminator)) advance();
    if (eof()) error(std::string("unterminated ") + what);
    advance(terminator.size());
  }

  // Whitespace, comments, processing instructions and DOCTYPE.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!DOCTYPE")) {
        int depth = 0;
        while (!eof()) {
          if (peek() == '[') ++depth;
          if (peek() == ']') --depth;
          if (peek() == '>' && depth == 0) break;
          advance();
        }
        if (eof()) error("unterminated DOCTYPE");
        advance();
      } else {
        return;
      }
    }
  }

  static bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool name_char(char c) {
    return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
  }

  std::string name() {
    if (eof() || !name_start(peek())) error("expected a name");
    std::string out;
    while (!eof() && name_char(peek())) {
      out += peek();
      advance();
    }
    return out;
  }

  void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xc0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xe0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp <= 0x10ffff) {
      out += static_cast<char>(0xf0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      error("character reference out of range");
    }
  }

  void entity(std::string& out) {
    advance();  // '&'
    std::string ref;
    while (!eof() && peek() != ';') {
      if (ref.size() > 10) error("malformed entity reference");
      ref += peek();
      advance();
    }
    if (eof()) error("unterminated entity reference");
    advance();
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      const std::string digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) error("malformed character reference");
      unsigned long cp = 0;
      for (char c : digits) {
        if (!(hex ? std::isxdigit(static_cast<unsigned char>(c)) : std::isdigit(static_cast<unsigned char>(c)))) {
          error("malformed character reference");
        }
        cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(c))
                                                                   ? c - '0'
                                                                   : std::tolower(c) - 'a' + 10);
        if (cp > 0x10ffff) error("character reference out of range");
      }
      append_utf8(out, cp);
    } else {
      error("unknown entity '&" + ref + ";'");
    }
  }

  std::string attribute_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) error("expected quoted attribute value");
    const char quote = peek();
    advance();
    std::string out;
    while (!eof() && peek() != quote) {
      if (peek() == '<') error("'<' in attribute value");
      if (peek() == '&') {
        entity(out);
      } else {
        out += peek();
        advance();
      }
    }
    if (eof()) error("unterminated attribute value");
    advance();
    return out;
  }

  Element element() {
    Element el;
    el.line = line_;
    el.column = col_;
    advance();  // '<'
    el.name = name();
    for (;;) {
      const bool had_space = !eof() && std::isspace(static_cast<unsigned char>(peek()));
      skip_space();
      if (eof()) error("unterminated start tag <" + el.name + ">");
      if (starts_with("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) error("expected whitespace before attribute");
      std::string attr = name();
      for (const auto& [k, v] : el.attributes) {
        if (k == attr) error("duplicate attribute '" + attr + "'");
      }
      skip_space();
      if (eof() || peek() != '=') error("expected '=' after attribute name");
      advance();
      skip_space();
      el.attributes.emplace_back(std::move(attr), attribute_value());
    }
    // Content.
    for (;;) {
      if (eof()) error("missing end tag for <" + el.name + ">");
      if (starts_with("</")) {
        advance(2);
        const std::string closing = name();
        if (closing != el.name) error("end tag </" + closing + "> does not match <" + el.name + ">");
        skip_space();
        if (eof() || peek() != '>') error("expected '>'");
        advance();
        return el;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        skip_until("]]>", "CDATA section");
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        el.children.push_back(element());
      } else if (peek() == '&') {
        std::string discard;
        entity(discard);
      } else {
        advance();
      }
    }
  }

  std::string_view s_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

Element parse(std::string_view text) { return Reader(text).document(); }

}  // namespace devassist::xml
