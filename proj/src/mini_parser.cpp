#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>
#include <utility>

#include "devassist/code_graph.hpp"

namespace devassist::embed {

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Child: return "child";
    case EdgeKind::NextSibling: return "next_sibling";
    case EdgeKind::Invokes: return "invokes";
    case EdgeKind::Inherits: return "inherits";
  }
  return "?";
}

bool is_literal_label(std::string_view label) {
  return label == labels::kStringLiteral || label == labels::kNumberLiteral || label == labels::kKeywordLiteral;
}

uint32_t CodeGraph::add_node(std::string label, std::optional<std::string> name) {
  const auto id = static_cast<uint32_t>(nodes.size());
  nodes.push_back({id, std::move(label), std::move(name)});
  return id;
}

void CodeGraph::add_edge(uint32_t src, uint32_t dst, EdgeKind kind) {
  if (src >= nodes.size() || dst >= nodes.size()) throw InvalidArgument("code graph: edge endpoint out of range");
  edges.push_back({src, dst, kind});
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, String, Char, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  Lexer(std::string_view src, bool lenient) : src_(src), lenient_(lenient) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = src_[pos_];
      if (is_ident_start(c)) {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' || src_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (c == '"' || c == '\'') {
        t.kind = c == '"' ? Tok::String : Tok::Char;
        t.text = quoted(c, t.line, t.column);
      } else if (auto op = punct(); !op.empty()) {
        t.kind = Tok::Punct;
        t.text = std::move(op);
      } else {
        if (!lenient_) {
          throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
        }
        advance();
        continue;
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        const int line = line_, col = col_;
        advance();
        advance();
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= src_.size()) {
          if (!lenient_) throw SyntaxError("unterminated block comment", line, col);
          pos_ = src_.size();
          return;
        }
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string quoted(char quote, int line, int col) {
    std::string text;
    advance();
    while (pos_ < src_.size() && src_[pos_] != quote) {
      if (src_[pos_] == '\n') break;
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) text += advance();
      text += advance();
    }
    if (pos_ >= src_.size() || src_[pos_] != quote) {
      if (!lenient_) throw SyntaxError("unterminated literal", line, col);
      return text;
    }
    advance();
    return text;
  }

  std::string punct() {
    static constexpr std::string_view kTwo[] = {"==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
                                                "-=", "*=", "/=", "%=", "->", "::", "<<"};
    if (pos_ + 1 < src_.size()) {
      const std::string_view two = src_.substr(pos_, 2);
      for (auto op : kTwo) {
        if (two == op) {
          advance();
          advance();
          return std::string(op);
        }
      }
    }
    static constexpr std::string_view kOne = "{}()[];,.=<>+-*/%!&|^~?:@";
    if (kOne.find(src_[pos_]) != std::string_view::npos) return std::string(1, advance());
    return {};
  }

  std::string_view src_;
  bool lenient_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser: tokens -> intermediate tree -> CodeGraph.

struct Ast {
  std::string label;
  std::optional<std::string> name;
  std::vector<Ast> children;
  std::vector<std::string> supers;  // classes only
};

const std::set<std::string, std::less<>> kModifiers = {
    "public", "private", "protected", "static", "final",    "abstract", "synchronized",
    "native", "default", "override",  "const",  "virtual", "inline",   "transient", "volatile"};

const std::set<std::string, std::less<>> kReserved = {
    "return", "if",    "else",  "while",  "for",     "new",   "class", "interface", "extends",
    "implements", "throw", "try", "catch", "finally", "break", "continue", "package", "import",
    "true",   "false", "null",  "this",   "super",   "throws", "do"};

class MiniParser {
 public:
  explicit MiniParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Ast parse_unit() {
    Ast unit{std::string(labels::kUnit), std::nullopt, {}, {}};
    while (!at_end()) {
      if (is_ident("package") || is_ident("import")) {
        unit.children.push_back(parse_import());
        continue;
      }
      const size_t save = pos_;
      skip_modifiers();
      if (is_ident("class") || is_ident("interface")) {
        unit.children.push_back(parse_class());
        continue;
      }
      if (looks_like_method()) {
        unit.children.push_back(parse_method(false));
        continue;
      }
      pos_ = save;
      if (auto stmt = parse_statement()) unit.children.push_back(std::move(*stmt));
    }
    return unit;
  }

 private:
  // -- token helpers --------------------------------------------------------
  const Token& peek(size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
  }
  bool is_ident(std::string_view word, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == word;
  }
  bool is_name(size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && !kReserved.contains(peek(ahead).text);
  }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + expected + " but found " + found, t.line, t.column);
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("'" + std::string(p) + "'");
    ++pos_;
  }

  std::string expect_name() {
    if (!is_name()) fail("identifier");
    return toks_[pos_++].text;
  }

  void skip_modifiers() {
    for (;;) {
      if (peek().kind == Tok::Ident && kModifiers.contains(peek().text)) {
        ++pos_;
      } else if (is_punct("@") && peek(1).kind == Tok::Ident) {
        pos_ += 2;
        if (is_punct("(")) skip_balanced("(", ")");
      } else {
        return;
      }
    }
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    int depth = 0;
    do {
      if (at_end()) fail("'" + std::string(close) + "'");
      if (is_punct(open)) ++depth;
      if (is_punct(close)) --depth;
      ++pos_;
    } while (depth > 0);
  }

  // Advances past a type if one starts here; restores position and returns
  // nullopt otherwise.
  std::optional<std::string> try_type() {
    const size_t save = pos_;
    if (!is_name()) return std::nullopt;
    std::string name = toks_[pos_++].text;
    while (is_punct(".") && is_name(1)) {
      name += "." + peek(1).text;
      pos_ += 2;
    }
    if (is_punct("<")) {
      int depth = 0;
      for (;;) {
        if (at_end() || is_punct(";") || is_punct("{") || is_punct(")")) {
          pos_ = save;
          return std::nullopt;
        }
        if (is_punct("<")) ++depth;
        if (is_punct(">")) --depth;
        ++pos_;
        if (depth == 0) break;
      }
    }
    while (is_punct("[") && is_punct("]", 1)) {
      name += "[]";
      pos_ += 2;
    }
    return name;
  }

  Ast parse_type_node() {
    auto t = try_type();
    if (!t) fail("type");
    return {"type", *t, {}, {}};
  }

  bool looks_like_method() {
    const size_t save = pos_;
    bool result = false;
    if (try_type() && is_name() && is_punct("(", 1)) result = true;
    pos_ = save;
    return result;
  }

  bool looks_like_constructor() const {
    if (!is_name() || !is_punct("(", 1)) return false;
    // name ( ... ) {  -- scan to the matching paren.
    size_t i = pos_ + 1;
    int depth = 0;
    for (; i < toks_.size() && toks_[i].kind != Tok::End; ++i) {
      if (toks_[i].kind != Tok::Punct) continue;
      if (toks_[i].text == "(") ++depth;
      if (toks_[i].text == ")" && --depth == 0) break;
    }
    if (i + 1 >= toks_.size()) return false;
    const Token& after = toks_[i + 1];
    return (after.kind == Tok::Punct && after.text == "{") || (after.kind == Tok::Ident && after.text == "throws");
  }

  bool looks_like_local() {
    const size_t save = pos_;
    bool result = false;
    if (try_type() && is_name()) {
      result = is_punct("=", 1) || is_punct(";", 1) || is_punct(",", 1) || is_punct(":", 1);
    }
    pos_ = save;
    return result;
  }

  // -- declarations -----------------------------------------------------------
  Ast parse_import() {
    const std::string kind = toks_[pos_++].text;
    std::string name;
    if (is_ident("static")) ++pos_;
    for (;;) {
      if (peek().kind == Tok::Ident) {
        name += toks_[pos_++].text;
      } else if (is_punct("*")) {
        name += "*";
        ++pos_;
      } else {
        fail("qualified name");
      }
      if (!is_punct(".")) break;
      name += ".";
      ++pos_;
    }
    expect_punct(";");
    return {kind, name, {}, {}};
  }

  Ast parse_class() {
    ++pos_;  // class | interface
    Ast cls{std::string(labels::kClass), expect_name(), {}, {}};
    if (is_punct("<")) skip_balanced("<", ">");
    auto type_list = [&] {
      do {
        if (is_punct(",")) ++pos_;
        auto t = try_type();
        if (!t) fail("type name");
        cls.supers.push_back(*t);
      } while (is_punct(","));
    };
    if (is_ident("extends")) {
      ++pos_;
      type_list();
    }
    if (is_ident("implements")) {
      ++pos_;
      type_list();
    }
    expect_punct("{");
    while (!is_punct("}")) {
      if (at_end()) fail("'}'");
      if (is_punct(";")) {
        ++pos_;
        continue;
      }
      skip_modifiers();
      if (is_ident("class") || is_ident("interface")) {
        cls.children.push_back(parse_class());
      } else if (looks_like_constructor()) {
        cls.children.push_back(parse_method(true));
      } else if (looks_like_method()) {
        cls.children.push_back(parse_method(false));
      } else if (looks_like_local()) {
        for (auto& f : parse_declarators("field")) cls.children.push_back(std::move(f));
        expect_punct(";");
      } else {
        fail("member declaration");
      }
    }
    ++pos_;
    return cls;
  }

  Ast parse_method(bool constructor) {
    Ast method{std::string(labels::kMethod), std::nullopt, {}, {}};
    if (!constructor) method.children.push_back(parse_type_node());
    method.name = expect_name();
    expect_punct("(");
    while (!is_punct(")")) {
      skip_modifiers();
      Ast param{"param", std::nullopt, {}, {}};
      param.children.push_back(parse_type_node());
      if (is_punct(".") && is_punct(".", 1) && is_punct(".", 2)) pos_ += 3;  // varargs
      param.name = expect_name();
      method.children.push_back(std::move(param));
      if (!is_punct(",")) break;
      ++pos_;
    }
    expect_punct(")");
    if (is_ident("throws")) {
      ++pos_;
      do {
        if (is_punct(",")) ++pos_;
        if (!try_type()) fail("exception type");
      } while (is_punct(","));
    }
    if (is_punct(";")) {
      ++pos_;
    } else {
      method.children.push_back(parse_block());
    }
    return method;
  }

  std::vector<Ast> parse_declarators(const std::string& label) {
    Ast type = parse_type_node();
    std::vector<Ast> out;
    for (;;) {
      Ast decl{label, expect_name(), {type}, {}};
      if (is_punct("=")) {
        ++pos_;
        decl.children.push_back(parse_expr());
      }
      out.push_back(std::move(decl));
      if (!is_punct(",")) break;
      ++pos_;
    }
    return out;
  }

  // -- statements -------------------------------------------------------------
  Ast parse_block() {
    expect_punct("{");
    Ast block{"block", std::nullopt, {}, {}};
    while (!is_punct("}")) {
      if (at_end()) fail("'}'");
      if (auto stmt = parse_statement()) block.children.push_back(std::move(*stmt));
    }
    ++pos_;
    return block;
  }

  Ast parse_paren_expr() {
    expect_punct("(");
    Ast e = parse_expr();
    expect_punct(")");
    return e;
  }

  Ast parse_required_statement() {
    if (auto s = parse_statement()) return std::move(*s);
    return {"empty", std::nullopt, {}, {}};
  }

  std::optional<Ast> parse_statement() {
    if (is_punct(";")) {
      ++pos_;
      return std::nullopt;
    }
    if (is_punct("{")) return parse_block();
    if (is_ident("return") || is_ident("throw")) {
      Ast s{toks_[pos_++].text, std::nullopt, {}, {}};
      if (!is_punct(";")) s.children.push_back(parse_expr());
      expect_punct(";");
      return s;
    }
    if (is_ident("break") || is_ident("continue")) {
      Ast s{toks_[pos_++].text, std::nullopt, {}, {}};
      expect_punct(";");
      return s;
    }
    if (is_ident("if")) {
      ++pos_;
      Ast s{"if", std::nullopt, {}, {}};
      s.children.push_back(parse_paren_expr());
      s.children.push_back(parse_required_statement());
      if (is_ident("else")) {
        ++pos_;
        s.children.push_back(parse_required_statement());
      }
      return s;
    }
    if (is_ident("while")) {
      ++pos_;
      Ast s{"while", std::nullopt, {}, {}};
      s.children.push_back(parse_paren_expr());
      s.children.push_back(parse_required_statement());
      return s;
    }
    if (is_ident("for")) return parse_for();
    if (is_ident("try")) return parse_try();
    if (is_ident("class") || is_ident("interface")) return parse_class();
    if (looks_like_local()) {
      Ast s{"local-decl", std::nullopt, parse_declarators("local"), {}};
      expect_punct(";");
      return s;
    }
    Ast s{"expr-stmt", std::nullopt, {}, {}};
    s.children.push_back(parse_expr());
    expect_punct(";");
    return s;
  }

  Ast parse_for() {
    ++pos_;
    expect_punct("(");
    Ast s{"for", std::nullopt, {}, {}};
    if (looks_like_local()) {
      const size_t save = pos_;
      auto type = try_type();
      if (is_name() && is_punct(":", 1)) {  // for (T x : xs)
        Ast each{"local", toks_[pos_].text, {{"type", *type, {}, {}}}, {}};
        pos_ += 2;
        each.children.push_back(parse_expr());
        s.children.push_back(std::move(each));
        expect_punct(")");
        s.children.push_back(parse_required_statement());
        return s;
      }
      pos_ = save;
      Ast init{"local-decl", std::nullopt, parse_declarators("local"), {}};
      s.children.push_back(std::move(init));
    } else if (!is_punct(";")) {
      s.children.push_back(parse_expr());
    }
    expect_punct(";");
    if (!is_punct(";")) s.children.push_back(parse_expr());
    expect_punct(";");
    while (!is_punct(")")) {
      s.children.push_back(parse_expr());
      if (!is_punct(",")) break;
      ++pos_;
    }
    expect_punct(")");
    s.children.push_back(parse_required_statement());
    return s;
  }

  Ast parse_try() {
    ++pos_;
    Ast s{"try", std::nullopt, {}, {}};
    s.children.push_back(parse_block());
    while (is_ident("catch")) {
      ++pos_;
      expect_punct("(");
      skip_modifiers();
      Ast c{"catch", std::nullopt, {parse_type_node()}, {}};
      while (is_punct("|")) {
        ++pos_;
        c.children.push_back(parse_type_node());
      }
      c.name = expect_name();
      expect_punct(")");
      c.children.push_back(parse_block());
      s.children.push_back(std::move(c));
    }
    if (is_ident("finally")) {
      ++pos_;
      Ast f{"finally", std::nullopt, {parse_block()}, {}};
      s.children.push_back(std::move(f));
    }
    return s;
  }

  // -- expressions ------------------------------------------------------------
  Ast parse_expr() {
    Ast lhs = parse_ternary();
    static constexpr std::string_view kAssign[] = {"=", "+=", "-=", "*=", "/=", "%="};
    for (auto op : kAssign) {
      if (is_punct(op)) {
        ++pos_;
        Ast rhs = parse_expr();
        return {"assign:" + std::string(op), std::nullopt, {std::move(lhs), std::move(rhs)}, {}};
      }
    }
    return lhs;
  }

  Ast parse_ternary() {
    Ast cond = parse_binary(0);
    if (!is_punct("?")) return cond;
    ++pos_;
    Ast a = parse_expr();
    expect_punct(":");
    Ast b = parse_expr();
    return {"ternary", std::nullopt, {std::move(cond), std::move(a), std::move(b)}, {}};
  }

  int binary_level(const Token& t) const {
    if (t.kind == Tok::Ident && t.text == "instanceof") return 3;
    if (t.kind != Tok::Punct) return -1;
    static const std::map<std::string, int, std::less<>> kLevels = {
        {"||", 0}, {"&&", 1}, {"|", 2}, {"^", 2}, {"&", 2}, {"==", 3}, {"!=", 3}, {"<", 4}, {">", 4},
        {"<=", 4}, {">=", 4}, {"<<", 5}, {"+", 6}, {"-", 6}, {"*", 7}, {"/", 7}, {"%", 7}};
    auto it = kLevels.find(t.text);
    return it == kLevels.end() ? -1 : it->second;
  }

  Ast parse_binary(int min_level) {
    Ast lhs = parse_unary();
    for (;;) {
      const int level = binary_level(peek());
      if (level < 0 || level < min_level) return lhs;
      const std::string op = toks_[pos_++].text;
      Ast rhs = op == "instanceof" ? parse_type_node() : parse_binary(level + 1);
      lhs = Ast{"binary:" + op, std::nullopt, {std::move(lhs), std::move(rhs)}, {}};
    }
  }

  Ast parse_unary() {
    for (std::string_view op : {"!", "-", "+", "++", "--", "~"}) {
      if (is_punct(op)) {
        ++pos_;
        return {"unary:" + std::string(op), std::nullopt, {parse_unary()}, {}};
      }
    }
    return parse_postfix();
  }

  std::vector<Ast> parse_args() {
    expect_punct("(");
    std::vector<Ast> args;
    while (!is_punct(")")) {
      args.push_back(parse_expr());
      if (!is_punct(",")) break;
      ++pos_;
    }
    expect_punct(")");
    return args;
  }

  Ast parse_postfix() {
    Ast e = parse_primary();
    for (;;) {
      if (is_punct(".")) {
        ++pos_;
        std::string member = expect_name();
        if (is_punct("(")) {
          Ast call{std::string(labels::kCall), member, {std::move(e)}, {}};
          for (auto& a : parse_args()) call.children.push_back(std::move(a));
          e = std::move(call);
        } else {
          e = Ast{"member", member, {std::move(e)}, {}};
        }
      } else if (is_punct("[")) {
        ++pos_;
        Ast index{"index", std::nullopt, {std::move(e), parse_expr()}, {}};
        expect_punct("]");
        e = std::move(index);
      } else if (is_punct("++") || is_punct("--")) {
        e = Ast{"postfix:" + toks_[pos_++].text, std::nullopt, {std::move(e)}, {}};
      } else {
        return e;
      }
    }
  }

  Ast parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return {std::string(labels::kNumberLiteral), t.text, {}, {}};
      case Tok::String:
      case Tok::Char:
        ++pos_;
        return {std::string(labels::kStringLiteral), t.text, {}, {}};
      case Tok::Punct:
        if (t.text == "(") return parse_paren_expr();
        fail("expression");
      case Tok::End:
        fail("expression");
      case Tok::Ident:
        break;
    }
    if (t.text == "true" || t.text == "false" || t.text == "null") {
      ++pos_;
      return {std::string(labels::kKeywordLiteral), t.text, {}, {}};
    }
    if (t.text == "this" || t.text == "super") {
      ++pos_;
      return {t.text, std::nullopt, {}, {}};
    }
    if (t.text == "new") {
      ++pos_;
      auto type = try_type();
      if (!type) fail("type after 'new'");
      Ast n{"new", *type, {}, {}};
      if (is_punct("[")) {
        while (is_punct("[")) {
          ++pos_;
          if (!is_punct("]")) n.children.push_back(parse_expr());
          expect_punct("]");
        }
      } else {
        n.children = parse_args();
        if (is_punct("{")) skip_balanced("{", "}");  // anonymous class body
      }
      return n;
    }
    if (!is_name()) fail("expression");
    std::string name = toks_[pos_++].text;
    if (is_punct("(")) return {std::string(labels::kCall), std::move(name), parse_args(), {}};
    return {std::string(labels::kIdentifier), std::move(name), {}, {}};
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

// Emits the intermediate tree in pre-order and resolves cross references.
class GraphBuilder {
 public:
  CodeGraph build(const Ast& root) {
    emit(root, std::nullopt, std::nullopt, std::nullopt);
    resolve();
    return std::move(graph_);
  }

 private:
  struct ClassInfo {
    uint32_t node;
    std::string name;
    std::vector<std::string> supers;
  };
  struct MethodInfo {
    uint32_t node;
    std::string name;
    std::optional<uint32_t> owner;
  };
  struct CallInfo {
    uint32_t caller;
    std::string name;
    std::optional<uint32_t> owner;
  };

  uint32_t emit(const Ast& ast, std::optional<uint32_t> parent, std::optional<uint32_t> owner_class,
                std::optional<uint32_t> owner_method) {
    const uint32_t id = graph_.add_node(ast.label, ast.name);
    last_child_.push_back(std::nullopt);
    if (parent) {
      graph_.add_edge(*parent, id, EdgeKind::Child);
      if (auto prev = last_child_[*parent]) graph_.add_edge(*prev, id, EdgeKind::NextSibling);
      last_child_[*parent] = id;
    } else {
      root_ = id;
    }

    if (ast.label == labels::kClass) {
      classes_.push_back({id, ast.name.value_or(""), ast.supers});
      owner_class = id;
      owner_method.reset();
    } else if (ast.label == labels::kMethod) {
      methods_.push_back({id, ast.name.value_or(""), owner_class});
      owner_method = id;
    } else if (ast.label == labels::kCall) {
      calls_.push_back({owner_method.value_or(root_), ast.name.value_or(""), owner_class});
    }
    for (const auto& child : ast.children) emit(child, id, owner_class, owner_method);
    return id;
  }

  uint32_t external(std::string_view label, const std::string& name,
                    std::map<std::string, uint32_t, std::less<>>& cache) {
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    const uint32_t id = graph_.add_node(std::string(label), name);
    cache.emplace(name, id);
    return id;
  }

  void resolve() {
    std::map<std::string, uint32_t, std::less<>> external_classes;
    std::map<std::string, uint32_t, std::less<>> external_calls;
    for (const auto& cls : classes_) {
      for (const auto& super : cls.supers) {
        // Qualified names resolve by their last segment.
        const auto dot = super.rfind('.');
        const std::string simple = dot == std::string::npos ? super : super.substr(dot + 1);
        auto it = std::find_if(classes_.begin(), classes_.end(),
                               [&](const ClassInfo& c) { return c.name == simple && c.node != cls.node; });
        const uint32_t target =
            it != classes_.end() ? it->node : external(labels::kExternalClass, simple, external_classes);
        graph_.add_edge(cls.node, target, EdgeKind::Inherits);
      }
    }
    for (const auto& call : calls_) {
      const MethodInfo* target = nullptr;
      for (const auto& m : methods_) {
        if (m.name != call.name) continue;
        if (m.owner == call.owner) {
          target = &m;
          break;
        }
        if (!target) target = &m;
      }
      const uint32_t dst = target ? target->node : external(labels::kExternalCall, call.name, external_calls);
      graph_.add_edge(call.caller, dst, EdgeKind::Invokes);
    }
  }

  CodeGraph graph_;
  std::vector<std::optional<uint32_t>> last_child_;
  uint32_t root_ = 0;
  std::vector<ClassInfo> classes_;
  std::vector<MethodInfo> methods_;
  std::vector<CallInfo> calls_;
};

std::map<std::string, ParserFn, std::less<>>& registry() {
  static std::map<std::string, ParserFn, std::less<>> parsers = {{"mini", parse_mini}, {"tokens", parse_tokens}};
  return parsers;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CodeGraph parse_mini(std::string_view source) {
  auto tokens = Lexer(source, false).run();
  if (tokens.size() == 1) return {};  // only End: blank or comment-only input
  MiniParser parser(std::move(tokens));
  return GraphBuilder().build(parser.parse_unit());
}

CodeGraph parse_tokens(std::string_view source) {
  const auto tokens = Lexer(source, true).run();
  CodeGraph g;
  std::optional<uint32_t> prev;
  for (const auto& t : tokens) {
    std::string_view label;
    switch (t.kind) {
      case Tok::Ident: label = labels::kIdentifier; break;
      case Tok::Number: label = labels::kNumberLiteral; break;
      case Tok::String:
      case Tok::Char: label = labels::kStringLiteral; break;
      default: continue;
    }
    if (g.empty()) g.add_node(std::string(labels::kUnit));
    const uint32_t id = g.add_node(std::string(label), t.text);
    g.add_edge(0, id, EdgeKind::Child);
    if (prev) g.add_edge(*prev, id, EdgeKind::NextSibling);
    prev = id;
  }
  return g;
}

CodeGraph parse_to_graph(std::string_view source, std::string_view parser_id) {
  ParserFn parser;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(parser_id);
    if (it == registry().end()) throw UnknownParserError("unknown parser '" + std::string(parser_id) + "'");
    parser = it->second;
  }
  return parser(source);
}

void register_parser(std::string id, ParserFn parser) {
  if (!parser) throw InvalidArgument("register_parser: empty parser");
  std::lock_guard lock(registry_mutex());
  registry()[std::move(id)] = std::move(parser);
}

bool has_parser(std::string_view id) {
  std::lock_guard lock(registry_mutex());
  return registry().contains(id);
}

}  // namespace devassist::embed
