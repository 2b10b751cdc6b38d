#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "devassist/common.hpp"

namespace devassist::embed {

enum class EdgeKind : uint8_t { Child, NextSibling, Invokes, Inherits };
inline constexpr size_t kEdgeKindCount = 4;

std::string_view to_string(EdgeKind kind);

struct CodeNode {
  uint32_t id = 0;
  std::string label;                // node kind, e.g. "class", "call"
  std::optional<std::string> name;  // identifier or literal text

  bool operator==(const CodeNode&) const = default;
};

struct CodeEdge {
  uint32_t src = 0;
  uint32_t dst = 0;
  EdgeKind kind = EdgeKind::Child;

  bool operator==(const CodeEdge&) const = default;
};

// AST-derived graph for one source unit. Node ids are dense: nodes[i].id == i.
struct CodeGraph {
  std::vector<CodeNode> nodes;
  std::vector<CodeEdge> edges;

  bool empty() const { return nodes.empty(); }
  uint32_t add_node(std::string label, std::optional<std::string> name = std::nullopt);
  void add_edge(uint32_t src, uint32_t dst, EdgeKind kind);

  bool operator==(const CodeGraph&) const = default;
};

// Node labels with special meaning to the embedder.
namespace labels {
inline constexpr std::string_view kUnit = "unit";
inline constexpr std::string_view kClass = "class";
inline constexpr std::string_view kMethod = "method";
inline constexpr std::string_view kCall = "call";
inline constexpr std::string_view kIdentifier = "identifier";
inline constexpr std::string_view kStringLiteral = "string-literal";
inline constexpr std::string_view kNumberLiteral = "number-literal";
inline constexpr std::string_view kKeywordLiteral = "keyword-literal";
inline constexpr std::string_view kExternalCall = "external-call";
inline constexpr std::string_view kExternalClass = "external-class";
}  // namespace labels

bool is_literal_label(std::string_view label);

// Thrown for source the selected parser cannot handle; carries line/column.
class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownParserError : public Error {
 public:
  using Error::Error;
};

using ParserFn = std::function<CodeGraph(std::string_view source)>;

// Built-ins: "mini" (C/Java-like subset) and "tokens" (flat identifier and
// literal bag, used as a fallback for free text).
CodeGraph parse_to_graph(std::string_view source, std::string_view parser_id = "mini");

void register_parser(std::string id, ParserFn parser);
bool has_parser(std::string_view id);

CodeGraph parse_mini(std::string_view source);
CodeGraph parse_tokens(std::string_view source);

}  // namespace devassist::embed
