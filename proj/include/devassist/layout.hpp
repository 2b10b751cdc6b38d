#pragma once

// Constraint-layout analysis: XML -> widget tree -> constraint graph ->
// natural-language statements and lint findings.
//
// Schema: the root element is the container; every descendant element is a
// widget whose element name is its kind. Recognized attributes (an optional
// namespace prefix such as "android:" or "app:" is ignored):
//   id, visibility, onClick, clickable,
//   layout_below, layout_above, layout_toLeftOf, layout_toRightOf,
//   layout_centeredBelow, layout_centeredAbove, layout_centerInParent
// Id references may be written "B", "@id/B" or "@+id/B".

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "devassist/common.hpp"

namespace devassist::layout {

struct Widget {
  std::optional<std::string> id;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> attributes;
  size_t document_order = 0;

  // Value of a schema attribute, matching "name" or "<prefix>:name".
  std::optional<std::string> attribute(std::string_view name) const;
};

struct LayoutTree {
  std::vector<Widget> widgets;  // document order
};

class LayoutError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Throws LayoutError for malformed XML or duplicate widget ids.
LayoutTree parse_layout(std::string_view xml);

enum class Visibility { Visible, Invisible, Gone };
enum class Relation { Below, Above, LeftOf, RightOf, CenteredBelow, CenteredAbove, CenterInParent };

std::string_view to_string(Visibility v);
std::string_view to_string(Relation r);

struct WidgetNode {
  std::string id;  // declared id, or "@<document_order>" for anonymous widgets
  std::string kind;
  Visibility visibility = Visibility::Visible;
  bool interactive = false;
  bool has_click_handler = false;
  size_t document_order = 0;
};

inline constexpr size_t kParent = static_cast<size_t>(-1);

struct ConstraintEdge {
  size_t src = 0;
  Relation relation = Relation::Below;
  size_t target = kParent;  // node index, or kParent
};

enum class FindingKind { MissingClickHandler, ConflictingVisibility, ConstraintCycle, DanglingReference };

std::string_view to_string(FindingKind kind);

struct Inconsistency {
  FindingKind kind;
  std::vector<std::string> widgets;
  std::string message;

  bool operator==(const Inconsistency&) const = default;
};

struct ConstraintGraph {
  std::vector<WidgetNode> nodes;
  std::vector<ConstraintEdge> edges;
  std::vector<Inconsistency> dangling;  // DanglingReference findings from construction
};

ConstraintGraph build_constraint_graph(const LayoutTree& tree);

struct LayoutStatement {
  std::string text;
  std::string subject_id;
  Relation relation;
  std::string object_id;  // empty for CenterInParent

  bool operator==(const LayoutStatement&) const = default;
};

std::vector<LayoutStatement> describe(const ConstraintGraph& graph);

std::vector<Inconsistency> detect_inconsistencies(const ConstraintGraph& graph);

// Directed cycles among positional edges: one finding per strongly connected
// component that contains a cycle. The reported path is a shortest cycle
// through the component's smallest id, starting at that id.
std::vector<std::vector<size_t>> find_constraint_cycles(const ConstraintGraph& graph);

struct ValidityReport {
  std::vector<LayoutStatement> statements;
  std::vector<Inconsistency> findings;
  double elapsed_ms = 0.0;
};

ValidityReport validity_check(const ConstraintGraph& graph);
// Same, timing parse and graph construction as well.
ValidityReport validity_check_xml(std::string_view xml);

}  // namespace devassist::layout
