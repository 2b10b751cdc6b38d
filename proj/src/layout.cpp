#include "devassist/layout.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <deque>
#include <unordered_map>

#include "devassist/xml.hpp"

namespace devassist::layout {

namespace {

struct RelationSpec {
  Relation relation;
  std::string_view attribute;
  std::string_view phrase;
};

constexpr std::array<RelationSpec, 7> kRelations = {{
    {Relation::Below, "layout_below", "is below"},
    {Relation::Above, "layout_above", "is above"},
    {Relation::LeftOf, "layout_toLeftOf", "is to the left of"},
    {Relation::RightOf, "layout_toRightOf", "is to the right of"},
    {Relation::CenteredBelow, "layout_centeredBelow", "is centered below"},
    {Relation::CenteredAbove, "layout_centeredAbove", "is centered above"},
    {Relation::CenterInParent, "layout_centerInParent", "is centered in its parent"},
}};

const RelationSpec& spec(Relation r) { return kRelations[static_cast<size_t>(r)]; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string normalize_id(std::string_view ref) {
  for (std::string_view prefix : {"@+id/", "@id/"}) {
    if (ref.starts_with(prefix)) return std::string(ref.substr(prefix.size()));
  }
  return std::string(ref);
}

void collect(const xml::Element& el, LayoutTree& tree, std::unordered_map<std::string, size_t>& ids) {
  for (const auto& child : el.children) {
    Widget w;
    w.kind = child.name;
    w.attributes = child.attributes;
    w.document_order = tree.widgets.size();
    if (auto id = w.attribute("id")) {
      w.id = normalize_id(*id);
      if (w.id->empty()) throw LayoutError("empty widget id", child.line, child.column);
      if (!ids.emplace(*w.id, w.document_order).second) {
        throw LayoutError("duplicate widget id '" + *w.id + "'", child.line, child.column);
      }
    }
    tree.widgets.push_back(std::move(w));
    collect(child, tree, ids);
  }
}

std::string subject_phrase(const WidgetNode& n) { return n.kind + " " + n.id; }

// Edge indices in statement order: subject document order, then relation
// name, then target document order.
std::vector<size_t> statement_order(const ConstraintGraph& g) {
  std::vector<size_t> order(g.edges.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto target_order = [&](size_t t) { return t == kParent ? size_t{0} : g.nodes[t].document_order + 1; };
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ea = g.edges[a];
    const auto& eb = g.edges[b];
    const auto oa = g.nodes[ea.src].document_order;
    const auto ob = g.nodes[eb.src].document_order;
    if (oa != ob) return oa < ob;
    const auto ra = to_string(ea.relation);
    const auto rb = to_string(eb.relation);
    if (ra != rb) return ra < rb;
    return target_order(ea.target) < target_order(eb.target);
  });
  return order;
}

std::vector<std::vector<size_t>> strongly_connected(const std::vector<std::vector<size_t>>& adj) {
  // Iterative Tarjan.
  const size_t n = adj.size();
  constexpr size_t kUnvisited = static_cast<size_t>(-1);
  std::vector<size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<size_t> stack;
  std::vector<std::vector<size_t>> out;
  size_t counter = 0;

  struct Frame {
    size_t node;
    size_t next_edge;
  };
  std::vector<Frame> call;
  for (size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_edge < adj[f.node].size()) {
        const size_t w = adj[f.node][f.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      const size_t v = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
      if (low[v] == index[v]) {
        std::vector<size_t> comp;
        size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> Widget::attribute(std::string_view name) const {
  for (const auto& [key, value] : attributes) {
    if (key == name) return value;
    const auto colon = key.rfind(':');
    if (colon != std::string::npos && std::string_view(key).substr(colon + 1) == name) return value;
  }
  return std::nullopt;
}

LayoutTree parse_layout(std::string_view xml_text) {
  xml::Element root;
  try {
    root = xml::parse(xml_text);
  } catch (const xml::XmlError& e) {
    throw LayoutError(std::string("malformed layout XML: ") + e.what(), e.line(), e.column());
  }
  LayoutTree tree;
  std::unordered_map<std::string, size_t> ids;
  collect(root, tree, ids);
  return tree;
}

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::Visible: return "visible";
    case Visibility::Invisible: return "invisible";
    case Visibility::Gone: return "gone";
  }
  return "?";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::Below: return "Below";
    case Relation::Above: return "Above";
    case Relation::LeftOf: return "LeftOf";
    case Relation::RightOf: return "RightOf";
    case Relation::CenteredBelow: return "CenteredBelow";
    case Relation::CenteredAbove: return "CenteredAbove";
    case Relation::CenterInParent: return "CenterInParent";
  }
  return "?";
}

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::MissingClickHandler: return "MissingClickHandler";
    case FindingKind::ConflictingVisibility: return "ConflictingVisibility";
    case FindingKind::ConstraintCycle: return "ConstraintCycle";
    case FindingKind::DanglingReference: return "DanglingReference";
  }
  return "?";
}

ConstraintGraph build_constraint_graph(const LayoutTree& tree) {
  ConstraintGraph g;
  std::unordered_map<std::string, size_t> by_id;
  g.nodes.reserve(tree.widgets.size());
  for (const auto& w : tree.widgets) {
    WidgetNode n;
    n.id = w.id.value_or("@" + std::to_string(w.document_order));
    n.kind = w.kind;
    n.document_order = w.document_order;
    const auto vis = lower(w.attribute("visibility").value_or("visible"));
    n.visibility = vis == "gone" ? Visibility::Gone : vis == "invisible" ? Visibility::Invisible : Visibility::Visible;
    n.has_click_handler = w.attribute("onClick").has_value();
    n.interactive = w.kind == "Button" || w.kind == "ImageButton" || lower(w.attribute("clickable").value_or("")) == "true";
    if (w.id) by_id.emplace(*w.id, g.nodes.size());
    g.nodes.push_back(std::move(n));
  }

  for (size_t i = 0; i < tree.widgets.size(); ++i) {
    const auto& w = tree.widgets[i];
    for (const auto& rel : kRelations) {
      const auto value = w.attribute(rel.attribute);
      if (!value) continue;
      if (rel.relation == Relation::CenterInParent) {
        if (lower(*value) == "true") g.edges.push_back({i, rel.relation, kParent});
        continue;
      }
      const std::string ref = normalize_id(*value);
      if (auto it = by_id.find(ref); it != by_id.end()) {
        g.edges.push_back({i, rel.relation, it->second});
      } else {
        g.dangling.push_back({FindingKind::DanglingReference,
                              {g.nodes[i].id},
                              subject_phrase(g.nodes[i]) + " references missing widget '" + ref + "' via " +
                                  std::string(rel.attribute)});
      }
    }
  }
  return g;
}

std::vector<LayoutStatement> describe(const ConstraintGraph& graph) {
  std::vector<LayoutStatement> out;
  out.reserve(graph.edges.size());
  for (size_t e : statement_order(graph)) {
    const auto& edge = graph.edges[e];
    const auto& subject = graph.nodes[edge.src];
    LayoutStatement st;
    st.subject_id = subject.id;
    st.relation = edge.relation;
    st.text = subject_phrase(subject) + " " + std::string(spec(edge.relation).phrase);
    if (edge.target != kParent) {
      const auto& object = graph.nodes[edge.target];
      st.object_id = object.id;
      st.text += " " + subject_phrase(object);
    }
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<std::vector<size_t>> find_constraint_cycles(const ConstraintGraph& graph) {
  const size_t n = graph.nodes.size();
  std::vector<std::vector<size_t>> adj(n);
  std::vector<bool> self_loop(n, false);
  for (const auto& e : graph.edges) {
    if (e.target == kParent) continue;
    adj[e.src].push_back(e.target);
    if (e.src == e.target) self_loop[e.src] = true;
  }

  std::vector<std::vector<size_t>> cycles;
  std::vector<size_t> component_of(n, 0);
  const auto components = strongly_connected(adj);
  for (size_t c = 0; c < components.size(); ++c) {
    for (size_t v : components[c]) component_of[v] = c;
  }
  for (size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    if (comp.size() == 1 && !self_loop[comp[0]]) continue;
    const size_t start = *std::min_element(comp.begin(), comp.end(), [&](size_t a, size_t b) {
      return graph.nodes[a].id < graph.nodes[b].id;
    });
    if (self_loop[start]) {
      cycles.push_back({start});
      continue;
    }
    // Shortest path start -> ... -> start inside the component.
    std::unordered_map<size_t, size_t> parent;
    std::deque<size_t> queue{start};
    parent[start] = start;
    std::optional<size_t> last;
    while (!queue.empty() && !last) {
      const size_t u = queue.front();
      queue.pop_front();
      for (size_t v : adj[u]) {
        if (component_of[v] != c) continue;
        if (v == start) {
          last = u;
          break;
        }
        if (parent.emplace(v, u).second) queue.push_back(v);
      }
    }
    std::vector<size_t> path;
    for (size_t v = *last; v != start; v = parent[v]) path.push_back(v);
    path.push_back(start);
    std::reverse(path.begin(), path.end());
    cycles.push_back(std::move(path));
  }
  std::sort(cycles.begin(), cycles.end(), [&](const auto& a, const auto& b) {
    return graph.nodes[a.front()].id < graph.nodes[b.front()].id;
  });
  return cycles;
}

std::vector<Inconsistency> detect_inconsistencies(const ConstraintGraph& graph) {
  std::vector<Inconsistency> out;
  for (const auto& n : graph.nodes) {
    if (n.interactive && !n.has_click_handler) {
      out.push_back({FindingKind::MissingClickHandler, {n.id}, subject_phrase(n) + " is interactive but has no onClick handler"});
    }
  }
  for (size_t e : statement_order(graph)) {
    const auto& edge = graph.edges[e];
    if (edge.target == kParent) continue;
    const auto& target = graph.nodes[edge.target];
    if (target.visibility != Visibility::Gone) continue;
    const auto& src = graph.nodes[edge.src];
    out.push_back({FindingKind::ConflictingVisibility,
                   {src.id, target.id},
                   subject_phrase(src) + " " + std::string(spec(edge.relation).phrase) + " " + subject_phrase(target) +
                       ", which has visibility gone"});
  }
  for (const auto& cycle : find_constraint_cycles(graph)) {
    Inconsistency f{FindingKind::ConstraintCycle, {}, "constraint cycle: "};
    for (size_t v : cycle) {
      f.widgets.push_back(graph.nodes[v].id);
      f.message += graph.nodes[v].id + " -> ";
    }
    f.message += graph.nodes[cycle.front()].id;
    out.push_back(std::move(f));
  }
  out.insert(out.end(), graph.dangling.begin(), graph.dangling.end());
  return out;
}

ValidityReport validity_check(const ConstraintGraph& graph) {
  const auto start = std::chrono::steady_clock::now();
  ValidityReport r;
  r.statements = describe(graph);
  r.findings = detect_inconsistencies(graph);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ValidityReport validity_check_xml(std::string_view xml_text) {
  const auto start = std::chrono::steady_clock::now();
  const auto graph = build_constraint_graph(parse_layout(xml_text));
  ValidityReport r;
  r.statements = describe(graph);
  r.findings = detect_inconsistencies(graph);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace devassist::layout
