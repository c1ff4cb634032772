#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmlhub/article.hpp"

namespace mmlhub {

/// Article dependency DAG. An edge (from, to) means `from` imports `to`.
struct DepGraph {
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> edges;
  std::map<std::string, std::size_t> layers;  // empty until assign_layers
  bool reduced = false;
  std::vector<std::string> warnings;

  bool has_layers() const noexcept { return !nodes.empty() && layers.size() == nodes.size(); }
  friend bool operator==(const DepGraph& a, const DepGraph& b) {
    return a.nodes == b.nodes && a.edges == b.edges && a.layers == b.layers &&
           a.reduced == b.reduced;
  }
};

/// Directive kinds that produce edges unless configured otherwise.
/// Vocabulary files and requirement units are not library articles.
std::set<DirectiveKind> default_directive_kinds();

/// Throws CycleError carrying a witness cycle such as [A, B, A].
DepGraph build_graph(const std::vector<Article>& articles, const std::set<DirectiveKind>& kinds);

/// Keeps (u, v) iff no path u -> ... -> v of length >= 2 exists.
/// Throws Error(NotADag) on cyclic input.
DepGraph transitive_reduction(const DepGraph& g);

/// Longest-path layering: sinks are 0, otherwise 1 + max over dependencies.
DepGraph assign_layers(const DepGraph& g);

/// Induced subgraph within undirected distance `radius` of `center`.
DepGraph neighborhood(const DepGraph& g, std::string_view center, std::size_t radius);

/// Case-insensitive: exact, then prefix, then substring matches; each tier sorted.
std::vector<std::string> search_nodes(const DepGraph& g, std::string_view query);

/// Deterministic Graphviz DOT text; layers become the `rank` node attribute.
std::string export_dot(const DepGraph& g);

/// DOT variant carrying sfdp layout hints for external rendering.
std::string export_sfdp(const DepGraph& g);

/// {"nodes":[{"id","layer"}],"edges":[{"from","to"}]}, arrays sorted.
std::string export_json(const DepGraph& g);

}  // namespace mmlhub
