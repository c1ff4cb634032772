#include "mmlhub/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>

#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/text.hpp"

namespace mmlhub {

namespace {

/// Dense index view of a DepGraph: node i is the i-th name in sorted order.
struct IndexedGraph {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> succ;  // sorted ascending

  explicit IndexedGraph(const DepGraph& g) : names(g.nodes.begin(), g.nodes.end()), succ(names.size()) {
    for (const auto& [from, to] : g.edges) succ[index(from)].push_back(index(to));
    for (auto& s : succ) std::sort(s.begin(), s.end());
  }

  std::size_t index(const std::string& name) const {
    auto it = std::lower_bound(names.begin(), names.end(), name);
    if (it == names.end() || *it != name) throw Error(ErrorCode::UnknownNode, "unknown node " + name);
    return static_cast<std::size_t>(it - names.begin());
  }

  std::size_t size() const { return names.size(); }
};

/// Returns a witness cycle (first node repeated at the end) if one exists.
std::optional<std::vector<std::size_t>> find_cycle(const IndexedGraph& g) {
  enum Color : std::uint8_t { White, Gray, Black };
  std::vector<Color> color(g.size(), White);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (node, next successor slot)
  for (std::size_t root = 0; root < g.size(); ++root) {
    if (color[root] != White) continue;
    stack.push_back({root, 0});
    color[root] = Gray;
    while (!stack.empty()) {
      auto& [u, slot] = stack.back();
      if (slot == g.succ[u].size()) {
        color[u] = Black;
        stack.pop_back();
        continue;
      }
      std::size_t v = g.succ[u][slot++];
      if (color[v] == Gray) {
        std::vector<std::size_t> cycle;
        auto it = std::find_if(stack.begin(), stack.end(), [v](const auto& f) { return f.first == v; });
        for (; it != stack.end(); ++it) cycle.push_back(it->first);
        cycle.push_back(v);
        return cycle;
      }
      if (color[v] == White) {
        color[v] = Gray;
        stack.push_back({v, 0});
      }
    }
  }
  return std::nullopt;
}

/// Kahn's algorithm; dependents precede their dependencies. Empty optional on cycles.
std::optional<std::vector<std::size_t>> topological_order(const IndexedGraph& g) {
  std::vector<std::size_t> indegree(g.size(), 0);
  for (const auto& s : g.succ)
    for (auto v : s) ++indegree[v];
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::vector<std::size_t> order;
  order.reserve(g.size());
  while (!ready.empty()) {
    auto u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (auto v : g.succ[u])
      if (--indegree[v] == 0) ready.push_back(v);
  }
  if (order.size() != g.size()) return std::nullopt;
  return order;
}

std::vector<std::size_t> require_dag(const IndexedGraph& g) {
  auto order = topological_order(g);
  if (!order) throw Error(ErrorCode::NotADag, "dependency graph contains a cycle");
  return *order;
}

class Bitset {
 public:
  explicit Bitset(std::size_t bits) : words_((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  Bitset& operator|=(const Bitset& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
  }

 private:
  std::vector<std::uint64_t> words_;
};

std::string quote_dot(std::string_view id) {
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::set<DirectiveKind> default_directive_kinds() {
  return {DirectiveKind::Notations,  DirectiveKind::Constructors, DirectiveKind::Registrations,
          DirectiveKind::Definitions, DirectiveKind::Theorems,    DirectiveKind::Schemes,
          DirectiveKind::Expansions, DirectiveKind::Equalities};
}

DepGraph build_graph(const std::vector<Article>& articles, const std::set<DirectiveKind>& kinds) {
  DepGraph g;
  for (const auto& a : articles)
    if (!g.nodes.insert(a.name.value()).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate article " + a.name.value());

  std::set<std::string> unknown;
  for (const auto& a : articles) {
    for (const auto& d : a.env.entries) {
      if (!kinds.count(d.kind)) continue;
      for (const auto& n : d.names) {
        const auto& target = n.value();
        if (target == a.name.value()) continue;
        if (!g.nodes.count(target)) {
          if (unknown.insert(a.name.value() + "\n" + target).second)
            g.warnings.push_back(a.name.value() + " references " + target +
                                 ", which is not in the corpus");
          continue;
        }
        g.edges.emplace(a.name.value(), target);
      }
    }
  }

  IndexedGraph indexed(g);
  if (auto cycle = find_cycle(indexed)) {
    std::vector<std::string> names;
    for (auto i : *cycle) names.push_back(indexed.names[i]);
    throw CycleError(std::move(names));
  }
  return g;
}

DepGraph transitive_reduction(const DepGraph& g) {
  IndexedGraph ig(g);
  auto order = require_dag(ig);
  const std::size_t n = ig.size();

  // reach[u]: every node reachable from u by a path of length >= 1.
  std::vector<Bitset> reach(n, Bitset(n));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto u = *it;
    for (auto v : ig.succ[u]) {
      reach[u].set(v);
      reach[u] |= reach[v];
    }
  }

  DepGraph out = g;
  out.edges.clear();
  for (std::size_t u = 0; u < n; ++u) {
    Bitset indirect(n);
    for (auto v : ig.succ[u]) indirect |= reach[v];
    for (auto v : ig.succ[u])
      if (!indirect.test(v)) out.edges.emplace(ig.names[u], ig.names[v]);
  }
  out.reduced = true;
  return out;
}

DepGraph assign_layers(const DepGraph& g) {
  IndexedGraph ig(g);
  auto order = require_dag(ig);
  std::vector<std::size_t> layer(ig.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (auto v : ig.succ[*it]) layer[*it] = std::max(layer[*it], layer[v] + 1);

  DepGraph out = g;
  out.layers.clear();
  for (std::size_t i = 0; i < ig.size(); ++i) out.layers.emplace(ig.names[i], layer[i]);
  return out;
}

DepGraph neighborhood(const DepGraph& g, std::string_view center, std::size_t radius) {
  IndexedGraph ig(g);
  auto start = ig.index(std::string(center));
  std::vector<std::vector<std::size_t>> undirected(ig.size());
  for (std::size_t u = 0; u < ig.size(); ++u)
    for (auto v : ig.succ[u]) {
      undirected[u].push_back(v);
      undirected[v].push_back(u);
    }

  constexpr auto kUnseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(ig.size(), kUnseen);
  std::deque<std::size_t> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    if (dist[u] == radius) continue;
    for (auto v : undirected[u])
      if (dist[v] == kUnseen) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }

  DepGraph out;
  out.reduced = g.reduced;
  for (std::size_t i = 0; i < ig.size(); ++i) {
    if (dist[i] == kUnseen) continue;
    out.nodes.insert(ig.names[i]);
    if (auto it = g.layers.find(ig.names[i]); it != g.layers.end()) out.layers.insert(*it);
  }
  for (const auto& e : g.edges)
    if (out.nodes.count(e.first) && out.nodes.count(e.second)) out.edges.insert(e);
  return out;
}

std::vector<std::string> search_nodes(const DepGraph& g, std::string_view query) {
  const auto q = to_lower(query);
  std::vector<std::string> exact, prefix, substring;
  for (const auto& name : g.nodes) {  // std::set iterates lexicographically
    auto lowered = to_lower(name);
    if (lowered == q)
      exact.push_back(name);
    else if (lowered.starts_with(q))
      prefix.push_back(name);
    else if (lowered.find(q) != std::string::npos)
      substring.push_back(name);
  }
  exact.insert(exact.end(), prefix.begin(), prefix.end());
  exact.insert(exact.end(), substring.begin(), substring.end());
  return exact;
}

std::string export_dot(const DepGraph& g) {
  std::string out = "digraph mml {\n";
  for (const auto& n : g.nodes) {
    out += "  " + quote_dot(n);
    if (auto it = g.layers.find(n); it != g.layers.end())
      out += " [rank=" + std::to_string(it->second) + "]";
    out += ";\n";
  }
  for (const auto& [from, to] : g.edges) out += "  " + quote_dot(from) + " -> " + quote_dot(to) + ";\n";
  out += "}\n";
  return out;
}

std::string export_sfdp(const DepGraph& g) {
  std::string out = "digraph mml {\n";
  out += "  graph [layout=sfdp, overlap=prism, splines=true];\n";
  out += "  node [shape=box];\n";
  std::map<std::size_t, std::size_t> column;  // layer -> next x slot
  for (const auto& n : g.nodes) {
    out += "  " + quote_dot(n);
    if (auto it = g.layers.find(n); it != g.layers.end()) {
      auto x = column[it->second]++;
      out += " [rank=" + std::to_string(it->second) + ", pos=\"" + std::to_string(x * 120) + "," +
             std::to_string(it->second * 100) + "\"]";
    }
    out += ";\n";
  }
  for (const auto& [from, to] : g.edges) out += "  " + quote_dot(from) + " -> " + quote_dot(to) + ";\n";
  out += "}\n";
  return out;
}

std::string export_json(const DepGraph& g) {
  nlohmann::ordered_json doc;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json node;
    node["id"] = n;
    if (auto it = g.layers.find(n); it != g.layers.end())
      node["layer"] = it->second;
    else
      node["layer"] = nullptr;
    nodes.push_back(std::move(node));
  }
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [from, to] : g.edges) edges.push_back({{"from", from}, {"to", to}});
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc.dump();
}

}  // namespace mmlhub
