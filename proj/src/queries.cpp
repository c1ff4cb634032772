#include "mmlhub/queries.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/graph.hpp"
#include "mmlhub/lsi.hpp"

namespace mmlhub::queries {

using nlohmann::ordered_json;

namespace {

std::string body(const ordered_json& j) { return j.dump() + "\n"; }

const DepGraph& pick(const CorpusState& state, bool reduced) { return reduced ? state.reduced : state.graph; }

ordered_json revision_json(const CommentRevision& rev) {
  ordered_json j;
  j["anchor"] = rev.anchor;
  j["revision_id"] = rev.revision_id;
  j["parent"] = rev.parent ? ordered_json(*rev.parent) : ordered_json(nullptr);
  j["author"] = rev.author;
  j["timestamp"] = rev.timestamp;
  j["deleted"] = rev.deleted;
  j["body"] = rev.body;
  return j;
}

}  // namespace

std::string articles(const CorpusState& state) {
  ordered_json j;
  j["version"] = state.version_label;
  auto list = ordered_json::array();
  for (const auto& a : state.articles) list.push_back(a.name.value());
  j["articles"] = std::move(list);
  return body(j);
}

std::string article(const CorpusState& state, std::string_view name, const CommentStore& comments) {
  const Article* a = state.article(name);
  if (!a) throw Error(ErrorCode::UnknownArticle, "unknown article " + std::string(name));
  auto live = comments.live_comments(a->name.value());
  ordered_json j;
  j["name"] = a->name.value();
  j["version"] = state.version_label;
  j["html"] = render_article(*a, state.article_names(), live);
  auto items = ordered_json::array();
  for (const auto& item : a->items) {
    ordered_json e;
    e["anchor"] = item.anchor;
    e["kind"] = to_string(item.kind);
    e["first_line"] = item.span.first;
    e["last_line"] = item.span.last;
    auto c = live.find(item.anchor);
    e["comment"] = c == live.end() ? ordered_json(nullptr) : ordered_json(c->second);
    items.push_back(std::move(e));
  }
  j["items"] = std::move(items);
  return body(j);
}

std::string names(const CorpusState& state, std::string_view q, std::optional<EntryKind> kind, std::size_t limit) {
  ordered_json j;
  j["query"] = std::string(q);
  auto results = ordered_json::array();
  for (const auto& e : query(state.names, q, kind, std::min(limit, kMaxLimit)))
    results.push_back({{"key", e.key}, {"kind", to_string(e.kind)}, {"target", e.target}});
  j["results"] = std::move(results);
  return body(j);
}

std::string theorems(const CorpusState& state, std::string_view q, std::size_t limit) {
  ordered_json j;
  j["query"] = std::string(q);
  auto results = ordered_json::array();
  if (state.lsi.k > 0) {
    for (const auto& hit : rank(state.lsi, state.matrix, q, std::min(limit, kMaxLimit))) {
      auto it = state.statements.find(hit.anchor);
      results.push_back({{"anchor", hit.anchor},
                         {"score", hit.score},
                         {"statement", it == state.statements.end() ? std::string{} : it->second}});
    }
  }
  j["results"] = std::move(results);
  return body(j);
}

std::string graph_json(const CorpusState& state, bool reduced) { return export_json(pick(state, reduced)) + "\n"; }

std::string graph_dot(const CorpusState& state, bool reduced) { return export_dot(pick(state, reduced)); }

std::string graph_sfdp(const CorpusState& state, bool reduced) { return export_sfdp(pick(state, reduced)); }

std::string layers_table(const CorpusState& state, bool reduced) {
  std::string out;
  for (const auto& [name, layer] : pick(state, reduced).layers) out += name + "\t" + std::to_string(layer) + "\n";
  return out;
}

std::string neighborhood(const CorpusState& state, std::string_view node, std::size_t radius, bool reduced) {
  return export_json(mmlhub::neighborhood(pick(state, reduced), node, radius)) + "\n";
}

std::string node_search(const CorpusState& state, std::string_view q) {
  ordered_json j;
  j["query"] = std::string(q);
  j["results"] = search_nodes(state.graph, q);
  return body(j);
}

std::string revision(const CommentRevision& rev) { return body(revision_json(rev)); }

std::string history(const std::vector<CommentRevision>& revisions) {
  auto list = ordered_json::array();
  for (const auto& rev : revisions) list.push_back(revision_json(rev));
  ordered_json j;
  j["revisions"] = std::move(list);
  return body(j);
}

std::string status(const Platform& platform) {
  ordered_json j;
  auto state = platform.state();
  j["version"] = state ? ordered_json(state->version_label) : ordered_json(nullptr);
  j["corpus_hash"] = state ? ordered_json(state->corpus_hash) : ordered_json(nullptr);
  j["articles"] = state ? state->articles.size() : 0;
  j["items"] = state ? state->statements.size() : 0;
  j["lsi_rank"] = state ? state->lsi.k : 0;
  j["comments"] = platform.comments().live_count();
  j["frozen"] = platform.frozen_articles();
  j["warnings"] = state ? state->warnings : std::vector<std::string>{};
  return body(j);
}

}  // namespace mmlhub::queries
