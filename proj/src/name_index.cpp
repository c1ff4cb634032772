#include "mmlhub/name_index.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "mmlhub/text.hpp"

namespace mmlhub {

const char* to_string(EntryKind kind) noexcept { return kind == EntryKind::Article ? "article" : "symbol"; }

std::optional<EntryKind> entry_kind_from_string(std::string_view text) noexcept {
  if (text == "article") return EntryKind::Article;
  if (text == "symbol") return EntryKind::Symbol;
  return std::nullopt;
}

NameIndex build_index(const std::vector<Article>& articles) {
  NameIndex index;
  auto add = [&](std::string key, EntryKind kind, std::string target) {
    index.lowered.push_back(to_lower(key));
    index.entries.push_back({std::move(key), kind, std::move(target)});
  };

  std::vector<const Article*> sorted;
  for (const auto& a : articles) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });

  for (const auto* a : sorted) add(a->name.value(), EntryKind::Article, a->name.value());

  std::map<std::string, std::string> first_definition;
  for (const auto* a : sorted) {
    for (const auto& s : a->symbols) {
      auto [it, inserted] = first_definition.emplace(s.symbol, s.anchor);
      if (!inserted)
        index.warnings.push_back("symbol '" + s.symbol + "' defined at " + it->second + " and " + s.anchor);
      add(s.symbol, EntryKind::Symbol, s.anchor);
    }
  }
  return index;
}

std::vector<NameEntry> query(const NameIndex& index, std::string_view text, std::optional<EntryKind> kind_filter,
                             std::size_t limit) {
  const std::string q = to_lower(text);
  struct Hit {
    int tier;
    std::size_t i;
  };
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    if (kind_filter && index.entries[i].kind != *kind_filter) continue;
    const auto& key = index.lowered[i];
    if (key == q)
      hits.push_back({0, i});
    else if (key.starts_with(q))
      hits.push_back({1, i});
    else if (key.find(q) != std::string::npos)
      hits.push_back({2, i});
  }
  auto less = [&](const Hit& a, const Hit& b) {
    const auto& ea = index.entries[a.i];
    const auto& eb = index.entries[b.i];
    if (a.tier != b.tier) return a.tier < b.tier;
    if (ea.key.size() != eb.key.size()) return ea.key.size() < eb.key.size();
    return std::tie(index.lowered[a.i], ea.key, ea.kind, ea.target) <
           std::tie(index.lowered[b.i], eb.key, eb.kind, eb.target);
  };
  const std::size_t n = std::min(limit, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), less);
  std::vector<NameEntry> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(index.entries[hits[i].i]);
  return out;
}

}  // namespace mmlhub
