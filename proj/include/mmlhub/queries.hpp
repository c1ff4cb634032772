#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "mmlhub/annotation.hpp"
#include "mmlhub/name_index.hpp"
#include "mmlhub/platform.hpp"

// Response bodies shared by the command line and the HTTP service. Both
// front ends print these strings unchanged, so identical logical queries on
// the same data directory give byte-identical answers. Every body ends in '\n'.
namespace mmlhub::queries {

inline constexpr std::size_t kDefaultNameLimit = 50;
inline constexpr std::size_t kDefaultTheoremLimit = 10;
inline constexpr std::size_t kMaxLimit = 1000;

/// {"version","articles":[...]}
std::string articles(const CorpusState& state);

/// {"name","version","html","items":[{"anchor","kind","first_line","last_line","comment"}]}
/// Throws UnknownArticle.
std::string article(const CorpusState& state, std::string_view name, const CommentStore& comments);

/// {"query","results":[{"key","kind","target"}]}
std::string names(const CorpusState& state, std::string_view q, std::optional<EntryKind> kind, std::size_t limit);

/// {"query","results":[{"anchor","score","statement"}]}
std::string theorems(const CorpusState& state, std::string_view q, std::size_t limit);

std::string graph_json(const CorpusState& state, bool reduced);
std::string graph_dot(const CorpusState& state, bool reduced);
std::string graph_sfdp(const CorpusState& state, bool reduced);

/// One "NAME<TAB>layer" line per article, sorted by name.
std::string layers_table(const CorpusState& state, bool reduced);

/// Throws UnknownNode.
std::string neighborhood(const CorpusState& state, std::string_view node, std::size_t radius, bool reduced);

/// {"query","results":[...]}
std::string node_search(const CorpusState& state, std::string_view q);

std::string revision(const CommentRevision& rev);
std::string history(const std::vector<CommentRevision>& revisions);

/// {"version","corpus_hash","articles","items","comments","frozen":[...],"warnings":[...]}
std::string status(const Platform& platform);

}  // namespace mmlhub::queries
