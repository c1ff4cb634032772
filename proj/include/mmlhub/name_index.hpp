#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmlhub/article.hpp"

namespace mmlhub {

enum class EntryKind { Article, Symbol };

const char* to_string(EntryKind kind) noexcept;
std::optional<EntryKind> entry_kind_from_string(std::string_view text) noexcept;

struct NameEntry {
  std::string key;
  EntryKind kind = EntryKind::Article;
  std::string target;  // article name or defining anchor
  friend bool operator==(const NameEntry&, const NameEntry&) = default;
};

struct NameIndex {
  std::vector<NameEntry> entries;
  std::vector<std::string> lowered;  // lowered[i] == to_lower(entries[i].key)
  std::vector<std::string> warnings;
};

/// One entry per article, then one per extracted symbol, in corpus order.
/// A symbol defined in several places keeps every entry and records a warning.
NameIndex build_index(const std::vector<Article>& articles);

/// Case-insensitive tiered match: exact, prefix, substring. Within a tier
/// shorter keys come first, then lexicographic order.
std::vector<NameEntry> query(const NameIndex& index, std::string_view text, std::optional<EntryKind> kind_filter,
                             std::size_t limit);

}  // namespace mmlhub
