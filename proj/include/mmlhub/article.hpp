#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mmlhub {

/// Uppercase article identifier: [A-Z0-9_]+ with an alphabetic first character.
class ArticleName {
 public:
  /// Throws Error(InvalidName) for anything outside the identifier grammar.
  static ArticleName parse(std::string_view text);

  const std::string& value() const noexcept { return value_; }

  /// Historic file systems capped article names at eight characters. Longer
  /// names are accepted; the parser records a warning for them.
  bool exceeds_legacy_length() const noexcept { return value_.size() > 8; }

  friend auto operator<=>(const ArticleName&, const ArticleName&) = default;

 private:
  explicit ArticleName(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

bool is_valid_article_name(std::string_view text) noexcept;

enum class DirectiveKind {
  Vocabularies,
  Notations,
  Constructors,
  Registrations,
  Requirements,
  Definitions,
  Theorems,
  Schemes,
  Expansions,
  Equalities,
};

const char* to_string(DirectiveKind kind) noexcept;
std::optional<DirectiveKind> directive_kind_from_string(std::string_view keyword) noexcept;

struct Directive {
  DirectiveKind kind;
  std::vector<ArticleName> names;  // duplicates kept as written
  std::size_t line = 0;            // line of the keyword
};

struct Environment {
  std::vector<Directive> entries;
};

enum class ItemKind { Theorem, Definition, Scheme };

const char* to_string(ItemKind kind) noexcept;

/// 1-based inclusive line range.
struct LineSpan {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct Item {
  std::string anchor;  // ARTICLE:kind:ordinal
  ItemKind kind = ItemKind::Theorem;
  std::size_t ordinal = 0;
  std::string label;
  LineSpan span;
  std::string statement_text;  // proof bodies removed, whitespace collapsed
  friend bool operator==(const Item&, const Item&) = default;
};

struct SymbolDef {
  std::string symbol;
  std::string anchor;
  friend bool operator==(const SymbolDef&, const SymbolDef&) = default;
};

struct Article {
  ArticleName name;
  Environment env;
  std::vector<Item> items;
  std::vector<std::string> lines;
  std::vector<SymbolDef> symbols;
  std::vector<std::string> warnings;

  const Item* find_item(std::string_view anchor) const;
  /// Item whose span starts at the given 1-based line, if any.
  const Item* item_starting_at(std::size_t line) const;
};

std::string make_anchor(const ArticleName& article, ItemKind kind, std::size_t ordinal);

/// Article name encoded in an anchor (text before the first ':').
std::string anchor_article(std::string_view anchor);

/// Parses the environment directives and top-level item blocks.
///
/// The environment runs from `environ` to the first `begin`. After it, an
/// item opens at any non-comment line whose first token is `theorem`,
/// `definition` or `scheme`. A theorem closes at the first `;` outside
/// proof blocks; definitions and schemes close at the `end;` returning the
/// block depth to zero. Throws ParseError with MalformedEnvironment or
/// UnterminatedBlock.
Article parse_article(const ArticleName& name, std::string_view source);

/// Symbols introduced by func/pred/mode/attr inside definition items, in
/// source order.
std::vector<SymbolDef> extract_symbols(const Article& article);

/// Hyperlinked HTML view. Directive names present in `corpus` become links,
/// items carry their anchor as element id, and each comment is emitted
/// verbatim (escaped, LaTeX untouched) immediately before its item.
/// Throws Error(UnknownAnchor) if a comment key is not an anchor of `article`.
std::string render_article(const Article& article, const std::set<std::string>& corpus,
                           const std::map<std::string, std::string>& comments);

}  // namespace mmlhub
