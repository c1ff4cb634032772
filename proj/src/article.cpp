#include "mmlhub/article.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "mmlhub/error.hpp"
#include "mmlhub/text.hpp"

namespace mmlhub {

namespace {

struct Token {
  std::string_view text;
  std::size_t line = 0;  // 0-based
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Position {
  std::size_t line = 0;
  std::size_t col = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
};

constexpr std::string_view kDelimiters = ";,()[]{}:";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

bool is_delimiter(char c) { return kDelimiters.find(c) != std::string_view::npos; }

bool is_comment_start(std::string_view line, std::size_t i) {
  return line[i] == ':' && i + 1 < line.size() && line[i + 1] == ':';
}

/// Offset where a `::` comment starts, or the line length.
std::size_t code_end(std::string_view line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if (is_comment_start(line, i)) return i;
  return line.size();
}

void lex_line(std::string_view line, std::size_t line_index, std::vector<Token>& out) {
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    char c = line[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_comment_start(line, i)) break;
    if (is_delimiter(c)) {
      out.push_back({line.substr(i, 1), line_index, i, i + 1});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n && !is_space(line[i]) && !is_delimiter(line[i])) ++i;
    out.push_back({line.substr(start, i - start), line_index, start, i});
  }
}

bool is_word(std::string_view tok) { return !tok.empty() && !is_delimiter(tok.front()); }

bool opens_block(std::string_view tok) {
  static constexpr std::array<std::string_view, 5> kOpeners = {"proof", "now", "hereby", "case",
                                                               "suppose"};
  return std::find(kOpeners.begin(), kOpeners.end(), tok) != kOpeners.end();
}

std::optional<ItemKind> item_opener(std::string_view tok) {
  if (tok == "theorem") return ItemKind::Theorem;
  if (tok == "definition") return ItemKind::Definition;
  if (tok == "scheme") return ItemKind::Scheme;
  return std::nullopt;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c) || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

/// Token-level scanner for one item block.
class ItemScanner {
 public:
  ItemScanner(ItemKind kind, std::size_t opener_line, const std::vector<std::string>& lines)
      : kind_(kind), opener_line_(opener_line), lines_(lines) {}

  /// Feeds one token; returns true once the item is closed.
  bool feed(const Token& tok) {
    ++seen_;
    if (seen_ == 1) {  // the opener keyword itself
      include_from_ = {tok.line, tok.end};
      if (kind_ == ItemKind::Definition) depth_ = 1;
      return false;
    }
    if (seen_ == 2 && is_word(tok.text) && kind_ != ItemKind::Definition) {
      if (kind_ == ItemKind::Scheme) {
        label_ = std::string(tok.text);
        include_from_ = {tok.line, tok.end};
      } else {
        label_candidate_ = tok;
      }
    } else if (seen_ == 3 && label_candidate_ && tok.text == ":") {
      label_ = std::string(label_candidate_->text);
      include_from_ = {tok.line, tok.end};
    }

    const auto& text = tok.text;
    if (opens_block(text)) {
      if (text == "proof" && !excluding_) {
        add_slice(include_from_, {tok.line, tok.begin});
        excluding_ = true;
        exclude_depth_ = depth_;
      }
      ++depth_;
      last_was_closing_end_ = false;
      return false;
    }
    if (text == "end") {
      if (depth_ == 0)
        throw ParseError(ErrorCode::UnterminatedBlock, tok.line + 1,
                         "'end' without an open block");
      --depth_;
      if (excluding_ && depth_ == exclude_depth_) {
        excluding_ = false;
        include_from_ = {tok.line, tok.end};
      }
      last_was_closing_end_ = depth_ == 0;
      last_end_ = {tok.line, tok.begin};
      return false;
    }
    if (text == ";" && depth_ == 0) {
      switch (kind_) {
        case ItemKind::Theorem:
          add_slice(include_from_, {tok.line, tok.begin});
          return close(tok.line);
        case ItemKind::Definition:
          add_slice(include_from_, last_end_);
          return close(tok.line);
        case ItemKind::Scheme:
          if (last_was_closing_end_) {
            add_slice(include_from_, last_end_);
            return close(tok.line);
          }
          break;
      }
    }
    last_was_closing_end_ = false;
    return false;
  }

  std::size_t close_line() const { return close_line_; }
  const std::string& label() const { return label_; }
  std::string statement() const { return collapse_whitespace(statement_); }

 private:
  bool close(std::size_t line) {
    close_line_ = line;
    return true;
  }

  void add_slice(Position from, Position to) {
    if (!(from < to)) return;
    for (std::size_t l = from.line; l <= to.line; ++l) {
      std::string_view line = lines_[l];
      std::size_t limit = code_end(line);
      std::size_t b = l == from.line ? from.col : 0;
      std::size_t e = l == to.line ? to.col : line.size();
      e = std::min(e, limit);
      if (!statement_.empty()) statement_ += ' ';
      if (b < e) statement_.append(line.substr(b, e - b));
    }
  }

  ItemKind kind_;
  std::size_t opener_line_;
  const std::vector<std::string>& lines_;
  std::size_t seen_ = 0;
  int depth_ = 0;
  bool excluding_ = false;
  int exclude_depth_ = 0;
  bool last_was_closing_end_ = false;
  Position include_from_;
  Position last_end_;
  std::optional<Token> label_candidate_;
  std::string label_;
  std::string statement_;
  std::size_t close_line_ = 0;
};

void check_name_length(const ArticleName& name, std::size_t line, std::vector<std::string>& warnings) {
  if (name.exceeds_legacy_length()) {
    std::string msg = "name " + name.value() + " exceeds 8 characters";
    if (line > 0) msg = "line " + std::to_string(line) + ": " + msg;
    warnings.push_back(std::move(msg));
  }
}

/// Parses directives; returns the 0-based index of the line holding `begin`.
std::size_t parse_environment(const std::vector<std::string>& lines, Environment& env,
                              std::vector<std::string>& warnings) {
  std::vector<Token> toks;
  std::size_t begin_line = lines.size();
  bool have_environ = false;
  for (std::size_t l = 0; l < lines.size() && begin_line == lines.size(); ++l) {
    std::size_t before = toks.size();
    lex_line(lines[l], l, toks);
    for (std::size_t i = before; i < toks.size(); ++i) {
      if (!have_environ) {
        if (toks[i].text != "environ")
          throw ParseError(ErrorCode::MalformedEnvironment, l + 1,
                           "expected 'environ', found '" + std::string(toks[i].text) + "'");
        have_environ = true;
        continue;
      }
      if (toks[i].text == "begin") {
        begin_line = l;
        toks.resize(i + 1);
        break;
      }
    }
  }
  if (!have_environ)
    throw ParseError(ErrorCode::MalformedEnvironment, lines.size(), "missing 'environ'");
  if (begin_line == lines.size())
    throw ParseError(ErrorCode::MalformedEnvironment, lines.size(), "missing 'begin'");

  // toks: environ <directives...> begin
  std::size_t i = 1;
  const std::size_t last = toks.size() - 1;
  while (i < last) {
    const Token& kw = toks[i];
    auto kind = directive_kind_from_string(kw.text);
    if (!kind)
      throw ParseError(ErrorCode::MalformedEnvironment, kw.line + 1,
                       "unknown directive '" + std::string(kw.text) + "'");
    Directive directive{*kind, {}, kw.line + 1};
    ++i;
    bool expect_name = true;
    bool terminated = false;
    while (i < last) {
      const Token& t = toks[i];
      if (t.text == ";") {
        if (expect_name)
          throw ParseError(ErrorCode::MalformedEnvironment, t.line + 1,
                           "directive '" + std::string(kw.text) + "' expects a name before ';'");
        terminated = true;
        ++i;
        break;
      }
      if (directive_kind_from_string(t.text)) break;  // next keyword: ';' is missing
      if (expect_name) {
        if (!is_valid_article_name(t.text))
          throw ParseError(ErrorCode::MalformedEnvironment, t.line + 1,
                           "invalid article name '" + std::string(t.text) + "'");
        directive.names.push_back(ArticleName::parse(t.text));
        check_name_length(directive.names.back(), t.line + 1, warnings);
        expect_name = false;
      } else if (t.text == ",") {
        expect_name = true;
      } else {
        throw ParseError(ErrorCode::MalformedEnvironment, t.line + 1,
                         "expected ',' or ';' after name, found '" + std::string(t.text) + "'");
      }
      ++i;
    }
    if (!terminated)
      throw ParseError(ErrorCode::MalformedEnvironment, directive.line,
                       "directive '" + std::string(kw.text) + "' is missing its terminating ';'");
    env.entries.push_back(std::move(directive));
  }
  return begin_line;
}

}  // namespace

bool is_valid_article_name(std::string_view text) noexcept {
  if (text.empty() || !(text.front() >= 'A' && text.front() <= 'Z')) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

ArticleName ArticleName::parse(std::string_view text) {
  if (!is_valid_article_name(text))
    throw Error(ErrorCode::InvalidName, "invalid article name '" + std::string(text) + "'");
  return ArticleName(std::string(text));
}

const char* to_string(DirectiveKind kind) noexcept {
  switch (kind) {
    case DirectiveKind::Vocabularies: return "vocabularies";
    case DirectiveKind::Notations: return "notations";
    case DirectiveKind::Constructors: return "constructors";
    case DirectiveKind::Registrations: return "registrations";
    case DirectiveKind::Requirements: return "requirements";
    case DirectiveKind::Definitions: return "definitions";
    case DirectiveKind::Theorems: return "theorems";
    case DirectiveKind::Schemes: return "schemes";
    case DirectiveKind::Expansions: return "expansions";
    case DirectiveKind::Equalities: return "equalities";
  }
  return "";
}

std::optional<DirectiveKind> directive_kind_from_string(std::string_view keyword) noexcept {
  static constexpr std::array kAll = {
      DirectiveKind::Vocabularies, DirectiveKind::Notations,   DirectiveKind::Constructors,
      DirectiveKind::Registrations, DirectiveKind::Requirements, DirectiveKind::Definitions,
      DirectiveKind::Theorems,     DirectiveKind::Schemes,     DirectiveKind::Expansions,
      DirectiveKind::Equalities};
  for (auto k : kAll)
    if (keyword == to_string(k)) return k;
  return std::nullopt;
}

const char* to_string(ItemKind kind) noexcept {
  switch (kind) {
    case ItemKind::Theorem: return "theorem";
    case ItemKind::Definition: return "definition";
    case ItemKind::Scheme: return "scheme";
  }
  return "";
}

std::string make_anchor(const ArticleName& article, ItemKind kind, std::size_t ordinal) {
  return article.value() + ":" + to_string(kind) + ":" + std::to_string(ordinal);
}

std::string anchor_article(std::string_view anchor) {
  return std::string(anchor.substr(0, anchor.find(':')));
}

const Item* Article::find_item(std::string_view anchor) const {
  for (const auto& item : items)
    if (item.anchor == anchor) return &item;
  return nullptr;
}

const Item* Article::item_starting_at(std::size_t line) const {
  auto it = std::lower_bound(items.begin(), items.end(), line,
                             [](const Item& item, std::size_t l) { return item.span.first < l; });
  if (it != items.end() && it->span.first == line) return &*it;
  return nullptr;
}

Article parse_article(const ArticleName& name, std::string_view source) {
  Article article{name, {}, {}, split_lines(source), {}, {}};
  check_name_length(name, 0, article.warnings);
  const auto& lines = article.lines;

  std::size_t begin_line = parse_environment(lines, article.env, article.warnings);

  std::array<std::size_t, 3> ordinals{};
  std::vector<Token> toks;
  for (std::size_t l = begin_line + 1; l < lines.size(); ++l) {
    if (starts_with_comment(lines[l])) continue;
    toks.clear();
    lex_line(lines[l], l, toks);
    if (toks.empty()) continue;
    auto kind = item_opener(toks.front().text);
    if (!kind) continue;

    ItemScanner scanner(*kind, l, lines);
    bool closed = false;
    std::size_t cur = l;
    while (true) {
      for (const auto& tok : toks) {
        if (scanner.feed(tok)) {
          closed = true;
          break;
        }
      }
      if (closed || ++cur >= lines.size()) break;
      toks.clear();
      lex_line(lines[cur], cur, toks);
    }
    if (!closed)
      throw ParseError(ErrorCode::UnterminatedBlock, l + 1,
                       std::string("'") + to_string(*kind) + "' block has no matching end");

    std::size_t ordinal = ++ordinals[static_cast<std::size_t>(*kind)];
    article.items.push_back(Item{make_anchor(name, *kind, ordinal), *kind, ordinal,
                                 scanner.label(), LineSpan{l + 1, scanner.close_line() + 1},
                                 scanner.statement()});
    l = scanner.close_line();
  }
  article.symbols = extract_symbols(article);
  return article;
}

std::vector<SymbolDef> extract_symbols(const Article& article) {
  static constexpr std::array<std::string_view, 4> kIntroducers = {"func", "pred", "mode", "attr"};
  std::vector<SymbolDef> out;
  std::vector<Token> toks;
  for (const auto& item : article.items) {
    if (item.kind != ItemKind::Definition) continue;
    toks.clear();
    for (std::size_t l = item.span.first - 1; l < item.span.last; ++l) lex_line(article.lines[l], l, toks);

    std::set<std::string_view> loci;
    int depth = 0;
    bool in_let = false;
    bool expect_locus = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto text = toks[i].text;
      if (text == "definition" || opens_block(text)) {
        ++depth;
        continue;
      }
      if (text == "end") {
        --depth;
        continue;
      }
      if (depth != 1) continue;  // skip proofs
      if (text == "let") {
        in_let = expect_locus = true;
        continue;
      }
      if (in_let) {
        if (text == ";") {
          in_let = false;
        } else if (text == ",") {
          expect_locus = true;
        } else if (expect_locus && is_word(text)) {
          loci.insert(text);
          expect_locus = false;
        }
        continue;
      }
      if (std::find(kIntroducers.begin(), kIntroducers.end(), text) == kIntroducers.end()) continue;
      for (std::size_t j = i + 1; j < toks.size(); ++j) {
        auto cand = toks[j].text;
        if (cand == "(" || cand == ")" || cand == "," || cand == "is" || loci.count(cand)) continue;
        if (!is_word(cand) || cand == "->" || cand == "means" || cand == "equals") break;
        out.push_back({std::string(cand), item.anchor});
        i = j;
        break;
      }
    }
  }
  return out;
}

std::string render_article(const Article& article, const std::set<std::string>& corpus,
                           const std::map<std::string, std::string>& comments) {
  for (const auto& [anchor, body] : comments)
    if (!article.find_item(anchor))
      throw Error(ErrorCode::UnknownAnchor, "unknown anchor " + anchor);

  const auto& name = article.name.value();
  std::string out;
  out += "<article class=\"mml-article\" id=\"" + html_escape(name) + "\">\n";
  out += "<h1>" + html_escape(name) + "</h1>\n";
  out += "<section class=\"environ\">\n";
  for (const auto& d : article.env.entries) {
    out += "<div class=\"directive\"><span class=\"keyword\">";
    out += to_string(d.kind);
    out += "</span> ";
    for (std::size_t i = 0; i < d.names.size(); ++i) {
      if (i > 0) out += ", ";
      const auto& target = d.names[i].value();
      if (corpus.count(target))
        out += "<a class=\"article-ref\" href=\"/articles/" + html_escape(target) + "\">" +
               html_escape(target) + "</a>";
      else
        out += html_escape(target);
    }
    out += ";</div>\n";
  }
  out += "</section>\n<section class=\"body\">\n";

  auto emit_text = [&](std::size_t from, std::size_t to) {  // 0-based, half-open
    if (from >= to) return;
    out += "<pre class=\"text\">";
    for (std::size_t l = from; l < to; ++l) {
      out += html_escape(article.lines[l]);
      out += '\n';
    }
    out += "</pre>\n";
  };

  std::size_t next = 0;
  for (const auto& item : article.items) {
    emit_text(next, item.span.first - 1);
    if (auto it = comments.find(item.anchor); it != comments.end()) {
      out += "<div class=\"annotation\" data-anchor=\"" + html_escape(item.anchor) + "\">";
      out += html_escape(it->second);
      out += "</div>\n";
    }
    out += "<pre class=\"item " + std::string(to_string(item.kind)) + "\" id=\"" +
           html_escape(item.anchor) + "\">";
    for (std::size_t l = item.span.first - 1; l < item.span.last; ++l) {
      out += html_escape(article.lines[l]);
      out += '\n';
    }
    out += "</pre>\n";
    next = item.span.last;
  }
  emit_text(next, article.lines.size());
  out += "</section>\n</article>\n";
  return out;
}

}  // namespace mmlhub
