#include "mmlhub/platform.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/io.hpp"
#include "mmlhub/text.hpp"

namespace mmlhub {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void parse_listen(std::string_view listen, PlatformConfig& config) {
  auto colon = listen.rfind(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "listen address must be host:port, got '" + std::string(listen) + "'");
  config.host = std::string(listen.substr(0, colon));
  try {
    config.port = std::stoi(std::string(listen.substr(colon + 1)));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in listen address '" + std::string(listen) + "'");
  }
}

}  // namespace

PlatformConfig load_config(const fs::path& file) {
  PlatformConfig config;
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "config " + file.string() + ": " + e.what());
  }
  try {
    if (j.contains("listen")) parse_listen(j.at("listen").get<std::string>(), config);
    if (j.contains("data_dir")) {
      fs::path dir = j.at("data_dir").get<std::string>();
      config.data_dir = dir.is_relative() ? file.parent_path() / dir : dir;
    }
    if (j.contains("directive_kinds")) {
      config.directive_kinds.clear();
      for (const auto& k : j.at("directive_kinds")) {
        auto kind = directive_kind_from_string(k.get<std::string>());
        if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown directive kind " + k.get<std::string>());
        config.directive_kinds.insert(*kind);
      }
    }
    if (j.contains("lsi_rank")) config.lsi_rank = j.at("lsi_rank").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "config " + file.string() + ": " + e.what());
  }
  return config;
}

void apply_env_overrides(PlatformConfig& config) {
  if (const char* listen = std::getenv("MMLHUB_LISTEN"); listen && *listen) parse_listen(listen, config);
  if (const char* dir = std::getenv("MMLHUB_DATA_DIR"); dir && *dir) config.data_dir = dir;
}

const char* to_string(Role role) noexcept { return role == Role::Admin ? "admin" : "editor"; }

std::optional<Role> role_from_string(std::string_view text) noexcept {
  if (text == "admin") return Role::Admin;
  if (text == "editor") return Role::Editor;
  return std::nullopt;
}

UserRegistry::UserRegistry(fs::path file) : file_(std::move(file)) {
  if (!fs::exists(*file_)) return;
  try {
    auto j = json::parse(read_file(*file_));
    for (const auto& u : j.at("users")) {
      auto role = role_from_string(u.at("role").get<std::string>());
      if (!role) throw Error(ErrorCode::CorruptData, "bad role in " + file_->string());
      users_.push_back({u.at("id").get<std::string>(), u.value("name", std::string{}), *role,
                        u.value("blocked", false), u.at("token_sha256").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptData, "users file " + file_->string() + ": " + e.what());
  }
}

void UserRegistry::add(User user, std::string_view token) {
  std::unique_lock lock(mutex_);
  if (user.id.empty() || token.empty()) throw Error(ErrorCode::InvalidArgument, "user id and token are required");
  user.token_hash = sha256_hex(token);
  for (const auto& u : users_) {
    if (u.id == user.id) throw Error(ErrorCode::InvalidArgument, "user " + user.id + " already exists");
    if (u.token_hash == user.token_hash) throw Error(ErrorCode::InvalidArgument, "token already in use");
  }
  users_.push_back(std::move(user));
  persist();
}

std::optional<User> UserRegistry::authenticate(std::string_view token) const {
  if (token.empty()) return std::nullopt;
  const auto digest = sha256_hex(token);
  std::shared_lock lock(mutex_);
  for (const auto& u : users_)
    if (u.token_hash == digest) return u;
  return std::nullopt;
}

std::optional<User> UserRegistry::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  for (const auto& u : users_)
    if (u.id == id) return u;
  return std::nullopt;
}

bool UserRegistry::set_blocked(std::string_view id, bool blocked) {
  std::unique_lock lock(mutex_);
  for (auto& u : users_)
    if (u.id == id) {
      u.blocked = blocked;
      persist();
      return true;
    }
  return false;
}

std::vector<User> UserRegistry::all() const {
  std::shared_lock lock(mutex_);
  return users_;
}

void UserRegistry::persist() const {
  if (!file_) return;
  ordered_json j;
  j["users"] = ordered_json::array();
  for (const auto& u : users_)
    j["users"].push_back({{"id", u.id},
                          {"name", u.name},
                          {"role", to_string(u.role)},
                          {"blocked", u.blocked},
                          {"token_sha256", u.token_hash}});
  write_file_atomic(*file_, j.dump(2) + "\n");
}

const Article* CorpusState::article(std::string_view name) const {
  auto it = std::lower_bound(articles.begin(), articles.end(), name,
                             [](const Article& a, std::string_view n) { return a.name.value() < n; });
  if (it == articles.end() || it->name.value() != name) return nullptr;
  return &*it;
}

std::set<std::string> CorpusState::article_names() const {
  std::set<std::string> out;
  for (const auto& a : articles) out.insert(a.name.value());
  return out;
}

std::vector<Article> parse_corpus_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".miz") files.push_back(entry.path());
  if (files.empty()) throw Error(ErrorCode::InvalidArgument, "no .miz files in " + dir.string());

  std::vector<Article> articles;
  for (const auto& file : files) {
    std::string stem = file.stem().string();
    for (auto& c : stem)
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (!is_valid_article_name(stem))
      throw Error(ErrorCode::InvalidName, file.filename().string() + ": invalid article name '" + stem + "'");
    try {
      articles.push_back(parse_article(ArticleName::parse(stem), read_file(file)));
    } catch (const ParseError& e) {
      throw ParseError(e.code(), e.line(), file.filename().string() + ": " + e.detail());
    }
  }
  std::sort(articles.begin(), articles.end(), [](const Article& a, const Article& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < articles.size(); ++i)
    if (articles[i].name == articles[i - 1].name)
      throw Error(ErrorCode::InvalidArgument, "duplicate article " + articles[i].name.value() + " in " + dir.string());
  return articles;
}

std::string corpus_hash(const std::vector<Article>& articles) {
  std::string buf;
  for (const auto& a : articles) {
    auto source = join_lines(a.lines);
    buf += a.name.value();
    buf += '\n';
    buf += std::to_string(source.size());
    buf += '\n';
    buf += source;
  }
  return sha256_hex(buf);
}

std::string UpdateReport::to_json() const {
  ordered_json j;
  j["version_label"] = version_label;
  j["previous_label"] = previous_label;
  j["dry_run"] = dry_run;
  j["conflict_count"] = conflict_count;
  j["comments_before"] = comments_before;
  j["comments_after"] = comments_after;
  auto list = ordered_json::array();
  for (const auto& a : articles) {
    ordered_json entry;
    entry["article"] = a.article;
    entry["clean"] = a.clean;
    entry["conflict_count"] = a.conflict_count;
    entry["conflict_anchors"] = a.conflict_anchors;
    auto regions = ordered_json::array();
    for (const auto& c : a.merge.conflicts) regions.push_back({{"base_begin", c.base.begin}, {"base_end", c.base.end}});
    entry["regions"] = std::move(regions);
    entry["reanchored"] = a.anchor_map;
    entry["retired"] = a.retired;
    entry["notes"] = a.notes;
    list.push_back(std::move(entry));
  }
  j["articles"] = std::move(list);
  j["skipped_frozen"] = skipped_frozen;
  return j.dump() + "\n";
}

namespace {

const Article* find_article(const std::vector<Article>& articles, std::string_view name) {
  for (const auto& a : articles)
    if (a.name.value() == name) return &a;
  return nullptr;
}

UpdateReport plan_rebase(const std::vector<Article>& before, const std::vector<Article>& after,
                         const CommentStore& store, const std::set<std::string>& frozen) {
  UpdateReport report;
  report.comments_before = store.live_count();
  for (const auto& name : store.articles()) {
    if (frozen.count(name)) {
      report.skipped_frozen.push_back(name);
      continue;
    }
    const Article* old_article = find_article(before, name);
    if (!old_article) continue;
    std::optional<Article> updated;
    if (const Article* a = find_article(after, name)) updated = *a;
    auto r = rebase_article(*old_article, updated, store);
    report.conflict_count += r.conflict_count;
    report.articles.push_back(std::move(r));
  }
  return report;
}

}  // namespace

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)),
      data_(config_.data_dir),
      comments_((fs::create_directories(data_), data_ / "comments")),
      feedback_(data_ / "feedback.jsonl"),
      users_(data_ / "users.json") {
  if (fs::exists(data_ / "frozen.json")) {
    try {
      auto j = json::parse(read_file(data_ / "frozen.json"));
      for (const auto& [article, report] : j.items()) frozen_.emplace(article, report.get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptData, std::string("frozen.json: ") + e.what());
    }
  }
  if (fs::exists(data_ / "state.json")) {
    std::string label;
    try {
      label = json::parse(read_file(data_ / "state.json")).at("version_label").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptData, std::string("state.json: ") + e.what());
    }
    publish(build_state(data_ / "corpus", label).state);
  }
}

std::shared_ptr<const CorpusState> Platform::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void Platform::publish(std::shared_ptr<const CorpusState> next) {
  std::lock_guard lock(state_mutex_);
  state_ = std::move(next);
}

IngestResult Platform::build_state(const fs::path& dir, const std::string& label) const {
  auto state = std::make_shared<CorpusState>();
  state->version_label = label;
  state->articles = parse_corpus_dir(dir);
  for (const auto& a : state->articles)
    for (const auto& w : a.warnings) state->warnings.push_back(a.name.value() + ": " + w);

  auto full = build_graph(state->articles, config_.directive_kinds);
  state->warnings.insert(state->warnings.end(), full.warnings.begin(), full.warnings.end());
  state->reduced = assign_layers(transitive_reduction(full));
  state->graph = assign_layers(full);
  state->corpus_hash = corpus_hash(state->articles);

  std::vector<std::pair<std::string, std::string>> docs;
  for (const auto& a : state->articles)
    for (const auto& item : a.items) {
      docs.emplace_back(item.anchor, item.statement_text);
      state->statements.emplace(item.anchor, item.statement_text);
    }

  IngestResult result;
  if (!docs.empty()) {
    state->matrix = build_tfidf(docs);
    const std::size_t smaller = std::min(state->matrix.terms.size(), state->matrix.docs.size());
    if (smaller > 0) {
      const std::size_t k = config_.lsi_rank ? std::min(config_.lsi_rank, smaller) : default_rank(state->matrix);
      const std::string cache_key = state->corpus_hash + ":k=" + std::to_string(k);
      const auto model_file = data_ / "lsi.bin";
      bool loaded = false;
      if (fs::exists(model_file)) {
        try {
          auto stored = load_model(model_file);
          if (stored.corpus_hash == cache_key && stored.matrix.docs == state->matrix.docs &&
              stored.matrix.terms == state->matrix.terms) {
            state->lsi = std::move(stored.model);
            loaded = true;
          }
        } catch (const Error&) {
          // unreadable cache: rebuild below
        }
      }
      if (!loaded) {
        state->lsi = truncated_svd(state->matrix, k);
        save_model(model_file, state->matrix, state->lsi, cache_key);
        result.lsi_rebuilt = true;
      }
    }
  }
  state->names = build_index(state->articles);
  state->warnings.insert(state->warnings.end(), state->names.warnings.begin(), state->names.warnings.end());
  result.state = std::move(state);
  return result;
}

void Platform::persist_corpus(const fs::path& source_dir, const CorpusState& state) const {
  const auto target = data_ / "corpus";
  std::error_code ec;
  if (!fs::exists(target) || !fs::equivalent(source_dir, target, ec)) {
    const auto staging = data_ / "corpus.staging";
    const auto previous = data_ / "corpus.previous";
    fs::remove_all(staging);
    fs::create_directories(staging);
    for (const auto& a : state.articles)
      write_file_atomic(staging / (to_lower(a.name.value()) + ".miz"), join_lines(a.lines));
    fs::remove_all(previous);
    if (fs::exists(target)) fs::rename(target, previous);
    fs::rename(staging, target);
    fs::remove_all(previous);
  }
  ordered_json j;
  j["version_label"] = state.version_label;
  j["corpus_hash"] = state.corpus_hash;
  write_file_atomic(data_ / "state.json", j.dump(2) + "\n");
}

IngestResult Platform::ingest_corpus(const fs::path& dir, const std::string& label) {
  std::lock_guard lock(write_mutex_);
  auto result = build_state(dir, label);
  persist_corpus(dir, *result.state);
  publish(result.state);
  return result;
}

UpdateReport Platform::update_corpus(const fs::path& dir, const std::string& label) {
  std::lock_guard lock(write_mutex_);
  auto previous = state();
  auto built = build_state(dir, label);  // throws before anything changes

  UpdateReport report;
  if (previous) {
    report = plan_rebase(previous->articles, built.state->articles, comments_, frozen_articles());
    report.previous_label = previous->version_label;
  } else {
    report.comments_before = comments_.live_count();
  }
  report.version_label = label;

  persist_corpus(dir, *built.state);
  const auto report_dir = data_ / "reports" / label;
  for (const auto& r : report.articles) {
    if (r.clean) {
      comments_.reanchor(r.article, r.anchor_map, r.retired);
      continue;
    }
    const auto file = report_dir / (r.article + ".conflict");
    write_file_atomic(file, r.conflict_report());
    std::lock_guard frozen_lock(frozen_mutex_);
    frozen_[r.article] = file.string();
  }
  persist_frozen();
  report.comments_after = comments_.live_count();
  write_file_atomic(report_dir / "report.json", report.to_json());
  publish(built.state);
  return report;
}

UpdateReport Platform::preview_rebase(const fs::path& old_dir, const fs::path& new_dir) const {
  auto before = parse_corpus_dir(old_dir);
  auto after = parse_corpus_dir(new_dir);
  auto report = plan_rebase(before, after, comments_, frozen_articles());
  report.dry_run = true;
  report.comments_after = report.comments_before;
  return report;
}

void Platform::resolve_conflict(std::string_view article, std::string_view annotated_text, const Actor& admin) {
  if (admin.blocked) throw Error(ErrorCode::UserBlocked, "user " + admin.id + " is blocked");
  std::lock_guard lock(write_mutex_);
  if (!is_frozen(article))
    throw Error(ErrorCode::InvalidArgument, "article " + std::string(article) + " has no pending conflict");
  auto current = state();
  const Article* a = current ? current->article(article) : nullptr;

  auto lines = split_lines(annotated_text);
  if (!a) {
    // The article left the library; an empty resolution retires its comments.
    if (!find_comment_blocks(lines).empty())
      throw Error(ErrorCode::UnknownArticle, "article " + std::string(article) + " is no longer in the library");
    comments_.reanchor(article, {}, comments_.anchors(article));
  } else {
    auto stripped = strip_comments(lines);
    if (stripped != a->lines)
      throw Error(ErrorCode::StripMismatch, "resolution does not strip to the current text of " + std::string(article));

    auto live = comments_.live_comments(article);
    std::set<std::string> used;
    std::map<std::string, std::string> mapping;
    std::vector<std::pair<std::string, std::string>> fresh;  // new anchor, body
    for (const auto& block : find_comment_blocks(lines)) {
      const Item* item = a->item_starting_at(block.next_pristine + 1);
      if (!item)
        throw Error(ErrorCode::InvalidArgument,
                    "comment block at line " + std::to_string(block.lines.begin + 1) + " does not precede an item");
      auto match = std::find_if(live.begin(), live.end(),
                                [&](const auto& e) { return e.second == block.body && !used.count(e.first); });
      if (match != live.end()) {
        used.insert(match->first);
        mapping.emplace(match->first, item->anchor);
      } else {
        fresh.emplace_back(item->anchor, block.body);
      }
    }
    std::vector<std::string> retired;
    for (const auto& anchor : comments_.anchors(article))
      if (!mapping.count(anchor)) retired.push_back(anchor);
    comments_.reanchor(article, mapping, retired);
    for (auto& [anchor, body] : fresh) comments_.append(anchor, body, admin.id);
  }
  {
    std::lock_guard frozen_lock(frozen_mutex_);
    frozen_.erase(std::string(article));
  }
  persist_frozen();
}

bool Platform::is_frozen(std::string_view article) const {
  std::lock_guard lock(frozen_mutex_);
  return frozen_.count(std::string(article)) > 0;
}

std::set<std::string> Platform::frozen_articles() const {
  std::lock_guard lock(frozen_mutex_);
  std::set<std::string> out;
  for (const auto& [a, path] : frozen_) out.insert(a);
  return out;
}

void Platform::persist_frozen() const {
  ordered_json j = ordered_json::object();
  {
    std::lock_guard lock(frozen_mutex_);
    for (const auto& [a, path] : frozen_) j[a] = path;
  }
  write_file_atomic(data_ / "frozen.json", j.dump(2) + "\n");
}

CommentRevision Platform::save_comment(const std::string& anchor, std::string body, const Actor& author) {
  if (author.blocked) throw Error(ErrorCode::UserBlocked, "user " + author.id + " is blocked");
  auto current = state();
  if (!current) throw Error(ErrorCode::NoCorpus, "no library has been ingested");
  if (is_frozen(anchor_article(anchor)))
    throw Error(ErrorCode::FrozenArticle, "comments on " + anchor_article(anchor) + " await conflict resolution");
  return mmlhub::save_comment(
      comments_, [&](std::string_view a) { return current->has_anchor(a); }, anchor, std::move(body), author);
}

}  // namespace mmlhub
