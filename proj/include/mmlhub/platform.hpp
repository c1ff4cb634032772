#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mmlhub/annotation.hpp"
#include "mmlhub/article.hpp"
#include "mmlhub/graph.hpp"
#include "mmlhub/lsi.hpp"
#include "mmlhub/name_index.hpp"

namespace mmlhub {

struct PlatformConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::set<DirectiveKind> directive_kinds = default_directive_kinds();
  std::size_t lsi_rank = 0;  // 0: default_rank()
};

/// Reads a JSON config file:
///   {"listen": "host:port", "data_dir": "...", "directive_kinds": [...], "lsi_rank": N}
/// Relative data_dir values resolve against the config file's directory.
PlatformConfig load_config(const std::filesystem::path& file);

/// MMLHUB_LISTEN ("host:port") and MMLHUB_DATA_DIR take precedence over the file.
void apply_env_overrides(PlatformConfig& config);

enum class Role { Admin, Editor };

const char* to_string(Role role) noexcept;
std::optional<Role> role_from_string(std::string_view text) noexcept;

struct User {
  std::string id;
  std::string name;
  Role role = Role::Editor;
  bool blocked = false;
  std::string token_hash;  // sha256 hex of the bearer token

  Actor actor() const { return {id, blocked}; }
};

/// Pre-provisioned accounts persisted in users.json.
class UserRegistry {
 public:
  UserRegistry() = default;
  explicit UserRegistry(std::filesystem::path file);

  void add(User user, std::string_view token);
  std::optional<User> authenticate(std::string_view token) const;
  std::optional<User> find(std::string_view id) const;
  /// Returns false if no such user exists.
  bool set_blocked(std::string_view id, bool blocked);
  std::vector<User> all() const;

 private:
  void persist() const;

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> file_;
  std::vector<User> users_;
};

/// Immutable snapshot of one library version and everything derived from it.
struct CorpusState {
  std::string version_label;
  std::string corpus_hash;
  std::vector<Article> articles;  // sorted by name
  DepGraph graph;                 // full, layered
  DepGraph reduced;               // transitively reduced, layered
  TermDocMatrix matrix;
  LsiModel lsi;
  NameIndex names;
  std::map<std::string, std::string, std::less<>> statements;  // anchor -> statement text
  std::vector<std::string> warnings;

  const Article* article(std::string_view name) const;
  bool has_anchor(std::string_view anchor) const { return statements.count(anchor) > 0; }
  std::set<std::string> article_names() const;
};

/// Parses every *.miz file in a directory; the uppercased stem names the article.
std::vector<Article> parse_corpus_dir(const std::filesystem::path& dir);

std::string corpus_hash(const std::vector<Article>& articles);

struct IngestResult {
  std::shared_ptr<const CorpusState> state;
  bool lsi_rebuilt = false;
};

struct UpdateReport {
  std::string version_label;
  std::string previous_label;
  std::vector<ArticleRebase> articles;  // only articles that carry comments
  std::vector<std::string> skipped_frozen;
  std::size_t conflict_count = 0;
  std::size_t comments_before = 0;
  std::size_t comments_after = 0;
  bool dry_run = false;

  std::string to_json() const;
};

/// The service core: owns the data directory, the served snapshot, the
/// comment store, feedback log and user registry.
class Platform {
 public:
  explicit Platform(PlatformConfig config);

  const PlatformConfig& config() const noexcept { return config_; }

  /// Current snapshot; null before the first ingest.
  std::shared_ptr<const CorpusState> state() const;

  /// Builds a snapshot from `dir`, persists it and publishes it atomically.
  /// On any error the previous snapshot keeps serving.
  IngestResult ingest_corpus(const std::filesystem::path& dir, const std::string& label);

  /// Carries comments across a library update, then ingests the new corpus.
  /// Conflicted articles are frozen and their reports written under
  /// reports/<label>/.
  UpdateReport update_corpus(const std::filesystem::path& dir, const std::string& label);

  /// Dry run of the comment rebase between two corpus directories.
  UpdateReport preview_rebase(const std::filesystem::path& old_dir, const std::filesystem::path& new_dir) const;

  /// Administrator resolution of a frozen article: `annotated_text` must strip
  /// to the current pristine text. Comments are matched to their previous
  /// histories by body; unmatched blocks become new revisions.
  void resolve_conflict(std::string_view article, std::string_view annotated_text, const Actor& admin);

  bool is_frozen(std::string_view article) const;
  std::set<std::string> frozen_articles() const;

  CommentStore& comments() noexcept { return comments_; }
  const CommentStore& comments() const noexcept { return comments_; }
  FeedbackLog& feedback() noexcept { return feedback_; }
  UserRegistry& users() noexcept { return users_; }

  /// Rejects saves on frozen articles, then delegates to save_comment.
  CommentRevision save_comment(const std::string& anchor, std::string body, const Actor& author);

 private:
  IngestResult build_state(const std::filesystem::path& dir, const std::string& label) const;
  void persist_corpus(const std::filesystem::path& source_dir, const CorpusState& state) const;
  void publish(std::shared_ptr<const CorpusState> next);
  void persist_frozen() const;

  PlatformConfig config_;
  std::filesystem::path data_;
  CommentStore comments_;
  FeedbackLog feedback_;
  UserRegistry users_;

  mutable std::mutex state_mutex_;
  std::shared_ptr<const CorpusState> state_;

  std::mutex write_mutex_;  // ingest, update and resolution run one at a time
  mutable std::mutex frozen_mutex_;
  std::map<std::string, std::string> frozen_;  // article -> report path
};

}  // namespace mmlhub
