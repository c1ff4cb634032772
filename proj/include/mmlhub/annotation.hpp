#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mmlhub/article.hpp"
#include "mmlhub/merge.hpp"

namespace mmlhub {

/// Identity of whoever performs a mutating operation.
struct Actor {
  std::string id;
  bool blocked = false;
};

struct CommentRevision {
  std::string anchor;
  std::string body;
  std::string author;
  std::string timestamp;
  std::uint64_t revision_id = 0;
  std::optional<std::uint64_t> parent;
  bool deleted = false;
  friend bool operator==(const CommentRevision&, const CommentRevision&) = default;
};

std::string to_json_line(const CommentRevision& rev);
CommentRevision comment_from_json_line(std::string_view line);

/// Append-only revision log per anchor. With a directory, each article's
/// revisions are persisted to `<dir>/<ARTICLE>.jsonl` as they are written.
/// Writes are serialized; reads may run concurrently.
class CommentStore {
 public:
  using Clock = std::function<std::string()>;

  CommentStore();
  explicit CommentStore(std::filesystem::path dir);

  void set_clock(Clock clock);

  /// Appends a revision numbered 1 + the current maximum for the anchor.
  CommentRevision append(const std::string& anchor, std::string body, const std::string& author,
                         bool deleted = false);

  std::vector<CommentRevision> history(std::string_view anchor) const;
  std::optional<CommentRevision> latest(std::string_view anchor) const;
  /// Latest revision unless it is a deletion.
  std::optional<CommentRevision> latest_live(std::string_view anchor) const;

  /// anchor -> body of every live comment in one article.
  std::map<std::string, std::string> live_comments(std::string_view article) const;
  std::vector<std::string> anchors(std::string_view article) const;
  std::set<std::string> articles() const;
  std::size_t revision_count() const;
  std::size_t live_count() const;

  /// Moves whole histories to new anchors after a library update and retires
  /// the listed anchors to `<dir>/archive/<ARTICLE>.jsonl`. Revisions keep
  /// their ids, bodies and authors; only the anchor key changes.
  void reanchor(std::string_view article, const std::map<std::string, std::string>& old_to_new,
                const std::vector<std::string>& retired);

 private:
  void persist_article(std::string_view article) const;

  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> dir_;
  Clock clock_;
  std::map<std::string, std::vector<CommentRevision>, std::less<>> by_anchor_;
};

using AnchorLookup = std::function<bool(std::string_view)>;

/// Throws UserBlocked or UnknownAnchor.
CommentRevision save_comment(CommentStore& store, const AnchorLookup& known, const std::string& anchor,
                             std::string body, const Actor& author);

/// Appends a new revision restoring the body of `to_revision`; history is
/// never rewritten. Throws UserBlocked or UnknownRevision.
CommentRevision rollback(CommentStore& store, const std::string& anchor, std::uint64_t to_revision,
                         const Actor& author);

/// Appends a deletion marker. Throws UserBlocked or UnknownAnchor.
CommentRevision delete_comment(CommentStore& store, const std::string& anchor, const Actor& author);

/// Marker prefix of embedded comment lines.
inline constexpr std::string_view kCommentMarker = "::@";

struct AnnotatedSource {
  std::vector<std::string> lines;
};

/// Inserts each comment, one "::@ " line per body line, directly above the
/// opening line of its item. Comments on unknown anchors are ignored.
AnnotatedSource embed_comments(const Article& article, const std::map<std::string, std::string>& comments);
AnnotatedSource embed_comments(const Article& article, const CommentStore& store);

/// Removes every line starting with the comment marker.
std::vector<std::string> strip_comments(std::span<const std::string> lines);

/// A run of marker lines and the pristine line it precedes.
struct CommentBlock {
  LineRange lines;              // within the annotated text
  std::size_t next_pristine = 0;  // 0-based index in the stripped text
  std::string body;
};

std::vector<CommentBlock> find_comment_blocks(std::span<const std::string> annotated);

/// diff3 with the old pristine text as base, the annotated text as ours and
/// the new pristine text as theirs. Throws StripMismatch when the annotated
/// text does not strip to old_pristine.
MergeResult rebase_annotations(std::span<const std::string> old_pristine, const AnnotatedSource& annotated,
                               std::span<const std::string> new_pristine);

/// Outcome of carrying one article's comments across a library update.
struct ArticleRebase {
  std::string article;
  bool clean = true;
  MergeResult merge;
  std::map<std::string, std::string> anchor_map;  // old anchor -> new anchor
  std::vector<std::string> retired;               // histories with no item to follow
  std::vector<std::string> conflict_anchors;
  std::size_t conflict_count = 0;
  std::vector<std::string> notes;

  /// Text with diff3 markers, for administrator resolution.
  std::string conflict_report() const;
};

/// `updated` is empty when the article was removed from the library.
ArticleRebase rebase_article(const Article& old_article, const std::optional<Article>& updated,
                             const CommentStore& store);

}  // namespace mmlhub
