#include "mmlhub/annotation.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mmlhub/error.hpp"
#include "mmlhub/io.hpp"
#include "mmlhub/text.hpp"

namespace mmlhub {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_json_line(const CommentRevision& rev) {
  ordered_json j;
  j["anchor"] = rev.anchor;
  j["revision_id"] = rev.revision_id;
  j["parent"] = rev.parent ? ordered_json(*rev.parent) : ordered_json(nullptr);
  j["author"] = rev.author;
  j["timestamp"] = rev.timestamp;
  j["deleted"] = rev.deleted;
  j["body"] = rev.body;
  return j.dump();
}

CommentRevision comment_from_json_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    CommentRevision rev;
    rev.anchor = j.at("anchor").get<std::string>();
    rev.revision_id = j.at("revision_id").get<std::uint64_t>();
    if (!j.at("parent").is_null()) rev.parent = j.at("parent").get<std::uint64_t>();
    rev.author = j.at("author").get<std::string>();
    rev.timestamp = j.at("timestamp").get<std::string>();
    rev.deleted = j.at("deleted").get<bool>();
    rev.body = j.at("body").get<std::string>();
    return rev;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptData, std::string("bad comment record: ") + e.what());
  }
}

CommentStore::CommentStore() : clock_(utc_timestamp) {}

CommentStore::CommentStore(fs::path dir) : dir_(std::move(dir)), clock_(utc_timestamp) {
  fs::create_directories(*dir_);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*dir_))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto rev = comment_from_json_line(line);
      by_anchor_[rev.anchor].push_back(std::move(rev));
    }
  }
  for (auto& [anchor, revs] : by_anchor_) {
    std::sort(revs.begin(), revs.end(),
              [](const auto& a, const auto& b) { return a.revision_id < b.revision_id; });
    for (std::size_t i = 0; i < revs.size(); ++i)
      if (revs[i].revision_id != i + 1)
        throw Error(ErrorCode::CorruptData, "revision numbering gap for " + anchor);
  }
}

void CommentStore::set_clock(Clock clock) {
  std::unique_lock lock(mutex_);
  clock_ = std::move(clock);
}

CommentRevision CommentStore::append(const std::string& anchor, std::string body, const std::string& author,
                                     bool deleted) {
  std::unique_lock lock(mutex_);
  auto& revs = by_anchor_[anchor];
  CommentRevision rev;
  rev.anchor = anchor;
  rev.body = std::move(body);
  rev.author = author;
  rev.timestamp = clock_();
  rev.revision_id = revs.size() + 1;
  if (!revs.empty()) rev.parent = revs.back().revision_id;
  rev.deleted = deleted;
  if (dir_) append_line(*dir_ / (anchor_article(anchor) + ".jsonl"), to_json_line(rev));
  revs.push_back(rev);
  return rev;
}

std::vector<CommentRevision> CommentStore::history(std::string_view anchor) const {
  std::shared_lock lock(mutex_);
  auto it = by_anchor_.find(anchor);
  return it == by_anchor_.end() ? std::vector<CommentRevision>{} : it->second;
}

std::optional<CommentRevision> CommentStore::latest(std::string_view anchor) const {
  std::shared_lock lock(mutex_);
  auto it = by_anchor_.find(anchor);
  if (it == by_anchor_.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

std::optional<CommentRevision> CommentStore::latest_live(std::string_view anchor) const {
  auto rev = latest(anchor);
  if (rev && rev->deleted) return std::nullopt;
  return rev;
}

namespace {
template <typename Map, typename Fn>
void for_article(Map& map, std::string_view article, Fn&& fn) {
  std::string prefix = std::string(article) + ":";
  for (auto it = map.lower_bound(prefix); it != map.end() && it->first.starts_with(prefix); ++it) fn(*it);
}
}  // namespace

std::map<std::string, std::string> CommentStore::live_comments(std::string_view article) const {
  std::shared_lock lock(mutex_);
  std::map<std::string, std::string> out;
  for_article(by_anchor_, article, [&](const auto& entry) {
    if (!entry.second.empty() && !entry.second.back().deleted) out.emplace(entry.first, entry.second.back().body);
  });
  return out;
}

std::vector<std::string> CommentStore::anchors(std::string_view article) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for_article(by_anchor_, article, [&](const auto& entry) { out.push_back(entry.first); });
  return out;
}

std::set<std::string> CommentStore::articles() const {
  std::shared_lock lock(mutex_);
  std::set<std::string> out;
  for (const auto& [anchor, revs] : by_anchor_) out.insert(anchor_article(anchor));
  return out;
}

std::size_t CommentStore::revision_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [anchor, revs] : by_anchor_) n += revs.size();
  return n;
}

std::size_t CommentStore::live_count() const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(std::count_if(by_anchor_.begin(), by_anchor_.end(), [](const auto& e) {
    return !e.second.empty() && !e.second.back().deleted;
  }));
}

void CommentStore::reanchor(std::string_view article, const std::map<std::string, std::string>& old_to_new,
                            const std::vector<std::string>& retired) {
  std::unique_lock lock(mutex_);
  std::map<std::string, std::vector<CommentRevision>> taken;
  for_article(by_anchor_, article, [&](auto& entry) { taken.emplace(entry.first, std::move(entry.second)); });
  for (const auto& [anchor, revs] : taken) by_anchor_.erase(anchor);

  std::vector<CommentRevision> archive;
  std::map<std::string, std::vector<CommentRevision>> placed;
  auto retire = [&](std::vector<CommentRevision>& revs) {
    archive.insert(archive.end(), revs.begin(), revs.end());
  };
  for (auto& [anchor, revs] : taken) {
    if (std::find(retired.begin(), retired.end(), anchor) != retired.end()) {
      retire(revs);
      continue;
    }
    auto it = old_to_new.find(anchor);
    const std::string& target = it == old_to_new.end() ? anchor : it->second;
    if (placed.count(target)) {
      retire(revs);
      continue;
    }
    for (auto& r : revs) r.anchor = target;
    placed.emplace(target, std::move(revs));
  }
  for (auto& [anchor, revs] : placed) by_anchor_.emplace(anchor, std::move(revs));

  if (dir_) {
    for (const auto& rev : archive)
      append_line(*dir_ / "archive" / (std::string(article) + ".jsonl"), to_json_line(rev));
    persist_article(article);
  }
}

void CommentStore::persist_article(std::string_view article) const {
  std::string content;
  for_article(by_anchor_, article, [&](const auto& entry) {
    for (const auto& rev : entry.second) {
      content += to_json_line(rev);
      content += '\n';
    }
  });
  write_file_atomic(*dir_ / (std::string(article) + ".jsonl"), content);
}

CommentRevision save_comment(CommentStore& store, const AnchorLookup& known, const std::string& anchor,
                             std::string body, const Actor& author) {
  if (author.blocked) throw Error(ErrorCode::UserBlocked, "user " + author.id + " is blocked");
  if (!known(anchor)) throw Error(ErrorCode::UnknownAnchor, "unknown anchor " + anchor);
  return store.append(anchor, std::move(body), author.id);
}

CommentRevision rollback(CommentStore& store, const std::string& anchor, std::uint64_t to_revision,
                         const Actor& author) {
  if (author.blocked) throw Error(ErrorCode::UserBlocked, "user " + author.id + " is blocked");
  auto revs = store.history(anchor);
  auto it = std::find_if(revs.begin(), revs.end(), [&](const auto& r) { return r.revision_id == to_revision; });
  if (it == revs.end())
    throw Error(ErrorCode::UnknownRevision,
                "anchor " + anchor + " has no revision " + std::to_string(to_revision));
  return store.append(anchor, it->body, author.id);
}

CommentRevision delete_comment(CommentStore& store, const std::string& anchor, const Actor& author) {
  if (author.blocked) throw Error(ErrorCode::UserBlocked, "user " + author.id + " is blocked");
  if (!store.latest(anchor)) throw Error(ErrorCode::UnknownAnchor, "no comment on " + anchor);
  return store.append(anchor, "", author.id, true);
}

namespace {
bool is_marker_line(std::string_view line) { return line.starts_with(kCommentMarker); }
}  // namespace

AnnotatedSource embed_comments(const Article& article, const std::map<std::string, std::string>& comments) {
  AnnotatedSource out;
  out.lines.reserve(article.lines.size() + comments.size());
  std::size_t next = 0;
  for (const auto& item : article.items) {
    auto it = comments.find(item.anchor);
    if (it == comments.end()) continue;
    const std::size_t opener = item.span.first - 1;
    out.lines.insert(out.lines.end(), article.lines.begin() + static_cast<std::ptrdiff_t>(next),
                     article.lines.begin() + static_cast<std::ptrdiff_t>(opener));
    for (const auto& body_line : split_lines(it->second))
      out.lines.push_back(std::string(kCommentMarker) + " " + body_line);
    next = opener;
  }
  out.lines.insert(out.lines.end(), article.lines.begin() + static_cast<std::ptrdiff_t>(next), article.lines.end());
  return out;
}

AnnotatedSource embed_comments(const Article& article, const CommentStore& store) {
  return embed_comments(article, store.live_comments(article.name.value()));
}

std::vector<std::string> strip_comments(std::span<const std::string> lines) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines)
    if (!is_marker_line(line)) out.push_back(line);
  return out;
}

std::vector<CommentBlock> find_comment_blocks(std::span<const std::string> annotated) {
  std::vector<CommentBlock> blocks;
  std::vector<std::string> body;
  std::size_t pristine = 0;
  bool open = false;
  for (std::size_t i = 0; i <= annotated.size(); ++i) {
    bool marker = i < annotated.size() && is_marker_line(annotated[i]);
    if (marker) {
      if (!open) {
        blocks.push_back({{i, i}, 0, {}});
        body.clear();
        open = true;
      }
      std::string_view rest = std::string_view(annotated[i]).substr(kCommentMarker.size());
      if (rest.starts_with(' ')) rest.remove_prefix(1);
      body.emplace_back(rest);
      continue;
    }
    if (open) {
      blocks.back().lines.end = i;
      blocks.back().next_pristine = pristine;
      blocks.back().body = join_lines(body);
      open = false;
    }
    if (i < annotated.size()) ++pristine;
  }
  return blocks;
}

MergeResult rebase_annotations(std::span<const std::string> old_pristine, const AnnotatedSource& annotated,
                               std::span<const std::string> new_pristine) {
  auto stripped = strip_comments(annotated.lines);
  if (!std::equal(stripped.begin(), stripped.end(), old_pristine.begin(), old_pristine.end()))
    throw Error(ErrorCode::StripMismatch, "annotated text does not strip to the previous pristine text");
  return diff3_merge(old_pristine, annotated.lines, new_pristine,
                     MergeLabels{"annotated", "previous", "updated"});
}

std::string ArticleRebase::conflict_report() const {
  std::string out = ":: conflicts in " + article + ": " + std::to_string(conflict_count) + "\n";
  for (const auto& a : conflict_anchors) out += ":: anchor " + a + "\n";
  for (const auto& n : notes) out += ":: " + n + "\n";
  out += join_lines(merge.merged_lines);
  out += '\n';
  return out;
}

ArticleRebase rebase_article(const Article& old_article, const std::optional<Article>& updated,
                             const CommentStore& store) {
  ArticleRebase r;
  r.article = old_article.name.value();

  std::map<std::string, std::string> live;
  std::vector<std::string> dormant;  // histories without a live comment on a current item
  for (const auto& anchor : store.anchors(r.article)) {
    auto rev = store.latest_live(anchor);
    if (rev && old_article.find_item(anchor))
      live.emplace(anchor, rev->body);
    else
      dormant.push_back(anchor);
  }

  if (!updated) {
    if (!live.empty()) {
      r.clean = false;
      r.conflict_count = 1;
      for (const auto& [anchor, body] : live) r.conflict_anchors.push_back(anchor);
      r.notes.push_back("article removed from the library");
      r.merge.merged_lines = embed_comments(old_article, live).lines;
    } else {
      r.retired = dormant;
    }
    return r;
  }

  auto annotated = embed_comments(old_article, live);
  r.merge = rebase_annotations(old_article.lines, annotated, updated->lines);
  auto old_blocks = find_comment_blocks(annotated.lines);

  if (!r.merge.clean) {
    r.clean = false;
    r.conflict_count = r.merge.conflicts.size();
    for (const auto& block : old_blocks) {
      bool involved = std::any_of(r.merge.conflicts.begin(), r.merge.conflicts.end(), [&](const auto& c) {
        return block.lines.begin >= c.ours.begin && block.lines.end <= c.ours.end;
      });
      if (involved) r.conflict_anchors.push_back(old_article.item_starting_at(block.next_pristine + 1)->anchor);
    }
    return r;
  }

  auto new_blocks = find_comment_blocks(r.merge.merged_lines);
  if (new_blocks.size() != old_blocks.size()) {
    r.clean = false;
    r.conflict_count = 1;
    for (const auto& [anchor, body] : live) r.conflict_anchors.push_back(anchor);
    r.notes.push_back("updated text contains comment marker lines");
    return r;
  }
  std::set<std::string> targets;
  for (std::size_t i = 0; i < old_blocks.size(); ++i) {
    const auto& from = old_article.item_starting_at(old_blocks[i].next_pristine + 1)->anchor;
    const Item* to = updated->item_starting_at(new_blocks[i].next_pristine + 1);
    if (!to) {
      r.conflict_anchors.push_back(from);
      r.notes.push_back("comment on " + from + " no longer precedes an item");
      continue;
    }
    r.anchor_map.emplace(from, to->anchor);
    targets.insert(to->anchor);
  }
  if (!r.conflict_anchors.empty()) {
    r.clean = false;
    r.conflict_count = r.conflict_anchors.size();
    r.anchor_map.clear();
    return r;
  }

  // Histories without a live comment follow their item's opening line through the alignment.
  std::map<std::size_t, std::size_t> line_map;
  for (const auto& m : diff_matches(old_article.lines, updated->lines)) line_map.emplace(m.a_index, m.b_index);
  for (const auto& anchor : dormant) {
    const Item* item = old_article.find_item(anchor);
    const Item* to = nullptr;
    if (item)
      if (auto it = line_map.find(item->span.first - 1); it != line_map.end())
        to = updated->item_starting_at(it->second + 1);
    if (to && to->kind == item->kind && !targets.count(to->anchor)) {
      r.anchor_map.emplace(anchor, to->anchor);
      targets.insert(to->anchor);
    } else {
      r.retired.push_back(anchor);
    }
  }
  return r;
}

}  // namespace mmlhub
