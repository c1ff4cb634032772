#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mmlhub {

/// A pair of equal lines aligned by the diff: a[a_index] == b[b_index].
struct LineMatch {
  std::size_t a_index;
  std::size_t b_index;
  friend bool operator==(const LineMatch&, const LineMatch&) = default;
};

/// Longest common subsequence alignment computed with Myers' linear-space
/// O((N+M)D) algorithm. Matches are strictly increasing in both indices.
std::vector<LineMatch> diff_matches(std::span<const std::string> a, std::span<const std::string> b);

enum class EditOp { Keep, Delete, Insert };

struct Edit {
  EditOp op;
  std::size_t a_index;  // valid for Keep and Delete
  std::size_t b_index;  // valid for Keep and Insert
  friend bool operator==(const Edit&, const Edit&) = default;
};

/// Edit script derived from diff_matches. Within each changed gap all
/// deletions precede all insertions.
std::vector<Edit> diff_lines(std::span<const std::string> a, std::span<const std::string> b);

/// 0-based half-open line range.
struct LineRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const LineRange&, const LineRange&) = default;
};

struct MergeConflict {
  LineRange base;
  LineRange ours;
  LineRange theirs;
  std::vector<std::string> base_lines;
  std::vector<std::string> ours_lines;
  std::vector<std::string> theirs_lines;
};

struct MergeResult {
  /// Conflicted regions appear wrapped in <<<<<<< / ||||||| / ======= / >>>>>>> markers.
  std::vector<std::string> merged_lines;
  std::vector<MergeConflict> conflicts;
  bool clean = true;
};

struct MergeLabels {
  std::string ours = "ours";
  std::string base = "base";
  std::string theirs = "theirs";
};

/// Line-based three-way merge. Regions changed on one side only take that
/// side; regions changed identically on both sides merge cleanly; regions
/// changed differently on both sides become conflicts.
MergeResult diff3_merge(std::span<const std::string> base, std::span<const std::string> ours,
                        std::span<const std::string> theirs, const MergeLabels& labels = {});

}  // namespace mmlhub
