#include "mmlhub/merge.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

namespace mmlhub {

namespace {

struct Snake {
  std::size_t x_begin, y_begin, x_end, y_end;  // relative to the subproblem
};

class MyersLcs {
 public:
  MyersLcs(std::span<const std::string> a, std::span<const std::string> b) : a_(a), b_(b) {}

  std::vector<LineMatch> run() {
    out_.clear();
    solve(0, a_.size(), 0, b_.size());
    return std::move(out_);
  }

 private:
  void solve(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    while (a0 < a1 && b0 < b1 && a_[a0] == b_[b0]) out_.push_back({a0++, b0++});
    std::size_t suffix = 0;
    while (a1 > a0 && b1 > b0 && a_[a1 - 1] == b_[b1 - 1]) {
      --a1;
      --b1;
      ++suffix;
    }
    if (a0 < a1 && b0 < b1) {
      Snake s = middle_snake(a0, a1, b0, b1);
      solve(a0, a0 + s.x_begin, b0, b0 + s.y_begin);
      for (std::size_t i = 0; i < s.x_end - s.x_begin; ++i)
        out_.push_back({a0 + s.x_begin + i, b0 + s.y_begin + i});
      solve(a0 + s.x_end, a1, b0 + s.y_end, b1);
    }
    for (std::size_t i = 0; i < suffix; ++i) out_.push_back({a1 + i, b1 + i});
  }

  /// Finds the middle snake of an optimal path through a[a0,a1) x b[b0,b1).
  /// Ties between a deletion and an insertion take the deletion.
  Snake middle_snake(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    const auto n = static_cast<std::int64_t>(a1 - a0);
    const auto m = static_cast<std::int64_t>(b1 - b0);
    const std::int64_t delta = n - m;
    const bool odd = (delta & 1) != 0;
    const std::int64_t dmax = (n + m + 1) / 2;
    const std::int64_t offset = dmax + 1;
    std::vector<std::int64_t> vf(static_cast<std::size_t>(2 * offset + 1), 0);
    std::vector<std::int64_t> vb(static_cast<std::size_t>(2 * offset + 1), 0);
    auto F = [&](std::int64_t k) -> std::int64_t& { return vf[static_cast<std::size_t>(k + offset)]; };
    auto B = [&](std::int64_t k) -> std::int64_t& { return vb[static_cast<std::size_t>(k + offset)]; };
    auto fa = [&](std::int64_t x) -> const std::string& { return a_[a0 + static_cast<std::size_t>(x)]; };
    auto fb = [&](std::int64_t y) -> const std::string& { return b_[b0 + static_cast<std::size_t>(y)]; };

    for (std::int64_t d = 0; d <= dmax; ++d) {
      for (std::int64_t k = -d; k <= d; k += 2) {
        std::int64_t x = (k == -d || (k != d && F(k - 1) < F(k + 1))) ? F(k + 1) : F(k - 1) + 1;
        std::int64_t y = x - k;
        const std::int64_t xs = x, ys = y;
        while (x < n && y < m && fa(x) == fb(y)) ++x, ++y;
        F(k) = x;
        const std::int64_t kr = delta - k;
        if (odd && kr >= -(d - 1) && kr <= d - 1 && F(k) + B(kr) >= n)
          return to_snake(xs, ys, x, y);
      }
      for (std::int64_t kr = -d; kr <= d; kr += 2) {
        std::int64_t xr = (kr == -d || (kr != d && B(kr - 1) < B(kr + 1))) ? B(kr + 1) : B(kr - 1) + 1;
        std::int64_t yr = xr - kr;
        const std::int64_t xrs = xr, yrs = yr;
        while (xr < n && yr < m && fa(n - 1 - xr) == fb(m - 1 - yr)) ++xr, ++yr;
        B(kr) = xr;
        const std::int64_t k = delta - kr;
        if (!odd && k >= -d && k <= d && B(kr) + F(k) >= n)
          return to_snake(n - xr, m - yr, n - xrs, m - yrs);
      }
    }
    // Unreachable for finite inputs: an optimal path has at most n + m edits.
    return to_snake(0, 0, 0, 0);
  }

  static Snake to_snake(std::int64_t xb, std::int64_t yb, std::int64_t xe, std::int64_t ye) {
    return {static_cast<std::size_t>(xb), static_cast<std::size_t>(yb), static_cast<std::size_t>(xe),
            static_cast<std::size_t>(ye)};
  }

  std::span<const std::string> a_;
  std::span<const std::string> b_;
  std::vector<LineMatch> out_;
};

bool same_lines(std::span<const std::string> x, std::span<const std::string> y) {
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

}  // namespace

std::vector<LineMatch> diff_matches(std::span<const std::string> a, std::span<const std::string> b) {
  return MyersLcs(a, b).run();
}

std::vector<Edit> diff_lines(std::span<const std::string> a, std::span<const std::string> b) {
  auto matches = diff_matches(a, b);
  matches.push_back({a.size(), b.size()});  // sentinel
  std::vector<Edit> script;
  std::size_t i = 0, j = 0;
  for (const auto& m : matches) {
    for (; i < m.a_index; ++i) script.push_back({EditOp::Delete, i, j});
    for (; j < m.b_index; ++j) script.push_back({EditOp::Insert, i, j});
    if (m.a_index < a.size()) script.push_back({EditOp::Keep, i++, j++});
  }
  return script;
}

MergeResult diff3_merge(std::span<const std::string> base, std::span<const std::string> ours,
                        std::span<const std::string> theirs, const MergeLabels& labels) {
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> to_ours(base.size(), kNone), to_theirs(base.size(), kNone);
  for (const auto& m : diff_matches(base, ours)) to_ours[m.a_index] = m.b_index;
  for (const auto& m : diff_matches(base, theirs)) to_theirs[m.a_index] = m.b_index;

  MergeResult result;
  auto& out = result.merged_lines;
  std::size_t o = 0, a = 0, b = 0;  // cursors into base, ours, theirs
  while (o < base.size() || a < ours.size() || b < theirs.size()) {
    if (o < base.size() && to_ours[o] == a && to_theirs[o] == b) {
      out.push_back(base[o]);
      ++o, ++a, ++b;
      continue;
    }
    // Next base line aligned on both sides closes the unstable chunk.
    std::size_t next = o;
    while (next < base.size() && (to_ours[next] == kNone || to_theirs[next] == kNone)) ++next;
    const std::size_t a_end = next < base.size() ? to_ours[next] : ours.size();
    const std::size_t b_end = next < base.size() ? to_theirs[next] : theirs.size();

    auto base_chunk = base.subspan(o, next - o);
    auto ours_chunk = ours.subspan(a, a_end - a);
    auto theirs_chunk = theirs.subspan(b, b_end - b);

    if (same_lines(ours_chunk, base_chunk)) {
      out.insert(out.end(), theirs_chunk.begin(), theirs_chunk.end());
    } else if (same_lines(theirs_chunk, base_chunk) || same_lines(ours_chunk, theirs_chunk)) {
      out.insert(out.end(), ours_chunk.begin(), ours_chunk.end());
    } else {
      MergeConflict c{{o, next},
                      {a, a_end},
                      {b, b_end},
                      {base_chunk.begin(), base_chunk.end()},
                      {ours_chunk.begin(), ours_chunk.end()},
                      {theirs_chunk.begin(), theirs_chunk.end()}};
      out.push_back("<<<<<<< " + labels.ours);
      out.insert(out.end(), c.ours_lines.begin(), c.ours_lines.end());
      out.push_back("||||||| " + labels.base);
      out.insert(out.end(), c.base_lines.begin(), c.base_lines.end());
      out.push_back("=======");
      out.insert(out.end(), c.theirs_lines.begin(), c.theirs_lines.end());
      out.push_back(">>>>>>> " + labels.theirs);
      result.conflicts.push_back(std::move(c));
    }
    o = next, a = a_end, b = b_end;
  }
  result.clean = result.conflicts.empty();
  return result;
}

}  // namespace mmlhub
