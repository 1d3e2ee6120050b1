#include "gecgen/align.h"

#include <algorithm>
#include <stdexcept>

#include "gecgen/common.h"
#include "gecgen/subword.h"

namespace gecgen {

namespace {

using Tokens = std::vector<std::string>;

// Matched index pairs (i into a, j into b), strictly increasing in both.
using Matches = std::vector<std::pair<size_t, size_t>>;

struct MiddleSnake {
  size_t x_begin, y_begin;  // snake start, a/b coordinates
  size_t x_end, y_end;      // snake end, may equal the start
};

// Myers linear-space LCS: find a middle snake, recurse on both sides.
// The backward search runs the forward stepping rule on the reversed
// subsequences and maps coordinates back, so there is a single set of
// index conventions to get right.
class Differ {
 public:
  Differ(const Tokens& a, const Tokens& b) : a_(a), b_(b) {
    const size_t cap = a.size() + b.size() + 3;
    vf_.resize(2 * cap);
    vb_.resize(2 * cap);
  }

  Matches run() {
    Matches m;
    diff(0, a_.size(), 0, b_.size(), m);
    std::sort(m.begin(), m.end());
    return m;
  }

 private:
  void diff(size_t a0, size_t a1, size_t b0, size_t b1, Matches& m) {
    while (a0 < a1 && b0 < b1 && a_[a0] == b_[b0]) {
      m.emplace_back(a0, b0);
      ++a0;
      ++b0;
    }
    size_t suffix = 0;
    while (a0 < a1 && b0 < b1 && a_[a1 - 1] == b_[b1 - 1]) {
      --a1;
      --b1;
      ++suffix;
    }
    const size_t suffix_a = a1, suffix_b = b1;

    if (a0 < a1 && b0 < b1) {
      // After stripping, the corner tokens differ, so the snake is a strict
      // interior split: both recursive halves are smaller than the whole
      // even when the snake itself is empty, and recursion terminates.
      const auto s = middle_snake(a0, a1, b0, b1);
      diff(a0, s.x_begin, b0, s.y_begin, m);
      for (size_t t = 0; t < s.x_end - s.x_begin; ++t)
        m.emplace_back(s.x_begin + t, s.y_begin + t);
      diff(s.x_end, a1, s.y_end, b1, m);
    }

    for (size_t t = 0; t < suffix; ++t)
      m.emplace_back(suffix_a + t, suffix_b + t);
  }

  MiddleSnake middle_snake(size_t a0, size_t a1, size_t b0, size_t b1) {
    const long n = static_cast<long>(a1 - a0);
    const long mm = static_cast<long>(b1 - b0);
    const long delta = n - mm;
    const bool odd = (delta & 1) != 0;
    const long offset = n + mm + 1;
    const long dmax = (n + mm + 1) / 2;

    vf_[offset + 1] = 0;
    vb_[offset + 1] = 0;
    for (long d = 0; d <= dmax; ++d) {
      for (long k = -d; k <= d; k += 2) {
        long x;
        if (k == -d || (k != d && vf_[offset + k - 1] < vf_[offset + k + 1]))
          x = vf_[offset + k + 1];
        else
          x = vf_[offset + k - 1] + 1;
        long y = x - k;
        const long x0 = x, y0 = y;
        while (x < n && y < mm &&
               a_[a0 + static_cast<size_t>(x)] ==
                   b_[b0 + static_cast<size_t>(y)]) {
          ++x;
          ++y;
        }
        vf_[offset + k] = x;
        if (odd) {
          // Backward values are from pass d-1 and exist only for reversed
          // diagonals in [-(d-1), d-1]; the reversed diagonal is delta-k.
          const long kr = delta - k;
          if (kr >= -(d - 1) && kr <= d - 1 &&
              vf_[offset + k] + vb_[offset + kr] >= n) {
            return MiddleSnake{a0 + static_cast<size_t>(x0),
                               b0 + static_cast<size_t>(y0),
                               a0 + static_cast<size_t>(x),
                               b0 + static_cast<size_t>(y)};
          }
        }
      }
      for (long k = -d; k <= d; k += 2) {
        long x;
        if (k == -d || (k != d && vb_[offset + k - 1] < vb_[offset + k + 1]))
          x = vb_[offset + k + 1];
        else
          x = vb_[offset + k - 1] + 1;
        long y = x - k;
        const long x0 = x, y0 = y;
        // Reversed coordinates: x counts from the end of a, y from the end
        // of b.
        while (x < n && y < mm &&
               a_[a0 + static_cast<size_t>(n - 1 - x)] ==
                   b_[b0 + static_cast<size_t>(mm - 1 - y)]) {
          ++x;
          ++y;
        }
        vb_[offset + k] = x;
        if (!odd) {
          // Forward values are from this same pass, diagonals [-d, d].
          const long kr = delta - k;
          if (kr >= -d && kr <= d && vb_[offset + k] + vf_[offset + kr] >= n) {
            return MiddleSnake{a0 + static_cast<size_t>(n - x),
                               b0 + static_cast<size_t>(mm - y),
                               a0 + static_cast<size_t>(n - x0),
                               b0 + static_cast<size_t>(mm - y0)};
          }
        }
      }
    }
    throw std::logic_error("middle snake not found");
  }

  const Tokens& a_;
  const Tokens& b_;
  std::vector<long> vf_, vb_;
};

std::vector<AlignmentSpan> spans_from_matches(const Matches& matches,
                                              size_t old_size,
                                              size_t new_size) {
  std::vector<AlignmentSpan> spans;
  size_t oi = 0, ni = 0;
  size_t m = 0;
  while (m < matches.size()) {
    const size_t o_begin = matches[m].first, n_begin = matches[m].second;
    size_t run = 1;
    while (m + run < matches.size() &&
           matches[m + run].first == o_begin + run &&
           matches[m + run].second == n_begin + run)
      ++run;
    if (oi < o_begin || ni < n_begin)
      spans.push_back({SpanKind::unmatched, {oi, o_begin}, {ni, n_begin}});
    spans.push_back({SpanKind::matched,
                     {o_begin, o_begin + run},
                     {n_begin, n_begin + run}});
    oi = o_begin + run;
    ni = n_begin + run;
    m += run;
  }
  if (oi < old_size || ni < new_size)
    spans.push_back({SpanKind::unmatched, {oi, old_size}, {ni, new_size}});
  return spans;
}

}  // namespace

std::vector<AlignmentSpan> align(const std::vector<std::string>& old_tokens,
                                 const std::vector<std::string>& new_tokens) {
  // The diff is direction-sensitive in where it places unmatched material.
  // Running it on a canonical ordering of the inputs and mirroring the
  // match pairs back makes matched spans invariant under input swap.
  const bool swapped = new_tokens < old_tokens;
  const Tokens& a = swapped ? new_tokens : old_tokens;
  const Tokens& b = swapped ? old_tokens : new_tokens;

  Matches matches = Differ(a, b).run();
  if (swapped) {
    for (auto& [x, y] : matches) std::swap(x, y);
  }
  return spans_from_matches(matches, old_tokens.size(), new_tokens.size());
}

std::vector<CutPoint> select_cut_points(const std::vector<AlignmentSpan>& spans,
                                        double p_cut, uint64_t seed) {
  std::vector<CutPoint> cuts;
  SplitMix64 rng(seed);
  for (const auto& span : spans) {
    if (span.kind != SpanKind::matched) continue;
    // All boundaries of the span are eligible, edges included.
    for (size_t t = 0; t <= span.old_range.size(); ++t) {
      if (rng.next_unit() < p_cut)
        cuts.push_back({span.old_range.begin + t, span.new_range.begin + t});
    }
  }
  return cuts;
}

std::vector<ExamplePair> cut_examples(const std::vector<AlignmentSpan>& spans,
                                      const std::vector<std::string>& old_tokens,
                                      const std::vector<std::string>& new_tokens,
                                      double p_cut, uint64_t seed) {
  const auto cuts = select_cut_points(spans, p_cut, seed);
  std::vector<ExamplePair> out;
  if (cuts.size() < 2) return out;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    const auto& lo = cuts[c];
    const auto& hi = cuts[c + 1];
    if (lo.old_pos == hi.old_pos && lo.new_pos == hi.new_pos) continue;
    ExamplePair pair;
    pair.source = join_tokens({old_tokens.begin() + lo.old_pos,
                               old_tokens.begin() + hi.old_pos});
    pair.target = join_tokens({new_tokens.begin() + lo.new_pos,
                               new_tokens.begin() + hi.new_pos});
    pair.is_identity = pair.source == pair.target;
    out.push_back(std::move(pair));
  }
  return out;
}

bool filter_example(const ExamplePair& pair, size_t max_wordpieces,
                    size_t max_edit_distance, const SubwordModel* model) {
  const auto pieces_of = [&](const std::string& text) {
    return model ? model->encode_rendered(text) : split_whitespace(text);
  };
  const auto src = pieces_of(pair.source);
  const auto tgt = pieces_of(pair.target);
  if (src.size() > max_wordpieces || tgt.size() > max_wordpieces) return false;
  if (max_edit_distance > 0 && levenshtein(src, tgt) > max_edit_distance)
    return false;
  return true;
}

}  // namespace gecgen
