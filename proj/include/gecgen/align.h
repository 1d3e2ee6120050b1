#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gecgen/example.h"

namespace gecgen {

struct TokenRange {
  size_t begin = 0;
  size_t end = 0;  // half-open

  size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool operator==(const TokenRange&) const = default;
};

enum class SpanKind { matched, unmatched };

struct AlignmentSpan {
  SpanKind kind = SpanKind::matched;
  TokenRange old_range;
  TokenRange new_range;

  bool operator==(const AlignmentSpan&) const = default;
};

// LCS-based diff over tokens. Matched spans carry identical tokens of equal
// length on both sides; spans tile both sequences without gaps or overlaps.
// Matched spans are invariant under swapping the inputs.
std::vector<AlignmentSpan> align(const std::vector<std::string>& old_tokens,
                                 const std::vector<std::string>& new_tokens);

// Token-boundary cut positions, expressed in both coordinate systems. Valid
// cut points exist only inside matched spans (their edges included), where
// the two sides advance in lockstep.
struct CutPoint {
  size_t old_pos = 0;
  size_t new_pos = 0;
};

// Every boundary of every matched span is independently selected with
// probability p_cut. Deterministic in seed.
std::vector<CutPoint> select_cut_points(const std::vector<AlignmentSpan>& spans,
                                        double p_cut, uint64_t seed);

// Consecutive cut points delimit one example: source is the old-side text
// between them, target the new-side text. Material before the first and
// after the last cut is not emitted, and pairs empty on both sides are
// dropped. page/revision fields are left for the caller to fill.
std::vector<ExamplePair> cut_examples(const std::vector<AlignmentSpan>& spans,
                                      const std::vector<std::string>& old_tokens,
                                      const std::vector<std::string>& new_tokens,
                                      double p_cut, uint64_t seed);

class SubwordModel;

// Keep/drop filter: either side over max_wordpieces drops the pair, as does
// a wordpiece edit distance above max_edit_distance when that is set (> 0).
// With a null model, whitespace tokens stand in for wordpieces.
bool filter_example(const ExamplePair& pair, size_t max_wordpieces,
                    size_t max_edit_distance, const SubwordModel* model);

}  // namespace gecgen
