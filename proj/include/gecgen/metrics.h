#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gecgen {

struct Edit {
  size_t span_start = 0;
  size_t span_end = 0;  // token offsets into the source, half-open
  std::vector<std::string> replacement;

  bool operator==(const Edit&) const = default;
  bool operator<(const Edit& o) const {
    if (span_start != o.span_start) return span_start < o.span_start;
    if (span_end != o.span_end) return span_end < o.span_end;
    return replacement < o.replacement;
  }
};

// Minimal-cost Levenshtein alignment with adjacent insert/delete/substitute
// runs merged into single edits. apply_edits(source, result) == hypothesis.
std::vector<Edit> extract_edits(const std::vector<std::string>& source_tokens,
                                const std::vector<std::string>& hyp_tokens);

std::vector<std::string> apply_edits(const std::vector<std::string>& source_tokens,
                                     const std::vector<Edit>& edits);

struct MetricReport {
  double precision = 0;  // fractions in [0,1]; callers scale for display
  double recall = 0;
  double f_beta = 0;
  double beta = 0.5;
  std::optional<double> gleu;
  uint64_t matches = 0;
  uint64_t system_edits = 0;
  uint64_t gold_edits = 0;
};

// Multi-annotator edit matching: per sentence the annotator maximizing the
// number of matched edits is chosen (ties: fewer gold edits, then lower
// annotator index); precision/recall aggregate over the corpus. A corpus
// with no system and no gold edits scores P=R=F=1; no matches with edits
// present on either side scores 0.
MetricReport score_edits(
    const std::vector<std::vector<Edit>>& system_edits,
    const std::vector<std::vector<std::vector<Edit>>>& gold_edits,
    double beta = 0.5);

// Works on either fractions or percentages; 0 when the denominator is 0.
double f_beta_score(double precision, double recall, double beta);

// Sentence-level GLEU against one or more references: n-gram precision that
// rewards reference n-grams and penalizes n-grams introduced by the source,
// geometric mean over n=1..max_n with brevity penalty. Scores against each
// reference are averaged. Empty hypothesis scores 0.
double gleu(const std::vector<std::string>& source_tokens,
            const std::vector<std::string>& hyp_tokens,
            const std::vector<std::vector<std::string>>& references,
            size_t max_n = 4);

// Corpus-level GLEU: statistics are pooled over sentences per reference set,
// then scores averaged across reference sets.
double corpus_gleu(
    const std::vector<std::vector<std::string>>& source_tokens,
    const std::vector<std::vector<std::string>>& hyp_tokens,
    const std::vector<std::vector<std::vector<std::string>>>& reference_sets,
    size_t max_n = 4);

struct M2Sentence {
  std::vector<std::string> tokens;
  // Edits per annotator id; annotators with only a noop line have an empty
  // edit list.
  std::vector<std::vector<Edit>> annotators;
};

// Reads the M2 annotation format: "S <tokens>" then zero or more
// "A start end|||type|||replacement|||..." lines, sentences separated by
// blank lines. Sentences with no annotations get one empty annotator.
std::vector<M2Sentence> read_m2(std::istream& in);
std::vector<M2Sentence> read_m2_file(const std::string& path);

}  // namespace gecgen
