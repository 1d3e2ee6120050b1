#include "gecgen/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gecgen/common.h"

namespace gecgen {

namespace {

enum class Step : unsigned char { match, substitute, del, insert };

}  // namespace

std::vector<Edit> extract_edits(const std::vector<std::string>& source_tokens,
                                const std::vector<std::string>& hyp_tokens) {
  const size_t n = source_tokens.size(), m = hyp_tokens.size();
  // Full DP table with backtrace; evaluation sentences are short enough
  // that quadratic memory is not a concern.
  std::vector<std::vector<unsigned>> d(n + 1, std::vector<unsigned>(m + 1));
  std::vector<std::vector<Step>> back(n + 1, std::vector<Step>(m + 1));
  for (size_t i = 0; i <= n; ++i) {
    d[i][0] = static_cast<unsigned>(i);
    back[i][0] = Step::del;
  }
  for (size_t j = 0; j <= m; ++j) {
    d[0][j] = static_cast<unsigned>(j);
    back[0][j] = Step::insert;
  }
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const bool eq = source_tokens[i - 1] == hyp_tokens[j - 1];
      // Preference on ties: match, then substitution, then deletion, then
      // insertion; any order yields a valid minimal alignment, a fixed one
      // keeps extraction canonical.
      unsigned best = d[i - 1][j - 1] + (eq ? 0u : 1u);
      Step step = eq ? Step::match : Step::substitute;
      if (d[i - 1][j] + 1 < best) {
        best = d[i - 1][j] + 1;
        step = Step::del;
      }
      if (d[i][j - 1] + 1 < best) {
        best = d[i][j - 1] + 1;
        step = Step::insert;
      }
      d[i][j] = best;
      back[i][j] = step;
    }
  }

  // Walk the path forward, then merge adjacent non-match runs.
  std::vector<Step> path;
  {
    size_t i = n, j = m;
    while (i > 0 || j > 0) {
      const Step s = back[i][j];
      path.push_back(s);
      switch (s) {
        case Step::match:
        case Step::substitute:
          --i;
          --j;
          break;
        case Step::del:
          --i;
          break;
        case Step::insert:
          --j;
          break;
      }
    }
    std::reverse(path.begin(), path.end());
  }

  std::vector<Edit> edits;
  size_t i = 0, j = 0;
  size_t p = 0;
  while (p < path.size()) {
    if (path[p] == Step::match) {
      ++i;
      ++j;
      ++p;
      continue;
    }
    Edit e;
    e.span_start = i;
    while (p < path.size() && path[p] != Step::match) {
      switch (path[p]) {
        case Step::substitute:
          e.replacement.push_back(hyp_tokens[j]);
          ++i;
          ++j;
          break;
        case Step::del:
          ++i;
          break;
        case Step::insert:
          e.replacement.push_back(hyp_tokens[j]);
          ++j;
          break;
        case Step::match:
          break;
      }
      ++p;
    }
    e.span_end = i;
    edits.push_back(std::move(e));
  }
  return edits;
}

std::vector<std::string> apply_edits(const std::vector<std::string>& source_tokens,
                                     const std::vector<Edit>& edits) {
  std::vector<Edit> sorted = edits;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> out;
  size_t i = 0;
  for (const auto& e : sorted) {
    if (e.span_start < i || e.span_end > source_tokens.size())
      throw std::invalid_argument("edits overlap or run past the source");
    while (i < e.span_start) out.push_back(source_tokens[i++]);
    for (const auto& t : e.replacement) out.push_back(t);
    i = e.span_end;
  }
  while (i < source_tokens.size()) out.push_back(source_tokens[i++]);
  return out;
}

double f_beta_score(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0) return 0;
  return (1 + b2) * precision * recall / denom;
}

MetricReport score_edits(
    const std::vector<std::vector<Edit>>& system_edits,
    const std::vector<std::vector<std::vector<Edit>>>& gold_edits,
    double beta) {
  if (system_edits.size() != gold_edits.size())
    throw std::invalid_argument("system/gold sentence counts differ");

  uint64_t matches = 0, n_system = 0, n_gold = 0;
  for (size_t s = 0; s < system_edits.size(); ++s) {
    const std::set<Edit> sys(system_edits[s].begin(), system_edits[s].end());
    // Fall back to a single no-edit annotator for unannotated sentences.
    static const std::vector<std::vector<Edit>> kNone{{}};
    const auto& annotators = gold_edits[s].empty() ? kNone : gold_edits[s];

    uint64_t best_matches = 0;
    size_t best_gold = annotators[0].size();
    bool first = true;
    for (const auto& ann : annotators) {
      uint64_t m = 0;
      for (const auto& e : ann) m += sys.count(e);
      if (first || m > best_matches ||
          (m == best_matches && ann.size() < best_gold)) {
        best_matches = m;
        best_gold = ann.size();
        first = false;
      }
    }
    matches += best_matches;
    n_system += sys.size();
    n_gold += best_gold;
  }

  MetricReport r;
  r.beta = beta;
  r.matches = matches;
  r.system_edits = n_system;
  r.gold_edits = n_gold;
  if (n_system == 0 && n_gold == 0) {
    r.precision = r.recall = r.f_beta = 1.0;
    return r;
  }
  r.precision = n_system ? static_cast<double>(matches) / n_system : 0.0;
  r.recall = n_gold ? static_cast<double>(matches) / n_gold : 0.0;
  r.f_beta = f_beta_score(r.precision, r.recall, beta);
  return r;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int64_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[{tokens.begin() + i, tokens.begin() + i + n}];
  return counts;
}

struct GleuStats {
  std::vector<int64_t> numerator;    // per n
  std::vector<int64_t> denominator;  // per n
  int64_t hyp_len = 0;
  int64_t ref_len = 0;

  explicit GleuStats(size_t max_n) : numerator(max_n), denominator(max_n) {}

  void add(const GleuStats& o) {
    for (size_t i = 0; i < numerator.size(); ++i) {
      numerator[i] += o.numerator[i];
      denominator[i] += o.denominator[i];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
  }
};

GleuStats sentence_stats(const std::vector<std::string>& source,
                         const std::vector<std::string>& hyp,
                         const std::vector<std::string>& ref, size_t max_n) {
  GleuStats st(max_n);
  st.hyp_len = static_cast<int64_t>(hyp.size());
  st.ref_len = static_cast<int64_t>(ref.size());
  for (size_t n = 1; n <= max_n; ++n) {
    const auto h = ngrams(hyp, n);
    const auto r = ngrams(ref, n);
    const auto s = ngrams(source, n);
    int64_t reward = 0, penalty = 0;
    for (const auto& [gram, hc] : h) {
      const auto rit = r.find(gram);
      const int64_t rc = rit == r.end() ? 0 : rit->second;
      reward += std::min(hc, rc);
      // Hypothesis n-grams that come from the source and are absent from
      // the reference count against the score. Any presence in the
      // reference clears the n-gram entirely.
      if (rc == 0) {
        const auto sit = s.find(gram);
        const int64_t sc = sit == s.end() ? 0 : sit->second;
        penalty += std::min(hc, sc);
      }
    }
    st.numerator[n - 1] = std::max<int64_t>(reward - penalty, 0);
    st.denominator[n - 1] =
        std::max<int64_t>(static_cast<int64_t>(hyp.size()) + 1 -
                              static_cast<int64_t>(n),
                          0);
  }
  return st;
}

double gleu_from_stats(const GleuStats& st, size_t max_n) {
  double log_sum = 0;
  size_t used = 0;
  for (size_t n = 0; n < max_n; ++n) {
    if (st.denominator[n] == 0) continue;  // hypothesis shorter than n
    if (st.numerator[n] == 0) return 0;
    log_sum += std::log(static_cast<double>(st.numerator[n]) /
                        static_cast<double>(st.denominator[n]));
    ++used;
  }
  if (used == 0) return 0;
  double bp = 0;
  if (st.hyp_len == 0) return 0;
  if (st.hyp_len < st.ref_len)
    bp = 1.0 - static_cast<double>(st.ref_len) / static_cast<double>(st.hyp_len);
  return std::exp(bp + log_sum / static_cast<double>(used));
}

}  // namespace

double gleu(const std::vector<std::string>& source_tokens,
            const std::vector<std::string>& hyp_tokens,
            const std::vector<std::vector<std::string>>& references,
            size_t max_n) {
  if (references.empty())
    throw std::invalid_argument("gleu needs at least one reference");
  if (hyp_tokens.empty()) return 0;
  double total = 0;
  for (const auto& ref : references) {
    total +=
        gleu_from_stats(sentence_stats(source_tokens, hyp_tokens, ref, max_n),
                        max_n);
  }
  return total / static_cast<double>(references.size());
}

double corpus_gleu(
    const std::vector<std::vector<std::string>>& source_tokens,
    const std::vector<std::vector<std::string>>& hyp_tokens,
    const std::vector<std::vector<std::vector<std::string>>>& reference_sets,
    size_t max_n) {
  if (reference_sets.empty())
    throw std::invalid_argument("corpus_gleu needs at least one reference set");
  for (const auto& refs : reference_sets)
    if (refs.size() != source_tokens.size() ||
        hyp_tokens.size() != source_tokens.size())
      throw std::invalid_argument("corpus_gleu sentence counts differ");

  double total = 0;
  for (const auto& refs : reference_sets) {
    GleuStats pooled(max_n);
    for (size_t s = 0; s < source_tokens.size(); ++s)
      pooled.add(
          sentence_stats(source_tokens[s], hyp_tokens[s], refs[s], max_n));
    total += gleu_from_stats(pooled, max_n);
  }
  return total / static_cast<double>(reference_sets.size());
}

std::vector<M2Sentence> read_m2(std::istream& in) {
  std::vector<M2Sentence> sentences;
  M2Sentence cur;
  std::map<int, std::vector<Edit>> annotators;
  bool have_sentence = false;

  const auto flush = [&]() {
    if (!have_sentence) return;
    if (annotators.empty()) {
      cur.annotators.push_back({});
    } else {
      for (auto& [id, edits] : annotators)
        cur.annotators.push_back(std::move(edits));
    }
    sentences.push_back(std::move(cur));
    cur = M2Sentence{};
    annotators.clear();
    have_sentence = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("S ", 0) == 0 || line == "S") {
      flush();
      cur.tokens = split_whitespace(line.substr(1));
      have_sentence = true;
      continue;
    }
    if (line.rfind("A ", 0) == 0) {
      if (!have_sentence) throw std::runtime_error("M2 edit before sentence");
      // A start end|||type|||replacement|||required|||comment|||annotator
      std::vector<std::string> fields;
      size_t pos = 2;
      while (true) {
        const size_t sep = line.find("|||", pos);
        if (sep == std::string::npos) {
          fields.push_back(line.substr(pos));
          break;
        }
        fields.push_back(line.substr(pos, sep - pos));
        pos = sep + 3;
      }
      if (fields.size() < 2) throw std::runtime_error("bad M2 edit line");
      std::istringstream span(fields[0]);
      long start = 0, end = 0;
      span >> start >> end;
      const int annotator =
          fields.size() >= 6 ? std::atoi(fields.back().c_str()) : 0;
      const std::string& type = fields.size() >= 2 ? fields[1] : "";
      annotators.try_emplace(annotator);
      if (type == "noop" || (start == -1 && end == -1)) continue;
      if (start < 0 || end < start ||
          static_cast<size_t>(end) > cur.tokens.size())
        throw std::runtime_error("M2 edit span out of range");
      Edit e;
      e.span_start = static_cast<size_t>(start);
      e.span_end = static_cast<size_t>(end);
      if (fields.size() >= 3 && fields[2] != "-NONE-")
        e.replacement = split_whitespace(fields[2]);
      annotators[annotator].push_back(std::move(e));
      continue;
    }
    throw std::runtime_error("unrecognized M2 line: " + line);
  }
  flush();
  return sentences;
}

std::vector<M2Sentence> read_m2_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open M2 file: " + path);
  return read_m2(in);
}

}  // namespace gecgen
