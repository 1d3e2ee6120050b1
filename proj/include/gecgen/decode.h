#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gecgen {

struct Hypothesis {
  std::string text;
  double cost = 0;  // -log P(H|S)
};

struct ScorerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SequenceModel;

// n-best oracle over rewrites of an input. Implementations must return
// hypotheses in ascending cost order, at most `beam` of them.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<Hypothesis> nbest(const std::string& input,
                                        size_t beam) = 0;
  // Non-null when the scorer is backed by a per-step distribution model;
  // ensembling requires it.
  virtual const std::shared_ptr<SequenceModel>* step_model() const {
    return nullptr;
  }
};

struct DecodeConfig {
  size_t beam = 4;
  double threshold = 1.0;
  size_t max_iter = 10;
};

struct DecodeResult {
  std::string output;
  size_t iterations = 0;  // n-best rounds actually run
};

// Iterative decoding: per round take the n-best list, compare the best
// non-identity hypothesis against the identity at the cost ratio threshold
// (strict <; a missing identity counts as infinitely expensive), and feed
// the winner into the next round. Stops at max_iter or at a fixpoint.
DecodeResult iterative_decode(const std::string& input, Scorer& scorer,
                              const DecodeConfig& config);

struct StepDistribution {
  std::map<std::string, double> probabilities;
};

enum class EnsembleMode { geometric, arithmetic };

// Elementwise geometric or arithmetic mean over the union of tokens;
// geometric results are renormalized. Throws on an empty list.
StepDistribution ensemble_distributions(
    const std::vector<StepDistribution>& dists, EnsembleMode mode);

// Steps a token at a time given the source and the tokens emitted so far.
// Returning kEndToken probability ends a sequence.
class SequenceModel {
 public:
  static constexpr const char* kEndToken = "</s>";

  virtual ~SequenceModel() = default;
  virtual StepDistribution next(const std::string& input,
                                const std::vector<std::string>& prefix) = 0;
};

// Beam search over a SequenceModel; hypothesis cost is the sum of per-step
// -log probabilities.
class ModelScorer : public Scorer {
 public:
  explicit ModelScorer(std::shared_ptr<SequenceModel> model,
                       size_t max_tokens = 128);
  std::vector<Hypothesis> nbest(const std::string& input, size_t beam) override;
  const std::shared_ptr<SequenceModel>* step_model() const override {
    return &model_;
  }

 private:
  std::shared_ptr<SequenceModel> model_;
  size_t max_tokens_;
};

// Combines step-model scorers by averaging their per-step distributions
// inside one shared beam. A single member is returned unchanged. Throws
// std::invalid_argument when empty or when a member has no step model.
std::shared_ptr<Scorer> ensemble_scorer(
    const std::vector<std::shared_ptr<Scorer>>& members, EnsembleMode mode);

// Add-alpha smoothed bigram language model over whitespace tokens.
class BigramLm {
 public:
  static BigramLm from_corpus(const std::vector<std::string>& lines,
                              double alpha = 0.1);
  // Sum of log P(token | previous) across the sequence including the
  // sentence-end transition.
  double log_prob(const std::vector<std::string>& tokens) const;

 private:
  std::map<std::string, uint64_t> unigrams_;
  std::map<std::pair<std::string, std::string>, uint64_t> bigrams_;
  size_t vocab_size_ = 0;
  double alpha_ = 0.1;
};

// Deterministic noisy-channel scorer: candidates are the input plus every
// single application of a (from -> to) rewrite at word boundaries, costed
// by -log(LM probability x channel_penalty per edit). The identity is
// always present in the returned list.
class ReferenceScorer : public Scorer {
 public:
  ReferenceScorer(std::vector<std::pair<std::string, std::string>> rewrites,
                  BigramLm lm, double channel_penalty = 0.5);
  std::vector<Hypothesis> nbest(const std::string& input, size_t beam) override;

 private:
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
      rewrites_;
  BigramLm lm_;
  double edit_cost_;
};

// Remote scorer: POST {"input", "beam"} -> {"nbest": [{"text", "cost"}]}.
class HttpScorer : public Scorer {
 public:
  explicit HttpScorer(const std::string& endpoint);
  std::vector<Hypothesis> nbest(const std::string& input, size_t beam) override;

 private:
  std::string host_;
  int port_;
  std::string path_;
};

}  // namespace gecgen
