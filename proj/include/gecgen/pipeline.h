#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gecgen/decode.h"
#include "gecgen/example.h"
#include "gecgen/ingest.h"
#include "gecgen/noise.h"
#include "gecgen/rtt.h"

namespace gecgen {

struct PipelineConfig {
  uint64_t global_seed = 1;
  size_t workers = 1;

  DumpOptions ingest;
  double downsample_base = 1.5;

  // extraction
  double p_cut = 0.02;
  size_t max_wordpieces = 256;
  size_t max_edit_distance = 0;  // 0: unlimited
  std::string subword_model_path;

  // noising (revision pipeline)
  SpellNoiseConfig revision_noise = SpellNoiseConfig::revision_default();
  double identity_keep_prob = 0.01;

  // round trip
  RttConfig rtt;
  std::string provider_spec = "identity";  // identity | mock:<path> | http url
  std::string edit_rules_path;

  DecodeConfig decode;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  // Hash of the fully resolved configuration, for exact reruns.
  std::string config_hash() const;
  void validate() const;  // throws std::invalid_argument
};

struct ExtractSummary {
  DumpStats dump;
  uint64_t pairs_sampled = 0;
  uint64_t examples_cut = 0;
  uint64_t examples_filtered = 0;
  uint64_t identities_dropped = 0;
  uint64_t examples = 0;
  uint64_t identity_examples = 0;
  uint64_t source_words = 0;
  uint64_t target_words = 0;
  nlohmann::json to_json(const PipelineConfig& config) const;
};

// Full revision pipeline: dump streaming, pair sampling, text extraction,
// alignment, cutting, spelling corruption, filtering, identity
// downsampling. Output is written through a .partial file that is renamed
// on success. dropped_identities_path, when nonempty, receives the target
// side of downsampled identity pairs, one sentence per line (the round-trip
// pipeline's clean-sentence input).
ExtractSummary run_extract_revisions(const PipelineConfig& config,
                                     const std::string& dump_path,
                                     const std::string& output_path,
                                     const std::string& dropped_identities_path = "");

struct RttSummary {
  uint64_t input_sentences = 0;
  uint64_t pairs = 0;
  uint64_t skipped = 0;
  uint64_t identity_examples = 0;
  nlohmann::json to_json(const PipelineConfig& config) const;
};

RttSummary run_build_rtt(const PipelineConfig& config,
                         const std::string& sentences_path,
                         const std::string& output_path);

struct TunePoint {
  double threshold = 0;
  size_t iterations = 0;
  double score = 0;
};

struct TuneResult {
  double best_threshold = 0;
  size_t best_iterations = 0;
  double best_score = 0;
  std::vector<TunePoint> table;
};

enum class TuneMetric { f_half, gleu };

// Grid search over (threshold, iterations); ties resolve to the smallest
// threshold, then the fewest iterations.
TuneResult tune_threshold(const std::vector<ExamplePair>& dev_corpus,
                          Scorer& scorer, size_t beam,
                          const std::vector<double>& thresholds,
                          const std::vector<size_t>& iteration_grid,
                          TuneMetric metric);

// Subsamples so that the identity (unmodified) share approaches the target
// fraction, keeping as much data as possible. Deterministic in seed.
std::vector<ExamplePair> sample_identity_share(
    const std::vector<ExamplePair>& pairs, double identity_share,
    uint64_t seed);

struct CorpusStats {
  uint64_t sentences = 0;
  uint64_t malformed_lines = 0;
  uint64_t source_words = 0;
  uint64_t target_words = 0;
  uint64_t identity_examples = 0;
  nlohmann::json to_json() const;
};

CorpusStats corpus_stats(const std::string& corpus_path);

// Shared plumbing: atomic line-oriented output (.partial then rename).
class AtomicWriter {
 public:
  explicit AtomicWriter(const std::string& path);
  ~AtomicWriter();
  std::ostream& stream();
  void commit();

 private:
  std::string path_;
  std::string partial_path_;
  void* out_;  // std::ofstream, kept out of the header
  bool committed_ = false;
};

std::unique_ptr<TranslationProvider> make_provider(const std::string& spec);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace gecgen
