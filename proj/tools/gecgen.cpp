#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gecgen/align.h"
#include "gecgen/common.h"
#include "gecgen/decode.h"
#include "gecgen/example.h"
#include "gecgen/metrics.h"
#include "gecgen/noise.h"
#include "gecgen/pipeline.h"
#include "gecgen/rtt.h"
#include "gecgen/subword.h"

namespace {

using namespace gecgen;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

struct ConfigCli {
  std::string config_path;
  // Flag overrides; negative/empty sentinel means "not set".
  double seed = -1;
  long workers = -1;
  double p_cut = -1;
  double downsample_base = -1;
  long max_wordpieces = -1;
  long max_edit_distance = -1;
  std::string subword_model;
  double noise_rate = -1;
  double keep_prob = -1;
  std::string provider;
  std::string bridge_lang;
  double identity_fraction = -1;
  double rtt_rate = -1;
  std::string edit_rules;
  long beam = -1;
  double threshold = -1;
  long max_iter = -1;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config JSON");
    cmd->add_option("--seed", seed, "global random seed");
    cmd->add_option("--workers", workers, "worker thread count");
    cmd->add_option("--p-cut", p_cut, "cut probability per eligible boundary");
    cmd->add_option("--downsample-base", downsample_base,
                    "log base for revision-pair downsampling");
    cmd->add_option("--max-wordpieces", max_wordpieces,
                    "maximum wordpieces per side");
    cmd->add_option("--max-edit-distance", max_edit_distance,
                    "maximum wordpiece edit distance (0 = unlimited)");
    cmd->add_option("--subword-model", subword_model,
                    "trained subword model path");
    cmd->add_option("--noise-rate", noise_rate,
                    "revision spelling corruption rate");
    cmd->add_option("--keep-prob", keep_prob, "identity keep probability");
    cmd->add_option("--provider", provider,
                    "identity | mock:<table.json> | http://host:port/path");
    cmd->add_option("--bridge-lang", bridge_lang, "round-trip bridge language");
    cmd->add_option("--identity-fraction", identity_fraction,
                    "identity augmentation fraction");
    cmd->add_option("--rtt-rate", rtt_rate,
                    "round-trip spelling corruption rate");
    cmd->add_option("--edit-rules", edit_rules, "edit rule JSONL path");
    cmd->add_option("--beam", beam, "beam size");
    cmd->add_option("--threshold", threshold, "cost ratio threshold");
    cmd->add_option("--max-iter", max_iter, "maximum decode iterations");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty()
                           ? PipelineConfig{}
                           : PipelineConfig::from_file(config_path);
    if (seed >= 0) c.global_seed = static_cast<uint64_t>(seed);
    if (workers >= 0) c.workers = static_cast<size_t>(workers);
    if (p_cut >= 0) c.p_cut = p_cut;
    if (downsample_base >= 0) c.downsample_base = downsample_base;
    if (max_wordpieces >= 0) c.max_wordpieces = static_cast<size_t>(max_wordpieces);
    if (max_edit_distance >= 0)
      c.max_edit_distance = static_cast<size_t>(max_edit_distance);
    if (!subword_model.empty()) c.subword_model_path = subword_model;
    if (noise_rate >= 0) c.revision_noise.rate = noise_rate;
    if (keep_prob >= 0) c.identity_keep_prob = keep_prob;
    if (!provider.empty()) c.provider_spec = provider;
    if (!bridge_lang.empty()) c.rtt.bridge_lang = bridge_lang;
    if (identity_fraction >= 0) c.rtt.identity_fraction = identity_fraction;
    if (rtt_rate >= 0) c.rtt.spell_noise.rate = rtt_rate;
    if (!edit_rules.empty()) c.edit_rules_path = edit_rules;
    if (beam >= 0) c.decode.beam = static_cast<size_t>(beam);
    if (threshold >= 0) c.decode.threshold = threshold;
    if (max_iter >= 0) c.decode.max_iter = static_cast<size_t>(max_iter);
    c.validate();
    return c;
  }
};

std::unique_ptr<Scorer> make_scorer(const std::string& spec,
                                    const std::string& rules_path,
                                    const std::string& lm_corpus_path,
                                    double channel_penalty) {
  if (spec == "reference") {
    std::vector<std::pair<std::string, std::string>> rewrites;
    if (!rules_path.empty()) {
      for (const auto& r : read_edit_rules_jsonl_file(rules_path))
        rewrites.emplace_back(r.original, r.revised);
    }
    std::vector<std::string> lm_lines;
    if (!lm_corpus_path.empty()) lm_lines = read_lines(lm_corpus_path);
    return std::make_unique<ReferenceScorer>(
        std::move(rewrites), BigramLm::from_corpus(lm_lines), channel_penalty);
  }
  if (spec.rfind("http://", 0) == 0) return std::make_unique<HttpScorer>(spec);
  throw std::invalid_argument("unknown scorer spec: " + spec);
}

int run(int argc, char** argv) {
  CLI::App app{"GEC corpus generation, decoding, and evaluation toolkit"};
  app.require_subcommand(1);

  // extract-revisions
  auto* extract = app.add_subcommand(
      "extract-revisions", "mine source-target pairs from a revision dump");
  ConfigCli extract_cfg;
  std::string dump_path, output_path, dropped_path;
  extract->add_option("--dump", dump_path, "pages-meta-history XML")
      ->required();
  extract->add_option("--output", output_path, "ExamplePair JSONL out")
      ->required();
  extract->add_option("--dropped-identities", dropped_path,
                      "write downsampled identity targets here");
  extract_cfg.add_flags(extract);

  // build-rtt
  auto* rtt_cmd = app.add_subcommand(
      "build-rtt", "synthesize parallel data via round-trip translation");
  ConfigCli rtt_cfg;
  std::string rtt_input, rtt_output;
  rtt_cmd->add_option("--input", rtt_input, "clean sentences, one per line")
      ->required();
  rtt_cmd->add_option("--output", rtt_output, "ExamplePair JSONL out")
      ->required();
  rtt_cfg.add_flags(rtt_cmd);

  // train-subword
  auto* train = app.add_subcommand("train-subword", "train the subword model");
  std::string train_input, train_output;
  long vocab_size = 32000;
  train->add_option("--input", train_input, "training text, one line per doc")
      ->required();
  train->add_option("--output", train_output, "model path")->required();
  train->add_option("--vocab-size", vocab_size, "target vocabulary size");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "iteratively decode a corpus");
  ConfigCli decode_cfg;
  std::string decode_input, decode_output, scorer_spec = "reference";
  std::string scorer_rules, lm_corpus;
  double channel_penalty = 0.5;
  decode_cmd->add_option("--input", decode_input, "JSONL with a source field")
      ->required();
  decode_cmd->add_option("--output", decode_output, "decode JSONL out")
      ->required();
  decode_cmd->add_option("--scorer", scorer_spec,
                         "reference | http://host:port/path");
  decode_cmd->add_option("--rules", scorer_rules,
                         "edit rules for the reference scorer");
  decode_cmd->add_option("--lm-corpus", lm_corpus,
                         "language model corpus for the reference scorer");
  decode_cmd->add_option("--channel-penalty", channel_penalty,
                         "per-edit channel probability");
  decode_cfg.add_flags(decode_cmd);

  // tune-threshold
  auto* tune = app.add_subcommand("tune-threshold",
                                  "grid-search decode threshold/iterations");
  ConfigCli tune_cfg;
  std::string tune_dev, tune_scorer = "reference", tune_rules, tune_lm;
  std::string tune_metric = "f0.5";
  std::vector<double> tune_thresholds{0.5, 0.75, 1.0, 1.5, 2.0};
  std::vector<size_t> tune_iterations{1, 2, 3, 5};
  double tune_channel_penalty = 0.5;
  double identity_share = -1;
  double sample_seed = 1;
  tune->add_option("--dev", tune_dev, "dev corpus JSONL")->required();
  tune->add_option("--scorer", tune_scorer, "reference | http://...");
  tune->add_option("--rules", tune_rules, "edit rules for the scorer");
  tune->add_option("--lm-corpus", tune_lm, "language model corpus");
  tune->add_option("--channel-penalty", tune_channel_penalty,
                   "per-edit channel probability");
  tune->add_option("--metric", tune_metric, "f0.5 | gleu");
  tune->add_option("--thresholds", tune_thresholds, "threshold grid")
      ->delimiter(',');
  tune->add_option("--iterations", tune_iterations, "iteration grid")
      ->delimiter(',');
  tune->add_option("--identity-share", identity_share,
                   "resample dev set to this unmodified share");
  tune->add_option("--sample-seed", sample_seed, "resampling seed");
  tune_cfg.add_flags(tune);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score system output");
  std::string eval_mode = "m2", eval_gold, eval_system, eval_source;
  std::vector<std::string> eval_references;
  double eval_beta = 0.5;
  eval->add_option("--mode", eval_mode, "m2 | gleu");
  eval->add_option("--gold", eval_gold, "gold annotations (M2 format)");
  eval->add_option("--system", eval_system, "system output, one per line");
  eval->add_option("--source", eval_source, "source sentences (gleu mode)");
  eval->add_option("--reference", eval_references,
                   "reference file(s), repeatable (gleu mode)");
  eval->add_option("--beta", eval_beta, "F-score beta");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "summarize a JSONL corpus");
  std::string stats_corpus;
  stats_cmd->add_option("--corpus", stats_corpus, "ExamplePair JSONL")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (extract->parsed()) {
    const PipelineConfig config = extract_cfg.resolve();
    const ExtractSummary summary =
        run_extract_revisions(config, dump_path, output_path, dropped_path);
    std::cout << summary.to_json(config).dump() << '\n';
    return kExitOk;
  }

  if (rtt_cmd->parsed()) {
    const PipelineConfig config = rtt_cfg.resolve();
    const RttSummary summary = run_build_rtt(config, rtt_input, rtt_output);
    std::cout << summary.to_json(config).dump() << '\n';
    return kExitOk;
  }

  if (train->parsed()) {
    if (vocab_size < 1) throw std::invalid_argument("vocab size must be >= 1");
    const auto corpus = read_lines(train_input);
    const SubwordModel model =
        SubwordModel::train(corpus, static_cast<size_t>(vocab_size));
    model.save_file(train_output);
    json j;
    j["command"] = "train-subword";
    j["vocab_size"] = model.vocab_size();
    j["base_inventory"] = model.vocab().size() - model.merges().size();
    j["merges"] = model.merges().size();
    std::cout << j.dump() << '\n';
    return kExitOk;
  }

  if (decode_cmd->parsed()) {
    const PipelineConfig config = decode_cfg.resolve();
    const auto scorer = make_scorer(scorer_spec, scorer_rules, lm_corpus,
                                    channel_penalty);
    std::ifstream in(decode_input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input: " + decode_input);
    AtomicWriter writer(decode_output);
    std::string line;
    uint64_t n = 0, changed = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::string source =
          json::parse(line).at("source").get<std::string>();
      const DecodeResult result =
          iterative_decode(source, *scorer, config.decode);
      json j;
      j["source"] = source;
      j["output"] = result.output;
      j["iterations"] = result.iterations;
      writer.stream() << j.dump() << '\n';
      ++n;
      changed += result.output != source;
    }
    writer.commit();
    json j;
    j["command"] = "decode";
    j["sentences"] = n;
    j["changed"] = changed;
    j["config_hash"] = config.config_hash();
    std::cout << j.dump() << '\n';
    return kExitOk;
  }

  if (tune->parsed()) {
    const PipelineConfig config = tune_cfg.resolve();
    auto dev = read_examples_jsonl_file(tune_dev);
    if (identity_share >= 0)
      dev = sample_identity_share(dev, identity_share,
                                  static_cast<uint64_t>(sample_seed));
    const auto scorer = make_scorer(tune_scorer, tune_rules, tune_lm,
                                    tune_channel_penalty);
    const TuneMetric metric =
        tune_metric == "gleu" ? TuneMetric::gleu : TuneMetric::f_half;
    const TuneResult result =
        tune_threshold(dev, *scorer, config.decode.beam, tune_thresholds,
                       tune_iterations, metric);
    json j;
    j["command"] = "tune-threshold";
    j["metric"] = tune_metric;
    j["dev_sentences"] = dev.size();
    j["best_threshold"] = result.best_threshold;
    j["best_iterations"] = result.best_iterations;
    j["best_score"] = result.best_score;
    json table = json::array();
    for (const auto& p : result.table)
      table.push_back({{"threshold", p.threshold},
                       {"iterations", p.iterations},
                       {"score", p.score}});
    j["table"] = table;
    std::cout << j.dump() << '\n';
    return kExitOk;
  }

  if (eval->parsed()) {
    if (eval_mode == "m2") {
      if (eval_gold.empty() || eval_system.empty())
        throw std::invalid_argument("m2 mode needs --gold and --system");
      const auto gold = read_m2_file(eval_gold);
      std::vector<std::string> system_lines;
      {
        std::ifstream in(eval_system, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + eval_system);
        std::string line;
        while (std::getline(in, line)) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          system_lines.push_back(line);
        }
        while (!system_lines.empty() && system_lines.back().empty())
          system_lines.pop_back();
      }
      if (system_lines.size() != gold.size())
        throw std::runtime_error("system/gold sentence counts differ");
      std::vector<std::vector<Edit>> system;
      std::vector<std::vector<std::vector<Edit>>> annotations;
      for (size_t s = 0; s < gold.size(); ++s) {
        system.push_back(
            extract_edits(gold[s].tokens, split_whitespace(system_lines[s])));
        annotations.push_back(gold[s].annotators);
      }
      const MetricReport report = score_edits(system, annotations, eval_beta);
      json j;
      j["command"] = "evaluate";
      j["mode"] = "m2";
      j["sentences"] = gold.size();
      j["precision"] = report.precision * 100;
      j["recall"] = report.recall * 100;
      j["f_beta"] = report.f_beta * 100;
      j["beta"] = eval_beta;
      std::cout << j.dump() << '\n';
      return kExitOk;
    }
    if (eval_mode == "gleu") {
      if (eval_source.empty() || eval_system.empty() || eval_references.empty())
        throw std::invalid_argument(
            "gleu mode needs --source, --system, and --reference");
      const auto tokenize_file = [](const std::string& path) {
        std::vector<std::vector<std::string>> out;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + path);
        std::string line;
        while (std::getline(in, line)) out.push_back(split_whitespace(line));
        while (!out.empty() && out.back().empty()) out.pop_back();
        return out;
      };
      const auto sources = tokenize_file(eval_source);
      const auto hyps = tokenize_file(eval_system);
      std::vector<std::vector<std::vector<std::string>>> reference_sets;
      for (const auto& path : eval_references)
        reference_sets.push_back(tokenize_file(path));
      const double score = corpus_gleu(sources, hyps, reference_sets);
      json j;
      j["command"] = "evaluate";
      j["mode"] = "gleu";
      j["sentences"] = sources.size();
      j["gleu"] = score;
      std::cout << j.dump() << '\n';
      return kExitOk;
    }
    throw std::invalid_argument("unknown evaluate mode: " + eval_mode);
  }

  if (stats_cmd->parsed()) {
    std::cout << corpus_stats(stats_corpus).to_json().dump() << '\n';
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << '\n';
    return kExitProvider;
  } catch (const ScorerError& e) {
    std::cerr << "scorer error: " << e.what() << '\n';
    return kExitProvider;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
