#include "gecgen/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gecgen/align.h"
#include "gecgen/common.h"
#include "gecgen/metrics.h"
#include "gecgen/subword.h"
#include "gecgen/wikitext.h"

namespace gecgen {

namespace {

constexpr uint64_t kSaltPairs = 0x70616972;
constexpr uint64_t kSaltCut = 0x63757473;
constexpr uint64_t kSaltSpell = 0x7370656c;
constexpr uint64_t kSaltKeep = 0x6b656570;
constexpr uint64_t kSaltSample = 0x73616d70;

void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> cursor{0};
  std::vector<std::thread> pool;
  const size_t n_threads = std::min(workers, n);
  pool.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  const auto get = [&](const nlohmann::json& obj, const char* key, auto& out) {
    if (obj.contains(key)) obj.at(key).get_to(out);
  };
  get(j, "global_seed", c.global_seed);
  get(j, "workers", c.workers);
  if (j.contains("ingest")) {
    const auto& i = j.at("ingest");
    get(i, "max_page_bytes", c.ingest.max_page_text_bytes);
    get(i, "main_namespace_only", c.ingest.main_namespace_only);
    get(i, "downsample_base", c.downsample_base);
  }
  if (j.contains("extract")) {
    const auto& e = j.at("extract");
    get(e, "p_cut", c.p_cut);
    get(e, "max_wordpieces", c.max_wordpieces);
    get(e, "max_edit_distance", c.max_edit_distance);
    get(e, "subword_model", c.subword_model_path);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    get(n, "rate", c.revision_noise.rate);
    get(n, "keep_prob", c.identity_keep_prob);
  }
  if (j.contains("rtt")) {
    const auto& r = j.at("rtt");
    get(r, "bridge_lang", c.rtt.bridge_lang);
    get(r, "identity_fraction", c.rtt.identity_fraction);
    get(r, "rate", c.rtt.spell_noise.rate);
    get(r, "provider", c.provider_spec);
    get(r, "edit_rules", c.edit_rules_path);
  }
  if (j.contains("decode")) {
    const auto& d = j.at("decode");
    get(d, "beam", c.decode.beam);
    get(d, "threshold", c.decode.threshold);
    get(d, "max_iter", c.decode.max_iter);
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["global_seed"] = global_seed;
  j["workers"] = workers;
  j["ingest"] = {{"max_page_bytes", ingest.max_page_text_bytes},
                 {"main_namespace_only", ingest.main_namespace_only},
                 {"downsample_base", downsample_base}};
  j["extract"] = {{"p_cut", p_cut},
                  {"max_wordpieces", max_wordpieces},
                  {"max_edit_distance", max_edit_distance},
                  {"subword_model", subword_model_path}};
  j["noise"] = {{"rate", revision_noise.rate},
                {"keep_prob", identity_keep_prob}};
  j["rtt"] = {{"bridge_lang", rtt.bridge_lang},
              {"identity_fraction", rtt.identity_fraction},
              {"rate", rtt.spell_noise.rate},
              {"provider", provider_spec},
              {"edit_rules", edit_rules_path}};
  j["decode"] = {{"beam", decode.beam},
                 {"threshold", decode.threshold},
                 {"max_iter", decode.max_iter}};
  return j;
}

std::string PipelineConfig::config_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

void PipelineConfig::validate() const {
  const auto check_prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  };
  check_prob(p_cut, "extract.p_cut");
  check_prob(revision_noise.rate, "noise.rate");
  check_prob(identity_keep_prob, "noise.keep_prob");
  check_prob(rtt.identity_fraction, "rtt.identity_fraction");
  check_prob(rtt.spell_noise.rate, "rtt.rate");
  if (downsample_base <= 1.0)
    throw std::invalid_argument("ingest.downsample_base must exceed 1");
  if (decode.beam < 1) throw std::invalid_argument("decode.beam must be >= 1");
  if (decode.max_iter < 1)
    throw std::invalid_argument("decode.max_iter must be >= 1");
}

nlohmann::json ExtractSummary::to_json(const PipelineConfig& config) const {
  nlohmann::json j;
  j["command"] = "extract-revisions";
  j["pages_seen"] = dump.pages_seen;
  j["pages_used"] = dump.pages_emitted;
  j["pages_skipped_namespace"] = dump.pages_skipped_namespace;
  j["pages_skipped_size"] = dump.pages_skipped_size;
  j["revisions"] = dump.revisions_seen;
  j["pairs_sampled"] = pairs_sampled;
  j["examples_cut"] = examples_cut;
  j["examples_filtered"] = examples_filtered;
  j["identities_dropped"] = identities_dropped;
  j["sentences"] = examples;
  j["identity_examples"] = identity_examples;
  j["identity_fraction"] =
      examples ? static_cast<double>(identity_examples) / examples : 0.0;
  j["source_words"] = source_words;
  j["target_words"] = target_words;
  j["config_hash"] = config.config_hash();
  return j;
}

namespace {

struct PageOutput {
  std::vector<ExamplePair> kept;
  std::vector<std::string> dropped_identities;
  uint64_t pairs_sampled = 0;
  uint64_t examples_cut = 0;
  uint64_t examples_filtered = 0;
};

PageOutput process_page(const Page& page, const PipelineConfig& config,
                        const SubwordModel* model) {
  PageOutput out;
  const auto pairs =
      sample_revision_pairs(page.revisions.size(), config.downsample_base,
                            mix_seed(config.global_seed, page.id, kSaltPairs));
  out.pairs_sampled = pairs.size();
  for (const auto& pr : pairs) {
    const Revision& older = page.revisions[pr.older_index];
    const Revision& newer = page.revisions[pr.newer_index];
    const auto old_tokens = split_whitespace(extract_text(older.text));
    const auto new_tokens = split_whitespace(extract_text(newer.text));
    const auto spans = align(old_tokens, new_tokens);
    auto examples = cut_examples(
        spans, old_tokens, new_tokens, config.p_cut,
        mix_seed(config.global_seed, page.id, older.id, newer.id, kSaltCut));
    out.examples_cut += examples.size();

    SplitMix64 keep_rng(
        mix_seed(config.global_seed, page.id, older.id, newer.id, kSaltKeep));
    for (size_t e = 0; e < examples.size(); ++e) {
      ExamplePair& ex = examples[e];
      ex.source = corrupt_spelling(
          ex.source, config.revision_noise,
          mix_seed(config.global_seed, page.id, older.id,
                   mix_seed(newer.id, e, kSaltSpell)));
      ex.is_identity = ex.source == ex.target;
      if (!filter_example(ex, config.max_wordpieces, config.max_edit_distance,
                          model)) {
        ++out.examples_filtered;
        continue;
      }
      ex.page_id = page.id;
      ex.older_rev = older.id;
      ex.newer_rev = newer.id;
      ex.provenance = Provenance::revision;
      if (ex.is_identity &&
          !(keep_rng.next_unit() < config.identity_keep_prob)) {
        out.dropped_identities.push_back(ex.target);
        continue;
      }
      out.kept.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace

AtomicWriter::AtomicWriter(const std::string& path)
    : path_(path), partial_path_(path + ".partial") {
  auto* out = new std::ofstream(partial_path_, std::ios::binary);
  if (!*out) {
    delete out;
    throw std::runtime_error("cannot write output: " + partial_path_);
  }
  out_ = out;
}

AtomicWriter::~AtomicWriter() {
  auto* out = static_cast<std::ofstream*>(out_);
  delete out;  // leaves the .partial marker behind when not committed
}

std::ostream& AtomicWriter::stream() {
  return *static_cast<std::ofstream*>(out_);
}

void AtomicWriter::commit() {
  auto* out = static_cast<std::ofstream*>(out_);
  out->flush();
  if (!*out) throw std::runtime_error("write failed: " + partial_path_);
  out->close();
  std::filesystem::rename(partial_path_, path_);
  committed_ = true;
}

ExtractSummary run_extract_revisions(const PipelineConfig& config,
                                     const std::string& dump_path,
                                     const std::string& output_path,
                                     const std::string& dropped_identities_path) {
  std::unique_ptr<SubwordModel> model;
  if (!config.subword_model_path.empty())
    model = std::make_unique<SubwordModel>(
        SubwordModel::load_file(config.subword_model_path));

  ExtractSummary summary;
  AtomicWriter writer(output_path);
  std::unique_ptr<AtomicWriter> dropped_writer;
  if (!dropped_identities_path.empty())
    dropped_writer = std::make_unique<AtomicWriter>(dropped_identities_path);

  // Pages are processed in batches: parallel within a batch, results
  // written in input order, so output is independent of worker count.
  std::vector<Page> batch;
  const size_t batch_size = std::max<size_t>(config.workers * 8, 16);

  const auto flush_batch = [&]() {
    if (batch.empty()) return;
    std::vector<PageOutput> results(batch.size());
    parallel_for(batch.size(), config.workers, [&](size_t i) {
      results[i] = process_page(batch[i], config, model.get());
    });
    for (const auto& r : results) {
      summary.pairs_sampled += r.pairs_sampled;
      summary.examples_cut += r.examples_cut;
      summary.examples_filtered += r.examples_filtered;
      summary.identities_dropped += r.dropped_identities.size();
      for (const auto& ex : r.kept) {
        writer.stream() << example_to_json_line(ex) << '\n';
        ++summary.examples;
        summary.identity_examples += ex.is_identity;
        summary.source_words += split_whitespace(ex.source).size();
        summary.target_words += split_whitespace(ex.target).size();
      }
      if (dropped_writer)
        for (const auto& line : r.dropped_identities)
          dropped_writer->stream() << line << '\n';
    }
    batch.clear();
  };

  summary.dump = stream_pages_file(dump_path, config.ingest, [&](Page&& page) {
    batch.push_back(std::move(page));
    if (batch.size() >= batch_size) flush_batch();
    return true;
  });
  flush_batch();

  writer.commit();
  if (dropped_writer) dropped_writer->commit();
  return summary;
}

nlohmann::json RttSummary::to_json(const PipelineConfig& config) const {
  nlohmann::json j;
  j["command"] = "build-rtt";
  j["input_sentences"] = input_sentences;
  j["pairs"] = pairs;
  j["skipped"] = skipped;
  j["identity_examples"] = identity_examples;
  j["identity_fraction"] =
      pairs ? static_cast<double>(identity_examples) / pairs : 0.0;
  j["config_hash"] = config.config_hash();
  return j;
}

std::unique_ptr<TranslationProvider> make_provider(const std::string& spec) {
  if (spec == "identity") return std::make_unique<IdentityProvider>();
  if (spec.rfind("mock:", 0) == 0)
    return std::make_unique<MockProvider>(
        MockProvider::from_json_file(spec.substr(5)));
  if (spec.rfind("http://", 0) == 0) {
    const char* token = std::getenv("GECGEN_PROVIDER_TOKEN");
    return std::make_unique<HttpProvider>(spec, token ? token : "");
  }
  throw std::invalid_argument("unknown provider spec: " + spec);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

RttSummary run_build_rtt(const PipelineConfig& config,
                         const std::string& sentences_path,
                         const std::string& output_path) {
  const auto sentences = read_lines(sentences_path);
  auto provider = make_provider(config.provider_spec);

  RttConfig rtt_config = config.rtt;
  if (!config.edit_rules_path.empty())
    rtt_config.edit_rules = read_edit_rules_jsonl_file(config.edit_rules_path);

  const RttResult result = build_rtt_corpus(
      sentences, rtt_config, *provider, config.global_seed, config.workers);

  RttSummary summary;
  summary.input_sentences = sentences.size();
  summary.pairs = result.pairs.size();
  summary.skipped = result.skipped;
  for (const auto& p : result.pairs) summary.identity_examples += p.is_identity;

  AtomicWriter writer(output_path);
  write_examples_jsonl(writer.stream(), result.pairs);
  writer.commit();
  return summary;
}

TuneResult tune_threshold(const std::vector<ExamplePair>& dev_corpus,
                          Scorer& scorer, size_t beam,
                          const std::vector<double>& thresholds,
                          const std::vector<size_t>& iteration_grid,
                          TuneMetric metric) {
  if (thresholds.empty() || iteration_grid.empty())
    throw std::invalid_argument("tune grids must be non-empty");
  std::vector<double> ths = thresholds;
  std::vector<size_t> its = iteration_grid;
  std::sort(ths.begin(), ths.end());
  std::sort(its.begin(), its.end());

  std::vector<std::vector<std::string>> sources, targets;
  sources.reserve(dev_corpus.size());
  for (const auto& ex : dev_corpus) {
    sources.push_back(split_whitespace(ex.source));
    targets.push_back(split_whitespace(ex.target));
  }

  TuneResult result;
  bool first = true;
  for (const double th : ths) {
    for (const size_t it : its) {
      DecodeConfig cfg;
      cfg.beam = beam;
      cfg.threshold = th;
      cfg.max_iter = it;

      std::vector<std::vector<std::string>> outputs;
      outputs.reserve(dev_corpus.size());
      for (const auto& ex : dev_corpus)
        outputs.push_back(
            split_whitespace(iterative_decode(ex.source, scorer, cfg).output));

      double score = 0;
      if (metric == TuneMetric::f_half) {
        std::vector<std::vector<Edit>> system;
        std::vector<std::vector<std::vector<Edit>>> gold;
        for (size_t s = 0; s < dev_corpus.size(); ++s) {
          system.push_back(extract_edits(sources[s], outputs[s]));
          gold.push_back({extract_edits(sources[s], targets[s])});
        }
        score = score_edits(system, gold, 0.5).f_beta;
      } else {
        score = corpus_gleu(sources, outputs, {targets});
      }
      result.table.push_back({th, it, score});
      if (first || score > result.best_score) {
        result.best_score = score;
        result.best_threshold = th;
        result.best_iterations = it;
        first = false;
      }
    }
  }
  return result;
}

std::vector<ExamplePair> sample_identity_share(
    const std::vector<ExamplePair>& pairs, double identity_share,
    uint64_t seed) {
  std::vector<size_t> identity_idx, modified_idx;
  for (size_t i = 0; i < pairs.size(); ++i)
    (pairs[i].is_identity ? identity_idx : modified_idx).push_back(i);

  // Keep the whole limiting class; subsample the other to hit the share.
  size_t keep_identity = identity_idx.size();
  size_t keep_modified = modified_idx.size();
  if (identity_share <= 0.0) {
    keep_identity = 0;
  } else if (identity_share >= 1.0) {
    keep_modified = 0;
  } else {
    const double want_identity_per_modified =
        identity_share / (1.0 - identity_share);
    const auto identity_budget = static_cast<size_t>(
        static_cast<double>(modified_idx.size()) * want_identity_per_modified);
    if (identity_budget <= identity_idx.size()) {
      keep_identity = identity_budget;
    } else {
      keep_modified = static_cast<size_t>(
          static_cast<double>(identity_idx.size()) /
          want_identity_per_modified);
    }
  }

  const auto sample = [&](std::vector<size_t>& idx, size_t want,
                          uint64_t salt) {
    if (want >= idx.size()) return;
    SplitMix64 rng(mix_seed(seed, salt, kSaltSample));
    for (size_t i = 0; i < want; ++i) {
      const size_t j = i + static_cast<size_t>(rng.next_below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(want);
  };
  sample(identity_idx, keep_identity, 1);
  sample(modified_idx, keep_modified, 2);

  std::vector<size_t> all;
  all.reserve(identity_idx.size() + modified_idx.size());
  all.insert(all.end(), identity_idx.begin(), identity_idx.end());
  all.insert(all.end(), modified_idx.begin(), modified_idx.end());
  std::sort(all.begin(), all.end());
  std::vector<ExamplePair> out;
  out.reserve(all.size());
  for (size_t i : all) out.push_back(pairs[i]);
  return out;
}

nlohmann::json CorpusStats::to_json() const {
  nlohmann::json j;
  j["command"] = "stats";
  j["sentences"] = sentences;
  j["malformed_lines"] = malformed_lines;
  j["source_words"] = source_words;
  j["target_words"] = target_words;
  j["identity_examples"] = identity_examples;
  j["identity_fraction"] =
      sentences ? static_cast<double>(identity_examples) / sentences : 0.0;
  return j;
}

CorpusStats corpus_stats(const std::string& corpus_path) {
  std::ifstream in(corpus_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + corpus_path);
  CorpusStats stats;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const ExamplePair ex = example_from_json_line(line);
      ++stats.sentences;
      stats.source_words += split_whitespace(ex.source).size();
      stats.target_words += split_whitespace(ex.target).size();
      stats.identity_examples += ex.is_identity;
    } catch (const std::exception&) {
      ++stats.malformed_lines;
    }
  }
  return stats;
}

}  // namespace gecgen
