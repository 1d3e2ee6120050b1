#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gecgen/common.h"
#include "gecgen/decode.h"
#include "gecgen/example.h"
#include "gecgen/pipeline.h"
#include "gecgen/subword.h"

using namespace gecgen;
namespace fs = std::filesystem;

namespace {
const std::string kDataDir = GECGEN_TEST_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("gecgen_test_" + std::to_string(++counter) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

PipelineConfig fixture_config() {
  PipelineConfig config;
  config.global_seed = 5;
  config.p_cut = 0.3;
  config.identity_keep_prob = 1.0;
  return config;
}
}  // namespace

TEST_CASE("config json round-trips and hashes stably") {
  PipelineConfig config;
  config.global_seed = 99;
  config.p_cut = 0.05;
  config.rtt.bridge_lang = "ja";
  config.decode.threshold = 1.5;

  const PipelineConfig back = PipelineConfig::from_json(config.to_json());
  CHECK(back.to_json() == config.to_json());
  CHECK(back.config_hash() == config.config_hash());

  PipelineConfig tweaked = config;
  tweaked.p_cut = 0.06;
  CHECK(tweaked.config_hash() != config.config_hash());
  CHECK(config.config_hash().size() == 16);
}

TEST_CASE("config parsing reads nested sections") {
  const auto j = nlohmann::json::parse(R"({
    "global_seed": 7,
    "workers": 3,
    "extract": {"p_cut": 0.1, "max_wordpieces": 64},
    "ingest": {"downsample_base": 1.35},
    "noise": {"rate": 0.004, "keep_prob": 0.02},
    "rtt": {"bridge_lang": "de", "identity_fraction": 0.05},
    "decode": {"beam": 8, "threshold": 0.9, "max_iter": 4}
  })");
  const PipelineConfig config = PipelineConfig::from_json(j);
  CHECK(config.global_seed == 7);
  CHECK(config.workers == 3);
  CHECK(config.p_cut == doctest::Approx(0.1));
  CHECK(config.max_wordpieces == 64);
  CHECK(config.downsample_base == doctest::Approx(1.35));
  CHECK(config.revision_noise.rate == doctest::Approx(0.004));
  CHECK(config.identity_keep_prob == doctest::Approx(0.02));
  CHECK(config.rtt.bridge_lang == "de");
  CHECK(config.rtt.identity_fraction == doctest::Approx(0.05));
  CHECK(config.decode.beam == 8);
  CHECK(config.decode.threshold == doctest::Approx(0.9));
  CHECK(config.decode.max_iter == 4);
}

TEST_CASE("config validation rejects out-of-range values") {
  PipelineConfig config;
  config.p_cut = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PipelineConfig{};
  config.downsample_base = 1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PipelineConfig{};
  config.identity_keep_prob = -0.1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = PipelineConfig{};
  config.decode.beam = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("extraction mines pairs from the fixture dump") {
  TempDir tmp;
  const PipelineConfig config = fixture_config();
  const std::string out = tmp.file("examples.jsonl");
  const ExtractSummary summary =
      run_extract_revisions(config, kDataDir + "/mini_dump.xml", out);

  CHECK(summary.dump.pages_seen == 3);
  CHECK(summary.dump.pages_emitted == 2);
  CHECK(summary.dump.pages_skipped_namespace == 1);
  // Coffee has 4 revisions (3 sampled pairs), Tea has 2 (1 pair).
  CHECK(summary.pairs_sampled == 4);
  CHECK(summary.examples_cut >= summary.examples);

  const auto examples = read_examples_jsonl_file(out);
  CHECK(examples.size() == summary.examples);
  REQUIRE_FALSE(examples.empty());
  std::set<uint64_t> pages;
  for (const auto& ex : examples) {
    pages.insert(ex.page_id);
    CHECK(ex.provenance == Provenance::revision);
    CHECK(ex.is_identity == (ex.source == ex.target));
    CHECK(ex.older_rev > 0);
    CHECK(ex.newer_rev > ex.older_rev);
  }
  for (uint64_t page : pages) CHECK((page == 11 || page == 13));
}

TEST_CASE("extraction output is byte-identical across runs and workers") {
  TempDir tmp;
  PipelineConfig config = fixture_config();
  const std::string a = tmp.file("a.jsonl");
  const std::string b = tmp.file("b.jsonl");
  const std::string c = tmp.file("c.jsonl");
  run_extract_revisions(config, kDataDir + "/mini_dump.xml", a);
  run_extract_revisions(config, kDataDir + "/mini_dump.xml", b);
  config.workers = 4;
  run_extract_revisions(config, kDataDir + "/mini_dump.xml", c);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));

  PipelineConfig reseeded = fixture_config();
  reseeded.global_seed = 6;
  const std::string d = tmp.file("d.jsonl");
  run_extract_revisions(reseeded, kDataDir + "/mini_dump.xml", d);
  CHECK(slurp(a) != slurp(d));
}

TEST_CASE("downsampled identity targets land in the side file") {
  TempDir tmp;
  PipelineConfig config = fixture_config();
  config.identity_keep_prob = 0;
  const std::string out = tmp.file("examples.jsonl");
  const std::string dropped = tmp.file("dropped.txt");
  const ExtractSummary summary = run_extract_revisions(
      config, kDataDir + "/mini_dump.xml", out, dropped);

  for (const auto& ex : read_examples_jsonl_file(out))
    CHECK_FALSE(ex.is_identity);

  std::ifstream in(dropped);
  REQUIRE(in);
  size_t lines = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == summary.identities_dropped);
  CHECK(summary.identity_examples == 0);
}

TEST_CASE("wordpiece caps filter examples") {
  TempDir tmp;
  PipelineConfig config = fixture_config();
  config.max_wordpieces = 2;  // whitespace fallback: at most two words a side
  const std::string out = tmp.file("examples.jsonl");
  const ExtractSummary summary =
      run_extract_revisions(config, kDataDir + "/mini_dump.xml", out);
  CHECK(summary.examples_filtered > 0);
  for (const auto& ex : read_examples_jsonl_file(out)) {
    CHECK(split_whitespace(ex.source).size() <= 2);
    CHECK(split_whitespace(ex.target).size() <= 2);
  }
}

TEST_CASE("a trained subword model plugs into the filter") {
  TempDir tmp;
  const SubwordModel model = SubwordModel::train(
      {"coffee is a brewed drink prepared from roasted beans",
       "tea is an aromatic beverage"},
      64);
  const std::string model_path = tmp.file("subword.model");
  model.save_file(model_path);

  PipelineConfig config = fixture_config();
  config.subword_model_path = model_path;
  const std::string out = tmp.file("examples.jsonl");
  const ExtractSummary summary =
      run_extract_revisions(config, kDataDir + "/mini_dump.xml", out);
  CHECK(summary.examples > 0);
}

TEST_CASE("an empty dump produces an empty corpus") {
  TempDir tmp;
  const std::string dump = tmp.file("empty.xml");
  {
    std::ofstream out(dump);
    out << "<mediawiki><siteinfo><sitename>x</sitename></siteinfo></mediawiki>\n";
  }
  const std::string out = tmp.file("examples.jsonl");
  const ExtractSummary summary =
      run_extract_revisions(fixture_config(), dump, out);
  CHECK(summary.examples == 0);
  CHECK(fs::exists(out));
  CHECK(read_examples_jsonl_file(out).empty());
}

TEST_CASE("atomic writes leave a partial file on failure") {
  TempDir tmp;
  const std::string target = tmp.file("out.jsonl");
  {
    AtomicWriter writer(target);
    writer.stream() << "half a record";
    // no commit: simulated crash
  }
  CHECK_FALSE(fs::exists(target));
  CHECK(fs::exists(target + ".partial"));

  {
    AtomicWriter writer(target);
    writer.stream() << "whole record\n";
    writer.commit();
  }
  CHECK(fs::exists(target));
  CHECK_FALSE(fs::exists(target + ".partial"));
  CHECK(slurp(target) == "whole record\n");
}

TEST_CASE("provider specs dispatch to the right implementation") {
  CHECK(make_provider("identity") != nullptr);
  const auto mock = make_provider("mock:" + kDataDir + "/provider_table.json");
  REQUIRE(mock != nullptr);
  CHECK(mock->translate("the cat", "en", "fr") == "le chat");
  CHECK(make_provider("http://localhost:1/x") != nullptr);
  CHECK_THROWS_AS(make_provider("carrier-pigeon"), std::invalid_argument);
  CHECK_THROWS_AS(make_provider("mock:/no/such/file.json"),
                  std::runtime_error);
}

TEST_CASE("the rtt runner wires provider, rules, and output together") {
  TempDir tmp;
  PipelineConfig config;
  config.global_seed = 21;
  config.provider_spec = "mock:" + kDataDir + "/provider_table.json";
  config.rtt.identity_fraction = 0.1;
  const std::string out = tmp.file("rtt.jsonl");
  const RttSummary summary =
      run_build_rtt(config, kDataDir + "/clean_sentences.txt", out);
  CHECK(summary.input_sentences == 20);
  CHECK(summary.pairs == 20);
  CHECK(summary.skipped == 0);
  const auto pairs = read_examples_jsonl_file(out);
  REQUIRE(pairs.size() == 20);
  for (const auto& p : pairs) {
    CHECK(p.provenance == Provenance::round_trip);
    CHECK_FALSE(p.target.empty());
  }
  // The drifting phrases must have produced at least one non-identity.
  CHECK(summary.identity_examples < summary.pairs);
}

TEST_CASE("threshold tuning prefers the smallest winning settings") {
  const std::vector<std::string> lm{"the cat sat on the mat", "the cat slept",
                                    "the dog chased the cat"};
  ReferenceScorer scorer({{"teh", "the"}}, BigramLm::from_corpus(lm));
  std::vector<ExamplePair> dev;
  ExamplePair ex;
  ex.source = "teh cat";
  ex.target = "the cat";
  dev.push_back(ex);
  ex.source = ex.target = "the dog";
  ex.is_identity = true;
  dev.push_back(ex);

  const TuneResult low_vs_high = tune_threshold(
      dev, scorer, 4, {1e-6, 1.0}, {1}, TuneMetric::f_half);
  CHECK(low_vs_high.best_threshold == doctest::Approx(1.0));
  CHECK(low_vs_high.best_score == doctest::Approx(1.0));
  REQUIRE(low_vs_high.table.size() == 2);
  CHECK(low_vs_high.table[0].score < low_vs_high.table[1].score);

  // Both thresholds rewrite; the tie must resolve downward.
  const TuneResult tied = tune_threshold(dev, scorer, 4, {2.0, 1.0}, {2, 1},
                                         TuneMetric::f_half);
  CHECK(tied.best_threshold == doctest::Approx(1.0));
  CHECK(tied.best_iterations == 1);
  CHECK(tied.table.size() == 4);

  const TuneResult gleu_tuned = tune_threshold(dev, scorer, 4, {1e-6, 1.0},
                                               {1}, TuneMetric::gleu);
  CHECK(gleu_tuned.best_threshold == doctest::Approx(1.0));

  CHECK_THROWS_AS(
      tune_threshold(dev, scorer, 4, {}, {1}, TuneMetric::f_half),
      std::invalid_argument);
}

TEST_CASE("identity share sampling keeps as much data as possible") {
  std::vector<ExamplePair> pairs;
  for (int i = 0; i < 100; ++i) {
    ExamplePair p;
    p.source = "s" + std::to_string(i);
    p.target = i < 10 ? p.source : p.source + " changed";
    p.is_identity = i < 10;
    pairs.push_back(p);
  }

  // 10 identities, 90 modified. Target 50%: keep all 10 + 10 modified.
  const auto half = sample_identity_share(pairs, 0.5, 3);
  CHECK(half.size() == 20);
  size_t identities = 0;
  for (const auto& p : half) identities += p.is_identity;
  CHECK(identities == 10);

  // Target 5%: keep all 90 modified + 4 identities (floor of 4.74).
  const auto small = sample_identity_share(pairs, 0.05, 3);
  CHECK(small.size() == 94);
  identities = 0;
  for (const auto& p : small) identities += p.is_identity;
  CHECK(identities == 4);

  // Extremes drop one class entirely.
  const auto none = sample_identity_share(pairs, 0.0, 3);
  CHECK(none.size() == 90);
  const auto all = sample_identity_share(pairs, 1.0, 3);
  CHECK(all.size() == 10);

  // Deterministic, and input order is preserved.
  CHECK(sample_identity_share(pairs, 0.05, 3) == small);
  size_t cursor = 0;
  for (const auto& p : small) {
    while (cursor < pairs.size() && !(pairs[cursor] == p)) ++cursor;
    REQUIRE(cursor < pairs.size());
    ++cursor;
  }
}

TEST_CASE("corpus statistics count what they see") {
  TempDir tmp;
  const std::string path = tmp.file("corpus.jsonl");
  {
    std::ofstream out(path);
    ExamplePair a;
    a.source = "one two";
    a.target = "one two three";
    out << example_to_json_line(a) << "\n";
    ExamplePair b;
    b.source = b.target = "same text";
    b.is_identity = true;
    out << example_to_json_line(b) << "\n";
    out << "this is not json\n";
  }
  const CorpusStats stats = corpus_stats(path);
  CHECK(stats.sentences == 2);
  CHECK(stats.malformed_lines == 1);
  CHECK(stats.source_words == 4);
  CHECK(stats.target_words == 5);
  CHECK(stats.identity_examples == 1);
}
