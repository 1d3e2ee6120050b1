#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gecgen/common.h"
#include "gecgen/noise.h"

using namespace gecgen;

namespace {
SpellNoiseConfig only_op(NoiseOp op, double rate) {
  SpellNoiseConfig config;
  config.rate = rate;
  for (double& w : config.op_weights) w = 0;
  config.op_weights[static_cast<int>(op)] = 1;
  return config;
}

bool is_subsequence(const std::vector<uint32_t>& needle,
                    const std::vector<uint32_t>& hay) {
  size_t i = 0;
  for (uint32_t cp : hay)
    if (i < needle.size() && needle[i] == cp) ++i;
  return i == needle.size();
}
}  // namespace

TEST_CASE("zero rate leaves text untouched") {
  SpellNoiseConfig config;
  config.rate = 0;
  CHECK(corrupt_spelling("nothing happens here", config, 1) ==
        "nothing happens here");
  CHECK(corrupt_spelling("", SpellNoiseConfig::revision_default(), 1) == "");
}

TEST_CASE("rate one with pure deletion erases everything") {
  CHECK(corrupt_spelling("disappear", only_op(NoiseOp::deletion, 1), 3) == "");
}

TEST_CASE("rate one with pure insertion doubles the length") {
  const std::string in = "abcdef";
  const std::string out = corrupt_spelling(in, only_op(NoiseOp::insertion, 1), 5);
  CHECK(utf8_decode(out).size() == 2 * in.size());
  CHECK(is_subsequence(utf8_decode(in), utf8_decode(out)));
}

TEST_CASE("rate one with pure replacement keeps the length") {
  SpellNoiseConfig config = only_op(NoiseOp::replacement, 1);
  const std::string out = corrupt_spelling("zzzzzz", config, 7);
  CHECK(utf8_decode(out).size() == 6);
  for (uint32_t cp : utf8_decode(out)) {
    const bool in_alphabet = (cp >= 'a' && cp <= 'z') || cp == ' ';
    CHECK(in_alphabet);
  }
}

TEST_CASE("transposition swaps adjacent pairs and no-ops at the end") {
  const SpellNoiseConfig config = only_op(NoiseOp::transposition, 1);
  CHECK(corrupt_spelling("ab", config, 1) == "ba");
  CHECK(corrupt_spelling("abc", config, 1) == "bac");
  CHECK(corrupt_spelling("abcd", config, 1) == "badc");
  CHECK(corrupt_spelling("x", config, 1) == "x");
}

TEST_CASE("length never drifts by more than the trigger count") {
  const SpellNoiseConfig config = SpellNoiseConfig::revision_default();
  const std::string text = "the quick brown fox jumps over the lazy dog";
  for (uint64_t seed = 0; seed < 300; ++seed) {
    size_t triggers = 0;
    SpellNoiseConfig heavy = config;
    heavy.rate = 0.2;
    const std::string out =
        corrupt_spelling_counted(text, heavy, seed, &triggers);
    const long drift = static_cast<long>(utf8_decode(out).size()) -
                       static_cast<long>(utf8_decode(text).size());
    CHECK(std::labs(drift) <= static_cast<long>(triggers));
  }
}

TEST_CASE("corruption operates on code points, not bytes") {
  const std::string text = "\xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e words";
  SpellNoiseConfig config = SpellNoiseConfig::round_trip_default();
  config.rate = 0.5;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const std::string out = corrupt_spelling(text, config, seed);
    CHECK(utf8_encode(utf8_decode(out)) == out);
  }
}

TEST_CASE("corruption is deterministic in the seed") {
  const SpellNoiseConfig config = SpellNoiseConfig::revision_default();
  const std::string text = "four score and seven years ago";
  SpellNoiseConfig heavy = config;
  heavy.rate = 0.3;
  CHECK(corrupt_spelling(text, heavy, 12) == corrupt_spelling(text, heavy, 12));
}

TEST_CASE("trigger counts track the binomial mean") {
  SpellNoiseConfig config = SpellNoiseConfig::revision_default();
  const std::string text(10000, 'm');
  double total = 0;
  const int runs = 200;
  for (int seed = 0; seed < runs; ++seed) {
    size_t triggers = 0;
    corrupt_spelling_counted(text, config, static_cast<uint64_t>(seed),
                             &triggers);
    total += static_cast<double>(triggers);
  }
  const double mean = total / runs;
  // Binomial(10000, 0.003): mean 30, sd of the run average 5.47/sqrt(200).
  CHECK(mean == doctest::Approx(30.0).epsilon(0.08));
}

TEST_CASE("identity downsampling keeps every non-identity") {
  std::vector<ExamplePair> pairs;
  for (int i = 0; i < 400; ++i) {
    ExamplePair p;
    p.source = "s" + std::to_string(i);
    p.target = i % 2 == 0 ? p.source : "t" + std::to_string(i);
    p.is_identity = i % 2 == 0;
    pairs.push_back(p);
  }
  const auto kept_all = downsample_identities(pairs, 1.0, 5);
  CHECK(kept_all == pairs);

  const auto no_identities = downsample_identities(pairs, 0.0, 5);
  CHECK(no_identities.size() == 200);
  for (const auto& p : no_identities) CHECK_FALSE(p.is_identity);

  // Order of survivors is input order.
  const auto some = downsample_identities(pairs, 0.5, 9);
  size_t cursor = 0;
  for (const auto& p : some) {
    while (cursor < pairs.size() && !(pairs[cursor] == p)) ++cursor;
    REQUIRE(cursor < pairs.size());
    ++cursor;
  }
  CHECK(downsample_identities(pairs, 0.5, 9) == some);
}

TEST_CASE("mined rule probability is joint count over revised count") {
  // "their"->"there" edited once; "there" appears four times in targets.
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"i went their yesterday", "i went there yesterday"},
      {"there is hope", "there is hope"},
      {"we go there", "we go there"},
      {"look over there now", "look over there now"},
  };
  const auto rules = extract_edit_rules(pairs);
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].original == "their");
  CHECK(rules[0].revised == "there");
  CHECK(rules[0].count_joint == 1);
  CHECK(rules[0].count_revised == 4);
  CHECK(rules[0].probability == doctest::Approx(0.25));
}

TEST_CASE("rules with digits, uppercase, or too many words are excluded") {
  CHECK(extract_edit_rules({{"the 1st time", "the first time"}}).empty());
  CHECK(extract_edit_rules({{"Teh cat", "The cat"}}).empty());
  // Four-word spans on either side are out.
  CHECK(extract_edit_rules(
            {{"a p q r s f", "a w f"}})
            .empty());
}

TEST_CASE("rules with distant phrases are excluded") {
  // "kat" vs "cat" passes at distance 1 of max-length 3; a full rewrite fails.
  const auto close_rules = extract_edit_rules({{"the kat sat", "the cat sat"}});
  REQUIRE(close_rules.size() == 1);
  CHECK(close_rules[0].original == "kat");
  CHECK(extract_edit_rules({{"the wolf sat", "the beagle sat"}}).empty());
}

TEST_CASE("rule invariants hold on a mixed corpus") {
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"he should of gone", "he should have gone"},
      {"she should of known", "she should have known"},
      {"they should have stayed", "they should have stayed"},
      {"i recieve mail", "i receive mail"},
      {"we recieve none", "we receive none"},
  };
  const auto rules = extract_edit_rules(pairs);
  REQUIRE_FALSE(rules.empty());
  for (const auto& r : rules) {
    CHECK(r.count_joint >= 1);
    CHECK(r.count_joint <= r.count_revised);
    CHECK(r.probability > 0);
    CHECK(r.probability <= 1);
    CHECK(r.probability ==
          doctest::Approx(static_cast<double>(r.count_joint) /
                          static_cast<double>(r.count_revised)));
  }
}

TEST_CASE("applying no rules returns the input verbatim") {
  CHECK(apply_edit_rules("weird   spacing kept?", {}, 1) ==
        "weird   spacing kept?");
}

TEST_CASE("probability-one rules always fire") {
  EditRule rule;
  rule.original = "should of";
  rule.revised = "should have";
  rule.probability = 1;
  CHECK(apply_edit_rules("i should have gone", {rule}, 99) ==
        "i should of gone");
}

TEST_CASE("longest revised phrase wins at each position") {
  EditRule word;
  word.original = "their";
  word.revised = "there";
  word.probability = 1;
  EditRule phrase;
  phrase.original = "of there";
  phrase.revised = "over there";
  phrase.probability = 1;
  CHECK(apply_edit_rules("look over there", {word, phrase}, 4) ==
        "look of there");
}

TEST_CASE("replacements are not rescanned") {
  EditRule expanding;
  expanding.original = "a a";
  expanding.revised = "a";
  expanding.probability = 1;
  CHECK(apply_edit_rules("a", {expanding}, 2) == "a a");
  CHECK(apply_edit_rules("a b a", {expanding}, 2) == "a a b a a");
}

TEST_CASE("application rate respects the mined probability") {
  EditRule rule;
  rule.original = "their";
  rule.revised = "there";
  rule.probability = 0.25;
  int fired = 0;
  const int n = 100000;
  for (int seed = 0; seed < n; ++seed) {
    if (apply_edit_rules("we went there", {rule},
                         static_cast<uint64_t>(seed)) == "we went their")
      ++fired;
  }
  // 3 sigma of Binomial(1e5, 0.25)/1e5 is about 0.0041.
  CHECK(static_cast<double>(fired) / n == doctest::Approx(0.25).epsilon(0.017));
}

TEST_CASE("several originals for one revised phrase split the draw") {
  EditRule a, b;
  a.original = "hte";
  a.revised = "the";
  a.probability = 0.5;
  b.original = "teh";
  b.revised = "the";
  b.probability = 0.5;
  int hte = 0, teh = 0, kept = 0;
  for (int seed = 0; seed < 20000; ++seed) {
    const std::string out =
        apply_edit_rules("the", {a, b}, static_cast<uint64_t>(seed));
    if (out == "hte") ++hte;
    else if (out == "teh") ++teh;
    else if (out == "the") ++kept;
  }
  CHECK(hte + teh + kept == 20000);
  CHECK(kept == 0);  // probabilities sum to one
  CHECK(static_cast<double>(hte) / 20000 ==
        doctest::Approx(0.5).epsilon(0.025));
}

TEST_CASE("edit rules serialize as json lines") {
  EditRule rule;
  rule.original = "teh";
  rule.revised = "the";
  rule.count_joint = 3;
  rule.count_revised = 12;
  rule.probability = 0.25;
  const EditRule back = edit_rule_from_json_line(edit_rule_to_json_line(rule));
  CHECK(back == rule);

  std::stringstream buf;
  write_edit_rules_jsonl(buf, {rule, rule});
  CHECK(read_edit_rules_jsonl(buf).size() == 2);
}
