#include "gecgen/noise.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "gecgen/align.h"
#include "gecgen/common.h"

namespace gecgen {

namespace {

std::vector<uint32_t> default_alphabet() {
  std::vector<uint32_t> a;
  for (char c = 'a'; c <= 'z'; ++c) a.push_back(static_cast<uint32_t>(c));
  a.push_back(' ');
  return a;
}

NoiseOp draw_op(SplitMix64& rng, const SpellNoiseConfig& config) {
  double total = 0;
  for (double w : config.op_weights) total += w;
  double r = rng.next_unit() * total;
  for (int op = 0; op < 4; ++op) {
    r -= config.op_weights[op];
    if (r < 0) return static_cast<NoiseOp>(op);
  }
  return NoiseOp::transposition;
}

bool phrase_allowed(const std::vector<std::string>& tokens, size_t max_words) {
  if (tokens.empty() || tokens.size() > max_words) return false;
  for (const auto& t : tokens)
    for (unsigned char c : t)
      if (std::isdigit(c) || std::isupper(c)) return false;
  return true;
}

// Occurrences of a token phrase in a token sequence, all start positions.
uint64_t count_phrase(const std::vector<std::string>& haystack,
                      const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > haystack.size()) return 0;
  uint64_t n = 0;
  for (size_t i = 0; i + phrase.size() <= haystack.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), haystack.begin() + i)) ++n;
  }
  return n;
}

}  // namespace

SpellNoiseConfig::SpellNoiseConfig() : alphabet(default_alphabet()) {}

SpellNoiseConfig SpellNoiseConfig::revision_default() {
  SpellNoiseConfig c;
  c.rate = 0.003;
  return c;
}

SpellNoiseConfig SpellNoiseConfig::round_trip_default() {
  SpellNoiseConfig c;
  c.rate = 0.005;
  c.op_weights[static_cast<int>(NoiseOp::deletion)] = 1.0 / 3;
  c.op_weights[static_cast<int>(NoiseOp::insertion)] = 1.0 / 3;
  c.op_weights[static_cast<int>(NoiseOp::replacement)] = 0.0;
  c.op_weights[static_cast<int>(NoiseOp::transposition)] = 1.0 / 3;
  return c;
}

std::string corrupt_spelling_counted(const std::string& text,
                                     const SpellNoiseConfig& config,
                                     uint64_t seed, size_t* triggers) {
  const std::vector<uint32_t> cps = utf8_decode(text);
  SplitMix64 rng(seed);

  // Every position draws its trigger up front, so the trigger count is
  // exactly Binomial(n, rate) regardless of which operations land.
  std::vector<char> trig(cps.size());
  size_t count = 0;
  for (size_t i = 0; i < cps.size(); ++i) {
    trig[i] = rng.next_unit() < config.rate;
    count += trig[i];
  }
  if (triggers) *triggers = count;

  std::vector<uint32_t> out;
  out.reserve(cps.size() + count);
  const auto random_char = [&]() {
    return config.alphabet.empty()
               ? U' '
               : config.alphabet[rng.next_below(config.alphabet.size())];
  };
  size_t i = 0;
  while (i < cps.size()) {
    if (!trig[i]) {
      out.push_back(cps[i]);
      ++i;
      continue;
    }
    switch (draw_op(rng, config)) {
      case NoiseOp::deletion:
        ++i;
        break;
      case NoiseOp::insertion:
        out.push_back(random_char());
        out.push_back(cps[i]);
        ++i;
        break;
      case NoiseOp::replacement:
        out.push_back(random_char());
        ++i;
        break;
      case NoiseOp::transposition:
        if (i + 1 < cps.size()) {
          out.push_back(cps[i + 1]);
          out.push_back(cps[i]);
          i += 2;
        } else {
          out.push_back(cps[i]);
          ++i;
        }
        break;
    }
  }
  return utf8_encode(out);
}

std::string corrupt_spelling(const std::string& text,
                             const SpellNoiseConfig& config, uint64_t seed) {
  return corrupt_spelling_counted(text, config, seed, nullptr);
}

std::vector<ExamplePair> downsample_identities(
    const std::vector<ExamplePair>& pairs, double keep_prob, uint64_t seed) {
  std::vector<ExamplePair> out;
  out.reserve(pairs.size());
  SplitMix64 rng(seed);
  for (const auto& p : pairs) {
    if (p.is_identity && !(rng.next_unit() < keep_prob)) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<EditRule> extract_edit_rules(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    size_t max_words, double max_char_distance_fraction) {
  std::map<std::pair<std::string, std::string>, uint64_t> joint;
  std::map<std::string, uint64_t> revised_occurrences;
  std::vector<std::vector<std::string>> revised_phrases_seen;

  for (const auto& [source, target] : pairs) {
    const auto src_tokens = split_whitespace(source);
    const auto tgt_tokens = split_whitespace(target);
    for (const auto& span : align(src_tokens, tgt_tokens)) {
      if (span.kind != SpanKind::unmatched) continue;
      std::vector<std::string> original(
          src_tokens.begin() + span.old_range.begin,
          src_tokens.begin() + span.old_range.end);
      std::vector<std::string> revised(
          tgt_tokens.begin() + span.new_range.begin,
          tgt_tokens.begin() + span.new_range.end);
      if (!phrase_allowed(original, max_words) ||
          !phrase_allowed(revised, max_words))
        continue;
      const auto orig_cps = utf8_decode(join_tokens(original));
      const auto rev_cps = utf8_decode(join_tokens(revised));
      const double limit = max_char_distance_fraction *
                           static_cast<double>(
                               std::max(orig_cps.size(), rev_cps.size()));
      if (static_cast<double>(levenshtein(orig_cps, rev_cps)) > limit)
        continue;
      ++joint[{join_tokens(original), join_tokens(revised)}];
    }
  }

  // Denominators: occurrences of each revised phrase across target texts.
  std::vector<std::vector<std::string>> target_tokens;
  target_tokens.reserve(pairs.size());
  for (const auto& [source, target] : pairs)
    target_tokens.push_back(split_whitespace(target));
  for (const auto& [key, n] : joint) {
    const auto& revised = key.second;
    if (revised_occurrences.count(revised)) continue;
    const auto phrase = split_whitespace(revised);
    uint64_t occ = 0;
    for (const auto& toks : target_tokens) occ += count_phrase(toks, phrase);
    revised_occurrences[revised] = occ;
  }

  std::vector<EditRule> rules;
  rules.reserve(joint.size());
  for (const auto& [key, n] : joint) {
    EditRule r;
    r.original = key.first;
    r.revised = key.second;
    r.count_joint = n;
    r.count_revised = std::max(revised_occurrences[r.revised], n);
    r.probability =
        static_cast<double>(r.count_joint) / static_cast<double>(r.count_revised);
    rules.push_back(std::move(r));
  }
  std::sort(rules.begin(), rules.end(), [](const EditRule& a, const EditRule& b) {
    if (a.revised != b.revised) return a.revised < b.revised;
    return a.original < b.original;
  });
  return rules;
}

std::string apply_edit_rules(const std::string& text,
                             const std::vector<EditRule>& rules,
                             uint64_t seed) {
  if (rules.empty()) return text;

  // Group rules by revised phrase; per phrase, order by probability (then
  // original) and apply as one cumulative draw.
  std::map<std::vector<std::string>, std::vector<const EditRule*>> by_phrase;
  size_t longest = 1;
  for (const auto& r : rules) {
    const auto phrase = split_whitespace(r.revised);
    if (phrase.empty()) continue;
    longest = std::max(longest, phrase.size());
    by_phrase[phrase].push_back(&r);
  }
  for (auto& [phrase, bucket] : by_phrase) {
    std::sort(bucket.begin(), bucket.end(),
              [](const EditRule* a, const EditRule* b) {
                if (a->probability != b->probability)
                  return a->probability > b->probability;
                return a->original < b->original;
              });
  }

  const auto tokens = split_whitespace(text);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  SplitMix64 rng(seed);
  size_t i = 0;
  while (i < tokens.size()) {
    const EditRule* chosen = nullptr;
    size_t matched_len = 0;
    for (size_t len = std::min(longest, tokens.size() - i); len >= 1; --len) {
      const std::vector<std::string> window(tokens.begin() + i,
                                            tokens.begin() + i + len);
      const auto it = by_phrase.find(window);
      if (it == by_phrase.end()) continue;
      // Longest matching phrase only; one draw decides among its rules.
      matched_len = len;
      double r = rng.next_unit();
      for (const EditRule* rule : it->second) {
        r -= rule->probability;
        if (r < 0) {
          chosen = rule;
          break;
        }
      }
      break;
    }
    if (chosen) {
      for (auto& w : split_whitespace(chosen->original)) out.push_back(w);
      i += matched_len;
    } else {
      out.push_back(tokens[i]);
      i += 1;
    }
  }
  return join_tokens(out);
}

using nlohmann::json;

std::string edit_rule_to_json_line(const EditRule& rule) {
  json j;
  j["original"] = rule.original;
  j["revised"] = rule.revised;
  j["count_joint"] = rule.count_joint;
  j["count_revised"] = rule.count_revised;
  j["probability"] = rule.probability;
  return j.dump();
}

EditRule edit_rule_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  EditRule r;
  r.original = j.at("original").get<std::string>();
  r.revised = j.at("revised").get<std::string>();
  r.count_joint = j.at("count_joint").get<uint64_t>();
  r.count_revised = j.at("count_revised").get<uint64_t>();
  r.probability = j.at("probability").get<double>();
  return r;
}

void write_edit_rules_jsonl(std::ostream& out,
                            const std::vector<EditRule>& rules) {
  for (const auto& r : rules) out << edit_rule_to_json_line(r) << '\n';
}

std::vector<EditRule> read_edit_rules_jsonl(std::istream& in) {
  std::vector<EditRule> rules;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rules.push_back(edit_rule_from_json_line(line));
  }
  return rules;
}

std::vector<EditRule> read_edit_rules_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open edit rules: " + path);
  return read_edit_rules_jsonl(in);
}

}  // namespace gecgen
