#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gecgen/example.h"

namespace gecgen {

enum class NoiseOp { deletion, insertion, replacement, transposition };

struct SpellNoiseConfig {
  double rate = 0.0;
  // Weights over {deletion, insertion, replacement, transposition}; they
  // are normalized before use.
  double op_weights[4] = {0.25, 0.25, 0.25, 0.25};
  // Code points drawn for insertion/replacement.
  std::vector<uint32_t> alphabet;

  SpellNoiseConfig();

  // Revision pipeline: rate 0.003, all four ops equally likely.
  static SpellNoiseConfig revision_default();
  // Round-trip pipeline: total rate 0.005 split over insertion, deletion,
  // and transposition; no replacement.
  static SpellNoiseConfig round_trip_default();
};

// Each character position of the input independently triggers an error with
// probability rate; a triggered position applies one operation drawn from
// op_weights. Transposition swaps with the following character (a no-op at
// the last position) and the swapped-over character's own trigger, though
// still drawn, is not applied. Deterministic in seed.
std::string corrupt_spelling(const std::string& text,
                             const SpellNoiseConfig& config, uint64_t seed);

// Same, reporting how many positions triggered (for calibration checks).
std::string corrupt_spelling_counted(const std::string& text,
                                     const SpellNoiseConfig& config,
                                     uint64_t seed, size_t* triggers);

// Identity pairs survive with probability keep_prob; everything else passes
// untouched, in order. One random draw per identity pair.
std::vector<ExamplePair> downsample_identities(
    const std::vector<ExamplePair>& pairs, double keep_prob, uint64_t seed);

struct EditRule {
  std::string original;  // what was typed
  std::string revised;   // what was meant
  uint64_t count_joint = 0;
  uint64_t count_revised = 0;
  double probability = 0.0;

  bool operator==(const EditRule&) const = default;
};

// Mines (original, revised) phrase substitutions from aligned text pairs:
// unmatched spans with 1..max_words words per side, close in character edit
// distance, and free of digits and uppercase. count_revised counts the
// revised phrase's occurrences across all target texts, so probability =
// count_joint / count_revised never exceeds 1.
std::vector<EditRule> extract_edit_rules(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    size_t max_words = 3, double max_char_distance_fraction = 0.5);

// Left-to-right scan over word boundaries; at each position the longest
// revised phrase present in the rules is considered and replaced by one of
// its originals with the mined probabilities. Replaced spans are not
// rescanned. Deterministic in seed.
std::string apply_edit_rules(const std::string& text,
                             const std::vector<EditRule>& rules,
                             uint64_t seed);

std::string edit_rule_to_json_line(const EditRule& rule);
EditRule edit_rule_from_json_line(const std::string& line);
void write_edit_rules_jsonl(std::ostream& out,
                            const std::vector<EditRule>& rules);
std::vector<EditRule> read_edit_rules_jsonl(std::istream& in);
std::vector<EditRule> read_edit_rules_jsonl_file(const std::string& path);

}  // namespace gecgen
