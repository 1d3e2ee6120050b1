#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gecgen/example.h"
#include "gecgen/noise.h"

namespace gecgen {

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  // Throws ProviderError on failure; must not mutate caller-visible state.
  virtual std::string translate(const std::string& text,
                                const std::string& source_lang,
                                const std::string& target_lang) = 0;
};

class IdentityProvider : public TranslationProvider {
 public:
  std::string translate(const std::string& text, const std::string&,
                        const std::string&) override {
    return text;
  }
};

// Deterministic table-driven provider for tests and offline runs. The table
// maps "src->tgt" direction keys to phrase substitutions applied longest
// match first at word boundaries; anything not in the table passes through.
class MockProvider : public TranslationProvider {
 public:
  using Table =
      std::vector<std::pair<std::string,
                            std::vector<std::pair<std::string, std::string>>>>;

  explicit MockProvider(Table table);
  static MockProvider from_json_file(const std::string& path);

  std::string translate(const std::string& text,
                        const std::string& source_lang,
                        const std::string& target_lang) override;

 private:
  Table table_;
};

// POST {"text", "source", "target"} -> {"text"}; optional bearer token.
class HttpProvider : public TranslationProvider {
 public:
  explicit HttpProvider(const std::string& endpoint,
                        const std::string& auth_token = "");
  std::string translate(const std::string& text,
                        const std::string& source_lang,
                        const std::string& target_lang) override;

 private:
  std::string host_;
  int port_;
  std::string path_;
  std::string auth_token_;
};

// translate(translate(text, en, bridge), bridge, en).
std::string round_trip(const std::string& text, const std::string& bridge_lang,
                       TranslationProvider& provider);

struct RttConfig {
  std::string bridge_lang = "fr";
  double identity_fraction = 0.025;
  SpellNoiseConfig spell_noise = SpellNoiseConfig::round_trip_default();
  std::vector<EditRule> edit_rules;
  std::string source_lang = "en";
};

struct RttResult {
  std::vector<ExamplePair> pairs;
  uint64_t skipped = 0;  // provider failures
};

// For each clean sentence: an identity pair with probability
// identity_fraction, otherwise source = edit-rule corruption of the
// spelling-corrupted round trip, target = the original sentence. Per-record
// seeds derive from (seed, record index), so results do not depend on
// worker count or arrival order.
RttResult build_rtt_corpus(const std::vector<std::string>& clean_sentences,
                           const RttConfig& config,
                           TranslationProvider& provider, uint64_t seed,
                           size_t workers = 1);

}  // namespace gecgen
