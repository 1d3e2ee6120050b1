#include "gecgen/rtt.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gecgen/common.h"

namespace gecgen {

namespace {

// Seed-domain tags so the per-record streams for the identity draw, the
// spelling pass, and the rule pass never collide.
constexpr uint64_t kSaltIdentity = 0x69646e74;
constexpr uint64_t kSaltSpelling = 0x7370656c;
constexpr uint64_t kSaltRules = 0x72756c65;

}  // namespace

MockProvider::MockProvider(Table table) : table_(std::move(table)) {}

MockProvider MockProvider::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open provider table: " + path);
  nlohmann::json j;
  in >> j;
  Table table;
  for (const auto& [direction, mapping] : j.items()) {
    std::vector<std::pair<std::string, std::string>> phrases;
    for (const auto& [from, to] : mapping.items())
      phrases.emplace_back(from, to.get<std::string>());
    table.emplace_back(direction, std::move(phrases));
  }
  return MockProvider(std::move(table));
}

std::string MockProvider::translate(const std::string& text,
                                    const std::string& source_lang,
                                    const std::string& target_lang) {
  const std::string key = source_lang + "->" + target_lang;
  const std::vector<std::pair<std::string, std::string>>* phrases = nullptr;
  for (const auto& [direction, mapping] : table_) {
    if (direction == key) {
      phrases = &mapping;
      break;
    }
  }
  if (!phrases) return text;

  // Phrase substitution over word boundaries, longest source phrase first.
  std::map<std::vector<std::string>, const std::string*> index;
  size_t longest = 1;
  for (const auto& [from, to] : *phrases) {
    auto key_tokens = split_whitespace(from);
    if (key_tokens.empty()) continue;
    longest = std::max(longest, key_tokens.size());
    index.emplace(std::move(key_tokens), &to);
  }
  const auto tokens = split_whitespace(text);
  std::vector<std::string> out;
  size_t i = 0;
  while (i < tokens.size()) {
    bool replaced = false;
    for (size_t len = std::min(longest, tokens.size() - i); len >= 1; --len) {
      const auto it = index.find(
          std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + len));
      if (it == index.end()) continue;
      for (auto& w : split_whitespace(*it->second)) out.push_back(std::move(w));
      i += len;
      replaced = true;
      break;
    }
    if (!replaced) out.push_back(tokens[i++]);
  }
  return join_tokens(out);
}

HttpProvider::HttpProvider(const std::string& endpoint,
                           const std::string& auth_token)
    : auth_token_(auth_token) {
  std::string rest = endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  const size_t slash = rest.find('/');
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  std::string hostport = rest.substr(0, slash);
  const size_t colon = hostport.rfind(':');
  if (colon == std::string::npos) {
    host_ = hostport;
    port_ = 80;
  } else {
    host_ = hostport.substr(0, colon);
    port_ = std::atoi(hostport.c_str() + colon + 1);
  }
}

std::string HttpProvider::translate(const std::string& text,
                                    const std::string& source_lang,
                                    const std::string& target_lang) {
  httplib::Client client(host_, port_);
  httplib::Headers headers;
  if (!auth_token_.empty())
    headers.emplace("Authorization", "Bearer " + auth_token_);
  nlohmann::json req;
  req["text"] = text;
  req["source"] = source_lang;
  req["target"] = target_lang;
  const auto res =
      client.Post(path_, headers, req.dump(), "application/json");
  if (!res || res->status != 200)
    throw ProviderError("translation endpoint unreachable or returned error");
  try {
    return nlohmann::json::parse(res->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("bad translation response: ") + e.what());
  }
}

std::string round_trip(const std::string& text, const std::string& bridge_lang,
                       TranslationProvider& provider) {
  const std::string there = provider.translate(text, "en", bridge_lang);
  return provider.translate(there, bridge_lang, "en");
}

RttResult build_rtt_corpus(const std::vector<std::string>& clean_sentences,
                           const RttConfig& config,
                           TranslationProvider& provider, uint64_t seed,
                           size_t workers) {
  struct Slot {
    ExamplePair pair;
    bool emitted = false;
  };
  std::vector<Slot> slots(clean_sentences.size());
  std::atomic<uint64_t> skipped{0};

  const auto process = [&](size_t i) {
    const std::string& target = clean_sentences[i];
    SplitMix64 id_rng(mix_seed(seed, i, kSaltIdentity));
    ExamplePair pair;
    pair.target = target;
    pair.provenance = Provenance::round_trip;
    if (id_rng.next_unit() < config.identity_fraction) {
      pair.source = target;
    } else {
      std::string source;
      try {
        source = round_trip(target, config.bridge_lang, provider);
      } catch (const ProviderError&) {
        skipped.fetch_add(1, std::memory_order_relaxed);
        return;
      }
      source = corrupt_spelling(source, config.spell_noise,
                                mix_seed(seed, i, kSaltSpelling));
      source = apply_edit_rules(source, config.edit_rules,
                                mix_seed(seed, i, kSaltRules));
      pair.source = std::move(source);
    }
    pair.is_identity = pair.source == pair.target;
    slots[i].pair = std::move(pair);
    slots[i].emitted = true;
  };

  if (workers <= 1 || clean_sentences.size() < 2) {
    for (size_t i = 0; i < clean_sentences.size(); ++i) process(i);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    const size_t n_threads = std::min(workers, clean_sentences.size());
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        while (true) {
          const size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
          if (i >= clean_sentences.size()) return;
          process(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  RttResult result;
  result.skipped = skipped.load();
  result.pairs.reserve(slots.size());
  for (auto& s : slots)
    if (s.emitted) result.pairs.push_back(std::move(s.pair));
  return result;
}

}  // namespace gecgen
