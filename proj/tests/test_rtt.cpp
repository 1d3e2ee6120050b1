#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gecgen/rtt.h"

using namespace gecgen;

namespace {
const std::string kDataDir = GECGEN_TEST_DATA;

RttConfig quiet_config() {
  RttConfig config;
  config.identity_fraction = 0;
  config.spell_noise.rate = 0;
  return config;
}
}  // namespace

TEST_CASE("identity provider round-trips to the input") {
  IdentityProvider provider;
  CHECK(round_trip("anything at all", "fr", provider) == "anything at all");
  CHECK(round_trip("", "fr", provider) == "");
}

TEST_CASE("an empty table behaves like the identity provider") {
  MockProvider provider({});
  CHECK(round_trip("out of table text", "fr", provider) == "out of table text");
}

TEST_CASE("the mock table introduces bridge-specific drift") {
  MockProvider provider =
      MockProvider::from_json_file(kDataDir + "/provider_table.json");
  CHECK(round_trip("the cat sat on the mat", "fr", provider) ==
        "the cat sat upon the mat");
  CHECK(round_trip("she made a final appearance", "fr", provider) ==
        "she made one last appearance");
  CHECK(round_trip("the colour of the sky", "de", provider) ==
        "the color of the sky");
  // Unlisted direction and unlisted words pass through.
  CHECK(round_trip("the cat sat on the mat", "ja", provider) ==
        "the cat sat on the mat");
  CHECK(round_trip("nothing matches here", "fr", provider) ==
        "nothing matches here");
}

TEST_CASE("longer table phrases win over their prefixes") {
  MockProvider provider({{"en->fr", {{"the colour", "LONG"}, {"the", "SHORT"}}},
                         {"fr->en", {}}});
  CHECK(provider.translate("the colour here", "en", "fr") == "LONG here");
  CHECK(provider.translate("the word", "en", "fr") == "SHORT word");
}

TEST_CASE("identity fraction one yields only identity pairs") {
  MockProvider provider =
      MockProvider::from_json_file(kDataDir + "/provider_table.json");
  RttConfig config;
  config.identity_fraction = 1;
  const std::vector<std::string> sentences{"the cat sat on the mat",
                                           "she made a final appearance"};
  const RttResult result = build_rtt_corpus(sentences, config, provider, 7);
  REQUIRE(result.pairs.size() == 2);
  for (size_t i = 0; i < sentences.size(); ++i) {
    CHECK(result.pairs[i].source == sentences[i]);
    CHECK(result.pairs[i].target == sentences[i]);
    CHECK(result.pairs[i].is_identity);
    CHECK(result.pairs[i].provenance == Provenance::round_trip);
  }
}

TEST_CASE("a quiet pipeline emits the round-trip as the source") {
  MockProvider provider =
      MockProvider::from_json_file(kDataDir + "/provider_table.json");
  const std::vector<std::string> sentences{"the cat sat on the mat",
                                           "nothing matches here"};
  const RttResult result =
      build_rtt_corpus(sentences, quiet_config(), provider, 3);
  REQUIRE(result.pairs.size() == 2);
  CHECK(result.pairs[0].source == "the cat sat upon the mat");
  CHECK(result.pairs[0].target == "the cat sat on the mat");
  CHECK_FALSE(result.pairs[0].is_identity);
  CHECK(result.pairs[1].source == "nothing matches here");
  CHECK(result.pairs[1].is_identity);
  CHECK(result.skipped == 0);
}

TEST_CASE("edit rules corrupt the round-tripped text") {
  IdentityProvider provider;
  RttConfig config = quiet_config();
  EditRule rule;
  rule.original = "their";
  rule.revised = "there";
  rule.probability = 1;
  config.edit_rules = {rule};
  const RttResult result =
      build_rtt_corpus({"we go there"}, config, provider, 11);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].source == "we go their");
  CHECK(result.pairs[0].target == "we go there");
  CHECK_FALSE(result.pairs[0].is_identity);
}

TEST_CASE("identity augmentation tracks the configured fraction") {
  IdentityProvider provider;
  RttConfig config = quiet_config();
  config.identity_fraction = 0.025;
  EditRule rule;  // guarantee non-identity for round-tripped records
  rule.original = "xq";
  rule.revised = "a";
  rule.probability = 1;
  config.edit_rules = {rule};
  std::vector<std::string> sentences(20000, "a b");
  const RttResult result = build_rtt_corpus(sentences, config, provider, 123);
  size_t identities = 0;
  for (const auto& p : result.pairs) identities += p.is_identity;
  // Binomial(20000, 0.025): mean 500, 3 sigma = 66.
  CHECK(identities > 500 - 66);
  CHECK(identities < 500 + 66);
}

TEST_CASE("provider failures skip records but keep going") {
  class FlakyProvider : public TranslationProvider {
   public:
    std::string translate(const std::string& text, const std::string&,
                          const std::string&) override {
      if (text.find("fail") != std::string::npos)
        throw ProviderError("refused");
      return text;
    }
  };
  FlakyProvider provider;
  const std::vector<std::string> sentences{"good one", "please fail now",
                                           "another good one"};
  const RttResult result =
      build_rtt_corpus(sentences, quiet_config(), provider, 9);
  CHECK(result.skipped == 1);
  REQUIRE(result.pairs.size() == 2);
  CHECK(result.pairs[0].target == "good one");
  CHECK(result.pairs[1].target == "another good one");
}

TEST_CASE("results are independent of worker count and stable in the seed") {
  MockProvider provider =
      MockProvider::from_json_file(kDataDir + "/provider_table.json");
  RttConfig config;
  config.identity_fraction = 0.3;
  config.spell_noise.rate = 0.05;
  EditRule rule;
  rule.original = "teh";
  rule.revised = "the";
  rule.probability = 0.5;
  config.edit_rules = {rule};

  std::vector<std::string> sentences;
  for (int i = 0; i < 50; ++i)
    sentences.push_back("the cat sat on the mat number " + std::to_string(i));

  const RttResult one = build_rtt_corpus(sentences, config, provider, 42, 1);
  const RttResult four = build_rtt_corpus(sentences, config, provider, 42, 4);
  CHECK(one.pairs == four.pairs);
  CHECK(one.skipped == four.skipped);

  const RttResult same = build_rtt_corpus(sentences, config, provider, 42, 2);
  CHECK(same.pairs == one.pairs);
  const RttResult other = build_rtt_corpus(sentences, config, provider, 43, 2);
  CHECK(other.pairs != one.pairs);
}

TEST_CASE("the http provider speaks the wire format with auth") {
  httplib::Server server;
  std::atomic<int> bad_auth{0};
  server.Post("/translate", [&](const httplib::Request& req,
                                httplib::Response& res) {
    if (req.get_header_value("Authorization") != "Bearer sekrit") {
      ++bad_auth;
      res.status = 401;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json out;
    out["text"] = body.at("text").get<std::string>() + " via " +
                  body.at("target").get<std::string>();
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serve([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string endpoint =
      "http://127.0.0.1:" + std::to_string(port) + "/translate";

  HttpProvider provider(endpoint, "sekrit");
  CHECK(provider.translate("hello", "en", "fr") == "hello via fr");
  CHECK(bad_auth.load() == 0);

  HttpProvider unauthorized(endpoint);
  CHECK_THROWS_AS(unauthorized.translate("hello", "en", "fr"), ProviderError);
  CHECK(bad_auth.load() == 1);

  server.stop();
  serve.join();
  CHECK_THROWS_AS(provider.translate("hello", "en", "fr"), ProviderError);
}
