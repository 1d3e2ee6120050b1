#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "gecgen/common.h"

using namespace gecgen;

TEST_CASE("splitmix64 streams are deterministic and seed-sensitive") {
  SplitMix64 a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t va = a.next();
    all_equal = all_equal && va == b.next();
    any_diff = any_diff || va != c.next();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("next_unit stays in [0,1) and is roughly uniform") {
  SplitMix64 rng(7);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("next_below covers the range without exceeding it") {
  SplitMix64 rng(11);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t v = rng.next_below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("mix_seed is order-sensitive and component-sensitive") {
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 2, 4));
  CHECK(mix_seed(1, 2, 3, 4) != mix_seed(1, 2, 3, 5));
  CHECK(mix_seed(1, 2, 3, 4, 5) != mix_seed(1, 2, 3, 4, 6));
  CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}

TEST_CASE("fnv1a64 matches known vectors") {
  // Published FNV-1a test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("split_whitespace handles runs, tabs, and edges") {
  CHECK(split_whitespace("a b c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_whitespace("  a\t\tb \n c  ") ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(split_whitespace("").empty());
  CHECK(split_whitespace("   ").empty());
  CHECK(split_whitespace("one") == std::vector<std::string>{"one"});
}

TEST_CASE("join_tokens is the inverse of split on normalized text") {
  const std::vector<std::string> tokens{"to", "be", "or", "not"};
  CHECK(join_tokens(tokens) == "to be or not");
  CHECK(split_whitespace(join_tokens(tokens)) == tokens);
  CHECK(join_tokens({}) == "");
}

TEST_CASE("is_all_whitespace") {
  CHECK(is_all_whitespace(""));
  CHECK(is_all_whitespace(" \t\r\n"));
  CHECK_FALSE(is_all_whitespace(" x "));
}

TEST_CASE("utf8 decode/encode round-trips valid text") {
  for (const std::string s :
       {std::string("plain ascii"), std::string("caf\xc3\xa9"),
        std::string("\xe6\x97\xa5\xe6\x9c\xac\xe8\xaa\x9e"),
        std::string("\xf0\x9d\x84\x9e clef"), std::string("")}) {
    CHECK(utf8_encode(utf8_decode(s)) == s);
  }
}

TEST_CASE("utf8 decode yields one code point per character") {
  const auto cps = utf8_decode("a\xc3\xa9\xe6\x97\xa5");
  REQUIRE(cps.size() == 3);
  CHECK(cps[0] == 0x61);
  CHECK(cps[1] == 0xe9);
  CHECK(cps[2] == 0x65e5);
}

TEST_CASE("utf8 round-trips arbitrary invalid bytes") {
  for (const std::string s :
       {std::string("\xff\xfe"), std::string("\x80"),
        std::string("\xe2\x82"),          // truncated sequence
        std::string("\xc0\xaf"),          // overlong encoding
        std::string("ok\xffthen"),        // stray byte mid-text
        std::string("\xed\xa0\x80")}) {   // encoded surrogate
    CHECK(utf8_encode(utf8_decode(s)) == s);
  }
  // Deterministic byte fuzz.
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    const size_t len = rng.next_below(20);
    for (size_t i = 0; i < len; ++i)
      s.push_back(static_cast<char>(rng.next_below(256)));
    CHECK(utf8_encode(utf8_decode(s)) == s);
  }
}

TEST_CASE("levenshtein known distances") {
  const auto chars = [](const std::string& s) {
    return std::vector<char>(s.begin(), s.end());
  };
  CHECK(levenshtein(chars("kitten"), chars("sitting")) == 3);
  CHECK(levenshtein(chars("abc"), chars("abc")) == 0);
  CHECK(levenshtein(chars(""), chars("abc")) == 3);
  CHECK(levenshtein(chars("abc"), chars("")) == 3);
  CHECK(levenshtein(chars("flaw"), chars("lawn")) == 2);
  CHECK(levenshtein(std::vector<std::string>{"a", "b"},
                    std::vector<std::string>{"a", "c", "b"}) == 1);
}
