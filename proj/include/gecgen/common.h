#pragma once

// Shared plumbing: deterministic RNG, seed mixing, UTF-8 round-tripping,
// whitespace tokenization, small hashes.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gecgen {

// SplitMix64. Every stochastic decision in the toolkit draws from this
// generator so that outputs are bit-identical across platforms; the standard
// <random> distributions make no such guarantee.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n), n > 0.
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  uint64_t state_;
};

// Combines seed components (page ids, record indices, stream tags) into one
// well-mixed seed. Order-sensitive.
uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c);
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d);
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c, uint64_t d, uint64_t e);

// FNV-1a, used for stable config fingerprints.
uint64_t fnv1a64(std::string_view data);

std::vector<std::string> split_whitespace(std::string_view text);
std::string join_tokens(const std::vector<std::string>& tokens,
                        std::string_view sep = " ");

bool is_all_whitespace(std::string_view text);

// UTF-8 <-> code points. Invalid bytes are mapped to lone surrogates
// (0xDC80..0xDCFF) and restored verbatim on encode, so decode/encode
// round-trips arbitrary byte strings.
std::vector<uint32_t> utf8_decode(std::string_view text);
std::string utf8_encode(const std::vector<uint32_t>& code_points);
void utf8_append(std::string& out, uint32_t cp);

// Levenshtein distance between symbol sequences.
template <typename T>
size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  const size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<size_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min(sub, std::min(prev[j] + 1, cur[j - 1] + 1));
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace gecgen
