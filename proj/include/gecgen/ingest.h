#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gecgen {

struct Revision {
  uint64_t id = 0;
  std::string timestamp;
  std::string text;
};

struct Page {
  uint64_t id = 0;
  int ns = 0;
  std::string title;
  std::vector<Revision> revisions;
};

struct DumpError : std::runtime_error {
  DumpError(const std::string& what, int64_t byte_offset)
      : std::runtime_error(what), byte_offset(byte_offset) {}
  int64_t byte_offset;  // position in the input stream where parsing failed
};

struct DumpStats {
  uint64_t pages_seen = 0;
  uint64_t pages_emitted = 0;
  uint64_t pages_skipped_namespace = 0;
  uint64_t pages_skipped_size = 0;  // cumulative revision text over cutoff
  uint64_t revisions_seen = 0;
};

struct DumpOptions {
  // Pages whose cumulative revision text exceeds this are dropped whole.
  uint64_t max_page_text_bytes = 64ull * 1024 * 1024;
  // Only main-namespace (ns 0) pages are emitted when true.
  bool main_namespace_only = true;
};

// Streams <page> elements out of a MediaWiki pages-meta-history XML dump.
// The callback owns each page; memory stays bounded by the largest page.
// Returning false from the callback stops the stream early.
DumpStats stream_pages(std::istream& in, const DumpOptions& options,
                       const std::function<bool(Page&&)>& on_page);

DumpStats stream_pages_file(const std::string& path, const DumpOptions& options,
                            const std::function<bool(Page&&)>& on_page);

// floor(log_base(n)) clamped to [0, n-1]; 0 when n < 2.
uint64_t sampled_pair_count(uint64_t revision_count, double base);

struct RevisionPair {
  size_t older_index;
  size_t newer_index;  // always older_index + 1: pairs are adjacent
};

// Samples adjacent (older, newer) index pairs without replacement.
// Deterministic in (seed, n, base); result sorted by older_index.
std::vector<RevisionPair> sample_revision_pairs(size_t revision_count,
                                                double base, uint64_t seed);

}  // namespace gecgen
