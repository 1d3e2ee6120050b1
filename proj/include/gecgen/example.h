#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gecgen {

enum class Provenance { revision, round_trip };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct ExamplePair {
  std::string source;
  std::string target;
  uint64_t page_id = 0;
  uint64_t older_rev = 0;
  uint64_t newer_rev = 0;
  bool is_identity = false;
  Provenance provenance = Provenance::revision;

  bool operator==(const ExamplePair&) const = default;
};

// One JSON object per line, UTF-8, keys: source, target, page_id, older_rev,
// newer_rev, is_identity, provenance.
std::string example_to_json_line(const ExamplePair& pair);
ExamplePair example_from_json_line(const std::string& line);

void write_examples_jsonl(std::ostream& out,
                          const std::vector<ExamplePair>& pairs);
std::vector<ExamplePair> read_examples_jsonl(std::istream& in);
std::vector<ExamplePair> read_examples_jsonl_file(const std::string& path);

}  // namespace gecgen
