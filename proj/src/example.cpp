#include "gecgen/example.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace gecgen {

using nlohmann::json;

std::string to_string(Provenance p) {
  return p == Provenance::revision ? "revision" : "round_trip";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "revision") return Provenance::revision;
  if (s == "round_trip") return Provenance::round_trip;
  throw std::invalid_argument("unknown provenance: " + s);
}

std::string example_to_json_line(const ExamplePair& pair) {
  json j;
  j["source"] = pair.source;
  j["target"] = pair.target;
  j["page_id"] = pair.page_id;
  j["older_rev"] = pair.older_rev;
  j["newer_rev"] = pair.newer_rev;
  j["is_identity"] = pair.is_identity;
  j["provenance"] = to_string(pair.provenance);
  return j.dump();
}

ExamplePair example_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  ExamplePair p;
  p.source = j.at("source").get<std::string>();
  p.target = j.at("target").get<std::string>();
  p.page_id = j.at("page_id").get<uint64_t>();
  p.older_rev = j.at("older_rev").get<uint64_t>();
  p.newer_rev = j.at("newer_rev").get<uint64_t>();
  p.is_identity = j.at("is_identity").get<bool>();
  p.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  return p;
}

void write_examples_jsonl(std::ostream& out,
                          const std::vector<ExamplePair>& pairs) {
  for (const auto& p : pairs) out << example_to_json_line(p) << '\n';
}

std::vector<ExamplePair> read_examples_jsonl(std::istream& in) {
  std::vector<ExamplePair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    pairs.push_back(example_from_json_line(line));
  }
  return pairs;
}

std::vector<ExamplePair> read_examples_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + path);
  return read_examples_jsonl(in);
}

}  // namespace gecgen
