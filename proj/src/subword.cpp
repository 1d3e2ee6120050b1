#include "gecgen/subword.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gecgen/common.h"

namespace gecgen {

namespace {

constexpr std::string_view kMagic = "gecgen-subword 1";

std::vector<Piece> word_to_symbols(const std::string& word) {
  std::vector<Piece> symbols;
  bool first = true;
  for (uint32_t cp : utf8_decode(word)) {
    Piece p;
    utf8_append(p.text, cp);
    p.continuation = !first;
    symbols.push_back(std::move(p));
    first = false;
  }
  return symbols;
}

void apply_merge(std::vector<Piece>& symbols,
                 const std::pair<Piece, Piece>& merge) {
  size_t w = 0;
  for (size_t r = 0; r < symbols.size();) {
    if (r + 1 < symbols.size() && symbols[r] == merge.first &&
        symbols[r + 1] == merge.second) {
      Piece joined;
      joined.text = symbols[r].text + symbols[r + 1].text;
      joined.continuation = symbols[r].continuation;
      symbols[w++] = std::move(joined);
      r += 2;
    } else {
      if (w != r) symbols[w] = std::move(symbols[r]);
      ++w;
      r += 1;
    }
  }
  symbols.resize(w);
}

std::string escape_symbol(const Piece& p) {
  std::string out;
  if (p.continuation) out += "##";
  for (char c : p.text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '#': out += "\\#"; break;
      default: out += c;
    }
  }
  return out;
}

Piece unescape_symbol(std::string_view s) {
  Piece p;
  if (s.size() >= 2 && s[0] == '#' && s[1] == '#') {
    p.continuation = true;
    s.remove_prefix(2);
  }
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      switch (s[i]) {
        case 't': p.text += '\t'; break;
        case 'n': p.text += '\n'; break;
        case 'r': p.text += '\r'; break;
        default: p.text += s[i];
      }
    } else {
      p.text += s[i];
    }
  }
  return p;
}

}  // namespace

std::string render_piece(const Piece& piece) {
  if (piece.continuation) return "##" + piece.text;
  return piece.text;
}

SubwordModel SubwordModel::train(const std::vector<std::string>& corpus,
                                 size_t vocab_size) {
  // Word frequencies drive pair counting; each distinct word is segmented
  // once and carries its count.
  std::map<std::string, uint64_t> word_freq;
  for (const auto& line : corpus)
    for (auto& w : split_whitespace(line)) ++word_freq[w];
  if (word_freq.empty())
    throw std::invalid_argument("subword training corpus is empty");

  struct Entry {
    std::vector<Piece> symbols;
    uint64_t freq;
  };
  std::vector<Entry> entries;
  entries.reserve(word_freq.size());
  std::map<Piece, uint64_t> inventory;
  for (const auto& [word, freq] : word_freq) {
    Entry e{word_to_symbols(word), freq};
    for (const auto& s : e.symbols) inventory[s] += freq;
    entries.push_back(std::move(e));
  }

  SubwordModel model;
  model.vocab_size_ = vocab_size;
  for (const auto& [piece, freq] : inventory) model.vocab_.push_back(piece);
  if (vocab_size < model.vocab_.size())
    throw std::invalid_argument(
        "vocab_size smaller than base character inventory (" +
        std::to_string(model.vocab_.size()) + ")");

  const size_t budget = vocab_size - model.vocab_.size();
  for (size_t round = 0; round < budget; ++round) {
    std::map<std::pair<Piece, Piece>, uint64_t> pair_freq;
    for (const auto& e : entries)
      for (size_t i = 0; i + 1 < e.symbols.size(); ++i)
        pair_freq[{e.symbols[i], e.symbols[i + 1]}] += e.freq;
    if (pair_freq.empty()) break;  // nothing left to merge

    // Highest frequency wins; the map's key order provides the
    // lexicographic tie-break (word-initial sorts before continuation).
    const std::pair<Piece, Piece>* best = nullptr;
    uint64_t best_freq = 0;
    for (const auto& [pair, freq] : pair_freq) {
      if (freq > best_freq) {
        best_freq = freq;
        best = &pair;
      }
    }
    const auto merge = *best;
    for (auto& e : entries) apply_merge(e.symbols, merge);
    Piece product;
    product.text = merge.first.text + merge.second.text;
    product.continuation = merge.first.continuation;
    model.vocab_.push_back(product);
    model.merges_.push_back(merge);
  }
  return model;
}

std::vector<Piece> SubwordModel::encode(const std::string& text) const {
  std::vector<Piece> out;
  const auto flush_whitespace = [&](const std::string& run,
                                    bool between_words) {
    // A single space between two word pieces is implied; everything else
    // must be carried explicitly for the decode round trip.
    if (between_words && run == " ") return;
    if (run.empty()) return;
    Piece p;
    p.text = run;
    p.whitespace = true;
    out.push_back(std::move(p));
  };

  size_t i = 0;
  bool prev_was_word = false;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      const size_t start = i;
      while (i < text.size() &&
             std::isspace(static_cast<unsigned char>(text[i])))
        ++i;
      const bool between = prev_was_word && i < text.size();
      flush_whitespace(text.substr(start, i - start), between);
      prev_was_word = false;
    } else {
      const size_t start = i;
      while (i < text.size() &&
             !std::isspace(static_cast<unsigned char>(text[i])))
        ++i;
      auto symbols = word_to_symbols(text.substr(start, i - start));
      for (const auto& merge : merges_) apply_merge(symbols, merge);
      for (auto& s : symbols) out.push_back(std::move(s));
      prev_was_word = true;
    }
  }
  return out;
}

std::string SubwordModel::decode(const std::vector<Piece>& pieces) const {
  std::string out;
  bool prev_was_word = false;
  for (const auto& p : pieces) {
    if (p.whitespace) {
      out += p.text;
      prev_was_word = false;
    } else if (p.continuation) {
      out += p.text;
      prev_was_word = true;
    } else {
      if (prev_was_word) out += ' ';
      out += p.text;
      prev_was_word = true;
    }
  }
  return out;
}

std::vector<std::string> SubwordModel::encode_rendered(
    const std::string& text) const {
  std::vector<std::string> out;
  for (const auto& p : encode(text)) out.push_back(render_piece(p));
  return out;
}

size_t SubwordModel::wordpiece_length(const std::string& text) const {
  return encode(text).size();
}

void SubwordModel::save(std::ostream& out) const {
  out << kMagic << ' ' << vocab_size_ << '\n';
  for (const auto& [left, right] : merges_)
    out << escape_symbol(left) << '\t' << escape_symbol(right) << '\n';
}

void SubwordModel::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write subword model: " + path);
  save(out);
}

SubwordModel SubwordModel::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind(kMagic, 0) != 0)
    throw std::runtime_error("bad subword model header");
  SubwordModel model;
  {
    std::istringstream hs(header.substr(kMagic.size()));
    hs >> model.vocab_size_;
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("bad merge line in subword model");
    model.merges_.emplace_back(
        unescape_symbol(std::string_view(line).substr(0, tab)),
        unescape_symbol(std::string_view(line).substr(tab + 1)));
  }
  return model;
}

SubwordModel SubwordModel::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open subword model: " + path);
  return load(in);
}

}  // namespace gecgen
