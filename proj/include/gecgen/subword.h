#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gecgen {

// One subword unit. Word-initial and continuation pieces with the same
// content are distinct symbols; whitespace pieces carry literal whitespace
// so that decode can restore the input exactly. A single space between two
// word pieces is implied and gets no piece of its own.
struct Piece {
  std::string text;
  bool continuation = false;
  bool whitespace = false;

  bool operator==(const Piece&) const = default;
  bool operator<(const Piece& o) const {
    if (text != o.text) return text < o.text;
    if (continuation != o.continuation) return continuation < o.continuation;
    return whitespace < o.whitespace;
  }
};

// Rendering convention: continuation pieces are prefixed with "##".
std::string render_piece(const Piece& piece);

class SubwordModel {
 public:
  // Greedy pair merging to the requested vocabulary size; ties broken
  // lexicographically. Throws std::invalid_argument when vocab_size cannot
  // cover the corpus character inventory or the corpus is empty.
  static SubwordModel train(const std::vector<std::string>& corpus,
                            size_t vocab_size);

  std::vector<Piece> encode(const std::string& text) const;
  std::string decode(const std::vector<Piece>& pieces) const;

  // encode + render, for callers that only count or compare pieces.
  std::vector<std::string> encode_rendered(const std::string& text) const;
  size_t wordpiece_length(const std::string& text) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static SubwordModel load(std::istream& in);
  static SubwordModel load_file(const std::string& path);

  const std::vector<std::pair<Piece, Piece>>& merges() const {
    return merges_;
  }
  const std::vector<Piece>& vocab() const { return vocab_; }
  size_t vocab_size() const { return vocab_size_; }

 private:
  std::vector<std::pair<Piece, Piece>> merges_;
  std::vector<Piece> vocab_;  // base inventory plus merge products
  size_t vocab_size_ = 0;
};

}  // namespace gecgen
