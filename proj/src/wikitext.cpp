#include "gecgen/wikitext.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "gecgen/common.h"

namespace gecgen {

namespace {

bool starts_with_at(std::string_view s, size_t pos, std::string_view what) {
  return s.compare(pos, what.size(), what) == 0;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::string remove_comments(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    if (starts_with_at(in, i, "<!--")) {
      const size_t end = in.find("-->", i + 4);
      if (end == std::string_view::npos) break;  // unterminated, drop rest
      i = end + 3;
      continue;
    }
    out += in[i++];
  }
  return out;
}

// Elements whose content never contributes prose.
bool is_drop_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 7> kDrop = {
      "ref", "math", "gallery", "timeline", "source", "syntaxhighlight",
      "score"};
  return std::any_of(kDrop.begin(), kDrop.end(),
                     [&](std::string_view d) { return iequals(tag, d); });
}

// Returns length of the tag at in[i] (starting '<'), or 0 if not a tag.
// tag_name/closing/self_closing describe what was parsed.
size_t parse_tag(std::string_view in, size_t i, std::string* tag_name,
                 bool* closing, bool* self_closing) {
  size_t j = i + 1;
  *closing = j < in.size() && in[j] == '/';
  if (*closing) ++j;
  const size_t name_start = j;
  while (j < in.size() &&
         (std::isalnum(static_cast<unsigned char>(in[j])) || in[j] == '_'))
    ++j;
  if (j == name_start) return 0;  // '<' not followed by a name: literal text
  *tag_name = std::string(in.substr(name_start, j - name_start));
  while (j < in.size() && in[j] != '>' && in[j] != '<') ++j;
  if (j >= in.size() || in[j] != '>') return 0;
  *self_closing = in[j - 1] == '/';
  return j + 1 - i;
}

std::string remove_html_elements(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    if (in[i] == '<') {
      std::string tag;
      bool closing = false, self_closing = false;
      const size_t len = parse_tag(in, i, &tag, &closing, &self_closing);
      if (len > 0) {
        i += len;
        if (!closing && !self_closing && is_drop_element(tag)) {
          // Skip to the matching close tag; no nesting in practice.
          const std::string close = "</" + tag;
          size_t k = i;
          bool found = false;
          while (k < in.size()) {
            if (in[k] == '<' && starts_with_at(in, k, close)) {
              const size_t gt = in.find('>', k);
              i = gt == std::string_view::npos ? in.size() : gt + 1;
              found = true;
              break;
            }
            ++k;
          }
          if (!found) i = in.size();  // unterminated, drop rest
        }
        // Other tags: markup removed, inner text flows through.
        if (iequals(tag, "br")) out += '\n';
        continue;
      }
    }
    out += in[i++];
  }
  return out;
}

// Removes {{...}} template calls and {| ... |} tables, both possibly nested.
std::string remove_braced(std::string_view in, std::string_view open,
                          std::string_view close) {
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  int depth = 0;
  while (i < in.size()) {
    if (starts_with_at(in, i, open)) {
      ++depth;
      i += open.size();
      continue;
    }
    if (depth > 0 && starts_with_at(in, i, close)) {
      --depth;
      i += close.size();
      continue;
    }
    if (depth == 0)
      out += in[i];
    ++i;
  }
  return out;
}

bool is_media_link(std::string_view target) {
  const size_t colon = target.find(':');
  if (colon == std::string_view::npos) return false;
  const std::string_view ns = target.substr(0, colon);
  return iequals(ns, "file") || iequals(ns, "image") ||
         iequals(ns, "category");
}

std::string process_links(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    if (starts_with_at(in, i, "[[")) {
      // Find matching ]] allowing one nesting level (media captions may
      // embed links).
      size_t j = i + 2;
      int depth = 1;
      while (j < in.size() && depth > 0) {
        if (starts_with_at(in, j, "[[")) {
          ++depth;
          j += 2;
        } else if (starts_with_at(in, j, "]]")) {
          --depth;
          j += 2;
        } else {
          ++j;
        }
      }
      if (depth != 0) {  // unterminated: drop the marker, keep scanning
        i += 2;
        continue;
      }
      const std::string_view body = in.substr(i + 2, j - i - 4);
      i = j;
      if (is_media_link(body)) continue;  // dropped with caption
      if (body.find("[[") != std::string_view::npos) continue;  // malformed
      const size_t pipe = body.rfind('|');
      std::string_view anchor =
          pipe == std::string_view::npos ? body : body.substr(pipe + 1);
      out += process_links(anchor);  // anchor may not nest, but stay safe
      continue;
    }
    if (in[i] == '[') {
      // External link: [url label] keeps the label, bare [url] is dropped.
      const size_t end = in.find(']', i + 1);
      if (end != std::string_view::npos) {
        const std::string_view body = in.substr(i + 1, end - i - 1);
        if (body.find("//") != std::string_view::npos) {
          const size_t sp = body.find(' ');
          if (sp != std::string_view::npos) out += body.substr(sp + 1);
          i = end + 1;
          continue;
        }
      }
    }
    out += in[i++];
  }
  return out;
}

void decode_entities(std::string* s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6>
      kEntities = {{{"&amp;", "&"},
                    {"&lt;", "<"},
                    {"&gt;", ">"},
                    {"&quot;", "\""},
                    {"&apos;", "'"},
                    {"&nbsp;", " "}}};
  std::string out;
  out.reserve(s->size());
  size_t i = 0;
  while (i < s->size()) {
    if ((*s)[i] == '&') {
      bool matched = false;
      for (const auto& [name, repl] : kEntities) {
        if (starts_with_at(*s, i, name)) {
          out += repl;
          i += name.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (i + 2 < s->size() && (*s)[i + 1] == '#') {
        size_t j = i + 2;
        uint32_t cp = 0;
        bool hex = (*s)[j] == 'x' || (*s)[j] == 'X';
        if (hex) ++j;
        const size_t digits_start = j;
        while (j < s->size() && std::isxdigit(static_cast<unsigned char>((*s)[j])))
          ++j;
        if (j > digits_start && j < s->size() && (*s)[j] == ';') {
          cp = static_cast<uint32_t>(
              std::strtoul(s->substr(digits_start, j - digits_start).c_str(),
                           nullptr, hex ? 16 : 10));
          if (cp > 0 && cp <= 0x10FFFF) {
            utf8_append(out, cp);
            i = j + 1;
            continue;
          }
        }
      }
    }
    out += (*s)[i++];
  }
  *s = std::move(out);
}

std::string clean_line(std::string_view line) {
  size_t b = 0, e = line.size();
  while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
  line = line.substr(b, e - b);
  if (line.empty()) return {};

  // Table fragments that survived brace removal, and magic words.
  if (line[0] == '|' || line[0] == '!') return {};
  if (line.size() > 4 && starts_with_at(line, 0, "__") &&
      line.substr(line.size() - 2) == "__")
    return {};

  // Heading markers.
  while (line.size() >= 2 && line.front() == '=' && line.back() == '=') {
    line = line.substr(1, line.size() - 2);
  }
  // List/indent markers.
  while (!line.empty() && (line[0] == '*' || line[0] == '#' ||
                           line[0] == ':' || line[0] == ';'))
    line = line.substr(1);

  // Bold/italic quote runs and whitespace collapsing.
  std::string out;
  out.reserve(line.size());
  size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '\'' && i + 1 < line.size() && line[i + 1] == '\'') {
      i += 2;
      while (i < line.size() && line[i] == '\'') ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      ++i;
      continue;
    }
    out += line[i++];
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  while (!out.empty() && out.front() == ' ') out.erase(out.begin());
  return out;
}

}  // namespace

std::string extract_text(std::string_view wikitext) {
  std::string s = remove_comments(wikitext);
  s = remove_html_elements(s);
  s = remove_braced(s, "{{", "}}");
  s = remove_braced(s, "{|", "|}");
  s = process_links(s);
  decode_entities(&s);

  std::string out;
  out.reserve(s.size());
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t nl = s.find('\n', pos);
    const std::string_view line =
        nl == std::string::npos
            ? std::string_view(s).substr(pos)
            : std::string_view(s).substr(pos, nl - pos);
    const std::string cleaned = clean_line(line);
    if (!cleaned.empty()) {
      if (!out.empty()) out += '\n';
      out += cleaned;
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace gecgen
