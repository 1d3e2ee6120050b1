#include "gecgen/ingest.h"

#include <expat.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>

#include "gecgen/common.h"

namespace gecgen {

namespace {

// Pull parsing would need the whole dump in memory; expat's push API keeps
// only the current page. Element nesting in the dump format is shallow and
// fixed, so a small state machine over local names is enough.
struct ParseState {
  const DumpOptions* options;
  const std::function<bool(Page&&)>* on_page;
  DumpStats stats;

  XML_Parser parser = nullptr;
  bool stop_requested = false;
  std::string error;
  int64_t error_offset = -1;

  Page page;
  Revision revision;
  uint64_t page_text_bytes = 0;
  bool page_too_large = false;

  // Where character data should currently accumulate.
  enum class Field { none, page_title, page_ns, page_id, rev_id, rev_timestamp, rev_text };
  Field field = Field::none;
  std::string chars;

  int depth = 0;
  bool in_page = false;
  bool in_revision = false;
  // <contributor> holds its own <id>; ignore ids while inside it.
  bool in_contributor = false;
};

const char* local_name(const char* qname) {
  const char* colon = std::strrchr(qname, ':');
  return colon ? colon + 1 : qname;
}

void XMLCALL start_element(void* user, const XML_Char* name,
                           const XML_Char** /*atts*/) {
  auto& st = *static_cast<ParseState*>(user);
  ++st.depth;
  const char* tag = local_name(name);
  if (!st.in_page) {
    if (std::strcmp(tag, "page") == 0) {
      st.in_page = true;
      st.page = Page{};
      st.page_text_bytes = 0;
      st.page_too_large = false;
      ++st.stats.pages_seen;
    }
    return;
  }
  if (std::strcmp(tag, "revision") == 0) {
    st.in_revision = true;
    st.revision = Revision{};
    ++st.stats.revisions_seen;
    return;
  }
  if (std::strcmp(tag, "contributor") == 0) {
    st.in_contributor = true;
    return;
  }
  st.chars.clear();
  if (!st.in_revision) {
    if (std::strcmp(tag, "title") == 0)
      st.field = ParseState::Field::page_title;
    else if (std::strcmp(tag, "ns") == 0)
      st.field = ParseState::Field::page_ns;
    else if (std::strcmp(tag, "id") == 0)
      st.field = ParseState::Field::page_id;
  } else if (!st.in_contributor) {
    if (std::strcmp(tag, "id") == 0)
      st.field = ParseState::Field::rev_id;
    else if (std::strcmp(tag, "timestamp") == 0)
      st.field = ParseState::Field::rev_timestamp;
    else if (std::strcmp(tag, "text") == 0)
      st.field = ParseState::Field::rev_text;
  }
}

void XMLCALL char_data(void* user, const XML_Char* data, int len) {
  auto& st = *static_cast<ParseState*>(user);
  if (st.field == ParseState::Field::none) return;
  if (st.field == ParseState::Field::rev_text && st.page_too_large) return;
  st.chars.append(data, static_cast<size_t>(len));
}

void XMLCALL end_element(void* user, const XML_Char* name) {
  auto& st = *static_cast<ParseState*>(user);
  --st.depth;
  const char* tag = local_name(name);

  switch (st.field) {
    case ParseState::Field::page_title:
      st.page.title = st.chars;
      break;
    case ParseState::Field::page_ns:
      st.page.ns = std::atoi(st.chars.c_str());
      break;
    case ParseState::Field::page_id:
      st.page.id = std::strtoull(st.chars.c_str(), nullptr, 10);
      break;
    case ParseState::Field::rev_id:
      st.revision.id = std::strtoull(st.chars.c_str(), nullptr, 10);
      break;
    case ParseState::Field::rev_timestamp:
      st.revision.timestamp = st.chars;
      break;
    case ParseState::Field::rev_text:
      st.page_text_bytes += st.chars.size();
      if (st.page_text_bytes > st.options->max_page_text_bytes) {
        st.page_too_large = true;
        st.page.revisions.clear();
        st.page.revisions.shrink_to_fit();
      } else {
        st.revision.text = std::move(st.chars);
      }
      break;
    case ParseState::Field::none:
      break;
  }
  st.field = ParseState::Field::none;
  st.chars.clear();

  if (std::strcmp(tag, "contributor") == 0) {
    st.in_contributor = false;
    return;
  }
  if (std::strcmp(tag, "revision") == 0) {
    if (!st.page_too_large) st.page.revisions.push_back(std::move(st.revision));
    st.in_revision = false;
    return;
  }
  if (std::strcmp(tag, "page") == 0) {
    st.in_page = false;
    if (st.page_too_large) {
      ++st.stats.pages_skipped_size;
    } else if (st.options->main_namespace_only && st.page.ns != 0) {
      ++st.stats.pages_skipped_namespace;
    } else {
      ++st.stats.pages_emitted;
      if (!(*st.on_page)(std::move(st.page))) {
        st.stop_requested = true;
        XML_StopParser(st.parser, XML_FALSE);
      }
    }
    st.page = Page{};
  }
}

}  // namespace

DumpStats stream_pages(std::istream& in, const DumpOptions& options,
                       const std::function<bool(Page&&)>& on_page) {
  ParseState st;
  st.options = &options;
  st.on_page = &on_page;

  XML_Parser parser = XML_ParserCreate(nullptr);
  if (!parser) throw std::runtime_error("XML_ParserCreate failed");
  st.parser = parser;
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, start_element, end_element);
  XML_SetCharacterDataHandler(parser, char_data);

  constexpr size_t kBuf = 1 << 16;
  std::vector<char> buf(kBuf);
  bool done = false;
  while (!done && !st.stop_requested) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<size_t>(in.gcount());
    done = got < buf.size();
    if (XML_Parse(parser, buf.data(), static_cast<int>(got),
                  done ? XML_TRUE : XML_FALSE) == XML_STATUS_ERROR) {
      if (XML_GetErrorCode(parser) != XML_ERROR_ABORTED) {
        st.error = XML_ErrorString(XML_GetErrorCode(parser));
        st.error_offset = XML_GetCurrentByteIndex(parser);
      }
      break;
    }
  }
  XML_ParserFree(parser);
  if (!st.error.empty()) throw DumpError(st.error, st.error_offset);
  return st.stats;
}

DumpStats stream_pages_file(const std::string& path, const DumpOptions& options,
                            const std::function<bool(Page&&)>& on_page) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dump file: " + path);
  return stream_pages(in, options, on_page);
}

uint64_t sampled_pair_count(uint64_t revision_count, double base) {
  if (revision_count < 2) return 0;
  const uint64_t cap = revision_count - 1;
  const double raw = std::log(static_cast<double>(revision_count)) / std::log(base);
  const auto k = static_cast<uint64_t>(std::floor(raw));
  return std::min(k, cap);
}

std::vector<RevisionPair> sample_revision_pairs(size_t revision_count,
                                                double base, uint64_t seed) {
  const uint64_t want = sampled_pair_count(revision_count, base);
  std::vector<RevisionPair> out;
  if (want == 0) return out;

  // Partial Fisher-Yates over the n-1 adjacent pair slots.
  std::vector<size_t> slots(revision_count - 1);
  for (size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  SplitMix64 rng(seed);
  for (uint64_t i = 0; i < want; ++i) {
    const size_t j = i + static_cast<size_t>(rng.next_below(slots.size() - i));
    std::swap(slots[i], slots[j]);
  }
  slots.resize(want);
  std::sort(slots.begin(), slots.end());
  out.reserve(want);
  for (size_t s : slots) out.push_back(RevisionPair{s, s + 1});
  return out;
}

}  // namespace gecgen
