#pragma once

#include <string>
#include <string_view>

namespace gecgen {

// Strips wiki markup down to plain text. Templates, tables, comments,
// ref/math/gallery elements, and file/image/category links are dropped with
// their content; internal links keep their anchor text; external bracket
// links keep their label; other HTML tags are removed but their inner text
// kept; headings survive as plain lines. Within each line, whitespace is
// collapsed to single spaces; blank lines are dropped. Unparseable
// constructs are dropped rather than passed through.
std::string extract_text(std::string_view wikitext);

}  // namespace gecgen
