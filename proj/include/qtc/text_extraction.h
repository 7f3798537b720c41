#ifndef QTC_TEXT_EXTRACTION_H_
#define QTC_TEXT_EXTRACTION_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace qtc {

struct DecodedText {
  std::string utf8;
  std::size_t replaced = 0;  // bytes that could not be decoded
};

// Decodes bytes in the named encoding to UTF-8, substituting U+FFFD for bad
// sequences. Unknown encodings are read as UTF-8.
DecodedText decode_bytes(std::string_view bytes, std::string_view encoding);

// Strips markup: script/style bodies and comments vanish, tags are removed,
// entities decoded, block boundaries become newlines, whitespace collapsed.
// Throws Error(kParse) when nothing in the input decodes.
std::string html_to_text(std::string_view raw_html, std::string_view encoding);

struct ExtractedText {
  std::string text;
  double arabic_char_ratio = 0.0;
  std::size_t token_count = 0;
  std::size_t removed_foreign_tokens = 0;

  friend bool operator==(const ExtractedText &, const ExtractedText &) = default;
};

// Keeps a whitespace-delimited token iff it holds an Arabic-block character
// or consists only of digits and punctuation. Line structure is kept.
ExtractedText filter_foreign_tokens(std::string_view text);

}  // namespace qtc

#endif  // QTC_TEXT_EXTRACTION_H_
