#ifndef QTC_ARABIC_NORMALIZER_H_
#define QTC_ARABIC_NORMALIZER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qtc {

// A string that has been through normalize_text. Construction from raw text
// always normalizes, so the invariant normalize_text(value) == value holds
// for every instance.
class NormalizedString {
 public:
  NormalizedString() = default;

  const std::string &value() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend bool operator==(const NormalizedString &,
                         const NormalizedString &) = default;

 private:
  friend NormalizedString normalize_text(std::string_view s);
  explicit NormalizedString(std::string value) : value_(std::move(value)) {}

  std::string value_;
};

// Canonicalizes Arabic text for matching:
//   - drops the harakat U+064B..U+0652 and tatweel U+0640
//   - folds alef variants (أ إ آ ٱ) to ا, ى to ي, ة to ه, ؤ to و, ئ to ي
//   - lowercases Latin letters
//   - collapses whitespace runs to one space and trims
NormalizedString normalize_text(std::string_view s);

// Splits normalized text on whitespace and punctuation. Never yields empty
// tokens.
std::vector<std::string> tokenize(const NormalizedString &s);

// Convenience: tokenize(normalize_text(s)).
std::vector<std::string> normalized_tokens(std::string_view s);

// A token of raw (unnormalized) text together with its location.
struct TokenSpan {
  std::string normalized;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
  // Offsets in UTF-16 code units, for clients that index strings that way.
  std::size_t utf16_begin = 0;
  std::size_t utf16_end = 0;
};

// Tokenizes raw text while keeping offsets into it. The sequence of
// `normalized` fields equals normalized_tokens(text).
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

// Character classes shared with the rest of the pipeline.
bool is_arabic_diacritic(char32_t cp);
bool is_arabic_block(char32_t cp);
bool is_space(char32_t cp);
bool is_token_separator(char32_t cp);

}  // namespace qtc

#endif  // QTC_ARABIC_NORMALIZER_H_
