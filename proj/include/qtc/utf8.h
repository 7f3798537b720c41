#ifndef QTC_UTF8_H_
#define QTC_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace qtc::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at text[*pos] and advances *pos. Invalid
// or truncated sequences yield kReplacement and consume a single byte.
char32_t next(std::string_view text, std::size_t *pos);

void append(std::string *out, char32_t cp);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Number of UTF-16 code units needed for cp (1 or 2).
inline int utf16_width(char32_t cp) { return cp >= 0x10000 ? 2 : 1; }

}  // namespace qtc::utf8

#endif  // QTC_UTF8_H_
