#include "qtc/arabic_normalizer.h"

#include "qtc/utf8.h"

namespace qtc {
namespace {

// Latin lowercasing over ASCII, Latin-1 and Latin Extended-A. Scripts
// beyond that are left untouched; foreign tokens rarely survive filtering.
char32_t latin_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp < 0x100 || cp > 0x17F) return cp;
  if ((cp <= 0x12F) || (cp >= 0x132 && cp <= 0x137) ||
      (cp >= 0x14A && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  return cp;
}

// Returns 0 for characters that normalization deletes.
char32_t fold(char32_t cp) {
  if (is_arabic_diacritic(cp) || cp == 0x0640) return 0;
  switch (cp) {
    case 0x0623:  // أ
    case 0x0625:  // إ
    case 0x0622:  // آ
    case 0x0671:  // ٱ
      return 0x0627;
    case 0x0649: return 0x064A;  // ى -> ي
    case 0x0629: return 0x0647;  // ة -> ه
    case 0x0624: return 0x0648;  // ؤ -> و
    case 0x0626: return 0x064A;  // ئ -> ي
    default: break;
  }
  return latin_lower(cp);
}

}  // namespace

bool is_arabic_diacritic(char32_t cp) { return cp >= 0x064B && cp <= 0x0652; }

bool is_arabic_block(char32_t cp) {
  return (cp >= 0x0600 && cp <= 0x06FF) || (cp >= 0xFB50 && cp <= 0xFDFF) ||
         (cp >= 0xFE70 && cp <= 0xFEFF);
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_token_separator(char32_t cp) {
  if (is_space(cp)) return true;
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  // Latin-1 punctuation and symbols: ¡ « » ¿ · and friends.
  if (cp >= 0xA1 && cp <= 0xBF) return true;
  switch (cp) {
    case 0x060C:  // ،
    case 0x061B:  // ؛
    case 0x061F:  // ؟
    case 0x066A: case 0x066B: case 0x066C: case 0x066D:
    case 0x06D4:  // Arabic full stop
      return true;
    default:
      break;
  }
  // General punctuation, minus ZWNJ/ZWJ which live inside words.
  if (cp >= 0x200B && cp <= 0x206F) return cp != 0x200C && cp != 0x200D;
  if (cp >= 0x3001 && cp <= 0x303F) return true;
  return false;
}

NormalizedString normalize_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    char32_t cp = utf8::next(s, &pos);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    cp = fold(cp);
    if (cp == 0) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(&out, cp);
  }
  return NormalizedString(std::move(out));
}

std::vector<std::string> tokenize(const NormalizedString &s) {
  std::vector<std::string> tokens;
  const std::string &text = s.value();
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8::next(text, &pos);
    if (is_token_separator(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text, start, pos - start);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  return tokenize(normalize_text(s));
}

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
  std::vector<TokenSpan> spans;
  std::size_t pos = 0;
  std::size_t u16 = 0;
  bool in_token = false;
  TokenSpan current;
  auto flush = [&](std::size_t byte_end, std::size_t u16_end) {
    if (!in_token) return;
    in_token = false;
    current.byte_end = byte_end;
    current.utf16_end = u16_end;
    current.normalized = normalize_text(
        text.substr(current.byte_begin, byte_end - current.byte_begin)).value();
    // Tokens made only of harakat or tatweel vanish under normalization.
    if (!current.normalized.empty()) spans.push_back(current);
  };
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8::next(text, &pos);
    if (is_token_separator(cp)) {
      flush(start, u16);
    } else if (!in_token) {
      in_token = true;
      current = TokenSpan{};
      current.byte_begin = start;
      current.utf16_begin = u16;
    }
    u16 += utf8::utf16_width(cp);
  }
  flush(text.size(), u16);
  return spans;
}

}  // namespace qtc
