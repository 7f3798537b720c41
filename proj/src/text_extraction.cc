#include "qtc/text_extraction.h"

#include <iconv.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qtc/arabic_normalizer.h"
#include "qtc/error.h"
#include "qtc/utf8.h"

namespace qtc {
namespace {

class IconvHandle {
 public:
  IconvHandle(const char *to, const char *from) : cd_(iconv_open(to, from)) {}
  ~IconvHandle() {
    if (ok()) iconv_close(cd_);
  }
  IconvHandle(const IconvHandle &) = delete;
  IconvHandle &operator=(const IconvHandle &) = delete;

  bool ok() const { return cd_ != reinterpret_cast<iconv_t>(-1); }
  iconv_t get() const { return cd_; }

 private:
  iconv_t cd_;
};

DecodedText decode_utf8(std::string_view bytes) {
  DecodedText out;
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  out.utf8.reserve(bytes.size());
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t start = pos;
    char32_t cp = utf8::next(bytes, &pos);
    if (cp == utf8::kReplacement && pos - start == 1) ++out.replaced;
    utf8::append(&out.utf8, cp);
  }
  return out;
}

const std::unordered_map<std::string_view, char32_t> &named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", '&'},      {"lt", '<'},        {"gt", '>'},
      {"quot", '"'},     {"apos", '\''},     {"nbsp", 0xA0},
      {"laquo", 0xAB},   {"raquo", 0xBB},    {"lsaquo", 0x2039},
      {"rsaquo", 0x203A}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"bdquo", 0x201E},
      {"sbquo", 0x201A}, {"ndash", 0x2013},  {"mdash", 0x2014},
      {"hellip", 0x2026}, {"bull", 0x2022},  {"middot", 0xB7},
      {"copy", 0xA9},    {"reg", 0xAE},      {"trade", 0x2122},
      {"deg", 0xB0},     {"times", 0xD7},    {"divide", 0xF7},
      {"plusmn", 0xB1},  {"frac12", 0xBD},   {"frac14", 0xBC},
      {"frac34", 0xBE},  {"sect", 0xA7},     {"para", 0xB6},
      {"euro", 0x20AC},  {"pound", 0xA3},    {"yen", 0xA5},
      {"cent", 0xA2},    {"iexcl", 0xA1},    {"iquest", 0xBF},
      {"shy", 0xAD},     {"ensp", 0x2002},   {"emsp", 0x2003},
      {"thinsp", 0x2009}, {"zwnj", 0x200C},  {"zwj", 0x200D},
      {"lrm", 0x200E},   {"rlm", 0x200F},    {"eacute", 0xE9},
      {"egrave", 0xE8},  {"agrave", 0xE0},   {"aacute", 0xE1},
      {"ccedil", 0xE7},  {"ouml", 0xF6},     {"uuml", 0xFC},
      {"auml", 0xE4},    {"szlig", 0xDF},    {"Eacute", 0xC9},
  };
  return table;
}

// Names browsers accept even without the trailing semicolon.
bool legacy_entity(std::string_view name) {
  return name == "amp" || name == "lt" || name == "gt" || name == "quot" ||
         name == "nbsp";
}

const std::unordered_set<std::string> &block_tags() {
  static const std::unordered_set<std::string> tags = {
      "address", "article", "aside", "blockquote", "body", "caption",
      "center", "dd", "details", "dialog", "div", "dl", "dt", "fieldset",
      "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
      "h6", "head", "header", "hgroup", "hr", "html", "li", "main", "nav",
      "ol", "option", "p", "pre", "section", "summary", "table", "tbody",
      "td", "tfoot", "th", "thead", "title", "tr", "ul"};
  return tags;
}

bool ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Accumulates text with whitespace collapsing and newline policy applied on
// the fly.
class TextBuilder {
 public:
  void add(char32_t cp) {
    if (is_space(cp)) {
      pending_space_ = true;
      return;
    }
    if (pending_space_ && !out_.empty() && out_.back() != '\n') {
      out_.push_back(' ');
    }
    pending_space_ = false;
    utf8::append(&out_, cp);
  }

  void add_utf8(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) add(utf8::next(s, &pos));
  }

  // Adjacent block boundaries produce a single newline.
  void block_break() {
    pending_space_ = false;
    if (!out_.empty() && out_.back() != '\n') out_.push_back('\n');
  }

  void hard_break() {
    pending_space_ = false;
    std::size_t trailing = 0;
    for (auto it = out_.rbegin(); it != out_.rend() && *it == '\n'; ++it) ++trailing;
    if (trailing < 2) out_.push_back('\n');
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
  bool pending_space_ = false;
};

// Collapses spaces, strips spaces around newlines, caps newline runs at two
// and trims.
std::string tidy(std::string_view s) {
  TextBuilder b;
  std::size_t pos = 0;
  int newlines = 0;
  while (pos < s.size()) {
    char32_t cp = utf8::next(s, &pos);
    if (cp == '\n') {
      ++newlines;
      continue;
    }
    if (newlines == 1) b.block_break();
    if (newlines >= 2) {
      b.block_break();
      b.hard_break();
    }
    newlines = 0;
    b.add(cp);
  }
  std::string out = b.take();
  auto end = out.find_last_not_of(" \n");
  out.erase(end == std::string::npos ? 0 : end + 1);
  auto begin = out.find_first_not_of(" \n");
  out.erase(0, begin == std::string::npos ? out.size() : begin);
  return out;
}

// Removes every <x...> shaped substring; returns true if anything went.
bool strip_tag_shapes(std::string *s) {
  bool changed = false;
  std::string out;
  out.reserve(s->size());
  std::size_t i = 0;
  while (i < s->size()) {
    char c = (*s)[i];
    if (c == '<' && i + 1 < s->size()) {
      char n = (*s)[i + 1];
      if (ascii_alpha(n) || n == '/' || n == '!' || n == '?') {
        std::size_t j = i + 1;
        while (j < s->size() && (*s)[j] != '<' && (*s)[j] != '>') ++j;
        if (j < s->size() && (*s)[j] == '>') {
          out.push_back(' ');
          i = j + 1;
          changed = true;
          continue;
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  if (changed) *s = std::move(out);
  return changed;
}

// Decodes the entity at text[i] ('&'). On success appends to the builder
// and returns the index just past it; otherwise returns i.
std::size_t decode_entity(std::string_view text, std::size_t i, TextBuilder *b) {
  std::size_t j = i + 1;
  if (j < text.size() && text[j] == '#') {
    ++j;
    bool hex = j < text.size() && (text[j] == 'x' || text[j] == 'X');
    if (hex) ++j;
    std::size_t digits_begin = j;
    std::uint64_t value = 0;
    while (j < text.size() &&
           (hex ? std::isxdigit(static_cast<unsigned char>(text[j]))
                : std::isdigit(static_cast<unsigned char>(text[j])))) {
      if (value <= 0x10FFFF) {
        value = value * (hex ? 16 : 10) +
                (std::isdigit(static_cast<unsigned char>(text[j]))
                     ? text[j] - '0'
                     : (std::tolower(static_cast<unsigned char>(text[j])) - 'a' + 10));
      }
      ++j;
    }
    if (j == digits_begin) return i;
    if (j < text.size() && text[j] == ';') ++j;
    char32_t cp = static_cast<char32_t>(value);
    if (value == 0 || value > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      cp = utf8::kReplacement;
    }
    b->add(cp);
    return j;
  }
  std::size_t name_begin = j;
  while (j < text.size() && j - name_begin < 32 &&
         std::isalnum(static_cast<unsigned char>(text[j]))) {
    ++j;
  }
  std::string_view name = text.substr(name_begin, j - name_begin);
  if (name.empty()) return i;
  auto it = named_entities().find(name);
  if (it == named_entities().end()) return i;
  bool semi = j < text.size() && text[j] == ';';
  if (!semi && !legacy_entity(name)) return i;
  b->add(it->second);
  return semi ? j + 1 : j;
}

// Index just past the end of a tag opened at text[i] == '<', or npos when it
// never closes. Quoted attribute values may contain '>'.
std::size_t tag_end(std::string_view text, std::size_t i) {
  char quote = 0;
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    char c = text[j];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      // Only treat as quoting when it follows '='.
      std::size_t k = j;
      while (k > i && (text[k - 1] == ' ' || text[k - 1] == '\t')) --k;
      if (k > i && text[k - 1] == '=') quote = c;
    } else if (c == '>') {
      return j + 1;
    }
  }
  if (quote) {
    // Broken quoting: fall back to the first '>'.
    auto gt = text.find('>', i);
    return gt == std::string_view::npos ? gt : gt + 1;
  }
  return std::string_view::npos;
}

// Finds "</name" (case-insensitive) followed by a delimiter, from `from`.
std::size_t find_close_tag(std::string_view text, std::size_t from,
                           std::string_view name) {
  const std::string hay = lower(text.substr(from));
  const std::string needle = "</" + std::string(name);
  std::size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    std::size_t after = pos + needle.size();
    if (after >= hay.size() || std::strchr(" \t\n\r\f/>", hay[after])) {
      return from + pos;
    }
    pos = after;
  }
  return std::string_view::npos;
}

}  // namespace

DecodedText decode_bytes(std::string_view bytes, std::string_view encoding) {
  std::string enc = lower(encoding);
  if (enc.empty() || enc == "utf-8" || enc == "utf8") return decode_utf8(bytes);
  IconvHandle cd("UTF-8", std::string(encoding).c_str());
  if (!cd.ok()) return decode_utf8(bytes);

  DecodedText out;
  std::string in(bytes);
  char *inbuf = in.data();
  std::size_t inleft = in.size();
  std::vector<char> chunk(4096);
  while (inleft > 0) {
    char *outbuf = chunk.data();
    std::size_t outleft = chunk.size();
    std::size_t rc = iconv(cd.get(), &inbuf, &inleft, &outbuf, &outleft);
    out.utf8.append(chunk.data(), chunk.size() - outleft);
    if (rc != static_cast<std::size_t>(-1)) continue;
    if (errno == E2BIG) continue;
    // EILSEQ or EINVAL: skip one byte and mark it.
    utf8::append(&out.utf8, utf8::kReplacement);
    ++out.replaced;
    ++inbuf;
    --inleft;
    iconv(cd.get(), nullptr, nullptr, nullptr, nullptr);
  }
  return out;
}

std::string html_to_text(std::string_view raw_html, std::string_view encoding) {
  DecodedText decoded = decode_bytes(raw_html, encoding);
  if (!raw_html.empty() && decoded.replaced > 0 &&
      utf8::decode(decoded.utf8).size() == decoded.replaced) {
    throw Error(ErrorCode::kParse, "undecodable page content (encoding " +
                                       std::string(encoding) + ")");
  }
  std::string_view text = decoded.utf8;
  TextBuilder b;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '<') {
      if (text.substr(i, 4) == "<!--") {
        auto close = text.find("-->", i + 4);
        if (close == std::string_view::npos) break;
        i = close + 3;
        continue;
      }
      char n = i + 1 < text.size() ? text[i + 1] : '\0';
      if (!(ascii_alpha(n) || n == '/' || n == '!' || n == '?')) {
        b.add('<');
        ++i;
        continue;
      }
      std::size_t end = tag_end(text, i);
      if (end == std::string_view::npos) break;  // unterminated tag
      std::size_t name_begin = i + 1 + (n == '/' ? 1 : 0);
      std::size_t name_end = name_begin;
      while (name_end < end &&
             (std::isalnum(static_cast<unsigned char>(text[name_end])) ||
              text[name_end] == '-')) {
        ++name_end;
      }
      std::string name = lower(text.substr(name_begin, name_end - name_begin));
      i = end;
      if (n == '!' || n == '?') continue;
      if (n != '/' && (name == "script" || name == "style")) {
        auto close = find_close_tag(text, i, name);
        if (close == std::string_view::npos) break;
        auto close_end = tag_end(text, close);
        if (close_end == std::string_view::npos) break;
        i = close_end;
        continue;
      }
      if (name == "br") {
        b.hard_break();
      } else if (block_tags().count(name)) {
        b.block_break();
      }
      continue;
    }
    if (c == '&') {
      std::size_t next = decode_entity(text, i, &b);
      if (next != i) {
        i = next;
        continue;
      }
      b.add('&');
      ++i;
      continue;
    }
    // Plain text up to the next markup character.
    std::size_t stop = text.find_first_of("<&", i);
    if (stop == std::string_view::npos) stop = text.size();
    b.add_utf8(text.substr(i, stop - i));
    i = stop;
  }
  std::string out = tidy(b.take());
  // Entity-decoded brackets can spell tags (&lt;b&gt;); those go too.
  while (strip_tag_shapes(&out)) out = tidy(out);
  return out;
}

namespace {

bool is_digit_cp(char32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 0x0660 && cp <= 0x0669) ||
         (cp >= 0x06F0 && cp <= 0x06F9);
}

bool is_letter_cp(char32_t cp) {
  if (is_space(cp) || is_digit_cp(cp) || is_token_separator(cp)) return false;
  if (is_arabic_diacritic(cp) || cp == 0x0640 || cp == 0x0670) return false;
  if (cp < 0x80) return ascii_alpha(static_cast<char>(cp));
  // Combining marks are not letters.
  if (cp >= 0x0300 && cp <= 0x036F) return false;
  if (cp == utf8::kReplacement) return false;
  return true;
}

bool keep_token(std::string_view token) {
  bool all_digit_punct = true;
  std::size_t pos = 0;
  while (pos < token.size()) {
    char32_t cp = utf8::next(token, &pos);
    if (is_arabic_block(cp)) return true;
    if (!is_digit_cp(cp) && !is_token_separator(cp)) all_digit_punct = false;
  }
  return all_digit_punct;
}

}  // namespace

ExtractedText filter_foreign_tokens(std::string_view text) {
  ExtractedText out;
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    std::string kept;
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      if (keep_token(token)) {
        if (!kept.empty()) kept.push_back(' ');
        kept += token;
        ++out.token_count;
      } else {
        ++out.removed_foreign_tokens;
      }
      token.clear();
    };
    std::size_t lp = 0;
    while (lp < line.size()) {
      std::size_t start = lp;
      char32_t cp = utf8::next(line, &lp);
      if (is_space(cp)) {
        flush();
      } else {
        token.append(line.substr(start, lp - start));
      }
    }
    flush();
    lines.push_back(std::move(kept));
    if (eol == text.size()) break;
  }

  // Rejoin, keeping at most one blank line between paragraphs.
  std::string joined;
  bool blank_pending = false;
  for (auto &line : lines) {
    if (line.empty()) {
      blank_pending = !joined.empty();
      continue;
    }
    if (!joined.empty()) joined += blank_pending ? "\n\n" : "\n";
    blank_pending = false;
    joined += line;
  }
  out.text = std::move(joined);

  std::size_t letters = 0, arabic = 0;
  std::size_t p = 0;
  while (p < out.text.size()) {
    char32_t cp = utf8::next(out.text, &p);
    if (!is_letter_cp(cp)) continue;
    ++letters;
    if (is_arabic_block(cp)) ++arabic;
  }
  out.arabic_char_ratio =
      letters == 0 ? 0.0 : static_cast<double>(arabic) / static_cast<double>(letters);
  return out;
}

}  // namespace qtc
