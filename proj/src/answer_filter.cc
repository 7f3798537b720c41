#include "qtc/answer_filter.h"

#include <algorithm>
#include <set>

#include "qtc/arabic_normalizer.h"
#include "qtc/error.h"
#include "qtc/utf8.h"

namespace qtc {
namespace {

bool is_sentence_end(char32_t cp) {
  return cp == '.' || cp == '!' || cp == '\n' || cp == 0x061F /* ؟ */ ||
         cp == 0x061B /* ؛ */;
}

bool contains_run(const std::vector<std::string> &hay,
                  const std::vector<std::string> &needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) !=
         hay.end();
}

std::string join_sentences(const std::vector<std::string> &sentences,
                           std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

}  // namespace

bool contains_answer(std::string_view clean_text, std::string_view gold_answer) {
  return contains_run(normalized_tokens(clean_text),
                      normalized_tokens(gold_answer));
}

int keyword_coverage(std::string_view clean_text,
                     const std::vector<std::string> &keywords) {
  auto tokens = normalized_tokens(clean_text);
  std::set<std::string> present(tokens.begin(), tokens.end());
  std::set<std::string> hit;
  for (const auto &k : keywords) {
    auto norm = normalize_text(k).value();
    if (present.count(norm)) hit.insert(norm);
  }
  return static_cast<int>(hit.size());
}

std::vector<std::string> split_sentences(std::string_view clean_text) {
  std::vector<std::string> sentences;
  std::string current;
  auto flush = [&] {
    auto b = current.find_first_not_of(' ');
    if (b != std::string::npos) {
      auto e = current.find_last_not_of(' ');
      std::string s = current.substr(b, e - b + 1);
      // A piece made only of terminators carries no content.
      if (!normalized_tokens(s).empty()) sentences.push_back(std::move(s));
    }
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < clean_text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8::next(clean_text, &pos);
    if (cp == '\n') {
      flush();
    } else if (is_sentence_end(cp)) {
      current.append(clean_text.substr(start, pos - start));
      flush();
    } else {
      current.append(clean_text.substr(start, pos - start));
    }
  }
  flush();
  return sentences;
}

std::optional<Passage> extract_passage(std::string_view clean_text,
                                       const Question &question) {
  auto sentences = split_sentences(clean_text);
  std::optional<std::size_t> best;
  bool best_gold = false;
  int best_cov = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    bool gold = question.gold_answer &&
                contains_answer(sentences[i], *question.gold_answer);
    int cov = keyword_coverage(sentences[i], question.keywords);
    if (!gold && cov == 0) continue;
    if (!best || (gold && !best_gold) || (gold == best_gold && cov > best_cov)) {
      best = i;
      best_gold = gold;
      best_cov = cov;
    }
  }
  if (!best) return std::nullopt;
  Passage p;
  p.sentence_span.first = *best > 0 ? *best - 1 : 0;
  p.sentence_span.second = std::min(sentences.size(), *best + 2);
  p.text = join_sentences(sentences, p.sentence_span.first, p.sentence_span.second);
  p.coverage = keyword_coverage(p.text, question.keywords);
  return p;
}

CandidateText score_candidate(std::string url, int rank, std::string clean_text,
                              const Question &question) {
  CandidateText c;
  c.url = std::move(url);
  c.rank = rank;
  c.clean_text = std::move(clean_text);
  if (question.gold_answer) {
    c.contains_gold = contains_answer(c.clean_text, *question.gold_answer);
  }
  c.coverage = keyword_coverage(c.clean_text, question.keywords);
  if (auto p = extract_passage(c.clean_text, question)) {
    c.passages.push_back(std::move(*p));
  }
  return c;
}

bool qualifies(const CandidateText &c) {
  if (c.contains_gold.has_value()) return *c.contains_gold;
  return c.coverage >= 1;
}

std::optional<AssembledText> build_corpus_text(
    const std::vector<CandidateText> &candidates, const Question &question,
    int max_passages) {
  if (max_passages < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_passages must be >= 1");
  }
  std::vector<const CandidateText *> ordered;
  for (const auto &c : candidates) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const CandidateText *a, const CandidateText *b) {
                     return a->rank < b->rank;
                   });
  AssembledText out;
  out.question_id = question.id;
  std::set<std::string> used;
  for (const CandidateText *c : ordered) {
    if (out.passage_count >= max_passages) break;
    if (!qualifies(*c) || c->passages.empty()) continue;
    if (!used.insert(c->url).second) continue;
    if (!out.text.empty()) out.text += "\n\n";
    out.text += c->passages.front().text;
    out.source_urls.push_back(c->url);
    ++out.passage_count;
  }
  if (out.passage_count == 0) return std::nullopt;
  return out;
}

MatchSpans locate_matches(std::string_view clean_text, const Question &question) {
  MatchSpans spans;
  auto tokens = tokenize_with_offsets(clean_text);
  std::set<std::string> keywords;
  for (const auto &k : question.keywords) keywords.insert(normalize_text(k).value());
  for (const auto &t : tokens) {
    if (keywords.count(t.normalized)) {
      spans.keywords.emplace_back(t.utf16_begin, t.utf16_end);
    }
  }
  if (question.gold_answer) {
    auto gold = normalized_tokens(*question.gold_answer);
    if (!gold.empty() && gold.size() <= tokens.size()) {
      for (std::size_t i = 0; i + gold.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < gold.size() && match; ++k) {
          match = tokens[i + k].normalized == gold[k];
        }
        if (match) {
          spans.gold.emplace_back(tokens[i].utf16_begin,
                                  tokens[i + gold.size() - 1].utf16_end);
        }
      }
    }
  }
  return spans;
}

}  // namespace qtc
