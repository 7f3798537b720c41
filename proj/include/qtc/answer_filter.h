#ifndef QTC_ANSWER_FILTER_H_
#define QTC_ANSWER_FILTER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtc/question_bank.h"

namespace qtc {

inline constexpr int kDefaultMaxPassages = 9;

struct Passage {
  std::string text;
  // Half-open [first, last) range into split_sentences(clean_text).
  std::pair<std::size_t, std::size_t> sentence_span{0, 0};
  int coverage = 0;

  friend bool operator==(const Passage &, const Passage &) = default;
};

struct CandidateText {
  std::string url;
  int rank = 0;
  std::string clean_text;
  std::optional<bool> contains_gold;  // absent when the question has no gold
  int coverage = 0;
  std::vector<Passage> passages;

  friend bool operator==(const CandidateText &, const CandidateText &) = default;
};

struct AssembledText {
  std::string question_id;
  std::string text;
  int passage_count = 0;
  std::vector<std::string> source_urls;

  friend bool operator==(const AssembledText &, const AssembledText &) = default;
};

// Token-level containment over normalized text: the gold answer's tokens
// must appear as a contiguous run, so "ايفل" never matches inside "ايفلية".
bool contains_answer(std::string_view clean_text, std::string_view gold_answer);

// Number of distinct keywords present among the text's normalized tokens.
int keyword_coverage(std::string_view clean_text,
                     const std::vector<std::string> &keywords);

// Sentences split on . ؟ ! ؛ and newline; terminators stay with their
// sentence; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view clean_text);

// Best sentence (gold-bearing first, then by coverage, earliest on ties)
// widened by one sentence of context per side.
std::optional<Passage> extract_passage(std::string_view clean_text,
                                       const Question &question);

// Scores one cleaned page against the question.
CandidateText score_candidate(std::string url, int rank, std::string clean_text,
                              const Question &question);

// The keep rule: gold-bearing when gold is known, otherwise any keyword hit.
bool qualifies(const CandidateText &c);

std::optional<AssembledText> build_corpus_text(
    const std::vector<CandidateText> &candidates, const Question &question,
    int max_passages = kDefaultMaxPassages);

// Highlight ranges in UTF-16 code units of clean_text.
struct MatchSpans {
  std::vector<std::pair<std::size_t, std::size_t>> gold;
  std::vector<std::pair<std::size_t, std::size_t>> keywords;
};
MatchSpans locate_matches(std::string_view clean_text, const Question &question);

}  // namespace qtc

#endif  // QTC_ANSWER_FILTER_H_
