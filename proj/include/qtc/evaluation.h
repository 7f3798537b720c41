#ifndef QTC_EVALUATION_H_
#define QTC_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qtc/corpus_store.h"

namespace qtc {

struct UrlLabel {
  std::string question_id;
  std::string url;
  bool correct = false;
};

// Exact count ratio; value() is only for display.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }
};

// Σcorrect / Σlabels. Throws Error(kEmpty) on an empty label set.
Ratio micro_precision(const std::vector<UrlLabel> &labels);

struct QuestionEval {
  std::string question_id;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  double precision = 0.0;  // 0 when total is 0
};

struct EvalReport {
  Ratio micro;
  double micro_precision = 0.0;
  double macro_precision = 0.0;
  std::vector<QuestionEval> per_question;  // in store order
};

// Questions without labels get total 0 and stay out of the macro mean.
// Throws kNotFound for a label whose question is not in the store and
// kDuplicate for a repeated (question, url) pair.
EvalReport evaluation_report(const std::vector<UrlLabel> &labels,
                             const CorpusStore &store);

// Labels file: question_id TAB url TAB {1,0}, one per line.
std::vector<UrlLabel> parse_labels(std::string_view content);
std::vector<UrlLabel> load_labels(const std::filesystem::path &path);

// One label per stored candidate URL, correct = its qualified flag.
std::vector<UrlLabel> auto_labels(const CorpusStore &store);

std::string format_report(const EvalReport &report);

}  // namespace qtc

#endif  // QTC_EVALUATION_H_
