#include "qtc/evaluation.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qtc/error.h"

namespace qtc {
namespace {

std::string label_key(const std::string &url) {
  try {
    return normalize_url(url);
  } catch (const Error &) {
    return url;
  }
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Ratio micro_precision(const std::vector<UrlLabel> &labels) {
  if (labels.empty()) throw Error(ErrorCode::kEmpty, "no labels");
  Ratio r;
  r.den = labels.size();
  for (const auto &l : labels) r.num += l.correct ? 1 : 0;
  return r;
}

EvalReport evaluation_report(const std::vector<UrlLabel> &labels,
                             const CorpusStore &store) {
  std::map<std::string, std::size_t> index;
  EvalReport report;
  for (const auto &e : store.entries()) {
    index.emplace(e.question.id, report.per_question.size());
    report.per_question.push_back(QuestionEval{e.question.id, 0, 0, 0.0});
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &l : labels) {
    auto it = index.find(l.question_id);
    if (it == index.end()) {
      throw Error(ErrorCode::kNotFound,
                  "label references unknown question id '" + l.question_id + "'");
    }
    if (!seen.emplace(l.question_id, label_key(l.url)).second) {
      throw Error(ErrorCode::kDuplicate,
                  "duplicate label for " + l.question_id + " " + l.url);
    }
    auto &q = report.per_question[it->second];
    ++q.total;
    if (l.correct) ++q.correct;
  }
  report.micro = micro_precision(labels);
  report.micro_precision = report.micro.value();
  double sum = 0.0;
  std::size_t counted = 0;
  for (auto &q : report.per_question) {
    if (q.total == 0) continue;
    q.precision = static_cast<double>(q.correct) / static_cast<double>(q.total);
    sum += q.precision;
    ++counted;
  }
  report.macro_precision = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
  return report;
}

std::vector<UrlLabel> parse_labels(std::string_view content) {
  std::vector<UrlLabel> labels;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos ||
        line.find('\t', t2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kParse, "labels line " + std::to_string(line_no) +
                                         ": expected question_id TAB url TAB 0|1");
    }
    std::string_view flag = line.substr(t2 + 1);
    if (flag != "0" && flag != "1") {
      throw Error(ErrorCode::kParse, "labels line " + std::to_string(line_no) +
                                         ": label must be 0 or 1");
    }
    UrlLabel l;
    l.question_id = std::string(line.substr(0, t1));
    l.url = std::string(line.substr(t1 + 1, t2 - t1 - 1));
    l.correct = flag == "1";
    if (l.question_id.empty() || l.url.empty()) {
      throw Error(ErrorCode::kParse,
                  "labels line " + std::to_string(line_no) + ": empty field");
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

std::vector<UrlLabel> load_labels(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open labels file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels(buf.str());
}

std::vector<UrlLabel> auto_labels(const CorpusStore &store) {
  std::vector<UrlLabel> labels;
  for (const auto &e : store.entries()) {
    for (const auto &c : e.candidate_urls) {
      labels.push_back(UrlLabel{e.question.id, c.record.url, c.qualified});
    }
  }
  return labels;
}

std::string format_report(const EvalReport &report) {
  std::string out;
  out += "micro_precision\t" + fixed6(report.micro_precision) + "\n";
  out += "micro_counts\t" + std::to_string(report.micro.num) + "/" +
         std::to_string(report.micro.den) + "\n";
  out += "macro_precision\t" + fixed6(report.macro_precision) + "\n";
  out += "question_id\tcorrect\ttotal\tprecision\n";
  for (const auto &q : report.per_question) {
    out += q.question_id + "\t" + std::to_string(q.correct) + "\t" +
           std::to_string(q.total) + "\t" + fixed6(q.precision) + "\n";
  }
  return out;
}

}  // namespace qtc
