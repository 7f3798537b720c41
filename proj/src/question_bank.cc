#include "qtc/question_bank.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "qtc/arabic_normalizer.h"
#include "qtc/error.h"

namespace qtc {
namespace internal {
extern const std::string_view kStopwordData;
}  // namespace internal

namespace {

struct StopwordTable {
  std::string version;
  std::unordered_set<std::string> words;
};

const StopwordTable &stopwords() {
  static const StopwordTable table = [] {
    StopwordTable t;
    std::istringstream in{std::string(internal::kStopwordData)};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        auto at = line.find("version");
        if (t.version.empty() && at != std::string::npos) {
          t.version = line.substr(at + 8);
        }
        continue;
      }
      auto norm = normalize_text(line);
      if (!norm.empty()) t.words.insert(norm.value());
    }
    return t;
  }();
  return table;
}

std::optional<QuestionType> interrogative_of(const std::string &token) {
  // Compared against normalized tokens, so أين appears as اين and متى as
  // متي.
  if (token == "من") return QuestionType::kWho;
  if (token == "ما" || token == "ماذا") return QuestionType::kWhat;
  if (token == "متي") return QuestionType::kWhen;
  if (token == "اين") return QuestionType::kWhere;
  if (token == "كم") return QuestionType::kHowMany;
  return std::nullopt;
}

bool blank(std::string_view s) {
  return normalize_text(s).empty();
}

}  // namespace

const char *question_type_name(QuestionType t) {
  switch (t) {
    case QuestionType::kWho: return "Who";
    case QuestionType::kWhat: return "What";
    case QuestionType::kWhen: return "When";
    case QuestionType::kWhere: return "Where";
    case QuestionType::kHowMany: return "HowMany";
  }
  return "?";
}

const char *interrogative_token(QuestionType t) {
  switch (t) {
    case QuestionType::kWho: return "من";
    case QuestionType::kWhat: return "ما";
    case QuestionType::kWhen: return "متى";
    case QuestionType::kWhere: return "أين";
    case QuestionType::kHowMany: return "كم";
  }
  return "";
}

const char *answer_type_name(AnswerType t) {
  switch (t) {
    case AnswerType::kPerson: return "Person";
    case AnswerType::kEntity: return "Entity";
    case AnswerType::kDate: return "Date";
    case AnswerType::kLocation: return "Location";
    case AnswerType::kNumber: return "Number";
  }
  return "?";
}

const char *domain_name(Domain d) {
  switch (d) {
    case Domain::kSport: return "Sport";
    case Domain::kHistoryIslam: return "HistoryIslam";
    case Domain::kCultureDiscoveries: return "CultureDiscoveries";
    case Domain::kWorldNews: return "WorldNews";
    case Domain::kHealthMedicine: return "HealthMedicine";
  }
  return "?";
}

const char *domain_arabic_label(Domain d) {
  switch (d) {
    case Domain::kSport: return "رياضة";
    case Domain::kHistoryIslam: return "التاريخ والإسلام";
    case Domain::kCultureDiscoveries: return "ثقافة واكتشافات";
    case Domain::kWorldNews: return "أخبار العالم";
    case Domain::kHealthMedicine: return "صحة وطب";
  }
  return "?";
}

const char *source_name(Source s) {
  switch (s) {
    case Source::kTrec: return "TREC";
    case Source::kClef: return "CLEF";
    case Source::kForum: return "Forum";
    case Source::kFaq: return "FAQ";
  }
  return "?";
}

std::optional<Domain> parse_domain(std::string_view label) {
  for (Domain d : kAllDomains) {
    if (label == domain_name(d) || label == domain_arabic_label(d)) return d;
  }
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view label) {
  for (Source s : kAllSources) {
    if (label == source_name(s)) return s;
  }
  return std::nullopt;
}

bool is_stopword(std::string_view token) {
  return stopwords().words.count(normalize_text(token).value()) > 0;
}

std::string_view stopword_list_version() { return stopwords().version; }

QuestionType classify_interrogative(std::string_view text) {
  if (blank(text)) {
    throw Error(ErrorCode::kInvalidArgument, "empty question text");
  }
  auto tokens = normalized_tokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto t = interrogative_of(tokens[i]);
    if (!t) continue;
    // من away from the front is the preposition "from".
    if (*t == QuestionType::kWho && i != 0) continue;
    return *t;
  }
  throw Error(ErrorCode::kUnsupported,
              "unsupported question (no interrogative among من ما متى أين "
              "كم): " + std::string(text));
}

std::vector<std::string> extract_keywords(std::string_view text) {
  if (blank(text)) {
    throw Error(ErrorCode::kInvalidArgument, "empty question text");
  }
  auto tokens = normalized_tokens(text);
  std::size_t first = 0;
  if (!tokens.empty() && interrogative_of(tokens[0])) first = 1;
  const auto &stop = stopwords().words;
  std::vector<std::string> keywords;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (stop.count(tokens[i]) == 0) keywords.push_back(tokens[i]);
  }
  if (keywords.empty()) {
    throw Error(ErrorCode::kEmpty,
                "empty keywords after filtering: " + std::string(text));
  }
  return keywords;
}

AnswerType map_answer_type(QuestionType t) {
  switch (t) {
    case QuestionType::kWho: return AnswerType::kPerson;
    case QuestionType::kWhat: return AnswerType::kEntity;
    case QuestionType::kWhen: return AnswerType::kDate;
    case QuestionType::kWhere: return AnswerType::kLocation;
    case QuestionType::kHowMany: return AnswerType::kNumber;
  }
  return AnswerType::kEntity;
}

Question analyze_question(Question q) {
  q.qtype = classify_interrogative(q.text);
  q.keywords = extract_keywords(q.text);
  q.focus = q.keywords.front();
  q.expected_answer = map_answer_type(q.qtype);
  return q;
}

bool is_valid_question_id(std::string_view id) {
  if (id.empty() || id.front() == '.' || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
  });
}

std::string escape_field(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::optional<std::string> unescape_field(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    char c = value[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i == value.size()) return std::nullopt;
    switch (value[i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      case '-': out.push_back('-'); break;
      default: return std::nullopt;
    }
  }
  return out;
}

std::vector<Question> parse_questions(std::string_view content) {
  std::vector<Question> questions;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (eol == content.size()) break;
      continue;
    }
    if (line.front() == '#') continue;

    auto fail = [&](ErrorCode code, const std::string &what) -> Error {
      return Error(code, "line " + std::to_string(line_no) + ": " + what);
    };

    Question q;
    std::optional<std::string> domain_label, source_label;
    std::set<std::string> keys;
    std::size_t fpos = 0;
    while (fpos <= line.size()) {
      std::size_t tab = line.find('\t', fpos);
      if (tab == std::string_view::npos) tab = line.size();
      std::string_view field = line.substr(fpos, tab - fpos);
      fpos = tab + 1;
      if (field.empty()) {
        if (tab == line.size()) break;
        continue;
      }
      auto eq = field.find('=');
      if (eq == std::string_view::npos) {
        throw fail(ErrorCode::kParse,
                   "malformed field (expected key=value): " +
                       std::string(field));
      }
      std::string key(field.substr(0, eq));
      auto value = unescape_field(field.substr(eq + 1));
      if (!value) throw fail(ErrorCode::kParse, "bad escape in field " + key);
      if (!keys.insert(key).second) {
        throw fail(ErrorCode::kParse, "repeated field " + key);
      }
      if (key == "id") {
        q.id = *value;
      } else if (key == "text") {
        q.text = *value;
      } else if (key == "domain") {
        domain_label = *value;
      } else if (key == "source") {
        source_label = *value;
      } else if (key == "gold_answer") {
        if (!blank(*value)) q.gold_answer = *value;
      } else {
        throw fail(ErrorCode::kParse, "unknown field " + key);
      }
      if (tab == line.size()) break;
    }

    for (const char *required : {"id", "text", "domain", "source"}) {
      if (!keys.count(required)) {
        throw fail(ErrorCode::kParse,
                   std::string("missing field ") + required);
      }
    }
    if (!is_valid_question_id(q.id)) {
      throw fail(ErrorCode::kParse, "invalid question id '" + q.id + "'");
    }
    if (blank(q.text)) throw fail(ErrorCode::kParse, "empty question text");
    auto domain = parse_domain(*domain_label);
    if (!domain) {
      throw fail(ErrorCode::kParse, "unknown domain label '" + *domain_label + "'");
    }
    auto source = parse_source(*source_label);
    if (!source) {
      throw fail(ErrorCode::kParse, "unknown source label '" + *source_label + "'");
    }
    q.domain = *domain;
    q.source = *source;
    if (!seen.insert(q.id).second) {
      throw fail(ErrorCode::kDuplicate, "duplicate question id '" + q.id + "'");
    }
    try {
      questions.push_back(analyze_question(std::move(q)));
    } catch (const Error &e) {
      throw fail(e.code(), e.what());
    }
    if (eol == content.size()) break;
  }
  if (questions.empty()) {
    throw Error(ErrorCode::kEmpty, "empty question bank");
  }
  return questions;
}

std::vector<Question> load_questions(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open question file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_questions(buf.str());
}

std::string format_question_record(const Question &q) {
  std::string out = "id=" + escape_field(q.id) + "\ttext=" +
                    escape_field(q.text) + "\tdomain=" + domain_name(q.domain) +
                    "\tsource=" + source_name(q.source);
  if (q.gold_answer) out += "\tgold_answer=" + escape_field(*q.gold_answer);
  return out;
}

}  // namespace qtc
