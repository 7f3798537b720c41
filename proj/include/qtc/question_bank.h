#ifndef QTC_QUESTION_BANK_H_
#define QTC_QUESTION_BANK_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qtc {

enum class QuestionType { kWho, kWhat, kWhen, kWhere, kHowMany };
enum class AnswerType { kPerson, kEntity, kDate, kLocation, kNumber };
enum class Domain {
  kSport,
  kHistoryIslam,
  kCultureDiscoveries,
  kWorldNews,
  kHealthMedicine,
};
enum class Source { kTrec, kClef, kForum, kFaq };

inline constexpr std::array<QuestionType, 5> kAllQuestionTypes = {
    QuestionType::kWho, QuestionType::kWhat, QuestionType::kWhen,
    QuestionType::kWhere, QuestionType::kHowMany};
inline constexpr std::array<Domain, 5> kAllDomains = {
    Domain::kSport, Domain::kHistoryIslam, Domain::kCultureDiscoveries,
    Domain::kWorldNews, Domain::kHealthMedicine};
inline constexpr std::array<Source, 4> kAllSources = {
    Source::kTrec, Source::kClef, Source::kForum, Source::kFaq};

const char *question_type_name(QuestionType t);
// The Arabic interrogative for t, e.g. "متى" for kWhen.
const char *interrogative_token(QuestionType t);
const char *answer_type_name(AnswerType t);
const char *domain_name(Domain d);
const char *domain_arabic_label(Domain d);
const char *source_name(Source s);

// Accepts the enum spelling ("HealthMedicine") or the Arabic label.
std::optional<Domain> parse_domain(std::string_view label);
std::optional<Source> parse_source(std::string_view label);

struct Question {
  std::string id;
  std::string text;
  QuestionType qtype = QuestionType::kWhat;
  std::vector<std::string> keywords;  // normalized, stopword-free
  std::optional<std::string> focus;
  AnswerType expected_answer = AnswerType::kEntity;
  Domain domain = Domain::kSport;
  Source source = Source::kForum;
  std::optional<std::string> gold_answer;

  bool analyzed() const { return !keywords.empty(); }

  friend bool operator==(const Question &, const Question &) = default;
};

// True when the normalized form of `token` is in the shipped stopword list.
bool is_stopword(std::string_view token);
std::string_view stopword_list_version();

QuestionType classify_interrogative(std::string_view text);
std::vector<std::string> extract_keywords(std::string_view text);
AnswerType map_answer_type(QuestionType t);
Question analyze_question(Question q);

// Question ids end up as file names, so they are restricted to
// [A-Za-z0-9_.-] without a leading dot.
bool is_valid_question_id(std::string_view id);

// Parses the line-oriented questions format:
//
//   id=q1<TAB>text=من صمم برج ايفل؟<TAB>domain=HistoryIslam<TAB>source=Forum
//
// Optional field gold_answer. Values may escape \t, \n and \\. Blank lines
// and lines starting with '#' are ignored. Every returned question is
// analyzed.
std::vector<Question> parse_questions(std::string_view content);
std::vector<Question> load_questions(const std::filesystem::path &path);

// Renders one question in the format parse_questions reads.
std::string format_question_record(const Question &q);

// Escaping shared by the line-oriented file formats.
std::string escape_field(std::string_view value);
std::optional<std::string> unescape_field(std::string_view value);

}  // namespace qtc

#endif  // QTC_QUESTION_BANK_H_
