#include <doctest.h>

#include "qtc/arabic_normalizer.h"
#include "qtc/error.h"
#include "qtc/question_bank.h"
#include "qtc/utf8.h"
#include "support.h"

using namespace qtc;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("utf8 decode replaces bad bytes") {
  auto cps = utf8::decode("a\xff" "b\xd8");
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == 0xFFFD);
  CHECK(cps[2] == U'b');
  CHECK(cps[3] == 0xFFFD);
  CHECK(utf8::encode(utf8::decode("برج")) == "برج");
  CHECK(utf8::utf16_width(U'\U0001F600') == 2);
}

TEST_CASE("normalize_text rule table") {
  CHECK(normalize_text("بُرْجُ إِيفل").value() == "برج ايفل");
  CHECK(normalize_text("").value().empty());
  CHECK(normalize_text("أإآٱ").value() == "اااا");
  CHECK(normalize_text("مكتبةٌ على مستشفى").value() == "مكتبه علي مستشفي");
  CHECK(normalize_text("مؤمن شاطئ").value() == "مومن شاطي");
  CHECK(normalize_text("كـــتاب").value() == "كتاب");
  CHECK(normalize_text("  Eiffel\t\nÉCOLE  ").value() == "eiffel école");
}

TEST_CASE("normalize_text is idempotent on the examples") {
  for (const char *s : {"بُرْجُ إِيفل", "  a  B ", "ـ", "ًٌٍ"}) {
    auto once = normalize_text(s);
    CHECK(normalize_text(once.value()) == once);
  }
}

TEST_CASE("tokenize splits on whitespace and punctuation") {
  CHECK(normalized_tokens("من صمم برج ايفل؟") ==
        std::vector<std::string>{"من", "صمم", "برج", "ايفل"});
  CHECK(normalized_tokens("ا.ب") == std::vector<std::string>{"ا", "ب"});
  CHECK(normalized_tokens("").empty());
  CHECK(normalized_tokens("«قال»، ثم؛ ذهب") ==
        std::vector<std::string>{"قال", "ثم", "ذهب"});
  CHECK(normalized_tokens("a—b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokenize_with_offsets agrees with normalized_tokens") {
  const std::string text = "قال: غُوستاف إيفل، 1889!";
  auto spans = tokenize_with_offsets(text);
  std::vector<std::string> norm;
  for (const auto &s : spans) norm.push_back(s.normalized);
  CHECK(norm == normalized_tokens(text));
  REQUIRE(spans.size() == 4);
  CHECK(text.substr(spans[1].byte_begin, spans[1].byte_end - spans[1].byte_begin) ==
        "غُوستاف");
  CHECK(spans[0].utf16_begin == 0);
  CHECK(spans[0].utf16_end == 3);
  CHECK(spans[1].utf16_begin == 5);
}

TEST_CASE("classify_interrogative") {
  CHECK(classify_interrogative("من صمم برج ايفل؟") == QuestionType::kWho);
  CHECK(classify_interrogative("متى ولد؟") == QuestionType::kWhen);
  CHECK(classify_interrogative("ما هو الانترنت؟") == QuestionType::kWhat);
  CHECK(classify_interrogative("ماذا اكتشف نيوتن؟") == QuestionType::kWhat);
  CHECK(classify_interrogative("أين تقع مكة؟") == QuestionType::kWhere);
  CHECK(classify_interrogative("كم عدد الكواكب؟") == QuestionType::kHowMany);
  CHECK(code_of([] { classify_interrogative("هل الأرض كروية؟"); }) ==
        ErrorCode::kUnsupported);
  CHECK(code_of([] { classify_interrogative("   "); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("extract_keywords") {
  CHECK(extract_keywords("من صمم برج ايفل؟") ==
        std::vector<std::string>{"صمم", "برج", "ايفل"});
  CHECK(extract_keywords("ما هو الانترنت؟") == std::vector<std::string>{"الانترنت"});
  CHECK(code_of([] { extract_keywords("من؟"); }) == ErrorCode::kEmpty);
}

TEST_CASE("extract_keywords never yields stopwords and keeps token order") {
  const char *questions[] = {"من صمم برج ايفل؟", "متى تأسست الامم المتحدة؟",
                             "أين ولد ابن سينا في بخارى؟",
                             "ما الذي اكتشفه العالم عن الضوء؟"};
  for (const char *text : questions) {
    auto kws = extract_keywords(text);
    auto tokens = normalized_tokens(text);
    std::size_t pos = 1;  // after the interrogative
    for (const auto &k : kws) {
      CHECK_FALSE(is_stopword(k));
      while (pos < tokens.size() && tokens[pos] != k) ++pos;
      CHECK(pos < tokens.size());
      ++pos;
    }
  }
}

TEST_CASE("analyze_question composes the analysis") {
  Question q;
  q.id = "q1";
  q.text = "من صمم برج ايفل؟";
  q = analyze_question(q);
  CHECK(q.qtype == QuestionType::kWho);
  CHECK(q.keywords == std::vector<std::string>{"صمم", "برج", "ايفل"});
  CHECK(q.focus == std::optional<std::string>("صمم"));
  CHECK(q.expected_answer == AnswerType::kPerson);
  CHECK(analyze_question(q) == q);

  Question w;
  w.id = "q2";
  w.text = "متى تأسست الامم المتحدة؟";
  w = analyze_question(w);
  CHECK(w.qtype == QuestionType::kWhen);
  CHECK(w.expected_answer == AnswerType::kDate);
}

TEST_CASE("answer type mapping") {
  CHECK(map_answer_type(QuestionType::kWho) == AnswerType::kPerson);
  CHECK(map_answer_type(QuestionType::kWhen) == AnswerType::kDate);
  CHECK(map_answer_type(QuestionType::kHowMany) == AnswerType::kNumber);
  CHECK(map_answer_type(QuestionType::kWhere) == AnswerType::kLocation);
  CHECK(map_answer_type(QuestionType::kWhat) == AnswerType::kEntity);
}

TEST_CASE("stopword list") {
  CHECK(stopword_list_version() == "1");
  for (const char *w : {"من", "ما", "متى", "أين", "كم", "هل", "هو", "هي", "في", "على",
                        "إلى", "عن", "الذي", "التي", "ماذا", "لماذا", "كيف"}) {
    CHECK_MESSAGE(is_stopword(w), w);
  }
  CHECK(is_stopword("الي"));
  CHECK_FALSE(is_stopword("برج"));
}

TEST_CASE("parse_questions") {
  auto qs = parse_questions(
      "# bank\n"
      "id=q1\ttext=من صمم برج ايفل؟\tdomain=HistoryIslam\tsource=Forum\n"
      "\n"
      "id=q2\ttext=متى ولد؟\tdomain=رياضة\tsource=TREC\tgold_answer=a\\tb\n");
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].id == "q1");
  CHECK(qs[0].qtype == QuestionType::kWho);
  CHECK(qs[0].domain == Domain::kHistoryIslam);
  CHECK_FALSE(qs[0].gold_answer.has_value());
  CHECK(qs[1].domain == Domain::kSport);
  CHECK(qs[1].gold_answer == std::optional<std::string>("a\tb"));
  CHECK(parse_questions(format_question_record(qs[1]) + "\n") ==
        std::vector<Question>{qs[1]});
}

TEST_CASE("parse_questions errors") {
  try {
    parse_questions("");
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kEmpty);
    CHECK(std::string(e.what()) == "empty question bank");
  }
  try {
    parse_questions(
        "id=q1\ttext=متى ولد؟\tdomain=Sport\tsource=TREC\n"
        "id=q1\ttext=متى مات؟\tdomain=Sport\tsource=TREC\n");
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDuplicate);
    CHECK(std::string(e.what()).find("q1") != std::string::npos);
  }
  try {
    parse_questions("id=q1\ttext=متى ولد؟\tdomain=Space\tsource=TREC\n");
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK(code_of([] { parse_questions("id=../x\ttext=متى ولد؟\tdomain=Sport\tsource=TREC\n"); }) ==
        ErrorCode::kParse);
}

TEST_CASE("field escaping round-trips") {
  for (std::string s : {"", "-", "a\tb\nc\\d\r", "\\-", "بغداد"}) {
    CHECK(unescape_field(escape_field(s)) == std::optional<std::string>(s));
  }
  CHECK_FALSE(unescape_field("bad\\q").has_value());
}
