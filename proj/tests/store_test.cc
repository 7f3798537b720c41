#include <doctest.h>

#include <cmath>

#include "qtc/corpus_store.h"
#include "qtc/error.h"
#include "qtc/evaluation.h"
#include "support.h"

using namespace qtc;
using namespace qtc::testing;

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

Question q1() {
  return make_question("q1", "من صمم برج ايفل؟", Domain::kCultureDiscoveries,
                       std::string("غوستاف ايفل"));
}

}  // namespace

TEST_CASE("add then load round-trips an entry") {
  TempDir dir;
  auto store = CorpusStore::open(dir.path());
  auto e = make_entry(q1(), 4, 2, AcceptedBy::kHuman);
  e.assembled.text = "سطر\tمع\nفواصل\n";
  e.note = std::string("ملاحظة\tمع سطر\nجديد");
  store.add_entry(e);
  auto loaded = load_corpus(dir.path());
  REQUIRE(loaded.entries().size() == 1);
  CHECK(loaded.entries()[0] == e);
  CHECK(loaded == store);
  CHECK(read_file(dir / "CultureDiscoveries/q1.txt") == e.assembled.text + "\n");
}

TEST_CASE("store invariants") {
  CorpusStore store;
  store.add_entry(make_entry(q1(), 3, 1));
  CHECK(code_of([&] { store.add_entry(make_entry(q1(), 3, 1)); }) == ErrorCode::kDuplicate);

  auto other = make_entry(make_question("q2", "متى ولد؟"), 3, 1);
  other.assembled.question_id = "q9";
  CHECK(code_of([&] { store.add_entry(other); }) == ErrorCode::kInvalidArgument);
  auto no_urls = make_entry(make_question("q3", "متى ولد؟"), 1, 1);
  no_urls.candidate_urls.clear();
  CHECK(code_of([&] { store.add_entry(no_urls); }) == ErrorCode::kInvalidArgument);
  CHECK(store.entries().size() == 1);
}

TEST_CASE("empty store round-trips") {
  TempDir dir;
  save_corpus(CorpusStore{}, dir.path());
  auto loaded = load_corpus(dir.path());
  CHECK(loaded.entries().empty());
  CHECK(read_file(dir / kManifestName).empty());
}

TEST_CASE("5 entries across 3 domains round-trip with identical stats") {
  TempDir dir;
  CorpusStore store;
  const Domain domains[] = {Domain::kSport, Domain::kSport, Domain::kWorldNews,
                            Domain::kHealthMedicine, Domain::kWorldNews};
  for (int i = 0; i < 5; ++i) {
    auto q = make_question("e" + std::to_string(i), "ما عاصمة البلد؟", domains[i]);
    store.add_entry(make_entry(q, 23 + i % 4, 13 + i % 4));
  }
  save_corpus(store, dir.path());
  auto loaded = load_corpus(dir.path());
  CHECK(loaded == store);
  CHECK(compute_stats(loaded) == compute_stats(store));
  auto s = compute_stats(loaded);
  CHECK(s.per_domain_counts[static_cast<std::size_t>(Domain::kSport)] == 2);
  CHECK(s.per_domain_counts[static_cast<std::size_t>(Domain::kWorldNews)] == 2);
  CHECK(s.per_domain_counts[static_cast<std::size_t>(Domain::kHealthMedicine)] == 1);
}

TEST_CASE("load errors name the problem") {
  TempDir dir;
  CorpusStore store = CorpusStore::open(dir.path());
  store.add_entry(make_entry(q1(), 3, 1));
  std::filesystem::remove(dir / "CultureDiscoveries/q1.txt");
  try {
    load_corpus(dir.path());
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNotFound);
    CHECK(std::string(e.what()).find("q1.txt") != std::string::npos);
  }
  write_file(dir / kManifestName, "q1\tSport\n");
  CHECK(code_of([&] { load_corpus(dir.path()); }) == ErrorCode::kParse);
  TempDir empty;
  CHECK(code_of([&] { load_corpus(empty.path()); }) == ErrorCode::kNotFound);
}

TEST_CASE("a gold answer of \"-\" survives the manifest") {
  TempDir dir;
  auto store = CorpusStore::open(dir.path());
  auto q = make_question("d", "ما الرمز؟", Domain::kSport, std::string("-"));
  store.add_entry(make_entry(q, 2, 1));
  auto loaded = load_corpus(dir.path());
  CHECK(loaded.entries()[0].question.gold_answer == std::optional<std::string>("-"));
}

TEST_CASE("replace_candidates rewrites the URL list and manifest counts") {
  TempDir dir;
  auto store = CorpusStore::open(dir.path());
  store.add_entry(make_entry(q1(), 3, 2));
  auto list = store.find("q1")->candidate_urls;
  list[0].qualified = false;
  store.replace_candidates("q1", list);
  auto loaded = load_corpus(dir.path());
  CHECK(loaded.find("q1")->qualified_count() == 1);
  CHECK(code_of([&] { store.replace_candidates("nope", list); }) == ErrorCode::kNotFound);
}

TEST_CASE("compute_stats examples") {
  auto big = compute_stats(uniform_store(115, 25, 15));
  CHECK(big.n_questions == 115);
  CHECK(big.total_urls == 2875);
  CHECK(big.urls_per_question == std::pair<std::uint64_t, std::uint64_t>{25, 25});
  CHECK(big.n_texts == 115);
  CHECK(big.correct_urls_per_question == std::pair<std::uint64_t, std::uint64_t>{15, 15});

  CHECK(compute_stats(CorpusStore{}) == CorpusStats{});

  CorpusStore one;
  one.add_entry(make_entry(q1(), 23, 13));
  auto s = compute_stats(one);
  CHECK(s.n_questions == 1);
  CHECK(s.total_urls == 23);
  CHECK(s.urls_per_question == std::pair<std::uint64_t, std::uint64_t>{23, 23});
  CHECK(s.correct_urls_per_question == std::pair<std::uint64_t, std::uint64_t>{13, 13});
}

TEST_CASE("format_stats layout") {
  CorpusStore one;
  one.add_entry(make_entry(q1(), 23, 13));
  CHECK(format_stats(compute_stats(one)) ==
        "n_questions\t1\n"
        "total_urls\t23\n"
        "urls_per_question\t23-23\n"
        "n_texts\t1\n"
        "correct_urls_per_question\t13-13\n"
        "domain.Sport\t0\n"
        "domain.HistoryIslam\t0\n"
        "domain.CultureDiscoveries\t1\n"
        "domain.WorldNews\t0\n"
        "domain.HealthMedicine\t0\n");
}

TEST_CASE("micro precision examples") {
  auto labels = [](int correct, int total, const std::string &id) {
    std::vector<UrlLabel> out;
    for (int i = 0; i < total; ++i) {
      out.push_back({id, "http://u" + std::to_string(i) + ".example/", i < correct});
    }
    return out;
  };
  auto r = micro_precision(labels(15, 25, "a"));
  CHECK(r.num * 5 == r.den * 3);
  CHECK(micro_precision(labels(4, 4, "a")).value() == 1.0);
  auto half = micro_precision(labels(13, 26, "a"));
  CHECK(half.num * 2 == half.den);
  CHECK(code_of([] { micro_precision({}); }) == ErrorCode::kEmpty);
}

TEST_CASE("evaluation_report micro and macro") {
  CorpusStore store;
  store.add_entry(make_entry(make_question("a", "متى ولد؟"), 26, 13));
  store.add_entry(make_entry(make_question("b", "متى مات؟"), 23, 16));
  store.add_entry(make_entry(make_question("c", "متى عاش؟"), 5, 5));
  std::vector<UrlLabel> labels;
  for (const auto &e : store.entries()) {
    if (e.question.id == "c") continue;
    for (const auto &c : e.candidate_urls) {
      labels.push_back({e.question.id, c.record.url, c.qualified});
    }
  }
  auto rep = evaluation_report(labels, store);
  CHECK(rep.micro.num == 29);
  CHECK(rep.micro.den == 49);
  CHECK(std::abs(rep.micro_precision - 0.591837) < 5e-7);
  CHECK(std::abs(rep.macro_precision - 0.597826) < 5e-7);
  REQUIRE(rep.per_question.size() == 3);
  CHECK(rep.per_question[2].total == 0);
  CHECK(format_report(rep).rfind("micro_precision\t0.591837\nmicro_counts\t29/49\n"
                                 "macro_precision\t0.597826\n",
                                 0) == 0);

  labels.push_back({"qX", "http://x.example/", true});
  try {
    evaluation_report(labels, store);
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNotFound);
    CHECK(std::string(e.what()).find("qX") != std::string::npos);
  }
  labels.pop_back();
  labels.push_back(labels.front());
  CHECK(code_of([&] { evaluation_report(labels, store); }) == ErrorCode::kDuplicate);
}

TEST_CASE("single fully correct question") {
  CorpusStore store;
  store.add_entry(make_entry(make_question("a", "متى ولد؟"), 4, 4));
  auto rep = evaluation_report(auto_labels(store), store);
  CHECK(rep.micro_precision == 1.0);
  CHECK(rep.macro_precision == 1.0);
}

TEST_CASE("labels file parsing") {
  auto l = parse_labels("# c\nq1\thttp://a.example/\t1\r\n\nq2\thttp://b.example/\t0\n");
  REQUIRE(l.size() == 2);
  CHECK(l[0].correct);
  CHECK_FALSE(l[1].correct);
  CHECK(code_of([] { parse_labels("q1\thttp://a/\t2\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { parse_labels("q1 http://a/ 1\n"); }) == ErrorCode::kParse);
  CHECK(parse_labels("").empty());
}
