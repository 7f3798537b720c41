#ifndef QTC_TESTS_SUPPORT_H_
#define QTC_TESTS_SUPPORT_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtc/corpus_store.h"
#include "qtc/question_bank.h"
#include "qtc/transport.h"

namespace qtc::testing {

inline const std::filesystem::path kFixtureDir = QTC_FIXTURE_DIR "/miniweb";
inline const std::filesystem::path kAdversarialDir = QTC_FIXTURE_DIR "/adversarial";

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qtc-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path &p, const std::string &content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline Question make_question(const std::string &id, const std::string &text,
                              Domain domain = Domain::kSport,
                              std::optional<std::string> gold = std::nullopt,
                              Source source = Source::kForum) {
  Question q;
  q.id = id;
  q.text = text;
  q.domain = domain;
  q.source = source;
  q.gold_answer = std::move(gold);
  return analyze_question(std::move(q));
}

// An entry with `urls` candidates of which the first `correct` qualify.
inline CorpusEntry make_entry(const Question &q, int urls, int correct,
                              AcceptedBy by = AcceptedBy::kAuto) {
  CorpusEntry e;
  e.question = q;
  e.assembled.question_id = q.id;
  e.assembled.text = "نص الجواب عن " + q.id;
  e.assembled.passage_count = 1;
  for (int j = 0; j < urls; ++j) {
    CandidateUrl c;
    c.record = make_url_record(
        "http://site" + std::to_string(j) + ".example/" + q.id, j + 1);
    c.status = FetchStatus::ok();
    c.qualified = j < correct;
    e.candidate_urls.push_back(std::move(c));
  }
  e.assembled.source_urls = {e.candidate_urls.front().record.url};
  e.accepted_by = by;
  e.created_at = std::chrono::sys_seconds{std::chrono::seconds{1700000000}};
  return e;
}

// n questions, urls candidates each, correct of them qualified; domains
// cycle through all five.
inline CorpusStore uniform_store(int n, int urls, int correct) {
  CorpusStore store;
  for (int i = 0; i < n; ++i) {
    Question q = make_question("s" + std::to_string(i + 1),
                               "ما عاصمة البلد رقم " + std::to_string(i + 1) + "؟",
                               kAllDomains[static_cast<std::size_t>(i) % kAllDomains.size()]);
    store.add_entry(make_entry(q, urls, correct));
  }
  return store;
}

// Test clock: now() moves only through sleep_until/advance; every sleep
// target is recorded.
class ManualClock : public Clock {
 public:
  explicit ManualClock(TimePoint start = TimePoint{std::chrono::seconds{1000}})
      : now_(start) {}
  TimePoint now() override {
    std::lock_guard<std::mutex> lock(mu_);
    return now_;
  }
  void sleep_until(TimePoint t) override {
    std::lock_guard<std::mutex> lock(mu_);
    if (t > now_) now_ = t;
  }
  void advance(std::chrono::milliseconds d) {
    std::lock_guard<std::mutex> lock(mu_);
    now_ += d;
  }

 private:
  std::mutex mu_;
  TimePoint now_;
};

// Scripted transport: responses by exact URL, 404 otherwise; counts
// requests and records their order.
class FakeTransport : public Transport {
 public:
  void set(const std::string &url, HttpResult r) {
    std::lock_guard<std::mutex> lock(mu_);
    routes_[url] = std::move(r);
  }
  void set_html(const std::string &url, const std::string &body) {
    HttpResponse r;
    r.status = 200;
    r.content_type = "text/html; charset=utf-8";
    r.body = body;
    set(url, r);
  }
  HttpResult get(const HttpRequest &req) override {
    std::lock_guard<std::mutex> lock(mu_);
    ++count_;
    log_.push_back(req.url);
    auto it = routes_.find(req.url);
    if (it == routes_.end()) {
      HttpResponse r;
      r.status = 404;
      r.content_type = "text/html";
      return r;
    }
    HttpResult out = it->second;
    if (auto *resp = std::get_if<HttpResponse>(&out)) {
      if (resp->body.size() > req.max_body_bytes) {
        resp->body.resize(req.max_body_bytes + 1);
        resp->truncated = true;
      }
    }
    return out;
  }
  int count() {
    std::lock_guard<std::mutex> lock(mu_);
    return count_;
  }
  std::vector<std::string> log() {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
  }

 private:
  std::mutex mu_;
  std::map<std::string, HttpResult> routes_;
  int count_ = 0;
  std::vector<std::string> log_;
};

}  // namespace qtc::testing

#endif  // QTC_TESTS_SUPPORT_H_
