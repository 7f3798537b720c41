#include "qtc/pipeline.h"

#include <atomic>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

#include "qtc/answer_filter.h"
#include "qtc/error.h"
#include "qtc/text_extraction.h"

namespace qtc {
namespace {

namespace fs = std::filesystem;

std::shared_ptr<Clock> make_clock(const BuildConfig &config,
                                  const PipelineSeams &seams) {
  if (seams.clock) return seams.clock;
  if (config.fixed_clock) return std::make_shared<FixedClock>(*config.fixed_clock);
  return std::make_shared<SystemClock>();
}

bool same_path(const fs::path &a, const fs::path &b) {
  std::error_code ec;
  auto ca = fs::weakly_canonical(a, ec);
  if (ec) ca = fs::absolute(a).lexically_normal();
  auto cb = fs::weakly_canonical(b, ec);
  if (ec) cb = fs::absolute(b).lexically_normal();
  return ca == cb;
}

}  // namespace

void BuildConfig::validate() const {
  if (max_urls < 1) throw Error(ErrorCode::kInvalidArgument, "max_urls must be >= 1");
  if (max_passages < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_passages must be >= 1");
  }
  if (questions_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no questions file given");
  }
  if (out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "no output dir given");
  if (cache_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "no cache dir given");
  if (same_path(out_dir, cache_dir)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cache dir must differ from the output dir");
  }
  provider.validate();
  fetch.validate();
  if (!fs::is_regular_file(questions_path)) {
    throw Error(ErrorCode::kNotFound,
                "questions file not found: " + questions_path.string());
  }
  if (provider.kind == ProviderConfig::Kind::kFixture) {
    if (!fs::is_directory(*provider.fixture_dir)) {
      throw Error(ErrorCode::kNotFound,
                  "fixture dir not found: " + provider.fixture_dir->string());
    }
    if (!fs::is_regular_file(*provider.fixture_dir / "manifest")) {
      throw Error(ErrorCode::kNotFound,
                  "fixture manifest missing in " + provider.fixture_dir->string());
    }
  }
}

std::optional<CorpusEntry> build_entry(const Question &question,
                                       SearchProvider &provider,
                                       PageFetcher &fetcher,
                                       const fs::path &cache_dir, int max_urls,
                                       int max_passages, Clock &clock,
                                       const LogFn &log) {
  std::vector<UrlRecord> urls;
  try {
    urls = provider.search(build_query(question, max_urls));
  } catch (const Error &e) {
    log(LogLevel::kWarning, question.id + ": search failed: " + e.what());
    return std::nullopt;
  }
  if (urls.empty()) {
    log(LogLevel::kWarning, question.id + ": search returned no URLs");
    return std::nullopt;
  }

  std::vector<CandidateText> candidates;
  std::vector<CandidateUrl> candidate_urls;
  for (const auto &u : urls) {
    CandidateUrl cu;
    cu.record = u;
    PageRecord page = fetcher.get_or_fetch(u, cache_dir);
    cu.status = page.status;
    if (!page.status.is_ok()) {
      log(LogLevel::kInfo, question.id + ": " + u.url + ": " +
                               page.status.to_string() + ", next URL");
      candidate_urls.push_back(std::move(cu));
      continue;
    }
    std::string clean;
    try {
      clean = filter_foreign_tokens(html_to_text(*page.raw_html, page.encoding)).text;
    } catch (const Error &e) {
      log(LogLevel::kInfo, question.id + ": " + u.url + ": " + e.what());
      candidate_urls.push_back(std::move(cu));
      continue;
    }
    CandidateText c = score_candidate(u.url, u.rank, std::move(clean), question);
    cu.qualified = qualifies(c);
    candidate_urls.push_back(std::move(cu));
    candidates.push_back(std::move(c));
  }

  auto assembled = build_corpus_text(candidates, question, max_passages);
  if (!assembled) {
    log(LogLevel::kWarning,
        question.id + ": no candidate text qualifies (" +
            std::to_string(urls.size()) + " URLs tried)");
    return std::nullopt;
  }
  CorpusEntry entry;
  entry.question = question;
  entry.assembled = std::move(*assembled);
  entry.candidate_urls = std::move(candidate_urls);
  entry.accepted_by = AcceptedBy::kAuto;
  entry.created_at = std::chrono::time_point_cast<std::chrono::seconds>(clock.now());
  return entry;
}

BuildResult build_corpus(const BuildConfig &config, const LogFn &raw_log,
                         const PipelineSeams &seams) {
  std::mutex log_mu;
  const LogFn log = [&](LogLevel level, const std::string &msg) {
    if (!raw_log) return;
    std::lock_guard<std::mutex> lock(log_mu);
    raw_log(level, msg);
  };
  config.validate();
  auto questions = load_questions(config.questions_path);
  auto clock = make_clock(config, seams);

  std::shared_ptr<Transport> page_transport = seams.page_transport;
  std::shared_ptr<Transport> search_transport = seams.search_transport;
  if (!page_transport) {
    if (config.provider.kind == ProviderConfig::Kind::kFixture) {
      page_transport = std::make_shared<FixtureTransport>(*config.provider.fixture_dir);
    } else {
      page_transport = std::make_shared<HttpTransport>();
    }
  }
  if (!search_transport) search_transport = std::make_shared<HttpTransport>();
  auto provider = make_search_provider(config.provider, search_transport, clock);
  PageFetcher fetcher(config.fetch, page_transport, clock);

  CorpusStore store = CorpusStore::open(config.out_dir);
  BuildResult result;

  std::vector<const Question *> todo;
  for (const auto &q : questions) {
    if (store.contains(q.id)) {
      ++result.skipped_existing;
      log(LogLevel::kInfo, q.id + ": already in corpus, skipped");
    } else {
      todo.push_back(&q);
    }
  }

  // Workers pull questions in order; the calling thread commits results in
  // the same order so manifests do not depend on scheduling.
  std::vector<std::promise<std::optional<CorpusEntry>>> promises(todo.size());
  std::vector<std::future<std::optional<CorpusEntry>>> futures;
  futures.reserve(todo.size());
  for (auto &p : promises) futures.push_back(p.get_future());
  std::atomic<std::size_t> next{0};
  const std::size_t n_workers = std::min<std::size_t>(
      todo.size(), static_cast<std::size_t>(config.fetch.max_concurrent));
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < todo.size(); i = next++) {
        try {
          promises[i].set_value(build_entry(*todo[i], *provider, fetcher,
                                            config.cache_dir, config.max_urls,
                                            config.max_passages, *clock, log));
        } catch (...) {
          promises[i].set_exception(std::current_exception());
        }
      }
    });
  }

  std::exception_ptr failure;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      auto entry = futures[i].get();
      if (!entry) {
        ++result.without_text;
        continue;
      }
      if (!failure) {
        store.add_entry(std::move(*entry));
        ++result.added;
        log(LogLevel::kInfo, todo[i]->id + ": stored");
      }
    } catch (...) {
      // Cache or corpus I/O failure: stop committing, drain the workers.
      if (!failure) failure = std::current_exception();
    }
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);

  result.stats = compute_stats(store);
  result.total_entries = store.entries().size();
  return result;
}

}  // namespace qtc
