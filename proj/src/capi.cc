#include "qtc/qtcorpus.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "qtc/api_service.h"
#include "qtc/arabic_normalizer.h"
#include "qtc/corpus_store.h"
#include "qtc/error.h"
#include "qtc/evaluation.h"
#include "qtc/pipeline.h"
#include "qtc/search_provider.h"

struct qtc_config {
  qtc::BuildConfig build;
  bool cache_dir_set = false;
  qtc_log_fn log = nullptr;
  void *log_user = nullptr;
};

struct qtc_eval {
  qtc::EvalReport report;
};

struct qtc_server {
  explicit qtc_server(qtc::ServiceConfig c) : service(std::move(c)) {}
  qtc::ApiService service;
};

static_assert(static_cast<int>(qtc::ErrorCode::kInvalidArgument) + 1 ==
              QTC_ERR_INVALID_ARGUMENT);
static_assert(static_cast<int>(qtc::ErrorCode::kInternal) + 1 == QTC_ERR_INTERNAL);

namespace {

thread_local std::string last_error;

qtc_status fail(qtc_status s, const std::string &msg) {
  last_error = msg;
  return s;
}

qtc_status status_of(qtc::ErrorCode code) {
  return static_cast<qtc_status>(static_cast<int>(code) + 1);
}

template <typename F>
qtc_status guarded(F &&f) {
  try {
    f();
    last_error.clear();
    return QTC_OK;
  } catch (const qtc::Error &e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(QTC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(QTC_ERR_INTERNAL, e.what());
  }
}

char *dup_string(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

qtc::BuildConfig effective(const qtc_config &c) {
  qtc::BuildConfig b = c.build;
  if (!c.cache_dir_set && !b.out_dir.empty()) {
    b.cache_dir = b.out_dir;
    b.cache_dir += ".cache";
  }
  b.provider.timeout_ms = b.fetch.timeout_ms;
  return b;
}

void copy_stats(const qtc::CorpusStats &s, qtc_stats *out) {
  out->n_questions = s.n_questions;
  out->total_urls = s.total_urls;
  out->urls_per_question_min = s.urls_per_question.first;
  out->urls_per_question_max = s.urls_per_question.second;
  out->n_texts = s.n_texts;
  out->correct_urls_per_question_min = s.correct_urls_per_question.first;
  out->correct_urls_per_question_max = s.correct_urls_per_question.second;
  for (std::size_t i = 0; i < 5; ++i) out->per_domain_counts[i] = s.per_domain_counts[i];
}

#define QTC_REQUIRE(cond)                                                 \
  do {                                                                    \
    if (!(cond)) return fail(QTC_ERR_INVALID_ARGUMENT, "null argument"); \
  } while (0)

}  // namespace

extern "C" {

const char *qtc_last_error(void) { return last_error.c_str(); }

const char *qtc_status_name(qtc_status status) {
  if (status == QTC_OK) return "ok";
  if (status < QTC_ERR_INVALID_ARGUMENT || status > QTC_ERR_INTERNAL) return "unknown";
  return qtc::error_code_name(static_cast<qtc::ErrorCode>(static_cast<int>(status) - 1));
}

void qtc_string_free(char *s) { std::free(s); }

qtc_status qtc_config_new(qtc_config **out) {
  QTC_REQUIRE(out);
  return guarded([&] { *out = new qtc_config(); });
}

void qtc_config_free(qtc_config *config) { delete config; }

qtc_status qtc_config_set_questions(qtc_config *c, const char *path) {
  QTC_REQUIRE(c && path);
  return guarded([&] { c->build.questions_path = path; });
}

qtc_status qtc_config_set_out_dir(qtc_config *c, const char *path) {
  QTC_REQUIRE(c && path);
  return guarded([&] { c->build.out_dir = path; });
}

qtc_status qtc_config_set_cache_dir(qtc_config *c, const char *path) {
  QTC_REQUIRE(c && path);
  return guarded([&] {
    c->build.cache_dir = path;
    c->cache_dir_set = true;
  });
}

qtc_status qtc_config_set_provider(qtc_config *c, qtc_provider_kind kind) {
  QTC_REQUIRE(c);
  if (kind != QTC_PROVIDER_FIXTURE && kind != QTC_PROVIDER_LIVE) {
    return fail(QTC_ERR_INVALID_ARGUMENT, "unknown provider kind");
  }
  c->build.provider.kind = kind == QTC_PROVIDER_LIVE
                               ? qtc::ProviderConfig::Kind::kLive
                               : qtc::ProviderConfig::Kind::kFixture;
  return guarded([] {});
}

qtc_status qtc_config_set_fixture_dir(qtc_config *c, const char *path) {
  QTC_REQUIRE(c && path);
  return guarded([&] { c->build.provider.fixture_dir = path; });
}

qtc_status qtc_config_set_endpoint(qtc_config *c, const char *url) {
  QTC_REQUIRE(c && url);
  return guarded([&] { c->build.provider.endpoint = url; });
}

qtc_status qtc_config_set_max_urls(qtc_config *c, int n) {
  QTC_REQUIRE(c);
  if (n < 1) return fail(QTC_ERR_INVALID_ARGUMENT, "max_urls must be >= 1");
  c->build.max_urls = n;
  return guarded([] {});
}

qtc_status qtc_config_set_max_passages(qtc_config *c, int n) {
  QTC_REQUIRE(c);
  if (n < 1) return fail(QTC_ERR_INVALID_ARGUMENT, "max_passages must be >= 1");
  c->build.max_passages = n;
  return guarded([] {});
}

qtc_status qtc_config_set_timeout_ms(qtc_config *c, int ms) {
  QTC_REQUIRE(c);
  if (ms < 1) return fail(QTC_ERR_INVALID_ARGUMENT, "timeout must be >= 1 ms");
  c->build.fetch.timeout_ms = ms;
  return guarded([] {});
}

qtc_status qtc_config_set_per_host_interval_ms(qtc_config *c, int ms) {
  QTC_REQUIRE(c);
  if (ms < 0) return fail(QTC_ERR_INVALID_ARGUMENT, "interval must be >= 0 ms");
  c->build.fetch.per_host_interval_ms = ms;
  c->build.provider.min_interval_ms = ms;
  return guarded([] {});
}

qtc_status qtc_config_set_max_concurrent(qtc_config *c, int n) {
  QTC_REQUIRE(c);
  if (n < 1) return fail(QTC_ERR_INVALID_ARGUMENT, "max_concurrent must be >= 1");
  c->build.fetch.max_concurrent = n;
  return guarded([] {});
}

qtc_status qtc_config_set_fixed_clock(qtc_config *c, int64_t unix_seconds) {
  QTC_REQUIRE(c);
  c->build.fixed_clock = qtc::TimePoint{std::chrono::seconds{unix_seconds}};
  return guarded([] {});
}

qtc_status qtc_config_set_log(qtc_config *c, qtc_log_fn fn, void *user_data) {
  QTC_REQUIRE(c);
  c->log = fn;
  c->log_user = user_data;
  return guarded([] {});
}

qtc_status qtc_build(const qtc_config *config, qtc_build_result *out) {
  QTC_REQUIRE(config && out);
  return guarded([&] {
    qtc::LogFn log;
    if (config->log) {
      log = [fn = config->log, user = config->log_user](qtc::LogLevel level,
                                                        const std::string &msg) {
        fn(static_cast<qtc_log_level>(level), msg.c_str(), user);
      };
    }
    auto r = qtc::build_corpus(effective(*config), log);
    copy_stats(r.stats, &out->stats);
    out->added = r.added;
    out->skipped_existing = r.skipped_existing;
    out->without_text = r.without_text;
    out->total_entries = r.total_entries;
  });
}

qtc_status qtc_corpus_stats(const char *corpus_dir, qtc_stats *out) {
  QTC_REQUIRE(corpus_dir && out);
  return guarded([&] { copy_stats(qtc::compute_stats(qtc::load_corpus(corpus_dir)), out); });
}

qtc_status qtc_format_stats(const qtc_stats *stats, char **out) {
  QTC_REQUIRE(stats && out);
  return guarded([&] {
    qtc::CorpusStats s;
    s.n_questions = stats->n_questions;
    s.total_urls = stats->total_urls;
    s.urls_per_question = {stats->urls_per_question_min, stats->urls_per_question_max};
    s.n_texts = stats->n_texts;
    s.correct_urls_per_question = {stats->correct_urls_per_question_min,
                                   stats->correct_urls_per_question_max};
    for (std::size_t i = 0; i < 5; ++i) s.per_domain_counts[i] = stats->per_domain_counts[i];
    *out = dup_string(qtc::format_stats(s));
  });
}

const char *qtc_domain_name(int index) {
  if (index < 0 || index >= static_cast<int>(qtc::kAllDomains.size())) return nullptr;
  return qtc::domain_name(qtc::kAllDomains[static_cast<std::size_t>(index)]);
}

qtc_status qtc_eval_run(const char *corpus_dir, const char *labels_path,
                        qtc_eval **out) {
  QTC_REQUIRE(corpus_dir && out);
  return guarded([&] {
    auto store = qtc::load_corpus(corpus_dir);
    auto labels = labels_path ? qtc::load_labels(labels_path) : qtc::auto_labels(store);
    auto eval = std::make_unique<qtc_eval>();
    eval->report = qtc::evaluation_report(labels, store);
    *out = eval.release();
  });
}

void qtc_eval_free(qtc_eval *eval) { delete eval; }

uint64_t qtc_eval_micro_num(const qtc_eval *eval) {
  return eval ? eval->report.micro.num : 0;
}

uint64_t qtc_eval_micro_den(const qtc_eval *eval) {
  return eval ? eval->report.micro.den : 0;
}

double qtc_eval_micro_precision(const qtc_eval *eval) {
  return eval ? eval->report.micro_precision : 0.0;
}

double qtc_eval_macro_precision(const qtc_eval *eval) {
  return eval ? eval->report.macro_precision : 0.0;
}

size_t qtc_eval_question_count(const qtc_eval *eval) {
  return eval ? eval->report.per_question.size() : 0;
}

qtc_status qtc_eval_question(const qtc_eval *eval, size_t index,
                             const char **question_id, uint64_t *correct,
                             uint64_t *total) {
  QTC_REQUIRE(eval);
  if (index >= eval->report.per_question.size()) {
    return fail(QTC_ERR_NOT_FOUND, "question index out of range");
  }
  const auto &q = eval->report.per_question[index];
  if (question_id) *question_id = q.question_id.c_str();
  if (correct) *correct = q.correct;
  if (total) *total = q.total;
  return guarded([] {});
}

qtc_status qtc_eval_format(const qtc_eval *eval, char **out) {
  QTC_REQUIRE(eval && out);
  return guarded([&] { *out = dup_string(qtc::format_report(eval->report)); });
}

qtc_status qtc_server_new(const qtc_config *config, const char *questions_path,
                          qtc_server **out) {
  QTC_REQUIRE(config && out);
  return guarded([&] {
    qtc::BuildConfig b = effective(*config);
    qtc::ServiceConfig s;
    s.corpus_dir = b.out_dir;
    if (questions_path) s.questions_path = questions_path;
    s.cache_dir = b.cache_dir;
    s.provider = b.provider;
    s.fetch = b.fetch;
    s.max_passages = b.max_passages;
    s.fixed_clock = b.fixed_clock;
    *out = new qtc_server(std::move(s));
  });
}

void qtc_server_free(qtc_server *server) { delete server; }

qtc_status qtc_server_bind(qtc_server *server, const char *host, int port,
                           int *bound_port) {
  QTC_REQUIRE(server && host);
  return guarded([&] {
    int p = server->service.bind(host, port);
    if (bound_port) *bound_port = p;
  });
}

qtc_status qtc_server_run(qtc_server *server) {
  QTC_REQUIRE(server);
  return guarded([&] { server->service.run(); });
}

qtc_status qtc_server_stop(qtc_server *server) {
  QTC_REQUIRE(server);
  return guarded([&] { server->service.stop(); });
}

qtc_status qtc_url_hash(const char *url, char **out) {
  QTC_REQUIRE(url && out);
  return guarded([&] { *out = dup_string(qtc::url_hash(url)); });
}

qtc_status qtc_normalize_text(const char *text, char **out) {
  QTC_REQUIRE(text && out);
  return guarded([&] { *out = dup_string(qtc::normalize_text(text).value()); });
}

}  // extern "C"
