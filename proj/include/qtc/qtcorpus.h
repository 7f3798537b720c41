/* C interface to the question/text corpus builder. */
#ifndef QTC_QTCORPUS_H_
#define QTC_QTCORPUS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QTC_API __declspec(dllexport)
#else
#define QTC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qtc_status {
  QTC_OK = 0,
  QTC_ERR_INVALID_ARGUMENT,
  QTC_ERR_PARSE,
  QTC_ERR_DUPLICATE,
  QTC_ERR_NOT_FOUND,
  QTC_ERR_IO,
  QTC_ERR_NETWORK,
  QTC_ERR_CONFLICT,
  QTC_ERR_UNSUPPORTED,
  QTC_ERR_EMPTY,
  QTC_ERR_INTERNAL,
} qtc_status;

/* Message of the last failed call on this thread; "" after success. */
QTC_API const char *qtc_last_error(void);
QTC_API const char *qtc_status_name(qtc_status status);

/* Strings returned through char ** out-parameters are owned by the caller. */
QTC_API void qtc_string_free(char *s);

typedef enum qtc_provider_kind {
  QTC_PROVIDER_FIXTURE = 0,
  QTC_PROVIDER_LIVE = 1,
} qtc_provider_kind;

typedef enum qtc_log_level {
  QTC_LOG_DEBUG = 0,
  QTC_LOG_INFO,
  QTC_LOG_WARNING,
  QTC_LOG_ERROR,
} qtc_log_level;

typedef void (*qtc_log_fn)(qtc_log_level level, const char *message,
                           void *user_data);

/* Build settings. Unset numeric fields keep their defaults. */
typedef struct qtc_config qtc_config;

QTC_API qtc_status qtc_config_new(qtc_config **out);
QTC_API void qtc_config_free(qtc_config *config);
QTC_API qtc_status qtc_config_set_questions(qtc_config *c, const char *path);
QTC_API qtc_status qtc_config_set_out_dir(qtc_config *c, const char *path);
/* Defaults to "<out_dir>.cache". */
QTC_API qtc_status qtc_config_set_cache_dir(qtc_config *c, const char *path);
QTC_API qtc_status qtc_config_set_provider(qtc_config *c, qtc_provider_kind kind);
QTC_API qtc_status qtc_config_set_fixture_dir(qtc_config *c, const char *path);
QTC_API qtc_status qtc_config_set_endpoint(qtc_config *c, const char *url);
QTC_API qtc_status qtc_config_set_max_urls(qtc_config *c, int n);
QTC_API qtc_status qtc_config_set_max_passages(qtc_config *c, int n);
QTC_API qtc_status qtc_config_set_timeout_ms(qtc_config *c, int ms);
QTC_API qtc_status qtc_config_set_per_host_interval_ms(qtc_config *c, int ms);
QTC_API qtc_status qtc_config_set_max_concurrent(qtc_config *c, int n);
/* Pins every timestamp to the given Unix time and skips politeness waits. */
QTC_API qtc_status qtc_config_set_fixed_clock(qtc_config *c, int64_t unix_seconds);
QTC_API qtc_status qtc_config_set_log(qtc_config *c, qtc_log_fn fn, void *user_data);

typedef struct qtc_stats {
  uint64_t n_questions;
  uint64_t total_urls;
  uint64_t urls_per_question_min;
  uint64_t urls_per_question_max;
  uint64_t n_texts;
  uint64_t correct_urls_per_question_min;
  uint64_t correct_urls_per_question_max;
  uint64_t per_domain_counts[5];
} qtc_stats;

typedef struct qtc_build_result {
  qtc_stats stats;
  uint64_t added;
  uint64_t skipped_existing;
  uint64_t without_text;
  uint64_t total_entries;
} qtc_build_result;

QTC_API qtc_status qtc_build(const qtc_config *config, qtc_build_result *out);

/* Loads corpus_dir and computes its statistics. */
QTC_API qtc_status qtc_corpus_stats(const char *corpus_dir, qtc_stats *out);
/* "name<TAB>value" lines, one per statistic, then per-domain counts. */
QTC_API qtc_status qtc_format_stats(const qtc_stats *stats, char **out);
QTC_API const char *qtc_domain_name(int index);

typedef struct qtc_eval qtc_eval;

/* labels_path NULL derives labels from the stored qualified flags. */
QTC_API qtc_status qtc_eval_run(const char *corpus_dir, const char *labels_path,
                                qtc_eval **out);
QTC_API void qtc_eval_free(qtc_eval *eval);
QTC_API uint64_t qtc_eval_micro_num(const qtc_eval *eval);
QTC_API uint64_t qtc_eval_micro_den(const qtc_eval *eval);
QTC_API double qtc_eval_micro_precision(const qtc_eval *eval);
QTC_API double qtc_eval_macro_precision(const qtc_eval *eval);
QTC_API size_t qtc_eval_question_count(const qtc_eval *eval);
QTC_API qtc_status qtc_eval_question(const qtc_eval *eval, size_t index,
                                     const char **question_id, uint64_t *correct,
                                     uint64_t *total);
QTC_API qtc_status qtc_eval_format(const qtc_eval *eval, char **out);

typedef struct qtc_server qtc_server;

/* questions_path may be NULL. Reuses the provider, fetch and clock settings
   of config; its out_dir is the corpus served. */
QTC_API qtc_status qtc_server_new(const qtc_config *config,
                                  const char *questions_path, qtc_server **out);
QTC_API void qtc_server_free(qtc_server *server);
/* port 0 picks a free port; *bound_port receives the actual one. */
QTC_API qtc_status qtc_server_bind(qtc_server *server, const char *host, int port,
                                   int *bound_port);
/* Blocks until qtc_server_stop. */
QTC_API qtc_status qtc_server_run(qtc_server *server);
/* Safe to call from another thread. */
QTC_API qtc_status qtc_server_stop(qtc_server *server);

QTC_API qtc_status qtc_url_hash(const char *url, char **out);
QTC_API qtc_status qtc_normalize_text(const char *text, char **out);

#ifdef __cplusplus
}
#endif

#endif /* QTC_QTCORPUS_H_ */
