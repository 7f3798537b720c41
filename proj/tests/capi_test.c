/* Exercises the C interface through the shared library only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qtc/qtcorpus.h"

static int failures = 0;

#define EXPECT(cond)                                                 \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

static int log_lines = 0;

static void count_log(qtc_log_level level, const char *message, void *user) {
  (void)level;
  (void)message;
  ++*(int *)user;
}

int main(int argc, char **argv) {
  if (argc != 3) {
    fprintf(stderr, "usage: %s FIXTURE_DIR WORK_DIR\n", argv[0]);
    return 2;
  }
  const char *fixture = argv[1];
  const char *work = argv[2];
  char questions[1024], out[1024], missing[1024];
  snprintf(questions, sizeof questions, "%s/questions.txt", fixture);
  snprintf(out, sizeof out, "%s/corpus", work);
  snprintf(missing, sizeof missing, "%s/absent", work);

  char *s = NULL;
  EXPECT(qtc_normalize_text("بُرْجُ إِيفل", &s) == QTC_OK);
  EXPECT(s && strcmp(s, "برج ايفل") == 0);
  qtc_string_free(s);

  EXPECT(qtc_url_hash("http://a.example/x#frag", &s) == QTC_OK);
  EXPECT(s && strlen(s) == 16);
  char *t = NULL;
  EXPECT(qtc_url_hash("http://A.example/x", &t) == QTC_OK);
  EXPECT(s && t && strcmp(s, t) == 0);
  qtc_string_free(s);
  qtc_string_free(t);

  EXPECT(qtc_url_hash("not a url", &s) == QTC_ERR_PARSE);
  EXPECT(strlen(qtc_last_error()) > 0);
  EXPECT(strcmp(qtc_status_name(QTC_ERR_NOT_FOUND), "not_found") == 0);
  EXPECT(qtc_normalize_text(NULL, &s) == QTC_ERR_INVALID_ARGUMENT);

  qtc_config *cfg = NULL;
  EXPECT(qtc_config_new(&cfg) == QTC_OK);
  EXPECT(qtc_config_set_max_urls(cfg, 0) == QTC_ERR_INVALID_ARGUMENT);
  qtc_config_set_questions(cfg, questions);
  qtc_config_set_out_dir(cfg, out);
  qtc_config_set_provider(cfg, QTC_PROVIDER_FIXTURE);
  qtc_config_set_fixture_dir(cfg, missing);
  qtc_config_set_fixed_clock(cfg, 0);
  qtc_config_set_log(cfg, count_log, &log_lines);

  qtc_build_result r;
  memset(&r, 0, sizeof r);
  EXPECT(qtc_build(cfg, &r) == QTC_ERR_NOT_FOUND);

  qtc_config_set_fixture_dir(cfg, fixture);
  EXPECT(qtc_build(cfg, &r) == QTC_OK);
  EXPECT(r.added == 5);
  EXPECT(r.total_entries == 5);
  EXPECT(r.stats.n_questions == 5);
  EXPECT(r.stats.total_urls == 15);
  EXPECT(r.stats.urls_per_question_min == 3);
  EXPECT(r.stats.urls_per_question_max == 3);
  EXPECT(r.stats.correct_urls_per_question_min == 1);
  EXPECT(r.stats.correct_urls_per_question_max == 2);
  EXPECT(log_lines > 0);

  char *text = NULL;
  EXPECT(qtc_format_stats(&r.stats, &text) == QTC_OK);
  EXPECT(text && strncmp(text, "n_questions\t5\ntotal_urls\t15\n", 27) == 0);
  qtc_string_free(text);

  EXPECT(qtc_build(cfg, &r) == QTC_OK);
  EXPECT(r.added == 0);
  EXPECT(r.skipped_existing == 5);

  qtc_stats st;
  EXPECT(qtc_corpus_stats(out, &st) == QTC_OK);
  EXPECT(st.n_texts == 5);
  EXPECT(strcmp(qtc_domain_name(0), "Sport") == 0);
  EXPECT(qtc_domain_name(5) == NULL);

  qtc_eval *ev = NULL;
  EXPECT(qtc_eval_run(out, NULL, &ev) == QTC_OK);
  EXPECT(qtc_eval_micro_num(ev) == 7);
  EXPECT(qtc_eval_micro_den(ev) == 15);
  EXPECT(qtc_eval_question_count(ev) == 5);
  const char *qid = NULL;
  uint64_t correct = 0, total = 0;
  EXPECT(qtc_eval_question(ev, 0, &qid, &correct, &total) == QTC_OK);
  EXPECT(qid && strcmp(qid, "q1") == 0);
  EXPECT(correct == 1 && total == 3);
  EXPECT(qtc_eval_question(ev, 9, &qid, &correct, &total) == QTC_ERR_NOT_FOUND);
  EXPECT(qtc_eval_format(ev, &text) == QTC_OK);
  EXPECT(text && strncmp(text, "micro_precision\t0.466667\n", 25) == 0);
  qtc_string_free(text);
  qtc_eval_free(ev);

  EXPECT(qtc_eval_run(missing, NULL, &ev) == QTC_ERR_NOT_FOUND);

  qtc_server *srv = NULL;
  EXPECT(qtc_server_new(cfg, questions, &srv) == QTC_OK);
  int port = 0;
  EXPECT(qtc_server_bind(srv, "127.0.0.1", 0, &port) == QTC_OK);
  EXPECT(port > 0);
  qtc_server *other = NULL;
  EXPECT(qtc_server_new(cfg, NULL, &other) == QTC_OK);
  EXPECT(qtc_server_bind(other, "127.0.0.1", port, NULL) == QTC_ERR_IO);
  qtc_server_free(other);
  qtc_server_free(srv);

  qtc_config_free(cfg);
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
