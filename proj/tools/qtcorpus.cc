// qtcorpus: build, evaluate and serve an Arabic question/text corpus.
#include <pthread.h>
#include <signal.h>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "qtc/qtcorpus.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoEntries = 2;

struct Options {
  std::string questions;
  std::string out;
  std::string provider = "fixture";
  std::string fixture_dir;
  std::string endpoint;
  std::string cache_dir;
  std::optional<int> max_urls;
  std::optional<int> max_passages;
  std::optional<int> timeout_ms;
  std::optional<int> per_host_interval_ms;
  std::optional<int> max_concurrent;
  bool fixed_clock = false;
  bool verbose = false;
};

const char *level_name(qtc_log_level level) {
  switch (level) {
    case QTC_LOG_DEBUG: return "debug";
    case QTC_LOG_INFO: return "info";
    case QTC_LOG_WARNING: return "warning";
    case QTC_LOG_ERROR: return "error";
  }
  return "log";
}

void log_to_stderr(qtc_log_level level, const char *message, void *user) {
  const bool verbose = *static_cast<bool *>(user);
  if (!verbose && level < QTC_LOG_WARNING) return;
  std::fprintf(stderr, "%s: %s\n", level_name(level), message);
}

int report(qtc_status s, const char *what) {
  std::fprintf(stderr, "qtcorpus: %s: %s (%s)\n", what, qtc_last_error(),
               qtc_status_name(s));
  return kExitError;
}

class Config {
 public:
  Config() { qtc_config_new(&c_); }
  ~Config() { qtc_config_free(c_); }
  Config(const Config &) = delete;
  Config &operator=(const Config &) = delete;
  qtc_config *get() { return c_; }

 private:
  qtc_config *c_ = nullptr;
};

// Applies the shared flags; returns QTC_OK or the first failing status.
qtc_status apply(Options &o, qtc_config *c) {
  qtc_status s = QTC_OK;
  auto step = [&](qtc_status r) {
    if (s == QTC_OK) s = r;
  };
  if (!o.questions.empty()) step(qtc_config_set_questions(c, o.questions.c_str()));
  step(qtc_config_set_out_dir(c, o.out.c_str()));
  if (!o.cache_dir.empty()) step(qtc_config_set_cache_dir(c, o.cache_dir.c_str()));
  step(qtc_config_set_provider(
      c, o.provider == "live" ? QTC_PROVIDER_LIVE : QTC_PROVIDER_FIXTURE));
  if (!o.fixture_dir.empty()) step(qtc_config_set_fixture_dir(c, o.fixture_dir.c_str()));
  if (!o.endpoint.empty()) step(qtc_config_set_endpoint(c, o.endpoint.c_str()));
  if (o.max_urls) step(qtc_config_set_max_urls(c, *o.max_urls));
  if (o.max_passages) step(qtc_config_set_max_passages(c, *o.max_passages));
  if (o.timeout_ms) step(qtc_config_set_timeout_ms(c, *o.timeout_ms));
  if (o.per_host_interval_ms) {
    step(qtc_config_set_per_host_interval_ms(c, *o.per_host_interval_ms));
  }
  if (o.max_concurrent) step(qtc_config_set_max_concurrent(c, *o.max_concurrent));
  if (o.fixed_clock) step(qtc_config_set_fixed_clock(c, 0));
  step(qtc_config_set_log(c, log_to_stderr, &o.verbose));
  return s;
}

void add_source_flags(CLI::App *cmd, Options &o) {
  cmd->add_option("--provider", o.provider, "search provider")
      ->check(CLI::IsMember({"live", "fixture"}));
  cmd->add_option("--fixture-dir", o.fixture_dir, "fixture mini-web directory");
  cmd->add_option("--endpoint", o.endpoint, "live search endpoint URL");
  cmd->add_option("--max-passages", o.max_passages, "passages per text");
  cmd->add_option("--timeout-ms", o.timeout_ms, "per-request timeout");
  cmd->add_option("--per-host-interval-ms", o.per_host_interval_ms,
                  "minimum spacing between requests to one host");
  cmd->add_option("--max-concurrent", o.max_concurrent, "parallel fetches");
  cmd->add_option("--cache-dir", o.cache_dir, "page cache (default <out>.cache)");
  cmd->add_flag("--fixed-clock", o.fixed_clock,
                "pin timestamps to the epoch and skip politeness waits");
  cmd->add_flag("-v,--verbose", o.verbose, "log progress");
}

int cmd_build(Options &o) {
  Config cfg;
  if (qtc_status s = apply(o, cfg.get()); s != QTC_OK) return report(s, "build");
  qtc_build_result r{};
  if (qtc_status s = qtc_build(cfg.get(), &r); s != QTC_OK) return report(s, "build");
  char *text = nullptr;
  if (qtc_status s = qtc_format_stats(&r.stats, &text); s != QTC_OK) {
    return report(s, "build");
  }
  std::fputs(text, stdout);
  qtc_string_free(text);
  std::fprintf(stderr, "added %llu, skipped %llu, without text %llu\n",
               static_cast<unsigned long long>(r.added),
               static_cast<unsigned long long>(r.skipped_existing),
               static_cast<unsigned long long>(r.without_text));
  return r.total_entries == 0 ? kExitNoEntries : kExitOk;
}

int cmd_eval(const std::string &corpus, const std::string &labels, bool use_auto) {
  if (use_auto == !labels.empty()) {
    std::fprintf(stderr, "qtcorpus: eval: give exactly one of --labels or --auto\n");
    return kExitError;
  }
  qtc_eval *eval = nullptr;
  qtc_status s = qtc_eval_run(corpus.c_str(), use_auto ? nullptr : labels.c_str(), &eval);
  if (s != QTC_OK) return report(s, "eval");
  char *text = nullptr;
  s = qtc_eval_format(eval, &text);
  qtc_eval_free(eval);
  if (s != QTC_OK) return report(s, "eval");
  std::fputs(text, stdout);
  qtc_string_free(text);
  return kExitOk;
}

int cmd_serve(Options &o, const std::string &host, int port) {
  Config cfg;
  if (qtc_status s = apply(o, cfg.get()); s != QTC_OK) return report(s, "serve");
  qtc_server *server = nullptr;
  qtc_status s = qtc_server_new(cfg.get(), o.questions.empty() ? nullptr : o.questions.c_str(),
                                &server);
  if (s != QTC_OK) return report(s, "serve");
  int bound = 0;
  if ((s = qtc_server_bind(server, host.c_str(), port, &bound)) != QTC_OK) {
    qtc_server_free(server);
    return report(s, "serve");
  }
  std::fprintf(stderr, "listening on http://%s:%d\n", host.c_str(), bound);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    qtc_server_stop(server);
  });
  s = qtc_server_run(server);
  // Wake the waiter if the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  qtc_server_free(server);
  if (s != QTC_OK) return report(s, "serve");
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Arabic question/text corpus builder"};
  app.require_subcommand(1);

  Options build_opts;
  auto *build = app.add_subcommand("build", "build the corpus from a question bank");
  build->add_option("--questions", build_opts.questions, "question bank")->required();
  build->add_option("--out", build_opts.out, "corpus directory")->required();
  build->add_option("--max-urls", build_opts.max_urls, "URLs per question");
  add_source_flags(build, build_opts);

  std::string eval_corpus, eval_labels;
  bool eval_auto = false;
  auto *eval = app.add_subcommand("eval", "precision of the stored URLs");
  eval->add_option("--corpus,--out", eval_corpus, "corpus directory")->required();
  eval->add_option("--labels", eval_labels, "labels file: id TAB url TAB 0|1");
  eval->add_flag("--auto", eval_auto, "use the stored qualified flags as labels");

  Options serve_opts;
  std::string host = "127.0.0.1";
  int port = 8711;
  auto *serve = app.add_subcommand("serve", "curation API over HTTP");
  serve->add_option("--corpus,--out", serve_opts.out, "corpus directory")->required();
  serve->add_option("--questions", serve_opts.questions, "question bank");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port");
  add_source_flags(serve, serve_opts);

  std::string hash_url;
  auto *hash = app.add_subcommand("url-hash", "print the cache/fixture name of a URL");
  hash->add_option("url", hash_url, "absolute http(s) URL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*build) return cmd_build(build_opts);
  if (*eval) return cmd_eval(eval_corpus, eval_labels, eval_auto);
  if (*serve) return cmd_serve(serve_opts, host, port);
  if (*hash) {
    char *out = nullptr;
    if (qtc_status s = qtc_url_hash(hash_url.c_str(), &out); s != QTC_OK) {
      return report(s, "url-hash");
    }
    std::puts(out);
    qtc_string_free(out);
    return kExitOk;
  }
  return kExitError;
}
