#ifndef QTC_PAGE_FETCHER_H_
#define QTC_PAGE_FETCHER_H_

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "qtc/search_provider.h"
#include "qtc/transport.h"

namespace qtc {

struct FetchStatus {
  enum class Kind { kOk, kHttpError, kTimeout, kNotHtml, kTooLarge, kNetworkError };
  Kind kind = Kind::kOk;
  int http_code = 0;  // meaningful for kHttpError only

  static FetchStatus ok() { return {}; }
  static FetchStatus http_error(int code) { return {Kind::kHttpError, code}; }
  static FetchStatus of(Kind k) { return {k, 0}; }

  bool is_ok() const { return kind == Kind::kOk; }
  // "ok", "http_error(404)", "timeout", "not_html", "too_large",
  // "network_error".
  std::string to_string() const;
  static std::optional<FetchStatus> parse(std::string_view s);

  friend bool operator==(const FetchStatus &, const FetchStatus &) = default;
};

struct PageRecord {
  std::string url;
  std::string final_url;  // after redirects; equals url when none
  FetchStatus status;
  std::optional<std::string> raw_html;  // present iff status is ok
  std::string encoding = "UTF-8";
  std::chrono::sys_seconds fetched_at{};

  friend bool operator==(const PageRecord &, const PageRecord &) = default;
};

struct FetchPolicy {
  int timeout_ms = 10000;
  std::size_t max_bytes = 2 * 1024 * 1024;
  int per_host_interval_ms = 1000;
  int max_concurrent = 4;
  int max_redirects = 5;

  void validate() const;
};

// Canonical encoding label: charset from the Content-Type header, else a
// <meta> declaration in the first few KiB, else UTF-8.
std::string detect_encoding(std::string_view content_type,
                            std::string_view body);

// On-disk page cache. Layout: <dir>/<url-hash>.html and <dir>/<url-hash>.meta
// (key TAB value lines: url, final_url, encoding, fetched_at, status).
class PageCache {
 public:
  explicit PageCache(std::filesystem::path dir);

  std::optional<PageRecord> load(std::string_view url) const;
  // Writes are serialized per key; files appear via rename.
  void store(const PageRecord &page);

  const std::filesystem::path &dir() const { return dir_; }

 private:
  std::mutex &key_mutex(const std::string &key);

  std::filesystem::path dir_;
  std::mutex map_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_mu_;
};

// Polite fetcher. At most max_concurrent requests are in flight, and two
// requests to the same host start at least per_host_interval_ms apart
// according to the injected clock. Failures never throw; they come back as
// a non-ok status.
class PageFetcher {
 public:
  PageFetcher(FetchPolicy policy, std::shared_ptr<Transport> transport,
              std::shared_ptr<Clock> clock);

  PageRecord fetch_page(const UrlRecord &u);

  // Cache-first fetch; only ok pages are cached. Throws Error(kIo) when the
  // cache cannot be written.
  PageRecord get_or_fetch(const UrlRecord &u,
                          const std::filesystem::path &cache_dir);

  const FetchPolicy &policy() const { return policy_; }

 private:
  void acquire_slot();
  void release_slot();
  // Reserves the next polite start time for host and waits for it.
  void wait_for_host(const std::string &host);
  PageCache &cache_for(const std::filesystem::path &dir);

  FetchPolicy policy_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;

  std::mutex mu_;
  std::condition_variable slot_cv_;
  int in_flight_ = 0;
  std::map<std::string, TimePoint> next_start_;
  std::map<std::filesystem::path, std::unique_ptr<PageCache>> caches_;
};

}  // namespace qtc

#endif  // QTC_PAGE_FETCHER_H_
