#ifndef QTC_SEARCH_PROVIDER_H_
#define QTC_SEARCH_PROVIDER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qtc/question_bank.h"
#include "qtc/transport.h"

namespace qtc {

struct UrlParts {
  std::string protocol;  // "http" or "https"
  std::string host;      // lowercased
  std::optional<std::uint16_t> port;
  std::string path;      // "/" when the URL has none
  std::optional<std::string> query;

  friend bool operator==(const UrlParts &, const UrlParts &) = default;
};

// Splits an absolute http(s) URL. The fragment is discarded. Throws
// Error(kParse) on relative or malformed input.
UrlParts parse_url(std::string_view url);
std::string render_url(const UrlParts &parts);

// Dedup/cache key: lowercase host, fragment stripped, query kept.
std::string normalize_url(std::string_view url);

// FNV-1a 64 of the normalized URL, as 16 lowercase hex digits. This names
// fixture pages and cache entries alike.
std::uint64_t fnv1a64(std::string_view bytes);
std::string url_hash(std::string_view url);

struct UrlRecord {
  std::string url;
  int rank = 0;  // 1-based
  UrlParts parts;

  friend bool operator==(const UrlRecord &, const UrlRecord &) = default;
};

UrlRecord make_url_record(std::string url, int rank);

inline constexpr int kDefaultMaxResults = 25;

class SearchQuery {
 public:
  // Throws Error(kInvalidArgument) on an empty query or max_results < 1.
  SearchQuery(std::string question_id, std::string query_string,
              int max_results = kDefaultMaxResults);

  const std::string &question_id() const { return question_id_; }
  const std::string &query_string() const { return query_string_; }
  int max_results() const { return max_results_; }

 private:
  std::string question_id_;
  std::string query_string_;
  int max_results_;
};

SearchQuery build_query(const Question &q, int max_results = kDefaultMaxResults);

struct ProviderConfig {
  enum class Kind { kLive, kFixture };
  Kind kind = Kind::kFixture;
  std::optional<std::filesystem::path> fixture_dir;
  std::optional<std::string> endpoint;
  int timeout_ms = 10000;
  // Minimum spacing between two live search requests.
  int min_interval_ms = 1000;

  // Throws Error(kInvalidArgument) when the fields do not fit the kind.
  void validate() const;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  virtual std::vector<UrlRecord> search(const SearchQuery &query) = 0;
};

// Offline provider backed by fixture_dir/manifest. Each manifest line is
//
//   <space-separated keywords> TAB <space-separated URLs>
//
// An entry matches when all of its (normalized) keywords are among the
// query's keywords. Matches contribute their URLs by descending keyword
// count, then manifest order; duplicates keep their best rank.
class FixtureSearchProvider : public SearchProvider {
 public:
  explicit FixtureSearchProvider(const std::filesystem::path &fixture_dir);

  std::vector<UrlRecord> search(const SearchQuery &query) override;

  struct Entry {
    std::set<std::string> keywords;
    std::vector<std::string> urls;
  };
  const std::vector<Entry> &entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Live provider: GET <endpoint>?q=<query>&num=<max>. The body is read as
// JSON (an array of URL strings, an array of objects with "url" or "link",
// or an object holding such an array under "items" or "results") when it
// parses as JSON, otherwise as plain text with one URL per line. Requests
// are serialized and spaced by min_interval_ms.
class LiveSearchProvider : public SearchProvider {
 public:
  LiveSearchProvider(ProviderConfig config, std::shared_ptr<Transport> transport,
                     std::shared_ptr<Clock> clock);

  std::vector<UrlRecord> search(const SearchQuery &query) override;

 private:
  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::optional<TimePoint> last_request_;
};

// Parses a live provider response body into raw URL strings.
std::vector<std::string> parse_result_listing(std::string_view body);

// Deduplicates by normalized URL (first occurrence wins), drops strings that
// are not absolute http(s) URLs, truncates and assigns ranks 1..n.
std::vector<UrlRecord> rank_urls(const std::vector<std::string> &urls,
                                 int max_results);

std::unique_ptr<SearchProvider> make_search_provider(
    const ProviderConfig &config, std::shared_ptr<Transport> transport,
    std::shared_ptr<Clock> clock);

// One-shot search with a freshly built provider.
std::vector<UrlRecord> search(const SearchQuery &query,
                              const ProviderConfig &provider);

}  // namespace qtc

#endif  // QTC_SEARCH_PROVIDER_H_
