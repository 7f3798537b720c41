#ifndef QTC_PIPELINE_H_
#define QTC_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "qtc/corpus_store.h"
#include "qtc/page_fetcher.h"
#include "qtc/search_provider.h"
#include "qtc/transport.h"

namespace qtc {

enum class LogLevel { kDebug, kInfo, kWarning, kError };
using LogFn = std::function<void(LogLevel, const std::string &)>;

struct BuildConfig {
  std::filesystem::path questions_path;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;
  ProviderConfig provider;
  int max_urls = kDefaultMaxResults;
  int max_passages = kDefaultMaxPassages;
  FetchPolicy fetch;
  // When set, every timestamp is this instant and waits are skipped.
  std::optional<TimePoint> fixed_clock;

  // Throws Error(kInvalidArgument / kNotFound) on unusable settings.
  void validate() const;
};

struct BuildResult {
  CorpusStats stats;
  std::size_t added = 0;
  std::size_t skipped_existing = 0;
  std::size_t without_text = 0;
  std::size_t total_entries = 0;
};

// Transport and clock overrides; null members fall back to the defaults the
// provider kind implies.
struct PipelineSeams {
  std::shared_ptr<Transport> search_transport;
  std::shared_ptr<Transport> page_transport;
  std::shared_ptr<Clock> clock;
};

// Search, fetch, extract, filter and assemble one question. Returns the
// entry, or nullopt when no candidate qualifies.
std::optional<CorpusEntry> build_entry(const Question &question,
                                       SearchProvider &provider,
                                       PageFetcher &fetcher,
                                       const std::filesystem::path &cache_dir,
                                       int max_urls, int max_passages,
                                       Clock &clock, const LogFn &log);

// Runs the whole pipeline over the question bank into out_dir. Questions
// already stored there are skipped; entries are committed in file order.
BuildResult build_corpus(const BuildConfig &config, const LogFn &log,
                         const PipelineSeams &seams = {});

}  // namespace qtc

#endif  // QTC_PIPELINE_H_
