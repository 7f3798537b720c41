#ifndef QTC_API_SERVICE_H_
#define QTC_API_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qtc/answer_filter.h"
#include "qtc/corpus_store.h"
#include "qtc/page_fetcher.h"
#include "qtc/pipeline.h"
#include "qtc/search_provider.h"
#include "qtc/transport.h"

namespace httplib {
class Server;
}

namespace qtc {

inline constexpr int kDefaultApiPort = 8711;

struct ServiceConfig {
  std::filesystem::path corpus_dir;
  // Optional question bank; questions already in the corpus are always
  // listed.
  std::optional<std::filesystem::path> questions_path;
  std::filesystem::path cache_dir;
  ProviderConfig provider;
  FetchPolicy fetch;
  int max_passages = kDefaultMaxPassages;
  std::optional<TimePoint> fixed_clock;
  std::string cors_origin = "*";
  PipelineSeams seams;
};

// JSON-over-HTTP facade for human curation. Routes:
//
//   GET  /api/questions
//   GET  /api/questions/{id}/search?max=N
//   POST /api/questions/{id}/extract      {"url": ...}
//   POST /api/questions/{id}/decision     {"url": ..., "accepted": bool,
//                                          "note": optional}
//   GET  /api/stats
//
// Errors come back as {"error": ..., "detail": ...}.
class ApiService {
 public:
  explicit ApiService(ServiceConfig config);
  ~ApiService();

  ApiService(const ApiService &) = delete;
  ApiService &operator=(const ApiService &) = delete;

  // Binds the listening socket; port 0 picks a free port. Throws
  // Error(kIo) when the address is unavailable. Returns the bound port.
  int bind(const std::string &host, int port);
  // Serves until stop(); in-flight requests finish first.
  void run();
  void stop();

  // Request handling without sockets, used by tests and the server alike.
  struct Response {
    int status = 200;
    std::string body;  // JSON
  };
  // query_max is the raw "max" parameter, nullopt when absent.
  Response handle(const std::string &method, const std::string &path,
                  const std::optional<std::string> &query_max,
                  const std::string &body);

 private:
  struct Extraction {
    FetchStatus status;
    std::optional<CandidateText> candidate;  // absent when the fetch failed
  };
  struct Session {
    std::vector<UrlRecord> candidates;
    std::map<std::string, Extraction> extractions;  // by normalized URL
    std::set<std::string> rejected;                 // normalized URLs
  };

  Response list_questions();
  Response search(const std::string &id,
                  const std::optional<std::string> &query_max);
  Response extract(const std::string &id, const std::string &body);
  Response decide(const std::string &id, const std::string &body);
  Response stats();
  std::vector<CandidateUrl> candidate_list(const Session &s,
                                           const std::string &accepted_key) const;

  ServiceConfig config_;
  std::shared_ptr<Clock> clock_;
  std::unique_ptr<SearchProvider> provider_;
  std::unique_ptr<PageFetcher> fetcher_;
  std::map<std::string, Question> questions_;

  std::mutex mu_;  // guards store_ and sessions_
  CorpusStore store_;
  std::map<std::string, Session> sessions_;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace qtc

#endif  // QTC_API_SERVICE_H_
