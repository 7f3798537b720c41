#ifndef QTC_TRANSPORT_H_
#define QTC_TRANSPORT_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace qtc {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

// Time source for everything that waits or stamps. Tests inject a manual
// clock; --fixed-clock runs use FixedClock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  virtual void sleep_until(TimePoint t) = 0;
};

class SystemClock : public Clock {
 public:
  TimePoint now() override;
  void sleep_until(TimePoint t) override;
};

// Always reports the same instant and never blocks.
class FixedClock : public Clock {
 public:
  explicit FixedClock(TimePoint t = TimePoint{}) : t_(t) {}
  TimePoint now() override { return t_; }
  void sleep_until(TimePoint) override {}

 private:
  TimePoint t_;
};

std::string format_timestamp(std::chrono::sys_seconds t);
// Parses the "YYYY-MM-DDTHH:MM:SSZ" form produced by format_timestamp.
bool parse_timestamp(const std::string &s, std::chrono::sys_seconds *out);

struct HttpRequest {
  std::string url;
  int timeout_ms = 10000;
  // Bodies longer than this are cut at max_body_bytes + 1 bytes and the
  // response is flagged truncated.
  std::size_t max_body_bytes = 2 * 1024 * 1024;
};

struct HttpResponse {
  int status = 0;
  std::string content_type;
  std::string location;
  std::string body;
  bool truncated = false;
};

struct TransportFailure {
  enum class Kind { kTimeout, kNetwork };
  Kind kind = Kind::kNetwork;
  std::string detail;
};

using HttpResult = std::variant<HttpResponse, TransportFailure>;

// One GET, no redirect following. Implementations must be callable from
// several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResult get(const HttpRequest &request) = 0;
};

// Real network access through cpp-httplib (http and https).
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string user_agent = "qtcorpus/0.1");
  HttpResult get(const HttpRequest &request) override;

 private:
  std::string user_agent_;
};

// Serves fixture_dir/pages/<url-hash>.html as text/html; anything else is a
// 404. Used by fixture builds so no request leaves the machine.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path fixture_dir);
  HttpResult get(const HttpRequest &request) override;

 private:
  std::filesystem::path pages_dir_;
};

}  // namespace qtc

#endif  // QTC_TRANSPORT_H_
