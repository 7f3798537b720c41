#include "qtc/transport.h"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "qtc/error.h"
#include "qtc/search_provider.h"

namespace qtc {

TimePoint SystemClock::now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

void SystemClock::sleep_until(TimePoint t) { std::this_thread::sleep_until(t); }

std::string format_timestamp(std::chrono::sys_seconds t) {
  std::time_t tt = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool parse_timestamp(const std::string &s, std::chrono::sys_seconds *out) {
  std::tm tm{};
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year,
                  &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &tm.tm_sec, &consumed) != 6 ||
      consumed != static_cast<int>(s.size())) {
    return false;
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t tt = timegm(&tm);
  *out = std::chrono::sys_seconds(std::chrono::seconds(tt));
  return format_timestamp(*out) == s;
}

HttpTransport::HttpTransport(std::string user_agent)
    : user_agent_(std::move(user_agent)) {}

HttpResult HttpTransport::get(const HttpRequest &request) {
  UrlParts parts;
  try {
    parts = parse_url(request.url);
  } catch (const Error &e) {
    return TransportFailure{TransportFailure::Kind::kNetwork, e.what()};
  }
  std::string base = parts.protocol + "://" + parts.host;
  if (parts.port) base += ":" + std::to_string(*parts.port);
  std::string target = parts.path;
  if (parts.query) target += "?" + *parts.query;

  httplib::Client client(base);
  const time_t sec = request.timeout_ms / 1000;
  const time_t usec = (request.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  client.set_follow_location(false);

  HttpResponse out;
  httplib::Headers headers = {{"User-Agent", user_agent_},
                              {"Accept", "text/html,*/*;q=0.8"}};
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Get(
      target, headers,
      [&](const httplib::Response &r) {
        out.status = r.status;
        out.content_type = r.get_header_value("Content-Type");
        out.location = r.get_header_value("Location");
        return true;
      },
      [&](const char *data, std::size_t len) {
        const std::size_t cap = request.max_body_bytes + 1;
        out.body.append(data, std::min(len, cap - out.body.size()));
        if (out.body.size() > request.max_body_bytes) {
          out.truncated = true;
          return false;
        }
        return true;
      });
  if (res) return out;
  if (out.truncated) return out;
  const auto err = res.error();
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  if (err == httplib::Error::ConnectionTimeout ||
      (err == httplib::Error::Read && elapsed.count() >= request.timeout_ms)) {
    return TransportFailure{TransportFailure::Kind::kTimeout,
                            httplib::to_string(err)};
  }
  return TransportFailure{TransportFailure::Kind::kNetwork,
                          httplib::to_string(err)};
}

FixtureTransport::FixtureTransport(std::filesystem::path fixture_dir)
    : pages_dir_(std::move(fixture_dir) / "pages") {}

HttpResult FixtureTransport::get(const HttpRequest &request) {
  std::string hash;
  try {
    hash = url_hash(request.url);
  } catch (const Error &e) {
    return TransportFailure{TransportFailure::Kind::kNetwork, e.what()};
  }
  HttpResponse out;
  std::ifstream in(pages_dir_ / (hash + ".html"), std::ios::binary);
  if (!in) {
    out.status = 404;
    out.content_type = "text/html";
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  out.status = 200;
  out.content_type = "text/html";
  out.body = buf.str();
  if (out.body.size() > request.max_body_bytes) {
    out.body.resize(request.max_body_bytes + 1);
    out.truncated = true;
  }
  return out;
}

}  // namespace qtc
