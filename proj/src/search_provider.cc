#include "qtc/search_provider.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qtc/arabic_normalizer.h"
#include "qtc/error.h"

namespace qtc {
namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool bad_url_char(unsigned char c) {
  return c <= 0x20 || c == 0x7F || c == '<' || c == '>' || c == '"' ||
         c == '{' || c == '}' || c == '|' || c == '\\' || c == '^' || c == '`';
}

Error parse_error(std::string_view url, const std::string &why) {
  return Error(ErrorCode::kParse,
               "invalid URL '" + std::string(url) + "': " + why);
}

std::string percent_encode(std::string_view s) {
  static const char *hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

}  // namespace

UrlParts parse_url(std::string_view url) {
  for (unsigned char c : url) {
    if (bad_url_char(c)) throw parse_error(url, "illegal character");
  }
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) {
    throw parse_error(url, "not an absolute URL");
  }
  UrlParts parts;
  parts.protocol = lower_ascii(url.substr(0, sep));
  if (parts.protocol != "http" && parts.protocol != "https") {
    throw parse_error(url, "unsupported scheme '" + parts.protocol + "'");
  }
  std::string_view rest = url.substr(sep + 3);
  auto auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view{}
                                            : rest.substr(auth_end);
  if (authority.find('@') != std::string_view::npos) {
    throw parse_error(url, "userinfo is not supported");
  }
  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) {
      throw parse_error(url, "unterminated IPv6 literal");
    }
    host = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') throw parse_error(url, "junk after host");
      port = after.substr(1);
      if (port.empty()) throw parse_error(url, "empty port");
    }
  } else if (auto colon = authority.rfind(':');
             colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
    if (port.empty()) throw parse_error(url, "empty port");
  }
  if (host.empty()) throw parse_error(url, "empty host");
  if (host.front() != '[' && host.find(':') != std::string_view::npos) {
    throw parse_error(url, "malformed host");
  }
  parts.host = lower_ascii(host);
  if (!port.empty()) {
    if (port.size() > 5 ||
        !std::all_of(port.begin(), port.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      throw parse_error(url, "bad port");
    }
    int p = std::stoi(std::string(port));
    if (p < 1 || p > 65535) throw parse_error(url, "port out of range");
    parts.port = static_cast<std::uint16_t>(p);
  }
  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    rest = rest.substr(0, hash);
  }
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    parts.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  parts.path = rest.empty() ? "/" : std::string(rest);
  return parts;
}

std::string render_url(const UrlParts &parts) {
  std::string out = parts.protocol + "://" + parts.host;
  if (parts.port) out += ":" + std::to_string(*parts.port);
  out += parts.path;
  if (parts.query) out += "?" + *parts.query;
  return out;
}

std::string normalize_url(std::string_view url) {
  return render_url(parse_url(url));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string url_hash(std::string_view url) {
  static const char *hex = "0123456789abcdef";
  std::uint64_t h = fnv1a64(normalize_url(url));
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 15];
    h >>= 4;
  }
  return out;
}

UrlRecord make_url_record(std::string url, int rank) {
  UrlRecord r;
  r.parts = parse_url(url);
  r.url = std::move(url);
  r.rank = rank;
  return r;
}

SearchQuery::SearchQuery(std::string question_id, std::string query_string,
                         int max_results)
    : question_id_(std::move(question_id)),
      query_string_(std::move(query_string)),
      max_results_(max_results) {
  if (query_string_.find_first_not_of(" \t\n") == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "empty search query");
  }
  if (max_results_ < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_results must be >= 1, got " + std::to_string(max_results_));
  }
}

SearchQuery build_query(const Question &q, int max_results) {
  std::string joined;
  for (const auto &k : q.keywords) {
    if (!joined.empty()) joined.push_back(' ');
    joined += k;
  }
  return SearchQuery(q.id, std::move(joined), max_results);
}

void ProviderConfig::validate() const {
  if (kind == Kind::kFixture) {
    if (!fixture_dir) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fixture provider needs a fixture directory");
    }
    if (endpoint) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fixture provider does not take an endpoint");
    }
  } else {
    if (fixture_dir) {
      throw Error(ErrorCode::kInvalidArgument,
                  "live provider does not take a fixture directory");
    }
    if (!endpoint) {
      throw Error(ErrorCode::kInvalidArgument, "live provider needs an endpoint");
    }
    parse_url(*endpoint);
  }
  if (timeout_ms < 1) {
    throw Error(ErrorCode::kInvalidArgument, "timeout must be positive");
  }
  if (min_interval_ms < 0) {
    throw Error(ErrorCode::kInvalidArgument, "interval must be non-negative");
  }
}

std::vector<UrlRecord> rank_urls(const std::vector<std::string> &urls,
                                 int max_results) {
  std::vector<UrlRecord> out;
  std::set<std::string> seen;
  for (const auto &u : urls) {
    if (static_cast<int>(out.size()) >= max_results) break;
    std::string key;
    try {
      key = normalize_url(u);
    } catch (const Error &) {
      continue;
    }
    if (!seen.insert(key).second) continue;
    out.push_back(make_url_record(u, static_cast<int>(out.size()) + 1));
  }
  return out;
}

FixtureSearchProvider::FixtureSearchProvider(
    const std::filesystem::path &fixture_dir) {
  auto manifest = fixture_dir / "manifest";
  std::ifstream in(manifest, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound,
                "fixture manifest missing: " + manifest.string());
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kParse, manifest.string() + ":" +
                                         std::to_string(line_no) +
                                         ": expected keywords TAB urls");
    }
    Entry e;
    for (auto &k : normalized_tokens(line.substr(0, tab))) {
      e.keywords.insert(std::move(k));
    }
    std::istringstream urls(line.substr(tab + 1));
    std::string u;
    while (urls >> u) {
      try {
        parse_url(u);
      } catch (const Error &err) {
        throw Error(ErrorCode::kParse, manifest.string() + ":" +
                                           std::to_string(line_no) + ": " +
                                           err.what());
      }
      e.urls.push_back(u);
    }
    if (e.keywords.empty() || e.urls.empty()) {
      throw Error(ErrorCode::kParse, manifest.string() + ":" +
                                         std::to_string(line_no) +
                                         ": entry needs keywords and URLs");
    }
    entries_.push_back(std::move(e));
  }
}

std::vector<UrlRecord> FixtureSearchProvider::search(const SearchQuery &query) {
  auto tokens = normalized_tokens(query.query_string());
  std::set<std::string> query_words(tokens.begin(), tokens.end());
  std::vector<const Entry *> matched;
  for (const auto &e : entries_) {
    if (std::includes(query_words.begin(), query_words.end(),
                      e.keywords.begin(), e.keywords.end())) {
      matched.push_back(&e);
    }
  }
  // Every match is a subset, so its overlap is its own keyword count.
  std::stable_sort(matched.begin(), matched.end(),
                   [](const Entry *a, const Entry *b) {
                     return a->keywords.size() > b->keywords.size();
                   });
  std::vector<std::string> urls;
  for (const Entry *e : matched) {
    urls.insert(urls.end(), e->urls.begin(), e->urls.end());
  }
  return rank_urls(urls, query.max_results());
}

std::vector<std::string> parse_result_listing(std::string_view body) {
  std::vector<std::string> urls;
  auto json = nlohmann::json::parse(body.begin(), body.end(), nullptr,
                                    /*allow_exceptions=*/false);
  if (!json.is_discarded() && (json.is_array() || json.is_object())) {
    const nlohmann::json *items = &json;
    if (json.is_object()) {
      items = nullptr;
      for (const char *key : {"items", "results"}) {
        if (json.contains(key) && json[key].is_array()) {
          items = &json[key];
          break;
        }
      }
      if (!items) return urls;
    }
    for (const auto &item : *items) {
      if (item.is_string()) {
        urls.push_back(item.get<std::string>());
      } else if (item.is_object()) {
        for (const char *key : {"url", "link"}) {
          if (item.contains(key) && item[key].is_string()) {
            urls.push_back(item[key].get<std::string>());
            break;
          }
        }
      }
    }
    return urls;
  }
  std::istringstream in{std::string(body)};
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    urls.push_back(line.substr(b, e - b + 1));
  }
  return urls;
}

LiveSearchProvider::LiveSearchProvider(ProviderConfig config,
                                       std::shared_ptr<Transport> transport,
                                       std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(std::move(clock)) {
  config_.validate();
}

std::vector<UrlRecord> LiveSearchProvider::search(const SearchQuery &query) {
  std::string url = *config_.endpoint;
  url += url.find('?') == std::string::npos ? '?' : '&';
  url += "q=" + percent_encode(query.query_string()) +
         "&num=" + std::to_string(query.max_results());

  HttpResult result;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (last_request_) {
      clock_->sleep_until(*last_request_ +
                          std::chrono::milliseconds(config_.min_interval_ms));
    }
    last_request_ = clock_->now();
    HttpRequest req;
    req.url = url;
    req.timeout_ms = config_.timeout_ms;
    req.max_body_bytes = 8 * 1024 * 1024;
    result = transport_->get(req);
  }
  if (auto *failure = std::get_if<TransportFailure>(&result)) {
    throw Error(ErrorCode::kNetwork,
                std::string(failure->kind == TransportFailure::Kind::kTimeout
                                ? "search provider timed out: "
                                : "search provider unreachable: ") +
                    failure->detail);
  }
  const auto &resp = std::get<HttpResponse>(result);
  if (resp.status != 200) {
    throw Error(ErrorCode::kNetwork,
                "search provider returned HTTP " + std::to_string(resp.status));
  }
  return rank_urls(parse_result_listing(resp.body), query.max_results());
}

std::unique_ptr<SearchProvider> make_search_provider(
    const ProviderConfig &config, std::shared_ptr<Transport> transport,
    std::shared_ptr<Clock> clock) {
  config.validate();
  if (config.kind == ProviderConfig::Kind::kFixture) {
    return std::make_unique<FixtureSearchProvider>(*config.fixture_dir);
  }
  return std::make_unique<LiveSearchProvider>(config, std::move(transport),
                                              std::move(clock));
}

std::vector<UrlRecord> search(const SearchQuery &query,
                              const ProviderConfig &provider) {
  auto p = make_search_provider(provider, std::make_shared<HttpTransport>(),
                                std::make_shared<SystemClock>());
  return p->search(query);
}

}  // namespace qtc
