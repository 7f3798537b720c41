#include "qtc/page_fetcher.h"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qtc/error.h"
#include "qtc/question_bank.h"

namespace qtc {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string canonical_encoding(std::string_view label) {
  std::string l = lower(label);
  auto b = l.find_first_not_of(" \t\"'");
  if (b == std::string::npos) return "UTF-8";
  auto e = l.find_last_not_of(" \t\"'");
  l = l.substr(b, e - b + 1);
  if (l == "utf-8" || l == "utf8") return "UTF-8";
  if (l == "windows-1256" || l == "cp1256" || l == "x-cp1256") {
    return "WINDOWS-1256";
  }
  if (l == "iso-8859-6" || l == "iso8859-6" || l == "iso_8859-6" ||
      l == "arabic" || l == "asmo-708") {
    return "ISO-8859-6";
  }
  if (l == "iso-8859-1" || l == "latin1" || l == "us-ascii") {
    return "WINDOWS-1252";  // what browsers actually decode these as
  }
  std::string up = l;
  for (char &c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return up;
}

// Value after "charset=" up to a delimiter, or empty.
std::string charset_value(std::string_view text) {
  auto at = text.find("charset");
  if (at == std::string_view::npos) return {};
  std::size_t i = at + 7;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  if (i >= text.size() || text[i] != '=') return {};
  ++i;
  while (i < text.size() && (text[i] == ' ' || text[i] == '"' || text[i] == '\'')) ++i;
  std::size_t j = i;
  while (j < text.size() && !std::strchr(" \t\"';>/", text[j])) ++j;
  return std::string(text.substr(i, j - i));
}

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 ||
         status == 308;
}

std::string resolve_location(const std::string &base, const std::string &loc) {
  if (loc.find("://") != std::string::npos) return loc;
  UrlParts parts = parse_url(base);
  std::string origin = parts.protocol + "://" + parts.host;
  if (parts.port) origin += ":" + std::to_string(*parts.port);
  if (loc.rfind("//", 0) == 0) return parts.protocol + ":" + loc;
  if (!loc.empty() && loc[0] == '/') return origin + loc;
  std::string dir = parts.path.substr(0, parts.path.rfind('/') + 1);
  return origin + dir + loc;
}

std::string host_key(const UrlParts &p) {
  return p.port ? p.host + ":" + std::to_string(*p.port) : p.host;
}

void write_file_atomic(const std::filesystem::path &path,
                       std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string() + ": " +
                                    ec.message());
  }
}

}  // namespace

std::string FetchStatus::to_string() const {
  switch (kind) {
    case Kind::kOk: return "ok";
    case Kind::kHttpError: return "http_error(" + std::to_string(http_code) + ")";
    case Kind::kTimeout: return "timeout";
    case Kind::kNotHtml: return "not_html";
    case Kind::kTooLarge: return "too_large";
    case Kind::kNetworkError: return "network_error";
  }
  return "network_error";
}

std::optional<FetchStatus> FetchStatus::parse(std::string_view s) {
  if (s == "ok") return ok();
  if (s == "timeout") return of(Kind::kTimeout);
  if (s == "not_html") return of(Kind::kNotHtml);
  if (s == "too_large") return of(Kind::kTooLarge);
  if (s == "network_error") return of(Kind::kNetworkError);
  constexpr std::string_view prefix = "http_error(";
  if (s.size() > prefix.size() + 1 && s.substr(0, prefix.size()) == prefix &&
      s.back() == ')') {
    auto digits = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    if (digits.size() == 3 &&
        std::all_of(digits.begin(), digits.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      return http_error(std::stoi(std::string(digits)));
    }
  }
  return std::nullopt;
}

void FetchPolicy::validate() const {
  if (timeout_ms < 1 || max_bytes < 1 || per_host_interval_ms < 0 ||
      max_concurrent < 1 || max_redirects < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid fetch policy");
  }
}

std::string detect_encoding(std::string_view content_type,
                            std::string_view body) {
  std::string from_header = charset_value(lower(content_type));
  if (!from_header.empty()) return canonical_encoding(from_header);
  std::string head = lower(body.substr(0, 4096));
  std::size_t pos = 0;
  while ((pos = head.find("<meta", pos)) != std::string::npos) {
    auto end = head.find('>', pos);
    std::string_view tag = std::string_view(head).substr(
        pos, end == std::string::npos ? std::string::npos : end - pos);
    std::string cs = charset_value(tag);
    if (!cs.empty()) return canonical_encoding(cs);
    pos += 5;
  }
  return "UTF-8";
}

PageCache::PageCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::mutex &PageCache::key_mutex(const std::string &key) {
  std::lock_guard<std::mutex> lock(map_mu_);
  auto &slot = key_mu_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<PageRecord> PageCache::load(std::string_view url) const {
  const std::string key = url_hash(url);
  std::ifstream meta(dir_ / (key + ".meta"), std::ios::binary);
  if (!meta) return std::nullopt;
  std::map<std::string, std::string> fields;
  std::string line;
  while (std::getline(meta, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) return std::nullopt;
    auto value = unescape_field(line.substr(tab + 1));
    if (!value) return std::nullopt;
    fields[line.substr(0, tab)] = *value;
  }
  for (const char *k : {"url", "final_url", "encoding", "fetched_at", "status"}) {
    if (!fields.count(k)) return std::nullopt;
  }
  auto status = FetchStatus::parse(fields["status"]);
  if (!status || !status->is_ok()) return std::nullopt;
  PageRecord rec;
  if (!parse_timestamp(fields["fetched_at"], &rec.fetched_at)) return std::nullopt;
  std::ifstream html(dir_ / (key + ".html"), std::ios::binary);
  if (!html) return std::nullopt;
  std::ostringstream buf;
  buf << html.rdbuf();
  rec.url = fields["url"];
  rec.final_url = fields["final_url"];
  rec.encoding = fields["encoding"];
  rec.status = *status;
  rec.raw_html = buf.str();
  return rec;
}

void PageCache::store(const PageRecord &page) {
  if (!page.status.is_ok() || !page.raw_html) {
    throw Error(ErrorCode::kInvalidArgument, "only ok pages are cached");
  }
  const std::string key = url_hash(page.url);
  std::lock_guard<std::mutex> lock(key_mutex(key));
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create cache dir " + dir_.string() + ": " + ec.message());
  }
  write_file_atomic(dir_ / (key + ".html"), *page.raw_html);
  std::string meta;
  meta += "url\t" + escape_field(page.url) + "\n";
  meta += "final_url\t" + escape_field(page.final_url) + "\n";
  meta += "encoding\t" + escape_field(page.encoding) + "\n";
  meta += "fetched_at\t" + format_timestamp(page.fetched_at) + "\n";
  meta += "status\t" + page.status.to_string() + "\n";
  // The .meta file lands last, so a torn entry reads as a miss.
  write_file_atomic(dir_ / (key + ".meta"), meta);
}

PageFetcher::PageFetcher(FetchPolicy policy,
                         std::shared_ptr<Transport> transport,
                         std::shared_ptr<Clock> clock)
    : policy_(policy), transport_(std::move(transport)), clock_(std::move(clock)) {
  policy_.validate();
}

void PageFetcher::acquire_slot() {
  std::unique_lock<std::mutex> lock(mu_);
  slot_cv_.wait(lock, [&] { return in_flight_ < policy_.max_concurrent; });
  ++in_flight_;
}

void PageFetcher::release_slot() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
  }
  slot_cv_.notify_one();
}

void PageFetcher::wait_for_host(const std::string &host) {
  TimePoint start;
  {
    std::lock_guard<std::mutex> lock(mu_);
    TimePoint now = clock_->now();
    auto it = next_start_.find(host);
    start = (it == next_start_.end()) ? now : std::max(now, it->second);
    next_start_[host] =
        start + std::chrono::milliseconds(policy_.per_host_interval_ms);
  }
  clock_->sleep_until(start);
}

PageRecord PageFetcher::fetch_page(const UrlRecord &u) {
  PageRecord rec;
  rec.url = u.url;
  rec.final_url = u.url;

  acquire_slot();
  struct SlotGuard {
    PageFetcher *f;
    ~SlotGuard() { f->release_slot(); }
  } guard{this};

  std::string current = u.url;
  for (int hop = 0;; ++hop) {
    UrlParts parts;
    try {
      parts = parse_url(current);
    } catch (const Error &) {
      rec.status = FetchStatus::of(FetchStatus::Kind::kNetworkError);
      return rec;
    }
    wait_for_host(host_key(parts));
    rec.fetched_at =
        std::chrono::time_point_cast<std::chrono::seconds>(clock_->now());
    rec.final_url = current;

    HttpRequest req;
    req.url = current;
    req.timeout_ms = policy_.timeout_ms;
    req.max_body_bytes = policy_.max_bytes;
    HttpResult result = transport_->get(req);
    if (auto *failure = std::get_if<TransportFailure>(&result)) {
      rec.status = FetchStatus::of(failure->kind == TransportFailure::Kind::kTimeout
                                       ? FetchStatus::Kind::kTimeout
                                       : FetchStatus::Kind::kNetworkError);
      return rec;
    }
    auto &resp = std::get<HttpResponse>(result);
    if (is_redirect(resp.status) && !resp.location.empty()) {
      if (hop >= policy_.max_redirects) {
        rec.status = FetchStatus::of(FetchStatus::Kind::kNetworkError);
        return rec;
      }
      try {
        current = resolve_location(current, resp.location);
      } catch (const Error &) {
        rec.status = FetchStatus::of(FetchStatus::Kind::kNetworkError);
        return rec;
      }
      continue;
    }
    if (resp.status != 200) {
      rec.status = FetchStatus::http_error(resp.status);
      return rec;
    }
    if (lower(resp.content_type).find("html") == std::string::npos) {
      rec.status = FetchStatus::of(FetchStatus::Kind::kNotHtml);
      return rec;
    }
    if (resp.truncated || resp.body.size() > policy_.max_bytes) {
      rec.status = FetchStatus::of(FetchStatus::Kind::kTooLarge);
      return rec;
    }
    rec.status = FetchStatus::ok();
    rec.encoding = detect_encoding(resp.content_type, resp.body);
    rec.raw_html = std::move(resp.body);
    return rec;
  }
}

PageCache &PageFetcher::cache_for(const std::filesystem::path &dir) {
  std::lock_guard<std::mutex> lock(mu_);
  auto &slot = caches_[dir];
  if (!slot) slot = std::make_unique<PageCache>(dir);
  return *slot;
}

PageRecord PageFetcher::get_or_fetch(const UrlRecord &u,
                                     const std::filesystem::path &cache_dir) {
  PageCache &cache = cache_for(cache_dir);
  if (auto hit = cache.load(u.url)) {
    hit->url = u.url;
    return *hit;
  }
  PageRecord rec = fetch_page(u);
  if (rec.status.is_ok()) cache.store(rec);
  return rec;
}

}  // namespace qtc
