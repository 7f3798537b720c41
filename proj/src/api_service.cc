#include "qtc/api_service.h"

#include <algorithm>
#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "qtc/error.h"
#include "qtc/text_extraction.h"

namespace qtc {
namespace {

using json = nlohmann::json;
using Response = ApiService::Response;

Response reply(int status, const json &body) { return {status, body.dump()}; }

Response error_reply(int status, const std::string &error,
                     const std::string &detail) {
  return reply(status, json{{"error", error}, {"detail", detail}});
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kEmpty:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kDuplicate:
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kNetwork:
      return 502;
    default:
      return 500;
  }
}

std::string key_of(const std::string &url) {
  try {
    return normalize_url(url);
  } catch (const Error &) {
    return url;
  }
}

json url_json(const UrlRecord &u) {
  json j{{"url", u.url},
         {"rank", u.rank},
         {"protocol", u.parts.protocol},
         {"host", u.parts.host},
         {"path", u.parts.path}};
  j["port"] = u.parts.port ? json(*u.parts.port) : json(nullptr);
  j["query"] = u.parts.query ? json(*u.parts.query) : json(nullptr);
  return j;
}

json spans_json(const std::vector<std::pair<std::size_t, std::size_t>> &spans) {
  json a = json::array();
  for (const auto &[b, e] : spans) a.push_back(json::array({b, e}));
  return a;
}

json pair_json(const std::pair<std::uint64_t, std::uint64_t> &p) {
  return json::array({p.first, p.second});
}

json stats_json(const CorpusStats &s) {
  json domains = json::object();
  for (Domain d : kAllDomains) {
    domains[domain_name(d)] = s.per_domain_counts[static_cast<std::size_t>(d)];
  }
  return json{{"n_questions", s.n_questions},
              {"total_urls", s.total_urls},
              {"urls_per_question", pair_json(s.urls_per_question)},
              {"n_texts", s.n_texts},
              {"correct_urls_per_question", pair_json(s.correct_urls_per_question)},
              {"per_domain_counts", domains}};
}

json entry_json(const CorpusEntry &e) {
  json j{{"question_id", e.question.id},
         {"text", e.assembled.text},
         {"passage_count", e.assembled.passage_count},
         {"source_urls", e.assembled.source_urls},
         {"accepted_by", accepted_by_name(e.accepted_by)},
         {"created_at", format_timestamp(e.created_at)},
         {"candidate_count", e.candidate_urls.size()},
         {"qualified_count", e.qualified_count()}};
  j["note"] = e.note ? json(*e.note) : json(nullptr);
  return j;
}

std::optional<json> parse_body(const std::string &body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

// Splits "/api/questions/<id>/<action>"; action is empty for the bare form.
bool split_question_path(const std::string &path, std::string *id,
                         std::string *action) {
  static const std::string prefix = "/api/questions/";
  if (path.compare(0, prefix.size(), prefix) != 0) return false;
  std::string rest = path.substr(prefix.size());
  auto slash = rest.find('/');
  if (slash == std::string::npos) {
    *id = rest;
    action->clear();
  } else {
    *id = rest.substr(0, slash);
    *action = rest.substr(slash + 1);
  }
  return !id->empty() && action->find('/') == std::string::npos;
}

}  // namespace

ApiService::ApiService(ServiceConfig config) : config_(std::move(config)) {
  if (config_.corpus_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no corpus dir given");
  }
  if (config_.cache_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no cache dir given");
  }
  if (config_.max_passages < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_passages must be >= 1");
  }
  config_.provider.validate();
  config_.fetch.validate();

  if (config_.seams.clock) {
    clock_ = config_.seams.clock;
  } else if (config_.fixed_clock) {
    clock_ = std::make_shared<FixedClock>(*config_.fixed_clock);
  } else {
    clock_ = std::make_shared<SystemClock>();
  }
  auto page_transport = config_.seams.page_transport;
  if (!page_transport) {
    if (config_.provider.kind == ProviderConfig::Kind::kFixture) {
      page_transport = std::make_shared<FixtureTransport>(*config_.provider.fixture_dir);
    } else {
      page_transport = std::make_shared<HttpTransport>();
    }
  }
  auto search_transport = config_.seams.search_transport;
  if (!search_transport) search_transport = std::make_shared<HttpTransport>();
  provider_ = make_search_provider(config_.provider, search_transport, clock_);
  fetcher_ = std::make_unique<PageFetcher>(config_.fetch, page_transport, clock_);

  store_ = CorpusStore::open(config_.corpus_dir);
  if (config_.questions_path) {
    for (auto &q : load_questions(*config_.questions_path)) {
      questions_.emplace(q.id, std::move(q));
    }
  }
  for (const auto &e : store_.entries()) questions_.emplace(e.question.id, e.question);
}

ApiService::~ApiService() = default;

int ApiService::bind(const std::string &host, int port) {
  server_ = std::make_unique<httplib::Server>();
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  server_->set_default_headers({
      {"Access-Control-Allow-Origin", config_.cors_origin},
      {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
      {"Access-Control-Allow-Headers", "Content-Type"},
  });
  auto dispatch = [this](const httplib::Request &req, httplib::Response &res) {
    std::optional<std::string> max;
    if (req.has_param("max")) max = req.get_param_value("max");
    Response r = handle(req.method, req.path, max, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
  server_->Options(".*", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });

  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) bound = 0;
  } else if (!server_->bind_to_port(host, port)) {
    bound = 0;
  }
  if (bound <= 0) {
    server_.reset();
    throw Error(ErrorCode::kIo,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void ApiService::run() {
  if (!server_) throw Error(ErrorCode::kInvalidArgument, "service is not bound");
  server_->listen_after_bind();
}

void ApiService::stop() {
  if (server_) server_->stop();
}

Response ApiService::handle(const std::string &method, const std::string &path,
                            const std::optional<std::string> &query_max,
                            const std::string &body) {
  try {
    if (path == "/api/questions") {
      if (method != "GET") return error_reply(405, "method_not_allowed", path);
      return list_questions();
    }
    if (path == "/api/stats") {
      if (method != "GET") return error_reply(405, "method_not_allowed", path);
      return stats();
    }
    std::string id, action;
    if (split_question_path(path, &id, &action)) {
      if (action == "search") {
        if (method != "GET") return error_reply(405, "method_not_allowed", path);
        return search(id, query_max);
      }
      if (action == "extract") {
        if (method != "POST") return error_reply(405, "method_not_allowed", path);
        return extract(id, body);
      }
      if (action == "decision") {
        if (method != "POST") return error_reply(405, "method_not_allowed", path);
        return decide(id, body);
      }
    }
    return error_reply(404, "not_found", "no route for " + method + " " + path);
  } catch (const Error &e) {
    return error_reply(http_status_for(e.code()), error_code_name(e.code()),
                       e.what());
  } catch (const std::exception &e) {
    return error_reply(500, "internal", e.what());
  }
}

Response ApiService::list_questions() {
  std::lock_guard<std::mutex> lock(mu_);
  json out = json::array();
  for (const auto &[id, q] : questions_) {
    out.push_back(json{{"id", q.id},
                       {"text", q.text},
                       {"domain", domain_name(q.domain)},
                       {"source", source_name(q.source)},
                       {"status", store_.contains(id) ? "built" : "pending"}});
  }
  return reply(200, out);
}

Response ApiService::search(const std::string &id,
                            const std::optional<std::string> &query_max) {
  auto qit = questions_.find(id);
  if (qit == questions_.end()) {
    return error_reply(404, "not_found", "unknown question id '" + id + "'");
  }
  int max = kDefaultMaxResults;
  if (query_max) {
    const std::string &s = *query_max;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), max);
    if (ec != std::errc() || p != s.data() + s.size() || max < 1) {
      return error_reply(400, "invalid_argument",
                         "max must be a positive integer, got '" + s + "'");
    }
  }
  std::vector<UrlRecord> urls;
  try {
    urls = provider_->search(build_query(qit->second, max));
  } catch (const Error &e) {
    return error_reply(502, "search_failed", e.what());
  }
  json out = json::array();
  for (const auto &u : urls) out.push_back(url_json(u));
  {
    std::lock_guard<std::mutex> lock(mu_);
    Session &s = sessions_[id];
    s.candidates = std::move(urls);
  }
  return reply(200, out);
}

Response ApiService::extract(const std::string &id, const std::string &body) {
  auto qit = questions_.find(id);
  if (qit == questions_.end()) {
    return error_reply(404, "not_found", "unknown question id '" + id + "'");
  }
  const Question &question = qit->second;
  auto req = parse_body(body);
  if (!req || !req->contains("url") || !(*req)["url"].is_string()) {
    return error_reply(400, "invalid_argument", "body must be {\"url\": string}");
  }
  const std::string url = (*req)["url"].get<std::string>();
  const std::string key = key_of(url);
  int rank = 0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto sit = sessions_.find(id);
    if (sit != sessions_.end()) {
      for (const auto &c : sit->second.candidates) {
        if (key_of(c.url) == key) rank = c.rank;
      }
    }
  }
  UrlRecord record;
  try {
    record = make_url_record(url, rank);
  } catch (const Error &e) {
    return error_reply(400, "invalid_argument", e.what());
  }

  PageRecord page = fetcher_->get_or_fetch(record, config_.cache_dir);
  auto remember = [&](Extraction x) {
    std::lock_guard<std::mutex> lock(mu_);
    sessions_[id].extractions[key] = std::move(x);
  };
  if (!page.status.is_ok()) {
    remember(Extraction{page.status, std::nullopt});
    return reply(502, json{{"error", "fetch_failed"},
                           {"detail", "fetching " + url + " failed"},
                           {"status", page.status.to_string()}});
  }
  ExtractedText extracted;
  try {
    extracted = filter_foreign_tokens(html_to_text(*page.raw_html, page.encoding));
  } catch (const Error &e) {
    remember(Extraction{page.status, std::nullopt});
    return reply(502, json{{"error", "extraction_failed"},
                           {"detail", e.what()},
                           {"status", page.status.to_string()}});
  }
  CandidateText c = score_candidate(url, rank, extracted.text, question);
  MatchSpans spans = locate_matches(c.clean_text, question);

  json out{{"url", url},
           {"status", page.status.to_string()},
           {"clean_text", c.clean_text},
           {"coverage", c.coverage},
           {"qualified", qualifies(c)},
           {"removed_foreign_tokens", extracted.removed_foreign_tokens},
           {"arabic_char_ratio", extracted.arabic_char_ratio},
           {"highlights",
            json{{"gold", spans_json(spans.gold)},
                 {"keywords", spans_json(spans.keywords)}}}};
  out["contains_gold"] = c.contains_gold ? json(*c.contains_gold) : json(nullptr);
  if (c.passages.empty()) {
    out["passage"] = nullptr;
  } else {
    const Passage &p = c.passages.front();
    out["passage"] = json{{"text", p.text},
                          {"coverage", p.coverage},
                          {"sentence_span",
                           json::array({p.sentence_span.first, p.sentence_span.second})}};
  }
  remember(Extraction{page.status, std::move(c)});
  return reply(200, out);
}

std::vector<CandidateUrl> ApiService::candidate_list(
    const Session &s, const std::string &accepted_key) const {
  std::vector<CandidateUrl> out;
  for (const auto &u : s.candidates) {
    const std::string key = key_of(u.url);
    CandidateUrl cu;
    cu.record = u;
    auto xit = s.extractions.find(key);
    if (xit != s.extractions.end()) {
      cu.status = xit->second.status;
      if (key == accepted_key) {
        cu.qualified = true;
      } else if (!s.rejected.count(key) && xit->second.candidate) {
        cu.qualified = qualifies(*xit->second.candidate);
      }
    }
    out.push_back(std::move(cu));
  }
  return out;
}

Response ApiService::decide(const std::string &id, const std::string &body) {
  auto qit = questions_.find(id);
  if (qit == questions_.end()) {
    return error_reply(404, "not_found", "unknown question id '" + id + "'");
  }
  auto req = parse_body(body);
  if (!req || !req->contains("url") || !(*req)["url"].is_string() ||
      !req->contains("accepted") || !(*req)["accepted"].is_boolean()) {
    return error_reply(400, "invalid_argument",
                       "body must be {\"url\": string, \"accepted\": bool}");
  }
  if (req->contains("question_id") &&
      (!(*req)["question_id"].is_string() ||
       (*req)["question_id"].get<std::string>() != id)) {
    return error_reply(400, "invalid_argument",
                       "question_id does not match the route");
  }
  std::optional<std::string> note;
  if (req->contains("note") && !(*req)["note"].is_null()) {
    if (!(*req)["note"].is_string()) {
      return error_reply(400, "invalid_argument", "note must be a string");
    }
    note = (*req)["note"].get<std::string>();
  }
  const std::string url = (*req)["url"].get<std::string>();
  const bool accepted = (*req)["accepted"].get<bool>();
  const std::string key = key_of(url);

  std::lock_guard<std::mutex> lock(mu_);
  auto sit = sessions_.find(id);
  const bool is_candidate =
      sit != sessions_.end() &&
      std::any_of(sit->second.candidates.begin(), sit->second.candidates.end(),
                  [&](const UrlRecord &u) { return key_of(u.url) == key; });
  if (!is_candidate) {
    return error_reply(400, "invalid_argument",
                       url + " is not a search candidate of " + id);
  }
  Session &s = sit->second;
  auto xit = s.extractions.find(key);
  if (xit == s.extractions.end()) {
    return error_reply(400, "invalid_argument", url + " has not been extracted");
  }

  if (accepted) {
    if (store_.contains(id)) {
      return error_reply(409, "conflict", "question " + id + " is already built");
    }
    if (!xit->second.candidate) {
      return error_reply(400, "invalid_argument",
                         url + " has no extracted text (" +
                             xit->second.status.to_string() + ")");
    }
    const CandidateText &c = *xit->second.candidate;
    const std::string text =
        c.passages.empty() ? c.clean_text : c.passages.front().text;
    if (text.empty()) {
      return error_reply(400, "invalid_argument", url + " yielded no text");
    }
    s.rejected.erase(key);
    CorpusEntry e;
    e.question = qit->second;
    e.assembled.question_id = id;
    e.assembled.text = text;
    e.assembled.passage_count = 1;
    e.assembled.source_urls = {url};
    e.candidate_urls = candidate_list(s, key);
    e.accepted_by = AcceptedBy::kHuman;
    e.created_at = std::chrono::time_point_cast<std::chrono::seconds>(clock_->now());
    e.note = note;
    store_.add_entry(e);
    return reply(200, json{{"question_id", id},
                           {"status", "built"},
                           {"accepted", true},
                           {"url", url},
                           {"entry", entry_json(*store_.find(id))}});
  }

  s.rejected.insert(key);
  json out{{"question_id", id}, {"accepted", false}, {"url", url}};
  if (const CorpusEntry *built = store_.find(id)) {
    std::vector<CandidateUrl> list = built->candidate_urls;
    bool found = false;
    for (auto &cu : list) {
      if (key_of(cu.record.url) == key) {
        cu.qualified = false;
        cu.status = xit->second.status;
        found = true;
      }
    }
    if (!found) {
      CandidateUrl cu;
      cu.record = make_url_record(url, static_cast<int>(list.size()) + 1);
      cu.status = xit->second.status;
      list.push_back(std::move(cu));
    }
    store_.replace_candidates(id, std::move(list));
    out["status"] = "built";
    out["entry"] = entry_json(*store_.find(id));
  } else {
    write_candidate_sidecar(config_.corpus_dir, id, candidate_list(s, ""));
    out["status"] = "pending";
    out["entry"] = nullptr;
  }
  return reply(200, out);
}

Response ApiService::stats() {
  std::lock_guard<std::mutex> lock(mu_);
  return reply(200, stats_json(compute_stats(store_)));
}

}  // namespace qtc
