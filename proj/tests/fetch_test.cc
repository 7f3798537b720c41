#include <doctest.h>
#include <httplib.h>

#include <thread>

#include "qtc/error.h"
#include "qtc/page_fetcher.h"
#include "qtc/search_provider.h"
#include "support.h"

using namespace qtc;
using namespace qtc::testing;
using namespace std::chrono_literals;

TEST_CASE("parse_url splits absolute URLs") {
  auto p = parse_url("https://ar.wikipedia.org/wiki/X?y=1");
  CHECK(p.protocol == "https");
  CHECK(p.host == "ar.wikipedia.org");
  CHECK(p.path == "/wiki/X");
  CHECK(p.query == std::optional<std::string>("y=1"));
  CHECK_FALSE(p.port.has_value());

  auto d = parse_url("http://example.com");
  CHECK(d.path == "/");
  CHECK_FALSE(d.query.has_value());

  auto port = parse_url("HTTP://Example.COM:8080/a#frag");
  CHECK(port.host == "example.com");
  CHECK(port.port == std::optional<std::uint16_t>(8080));
  CHECK(port.path == "/a");

  for (const char *bad : {"wiki/X", "ftp://x.org/", "http://", "http://u@h/",
                          "http://h:99999/", "http://h k/"}) {
    CHECK_THROWS_AS(parse_url(bad), Error);
  }
}

TEST_CASE("url normalization and hashing") {
  CHECK(normalize_url("http://Example.com#top") == "http://example.com/");
  CHECK(url_hash("http://a.example/x#1") == url_hash("http://A.example/x#2"));
  CHECK(url_hash("http://a.example/x?q=1") != url_hash("http://a.example/x?q=2"));
  CHECK(url_hash("http://a.example/").size() == 16);
  // FNV-1a 64 reference values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("build_query joins keywords") {
  auto q = make_question("q1", "من صمم برج ايفل؟");
  auto sq = build_query(q);
  CHECK(sq.query_string() == "صمم برج ايفل");
  CHECK(sq.max_results() == 25);
  CHECK(build_query(make_question("q2", "ما هو الانترنت؟")).query_string() == "الانترنت");
  CHECK_THROWS_AS(SearchQuery("q1", "x", 0), Error);
  CHECK_THROWS_AS(SearchQuery("q1", "", 5), Error);
}

TEST_CASE("fixture provider") {
  FixtureSearchProvider p(kFixtureDir);
  auto q1 = make_question("q1", "من صمم برج ايفل؟");
  auto urls = p.search(build_query(q1));
  REQUIRE(urls.size() == 3);
  CHECK(urls[0].url == "http://wiki.example/eiffel");
  CHECK(urls[1].url == "http://travel.example/paris-tower");
  CHECK(urls[2].url == "http://broken.example/missing");
  for (int i = 0; i < 3; ++i) CHECK(urls[static_cast<std::size_t>(i)].rank == i + 1);

  CHECK(p.search(build_query(q1, 2)).size() == 2);
  CHECK(p.search(build_query(make_question("x", "ما هو الانترنت؟"))).empty());

  TempDir empty;
  CHECK_THROWS_AS(FixtureSearchProvider(empty.path()), Error);
}

TEST_CASE("rank_urls dedups and truncates") {
  auto r = rank_urls({"http://a.example/x", "not a url", "http://A.example/x#f",
                      "https://b.example/", "http://c.example/"},
                     2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].url == "http://a.example/x");
  CHECK(r[1].url == "https://b.example/");
  CHECK(r[1].rank == 2);
}

TEST_CASE("result listings") {
  CHECK(parse_result_listing("[\"http://a/\", \"http://b/\"]") ==
        std::vector<std::string>{"http://a/", "http://b/"});
  CHECK(parse_result_listing("{\"items\": [{\"link\": \"http://a/\"}]}") ==
        std::vector<std::string>{"http://a/"});
  CHECK(parse_result_listing("{\"results\": [{\"url\": \"http://r/\"}]}") ==
        std::vector<std::string>{"http://r/"});
  CHECK(parse_result_listing("http://a/\n\n  http://b/  \n") ==
        std::vector<std::string>{"http://a/", "http://b/"});
}

TEST_CASE("live provider queries the endpoint and spaces requests") {
  auto t = std::make_shared<FakeTransport>();
  auto clock = std::make_shared<ManualClock>();
  ProviderConfig cfg;
  cfg.kind = ProviderConfig::Kind::kLive;
  cfg.endpoint = "http://search.example/s";
  cfg.min_interval_ms = 500;
  LiveSearchProvider p(cfg, t, clock);
  auto q = make_question("q1", "من صمم برج ايفل؟");
  const auto query = build_query(q, 2);

  CHECK_THROWS_AS(p.search(query), Error);  // 404 from the fake
  auto sent = t->log();
  REQUIRE(sent.size() == 1);
  CHECK(sent[0].rfind("http://search.example/s?q=", 0) == 0);
  CHECK(sent[0].find("num=2") != std::string::npos);

  HttpResponse ok;
  ok.status = 200;
  ok.content_type = "application/json";
  ok.body = "[\"http://a.example/\", \"http://b.example/\", \"http://c.example/\"]";
  t->set(sent[0], ok);
  auto before = clock->now();
  auto urls = p.search(query);
  CHECK(urls.size() == 2);
  CHECK(clock->now() - before >= 500ms);
}

TEST_CASE("FetchStatus strings round-trip") {
  for (FetchStatus s : {FetchStatus::ok(), FetchStatus::http_error(404),
                        FetchStatus::of(FetchStatus::Kind::kTimeout),
                        FetchStatus::of(FetchStatus::Kind::kNotHtml),
                        FetchStatus::of(FetchStatus::Kind::kTooLarge),
                        FetchStatus::of(FetchStatus::Kind::kNetworkError)}) {
    CHECK(FetchStatus::parse(s.to_string()) == std::optional<FetchStatus>(s));
  }
  CHECK(FetchStatus::http_error(404).to_string() == "http_error(404)");
  CHECK_FALSE(FetchStatus::parse("http_error(x)").has_value());
}

TEST_CASE("detect_encoding") {
  CHECK(detect_encoding("text/html; charset=windows-1256", "") == "WINDOWS-1256");
  CHECK(detect_encoding("text/html", "<meta charset=\"iso-8859-6\">") == "ISO-8859-6");
  CHECK(detect_encoding("text/html",
                        "<meta http-equiv=\"Content-Type\" content=\"text/html; "
                        "charset=cp1256\">") == "WINDOWS-1256");
  CHECK(detect_encoding("text/html", "<p>x</p>") == "UTF-8");
}

TEST_CASE("fixture page is served byte for byte") {
  PageFetcher f(FetchPolicy{}, std::make_shared<FixtureTransport>(kFixtureDir),
                std::make_shared<FixedClock>());
  auto rec = make_url_record("http://wiki.example/eiffel", 1);
  auto page = f.fetch_page(rec);
  CHECK(page.status.is_ok());
  REQUIRE(page.raw_html.has_value());
  CHECK(*page.raw_html ==
        read_file(kFixtureDir / "pages" / (url_hash(rec.url) + ".html")));
  auto missing = f.fetch_page(make_url_record("http://broken.example/missing", 3));
  CHECK(missing.status == FetchStatus::http_error(404));
  CHECK_FALSE(missing.raw_html.has_value());
}

TEST_CASE("fetch gates: redirects, non-html, size, failures") {
  auto t = std::make_shared<FakeTransport>();
  FetchPolicy policy;
  policy.max_bytes = 10;
  policy.per_host_interval_ms = 0;
  PageFetcher f(policy, t, std::make_shared<FixedClock>());

  HttpResponse redirect;
  redirect.status = 301;
  redirect.location = "/final";
  t->set("http://r.example/start", redirect);
  t->set_html("http://r.example/final", "<p>ok</p>");
  auto page = f.fetch_page(make_url_record("http://r.example/start", 1));
  CHECK(page.status.is_ok());
  CHECK(page.final_url == "http://r.example/final");
  CHECK(page.url == "http://r.example/start");

  HttpResponse loop;
  loop.status = 302;
  loop.location = "http://l.example/";
  t->set("http://l.example/", loop);
  CHECK(f.fetch_page(make_url_record("http://l.example/", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kNetworkError));

  HttpResponse pdf;
  pdf.status = 200;
  pdf.content_type = "application/pdf";
  pdf.body = "%PDF";
  t->set("http://p.example/", pdf);
  CHECK(f.fetch_page(make_url_record("http://p.example/", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kNotHtml));

  t->set_html("http://big.example/", std::string(11, 'x'));
  t->set_html("http://fit.example/", std::string(10, 'x'));
  CHECK(f.fetch_page(make_url_record("http://big.example/", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kTooLarge));
  CHECK(f.fetch_page(make_url_record("http://fit.example/", 1)).status.is_ok());

  t->set("http://t.example/", TransportFailure{TransportFailure::Kind::kTimeout, "slow"});
  CHECK(f.fetch_page(make_url_record("http://t.example/", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kTimeout));
  CHECK(f.fetch_page(make_url_record("http://none.example/", 1)).status ==
        FetchStatus::http_error(404));
}

TEST_CASE("cache: hit, negative results, fragments") {
  TempDir cache;
  auto t = std::make_shared<FakeTransport>();
  FetchPolicy policy;
  policy.per_host_interval_ms = 0;
  PageFetcher f(policy, t, std::make_shared<FixedClock>());
  t->set_html("http://c.example/page", "<p>نص</p>");

  auto first = f.get_or_fetch(make_url_record("http://c.example/page", 1), cache.path());
  CHECK(t->count() == 1);
  auto second = f.get_or_fetch(make_url_record("http://c.example/page", 1), cache.path());
  CHECK(t->count() == 1);
  CHECK(second.raw_html == first.raw_html);
  CHECK(second.status.is_ok());

  f.get_or_fetch(make_url_record("http://c.example/page#a", 1), cache.path());
  CHECK(t->count() == 1);

  f.get_or_fetch(make_url_record("http://c.example/missing", 1), cache.path());
  f.get_or_fetch(make_url_record("http://c.example/missing", 1), cache.path());
  CHECK(t->count() == 3);

  // A fresh fetcher reads the same files.
  PageFetcher g(policy, t, std::make_shared<FixedClock>());
  auto third = g.get_or_fetch(make_url_record("http://c.example/page", 1), cache.path());
  CHECK(t->count() == 3);
  CHECK(third.raw_html == first.raw_html);
  CHECK(third.encoding == first.encoding);
}

TEST_CASE("per-host politeness follows the injected clock") {
  auto t = std::make_shared<FakeTransport>();
  auto clock = std::make_shared<ManualClock>();
  FetchPolicy policy;
  policy.per_host_interval_ms = 1000;
  PageFetcher f(policy, t, clock);
  t->set_html("http://h.example/1", "<p>a</p>");
  t->set_html("http://h.example/2", "<p>b</p>");
  t->set_html("http://o.example/1", "<p>c</p>");

  const auto start = clock->now();
  f.fetch_page(make_url_record("http://h.example/1", 1));
  CHECK(clock->now() == start);
  f.fetch_page(make_url_record("http://o.example/1", 1));
  CHECK(clock->now() == start);
  f.fetch_page(make_url_record("http://h.example/2", 2));
  CHECK(clock->now() - start == 1000ms);
  clock->advance(5000ms);
  const auto later = clock->now();
  f.fetch_page(make_url_record("http://h.example/1", 1));
  CHECK(clock->now() == later);
}

namespace {

// Counts simultaneous requests and blocks each one briefly.
class SlowTransport : public Transport {
 public:
  HttpResult get(const HttpRequest &) override {
    int now = ++active_;
    int prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(20ms);
    --active_;
    HttpResponse r;
    r.status = 200;
    r.content_type = "text/html";
    r.body = "<p>x</p>";
    return r;
  }
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

}  // namespace

TEST_CASE("at most max_concurrent requests are in flight") {
  auto t = std::make_shared<SlowTransport>();
  FetchPolicy policy;
  policy.max_concurrent = 3;
  policy.per_host_interval_ms = 0;
  PageFetcher f(policy, t, std::make_shared<FixedClock>());
  std::vector<std::jthread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&f, i] {
      f.fetch_page(make_url_record("http://h" + std::to_string(i) + ".example/", 1));
    });
  }
  threads.clear();
  CHECK(t->peak_.load() <= 3);
  CHECK(t->peak_.load() >= 2);
}

TEST_CASE("http transport against a local server") {
  httplib::Server server;
  server.Get("/page", [](const httplib::Request &, httplib::Response &res) {
    res.set_content("<p>مرحبا</p>", "text/html; charset=utf-8");
  });
  server.Get("/moved", [](const httplib::Request &, httplib::Response &res) {
    res.set_redirect("/page");
  });
  server.Get("/big", [](const httplib::Request &, httplib::Response &res) {
    res.set_content(std::string(5000, 'x'), "text/html");
  });
  server.Get("/json", [](const httplib::Request &, httplib::Response &res) {
    res.set_content("{}", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::jthread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  FetchPolicy policy;
  policy.max_bytes = 1000;
  policy.per_host_interval_ms = 0;
  PageFetcher f(policy, std::make_shared<HttpTransport>(), std::make_shared<SystemClock>());

  auto ok = f.fetch_page(make_url_record(base + "/page", 1));
  CHECK(ok.status.is_ok());
  CHECK(ok.raw_html == std::optional<std::string>("<p>مرحبا</p>"));
  CHECK(ok.encoding == "UTF-8");
  auto moved = f.fetch_page(make_url_record(base + "/moved", 1));
  CHECK(moved.status.is_ok());
  CHECK(moved.final_url == base + "/page");
  CHECK(f.fetch_page(make_url_record(base + "/nothing", 1)).status ==
        FetchStatus::http_error(404));
  CHECK(f.fetch_page(make_url_record(base + "/big", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kTooLarge));
  CHECK(f.fetch_page(make_url_record(base + "/json", 1)).status ==
        FetchStatus::of(FetchStatus::Kind::kNotHtml));

  server.stop();
}
