#include "qtc/corpus_store.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qtc/error.h"

namespace qtc {
namespace {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path &path, std::string_view content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() +
                                    ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write on " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::optional<std::string> read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view content) {
  std::vector<std::string_view> lines = split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool parse_uint(std::string_view s, std::uint64_t *out) {
  if (s.empty() || s.size() > 18) return false;
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  *out = v;
  return true;
}

std::string gold_field(const std::optional<std::string> &gold) {
  if (!gold) return "-";
  std::string escaped = escape_field(*gold);
  return escaped == "-" ? "\\-" : escaped;
}

std::string manifest_line(const CorpusEntry &e) {
  const Question &q = e.question;
  std::string line;
  line += q.id;
  line += '\t';
  line += domain_name(q.domain);
  line += '\t';
  line += source_name(q.source);
  line += '\t';
  line += escape_field(q.text);
  line += '\t';
  line += gold_field(q.gold_answer);
  line += '\t';
  line += entry_text_path(q);
  line += '\t';
  line += std::to_string(e.assembled.passage_count);
  line += '\t';
  line += std::to_string(e.candidate_urls.size());
  line += '\t';
  line += std::to_string(e.qualified_count());
  line += '\t';
  line += accepted_by_name(e.accepted_by);
  line += '\n';
  return line;
}

std::string urls_content(const std::vector<CandidateUrl> &candidates) {
  std::string out;
  for (const auto &c : candidates) {
    out += std::to_string(c.record.rank);
    out += '\t';
    out += c.status ? c.status->to_string() : "-";
    out += '\t';
    out += c.qualified ? "1" : "0";
    out += '\t';
    out += escape_field(c.record.url);
    out += '\n';
  }
  return out;
}

std::string meta_content(const CorpusEntry &e) {
  std::string out = "created_at\t" + format_timestamp(e.created_at) + "\n";
  if (e.note) out += "note\t" + escape_field(*e.note) + "\n";
  for (const auto &u : e.assembled.source_urls) {
    out += "source_url\t" + escape_field(u) + "\n";
  }
  return out;
}

fs::path urls_path(const fs::path &dir, std::string_view id) {
  return dir / "urls" / (std::string(id) + ".urls");
}

fs::path meta_path(const fs::path &dir, std::string_view id) {
  return dir / "meta" / (std::string(id) + ".meta");
}

void validate_entry(const CorpusEntry &e) {
  auto bad = [&](const std::string &what) {
    return Error(ErrorCode::kInvalidArgument,
                 "invalid corpus entry '" + e.question.id + "': " + what);
  };
  if (!is_valid_question_id(e.question.id)) throw bad("bad question id");
  if (e.assembled.question_id != e.question.id) {
    throw bad("assembled text belongs to '" + e.assembled.question_id + "'");
  }
  if (e.candidate_urls.empty()) throw bad("no candidate URLs");
  if (e.assembled.passage_count < 1) throw bad("passage_count < 1");
  if (e.assembled.source_urls.empty()) throw bad("no source URLs");
  std::set<std::string> seen(e.assembled.source_urls.begin(),
                             e.assembled.source_urls.end());
  if (seen.size() != e.assembled.source_urls.size()) {
    throw bad("duplicate source URLs");
  }
}

void write_entry_files(const fs::path &dir, const CorpusEntry &e,
                       const std::function<void(std::string_view)> &hook) {
  write_file_atomic(dir / entry_text_path(e.question), e.assembled.text + "\n");
  if (hook) hook("text");
  write_file_atomic(urls_path(dir, e.question.id), urls_content(e.candidate_urls));
  if (hook) hook("urls");
  write_file_atomic(meta_path(dir, e.question.id), meta_content(e));
  if (hook) hook("meta");
}

void write_manifest(const fs::path &dir, const std::vector<CorpusEntry> &entries,
                    const CorpusEntry *extra) {
  std::string content;
  for (const auto &e : entries) content += manifest_line(e);
  if (extra) content += manifest_line(*extra);
  write_file_atomic(dir / kManifestName, content);
}

}  // namespace

const char *accepted_by_name(AcceptedBy a) {
  return a == AcceptedBy::kHuman ? "human" : "auto";
}

std::size_t CorpusEntry::qualified_count() const {
  return static_cast<std::size_t>(
      std::count_if(candidate_urls.begin(), candidate_urls.end(),
                    [](const CandidateUrl &c) { return c.qualified; }));
}

std::string entry_text_path(const Question &q) {
  return std::string(domain_name(q.domain)) + "/" + q.id + ".txt";
}

CorpusStore CorpusStore::open(const fs::path &dir) {
  CorpusStore store;
  if (fs::exists(dir / kManifestName)) store = load_corpus(dir);
  store.root_ = dir;
  return store;
}

const CorpusEntry *CorpusStore::find(std::string_view question_id) const {
  for (const auto &e : entries_) {
    if (e.question.id == question_id) return &e;
  }
  return nullptr;
}

void CorpusStore::add_entry(CorpusEntry e) {
  if (contains(e.question.id)) {
    throw Error(ErrorCode::kDuplicate,
                "duplicate question id '" + e.question.id + "' in corpus");
  }
  validate_entry(e);
  e.question = analyze_question(std::move(e.question));
  if (root_) {
    write_entry_files(*root_, e, write_hook_);
    write_manifest(*root_, entries_, &e);
  }
  entries_.push_back(std::move(e));
}

void CorpusStore::replace_candidates(std::string_view question_id,
                                     std::vector<CandidateUrl> candidates) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto &e) {
    return e.question.id == question_id;
  });
  if (it == entries_.end()) {
    throw Error(ErrorCode::kNotFound,
                "no corpus entry for '" + std::string(question_id) + "'");
  }
  CorpusEntry updated = *it;
  updated.candidate_urls = std::move(candidates);
  validate_entry(updated);
  if (root_) {
    write_file_atomic(urls_path(*root_, question_id),
                      urls_content(updated.candidate_urls));
    std::vector<CorpusEntry> next = entries_;
    next[static_cast<std::size_t>(it - entries_.begin())] = updated;
    write_manifest(*root_, next, nullptr);
  }
  *it = std::move(updated);
}

void save_corpus(const CorpusStore &store, const fs::path &dir) {
  for (const auto &e : store.entries()) write_entry_files(dir, e, nullptr);
  write_manifest(dir, store.entries(), nullptr);
}

CorpusStore load_corpus(const fs::path &dir) {
  const fs::path manifest = dir / kManifestName;
  auto content = read_file(manifest);
  if (!content) {
    throw Error(ErrorCode::kNotFound, "missing corpus manifest " + manifest.string());
  }
  CorpusStore store;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(*content)) {
    ++line_no;
    auto corrupt = [&](const std::string &what) {
      return Error(ErrorCode::kParse, manifest.string() + ":" +
                                          std::to_string(line_no) + ": " + what);
    };
    auto fields = split(line, '\t');
    if (fields.size() != 10) {
      throw corrupt("expected 10 fields, got " + std::to_string(fields.size()));
    }
    CorpusEntry e;
    Question &q = e.question;
    q.id = std::string(fields[0]);
    if (!is_valid_question_id(q.id)) throw corrupt("bad question id");
    if (!ids.insert(q.id).second) throw corrupt("duplicate id " + q.id);
    auto domain = parse_domain(fields[1]);
    auto source = parse_source(fields[2]);
    if (!domain) throw corrupt("unknown domain " + std::string(fields[1]));
    if (!source) throw corrupt("unknown source " + std::string(fields[2]));
    q.domain = *domain;
    q.source = *source;
    auto text = unescape_field(fields[3]);
    if (!text) throw corrupt("bad escape in question text");
    q.text = *text;
    if (fields[4] != "-") {
      auto gold = unescape_field(fields[4]);
      if (!gold) throw corrupt("bad escape in gold answer");
      q.gold_answer = *gold;
    }
    try {
      q = analyze_question(std::move(q));
    } catch (const Error &err) {
      throw corrupt(err.what());
    }
    if (fields[5] != entry_text_path(q)) {
      throw corrupt("unexpected text path " + std::string(fields[5]));
    }
    std::uint64_t passages = 0, url_count = 0, qualified = 0;
    if (!parse_uint(fields[6], &passages) || !parse_uint(fields[7], &url_count) ||
        !parse_uint(fields[8], &qualified)) {
      throw corrupt("bad count field");
    }
    if (fields[9] == "auto") {
      e.accepted_by = AcceptedBy::kAuto;
    } else if (fields[9] == "human") {
      e.accepted_by = AcceptedBy::kHuman;
    } else {
      throw corrupt("bad accepted_by " + std::string(fields[9]));
    }

    const fs::path text_file = dir / fields[5];
    auto body = read_file(text_file);
    if (!body) {
      throw Error(ErrorCode::kNotFound,
                  manifest.string() + ":" + std::to_string(line_no) +
                      ": missing text file " + text_file.string());
    }
    if (!body->empty() && body->back() == '\n') body->pop_back();
    e.assembled.question_id = q.id;
    e.assembled.text = std::move(*body);
    e.assembled.passage_count = static_cast<int>(passages);

    const fs::path urls_file = urls_path(dir, q.id);
    auto urls = read_file(urls_file);
    if (!urls) {
      throw Error(ErrorCode::kNotFound,
                  manifest.string() + ":" + std::to_string(line_no) +
                      ": missing URL list " + urls_file.string());
    }
    for (std::string_view u : lines_of(*urls)) {
      auto parts = split(u, '\t');
      std::uint64_t rank = 0;
      if (parts.size() != 4 || !parse_uint(parts[0], &rank) ||
          (parts[2] != "0" && parts[2] != "1")) {
        throw corrupt("malformed line in " + urls_file.string());
      }
      CandidateUrl c;
      if (parts[1] != "-") {
        c.status = FetchStatus::parse(parts[1]);
        if (!c.status) throw corrupt("bad status in " + urls_file.string());
      }
      c.qualified = parts[2] == "1";
      auto url = unescape_field(parts[3]);
      try {
        c.record = make_url_record(url.value_or(""), static_cast<int>(rank));
      } catch (const Error &err) {
        throw corrupt(err.what());
      }
      e.candidate_urls.push_back(std::move(c));
    }
    if (e.candidate_urls.size() != url_count || e.qualified_count() != qualified) {
      throw corrupt("URL counts disagree with " + urls_file.string());
    }

    const fs::path meta_file = meta_path(dir, q.id);
    auto meta = read_file(meta_file);
    if (!meta) {
      throw Error(ErrorCode::kNotFound,
                  manifest.string() + ":" + std::to_string(line_no) +
                      ": missing metadata " + meta_file.string());
    }
    bool have_created = false;
    for (std::string_view m : lines_of(*meta)) {
      auto tab = m.find('\t');
      if (tab == std::string_view::npos) throw corrupt("malformed " + meta_file.string());
      auto key = m.substr(0, tab);
      auto value = unescape_field(m.substr(tab + 1));
      if (!value) throw corrupt("bad escape in " + meta_file.string());
      if (key == "created_at") {
        if (!parse_timestamp(*value, &e.created_at)) {
          throw corrupt("bad created_at in " + meta_file.string());
        }
        have_created = true;
      } else if (key == "note") {
        e.note = *value;
      } else if (key == "source_url") {
        e.assembled.source_urls.push_back(*value);
      }
    }
    if (!have_created) throw corrupt("no created_at in " + meta_file.string());
    try {
      validate_entry(e);
    } catch (const Error &err) {
      throw corrupt(err.what());
    }
    store.entries_.push_back(std::move(e));
  }
  return store;
}

CorpusStats compute_stats(const CorpusStore &store) {
  CorpusStats s;
  bool first = true;
  for (const auto &e : store.entries()) {
    const std::uint64_t urls = e.candidate_urls.size();
    const std::uint64_t correct = e.qualified_count();
    ++s.n_questions;
    if (!e.assembled.text.empty()) ++s.n_texts;
    s.total_urls += urls;
    if (first) {
      s.urls_per_question = {urls, urls};
      s.correct_urls_per_question = {correct, correct};
      first = false;
    } else {
      s.urls_per_question.first = std::min(s.urls_per_question.first, urls);
      s.urls_per_question.second = std::max(s.urls_per_question.second, urls);
      s.correct_urls_per_question.first =
          std::min(s.correct_urls_per_question.first, correct);
      s.correct_urls_per_question.second =
          std::max(s.correct_urls_per_question.second, correct);
    }
    ++s.per_domain_counts[static_cast<std::size_t>(e.question.domain)];
  }
  return s;
}

std::string format_stats(const CorpusStats &stats) {
  std::string out;
  auto range = [](const std::pair<std::uint64_t, std::uint64_t> &r) {
    return std::to_string(r.first) + "-" + std::to_string(r.second);
  };
  out += "n_questions\t" + std::to_string(stats.n_questions) + "\n";
  out += "total_urls\t" + std::to_string(stats.total_urls) + "\n";
  out += "urls_per_question\t" + range(stats.urls_per_question) + "\n";
  out += "n_texts\t" + std::to_string(stats.n_texts) + "\n";
  out += "correct_urls_per_question\t" + range(stats.correct_urls_per_question) + "\n";
  for (Domain d : kAllDomains) {
    out += std::string("domain.") + domain_name(d) + "\t" +
           std::to_string(stats.per_domain_counts[static_cast<std::size_t>(d)]) +
           "\n";
  }
  return out;
}

void write_candidate_sidecar(const fs::path &dir, std::string_view question_id,
                             const std::vector<CandidateUrl> &candidates) {
  write_file_atomic(urls_path(dir, question_id), urls_content(candidates));
}

}  // namespace qtc
