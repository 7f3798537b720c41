#ifndef QTC_CORPUS_STORE_H_
#define QTC_CORPUS_STORE_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtc/answer_filter.h"
#include "qtc/page_fetcher.h"
#include "qtc/question_bank.h"
#include "qtc/search_provider.h"

namespace qtc {

enum class AcceptedBy { kAuto, kHuman };

const char *accepted_by_name(AcceptedBy a);

struct CandidateUrl {
  UrlRecord record;
  std::optional<FetchStatus> status;  // absent when never fetched
  bool qualified = false;

  friend bool operator==(const CandidateUrl &, const CandidateUrl &) = default;
};

struct CorpusEntry {
  Question question;
  AssembledText assembled;
  std::vector<CandidateUrl> candidate_urls;
  AcceptedBy accepted_by = AcceptedBy::kAuto;
  std::chrono::sys_seconds created_at{};
  std::optional<std::string> note;

  std::size_t qualified_count() const;

  friend bool operator==(const CorpusEntry &, const CorpusEntry &) = default;
};

struct CorpusStats {
  std::uint64_t n_questions = 0;
  std::uint64_t total_urls = 0;
  std::pair<std::uint64_t, std::uint64_t> urls_per_question{0, 0};
  std::uint64_t n_texts = 0;
  std::pair<std::uint64_t, std::uint64_t> correct_urls_per_question{0, 0};
  std::array<std::uint64_t, 5> per_domain_counts{};  // indexed by Domain

  friend bool operator==(const CorpusStats &, const CorpusStats &) = default;
};

// The corpus of question/text pairs. A store is either purely in memory or
// bound to a directory, in which case every add_entry is persisted:
//
//   <dir>/corpus.manifest      one TAB-separated line per entry
//   <dir>/<Domain>/<id>.txt    the assembled text
//   <dir>/urls/<id>.urls       rank TAB status TAB qualified TAB url
//   <dir>/meta/<id>.meta       created_at, note, source_url lines
//
// The manifest is rewritten last (temp file + rename), so a crash never
// leaves a manifest line whose files are missing.
//
// Not internally synchronized; callers serialize writes.
class CorpusStore {
 public:
  CorpusStore() = default;

  // Binds to dir, loading the manifest when one exists.
  static CorpusStore open(const std::filesystem::path &dir);

  const std::vector<CorpusEntry> &entries() const { return entries_; }
  const CorpusEntry *find(std::string_view question_id) const;
  bool contains(std::string_view question_id) const {
    return find(question_id) != nullptr;
  }
  const std::optional<std::filesystem::path> &root() const { return root_; }

  // Throws kDuplicate for a known id, kInvalidArgument for an entry that
  // breaks its invariants, kIo when persisting fails.
  void add_entry(CorpusEntry e);

  // Replaces the candidate list of a stored entry (e.g. after a curator
  // rejects one of its URLs).
  void replace_candidates(std::string_view question_id,
                          std::vector<CandidateUrl> candidates);

  // Test seam: called with "text", "urls", "meta" after each file of an
  // entry is written and before the manifest is updated.
  void set_write_hook(std::function<void(std::string_view)> hook) {
    write_hook_ = std::move(hook);
  }

  friend bool operator==(const CorpusStore &a, const CorpusStore &b) {
    return a.entries_ == b.entries_;
  }

 private:
  friend CorpusStore load_corpus(const std::filesystem::path &dir);

  std::vector<CorpusEntry> entries_;
  std::optional<std::filesystem::path> root_;
  std::function<void(std::string_view)> write_hook_;
};

void save_corpus(const CorpusStore &store, const std::filesystem::path &dir);

// Throws kParse (with the manifest line number) on corrupt input and
// kNotFound naming the missing file.
CorpusStore load_corpus(const std::filesystem::path &dir);

CorpusStats compute_stats(const CorpusStore &store);

// "name<TAB>value" lines in Table I order, then per-domain counts.
std::string format_stats(const CorpusStats &stats);

// Writes <dir>/urls/<id>.urls for a question that has no entry yet.
void write_candidate_sidecar(const std::filesystem::path &dir,
                             std::string_view question_id,
                             const std::vector<CandidateUrl> &candidates);

inline constexpr const char *kManifestName = "corpus.manifest";

// The text-file path recorded in the manifest, relative to the corpus root.
std::string entry_text_path(const Question &q);

}  // namespace qtc

#endif  // QTC_CORPUS_STORE_H_
