#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semilabel/labels.hpp"

namespace semilabel {

// Joins the tokens of a multi-token n-gram (U+2581). The tokenizer treats it
// as whitespace, so it never occurs inside a token.
inline constexpr std::string_view kNgramSeparator = "\xE2\x96\x81";

struct Instance {
  std::string id;
  std::string text;                 // anonymized
  std::vector<std::string> tokens;  // tokenize(text)

  // Anonymizes `raw_text` and tokenizes the result.
  static Instance from_raw(std::string id, std::string_view raw_text);
};

struct LabeledInstance {
  Instance instance;
  HierLabel label;
};

enum class FilterReason { Keep, TooShort, TooFewWords, Url };

struct FilterDecision {
  bool keep = true;
  FilterReason reason = FilterReason::Keep;
};

std::string_view to_string(FilterReason reason);

inline constexpr std::size_t kMinCharacters = 18;
inline constexpr std::size_t kMinWords = 2;

// Rules in order: fewer than 18 characters, fewer than two words, URL.
FilterDecision filter_raw(std::string_view text);

// Number of unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

// Replaces every mention that starts a token with @USER. Idempotent.
std::string anonymize(std::string_view text);

std::vector<std::string> tokenize(std::string_view text);

// Contiguous n-grams for every requested order (ascending), left to right.
std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, std::span<const int> orders);

class StopwordTable {
 public:
  struct Entry {
    std::string word;
    std::uint64_t frequency = 0;
    double cumulative = 0.0;
  };

  static StopwordTable from_frequencies(std::vector<std::pair<std::string, std::uint64_t>> words);
  // CSV with header `word,frequency`.
  static StopwordTable from_csv(std::istream& in);
  // Top-20 Project Gutenberg words used for stream collection.
  static StopwordTable gutenberg_top20();

  // First entry whose cumulative share is >= u. Throws InputError outside [0,1].
  const std::string& sample(double u) const;
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Sequence of query words drawn from `table`, the way the stream collector
// picks the next stopword to track.
std::vector<std::string> simulate_collection_queries(const StopwordTable& table, std::size_t count, std::uint64_t seed);

// OLID layout: `id	tweet	subtask_a	subtask_b	subtask_c`, NULL for absent labels.
std::vector<LabeledInstance> parse_gold_tsv(std::istream& in);
void write_gold_tsv(std::ostream& out, std::span<const LabeledInstance> data);

struct RawDocument {
  std::string id;
  std::string text;
};

// One `{"id": ..., "text": ...}` object per line. Returns nullopt when the
// line is not such an object.
std::optional<RawDocument> parse_corpus_line(std::string_view line);
std::string format_corpus_line(std::string_view id, std::string_view text);

}  // namespace semilabel
