#include "semilabel/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semilabel/errors.hpp"

namespace semilabel {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_handle_char(char c) { return is_ascii_alnum(c) || c == '_'; }

// Non-ASCII bytes belong to words; ASCII punctuation does not.
bool is_word_char(char c) { return is_handle_char(c) || static_cast<unsigned char>(c) >= 0x80; }

// Punctuation kept inside a word when flanked by word characters: don't, f*ck, well-known.
bool is_joiner(char c) { return c == '\'' || c == '*' || c == '-'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

bool icontains(std::string_view hay, std::string_view needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                        [](char a, char b) { return ascii_lower(a) == ascii_lower(b); });
  return it != hay.end();
}

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    char c = chunk[i];
    if (c == '@' && i + 1 < chunk.size() && is_handle_char(chunk[i + 1])) {
      std::size_t j = i + 1;
      while (j < chunk.size() && is_handle_char(chunk[j])) ++j;
      std::string_view mention = chunk.substr(i, j - i);
      out.emplace_back(mention == "@USER" ? std::string(mention) : lowercase(mention));
      i = j;
    } else if (is_word_char(c)) {
      std::size_t j = i + 1;
      while (j < chunk.size()) {
        if (is_word_char(chunk[j])) {
          ++j;
        } else if (is_joiner(chunk[j]) && j + 1 < chunk.size() && is_word_char(chunk[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
      out.push_back(lowercase(chunk.substr(i, j - i)));
      i = j;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string row_error(std::size_t row, const std::string& what) {
  return "gold TSV row " + std::to_string(row) + ": " + what;
}

}  // namespace

Instance Instance::from_raw(std::string id, std::string_view raw_text) {
  Instance inst;
  inst.id = std::move(id);
  inst.text = anonymize(raw_text);
  inst.tokens = tokenize(inst.text);
  return inst;
}

std::string_view to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::Keep: return "keep";
    case FilterReason::TooShort: return "too_short";
    case FilterReason::TooFewWords: return "too_few_words";
    case FilterReason::Url: return "url";
  }
  return "?";
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

FilterDecision filter_raw(std::string_view text) {
  if (utf8_length(text) < kMinCharacters) return {false, FilterReason::TooShort};

  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  if (words < kMinWords) return {false, FilterReason::TooFewWords};

  if (icontains(text, "http://") || icontains(text, "https://") || icontains(text, "www.")) {
    return {false, FilterReason::Url};
  }
  return {};
}

std::string anonymize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool starts_token = i == 0 || !is_word_char(text[i - 1]);
    if (text[i] == '@' && starts_token && i + 1 < text.size() && is_handle_char(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_handle_char(text[j])) ++j;
      out += "@USER";
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    // Whitespace, plus the reserved n-gram separator.
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (text.substr(i, kNgramSeparator.size()) == kNgramSeparator) {
      i += kNgramSeparator.size();
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j]) && text.substr(j, kNgramSeparator.size()) != kNgramSeparator) ++j;
    tokenize_chunk(text.substr(i, j - i), tokens);
    i = j;
  }
  return tokens;
}

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, std::span<const int> orders) {
  std::set<int> sorted(orders.begin(), orders.end());
  std::vector<std::string> grams;
  for (int n : sorted) {
    if (n < 1 || tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) {
        gram += kNgramSeparator;
        gram += tokens[i + k];
      }
      grams.push_back(std::move(gram));
    }
  }
  return grams;
}

StopwordTable StopwordTable::from_frequencies(std::vector<std::pair<std::string, std::uint64_t>> words) {
  if (words.empty()) throw InputError("stopword table is empty");
  long double total = 0;
  for (const auto& [word, freq] : words) {
    if (freq == 0) throw InputError("stopword '" + word + "' has zero frequency");
    total += static_cast<long double>(freq);
  }
  StopwordTable table;
  long double running = 0;
  for (auto& [word, freq] : words) {
    running += static_cast<long double>(freq);
    table.entries_.push_back({std::move(word), freq, static_cast<double>(running / total)});
  }
  table.entries_.back().cumulative = 1.0;
  return table;
}

StopwordTable StopwordTable::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("stopword CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "word,frequency") throw InputError("stopword CSV header must be 'word,frequency'");
  std::vector<std::pair<std::string, std::uint64_t>> words;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("stopword CSV row " + std::to_string(row) + ": missing comma");
    try {
      std::size_t used = 0;
      std::string freq = line.substr(comma + 1);
      unsigned long long value = std::stoull(freq, &used);
      if (used != freq.size()) throw std::invalid_argument("trailing");
      words.emplace_back(line.substr(0, comma), value);
    } catch (const std::exception&) {
      throw InputError("stopword CSV row " + std::to_string(row) + ": bad frequency");
    }
  }
  return from_frequencies(std::move(words));
}

StopwordTable StopwordTable::gutenberg_top20() {
  return from_frequencies({
      {"the", 56271872}, {"of", 33950064}, {"and", 29944184}, {"to", 25956096}, {"in", 17420636},
      {"i", 11764797},   {"that", 11073318}, {"was", 10078245}, {"his", 8799755}, {"he", 8397205},
      {"it", 8058110},   {"with", 7725512},  {"is", 7557477},   {"for", 7097981}, {"as", 7037543},
      {"had", 6139336},  {"you", 6048903},   {"not", 5741803},  {"be", 5662527},  {"her", 5202501},
  });
}

const std::string& StopwordTable::sample(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InputError("stopword sample point must lie in [0,1]");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), u,
                             [](const Entry& e, double value) { return e.cumulative < value; });
  return it->word;
}

std::vector<std::string> simulate_collection_queries(const StopwordTable& table, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::string> queries;
  queries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) queries.push_back(table.sample(uniform(rng)));
  return queries;
}

std::vector<LabeledInstance> parse_gold_tsv(std::istream& in) {
  static constexpr std::string_view kHeader = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c";
  std::string line;
  if (!std::getline(in, line)) throw InputError("gold TSV is empty (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw InputError(row_error(1, "expected header 'id<TAB>tweet<TAB>subtask_a<TAB>subtask_b<TAB>subtask_c'"));

  std::vector<LabeledInstance> out;
  std::set<std::string, std::less<>> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 5) {
      throw InputError(row_error(row, "expected 5 columns, found " + std::to_string(cols.size())));
    }
    if (cols[0].empty()) throw InputError(row_error(row, "empty id"));
    if (!seen.emplace(cols[0]).second) throw InputError(row_error(row, "duplicate id '" + std::string(cols[0]) + "'"));

    auto label_at = [&](std::string_view token, Level level) -> std::optional<ClassLabel> {
      if (token == "NULL" && level != Level::A) return std::nullopt;
      auto label = parse_class(token);
      if (!label || level_of(*label) != level) {
        throw InputError(row_error(row, "unknown label '" + std::string(token) + "' for subtask " + std::string(to_string(level))));
      }
      return label;
    };
    HierLabel label;
    label.a = *label_at(cols[2], Level::A);
    label.b = label_at(cols[3], Level::B);
    label.c = label_at(cols[4], Level::C);
    if (!label.valid()) throw InputError(row_error(row, "labels violate the taxonomy hierarchy"));

    out.push_back({Instance::from_raw(std::string(cols[0]), cols[1]), label});
  }
  return out;
}

void write_gold_tsv(std::ostream& out, std::span<const LabeledInstance> data) {
  out << "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n";
  for (const auto& item : data) {
    out << item.instance.id << '\t' << item.instance.text << '\t' << to_string(item.label.a) << '\t'
        << (item.label.b ? to_string(*item.label.b) : "NULL") << '\t'
        << (item.label.c ? to_string(*item.label.c) : "NULL") << '\n';
  }
}

std::optional<RawDocument> parse_corpus_line(std::string_view line) {
  auto doc = nlohmann::json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto id = doc.find("id");
  auto text = doc.find("text");
  if (id == doc.end() || text == doc.end() || !text->is_string()) return std::nullopt;
  RawDocument out;
  if (id->is_string()) {
    out.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    out.id = id->dump();
  } else {
    return std::nullopt;
  }
  if (out.id.empty()) return std::nullopt;
  out.text = text->get<std::string>();
  return out;
}

std::string format_corpus_line(std::string_view id, std::string_view text) {
  nlohmann::json doc;
  doc["id"] = std::string(id);
  doc["text"] = std::string(text);
  // Invalid UTF-8 is replaced rather than aborting the whole stream.
  return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace semilabel
