#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semilabel/corpus.hpp"
#include "semilabel/labels.hpp"
#include "semilabel/prediction.hpp"

namespace semilabel {

struct PmiConfig {
  std::uint64_t min_count = 5;
  double smoothing = 0.01;
  std::vector<int> orders{1, 2};
  // Softmax temperature (bits) that turns summed class scores into confidences.
  double temperature = 10.0;

  void validate() const;
};

// Raw n-gram counts per class. Totals are over every extracted n-gram token,
// including n-grams later dropped by min_count.
struct CountsTable {
  struct Row {
    std::array<std::uint64_t, kMaxClasses> per_class{};
    std::uint64_t total = 0;
  };

  std::unordered_map<std::string, Row> ngrams;
  std::array<std::uint64_t, kMaxClasses> class_totals{};
  std::uint64_t grand_total = 0;

  void add(const std::string& ngram, std::size_t class_idx, std::uint64_t count = 1);
};

// n-gram/class association model. With smoothed counts n'(w,c) = n(w,c) + s,
// token totals T and T_c:
//   PMI(w,c)    = log2( n'(w,c) T / (n'(w) T_c) )
//   PMI-SO(w,c) = log2( n'(w,c) (T - T_c) / (n'(w, C\c) T_c) )
// where n'(w) and n'(w, C\c) sum the smoothed class counts.
class PmiModel {
 public:
  // Throws InputError on an empty training set, a missing label at `level`,
  // or any class of the level without training data.
  static PmiModel train(std::span<const LabeledInstance> data, Level level, const PmiConfig& config = {});
  static PmiModel from_counts(Level level, const PmiConfig& config, CountsTable counts);

  // nullopt for n-grams outside the score tables (unseen or below min_count).
  std::optional<double> pmi(std::string_view ngram, ClassLabel label) const;
  std::optional<double> pmi_so(std::string_view ngram, ClassLabel label) const;

  // Sums PMI + PMI-SO over the scored n-grams of the instance per class.
  // Falls back to fallback_class() when no n-gram is scored.
  ModelPrediction predict(const Instance& instance) const;
  // Per-class sums and the number of scored n-grams that contributed.
  std::array<double, kMaxClasses> class_scores(const Instance& instance, std::size_t* matched = nullptr) const;

  Level level() const { return level_; }
  ClassLabel fallback_class() const;
  const PmiConfig& config() const { return config_; }
  const CountsTable& counts() const { return counts_; }
  std::size_t scored_ngrams() const { return scores_.size(); }

  // Per-term cap applied before summing so one exclusive n-gram under zero
  // smoothing (an infinite score) cannot turn the sum into NaN.
  static constexpr double kTermCap = 1000.0;

 private:
  struct Scores {
    std::array<double, kMaxClasses> pmi{};
    std::array<double, kMaxClasses> pmi_so{};
  };

  PmiModel(Level level, PmiConfig config, CountsTable counts);
  const Scores* find(std::string_view ngram) const;

  Level level_;
  PmiConfig config_;
  CountsTable counts_;
  std::unordered_map<std::string, Scores> scores_;
};

}  // namespace semilabel
