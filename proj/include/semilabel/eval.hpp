#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "semilabel/labels.hpp"
#include "semilabel/select.hpp"

namespace semilabel {

enum class Slice { Full, Easy, Hard };
std::string_view to_string(Slice slice);

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  Level level = Level::A;
  Slice slice = Slice::Full;
  double macro_f1 = 0.0;
  std::size_t instances = 0;
  std::map<ClassLabel, ClassStats> per_class;      // every class of the level
  std::vector<ClassLabel> averaged;                // classes present in gold
  std::vector<std::vector<std::size_t>> confusion;  // gold x predicted, level order

  nlohmann::json to_json() const;
  std::string to_text() const;
};

using Labeling = std::map<std::string, ClassLabel>;

// Per-class F1 is 0 when precision + recall is 0. Macro average runs over the
// classes present in gold. Throws InputError when the id sets differ or
// labels mix levels.
EvalReport macro_f1(const Labeling& gold, const Labeling& pred, Slice slice = Slice::Full);

// Full, Easy and Hard reports; ids without a bucket only count toward Full.
std::vector<EvalReport> evaluate_buckets(const Labeling& gold, const Labeling& pred,
                                         const std::map<std::string, Bucket>& buckets);

struct AnnotationSet {
  std::map<std::string, std::vector<std::string>> items;

  // At least two annotators, the same count on every item.
  void validate() const;
};

// Mean over items of (annotators choosing the modal label) / annotators.
double iaa_p0(const AnnotationSet& annotations);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;  // includes NaN inputs

  std::size_t total() const;
  double bin_lo(std::size_t bin) const;
  double bin_hi(std::size_t bin) const;
  // `bin_lo,bin_hi,count`; underflow and overflow rows use -inf / inf bounds.
  void write_csv(std::ostream& out) const;
  std::string render_text(std::size_t width = 50) const;
};

// Equal-width bins on [lo, hi]; the last bin is closed. Parallel over inputs.
Histogram score_histogram(std::span<const double> scores, int bins, double lo, double hi, int threads = 1);
Histogram score_histogram_serial(std::span<const double> scores, int bins, double lo, double hi);

}  // namespace semilabel
