#include "semilabel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semilabel/errors.hpp"

namespace semilabel {

namespace {

void check_histogram_args(int bins, double lo, double hi) {
  if (bins < 1) throw InputError("histogram needs at least one bin");
  if (!(lo < hi)) throw InputError("histogram range needs lo < hi");
}

// Bin for a value inside [lo, hi]; -1 underflow, bins overflow.
std::ptrdiff_t bin_of(double x, int bins, double lo, double hi) {
  if (std::isnan(x) || x > hi) return bins;
  if (x < lo) return -1;
  auto b = static_cast<std::ptrdiff_t>((x - lo) / (hi - lo) * bins);
  return std::min<std::ptrdiff_t>(b, bins - 1);
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view to_string(Slice slice) {
  switch (slice) {
    case Slice::Full: return "Full";
    case Slice::Easy: return "Easy";
    case Slice::Hard: return "Hard";
  }
  return "?";
}

EvalReport macro_f1(const Labeling& gold, const Labeling& pred, Slice slice) {
  if (gold.size() != pred.size()) throw InputError("gold and predicted id sets differ in size");
  EvalReport report;
  report.slice = slice;
  report.instances = gold.size();
  if (!gold.empty()) report.level = level_of(gold.begin()->second);
  const auto classes = classes_of(report.level);
  const std::size_t n = classes.size();
  report.confusion.assign(n, std::vector<std::size_t>(n, 0));

  auto g = gold.begin();
  auto p = pred.begin();
  for (; g != gold.end(); ++g, ++p) {
    if (g->first != p->first) throw InputError("id '" + g->first + "' is missing from the predictions");
    if (level_of(g->second) != report.level || level_of(p->second) != report.level) {
      throw InputError("labels for id '" + g->first + "' mix taxonomy levels");
    }
    ++report.confusion[class_index(g->second)][class_index(p->second)];
  }

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t support = 0;
    std::size_t predicted = 0;
    for (std::size_t k = 0; k < n; ++k) {
      support += report.confusion[c][k];
      predicted += report.confusion[k][c];
    }
    ClassStats st;
    st.support = support;
    st.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    st.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    st.f1 = st.precision + st.recall > 0 ? 2 * st.precision * st.recall / (st.precision + st.recall) : 0.0;
    report.per_class[classes[c]] = st;
    if (support > 0) {
      report.averaged.push_back(classes[c]);
      f1_sum += st.f1;
    }
  }
  report.macro_f1 = report.averaged.empty() ? 0.0 : f1_sum / static_cast<double>(report.averaged.size());
  return report;
}

std::vector<EvalReport> evaluate_buckets(const Labeling& gold, const Labeling& pred,
                                         const std::map<std::string, Bucket>& buckets) {
  std::vector<EvalReport> reports;
  reports.push_back(macro_f1(gold, pred, Slice::Full));
  for (Difficulty d : {Difficulty::Easy, Difficulty::Hard}) {
    Labeling g;
    Labeling p;
    for (const auto& [id, bucket] : buckets) {
      if (bucket.difficulty != d) continue;
      auto gi = gold.find(id);
      auto pi = pred.find(id);
      if (gi == gold.end() || pi == pred.end()) throw InputError("bucketed id '" + id + "' is missing from gold or predictions");
      g.emplace(id, gi->second);
      p.emplace(id, pi->second);
    }
    auto report = macro_f1(g, p, d == Difficulty::Easy ? Slice::Easy : Slice::Hard);
    report.level = reports.front().level;
    if (report.confusion.size() != reports.front().confusion.size()) {
      const std::size_t n = num_classes(report.level);
      report.confusion.assign(n, std::vector<std::size_t>(n, 0));
      report.per_class.clear();
      for (ClassLabel c : classes_of(report.level)) report.per_class[c] = ClassStats{};
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["level"] = std::string(semilabel::to_string(level));
  j["slice"] = std::string(semilabel::to_string(slice));
  j["instances"] = instances;
  j["macro_f1"] = macro_f1;
  j["zero_division"] = "f1 is 0 when precision + recall is 0";
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [label, st] : per_class) {
    classes[std::string(semilabel::to_string(label))] = {
        {"precision", st.precision}, {"recall", st.recall}, {"f1", st.f1}, {"support", st.support}};
  }
  j["per_class"] = classes;
  j["averaged_over"] = nlohmann::json::array();
  for (ClassLabel c : averaged) j["averaged_over"].push_back(std::string(semilabel::to_string(c)));
  j["confusion"] = confusion;
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "level " << semilabel::to_string(level) << "  slice " << semilabel::to_string(slice) << "  instances "
      << instances << "  macro-F1 " << fixed(macro_f1, 4) << '\n';
  out << "  class  precision  recall      f1  support\n";
  for (const auto& [label, st] : per_class) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-5s  %9.4f  %6.4f  %6.4f  %7zu\n", std::string(semilabel::to_string(label)).c_str(),
                  st.precision, st.recall, st.f1, st.support);
    out << line;
  }
  return out.str();
}

void AnnotationSet::validate() const {
  std::size_t expected = 0;
  for (const auto& [id, labels] : items) {
    if (labels.empty()) throw InputError("item '" + id + "' has no annotations");
    if (labels.size() < 2) throw InputError("item '" + id + "' needs at least two annotators");
    if (expected == 0) expected = labels.size();
    if (labels.size() != expected) throw InputError("item '" + id + "' has a different annotator count");
  }
}

double iaa_p0(const AnnotationSet& annotations) {
  annotations.validate();
  if (annotations.items.empty()) throw InputError("annotation set is empty");
  double sum = 0.0;
  for (const auto& [id, labels] : annotations.items) {
    std::map<std::string, std::size_t> votes;
    std::size_t modal = 0;
    for (const auto& l : labels) modal = std::max(modal, ++votes[l]);
    sum += static_cast<double>(modal) / static_cast<double>(labels.size());
  }
  return sum / static_cast<double>(annotations.items.size());
}

std::size_t Histogram::total() const {
  std::size_t t = underflow + overflow;
  for (auto c : counts) t += c;
  return t;
}

double Histogram::bin_lo(std::size_t bin) const {
  return lo + (hi - lo) * static_cast<double>(bin) / static_cast<double>(counts.size());
}

double Histogram::bin_hi(std::size_t bin) const {
  return bin + 1 == counts.size() ? hi : bin_lo(bin + 1);
}

void Histogram::write_csv(std::ostream& out) const {
  out << "bin_lo,bin_hi,count\n";
  out << "-inf," << fixed(lo, 6) << ',' << underflow << '\n';
  for (std::size_t b = 0; b < counts.size(); ++b) out << fixed(bin_lo(b), 6) << ',' << fixed(bin_hi(b), 6) << ',' << counts[b] << '\n';
  out << fixed(hi, 6) << ",inf," << overflow << '\n';
}

std::string Histogram::render_text(std::size_t width) const {
  std::size_t peak = std::max<std::size_t>(1, counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end()));
  std::ostringstream out;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    std::size_t bar = counts[b] * width / peak;
    out << '[' << fixed(bin_lo(b), 3) << ", " << fixed(bin_hi(b), 3) << (b + 1 == counts.size() ? "] " : ") ")
        << std::string(bar, '#') << ' ' << counts[b] << '\n';
  }
  if (underflow || overflow) out << "underflow " << underflow << "  overflow " << overflow << '\n';
  return out.str();
}

Histogram score_histogram_serial(std::span<const double> scores, int bins, double lo, double hi) {
  check_histogram_args(bins, lo, hi);
  Histogram h{lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0), 0, 0};
  for (double x : scores) {
    auto b = bin_of(x, bins, lo, hi);
    if (b < 0) {
      ++h.underflow;
    } else if (b >= bins) {
      ++h.overflow;
    } else {
      ++h.counts[static_cast<std::size_t>(b)];
    }
  }
  return h;
}

Histogram score_histogram(std::span<const double> scores, int bins, double lo, double hi, int threads) {
  check_histogram_args(bins, lo, hi);
  // Slots: [0] underflow, [1..bins] bins, [bins+1] overflow.
  std::vector<std::size_t> slots(static_cast<std::size_t>(bins) + 2, 0);
  std::size_t* acc = slots.data();
  const std::size_t nslots = slots.size();
  const auto n = static_cast<std::ptrdiff_t>(scores.size());
  const double* data = scores.data();
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1) if (threads > 1) reduction(+ : acc[:nslots])
  for (std::ptrdiff_t i = 0; i < n; ++i) ++acc[bin_of(data[i], bins, lo, hi) + 1];

  Histogram h{lo, hi, std::vector<std::size_t>(slots.begin() + 1, slots.end() - 1), slots.front(), slots.back()};
  return h;
}

}  // namespace semilabel
