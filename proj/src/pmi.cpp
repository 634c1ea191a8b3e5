#include "semilabel/pmi.hpp"

#include <algorithm>
#include <cmath>

#include "semilabel/errors.hpp"

namespace semilabel {

void PmiConfig::validate() const {
  if (orders.empty()) throw InputError("PMI n-gram orders must not be empty");
  for (int n : orders) {
    if (n < 1) throw InputError("PMI n-gram orders must be >= 1");
  }
  if (!(smoothing >= 0.0)) throw InputError("PMI smoothing must be >= 0");
  if (!(temperature > 0.0)) throw InputError("PMI temperature must be > 0");
}

void CountsTable::add(const std::string& ngram, std::size_t class_idx, std::uint64_t count) {
  auto& row = ngrams[ngram];
  row.per_class[class_idx] += count;
  row.total += count;
  class_totals[class_idx] += count;
  grand_total += count;
}

PmiModel PmiModel::train(std::span<const LabeledInstance> data, Level level, const PmiConfig& config) {
  config.validate();
  if (data.empty()) throw InputError("PMI training set is empty");
  CountsTable counts;
  for (const auto& item : data) {
    auto label = item.label.at(level);
    if (!label) throw InputError("instance '" + item.instance.id + "' has no label at level " + std::string(to_string(level)));
    std::size_t idx = class_index(*label);
    for (const auto& gram : extract_ngrams(item.instance.tokens, config.orders)) counts.add(gram, idx);
  }
  return from_counts(level, config, std::move(counts));
}

PmiModel PmiModel::from_counts(Level level, const PmiConfig& config, CountsTable counts) {
  config.validate();
  const std::size_t n = num_classes(level);
  for (std::size_t c = 0; c < n; ++c) {
    if (counts.class_totals[c] == 0) {
      throw InputError("PMI training data has no n-grams for class " + std::string(to_string(classes_of(level)[c])) +
                       " at level " + std::string(to_string(level)));
    }
  }
  return PmiModel(level, config, std::move(counts));
}

PmiModel::PmiModel(Level level, PmiConfig config, CountsTable counts)
    : level_(level), config_(std::move(config)), counts_(std::move(counts)) {
  const std::size_t n = num_classes(level_);
  const double s = config_.smoothing;
  const double total = static_cast<double>(counts_.grand_total);
  scores_.reserve(counts_.ngrams.size());
  for (const auto& [gram, row] : counts_.ngrams) {
    if (row.total < config_.min_count) continue;
    double smoothed_total = 0.0;
    for (std::size_t c = 0; c < n; ++c) smoothed_total += static_cast<double>(row.per_class[c]) + s;

    Scores sc;
    for (std::size_t c = 0; c < n; ++c) {
      const double joint = static_cast<double>(row.per_class[c]) + s;
      const double class_total = static_cast<double>(counts_.class_totals[c]);
      const double rest_joint = smoothed_total - joint;
      const double rest_total = total - class_total;
      sc.pmi[c] = std::log2((joint * total) / (smoothed_total * class_total));
      sc.pmi_so[c] = std::log2((joint * rest_total) / (rest_joint * class_total));
    }
    scores_.emplace(gram, sc);
  }
}

const PmiModel::Scores* PmiModel::find(std::string_view ngram) const {
  auto it = scores_.find(std::string(ngram));
  return it == scores_.end() ? nullptr : &it->second;
}

std::optional<double> PmiModel::pmi(std::string_view ngram, ClassLabel label) const {
  if (level_of(label) != level_) return std::nullopt;
  const Scores* sc = find(ngram);
  if (sc == nullptr) return std::nullopt;
  return sc->pmi[class_index(label)];
}

std::optional<double> PmiModel::pmi_so(std::string_view ngram, ClassLabel label) const {
  if (level_of(label) != level_) return std::nullopt;
  const Scores* sc = find(ngram);
  if (sc == nullptr) return std::nullopt;
  return sc->pmi_so[class_index(label)];
}

ClassLabel PmiModel::fallback_class() const {
  switch (level_) {
    case Level::A: return ClassLabel::NOT;
    case Level::B: return ClassLabel::UNT;
    case Level::C: return ClassLabel::IND;
  }
  return ClassLabel::NOT;
}

std::array<double, kMaxClasses> PmiModel::class_scores(const Instance& instance, std::size_t* matched) const {
  std::array<double, kMaxClasses> sums{};
  std::size_t hits = 0;
  const std::size_t n = num_classes(level_);
  for (const auto& gram : extract_ngrams(instance.tokens, config_.orders)) {
    const Scores* sc = find(gram);
    if (sc == nullptr) continue;
    ++hits;
    for (std::size_t c = 0; c < n; ++c) {
      sums[c] += std::clamp(sc->pmi[c], -kTermCap, kTermCap) + std::clamp(sc->pmi_so[c], -kTermCap, kTermCap);
    }
  }
  if (matched != nullptr) *matched = hits;
  return sums;
}

ModelPrediction PmiModel::predict(const Instance& instance) const {
  std::size_t hits = 0;
  auto sums = class_scores(instance, &hits);
  const std::size_t n = num_classes(level_);
  ModelPrediction pred;
  pred.model_name = "pmi";
  pred.kind = ModelKind::Discrete;
  pred.level = level_;
  pred.confidences = softmax(std::span<const double>(sums.data(), n), config_.temperature);
  pred.hard_label = hits == 0 ? fallback_class() : argmax_label(level_, std::span<const double>(sums.data(), n));
  return pred;
}

}  // namespace semilabel
