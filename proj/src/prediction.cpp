#include "semilabel/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semilabel/errors.hpp"

namespace semilabel {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Continuous ? "continuous" : "discrete"; }

ModelKind require_kind(std::string_view text) {
  if (text == "continuous") return ModelKind::Continuous;
  if (text == "discrete") return ModelKind::Discrete;
  throw InputError("unknown model kind '" + std::string(text) + "' (expected continuous or discrete)");
}

ClassLabel argmax_label(Level level, std::span<const double> scores) {
  auto classes = classes_of(level);
  std::size_t best = 0;
  for (std::size_t i = 1; i < classes.size() && i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return classes[best];
}

std::array<double, kMaxClasses> softmax(std::span<const double> scores, double temperature) {
  std::array<double, kMaxClasses> out{};
  const std::size_t n = std::min(scores.size(), kMaxClasses);
  if (n == 0) return out;

  double max_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) max_score = std::max(max_score, scores[i]);

  if (std::isinf(max_score)) {
    // Either some classes are infinitely preferred or none has finite support.
    std::size_t winners = 0;
    for (std::size_t i = 0; i < n; ++i) winners += scores[i] == max_score ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) out[i] = scores[i] == max_score ? 1.0 / static_cast<double>(winners) : 0.0;
    return out;
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp((scores[i] - max_score) / temperature);
    sum += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
  return out;
}

}  // namespace semilabel
