#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "semilabel/labels.hpp"

namespace semilabel {

// Continuous members are gated on their positive-class confidence, discrete
// members on their hard label.
enum class ModelKind { Continuous, Discrete };

std::string_view to_string(ModelKind kind);
ModelKind require_kind(std::string_view text);

struct ModelPrediction {
  std::string model_name;
  ModelKind kind = ModelKind::Continuous;
  Level level = Level::A;
  // Indexed by class_index(); entries past num_classes(level) stay zero.
  std::array<double, kMaxClasses> confidences{};
  ClassLabel hard_label = ClassLabel::OFF;

  double confidence(ClassLabel label) const { return confidences[class_index(label)]; }
};

// Highest score wins; ties go to the earlier class in level order.
ClassLabel argmax_label(Level level, std::span<const double> scores);

// softmax(scores / temperature). Infinite scores are handled: +inf entries
// share all the mass, and all -inf gives a uniform distribution.
std::array<double, kMaxClasses> softmax(std::span<const double> scores, double temperature = 1.0);

}  // namespace semilabel
