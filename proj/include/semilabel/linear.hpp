#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semilabel/corpus.hpp"
#include "semilabel/prediction.hpp"

namespace semilabel {

struct LinearConfig {
  std::vector<int> orders{1, 2};
  double learning_rate = 0.01;
  int epochs = 25;
  int dim = 16;
  int bucket_bits = 21;
  std::uint64_t seed = 13241;
  // Loss weight per class index of the level.
  std::array<double, kMaxClasses> class_weights{1.0, 1.0, 1.0};

  // Bigrams and lr 0.01 for A and B; trigrams and lr 0.09 for C.
  static LinearConfig defaults_for(Level level);
  void validate() const;
};

std::uint64_t fnv1a64(std::string_view bytes);

struct TrainingPhase {
  std::span<const LabeledInstance> data;
  int epochs = 1;
};

// fastText-style classifier: the mean of hashed n-gram embeddings feeds a
// softmax layer. Buckets never touched in training are out of vocabulary
// and contribute nothing at prediction time.
class LinearSubwordModel {
 public:
  // Trains `config.epochs` passes over `data`.
  static LinearSubwordModel train(std::span<const LabeledInstance> data, Level level, const LinearConfig& config);
  // Trains the phases in order; each phase runs its own epoch count.
  static LinearSubwordModel train_phases(std::span<const TrainingPhase> phases, Level level, const LinearConfig& config);

  ModelPrediction predict(const Instance& instance) const;
  std::array<double, kMaxClasses> probabilities(std::span<const std::string> tokens) const;
  // Mean class-weighted cross-entropy over `data`.
  double loss(std::span<const LabeledInstance> data) const;

  Level level() const { return level_; }
  const LinearConfig& config() const { return config_; }
  // Training-set loss measured after each epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }

  std::size_t vocabulary_size() const { return bucket_rows_.size(); }

  // Flat state for persistence: (bucket, embedding) pairs in row order,
  // output weights class-major, then biases.
  struct State {
    std::vector<std::uint32_t> buckets;
    std::vector<double> embeddings;
    std::vector<double> output;
    std::array<double, kMaxClasses> bias{};
  };
  State state() const;
  static LinearSubwordModel from_state(Level level, const LinearConfig& config, State state);

 private:
  LinearSubwordModel(Level level, LinearConfig config);

  std::uint32_t bucket_of(std::string_view gram) const;
  void rows_of(std::span<const std::string> tokens, std::vector<std::uint32_t>& rows) const;
  void forward(std::span<const std::uint32_t> rows, std::vector<double>& hidden, std::array<double, kMaxClasses>& probs) const;
  void sgd_step(std::span<const std::uint32_t> rows, std::size_t gold, std::vector<double>& hidden,
                std::vector<double>& grad_hidden);

  Level level_;
  LinearConfig config_;
  std::unordered_map<std::uint32_t, std::uint32_t> bucket_rows_;
  std::vector<std::uint32_t> row_buckets_;
  std::vector<double> embeddings_;  // rows x dim
  std::vector<double> output_;      // classes x dim
  std::array<double, kMaxClasses> bias_{};
  std::vector<double> loss_history_;
};

}  // namespace semilabel
