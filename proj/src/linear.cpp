#include "semilabel/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "semilabel/errors.hpp"

namespace semilabel {

LinearConfig LinearConfig::defaults_for(Level level) {
  LinearConfig cfg;
  if (level == Level::C) {
    cfg.orders = {1, 2, 3};
    cfg.learning_rate = 0.09;
  }
  return cfg;
}

void LinearConfig::validate() const {
  if (orders.empty()) throw InputError("linear n-gram orders must not be empty");
  for (int n : orders) {
    if (n < 1) throw InputError("linear n-gram orders must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw InputError("linear learning rate must be > 0");
  if (epochs < 1) throw InputError("linear epochs must be >= 1");
  if (dim < 1) throw InputError("linear dimension must be >= 1");
  if (bucket_bits < 1 || bucket_bits > 31) throw InputError("linear bucket bits must be in [1,31]");
  for (double w : class_weights) {
    if (!(w > 0.0)) throw InputError("class weights must be > 0");
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

LinearSubwordModel::LinearSubwordModel(Level level, LinearConfig config) : level_(level), config_(std::move(config)) {
  output_.assign(num_classes(level_) * static_cast<std::size_t>(config_.dim), 0.0);
}

std::uint32_t LinearSubwordModel::bucket_of(std::string_view gram) const {
  return static_cast<std::uint32_t>(fnv1a64(gram) & ((std::uint64_t{1} << config_.bucket_bits) - 1));
}

void LinearSubwordModel::rows_of(std::span<const std::string> tokens, std::vector<std::uint32_t>& rows) const {
  rows.clear();
  for (const auto& gram : extract_ngrams(tokens, config_.orders)) {
    auto it = bucket_rows_.find(bucket_of(gram));
    if (it != bucket_rows_.end()) rows.push_back(it->second);
  }
}

void LinearSubwordModel::forward(std::span<const std::uint32_t> rows, std::vector<double>& hidden,
                                 std::array<double, kMaxClasses>& probs) const {
  const std::size_t dim = static_cast<std::size_t>(config_.dim);
  const std::size_t n = num_classes(level_);
  hidden.assign(dim, 0.0);
  for (std::uint32_t r : rows) {
    const double* row = &embeddings_[r * dim];
    for (std::size_t k = 0; k < dim; ++k) hidden[k] += row[k];
  }
  if (!rows.empty()) {
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& h : hidden) h *= inv;
  }
  std::array<double, kMaxClasses> logits{};
  for (std::size_t c = 0; c < n; ++c) {
    const double* w = &output_[c * dim];
    logits[c] = bias_[c] + std::inner_product(hidden.begin(), hidden.end(), w, 0.0);
  }
  probs = softmax(std::span<const double>(logits.data(), n));
}

void LinearSubwordModel::sgd_step(std::span<const std::uint32_t> rows, std::size_t gold, std::vector<double>& hidden,
                                  std::vector<double>& grad_hidden) {
  const std::size_t dim = static_cast<std::size_t>(config_.dim);
  const std::size_t n = num_classes(level_);
  std::array<double, kMaxClasses> probs{};
  forward(rows, hidden, probs);

  const double lr = config_.learning_rate;
  const double weight = config_.class_weights[gold];
  grad_hidden.assign(dim, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    const double g = weight * (probs[c] - (c == gold ? 1.0 : 0.0));
    double* w = &output_[c * dim];
    for (std::size_t k = 0; k < dim; ++k) {
      grad_hidden[k] += g * w[k];
      w[k] -= lr * g * hidden[k];
    }
    bias_[c] -= lr * g;
  }
  if (rows.empty()) return;
  const double scale = lr / static_cast<double>(rows.size());
  for (std::uint32_t r : rows) {
    double* row = &embeddings_[r * dim];
    for (std::size_t k = 0; k < dim; ++k) row[k] -= scale * grad_hidden[k];
  }
}

LinearSubwordModel LinearSubwordModel::train(std::span<const LabeledInstance> data, Level level,
                                             const LinearConfig& config) {
  TrainingPhase phase{data, config.epochs};
  return train_phases(std::span<const TrainingPhase>(&phase, 1), level, config);
}

LinearSubwordModel LinearSubwordModel::train_phases(std::span<const TrainingPhase> phases, Level level,
                                                    const LinearConfig& config) {
  config.validate();
  if (phases.empty()) throw InputError("linear training needs at least one phase");

  const std::size_t n = num_classes(level);
  std::array<std::size_t, kMaxClasses> seen{};
  std::size_t total = 0;
  for (const auto& phase : phases) {
    if (phase.epochs < 1) throw InputError("training phase epochs must be >= 1");
    for (const auto& item : phase.data) {
      auto label = item.label.at(level);
      if (!label) {
        throw InputError("instance '" + item.instance.id + "' has no label at level " + std::string(to_string(level)));
      }
      ++seen[class_index(*label)];
      ++total;
    }
  }
  if (total == 0) throw InputError("linear training set is empty");
  for (std::size_t c = 0; c < n; ++c) {
    if (seen[c] == 0) {
      throw InputError("linear training data has no instances of class " + std::string(to_string(classes_of(level)[c])));
    }
  }

  LinearSubwordModel model(level, config);
  const std::size_t dim = static_cast<std::size_t>(config.dim);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-1.0 / static_cast<double>(dim), 1.0 / static_cast<double>(dim));

  // Vocabulary: every bucket hit by a training n-gram, in first-seen order.
  for (const auto& phase : phases) {
    for (const auto& item : phase.data) {
      for (const auto& gram : extract_ngrams(item.instance.tokens, config.orders)) {
        std::uint32_t bucket = model.bucket_of(gram);
        auto [it, inserted] = model.bucket_rows_.emplace(bucket, static_cast<std::uint32_t>(model.row_buckets_.size()));
        if (!inserted) continue;
        model.row_buckets_.push_back(bucket);
        for (std::size_t k = 0; k < dim; ++k) model.embeddings_.push_back(init(rng));
      }
    }
  }

  std::vector<std::uint32_t> rows;
  std::vector<double> hidden;
  std::vector<double> grad_hidden;
  for (const auto& phase : phases) {
    std::vector<std::size_t> order(phase.data.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < phase.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t idx : order) {
        const auto& item = phase.data[idx];
        model.rows_of(item.instance.tokens, rows);
        model.sgd_step(rows, class_index(*item.label.at(level)), hidden, grad_hidden);
      }
      model.loss_history_.push_back(model.loss(phase.data));
    }
  }
  return model;
}

std::array<double, kMaxClasses> LinearSubwordModel::probabilities(std::span<const std::string> tokens) const {
  std::vector<std::uint32_t> rows;
  std::vector<double> hidden;
  std::array<double, kMaxClasses> probs{};
  rows_of(tokens, rows);
  forward(rows, hidden, probs);
  return probs;
}

ModelPrediction LinearSubwordModel::predict(const Instance& instance) const {
  ModelPrediction pred;
  pred.model_name = "linear";
  pred.kind = ModelKind::Discrete;
  pred.level = level_;
  pred.confidences = probabilities(instance.tokens);
  pred.hard_label = argmax_label(level_, std::span<const double>(pred.confidences.data(), num_classes(level_)));
  return pred;
}

double LinearSubwordModel::loss(std::span<const LabeledInstance> data) const {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& item : data) {
    auto label = item.label.at(level_);
    if (!label) continue;
    std::size_t gold = class_index(*label);
    auto probs = probabilities(item.instance.tokens);
    sum += config_.class_weights[gold] * -std::log(std::max(probs[gold], 1e-300));
  }
  return sum / static_cast<double>(data.size());
}

LinearSubwordModel::State LinearSubwordModel::state() const {
  return State{row_buckets_, embeddings_, output_, bias_};
}

LinearSubwordModel LinearSubwordModel::from_state(Level level, const LinearConfig& config, State state) {
  config.validate();
  LinearSubwordModel model(level, config);
  const std::size_t dim = static_cast<std::size_t>(config.dim);
  if (state.embeddings.size() != state.buckets.size() * dim || state.output.size() != model.output_.size()) {
    throw FormatError("linear model tables do not match the declared dimension");
  }
  for (std::uint32_t b : state.buckets) {
    if (b >> config.bucket_bits != 0) throw FormatError("linear model bucket out of range");
    if (!model.bucket_rows_.emplace(b, static_cast<std::uint32_t>(model.row_buckets_.size())).second) {
      throw FormatError("linear model has a duplicate bucket");
    }
    model.row_buckets_.push_back(b);
  }
  model.embeddings_ = std::move(state.embeddings);
  model.output_ = std::move(state.output);
  model.bias_ = state.bias;
  return model;
}

}  // namespace semilabel
