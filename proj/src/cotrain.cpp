#include "semilabel/cotrain.hpp"

#include <algorithm>
#include <cmath>

#include "semilabel/errors.hpp"
#include "semilabel/parallel.hpp"

namespace semilabel {

namespace {

const ModelPrediction& find_prediction(std::span<const ModelPrediction> preds, const std::string& name) {
  for (const auto& p : preds) {
    if (p.model_name == name) return p;
  }
  throw InputError("no prediction from ensemble member '" + name + "'");
}

AggregateScore aggregate_class(const std::vector<const ModelPrediction*>& preds, ClassLabel label) {
  std::vector<std::pair<std::string, double>> values;
  values.reserve(preds.size());
  for (const auto* p : preds) values.emplace_back(p->model_name, p->confidence(label));
  return aggregate(std::move(values));
}

std::string id_range(std::span<const Instance> batch) {
  if (batch.empty()) return "[]";
  return "[" + batch.front().id + " .. " + batch.back().id + "]";
}

std::vector<ModelPrediction> score_member(Scorer& member, std::span<const Instance> batch, Level level, int threads) {
  try {
    auto preds = member.score(batch, level, threads);
    if (preds.size() != batch.size()) {
      throw ProtocolError(ProtocolError::Kind::LengthMismatch, member.name() + " returned the wrong number of predictions");
    }
    return preds;
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.kind(), "level " + std::string(to_string(level)) + " instances " + id_range(batch) + ": " + e.what());
  }
}

void check_unique_sorted(const std::vector<DistantRecord>& records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].id == records[i - 1].id) throw InputError("duplicate instance id '" + records[i].id + "'");
  }
}

// Level-A members are scored over the whole batch, then B and C only over
// the admitted subsets; per-instance aggregation runs in parallel.
struct LevelBatch {
  std::vector<Scorer*> members;
  std::vector<std::string> names;
  std::vector<std::vector<ModelPrediction>> preds;  // member x instance

  std::vector<const ModelPrediction*> column(std::size_t i) const {
    std::vector<const ModelPrediction*> out;
    out.reserve(preds.size());
    for (const auto& row : preds) out.push_back(&row[i]);
    return out;
  }
};

LevelBatch score_level(Ensemble& ensemble, std::span<const Instance> batch, Level level, int threads) {
  LevelBatch lb;
  lb.members = ensemble.members_for(level);
  lb.names = ensemble.names_for(level);
  for (Scorer* m : lb.members) lb.preds.push_back(score_member(*m, batch, level, threads));
  return lb;
}

}  // namespace

AggregateScore aggregate(std::vector<std::pair<std::string, double>> confidences) {
  if (confidences.size() < 2) throw InputError("aggregation needs at least two model confidences");
  std::vector<double> values;
  values.reserve(confidences.size());
  for (const auto& [name, v] : confidences) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("confidence from '" + name + "' is outside [0,1]");
    values.push_back(v);
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return AggregateScore{mean, std::sqrt(sq / n), std::move(confidences)};
}

void GateConfig::validate() const {
  for (double v : {b_continuous_threshold, c_unt_threshold, c_max_std}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("gate thresholds must lie in [0,1]");
  }
}

bool gate_level_b(std::span<const ModelPrediction> level_a, std::span<const std::string> members,
                  const GateConfig& config) {
  bool admit = true;
  for (const auto& name : members) {
    const ModelPrediction& p = find_prediction(level_a, name);
    if (p.level != Level::A) throw InputError("gate_level_b needs level A predictions from '" + name + "'");
    if (p.kind == ModelKind::Continuous) {
      admit = admit && p.confidence(ClassLabel::OFF) >= config.b_continuous_threshold;
    } else {
      admit = admit && p.hard_label == ClassLabel::OFF;
    }
  }
  return admit;
}

bool gate_level_c(const AggregateScore& unt, const GateConfig& config) {
  return unt.average < config.c_unt_threshold && unt.std < config.c_max_std;
}

void Ensemble::add(std::unique_ptr<Scorer> member) {
  for (const auto& m : members_) {
    if (m->name() == member->name()) throw InputError("duplicate ensemble member name '" + member->name() + "'");
  }
  members_.push_back(std::move(member));
}

std::vector<Scorer*> Ensemble::members_for(Level level) const {
  std::vector<Scorer*> out;
  for (const auto& m : members_) {
    if (m->serves(level)) out.push_back(m.get());
  }
  return out;
}

std::vector<std::string> Ensemble::names_for(Level level) const {
  std::vector<std::string> out;
  for (Scorer* m : members_for(level)) out.push_back(m->name());
  return out;
}

void Ensemble::validate() const {
  for (Level level : {Level::A, Level::B, Level::C}) {
    auto n = members_for(level).size();
    if (n < 2) {
      throw InputError("ensemble has " + std::to_string(n) + " member(s) for level " + std::string(to_string(level)) +
                       "; at least two are required");
    }
  }
}

std::vector<DistantRecord> run_cascade(Ensemble& ensemble, std::span<const Instance> corpus,
                                       const CascadeOptions& options) {
  ensemble.validate();
  options.gates.validate();
  const int threads = std::max(1, options.threads);
  std::vector<DistantRecord> records(corpus.size());
  if (corpus.empty()) return records;

  LevelBatch a = score_level(ensemble, corpus, Level::A, threads);
  std::vector<char> admit_b(corpus.size(), 0);
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    auto& rec = records[i];
    rec.id = corpus[i].id;
    auto column = a.column(i);
    rec.level_a = aggregate_class(column, ClassLabel::OFF);
    rec.level_a_predictions.reserve(column.size());
    for (const auto* p : column) rec.level_a_predictions.push_back(*p);
    admit_b[i] = gate_level_b(rec.level_a_predictions, a.names, options.gates) ? 1 : 0;
  });

  std::vector<std::size_t> b_index;
  std::vector<Instance> b_batch;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (admit_b[i]) {
      b_index.push_back(i);
      b_batch.push_back(corpus[i]);
    }
  }

  std::vector<std::size_t> c_index;
  std::vector<Instance> c_batch;
  if (!b_batch.empty()) {
    LevelBatch b = score_level(ensemble, b_batch, Level::B, threads);
    std::vector<char> admit_c(b_batch.size(), 0);
    parallel_for(b_batch.size(), threads, [&](std::size_t j) {
      auto& rec = records[b_index[j]];
      rec.level_b = aggregate_class(b.column(j), ClassLabel::UNT);
      admit_c[j] = gate_level_c(*rec.level_b, options.gates) ? 1 : 0;
    });
    for (std::size_t j = 0; j < b_batch.size(); ++j) {
      if (admit_c[j]) {
        c_index.push_back(b_index[j]);
        c_batch.push_back(std::move(b_batch[j]));
      }
    }
  }

  if (!c_batch.empty()) {
    LevelBatch c = score_level(ensemble, c_batch, Level::C, threads);
    parallel_for(c_batch.size(), threads, [&](std::size_t j) {
      auto column = c.column(j);
      records[c_index[j]].level_c = std::array<AggregateScore, 3>{
          aggregate_class(column, ClassLabel::IND),
          aggregate_class(column, ClassLabel::GRP),
          aggregate_class(column, ClassLabel::OTH),
      };
    });
  }

  std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  check_unique_sorted(records);
  return records;
}

std::vector<DistantRecord> run_cascade_serial(Ensemble& ensemble, std::span<const Instance> corpus,
                                              const GateConfig& gates) {
  ensemble.validate();
  gates.validate();
  std::vector<DistantRecord> records;
  records.reserve(corpus.size());
  for (const Instance& inst : corpus) {
    std::span<const Instance> one(&inst, 1);
    auto predict_all = [&](Level level) {
      std::vector<ModelPrediction> preds;
      for (Scorer* m : ensemble.members_for(level)) preds.push_back(score_member(*m, one, level, 1).front());
      return preds;
    };
    auto positive = [](const std::vector<ModelPrediction>& preds, ClassLabel label) {
      std::vector<std::pair<std::string, double>> values;
      for (const auto& p : preds) values.emplace_back(p.model_name, p.confidence(label));
      return aggregate(std::move(values));
    };

    DistantRecord rec;
    rec.id = inst.id;
    rec.level_a_predictions = predict_all(Level::A);
    rec.level_a = positive(rec.level_a_predictions, ClassLabel::OFF);
    if (gate_level_b(rec.level_a_predictions, ensemble.names_for(Level::A), gates)) {
      rec.level_b = positive(predict_all(Level::B), ClassLabel::UNT);
      if (gate_level_c(*rec.level_b, gates)) {
        auto c = predict_all(Level::C);
        rec.level_c = std::array<AggregateScore, 3>{positive(c, ClassLabel::IND), positive(c, ClassLabel::GRP),
                                                    positive(c, ClassLabel::OTH)};
      }
    }
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  check_unique_sorted(records);
  return records;
}

HierLabel distill_labels(const DistantRecord& record, const DistillThresholds& thresholds) {
  if (!(thresholds.off >= 0.0 && thresholds.off <= 1.0) || !(thresholds.unt >= 0.0 && thresholds.unt <= 1.0)) {
    throw InputError("distillation thresholds must lie in [0,1]");
  }
  HierLabel label;
  label.a = record.level_a.average >= thresholds.off ? ClassLabel::OFF : ClassLabel::NOT;
  if (label.a == ClassLabel::OFF && record.level_b) {
    label.b = record.level_b->average >= thresholds.unt ? ClassLabel::UNT : ClassLabel::TIN;
    if (label.b == ClassLabel::TIN && record.level_c) {
      std::array<double, 3> avgs{(*record.level_c)[0].average, (*record.level_c)[1].average, (*record.level_c)[2].average};
      label.c = argmax_label(Level::C, avgs);
    }
  }
  return label;
}

}  // namespace semilabel
