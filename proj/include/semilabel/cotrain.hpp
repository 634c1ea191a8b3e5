#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semilabel/corpus.hpp"
#include "semilabel/prediction.hpp"
#include "semilabel/scorer.hpp"

namespace semilabel {

struct AggregateScore {
  double average = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<std::pair<std::string, double>> per_model;
};

// Mean and population std of the members' confidences. Values are summed in
// sorted order, so the result does not depend on member order.
// Throws InputError for fewer than two entries or values outside [0,1].
AggregateScore aggregate(std::vector<std::pair<std::string, double>> confidences);

struct GateConfig {
  double b_continuous_threshold = 0.5;  // continuous members need OFF >= this
  double c_unt_threshold = 0.5;         // "likely TIN": avg(UNT) below this
  double c_max_std = 0.25;

  void validate() const;
};

// Level-B admission: every continuous member gives OFF >= threshold and every
// discrete member predicts OFF. Throws InputError when a member is missing.
bool gate_level_b(std::span<const ModelPrediction> level_a, std::span<const std::string> members,
                  const GateConfig& config = {});
// Level-C admission from the Level-B (UNT) aggregate.
bool gate_level_c(const AggregateScore& unt, const GateConfig& config = {});

struct DistantRecord {
  std::string id;
  AggregateScore level_a;                                // over OFF
  std::optional<AggregateScore> level_b;                 // over UNT
  std::optional<std::array<AggregateScore, 3>> level_c;  // IND, GRP, OTH
  // Level-A predictions in ensemble order; used for easy/hard partitioning.
  std::vector<ModelPrediction> level_a_predictions;
};

class Ensemble {
 public:
  // Throws InputError on a duplicate member name.
  void add(std::unique_ptr<Scorer> member);

  std::vector<Scorer*> members_for(Level level) const;
  std::vector<std::string> names_for(Level level) const;
  const std::vector<std::unique_ptr<Scorer>>& members() const { return members_; }
  // Every level needs at least two members.
  void validate() const;

 private:
  std::vector<std::unique_ptr<Scorer>> members_;
};

struct CascadeOptions {
  GateConfig gates;
  int threads = 1;
};

// Scores every instance at Level A, admitted ones at B, then C. Output is
// sorted by id (byte order). Throws InputError on duplicate ids; scorer
// failures are rethrown with the affected id range.
std::vector<DistantRecord> run_cascade(Ensemble& ensemble, std::span<const Instance> corpus,
                                       const CascadeOptions& options = {});

// One instance at a time, one member at a time. Reference for tests.
std::vector<DistantRecord> run_cascade_serial(Ensemble& ensemble, std::span<const Instance> corpus,
                                              const GateConfig& gates = {});

struct DistillThresholds {
  double off = 0.5;
  double unt = 0.5;
};

// Hard labels from aggregate scores; always a valid HierLabel.
HierLabel distill_labels(const DistantRecord& record, const DistillThresholds& thresholds = {});

}  // namespace semilabel
