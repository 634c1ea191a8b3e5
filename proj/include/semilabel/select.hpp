#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semilabel/cotrain.hpp"
#include "semilabel/corpus.hpp"

namespace semilabel {

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };

struct Condition {
  ClassLabel label;
  Comparison op;
  double threshold;

  bool holds(double average) const;
  std::string to_string() const;
};

// Accept a record when any condition holds on its per-class averages.
struct SelectionPolicy {
  Level level = Level::A;
  std::vector<Condition> any_of;

  // A: OFF<0.2 | OFF>0.7; B: UNT<0.3 | UNT>0.7; C: IND>0.8 | GRP>0.7 | OTH>0.65.
  static SelectionPolicy defaults(Level level);
  // `OFF<0.2|OFF>0.7`; operators <, <=, >, >=.
  static SelectionPolicy parse(Level level, std::string_view text);
  std::string to_string() const;
  void validate() const;

  // Throws InputError when the record has no scores for the policy level.
  bool accepts(const DistantRecord& record) const;
};

// Average of `label` in `record`; nullopt when that level was not scored.
std::optional<double> average_for(const DistantRecord& record, ClassLabel label);

// Ids of accepted records, sorted.
std::vector<std::string> select_training(std::span<const DistantRecord> records, const SelectionPolicy& policy);

enum class Difficulty { Easy, Hard };

struct Bucket {
  Difficulty difficulty;
  ClassLabel polarity;  // OFF or NOT

  friend bool operator==(const Bucket&, const Bucket&) = default;
};

std::string_view to_string(Difficulty d);

struct PartitionVote {
  ModelKind kind;
  double off_confidence;
  ClassLabel hard_label;
};

struct PartitionThresholds {
  double easy_off = 0.8;
  double hard_off = 0.5;
  double hard_not = 0.5;
  double easy_not_first = 0.2;  // first continuous member
  double easy_not_rest = 0.8;   // remaining continuous members
};

// Rules tried in order, first match wins:
//   Easy OFF: continuous >= easy_off, discrete OFF
//   Hard OFF: continuous >= hard_off, discrete OFF
//   Hard NOT: continuous <  hard_not, discrete NOT
//   Easy NOT: first continuous <= easy_not_first, others <= easy_not_rest, discrete NOT
// "First" follows ensemble registration order. Throws InputError on no votes.
std::optional<Bucket> partition_easy_hard(std::span<const PartitionVote> votes, const PartitionThresholds& t = {});
std::vector<PartitionVote> votes_from(std::span<const ModelPrediction> level_a);

// Every class gets as many instances as the largest one; minority classes
// are topped up by sampling with replacement. Originals keep their order and
// come first.
std::vector<LabeledInstance> upsample_balance(std::span<const LabeledInstance> data, Level level, std::uint64_t seed);

// Loss weights per class: C -> IND 1, GRP 2, OTH 10; A and B unweighted.
std::map<ClassLabel, double> class_weights(Level level);

enum class DataSource { Gold, Distant };

struct CurriculumPhase {
  DataSource source;
  int epochs;

  friend bool operator==(const CurriculumPhase&, const CurriculumPhase&) = default;
};

struct CurriculumSchedule {
  std::vector<CurriculumPhase> phases;

  // A: distant x1 then gold x2. B and C: gold x2 then distant x1.
  static CurriculumSchedule defaults(Level level);
  // `distant:1,gold:2`
  static CurriculumSchedule parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
};

}  // namespace semilabel
