#include "semilabel/select.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "semilabel/errors.hpp"

namespace semilabel {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string real_text(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

bool Condition::holds(double average) const {
  switch (op) {
    case Comparison::Less: return average < threshold;
    case Comparison::LessEqual: return average <= threshold;
    case Comparison::Greater: return average > threshold;
    case Comparison::GreaterEqual: return average >= threshold;
  }
  return false;
}

std::string Condition::to_string() const {
  static constexpr const char* kOps[] = {"<", "<=", ">", ">="};
  return std::string(semilabel::to_string(label)) + kOps[static_cast<int>(op)] + real_text(threshold);
}

SelectionPolicy SelectionPolicy::defaults(Level level) {
  using enum Comparison;
  switch (level) {
    case Level::A: return {level, {{ClassLabel::OFF, Less, 0.2}, {ClassLabel::OFF, Greater, 0.7}}};
    case Level::B: return {level, {{ClassLabel::UNT, Less, 0.3}, {ClassLabel::UNT, Greater, 0.7}}};
    case Level::C:
      return {level, {{ClassLabel::IND, Greater, 0.8}, {ClassLabel::GRP, Greater, 0.7}, {ClassLabel::OTH, Greater, 0.65}}};
  }
  return {};
}

SelectionPolicy SelectionPolicy::parse(Level level, std::string_view text) {
  SelectionPolicy policy{level, {}};
  std::stringstream ss{std::string(text)};
  std::string part;
  while (std::getline(ss, part, '|')) {
    part = trim(part);
    auto pos = part.find_first_of("<>");
    if (pos == std::string::npos) throw InputError("selection condition '" + part + "' has no < or > operator");
    Condition cond{};
    auto label = parse_class(trim(std::string_view(part).substr(0, pos)));
    if (!label) throw InputError("selection condition '" + part + "' names an unknown class");
    cond.label = *label;
    bool less = part[pos] == '<';
    bool inclusive = pos + 1 < part.size() && part[pos + 1] == '=';
    cond.op = less ? (inclusive ? Comparison::LessEqual : Comparison::Less)
                   : (inclusive ? Comparison::GreaterEqual : Comparison::Greater);
    std::string value = trim(std::string_view(part).substr(pos + (inclusive ? 2 : 1)));
    char* end = nullptr;
    cond.threshold = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
      throw InputError("selection condition '" + part + "' has a bad threshold");
    }
    policy.any_of.push_back(cond);
  }
  policy.validate();
  return policy;
}

std::string SelectionPolicy::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < any_of.size(); ++i) {
    if (i) out += '|';
    out += any_of[i].to_string();
  }
  return out;
}

void SelectionPolicy::validate() const {
  if (any_of.empty()) throw InputError("selection policy has no conditions");
  for (const auto& c : any_of) {
    if (level_of(c.label) != level) {
      throw InputError("selection condition " + c.to_string() + " does not belong to level " + std::string(semilabel::to_string(level)));
    }
    if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw InputError("selection threshold must lie in [0,1]");
  }
}

std::optional<double> average_for(const DistantRecord& record, ClassLabel label) {
  switch (level_of(label)) {
    case Level::A:
      return label == ClassLabel::OFF ? record.level_a.average : 1.0 - record.level_a.average;
    case Level::B:
      if (!record.level_b) return std::nullopt;
      return label == ClassLabel::UNT ? record.level_b->average : 1.0 - record.level_b->average;
    case Level::C:
      if (!record.level_c) return std::nullopt;
      return (*record.level_c)[class_index(label)].average;
  }
  return std::nullopt;
}

bool SelectionPolicy::accepts(const DistantRecord& record) const {
  for (const auto& c : any_of) {
    auto avg = average_for(record, c.label);
    if (!avg) {
      throw InputError("record '" + record.id + "' has no level " + std::string(semilabel::to_string(level)) + " scores");
    }
    if (c.holds(*avg)) return true;
  }
  return false;
}

std::vector<std::string> select_training(std::span<const DistantRecord> records, const SelectionPolicy& policy) {
  policy.validate();
  std::vector<std::string> ids;
  for (const auto& rec : records) {
    if (policy.accepts(rec)) ids.push_back(rec.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string_view to_string(Difficulty d) { return d == Difficulty::Easy ? "Easy" : "Hard"; }

std::optional<Bucket> partition_easy_hard(std::span<const PartitionVote> votes, const PartitionThresholds& t) {
  if (votes.empty()) throw InputError("partitioning needs level A predictions");
  auto discrete_all = [&](ClassLabel want) {
    return std::all_of(votes.begin(), votes.end(),
                       [&](const PartitionVote& v) { return v.kind != ModelKind::Continuous ? v.hard_label == want : true; });
  };
  auto continuous_all = [&](auto pred) {
    std::size_t rank = 0;
    for (const auto& v : votes) {
      if (v.kind != ModelKind::Continuous) continue;
      if (!pred(v.off_confidence, rank++)) return false;
    }
    return true;
  };

  if (continuous_all([&](double p, std::size_t) { return p >= t.easy_off; }) && discrete_all(ClassLabel::OFF)) {
    return Bucket{Difficulty::Easy, ClassLabel::OFF};
  }
  if (continuous_all([&](double p, std::size_t) { return p >= t.hard_off; }) && discrete_all(ClassLabel::OFF)) {
    return Bucket{Difficulty::Hard, ClassLabel::OFF};
  }
  if (continuous_all([&](double p, std::size_t) { return p < t.hard_not; }) && discrete_all(ClassLabel::NOT)) {
    return Bucket{Difficulty::Hard, ClassLabel::NOT};
  }
  if (continuous_all([&](double p, std::size_t rank) { return p <= (rank == 0 ? t.easy_not_first : t.easy_not_rest); }) &&
      discrete_all(ClassLabel::NOT)) {
    return Bucket{Difficulty::Easy, ClassLabel::NOT};
  }
  return std::nullopt;
}

std::vector<PartitionVote> votes_from(std::span<const ModelPrediction> level_a) {
  std::vector<PartitionVote> votes;
  votes.reserve(level_a.size());
  for (const auto& p : level_a) votes.push_back({p.kind, p.confidence(ClassLabel::OFF), p.hard_label});
  return votes;
}

std::vector<LabeledInstance> upsample_balance(std::span<const LabeledInstance> data, Level level, std::uint64_t seed) {
  const std::size_t n = num_classes(level);
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto label = data[i].label.at(level);
    if (!label) throw InputError("instance '" + data[i].instance.id + "' has no label at level " + std::string(to_string(level)));
    members[class_index(*label)].push_back(i);
  }
  std::size_t target = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (members[c].empty()) {
      throw InputError("cannot upsample: class " + std::string(to_string(classes_of(level)[c])) + " has no instances");
    }
    target = std::max(target, members[c].size());
  }

  std::vector<LabeledInstance> out(data.begin(), data.end());
  out.reserve(target * n);
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < n; ++c) {
    std::uniform_int_distribution<std::size_t> pick(0, members[c].size() - 1);
    for (std::size_t k = members[c].size(); k < target; ++k) out.push_back(data[members[c][pick(rng)]]);
  }
  return out;
}

std::map<ClassLabel, double> class_weights(Level level) {
  if (level == Level::C) return {{ClassLabel::IND, 1.0}, {ClassLabel::GRP, 2.0}, {ClassLabel::OTH, 10.0}};
  std::map<ClassLabel, double> out;
  for (ClassLabel c : classes_of(level)) out[c] = 1.0;
  return out;
}

CurriculumSchedule CurriculumSchedule::defaults(Level level) {
  if (level == Level::A) return {{{DataSource::Distant, 1}, {DataSource::Gold, 2}}};
  return {{{DataSource::Gold, 2}, {DataSource::Distant, 1}}};
}

CurriculumSchedule CurriculumSchedule::parse(std::string_view text) {
  CurriculumSchedule schedule;
  std::stringstream ss{std::string(text)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    auto colon = part.find(':');
    std::string source = trim(std::string_view(part).substr(0, colon));
    CurriculumPhase phase{};
    if (source == "gold") {
      phase.source = DataSource::Gold;
    } else if (source == "distant") {
      phase.source = DataSource::Distant;
    } else {
      throw InputError("curriculum phase '" + part + "' must start with gold or distant");
    }
    phase.epochs = 1;
    if (colon != std::string::npos) {
      try {
        std::size_t used = 0;
        std::string count = trim(std::string_view(part).substr(colon + 1));
        phase.epochs = std::stoi(count, &used);
        if (used != count.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError("curriculum phase '" + part + "' has a bad epoch count");
      }
    }
    schedule.phases.push_back(phase);
  }
  schedule.validate();
  return schedule;
}

std::string CurriculumSchedule::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (i) out += ',';
    out += phases[i].source == DataSource::Gold ? "gold:" : "distant:";
    out += std::to_string(phases[i].epochs);
  }
  return out;
}

void CurriculumSchedule::validate() const {
  if (phases.empty()) throw InputError("curriculum schedule needs at least one phase");
  for (const auto& p : phases) {
    if (p.epochs < 1) throw InputError("curriculum phase epochs must be >= 1");
  }
}

}  // namespace semilabel
