#include <doctest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "semilabel/errors.hpp"
#include "semilabel/select.hpp"

using namespace semilabel;
using fixtures::labeled;

namespace {

DistantRecord rec_a(const std::string& id, double off) {
  DistantRecord r;
  r.id = id;
  r.level_a = AggregateScore{off, 0.0, {}};
  return r;
}

DistantRecord rec_c(const std::string& id, double ind, double grp, double oth) {
  DistantRecord r = rec_a(id, 0.9);
  r.level_b = AggregateScore{0.1, 0.0, {}};
  r.level_c = std::array<AggregateScore, 3>{AggregateScore{ind, 0, {}}, AggregateScore{grp, 0, {}},
                                            AggregateScore{oth, 0, {}}};
  return r;
}

constexpr auto C = ModelKind::Continuous;
constexpr auto D = ModelKind::Discrete;

// Vote order: first continuous, two discrete, second continuous.
std::optional<Bucket> bucket(double first, ClassLabel d1, ClassLabel d2, double second) {
  std::vector<PartitionVote> v{{C, first, first >= 0.5 ? ClassLabel::OFF : ClassLabel::NOT},
                               {D, 0.0, d1},
                               {D, 0.0, d2},
                               {C, second, second >= 0.5 ? ClassLabel::OFF : ClassLabel::NOT}};
  return partition_easy_hard(v);
}

}  // namespace

TEST_CASE("default selection policies") {
  auto a = SelectionPolicy::defaults(Level::A);
  CHECK(a.accepts(rec_a("x", 0.75)));
  CHECK_FALSE(a.accepts(rec_a("x", 0.5)));
  CHECK(a.accepts(rec_a("x", 0.1)));
  CHECK_FALSE(a.accepts(rec_a("x", 0.2)));
  CHECK_FALSE(a.accepts(rec_a("x", 0.7)));
  auto c = SelectionPolicy::defaults(Level::C);
  CHECK(c.accepts(rec_c("x", 0.5, 0.72, 0.1)));
  CHECK_FALSE(c.accepts(rec_c("x", 0.8, 0.7, 0.65)));
  CHECK(c.accepts(rec_c("x", 0.1, 0.1, 0.66)));
  CHECK_THROWS_AS(c.accepts(rec_a("x", 0.9)), InputError);
  CHECK(SelectionPolicy::defaults(Level::B).to_string() == "UNT<0.3|UNT>0.7");
}

TEST_CASE("policy parsing") {
  auto p = SelectionPolicy::parse(Level::A, " OFF < 0.2 | NOT>=0.9 ");
  REQUIRE(p.any_of.size() == 2);
  CHECK(p.any_of[1].op == Comparison::GreaterEqual);
  // NOT >= 0.9 is OFF <= 0.1 on the complement.
  CHECK(p.accepts(rec_a("x", 0.1)));
  CHECK_FALSE(p.accepts(rec_a("x", 0.25)));
  CHECK(SelectionPolicy::parse(Level::A, p.to_string()).to_string() == p.to_string());
  CHECK_THROWS_AS(SelectionPolicy::parse(Level::A, "OFF=0.2"), InputError);
  CHECK_THROWS_AS(SelectionPolicy::parse(Level::A, "UNT<0.2"), InputError);
  CHECK_THROWS_AS(SelectionPolicy::parse(Level::A, "OFF<1.5"), InputError);
  CHECK_THROWS_AS(SelectionPolicy::parse(Level::A, "OFF<abc"), InputError);
  CHECK_THROWS_AS(SelectionPolicy::parse(Level::A, ""), InputError);
}

TEST_CASE("select_training returns sorted accepted ids") {
  std::vector<DistantRecord> recs{rec_a("z", 0.9), rec_a("m", 0.5), rec_a("a", 0.05)};
  CHECK(select_training(recs, SelectionPolicy::defaults(Level::A)) == std::vector<std::string>{"a", "z"});
}

TEST_CASE("moving a threshold only changes records that cross it") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<DistantRecord> recs;
  for (int i = 0; i < 2000; ++i) recs.push_back(rec_a("r" + std::to_string(i), u(rng)));
  auto loose = SelectionPolicy::parse(Level::A, "OFF>0.6");
  auto tight = SelectionPolicy::parse(Level::A, "OFF>0.7");
  auto a = select_training(recs, loose);
  auto b = select_training(recs, tight);
  CHECK(std::includes(a.begin(), a.end(), b.begin(), b.end()));
  for (const auto& r : recs) {
    bool in_a = std::binary_search(a.begin(), a.end(), r.id);
    bool in_b = std::binary_search(b.begin(), b.end(), r.id);
    if (in_a != in_b) CHECK((r.level_a.average > 0.6 && r.level_a.average <= 0.7));
  }
}

TEST_CASE("bucket priority examples") {
  using enum ClassLabel;
  CHECK(bucket(0.9, OFF, OFF, 0.85) == Bucket{Difficulty::Easy, OFF});
  CHECK(bucket(0.6, OFF, OFF, 0.6) == Bucket{Difficulty::Hard, OFF});
  CHECK(bucket(0.1, NOT, NOT, 0.3) == Bucket{Difficulty::Hard, NOT});
  CHECK(bucket(0.1, NOT, NOT, 0.7) == Bucket{Difficulty::Easy, NOT});
  CHECK_FALSE(bucket(0.3, NOT, NOT, 0.7));
  CHECK_FALSE(bucket(0.9, OFF, NOT, 0.9));
  CHECK_FALSE(bucket(0.9, OFF, OFF, 0.4));
  CHECK_THROWS_AS(partition_easy_hard({}), InputError);
}

TEST_CASE("bucket assignment is the earliest matching rule") {
  using enum ClassLabel;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 10000; ++t) {
    double b1 = u(rng), b2 = u(rng);
    ClassLabel d1 = coin(rng) ? OFF : NOT, d2 = coin(rng) ? OFF : NOT;
    bool off = d1 == OFF && d2 == OFF, no = d1 == NOT && d2 == NOT;
    std::vector<std::optional<Bucket>> matches;
    if (b1 >= 0.8 && b2 >= 0.8 && off) matches.push_back(Bucket{Difficulty::Easy, OFF});
    if (b1 >= 0.5 && b2 >= 0.5 && off) matches.push_back(Bucket{Difficulty::Hard, OFF});
    if (b1 < 0.5 && b2 < 0.5 && no) matches.push_back(Bucket{Difficulty::Hard, NOT});
    if (b1 <= 0.2 && b2 <= 0.8 && no) matches.push_back(Bucket{Difficulty::Easy, NOT});
    auto got = bucket(b1, d1, d2, b2);
    if (matches.empty()) {
      CHECK_FALSE(got);
    } else {
      CHECK(got == matches.front());
    }
  }
}

TEST_CASE("upsample_balance") {
  std::vector<LabeledInstance> data;
  for (int i = 0; i < 5; ++i) data.push_back(labeled("o" + std::to_string(i), "x", Level::A, ClassLabel::OFF));
  for (int i = 0; i < 2; ++i) data.push_back(labeled("n" + std::to_string(i), "y", Level::A, ClassLabel::NOT));
  auto out = upsample_balance(data, Level::A, 1);
  std::map<ClassLabel, int> counts;
  for (const auto& d : out) ++counts[d.label.a];
  CHECK(counts[ClassLabel::OFF] == 5);
  CHECK(counts[ClassLabel::NOT] == 5);
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(out[i].instance.id == data[i].instance.id);
  for (std::size_t i = data.size(); i < out.size(); ++i) CHECK(out[i].instance.id[0] == 'n');
  auto again = upsample_balance(data, Level::A, 1);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].instance.id == out[i].instance.id);

  std::vector<LabeledInstance> balanced(data.begin(), data.begin() + 2);
  balanced.push_back(data[5]);
  balanced.push_back(data[6]);
  CHECK(upsample_balance(balanced, Level::A, 3).size() == 4);

  std::vector<LabeledInstance> missing(data.begin(), data.begin() + 5);
  CHECK_THROWS_AS(upsample_balance(missing, Level::A, 1), InputError);
}

TEST_CASE("class weights and curriculum") {
  auto c = class_weights(Level::C);
  CHECK(c == std::map<ClassLabel, double>{{ClassLabel::IND, 1}, {ClassLabel::GRP, 2}, {ClassLabel::OTH, 10}});
  CHECK(class_weights(Level::A) == std::map<ClassLabel, double>{{ClassLabel::OFF, 1}, {ClassLabel::NOT, 1}});
  CHECK(class_weights(Level::B) == std::map<ClassLabel, double>{{ClassLabel::TIN, 1}, {ClassLabel::UNT, 1}});

  CHECK(CurriculumSchedule::defaults(Level::A).to_string() == "distant:1,gold:2");
  CHECK(CurriculumSchedule::defaults(Level::B).to_string() == "gold:2,distant:1");
  CHECK(CurriculumSchedule::defaults(Level::C).to_string() == "gold:2,distant:1");
  auto single = CurriculumSchedule::parse("gold:3");
  REQUIRE(single.phases.size() == 1);
  CHECK(single.phases[0] == CurriculumPhase{DataSource::Gold, 3});
  CHECK(CurriculumSchedule::parse("distant").phases[0].epochs == 1);
  CHECK_THROWS_AS(CurriculumSchedule::parse("silver:1"), InputError);
  CHECK_THROWS_AS(CurriculumSchedule::parse("gold:0"), InputError);
  CHECK_THROWS_AS(CurriculumSchedule::parse("gold:x"), InputError);
  CHECK_THROWS_AS(CurriculumSchedule::parse(""), InputError);
}
