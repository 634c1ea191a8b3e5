#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "pmi_oracle.hpp"
#include "semilabel/errors.hpp"
#include "semilabel/pmi.hpp"

using namespace semilabel;
using fixtures::labeled;

namespace {

std::vector<LabeledInstance> toy() {
  return {labeled("1", "fuck you", Level::A, ClassLabel::OFF), labeled("2", "fuck off", Level::A, ClassLabel::OFF),
          labeled("3", "hello there", Level::A, ClassLabel::NOT), labeled("4", "good day", Level::A, ClassLabel::NOT)};
}

PmiConfig exact_unigrams() {
  PmiConfig cfg;
  cfg.min_count = 1;
  cfg.smoothing = 0.0;
  cfg.orders = {1};
  return cfg;
}

}  // namespace

TEST_CASE("toy corpus: class-exclusive word scores one bit") {
  auto data = toy();
  auto model = PmiModel::train(data, Level::A, exact_unigrams());
  CHECK(*model.pmi("fuck", ClassLabel::OFF) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isinf(*model.pmi("fuck", ClassLabel::NOT)));
  CHECK(*model.pmi_so("fuck", ClassLabel::OFF) == INFINITY);
  CHECK(*model.pmi_so("fuck", ClassLabel::NOT) == -INFINITY);
  CHECK(model.counts().grand_total == 8);
  auto pred = model.predict(Instance::from_raw("q", "fuck"));
  CHECK(pred.hard_label == ClassLabel::OFF);
  CHECK(pred.kind == ModelKind::Discrete);
  CHECK(std::isfinite(pred.confidences[0]));
  CHECK(pred.confidences[0] + pred.confidences[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform n-gram scores zero") {
  std::vector<LabeledInstance> data{labeled("1", "same x", Level::A, ClassLabel::OFF),
                                    labeled("2", "same y", Level::A, ClassLabel::NOT)};
  auto model = PmiModel::train(data, Level::A, exact_unigrams());
  CHECK(*model.pmi("same", ClassLabel::OFF) == doctest::Approx(0.0));
  CHECK(*model.pmi("same", ClassLabel::NOT) == doctest::Approx(0.0));
  CHECK(*model.pmi_so("same", ClassLabel::OFF) == doctest::Approx(0.0));
  CHECK(*model.pmi_so("same", ClassLabel::NOT) == doctest::Approx(0.0));
}

TEST_CASE("n-grams below min_count are not scored") {
  std::vector<LabeledInstance> data{labeled("1", "rare rare common common common", Level::A, ClassLabel::OFF),
                                    labeled("2", "rare rare common common", Level::A, ClassLabel::NOT)};
  PmiConfig cfg;
  cfg.orders = {1};
  auto model = PmiModel::train(data, Level::A, cfg);
  CHECK_FALSE(model.pmi("rare", ClassLabel::OFF));
  CHECK(model.pmi("common", ClassLabel::OFF));
  CHECK_FALSE(model.pmi("unseen", ClassLabel::OFF));
  CHECK_FALSE(model.pmi("common", ClassLabel::TIN));
  // Totals still include the dropped n-gram.
  CHECK(model.counts().grand_total == 9);
}

TEST_CASE("fallback when no n-gram is scored") {
  auto a = PmiModel::train(toy(), Level::A, exact_unigrams());
  auto pa = a.predict(Instance::from_raw("q", "zzz qqq"));
  CHECK(pa.hard_label == ClassLabel::NOT);
  CHECK(pa.confidences[0] == doctest::Approx(0.5));

  std::vector<LabeledInstance> c{labeled("1", "they", Level::C, ClassLabel::GRP),
                                 labeled("2", "him", Level::C, ClassLabel::IND),
                                 labeled("3", "it", Level::C, ClassLabel::OTH)};
  auto mc = PmiModel::train(c, Level::C, exact_unigrams());
  CHECK(mc.predict(Instance::from_raw("q", "nothing known")).hard_label == ClassLabel::IND);

  std::vector<LabeledInstance> b{labeled("1", "you", Level::B, ClassLabel::TIN),
                                 labeled("2", "ugh", Level::B, ClassLabel::UNT)};
  auto mb = PmiModel::train(b, Level::B, exact_unigrams());
  CHECK(mb.predict(Instance::from_raw("q", "")).hard_label == ClassLabel::UNT);
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(PmiModel::train({}, Level::A), InputError);
  std::vector<LabeledInstance> only_off{labeled("1", "a b", Level::A, ClassLabel::OFF)};
  CHECK_THROWS_AS(PmiModel::train(only_off, Level::A, exact_unigrams()), InputError);
  std::vector<LabeledInstance> missing_c{labeled("1", "a", Level::C, ClassLabel::IND),
                                         labeled("2", "b", Level::C, ClassLabel::GRP)};
  CHECK_THROWS_AS(PmiModel::train(missing_c, Level::C, exact_unigrams()), InputError);
  std::vector<LabeledInstance> unlabeled{labeled("1", "a", Level::A, ClassLabel::NOT)};
  CHECK_THROWS_AS(PmiModel::train(unlabeled, Level::B, exact_unigrams()), InputError);
  PmiConfig bad;
  bad.temperature = 0;
  CHECK_THROWS_AS(PmiModel::train(toy(), Level::A, bad), InputError);
}

TEST_CASE("random corpora match the counting oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    int classes = trial % 2 ? 3 : 2;
    Level level = classes == 3 ? Level::C : Level::A;
    double s = trial % 4 < 2 ? 0.01 : 0.5;
    std::uint64_t min_count = trial % 3 + 1;
    auto docs = fixtures::random_docs(rng, classes, 120);
    auto data = fixtures::to_labeled(docs, level);
    PmiConfig cfg;
    cfg.smoothing = s;
    cfg.min_count = min_count;
    cfg.orders = {1, 2};
    auto model = PmiModel::train(data, level, cfg);
    oracle::PmiOracle o(docs, {1, 2}, classes, s, min_count);
    std::size_t scored = 0;
    for (const auto& [gram, _] : o.counts) {
      CHECK(o.scored(gram) == model.pmi(gram, classes_of(level)[0]).has_value());
      if (!o.scored(gram)) continue;
      ++scored;
      for (int c = 0; c < classes; ++c) {
        auto label = classes_of(level)[c];
        CHECK(oracle::close(*model.pmi(gram, label), o.pmi(gram, c), 1e-9));
        CHECK(oracle::close(*model.pmi_so(gram, label), o.pmi_so(gram, c), 1e-9));
      }
    }
    CHECK(scored == model.scored_ngrams());
  }
}

TEST_CASE("binary PMI-SO is antisymmetric") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto data = fixtures::to_labeled(fixtures::random_docs(rng, 2, 150), Level::A);
    PmiConfig cfg;
    cfg.min_count = 1;
    auto model = PmiModel::train(data, Level::A, cfg);
    for (const auto& [gram, row] : model.counts().ngrams) {
      double off = *model.pmi_so(gram, ClassLabel::OFF);
      double no = *model.pmi_so(gram, ClassLabel::NOT);
      CHECK(off == doctest::Approx(-no).epsilon(1e-12));
    }
  }
}

TEST_CASE("hard label does not depend on the temperature") {
  std::mt19937_64 rng(5);
  auto docs = fixtures::random_docs(rng, 3, 200);
  auto data = fixtures::to_labeled(docs, Level::C);
  PmiConfig cfg;
  cfg.min_count = 1;
  auto base = PmiModel::train(data, Level::C, cfg);
  for (double tau : {0.1, 1.0, 37.0, 1e4}) {
    cfg.temperature = tau;
    auto other = PmiModel::train(data, Level::C, cfg);
    for (const auto& item : data) {
      auto p = other.predict(item.instance);
      CHECK(p.hard_label == base.predict(item.instance).hard_label);
      double sum = p.confidences[0] + p.confidences[1] + p.confidences[2];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      for (double v : p.confidences) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}
