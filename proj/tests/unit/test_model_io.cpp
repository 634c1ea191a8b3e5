#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "semilabel/errors.hpp"
#include "semilabel/model_io.hpp"

using namespace semilabel;
using fixtures::labeled;

namespace {

std::vector<LabeledInstance> corpus(Level level) {
  std::mt19937_64 rng(11);
  return fixtures::to_labeled(fixtures::random_docs(rng, static_cast<int>(num_classes(level)), 200), level);
}

ModelFile round_trip(const ModelFile& file) {
  std::stringstream ss;
  save_model(ss, file);
  return load_model(ss);
}

std::string saved(const ModelFile& file) {
  std::stringstream ss;
  save_model(ss, file);
  return ss.str();
}

}  // namespace

TEST_CASE("PMI model round trip keeps every score") {
  auto data = corpus(Level::C);
  PmiConfig cfg;
  cfg.min_count = 2;
  cfg.temperature = 4.5;
  ModelFile file{"pmi-c", ModelKind::Discrete, PmiModel::train(data, Level::C, cfg)};
  auto back = round_trip(file);
  CHECK(back.name == "pmi-c");
  CHECK(back.level() == Level::C);
  CHECK(back.type() == "pmi");
  const auto& a = std::get<PmiModel>(file.model);
  const auto& b = std::get<PmiModel>(back.model);
  CHECK(b.config().temperature == 4.5);
  CHECK(b.scored_ngrams() == a.scored_ngrams());
  for (const auto& [gram, _] : a.counts().ngrams) {
    for (ClassLabel c : classes_of(Level::C)) {
      CHECK(a.pmi(gram, c) == b.pmi(gram, c));
      CHECK(a.pmi_so(gram, c) == b.pmi_so(gram, c));
    }
  }
  for (const auto& item : data) CHECK(file.predict(item.instance).confidences == back.predict(item.instance).confidences);
  CHECK(saved(file) == saved(back));
}

TEST_CASE("linear model round trip is exact") {
  auto data = corpus(Level::A);
  auto cfg = LinearConfig::defaults_for(Level::A);
  cfg.epochs = 3;
  cfg.class_weights = {1.0, 2.5, 1.0};
  ModelFile file{"ft", ModelKind::Continuous, LinearSubwordModel::train(data, Level::A, cfg)};
  auto back = round_trip(file);
  CHECK(back.kind == ModelKind::Continuous);
  const auto& lb = std::get<LinearSubwordModel>(back.model);
  CHECK(lb.config().class_weights[1] == 2.5);
  CHECK(lb.state().embeddings == std::get<LinearSubwordModel>(file.model).state().embeddings);
  for (const auto& item : data) {
    auto p = back.predict(item.instance);
    CHECK(p.confidences == file.predict(item.instance).confidences);
    CHECK(p.model_name == "ft");
    CHECK(p.kind == ModelKind::Continuous);
  }
  CHECK(saved(file) == saved(back));
}

TEST_CASE("lexicon model round trip") {
  std::vector<std::string> words{"darn", "heck"};
  ModelFile file{"lex", ModelKind::Discrete, LexiconModel{words}};
  auto back = round_trip(file);
  CHECK(std::get<LexiconModel>(back.model).words() == words);
  CHECK(back.predict(Instance::from_raw("1", "oh heck")).hard_label == ClassLabel::OFF);
}

TEST_CASE("bad model files are rejected") {
  std::vector<std::string> words{"darn"};
  std::string good = saved(ModelFile{"lex", ModelKind::Discrete, LexiconModel{words}});

  auto load_text = [](const std::string& text) {
    std::istringstream in(text);
    return load_model(in);
  };
  CHECK_THROWS_AS(load_text("NOT-A-MODEL\n"), FormatError);
  CHECK_THROWS_AS(load_text(""), FormatError);
  std::string v2 = good;
  v2.replace(v2.find("format 1"), 8, "format 2");
  CHECK_THROWS_AS(load_text(v2), FormatError);
  CHECK_THROWS_AS(load_text(good.substr(0, good.size() / 2)), FormatError);
  std::string bad_type = good;
  bad_type.replace(bad_type.find("type lexicon"), 12, "type neural");
  CHECK_THROWS_AS(load_text(bad_type), FormatError);

  ModelFile lin{"ft", ModelKind::Discrete, LinearSubwordModel::train(corpus(Level::A), Level::A, LinearConfig{})};
  std::string blob = saved(lin);
  CHECK_THROWS_AS(load_text(blob.substr(0, blob.size() - 40)), FormatError);
  CHECK_THROWS_AS(load_model(std::filesystem::path("/nonexistent/model.slm")), InputError);
}
