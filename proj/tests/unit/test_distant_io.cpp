#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "semilabel/distant_io.hpp"
#include "semilabel/errors.hpp"
#include "table_scorer.hpp"

using namespace semilabel;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("semilabel-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Ensemble hash_ensemble() {
  Ensemble e;
  e.add(std::make_unique<fixtures::HashScorer>("alpha", ModelKind::Continuous));
  e.add(std::make_unique<fixtures::HashScorer>("beta", ModelKind::Continuous));
  e.add(std::make_unique<fixtures::HashScorer>("gamma", ModelKind::Discrete));
  return e;
}

std::string corpus_text(int n, int stride = 7) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    int k = (i * stride) % n;
    out += format_corpus_line("doc" + std::to_string(k), "some text for " + std::to_string(k)) + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("ids and number formatting") {
  CHECK(is_valid_id("123abc"));
  CHECK_FALSE(is_valid_id(""));
  CHECK_FALSE(is_valid_id("a,b"));
  CHECK_FALSE(is_valid_id("a\"b"));
  CHECK_FALSE(is_valid_id("a\nb"));
  CHECK(format_real(0.5) == "0.500000");
  CHECK(format_real(1.0 / 3) == "0.333333");
}

TEST_CASE("writer and reader round trip") {
  TempDir dir;
  DistantRecord r1;
  r1.id = "x1";
  r1.level_a = AggregateScore{0.75, 0.1, {}};
  ModelPrediction p;
  p.model_name = "m";
  p.kind = ModelKind::Continuous;
  p.level = Level::A;
  p.confidences = {0.8, 0.2, 0};
  p.hard_label = ClassLabel::OFF;
  ModelPrediction q = p;
  q.model_name = "n";
  q.kind = ModelKind::Discrete;
  q.confidences = {0.3, 0.7, 0};
  q.hard_label = ClassLabel::NOT;
  r1.level_a_predictions = {p, q};
  r1.level_b = AggregateScore{0.2, 0.05, {}};
  r1.level_c = std::array<AggregateScore, 3>{AggregateScore{0.5, 0.1, {}}, AggregateScore{0.3, 0.2, {}},
                                             AggregateScore{0.2, 0.0, {}}};
  DistantRecord r2 = r1;
  r2.id = "x2";
  r2.level_b.reset();
  r2.level_c.reset();
  {
    DistantWriter w(dir.path, {{"m", ModelKind::Continuous}, {"n", ModelKind::Discrete}});
    w.write(r1);
    w.write(r2);
    w.close();
  }
  CHECK(slurp(dir.path / kLevelAFile) == "id,average,std\nx1,0.750000,0.100000\nx2,0.750000,0.100000\n");
  CHECK(slurp(dir.path / kLevelBFile) == "id,average,std\nx1,0.200000,0.050000\n");
  CHECK(slurp(dir.path / kLevelAModelsFile) ==
        "id,m@continuous,n@discrete\nx1,0.800000:OFF,0.300000:NOT\nx2,0.800000:OFF,0.300000:NOT\n");
  auto back = read_distant(dir.path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].level_b->average == 0.2);
  CHECK((*back[0].level_c)[1].std == 0.2);
  CHECK_FALSE(back[1].level_b);
  REQUIRE(back[1].level_a_predictions.size() == 2);
  CHECK(back[1].level_a_predictions[1].kind == ModelKind::Discrete);
  CHECK(back[1].level_a_predictions[1].hard_label == ClassLabel::NOT);
}

TEST_CASE("reader rejects inconsistent files") {
  TempDir dir;
  auto write = [&](const char* name, const std::string& body) { std::ofstream(dir.path / name) << body; };
  write(kLevelAFile, "id,average,std\na,0.5,0.1\n");
  write(kLevelBFile, "id,average,std\nzz,0.5,0.1\n");
  CHECK_THROWS_AS(read_distant(dir.path), InputError);
  write(kLevelBFile, "id,average,std\n");
  write(kLevelCFile, "id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth\na,1,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_distant(dir.path), InputError);
  fs::remove(dir.path / kLevelCFile);
  write(kLevelAFile, "id,average,std\na,0.5,oops\n");
  CHECK_THROWS_AS(read_distant(dir.path), InputError);
  write(kLevelAFile, "id,mean,std\n");
  CHECK_THROWS_AS(read_distant(dir.path), InputError);
}

TEST_CASE("label_corpus output does not depend on shard size or threads") {
  std::string text = corpus_text(257);
  TempDir one, many;
  auto ens = hash_ensemble();
  std::istringstream in1(text), in2(text);
  auto s1 = label_corpus(ens, in1, one.path, {{}, 1}, 100000);
  auto s2 = label_corpus(ens, in2, many.path, {{}, 4}, 16);
  CHECK(s1.instances == 257);
  CHECK(s1.shards == 1);
  CHECK(s2.shards == 17);
  CHECK(s1.level_b == s2.level_b);
  CHECK(s1.level_b > 0);
  for (const char* f : {kLevelAFile, kLevelBFile, kLevelCFile, kLevelAModelsFile}) {
    CHECK(slurp(one.path / f) == slurp(many.path / f));
  }
  CHECK_FALSE(fs::exists(many.path / ".shards"));
  auto recs = read_distant(one.path);
  CHECK(recs.size() == 257);
  CHECK(std::is_sorted(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST_CASE("label_corpus errors and empty input") {
  auto ens = hash_ensemble();
  TempDir dir;
  std::istringstream empty("");
  auto stats = label_corpus(ens, empty, dir.path, {}, 10);
  CHECK(stats.instances == 0);
  CHECK(slurp(dir.path / kLevelAFile) == "id,average,std\n");
  CHECK(slurp(dir.path / kLevelCFile) == "id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth\n");

  std::istringstream bad(format_corpus_line("a", "x") + "\n{broken\n");
  try {
    label_corpus(ens, bad, dir.path, {}, 10);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream dup(format_corpus_line("a", "x") + "\n" + format_corpus_line("b", "y") + "\n" +
                         format_corpus_line("a", "z") + "\n");
  CHECK_THROWS_AS(label_corpus(ens, dup, dir.path, {}, 2), InputError);
  std::istringstream comma(format_corpus_line("a,b", "x") + "\n");
  CHECK_THROWS_AS(label_corpus(ens, comma, dir.path, {}, 2), InputError);
}
