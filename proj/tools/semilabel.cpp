#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semilabel/config.hpp"
#include "semilabel/corpus.hpp"
#include "semilabel/cotrain.hpp"
#include "semilabel/distant_io.hpp"
#include "semilabel/errors.hpp"
#include "semilabel/eval.hpp"
#include "semilabel/manifest.hpp"
#include "semilabel/model_io.hpp"
#include "semilabel/parallel.hpp"
#include "semilabel/scorer.hpp"
#include "semilabel/select.hpp"

namespace fs = std::filesystem;
using namespace semilabel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitInternal = 4;
constexpr std::uint64_t kDefaultSeed = 13241;

struct CommonFlags {
  std::optional<std::string> level;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string config_path;
  std::vector<std::string> overrides;
};

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw InputError("n-gram orders must look like 1,2; got '" + text + "'");
    }
  }
  return out;
}

std::string orders_text(const std::vector<int>& orders) {
  std::string out;
  for (std::size_t i = 0; i < orders.size(); ++i) out += (i ? "," : "") + std::to_string(orders[i]);
  return out;
}

// Resolved settings: CLI flag > config file > default. Every lookup is
// remembered so the manifest snapshots the values actually used.
class Settings {
 public:
  explicit Settings(const CommonFlags& flags) {
    if (!flags.config_path.empty()) {
      config_ = Config::load(flags.config_path);
      config_file_ = flags.config_path;
    }
    for (const auto& o : flags.overrides) config_.set_assignment(o);
    if (flags.level) config_.set("level", *flags.level);
    if (flags.seed) config_.set("seed", std::to_string(*flags.seed));
    if (flags.threads) config_.set("threads", std::to_string(*flags.threads));
  }

  double real(const std::string& key, double fallback) {
    double v = config_.get_double(key, fallback);
    used_[key] = real_text(v);
    return v;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    auto v = config_.get_int(key, fallback);
    used_[key] = std::to_string(v);
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    bool v = config_.get_bool(key, fallback);
    used_[key] = v ? "true" : "false";
    return v;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    auto v = config_.get_string(key, fallback);
    used_[key] = v;
    return v;
  }
  std::vector<int> orders(const std::string& key, const std::vector<int>& fallback) {
    auto raw = config_.get(key);
    auto v = raw ? parse_orders(*raw) : fallback;
    used_[key] = orders_text(v);
    return v;
  }

  Level level() { return require_level(text("level", "A")); }
  std::uint64_t seed() {
    auto v = integer("seed", static_cast<std::int64_t>(kDefaultSeed));
    if (v < 0) throw InputError("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  int threads() {
    auto v = integer("threads", 1);
    if (v < 1 || v > 1024) throw InputError("threads must be between 1 and 1024");
    return static_cast<int>(v);
  }

  const std::map<std::string, std::string>& used() const { return used_; }
  const std::string& config_file() const { return config_file_; }

 private:
  Config config_;
  std::string config_file_;
  std::map<std::string, std::string> used_;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--level", flags.level, "Taxonomy level")->check(CLI::IsMember({"A", "B", "C"}));
  cmd->add_option("--seed", flags.seed, "Random seed (default 13241)");
  cmd->add_option("--threads", flags.threads, "Worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--config", flags.config_path, "key = value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--set", flags.overrides, "Override a setting, key=value (repeatable)");
}

RunManifest start_manifest(const std::string& command, const std::vector<std::string>& argv, Settings& settings,
                           std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.argv = argv;
  m.seed = seed;
  if (!settings.config_file().empty()) m.add_input(settings.config_file());
  std::cerr << "seed: " << seed << '\n';
  return m;
}

void finish_manifest(RunManifest& m, Settings& settings, const fs::path& path) {
  m.config = settings.used();
  m.timestamp = utc_timestamp();
  m.write(path);
}

fs::path manifest_beside(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<LabeledInstance> at_level(std::vector<LabeledInstance> data, Level level) {
  std::erase_if(data, [&](const LabeledInstance& d) { return !d.label.at(level).has_value(); });
  return data;
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::string in, out, report;
};

int run_ingest(const IngestArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  auto manifest = start_manifest("ingest", argv, settings, settings.seed());
  auto in = open_in(args.in);
  auto out = open_out(args.out);
  std::map<std::string, std::size_t> rejected{{"too_short", 0}, {"too_few_words", 0}, {"url", 0}};
  std::size_t accepted = 0, malformed = 0, lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lines;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto doc = parse_corpus_line(line);
    if (!doc || !is_valid_id(doc->id)) {
      ++malformed;
      continue;
    }
    Instance inst = Instance::from_raw(doc->id, doc->text);
    auto decision = filter_raw(inst.text);
    if (!decision.keep) {
      ++rejected[std::string(to_string(decision.reason))];
      continue;
    }
    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["text"] = inst.text;
    j["tokens"] = inst.tokens;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    ++accepted;
  }
  out.close();

  nlohmann::ordered_json report;
  report["lines"] = lines;
  report["accepted"] = accepted;
  report["malformed"] = malformed;
  report["rejected"] = rejected;
  fs::path report_path = args.report.empty() ? fs::path(args.out + ".report.json") : fs::path(args.report);
  open_out(report_path) << report.dump(2) << '\n';

  manifest.add_input(args.in);
  manifest.add_output(args.out);
  manifest.add_output(report_path);
  finish_manifest(manifest, settings, manifest_beside(args.out));
  std::cout << "accepted " << accepted << ", rejected " << (rejected["too_short"] + rejected["too_few_words"] + rejected["url"])
            << ", malformed " << malformed << '\n';
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string gold, type, name, kind, out, words, distant, corpus;
};

std::vector<LabeledInstance> load_distant_training(const fs::path& dir, const fs::path& corpus_path, Level level,
                                                   Settings& settings, RunManifest& manifest) {
  auto records = read_distant(dir);
  auto policy_text = settings.text("select.policy", SelectionPolicy::defaults(level).to_string());
  auto policy = SelectionPolicy::parse(level, policy_text);
  DistillThresholds thresholds{settings.real("distill.off", 0.5), settings.real("distill.unt", 0.5)};

  std::map<std::string, HierLabel> wanted;
  for (const auto& r : records) {
    if (average_for(r, policy.any_of.front().label) && policy.accepts(r)) {
      HierLabel label = distill_labels(r, thresholds);
      if (label.at(level)) wanted.emplace(r.id, label);
    }
  }
  std::vector<LabeledInstance> out;
  auto in = open_in(corpus_path);
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    auto doc = parse_corpus_line(line);
    if (!doc) continue;
    auto it = wanted.find(doc->id);
    if (it == wanted.end()) continue;
    out.push_back({Instance::from_raw(doc->id, doc->text), it->second});
    wanted.erase(it);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.instance.id < y.instance.id; });
  for (const char* f : {kLevelAFile, kLevelBFile, kLevelCFile})
    if (fs::exists(dir / f)) manifest.add_input(dir / f);
  manifest.add_input(corpus_path);
  return out;
}

int run_train(const TrainArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  Level level = settings.level();
  std::uint64_t seed = settings.seed();
  auto manifest = start_manifest("train", argv, settings, seed);
  std::string name = args.name.empty() ? args.type : args.name;
  ModelKind kind = require_kind(args.kind);
  if (!is_valid_id(name) || name.find('@') != std::string::npos || name.find_first_of(" \t") != std::string::npos)
    throw InputError("member name '" + name + "' may not contain spaces, commas, quotes or '@'");

  std::vector<LabeledInstance> gold;
  if (!args.gold.empty()) {
    auto in = open_in(args.gold);
    gold = at_level(parse_gold_tsv(in), level);
    manifest.add_input(args.gold);
  }
  if (args.type != "lexicon") {
    if (args.gold.empty()) throw InputError("--gold is required for " + args.type + " models");
    if (settings.flag("train.upsample", false)) gold = upsample_balance(gold, level, seed);
  }

  std::optional<ModelFile> file;
  if (args.type == "pmi") {
    PmiConfig cfg;
    cfg.min_count = static_cast<std::uint64_t>(std::max<std::int64_t>(0, settings.integer("pmi.min_count", 5)));
    cfg.smoothing = settings.real("pmi.smoothing", cfg.smoothing);
    cfg.orders = settings.orders("pmi.orders", cfg.orders);
    cfg.temperature = settings.real("pmi.temperature", cfg.temperature);
    if (!args.distant.empty()) throw InputError("distant curriculum training applies to linear models only");
    file = ModelFile{name, kind, PmiModel::train(gold, level, cfg)};
    auto& pmi = std::get<PmiModel>(file->model);
    std::cout << "pmi: " << pmi.scored_ngrams() << " scored n-grams from " << gold.size() << " instances\n";
  } else if (args.type == "linear") {
    LinearConfig cfg = LinearConfig::defaults_for(level);
    cfg.orders = settings.orders("linear.orders", cfg.orders);
    cfg.learning_rate = settings.real("linear.lr", cfg.learning_rate);
    cfg.epochs = static_cast<int>(settings.integer("linear.epochs", cfg.epochs));
    cfg.dim = static_cast<int>(settings.integer("linear.dim", cfg.dim));
    cfg.bucket_bits = static_cast<int>(settings.integer("linear.bucket_bits", cfg.bucket_bits));
    cfg.seed = seed;
    if (settings.flag("train.class_weights", true)) {
      for (auto [label, w] : class_weights(level)) cfg.class_weights[class_index(label)] = w;
    }
    if (args.distant.empty()) {
      file = ModelFile{name, kind, LinearSubwordModel::train(gold, level, cfg)};
    } else {
      if (args.corpus.empty()) throw InputError("--distant needs --corpus for the instance texts");
      auto distant = load_distant_training(args.distant, args.corpus, level, settings, manifest);
      auto schedule = CurriculumSchedule::parse(
          settings.text("train.curriculum", CurriculumSchedule::defaults(level).to_string()));
      std::vector<TrainingPhase> phases;
      for (const auto& p : schedule.phases) {
        phases.push_back({p.source == DataSource::Gold ? std::span<const LabeledInstance>(gold)
                                                       : std::span<const LabeledInstance>(distant),
                          p.epochs});
      }
      std::cout << "curriculum " << schedule.to_string() << ": " << gold.size() << " gold, " << distant.size()
                << " distant instances\n";
      file = ModelFile{name, kind, LinearSubwordModel::train_phases(phases, level, cfg)};
    }
    auto& lin = std::get<LinearSubwordModel>(file->model);
    std::cout << "linear: vocabulary " << lin.vocabulary_size() << " buckets, final loss "
              << (lin.loss_history().empty() ? 0.0 : lin.loss_history().back()) << '\n';
  } else if (args.type == "lexicon") {
    if (level != Level::A) throw InputError("the lexicon baseline only scores level A");
    if (args.words.empty()) {
      file = ModelFile{name, kind, LexiconModel{}};
    } else {
      auto in = open_in(args.words);
      std::vector<std::string> words;
      std::string w;
      while (std::getline(in, w)) {
        strip_cr(w);
        if (!w.empty() && w[0] != '#') words.push_back(w);
      }
      manifest.add_input(args.words);
      file = ModelFile{name, kind, LexiconModel{words}};
    }
  } else {
    throw InputError("unknown model type '" + args.type + "' (pmi, linear, lexicon)");
  }

  save_model(fs::path(args.out), *file);
  manifest.add_output(args.out);
  finish_manifest(manifest, settings, manifest_beside(args.out));
  std::cout << "wrote " << args.out << " (" << file->type() << ", " << name << ", " << to_string(kind) << ", level "
            << to_string(level) << ")\n";
  return kExitOk;
}

// ---- label -----------------------------------------------------------------

struct LabelArgs {
  std::vector<std::string> models, scorers;
  std::string corpus, out;
};

int run_label(const LabelArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  auto manifest = start_manifest("label", argv, settings, settings.seed());
  Ensemble ensemble;
  std::vector<std::pair<std::string, std::unique_ptr<NativeScorer>>> natives;
  for (const auto& path : args.models) {
    ModelFile file = load_model(fs::path(path));
    auto it = std::find_if(natives.begin(), natives.end(), [&](const auto& n) { return n.first == file.name; });
    if (it == natives.end()) {
      natives.emplace_back(file.name, std::make_unique<NativeScorer>(file.name, file.kind));
      it = std::prev(natives.end());
    } else if (it->second->kind() != file.kind) {
      throw InputError("model " + path + " declares kind " + std::string(to_string(file.kind)) + " but member '" +
                       file.name + "' is " + std::string(to_string(it->second->kind())));
    }
    it->second->add(std::move(file));
    manifest.add_model(path);
  }
  for (auto& [_, scorer] : natives) ensemble.add(std::move(scorer));

  ExternalScorerOptions ext;
  ext.timeout = std::chrono::milliseconds(settings.integer("scorer.timeout_ms", ext.timeout.count()));
  ext.max_batch = static_cast<std::size_t>(std::max<std::int64_t>(1, settings.integer("scorer.max_batch", 256)));
  ext.tolerance = settings.real("scorer.tolerance", ext.tolerance);
  for (const auto& endpoint : args.scorers) {
    auto scorer = ExternalScorer::open(endpoint, ext);
    manifest.models.emplace_back(endpoint, "external:" + scorer->name() + "@" + std::string(to_string(scorer->kind())));
    ensemble.add(std::move(scorer));
  }
  ensemble.validate();

  CascadeOptions options;
  options.threads = settings.threads();
  options.gates.b_continuous_threshold = settings.real("gate.b_threshold", options.gates.b_continuous_threshold);
  options.gates.c_unt_threshold = settings.real("gate.c_unt_threshold", options.gates.c_unt_threshold);
  options.gates.c_max_std = settings.real("gate.c_max_std", options.gates.c_max_std);
  options.gates.validate();
  auto shard = settings.integer("label.shard_size", 50000);
  if (shard < 1) throw InputError("label.shard_size must be positive");

  auto in = open_in(args.corpus);
  fs::path out_dir(args.out);
  LabelStats stats = label_corpus(ensemble, in, out_dir, options, static_cast<std::size_t>(shard));
  manifest.add_input(args.corpus);
  for (const char* f : {kLevelAFile, kLevelBFile, kLevelCFile, kLevelAModelsFile}) manifest.add_output(out_dir / f);
  finish_manifest(manifest, settings, out_dir / "manifest.json");
  std::cout << "labeled " << stats.instances << " instances: " << stats.level_b << " reached level B, " << stats.level_c
            << " reached level C\n";
  return kExitOk;
}

// ---- select ----------------------------------------------------------------

struct SelectArgs {
  std::string distant, out, policy;
};

int run_select(const SelectArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  Level level = settings.level();
  auto manifest = start_manifest("select", argv, settings, settings.seed());
  std::string text = args.policy.empty() ? settings.text("select.policy", SelectionPolicy::defaults(level).to_string())
                                         : args.policy;
  auto policy = SelectionPolicy::parse(level, text);
  auto records = read_distant(args.distant);
  // Records that never reached the policy level are not candidates.
  std::erase_if(records, [&](const DistantRecord& r) { return !average_for(r, policy.any_of.front().label); });
  auto ids = select_training(records, policy);
  auto out = open_out(args.out);
  for (const auto& id : ids) out << id << '\n';
  out.close();
  for (const char* f : {kLevelAFile, kLevelBFile, kLevelCFile}) manifest.add_input(fs::path(args.distant) / f);
  manifest.add_output(args.out);
  finish_manifest(manifest, settings, manifest_beside(args.out));
  std::cout << "selected " << ids.size() << " of " << records.size() << " with " << policy.to_string() << '\n';
  return kExitOk;
}

// ---- partition -------------------------------------------------------------

struct PartitionArgs {
  std::string distant, out;
};

int run_partition(const PartitionArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  auto manifest = start_manifest("partition", argv, settings, settings.seed());
  PartitionThresholds t;
  t.easy_off = settings.real("partition.easy_off", t.easy_off);
  t.hard_off = settings.real("partition.hard_off", t.hard_off);
  t.hard_not = settings.real("partition.hard_not", t.hard_not);
  t.easy_not_first = settings.real("partition.easy_not_first", t.easy_not_first);
  t.easy_not_rest = settings.real("partition.easy_not_rest", t.easy_not_rest);
  fs::path dir(args.distant);
  if (!fs::exists(dir / kLevelAModelsFile)) throw InputError("partitioning needs " + (dir / kLevelAModelsFile).string());
  auto records = read_distant(dir);
  auto out = open_out(args.out);
  out << "id,difficulty,polarity\n";
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    auto votes = votes_from(r.level_a_predictions);
    auto bucket = partition_easy_hard(votes, t);
    if (!bucket) continue;
    out << r.id << ',' << to_string(bucket->difficulty) << ',' << to_string(bucket->polarity) << '\n';
    ++counts[std::string(to_string(bucket->difficulty)) + " " + std::string(to_string(bucket->polarity))];
  }
  out.close();
  manifest.add_input(dir / kLevelAModelsFile);
  manifest.add_output(args.out);
  manifest.notes["bucket_priority"] = "first match of Easy OFF, Hard OFF, Hard NOT, Easy NOT";
  finish_manifest(manifest, settings, manifest_beside(args.out));
  std::size_t total = 0;
  for (const auto& [k, n] : counts) {
    std::cout << k << ": " << n << '\n';
    total += n;
  }
  std::cout << "bucketed " << total << " of " << records.size() << '\n';
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string gold, pred, model, buckets, out, pred_out, iaa;
};

Labeling read_predictions(const fs::path& path, Level level) {
  auto in = open_in(path);
  std::string line;
  std::size_t row = 0;
  Labeling out;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (row == 1 && line.rfind("id,", 0) == 0) continue;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 2) throw InputError(path.string() + " row " + std::to_string(row) + ": expected id,label");
    auto label = parse_class(cells[1]);
    if (!label || level_of(*label) != level)
      throw InputError(path.string() + " row " + std::to_string(row) + ": '" + cells[1] + "' is not a level " +
                       std::string(to_string(level)) + " class");
    if (!out.emplace(cells[0], *label).second)
      throw InputError(path.string() + " row " + std::to_string(row) + ": duplicate id " + cells[0]);
  }
  return out;
}

std::map<std::string, Bucket> read_buckets(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t row = 0;
  std::map<std::string, Bucket> out;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (row == 1 && line.rfind("id,", 0) == 0) continue;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    auto where = path.string() + " row " + std::to_string(row);
    if (cells.size() != 3) throw InputError(where + ": expected id,difficulty,polarity");
    Difficulty d;
    if (cells[1] == "Easy") d = Difficulty::Easy;
    else if (cells[1] == "Hard") d = Difficulty::Hard;
    else throw InputError(where + ": difficulty must be Easy or Hard");
    auto p = parse_class(cells[2]);
    if (!p || level_of(*p) != Level::A) throw InputError(where + ": polarity must be OFF or NOT");
    out[cells[0]] = Bucket{d, *p};
  }
  return out;
}

AnnotationSet read_annotations(const fs::path& path) {
  auto in = open_in(path);
  AnnotationSet set;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() < 3) throw InputError(path.string() + " row " + std::to_string(row) + ": expected id and 2+ labels");
    std::string id = cells.front();
    cells.erase(cells.begin());
    if (!set.items.emplace(id, std::move(cells)).second)
      throw InputError(path.string() + " row " + std::to_string(row) + ": duplicate id " + id);
  }
  set.validate();
  return set;
}

int run_eval(const EvalArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  Level level = settings.level();
  auto manifest = start_manifest("eval", argv, settings, settings.seed());
  nlohmann::json doc;
  doc["level"] = std::string(to_string(level));

  if (!args.iaa.empty()) {
    double p0 = iaa_p0(read_annotations(args.iaa));
    doc["iaa_p0"] = p0;
    manifest.add_input(args.iaa);
    std::printf("IAA P0 %.4f\n", p0);
  }

  if (!args.gold.empty()) {
    if (args.pred.empty() == args.model.empty()) throw InputError("eval needs exactly one of --pred or --model");
    auto in = open_in(args.gold);
    auto gold_data = at_level(parse_gold_tsv(in), level);
    manifest.add_input(args.gold);
    Labeling gold;
    for (const auto& d : gold_data) gold[d.instance.id] = *d.label.at(level);

    Labeling pred;
    if (!args.pred.empty()) {
      auto all = read_predictions(args.pred, level);
      for (const auto& [id, _] : gold) {
        auto it = all.find(id);
        if (it == all.end()) throw InputError("no prediction for gold id " + id);
        pred.insert(*it);
      }
      manifest.add_input(args.pred);
    } else {
      ModelFile model = load_model(fs::path(args.model));
      if (model.level() != level)
        throw InputError("model scores level " + std::string(to_string(model.level())) + ", evaluating level " +
                         std::string(to_string(level)));
      std::vector<ClassLabel> labels(gold_data.size());
      parallel_for(gold_data.size(), settings.threads(),
                   [&](std::size_t i) { labels[i] = model.predict(gold_data[i].instance).hard_label; });
      for (std::size_t i = 0; i < gold_data.size(); ++i) pred[gold_data[i].instance.id] = labels[i];
      manifest.add_model(args.model);
    }
    if (!args.pred_out.empty()) {
      auto out = open_out(args.pred_out);
      out << "id,label\n";
      for (const auto& [id, label] : pred) out << id << ',' << to_string(label) << '\n';
      out.close();
      manifest.add_output(args.pred_out);
    }

    std::vector<EvalReport> reports;
    if (args.buckets.empty()) {
      reports.push_back(macro_f1(gold, pred));
    } else {
      reports = evaluate_buckets(gold, pred, read_buckets(args.buckets));
      manifest.add_input(args.buckets);
    }
    doc["reports"] = nlohmann::json::array();
    for (const auto& r : reports) {
      doc["reports"].push_back(r.to_json());
      std::cout << r.to_text();
    }
  } else if (args.iaa.empty()) {
    throw InputError("eval needs --gold (with --pred or --model) or --iaa");
  }

  open_out(args.out) << doc.dump(2) << '\n';
  manifest.add_output(args.out);
  finish_manifest(manifest, settings, manifest_beside(args.out));
  return kExitOk;
}

// ---- hist ------------------------------------------------------------------

struct HistArgs {
  std::string in, column, out;
};

int run_hist(const HistArgs& args, Settings& settings, const std::vector<std::string>& argv) {
  auto manifest = start_manifest("hist", argv, settings, settings.seed());
  auto bins = settings.integer("hist.bins", 20);
  double lo = settings.real("hist.lo", 0.0);
  double hi = settings.real("hist.hi", 1.0);
  auto in = open_in(args.in);
  std::string line;
  if (!std::getline(in, line)) throw InputError(args.in + " is empty");
  strip_cr(line);
  auto header = split_csv(line);
  auto col = std::find(header.begin(), header.end(), args.column);
  if (col == header.end()) throw InputError(args.in + " has no column '" + args.column + "'");
  auto index = static_cast<std::size_t>(col - header.begin());
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (index >= cells.size()) throw InputError(args.in + " row " + std::to_string(row) + ": missing column");
    char* end = nullptr;
    double v = std::strtod(cells[index].c_str(), &end);
    if (cells[index].empty() || *end != '\0')
      throw InputError(args.in + " row " + std::to_string(row) + ": '" + cells[index] + "' is not a number");
    values.push_back(v);
  }
  if (bins < 1 || bins > 1000000) throw InputError("hist.bins must be between 1 and 1000000");
  auto h = score_histogram(values, static_cast<int>(bins), lo, hi, settings.threads());
  auto out = open_out(args.out);
  h.write_csv(out);
  out.close();
  std::cout << h.render_text();
  manifest.add_input(args.in);
  manifest.add_output(args.out);
  finish_manifest(manifest, settings, manifest_beside(args.out));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised offensive-language labeling: ensemble co-training, selection and evaluation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  CommonFlags common;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Anonymize, tokenize and filter a raw JSONL corpus");
  c_ingest->add_option("--in", ingest.in, "Raw JSONL, one {\"id\",\"text\"} per line")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Accepted instances (JSONL)")->required();
  c_ingest->add_option("--report", ingest.report, "Rejection summary (default <out>.report.json)");
  add_common(c_ingest, common);

  TrainArgs train;
  train.kind = "discrete";
  auto* c_train = app.add_subcommand("train", "Train a native model on a gold TSV");
  c_train->add_option("--type", train.type, "pmi, linear or lexicon")->required()->check(CLI::IsMember({"pmi", "linear", "lexicon"}));
  c_train->add_option("--gold", train.gold, "Gold TSV")->check(CLI::ExistingFile);
  c_train->add_option("--out", train.out, "Model file")->required();
  c_train->add_option("--name", train.name, "Ensemble member name (default: the type)");
  c_train->add_option("--kind", train.kind, "continuous or discrete")->capture_default_str()->check(CLI::IsMember({"continuous", "discrete"}));
  c_train->add_option("--words", train.words, "Word list for the lexicon model")->check(CLI::ExistingFile);
  c_train->add_option("--distant", train.distant, "Distant score directory for curriculum training")->check(CLI::ExistingDirectory);
  c_train->add_option("--corpus", train.corpus, "Corpus JSONL holding the distant texts")->check(CLI::ExistingFile);
  add_common(c_train, common);

  LabelArgs label;
  auto* c_label = app.add_subcommand("label", "Run the co-training cascade over a corpus");
  c_label->add_option("--model", label.models, "Model file (repeatable; files sharing a name form one member)")->check(CLI::ExistingFile);
  c_label->add_option("--scorer", label.scorers, "External scorer, stdio:<command> or tcp:<host>:<port> (repeatable)");
  c_label->add_option("--corpus", label.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  c_label->add_option("--out", label.out, "Output directory")->required();
  add_common(c_label, common);

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "Pick confident distant instances for training");
  c_select->add_option("--distant", select.distant, "Distant score directory")->required()->check(CLI::ExistingDirectory);
  c_select->add_option("--policy", select.policy, "Conditions such as 'OFF<0.2|OFF>0.7'");
  c_select->add_option("--out", select.out, "Selected ids, one per line")->required();
  add_common(c_select, common);

  PartitionArgs partition;
  auto* c_partition = app.add_subcommand("partition", "Split distant instances into easy and hard buckets");
  c_partition->add_option("--distant", partition.distant, "Distant score directory")->required()->check(CLI::ExistingDirectory);
  c_partition->add_option("--out", partition.out, "CSV id,difficulty,polarity")->required();
  add_common(c_partition, common);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Macro-F1 on a gold TSV, optionally per bucket; agreement");
  c_eval->add_option("--gold", eval.gold, "Gold TSV")->check(CLI::ExistingFile);
  c_eval->add_option("--pred", eval.pred, "Predictions CSV id,label")->check(CLI::ExistingFile);
  c_eval->add_option("--model", eval.model, "Model file to predict with")->check(CLI::ExistingFile);
  c_eval->add_option("--buckets", eval.buckets, "Partition CSV for Easy/Hard slices")->check(CLI::ExistingFile);
  c_eval->add_option("--pred-out", eval.pred_out, "Write the predictions used");
  c_eval->add_option("--iaa", eval.iaa, "Annotation TSV: id then one label per annotator")->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval.out, "JSON report")->required();
  add_common(c_eval, common);

  HistArgs hist;
  auto* c_hist = app.add_subcommand("hist", "Histogram of a score column");
  c_hist->add_option("--in", hist.in, "CSV with a header row")->required()->check(CLI::ExistingFile);
  hist.column = "average";
  c_hist->add_option("--column", hist.column, "Column to bin")->capture_default_str();
  c_hist->add_option("--out", hist.out, "Histogram CSV")->required();
  add_common(c_hist, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Settings settings(common);
    if (*c_ingest) return run_ingest(ingest, settings, args);
    if (*c_train) return run_train(train, settings, args);
    if (*c_label) return run_label(label, settings, args);
    if (*c_select) return run_select(select, settings, args);
    if (*c_partition) return run_partition(partition, settings, args);
    if (*c_eval) return run_eval(eval, settings, args);
    if (*c_hist) return run_hist(hist, settings, args);
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
