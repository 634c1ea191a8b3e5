#include "semilabel/distant_io.hpp"

#include <cstdio>
#include <map>
#include <queue>
#include <sstream>

#include "semilabel/errors.hpp"

namespace semilabel {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeaderAB = "id,average,std";
constexpr const char* kHeaderC = "id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, ',')) cols.push_back(col);
  if (!line.empty() && line.back() == ',') cols.emplace_back();
  return cols;
}

double parse_real(const std::string& text, const fs::path& file, std::size_t row) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw InputError(file.string() + " row " + std::to_string(row) + ": bad number '" + text + "'");
  }
  return v;
}

// Calls `row_fn(cols, row_number)` for each data row after checking the header.
template <typename Fn>
void read_csv(const fs::path& path, const std::string& header, std::size_t columns, Fn&& row_fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || (!header.empty() && line != header)) {
    throw InputError(path.string() + ": expected header '" + header + "'");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cols = split_csv(line);
    if (columns != 0 && cols.size() != columns) {
      throw InputError(path.string() + " row " + std::to_string(row) + ": expected " + std::to_string(columns) + " columns");
    }
    row_fn(cols, row);
  }
}

std::string first_field(const std::string& line) { return line.substr(0, line.find(',')); }

// k-way merge of id-sorted CSV shards that share `header`.
void merge_shards(const std::vector<fs::path>& shards, const fs::path& out_path, bool reject_duplicates) {
  std::ofstream out = open_out(out_path);
  std::vector<std::ifstream> ins;
  std::string header;
  for (const auto& p : shards) {
    ins.emplace_back(p, std::ios::binary);
    std::string h;
    std::getline(ins.back(), h);
    header = h;
  }
  out << header << '\n';

  using Head = std::pair<std::string, std::size_t>;  // (line, shard)
  auto cmp = [](const Head& x, const Head& y) {
    auto ix = first_field(x.first);
    auto iy = first_field(y.first);
    return ix != iy ? ix > iy : x.second > y.second;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < ins.size(); ++i) {
    std::string line;
    if (std::getline(ins[i], line)) heap.emplace(std::move(line), i);
  }
  std::string last_id;
  bool any = false;
  while (!heap.empty()) {
    auto [line, shard] = heap.top();
    heap.pop();
    std::string id = first_field(line);
    if (reject_duplicates && any && id == last_id) throw InputError("duplicate instance id '" + id + "'");
    last_id = id;
    any = true;
    out << line << '\n';
    std::string next;
    if (std::getline(ins[shard], next)) heap.emplace(std::move(next), shard);
  }
  if (!out) throw InputError("failed writing " + out_path.string());
}

}  // namespace

bool is_valid_id(std::string_view id) {
  return !id.empty() && id.find_first_of(",\"\r\n") == std::string_view::npos;
}

std::string format_real(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

DistantWriter::DistantWriter(const fs::path& dir, std::vector<std::pair<std::string, ModelKind>> level_a_members)
    : members_(std::move(level_a_members)) {
  fs::create_directories(dir);
  a_ = open_out(dir / kLevelAFile);
  b_ = open_out(dir / kLevelBFile);
  c_ = open_out(dir / kLevelCFile);
  models_ = open_out(dir / kLevelAModelsFile);
  a_ << kHeaderAB << '\n';
  b_ << kHeaderAB << '\n';
  c_ << kHeaderC << '\n';
  models_ << "id";
  for (const auto& [name, kind] : members_) models_ << ',' << name << '@' << to_string(kind);
  models_ << '\n';
}

void DistantWriter::write(const DistantRecord& rec) {
  if (!is_valid_id(rec.id)) throw InputError("instance id '" + rec.id + "' cannot be written to CSV");
  a_ << rec.id << ',' << format_real(rec.level_a.average) << ',' << format_real(rec.level_a.std) << '\n';
  if (rec.level_b) b_ << rec.id << ',' << format_real(rec.level_b->average) << ',' << format_real(rec.level_b->std) << '\n';
  if (rec.level_c) {
    c_ << rec.id;
    for (const auto& s : *rec.level_c) c_ << ',' << format_real(s.average) << ',' << format_real(s.std);
    c_ << '\n';
  }
  models_ << rec.id;
  for (const auto& [name, kind] : members_) {
    auto it = std::find_if(rec.level_a_predictions.begin(), rec.level_a_predictions.end(),
                           [&](const ModelPrediction& p) { return p.model_name == name; });
    if (it == rec.level_a_predictions.end()) throw InputError("record '" + rec.id + "' lacks a prediction from '" + name + "'");
    models_ << ',' << format_real(it->confidence(ClassLabel::OFF)) << ':' << to_string(it->hard_label);
  }
  models_ << '\n';
}

void DistantWriter::close() {
  for (auto* s : {&a_, &b_, &c_, &models_}) {
    s->flush();
    if (!*s) throw InputError("failed writing distant score files");
    s->close();
  }
}

std::vector<DistantRecord> read_distant(const fs::path& dir) {
  std::vector<DistantRecord> records;
  std::map<std::string, std::size_t> index;
  read_csv(dir / kLevelAFile, kHeaderAB, 3, [&](const auto& cols, std::size_t row) {
    if (!index.emplace(cols[0], records.size()).second) {
      throw InputError((dir / kLevelAFile).string() + " row " + std::to_string(row) + ": duplicate id");
    }
    DistantRecord rec;
    rec.id = cols[0];
    rec.level_a.average = parse_real(cols[1], dir / kLevelAFile, row);
    rec.level_a.std = parse_real(cols[2], dir / kLevelAFile, row);
    records.push_back(std::move(rec));
  });
  auto lookup = [&](const std::string& id, const fs::path& file, std::size_t row) -> DistantRecord& {
    auto it = index.find(id);
    if (it == index.end()) throw InputError(file.string() + " row " + std::to_string(row) + ": id '" + id + "' has no level A score");
    return records[it->second];
  };
  if (fs::exists(dir / kLevelBFile)) {
    read_csv(dir / kLevelBFile, kHeaderAB, 3, [&](const auto& cols, std::size_t row) {
      auto& rec = lookup(cols[0], dir / kLevelBFile, row);
      rec.level_b = AggregateScore{parse_real(cols[1], dir / kLevelBFile, row), parse_real(cols[2], dir / kLevelBFile, row), {}};
    });
  }
  if (fs::exists(dir / kLevelCFile)) {
    read_csv(dir / kLevelCFile, kHeaderC, 7, [&](const auto& cols, std::size_t row) {
      auto& rec = lookup(cols[0], dir / kLevelCFile, row);
      if (!rec.level_b) throw InputError((dir / kLevelCFile).string() + " row " + std::to_string(row) + ": level C score without level B");
      std::array<AggregateScore, 3> c;
      for (std::size_t k = 0; k < 3; ++k) {
        c[k].average = parse_real(cols[1 + 2 * k], dir / kLevelCFile, row);
        c[k].std = parse_real(cols[2 + 2 * k], dir / kLevelCFile, row);
      }
      rec.level_c = c;
    });
  }
  const fs::path models_path = dir / kLevelAModelsFile;
  if (fs::exists(models_path)) {
    std::ifstream in(models_path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    auto head = split_csv(header);
    if (head.empty() || head[0] != "id") throw InputError(models_path.string() + ": header must start with 'id'");
    std::vector<std::pair<std::string, ModelKind>> members;
    for (std::size_t k = 1; k < head.size(); ++k) {
      auto at = head[k].rfind('@');
      if (at == std::string::npos) throw InputError(models_path.string() + ": column '" + head[k] + "' lacks @kind");
      members.emplace_back(head[k].substr(0, at), require_kind(head[k].substr(at + 1)));
    }
    read_csv(models_path, header, head.size(), [&](const auto& cols, std::size_t row) {
      auto& rec = lookup(cols[0], models_path, row);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::string& cell = cols[k + 1];
        auto colon = cell.find(':');
        auto label = colon == std::string::npos ? std::nullopt : parse_class(cell.substr(colon + 1));
        if (!label || level_of(*label) != Level::A) {
          throw InputError(models_path.string() + " row " + std::to_string(row) + ": bad cell '" + cell + "'");
        }
        ModelPrediction p;
        p.model_name = members[k].first;
        p.kind = members[k].second;
        p.level = Level::A;
        double off = parse_real(cell.substr(0, colon), models_path, row);
        p.confidences = {off, 1.0 - off, 0.0};
        p.hard_label = *label;
        rec.level_a_predictions.push_back(std::move(p));
      }
    });
  }
  return records;
}

LabelStats label_corpus(Ensemble& ensemble, std::istream& corpus, const fs::path& out_dir,
                        const CascadeOptions& options, std::size_t shard_size) {
  ensemble.validate();
  if (shard_size == 0) shard_size = 1;
  std::vector<std::pair<std::string, ModelKind>> members;
  for (Scorer* m : ensemble.members_for(Level::A)) members.emplace_back(m->name(), m->kind());

  fs::create_directories(out_dir);
  const fs::path shard_root = out_dir / ".shards";
  fs::remove_all(shard_root);
  fs::create_directories(shard_root);

  LabelStats stats;
  std::vector<fs::path> shard_dirs;
  std::vector<Instance> batch;
  std::size_t line_no = 0;

  auto flush = [&] {
    auto records = run_cascade(ensemble, batch, options);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu", shard_dirs.size());
    shard_dirs.push_back(shard_root / name);
    DistantWriter writer(shard_dirs.back(), members);
    for (const auto& rec : records) {
      stats.level_b += rec.level_b ? 1 : 0;
      stats.level_c += rec.level_c ? 1 : 0;
      writer.write(rec);
    }
    writer.close();
    batch.clear();
  };

  std::string line;
  while (std::getline(corpus, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto doc = parse_corpus_line(line);
    if (!doc) throw InputError("corpus line " + std::to_string(line_no) + ": expected {\"id\":..,\"text\":..}");
    if (!is_valid_id(doc->id)) throw InputError("corpus line " + std::to_string(line_no) + ": id contains a comma, quote or newline");
    batch.push_back(Instance::from_raw(std::move(doc->id), doc->text));
    ++stats.instances;
    if (batch.size() >= shard_size) flush();
  }
  if (!batch.empty() || shard_dirs.empty()) flush();
  stats.shards = shard_dirs.size();

  for (const char* file : {kLevelAFile, kLevelBFile, kLevelCFile, kLevelAModelsFile}) {
    std::vector<fs::path> parts;
    for (const auto& d : shard_dirs) parts.push_back(d / file);
    merge_shards(parts, out_dir / file, file == std::string(kLevelAFile));
  }
  fs::remove_all(shard_root);
  return stats;
}

}  // namespace semilabel
