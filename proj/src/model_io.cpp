#include "semilabel/model_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "semilabel/errors.hpp"

namespace semilabel {

static_assert(std::endian::native == std::endian::little, "linear model blobs assume a little-endian host");

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_orders(const std::vector<int>& orders) {
  std::string out;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(orders[i]);
  }
  return out;
}

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
  return out;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("model file truncated: expected ") + what);
  return line;
}

std::pair<std::string, std::string> split_kv(const std::string& line) {
  auto sp = line.find(' ');
  if (sp == std::string::npos) return {line, ""};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

std::string expect_key(std::istream& in, const std::string& key) {
  auto [k, v] = split_kv(next_line(in, key.c_str()));
  if (k != key) throw FormatError("model file: expected '" + key + "', found '" + k + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("model file: bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw FormatError("model file: bad real '" + s + "'");
  return v;
}

template <typename T>
void write_pod(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
void read_pod(std::istream& in, std::span<T> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!in) throw FormatError("model file truncated inside the linear tables");
}

void write_pmi(std::ostream& out, const PmiModel& model) {
  const auto& cfg = model.config();
  out << "config min_count " << cfg.min_count << '\n';
  out << "config smoothing " << format_double(cfg.smoothing) << '\n';
  out << "config orders " << join_orders(cfg.orders) << '\n';
  out << "config temperature " << format_double(cfg.temperature) << '\n';
  out << "tables\n";
  const auto& counts = model.counts();
  const std::size_t n = num_classes(model.level());
  out << "class_totals";
  for (std::size_t c = 0; c < n; ++c) out << ' ' << counts.class_totals[c];
  out << '\n';
  std::vector<const std::pair<const std::string, CountsTable::Row>*> rows;
  rows.reserve(counts.ngrams.size());
  for (const auto& entry : counts.ngrams) rows.push_back(&entry);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "ngrams " << rows.size() << '\n';
  for (const auto* row : rows) {
    out << row->first;
    for (std::size_t c = 0; c < n; ++c) out << '\t' << row->second.per_class[c];
    out << '\n';
  }
}

PmiModel read_pmi(std::istream& in, Level level, const std::map<std::string, std::string>& config) {
  PmiConfig cfg;
  try {
    if (config.count("min_count")) cfg.min_count = parse_u64(config.at("min_count"));
    if (config.count("smoothing")) cfg.smoothing = parse_double(config.at("smoothing"));
    if (config.count("orders")) cfg.orders = parse_orders(config.at("orders"));
    if (config.count("temperature")) cfg.temperature = parse_double(config.at("temperature"));
  } catch (const std::invalid_argument&) {
    throw FormatError("model file: bad PMI config value");
  }
  const std::size_t n = num_classes(level);
  CountsTable counts;
  {
    std::stringstream ss(expect_key(in, "class_totals"));
    for (std::size_t c = 0; c < n; ++c) {
      std::string tok;
      ss >> tok;
      counts.class_totals[c] = parse_u64(tok);
      counts.grand_total += counts.class_totals[c];
    }
  }
  std::uint64_t rows = parse_u64(expect_key(in, "ngrams"));
  counts.ngrams.reserve(rows);
  std::array<std::uint64_t, kMaxClasses> check{};
  for (std::uint64_t r = 0; r < rows; ++r) {
    std::string line = next_line(in, "n-gram row");
    std::stringstream ss(line);
    std::string gram;
    std::getline(ss, gram, '\t');
    CountsTable::Row row;
    for (std::size_t c = 0; c < n; ++c) {
      std::string tok;
      if (!std::getline(ss, tok, '\t')) throw FormatError("model file: short n-gram row '" + gram + "'");
      row.per_class[c] = parse_u64(tok);
      row.total += row.per_class[c];
      check[c] += row.per_class[c];
    }
    counts.ngrams.emplace(std::move(gram), row);
  }
  if (check != counts.class_totals) throw FormatError("model file: n-gram counts do not sum to the class totals");
  try {
    return PmiModel::from_counts(level, cfg, std::move(counts));
  } catch (const InputError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

void write_linear(std::ostream& out, const LinearSubwordModel& model) {
  const auto& cfg = model.config();
  const std::size_t n = num_classes(model.level());
  out << "config orders " << join_orders(cfg.orders) << '\n';
  out << "config learning_rate " << format_double(cfg.learning_rate) << '\n';
  out << "config epochs " << cfg.epochs << '\n';
  out << "config dim " << cfg.dim << '\n';
  out << "config bucket_bits " << cfg.bucket_bits << '\n';
  out << "config seed " << cfg.seed << '\n';
  out << "config class_weights";
  for (std::size_t c = 0; c < n; ++c) out << (c ? "," : " ") << format_double(cfg.class_weights[c]);
  out << '\n';
  out << "tables\n";
  auto st = model.state();
  out << "rows " << st.buckets.size() << '\n';
  write_pod<std::uint32_t>(out, st.buckets);
  write_pod<double>(out, st.embeddings);
  write_pod<double>(out, st.output);
  write_pod<double>(out, std::span<const double>(st.bias.data(), n));
  out << '\n';
}

LinearSubwordModel read_linear(std::istream& in, Level level, const std::map<std::string, std::string>& config) {
  LinearConfig cfg = LinearConfig::defaults_for(level);
  try {
    if (config.count("orders")) cfg.orders = parse_orders(config.at("orders"));
    if (config.count("learning_rate")) cfg.learning_rate = parse_double(config.at("learning_rate"));
    if (config.count("epochs")) cfg.epochs = static_cast<int>(parse_u64(config.at("epochs")));
    if (config.count("dim")) cfg.dim = static_cast<int>(parse_u64(config.at("dim")));
    if (config.count("bucket_bits")) cfg.bucket_bits = static_cast<int>(parse_u64(config.at("bucket_bits")));
    if (config.count("seed")) cfg.seed = parse_u64(config.at("seed"));
    if (config.count("class_weights")) {
      std::stringstream ss(config.at("class_weights"));
      std::string part;
      for (std::size_t c = 0; c < kMaxClasses && std::getline(ss, part, ','); ++c) cfg.class_weights[c] = parse_double(part);
    }
    cfg.validate();
  } catch (const std::invalid_argument&) {
    throw FormatError("model file: bad linear config value");
  } catch (const FormatError&) {
    throw;
  } catch (const InputError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  const std::size_t n = num_classes(level);
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  std::uint64_t rows = parse_u64(expect_key(in, "rows"));
  LinearSubwordModel::State st;
  st.buckets.resize(rows);
  st.embeddings.resize(rows * dim);
  st.output.resize(n * dim);
  read_pod<std::uint32_t>(in, st.buckets);
  read_pod<double>(in, st.embeddings);
  read_pod<double>(in, st.output);
  read_pod<double>(in, std::span<double>(st.bias.data(), n));
  return LinearSubwordModel::from_state(level, cfg, std::move(st));
}

}  // namespace

Level ModelFile::level() const {
  return std::visit([](const auto& m) -> Level {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LexiconModel>) {
      return Level::A;
    } else {
      return m.level();
    }
  }, model);
}

std::string_view ModelFile::type() const {
  switch (model.index()) {
    case 0: return "pmi";
    case 1: return "linear";
    default: return "lexicon";
  }
}

ModelPrediction ModelFile::predict(const Instance& instance) const {
  ModelPrediction pred = std::visit([&](const auto& m) { return m.predict(instance); }, model);
  pred.model_name = name;
  pred.kind = kind;
  return pred;
}

void save_model(std::ostream& out, const ModelFile& file) {
  out << kModelMagic << '\n';
  out << "format " << kModelFormatVersion << '\n';
  out << "type " << file.type() << '\n';
  out << "name " << file.name << '\n';
  out << "kind " << to_string(file.kind) << '\n';
  out << "level " << to_string(file.level()) << '\n';
  if (const auto* pmi = std::get_if<PmiModel>(&file.model)) {
    write_pmi(out, *pmi);
  } else if (const auto* linear = std::get_if<LinearSubwordModel>(&file.model)) {
    write_linear(out, *linear);
  } else {
    const auto& lex = std::get<LexiconModel>(file.model);
    out << "tables\n";
    out << "words " << lex.words().size() << '\n';
    for (const auto& w : lex.words()) out << w << '\n';
  }
  out << "end\n";
}

ModelFile load_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kModelMagic) throw FormatError("not a model file (bad magic header)");
  std::string version = expect_key(in, "format");
  if (version != std::to_string(kModelFormatVersion)) {
    throw FormatError("unsupported model format version " + version + " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  std::string type = expect_key(in, "type");
  std::string name = expect_key(in, "name");
  ModelKind kind;
  try {
    kind = require_kind(expect_key(in, "kind"));
  } catch (const InputError& e) {
    throw FormatError(e.what());
  }
  auto level = parse_level(expect_key(in, "level"));
  if (!level) throw FormatError("model file: bad level");

  std::map<std::string, std::string> config;
  while (true) {
    std::string line = next_line(in, "config or tables");
    if (line == "tables") break;
    auto [k, rest] = split_kv(line);
    if (k != "config") throw FormatError("model file: unexpected line '" + line + "'");
    auto [ck, cv] = split_kv(rest);
    config[ck] = cv;
  }

  auto finish = [&](auto model) {
    // The linear blob is followed by a newline before the end marker.
    std::string line = next_line(in, "end");
    if (line.empty()) line = next_line(in, "end");
    if (line != "end") throw FormatError("model file: missing end marker");
    return ModelFile{name, kind, std::move(model)};
  };

  if (type == "pmi") return finish(read_pmi(in, *level, config));
  if (type == "linear") return finish(read_linear(in, *level, config));
  if (type == "lexicon") {
    if (*level != Level::A) throw FormatError("lexicon models only serve level A");
    std::uint64_t count = parse_u64(expect_key(in, "words"));
    std::vector<std::string> words;
    for (std::uint64_t i = 0; i < count; ++i) words.push_back(next_line(in, "lexicon word"));
    return finish(LexiconModel(words));
  }
  throw FormatError("model file: unknown model type '" + type + "'");
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file " + path.string());
  save_model(out, file);
  if (!out) throw InputError("failed writing model file " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read model file " + path.string());
  return load_model(in);
}

}  // namespace semilabel
