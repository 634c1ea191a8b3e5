#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "semilabel/lexicon.hpp"
#include "semilabel/linear.hpp"
#include "semilabel/pmi.hpp"

namespace semilabel {

inline constexpr std::string_view kModelMagic = "SEMILABEL-MODEL";
inline constexpr int kModelFormatVersion = 1;

// One trained model for one level plus the ensemble identity it carries.
struct ModelFile {
  std::string name;
  ModelKind kind = ModelKind::Discrete;
  std::variant<PmiModel, LinearSubwordModel, LexiconModel> model;

  Level level() const;
  std::string_view type() const;
  ModelPrediction predict(const Instance& instance) const;
};

// Layout: magic line, `format N`, header lines (type, name, kind, level),
// `config key value` lines, then a `tables` section whose body depends on
// the type. Linear tables are a little-endian binary blob.
void save_model(std::ostream& out, const ModelFile& file);
ModelFile load_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace semilabel
