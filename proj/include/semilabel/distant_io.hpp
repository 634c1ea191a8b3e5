#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "semilabel/cotrain.hpp"

namespace semilabel {

// File names inside a distant score directory.
inline constexpr const char* kLevelAFile = "level_a.csv";  // id,average,std
inline constexpr const char* kLevelBFile = "level_b.csv";  // id,average,std (UNT)
inline constexpr const char* kLevelCFile = "level_c.csv";  // id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth
// id,<member>@<kind>,... with cells `<OFF confidence>:<hard label>`.
inline constexpr const char* kLevelAModelsFile = "level_a_models.csv";

// CSV-safe ids only: no commas, quotes or line breaks.
bool is_valid_id(std::string_view id);

std::string format_real(double value);  // 6 decimal places

class DistantWriter {
 public:
  // `level_a_members` fixes the column order of the per-model file.
  DistantWriter(const std::filesystem::path& dir, std::vector<std::pair<std::string, ModelKind>> level_a_members);

  void write(const DistantRecord& record);
  void close();

 private:
  std::vector<std::pair<std::string, ModelKind>> members_;
  std::ofstream a_, b_, c_, models_;
};

// Loads a score directory; the per-model file is optional. Per-model
// confidences inside AggregateScore are not stored and come back empty.
std::vector<DistantRecord> read_distant(const std::filesystem::path& dir);

struct LabelStats {
  std::size_t instances = 0;
  std::size_t level_b = 0;
  std::size_t level_c = 0;
  std::size_t shards = 0;
};

// Streams a JSONL corpus through the cascade in shards of `shard_size`
// instances, then merges the id-sorted shards into `out_dir`.
LabelStats label_corpus(Ensemble& ensemble, std::istream& corpus, const std::filesystem::path& out_dir,
                        const CascadeOptions& options, std::size_t shard_size = 50000);

}  // namespace semilabel
