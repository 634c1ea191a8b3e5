#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "semilabel/corpus.hpp"
#include "semilabel/model_io.hpp"
#include "semilabel/prediction.hpp"

namespace semilabel {

// An ensemble member. Scores batches of instances at the levels it serves.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const std::string& name() const = 0;
  virtual ModelKind kind() const = 0;
  virtual bool serves(Level level) const = 0;
  // One prediction per instance, in input order. `threads` bounds the
  // parallelism a native member may use.
  virtual std::vector<ModelPrediction> score(std::span<const Instance> batch, Level level, int threads) = 0;
};

// In-process member backed by trained models, one per level.
class NativeScorer final : public Scorer {
 public:
  NativeScorer(std::string name, ModelKind kind);

  // Throws InputError if the level is already covered.
  void add(ModelFile file);

  const std::string& name() const override { return name_; }
  ModelKind kind() const override { return kind_; }
  bool serves(Level level) const override { return models_.count(level) != 0; }
  std::vector<ModelPrediction> score(std::span<const Instance> batch, Level level, int threads) override;

 private:
  std::string name_;
  ModelKind kind_;
  std::map<Level, ModelFile> models_;
};

// Bidirectional newline-delimited channel to an external scorer.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // Throws ProtocolError (Timeout or Closed).
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

// `/bin/sh -c command` with its stdin/stdout as the channel.
std::unique_ptr<LineChannel> spawn_process_channel(const std::string& command);
std::unique_ptr<LineChannel> connect_tcp_channel(const std::string& host, std::uint16_t port);

struct ExternalScorerOptions {
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 256;
  // Slack allowed on [0,1] bounds and on continuous sums before a reply is rejected.
  double tolerance = 1e-6;
};

// Client side of the scorer wire protocol:
//   scorer -> {"hello":{"name":..,"kind":..,"levels":{"A":["OFF","NOT"],..}}}
//   client -> {"req_id":N,"level":"A","texts":[..]}
//   scorer -> {"req_id":N,"confidences":[{"OFF":..,"NOT":..},..]}
// Requests are serialized per connection.
class ExternalScorer final : public Scorer {
 public:
  ExternalScorer(std::unique_ptr<LineChannel> channel, ExternalScorerOptions options = {});

  // `stdio:<command>` or `tcp:<host>:<port>`.
  static std::unique_ptr<ExternalScorer> open(const std::string& endpoint, ExternalScorerOptions options = {});

  const std::string& name() const override { return name_; }
  ModelKind kind() const override { return kind_; }
  bool serves(Level level) const override { return levels_.count(level) != 0; }
  std::vector<ModelPrediction> score(std::span<const Instance> batch, Level level, int threads) override;

 private:
  std::vector<ModelPrediction> score_chunk(std::span<const Instance> batch, Level level);

  std::unique_ptr<LineChannel> channel_;
  ExternalScorerOptions options_;
  std::string name_;
  ModelKind kind_ = ModelKind::Continuous;
  std::map<Level, bool> levels_;
  std::int64_t next_req_id_ = 1;
  std::mutex mutex_;
};

// Decodes one confidence object against the level's class set. Exposed for tests.
ModelPrediction decode_confidences(const nlohmann::json& object, Level level, const std::string& model_name,
                                   ModelKind kind, double tolerance);

}  // namespace semilabel
