#include "semilabel/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include <nlohmann/json.hpp>

#include "semilabel/errors.hpp"
#include "semilabel/parallel.hpp"

namespace semilabel {

using nlohmann::json;
using Kind = ProtocolError::Kind;

NativeScorer::NativeScorer(std::string name, ModelKind kind) : name_(std::move(name)), kind_(kind) {}

void NativeScorer::add(ModelFile file) {
  Level level = file.level();
  if (models_.count(level)) {
    throw InputError("ensemble member '" + name_ + "' already has a level " + std::string(to_string(level)) + " model");
  }
  file.name = name_;
  file.kind = kind_;
  models_.emplace(level, std::move(file));
}

std::vector<ModelPrediction> NativeScorer::score(std::span<const Instance> batch, Level level, int threads) {
  auto it = models_.find(level);
  if (it == models_.end()) {
    throw InputError("ensemble member '" + name_ + "' does not serve level " + std::string(to_string(level)));
  }
  const ModelFile& model = it->second;
  std::vector<ModelPrediction> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) { out[i] = model.predict(batch[i]); });
  return out;
}

ModelPrediction decode_confidences(const json& object, Level level, const std::string& model_name, ModelKind kind,
                                   double tolerance) {
  if (!object.is_object()) throw ProtocolError(Kind::BadConfidence, model_name + ": confidence entry is not an object");
  auto classes = classes_of(level);
  if (object.size() != classes.size()) {
    throw ProtocolError(Kind::BadConfidence, model_name + ": confidence entry must name exactly the level " +
                                                 std::string(to_string(level)) + " classes");
  }
  ModelPrediction pred;
  pred.model_name = model_name;
  pred.kind = kind;
  pred.level = level;
  double sum = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto it = object.find(std::string(to_string(classes[c])));
    if (it == object.end() || !it->is_number()) {
      throw ProtocolError(Kind::BadConfidence,
                          model_name + ": missing or non-numeric confidence for " + std::string(to_string(classes[c])));
    }
    double v = it->get<double>();
    if (!(v >= -tolerance && v <= 1.0 + tolerance)) {
      throw ProtocolError(Kind::BadConfidence, model_name + ": confidence " + std::to_string(v) + " outside [0,1]");
    }
    pred.confidences[c] = std::clamp(v, 0.0, 1.0);
    sum += pred.confidences[c];
  }
  if (kind == ModelKind::Continuous) {
    if (std::abs(sum - 1.0) > tolerance) {
      throw ProtocolError(Kind::BadConfidence, model_name + ": continuous confidences sum to " + std::to_string(sum));
    }
    for (std::size_t c = 0; c < classes.size(); ++c) pred.confidences[c] /= sum;
  }
  pred.hard_label = argmax_label(level, std::span<const double>(pred.confidences.data(), classes.size()));
  return pred;
}

ExternalScorer::ExternalScorer(std::unique_ptr<LineChannel> channel, ExternalScorerOptions options)
    : channel_(std::move(channel)), options_(options) {
  std::string line = channel_->read_line(options_.timeout);
  json hello = json::parse(line, nullptr, false);
  if (hello.is_discarded()) throw ProtocolError(Kind::BadJson, "scorer handshake is not valid JSON");
  if (!hello.is_object() || !hello.contains("hello") || !hello["hello"].is_object()) {
    throw ProtocolError(Kind::Handshake, "scorer did not send a hello frame");
  }
  const json& body = hello["hello"];
  if (!body.contains("name") || !body["name"].is_string() || body["name"].get<std::string>().empty()) {
    throw ProtocolError(Kind::Handshake, "scorer hello has no name");
  }
  name_ = body["name"].get<std::string>();
  if (!body.contains("kind") || !body["kind"].is_string()) throw ProtocolError(Kind::Handshake, name_ + ": hello has no kind");
  try {
    kind_ = require_kind(body["kind"].get<std::string>());
  } catch (const InputError& e) {
    throw ProtocolError(Kind::Handshake, name_ + ": " + e.what());
  }
  if (!body.contains("levels") || !body["levels"].is_object() || body["levels"].empty()) {
    throw ProtocolError(Kind::Handshake, name_ + ": hello lists no levels");
  }
  for (const auto& [key, value] : body["levels"].items()) {
    auto level = parse_level(key);
    if (!level) throw ProtocolError(Kind::Handshake, name_ + ": unknown level '" + key + "'");
    auto classes = classes_of(*level);
    bool match = value.is_array() && value.size() == classes.size();
    for (std::size_t c = 0; match && c < classes.size(); ++c) {
      match = std::any_of(value.begin(), value.end(), [&](const json& v) {
        return v.is_string() && v.get<std::string>() == to_string(classes[c]);
      });
    }
    if (!match) throw ProtocolError(Kind::Handshake, name_ + ": class list for level " + key + " does not match the taxonomy");
    levels_[*level] = true;
  }
}

std::unique_ptr<ExternalScorer> ExternalScorer::open(const std::string& endpoint, ExternalScorerOptions options) {
  if (endpoint.rfind("stdio:", 0) == 0) {
    return std::make_unique<ExternalScorer>(spawn_process_channel(endpoint.substr(6)), options);
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    std::string rest = endpoint.substr(4);
    auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw InputError("tcp scorer endpoint must be tcp:<host>:<port>");
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      port = -1;
    }
    if (port <= 0 || port > 65535) throw InputError("bad port in scorer endpoint '" + endpoint + "'");
    return std::make_unique<ExternalScorer>(connect_tcp_channel(rest.substr(0, colon), static_cast<std::uint16_t>(port)),
                                            options);
  }
  throw InputError("scorer endpoint must start with stdio: or tcp: ('" + endpoint + "')");
}

std::vector<ModelPrediction> ExternalScorer::score(std::span<const Instance> batch, Level level, int /*threads*/) {
  if (!serves(level)) throw InputError("scorer '" + name_ + "' does not serve level " + std::string(to_string(level)));
  std::lock_guard lock(mutex_);
  std::vector<ModelPrediction> out;
  out.reserve(batch.size());
  const std::size_t step = std::max<std::size_t>(1, options_.max_batch);
  for (std::size_t start = 0; start < batch.size(); start += step) {
    auto chunk = score_chunk(batch.subspan(start, std::min(step, batch.size() - start)), level);
    std::move(chunk.begin(), chunk.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<ModelPrediction> ExternalScorer::score_chunk(std::span<const Instance> batch, Level level) {
  const std::int64_t req_id = next_req_id_++;
  json request;
  request["req_id"] = req_id;
  request["level"] = std::string(to_string(level));
  request["texts"] = json::array();
  for (const auto& inst : batch) request["texts"].push_back(inst.text);
  channel_->write_line(request.dump(-1, ' ', false, json::error_handler_t::replace));

  json reply = json::parse(channel_->read_line(options_.timeout), nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) throw ProtocolError(Kind::BadJson, name_ + ": reply is not a JSON object");
  if (!reply.contains("req_id") || !reply["req_id"].is_number_integer()) {
    throw ProtocolError(Kind::MissingField, name_ + ": reply has no integer req_id");
  }
  if (reply["req_id"].get<std::int64_t>() != req_id) {
    throw ProtocolError(Kind::ReqIdMismatch, name_ + ": reply req_id " + reply["req_id"].dump() + " does not match request " +
                                                 std::to_string(req_id));
  }
  if (reply.contains("error")) {
    throw ProtocolError(Kind::Remote, name_ + ": scorer reported an error: " + reply["error"].dump());
  }
  if (!reply.contains("confidences") || !reply["confidences"].is_array()) {
    throw ProtocolError(Kind::MissingField, name_ + ": reply has no confidences array");
  }
  const json& confs = reply["confidences"];
  if (confs.size() != batch.size()) {
    throw ProtocolError(Kind::LengthMismatch, name_ + ": expected " + std::to_string(batch.size()) + " confidences, got " +
                                                  std::to_string(confs.size()));
  }
  std::vector<ModelPrediction> out;
  out.reserve(batch.size());
  for (const auto& entry : confs) out.push_back(decode_confidences(entry, level, name_, kind_, options_.tolerance));
  return out;
}

}  // namespace semilabel
