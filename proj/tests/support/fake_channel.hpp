#pragma once

#include <deque>
#include <functional>
#include <string>

#include "semilabel/errors.hpp"
#include "semilabel/scorer.hpp"

namespace fixtures {

// In-memory channel: `respond` turns each written line into reply lines.
class FakeChannel final : public semilabel::LineChannel {
 public:
  using Responder = std::function<std::vector<std::string>(const std::string&)>;

  FakeChannel(std::string hello, Responder respond) : respond_(std::move(respond)) { pending_.push_back(std::move(hello)); }

  void write_line(std::string_view line) override {
    written.emplace_back(line);
    for (auto& reply : respond_(std::string(line))) pending_.push_back(std::move(reply));
  }

  std::string read_line(std::chrono::milliseconds) override {
    if (pending_.empty()) throw semilabel::ProtocolError(semilabel::ProtocolError::Kind::Closed, "fake channel is empty");
    std::string line = std::move(pending_.front());
    pending_.pop_front();
    return line;
  }

  std::vector<std::string> written;

 private:
  Responder respond_;
  std::deque<std::string> pending_;
};

}  // namespace fixtures
