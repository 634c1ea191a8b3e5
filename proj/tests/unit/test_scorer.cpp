#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include <nlohmann/json.hpp>

#include "fake_channel.hpp"
#include "fixtures.hpp"
#include "semilabel/errors.hpp"
#include "semilabel/scorer.hpp"

using namespace semilabel;
using fixtures::FakeChannel;
using nlohmann::json;
using PKind = ProtocolError::Kind;

namespace {

const std::string kHelloA =
    R"({"hello":{"name":"ext","kind":"continuous","levels":{"A":["OFF","NOT"]}}})";

std::vector<Instance> batch(std::size_t n) {
  std::vector<Instance> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Instance::from_raw(std::to_string(i), "text number " + std::to_string(i)));
  return out;
}

// Replies with `conf` for every text, optionally corrupting the frame.
FakeChannel::Responder fixed(json conf, std::function<void(json&)> corrupt = {}) {
  return [conf, corrupt](const std::string& line) {
    auto req = json::parse(line);
    json reply{{"req_id", req["req_id"]}, {"confidences", json::array()}};
    for (std::size_t i = 0; i < req["texts"].size(); ++i) reply["confidences"].push_back(conf);
    if (corrupt) corrupt(reply);
    return std::vector<std::string>{reply.dump()};
  };
}

PKind failure_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ProtocolError& e) {
    return e.kind();
  }
  FAIL("expected a ProtocolError");
  return PKind::Transport;
}

std::string fixture(const std::string& name) { return std::string(SEMILABEL_FIXTURES) + "/" + name; }

std::string echo_cmd(const std::string& args = "") {
  return std::string(SEMILABEL_PYTHON) + " " + fixture("echo_scorer.py") + " " + args;
}

}  // namespace

TEST_CASE("handshake and echo scoring over a fake channel") {
  auto chan = std::make_unique<FakeChannel>(kHelloA, fixed({{"OFF", 0.5}, {"NOT", 0.5}}));
  auto* raw = chan.get();
  ExternalScorer scorer(std::move(chan));
  CHECK(scorer.name() == "ext");
  CHECK(scorer.kind() == ModelKind::Continuous);
  CHECK(scorer.serves(Level::A));
  CHECK_FALSE(scorer.serves(Level::B));
  auto preds = scorer.score(batch(3), Level::A, 4);
  REQUIRE(preds.size() == 3);
  for (const auto& p : preds) {
    CHECK(p.confidence(ClassLabel::OFF) == 0.5);
    CHECK(p.model_name == "ext");
  }
  auto req = json::parse(raw->written.at(0));
  CHECK(req["level"] == "A");
  CHECK(req["texts"].size() == 3);
  CHECK(req["req_id"] == 1);
  CHECK_THROWS_AS(scorer.score(batch(1), Level::B, 1), InputError);
}

TEST_CASE("large batches are split and request ids increase") {
  auto chan = std::make_unique<FakeChannel>(kHelloA, fixed({{"OFF", 0.25}, {"NOT", 0.75}}));
  auto* raw = chan.get();
  ExternalScorerOptions opts;
  opts.max_batch = 4;
  ExternalScorer scorer(std::move(chan), opts);
  auto preds = scorer.score(batch(10), Level::A, 1);
  CHECK(preds.size() == 10);
  REQUIRE(raw->written.size() == 3);
  CHECK(json::parse(raw->written[2])["req_id"] == 3);
  CHECK(json::parse(raw->written[2])["texts"].size() == 2);
  CHECK(preds[9].hard_label == ClassLabel::NOT);
  CHECK(scorer.score({}, Level::A, 1).empty());
}

TEST_CASE("handshake errors") {
  auto open_with = [](const std::string& hello) {
    return failure_kind([&] { ExternalScorer s(std::make_unique<FakeChannel>(hello, fixed({}))); });
  };
  CHECK(open_with("{nope") == PKind::BadJson);
  CHECK(open_with(R"({"hi":1})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"kind":"continuous","levels":{"A":["OFF","NOT"]}}})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"name":"x","kind":"fuzzy","levels":{"A":["OFF","NOT"]}}})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"name":"x","kind":"discrete","levels":{}}})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"name":"x","kind":"discrete","levels":{"A":["OFF"]}}})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"name":"x","kind":"discrete","levels":{"D":["OFF","NOT"]}}})") == PKind::Handshake);
  CHECK(open_with(R"({"hello":{"name":"x","kind":"discrete","levels":{"B":["OFF","NOT"]}}})") == PKind::Handshake);
  // Class order inside the list is free.
  CHECK_NOTHROW(ExternalScorer(std::make_unique<FakeChannel>(
      R"({"hello":{"name":"x","kind":"discrete","levels":{"C":["OTH","IND","GRP"]}}})", fixed({}))));
}

TEST_CASE("reply errors map to typed protocol errors") {
  json half{{"OFF", 0.5}, {"NOT", 0.5}};
  auto run = [&](FakeChannel::Responder r) {
    return failure_kind([&] {
      ExternalScorer s(std::make_unique<FakeChannel>(kHelloA, std::move(r)));
      s.score(batch(3), Level::A, 1);
    });
  };
  CHECK(run(fixed(half, [](json& j) { j["req_id"] = 42; })) == PKind::ReqIdMismatch);
  CHECK(run(fixed(half, [](json& j) { j.erase("req_id"); })) == PKind::MissingField);
  CHECK(run(fixed(half, [](json& j) { j["confidences"].erase(0); })) == PKind::LengthMismatch);
  CHECK(run(fixed(half, [](json& j) { j.erase("confidences"); })) == PKind::MissingField);
  CHECK(run(fixed(half, [](json& j) { j["error"] = "boom"; })) == PKind::Remote);
  CHECK(run(fixed({{"OFF", 1.2}, {"NOT", -0.2}})) == PKind::BadConfidence);
  CHECK(run(fixed({{"OFF", 0.7}, {"NOT", 0.7}})) == PKind::BadConfidence);
  CHECK(run(fixed({{"OFF", 0.5}})) == PKind::BadConfidence);
  CHECK(run(fixed({{"OFF", "high"}, {"NOT", 0.5}})) == PKind::BadConfidence);
  CHECK(run(fixed({{"OFF", 0.5}, {"UNT", 0.5}})) == PKind::BadConfidence);
  CHECK(run([](const std::string&) { return std::vector<std::string>{"garbage"}; }) == PKind::BadJson);
  CHECK(run([](const std::string&) { return std::vector<std::string>{}; }) == PKind::Closed);
}

TEST_CASE("decode_confidences tolerance and renormalization") {
  json slightly_off{{"OFF", 0.6000004}, {"NOT", 0.4}};
  auto p = decode_confidences(slightly_off, Level::A, "m", ModelKind::Continuous, 1e-6);
  CHECK(p.confidences[0] + p.confidences[1] == doctest::Approx(1.0).epsilon(1e-15));
  json over{{"OFF", 1.0000005}, {"NOT", 0.0}};
  CHECK(decode_confidences(over, Level::A, "m", ModelKind::Discrete, 1e-6).confidences[0] == 1.0);
  json discrete{{"OFF", 1.0}, {"NOT", 1.0}};
  auto d = decode_confidences(discrete, Level::A, "m", ModelKind::Discrete, 1e-6);
  CHECK(d.hard_label == ClassLabel::OFF);
  json c{{"IND", 0.1}, {"GRP", 0.2}, {"OTH", 0.7}};
  CHECK(decode_confidences(c, Level::C, "m", ModelKind::Continuous, 1e-6).hard_label == ClassLabel::OTH);
}

TEST_CASE("an adapter wrapping native PMI reproduces pmi predictions") {
  std::mt19937_64 rng(9);
  auto data = fixtures::to_labeled(fixtures::random_docs(rng, 2, 200), Level::A);
  PmiConfig cfg;
  cfg.min_count = 2;
  auto model = PmiModel::train(data, Level::A, cfg);
  auto adapter = [&](const std::string& line) {
    auto req = json::parse(line);
    json reply{{"req_id", req["req_id"]}, {"confidences", json::array()}};
    for (const auto& t : req["texts"]) {
      auto p = model.predict(Instance::from_raw("x", t.get<std::string>()));
      reply["confidences"].push_back({{"OFF", p.confidences[0]}, {"NOT", p.confidences[1]}});
    }
    return std::vector<std::string>{reply.dump()};
  };
  ExternalScorer scorer(std::make_unique<FakeChannel>(
      R"({"hello":{"name":"pmi-remote","kind":"discrete","levels":{"A":["OFF","NOT"]}}})", adapter));
  std::vector<Instance> texts;
  for (const auto& d : data) texts.push_back(d.instance);
  auto remote = scorer.score(texts, Level::A, 1);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto local = model.predict(texts[i]);
    CHECK(remote[i].confidences == local.confidences);
    if (local.confidences[0] != local.confidences[1]) CHECK(remote[i].hard_label == local.hard_label);
  }
}

TEST_CASE("native scorer") {
  NativeScorer ns("lex", ModelKind::Discrete);
  ns.add(ModelFile{"whatever", ModelKind::Continuous, LexiconModel{}});
  CHECK(ns.serves(Level::A));
  CHECK_THROWS_AS(ns.add(ModelFile{"again", ModelKind::Discrete, LexiconModel{}}), InputError);
  auto preds = ns.score(batch(5), Level::A, 3);
  CHECK(preds.size() == 5);
  CHECK(preds[0].model_name == "lex");
  CHECK(preds[0].kind == ModelKind::Discrete);
  CHECK_THROWS_AS(ns.score(batch(1), Level::B, 1), InputError);
}

TEST_CASE("stdio echo scorer subprocess") {
  auto scorer = ExternalScorer::open("stdio:" + echo_cmd());
  CHECK(scorer->name() == "echo");
  auto preds = scorer->score(batch(300), Level::A, 1);
  REQUIRE(preds.size() == 300);
  for (const auto& p : preds) CHECK(p.confidence(ClassLabel::OFF) == 0.5);
}

TEST_CASE("stdio scorer failures") {
  auto kind_for = [](const std::string& mode, int timeout_ms = 5000) {
    return failure_kind([&] {
      ExternalScorerOptions opts;
      opts.timeout = std::chrono::milliseconds(timeout_ms);
      auto s = ExternalScorer::open("stdio:" + echo_cmd("--mode " + mode), opts);
      s->score(batch(2), Level::A, 1);
    });
  };
  CHECK(kind_for("shuffle") == PKind::ReqIdMismatch);
  CHECK(kind_for("short") == PKind::LengthMismatch);
  CHECK(kind_for("range") == PKind::BadConfidence);
  CHECK(kind_for("error") == PKind::Remote);
  CHECK(kind_for("crash") == PKind::Closed);
  CHECK(kind_for("garbage") == PKind::BadJson);
  CHECK(kind_for("nohello") == PKind::Handshake);
  CHECK(kind_for("silent", 300) == PKind::Timeout);
  CHECK(failure_kind([] { ExternalScorer::open("stdio:exit 0"); }) == PKind::Closed);
  CHECK_THROWS_AS(ExternalScorer::open("http://x"), InputError);
  CHECK_THROWS_AS(ExternalScorer::open("tcp:localhost"), InputError);
  CHECK_THROWS_AS(ExternalScorer::open("tcp:localhost:99999"), InputError);
}

TEST_CASE("tcp scorer") {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(listener >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  REQUIRE(::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  REQUIRE(::listen(listener, 1) == 0);
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);

  std::thread server([listener] {
    int fd = ::accept(listener, nullptr, nullptr);
    std::string hello = R"({"hello":{"name":"tcp","kind":"discrete","levels":{"B":["TIN","UNT"]}}})" "\n";
    (void)!::write(fd, hello.data(), hello.size());
    std::string buf;
    char c;
    while (::read(fd, &c, 1) == 1) {
      if (c != '\n') {
        buf += c;
        continue;
      }
      auto req = json::parse(buf);
      buf.clear();
      json reply{{"req_id", req["req_id"]}, {"confidences", json::array()}};
      for (std::size_t i = 0; i < req["texts"].size(); ++i) reply["confidences"].push_back({{"TIN", 0.0}, {"UNT", 1.0}});
      std::string out = reply.dump() + "\n";
      (void)!::write(fd, out.data(), out.size());
    }
    ::close(fd);
  });

  {
    auto scorer = ExternalScorer::open("tcp:127.0.0.1:" + std::to_string(port));
    CHECK(scorer->kind() == ModelKind::Discrete);
    auto preds = scorer->score(batch(4), Level::B, 1);
    REQUIRE(preds.size() == 4);
    CHECK(preds[3].hard_label == ClassLabel::UNT);
  }
  server.join();
  ::close(listener);
  CHECK(failure_kind([port] { ExternalScorer::open("tcp:127.0.0.1:" + std::to_string(port)); }) == PKind::Transport);
}
