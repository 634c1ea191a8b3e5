#include "semilabel/lexicon.hpp"

#include <algorithm>

namespace semilabel {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; });
  return out;
}

}  // namespace

const std::vector<std::string>& LexiconModel::curse_words() {
  static const std::vector<std::string> kWords{
      "ass",   "arse",  "wtf",    "lmao", "fuck",    "bitch", "nigga",  "nigger", "cunt",   "effing", "shit",
      "hell",  "damn",  "crap",   "bastard", "idiot", "stupid", "racist", "dumb",  "f*ck",   "pussy",  "dick",
  };
  return kWords;
}

LexiconModel::LexiconModel() : LexiconModel(curse_words()) {}

LexiconModel::LexiconModel(std::span<const std::string> words) {
  for (const auto& w : words) {
    std::string key = lower(w);
    if (lookup_.insert(key).second) words_.push_back(std::move(key));
  }
}

bool LexiconModel::contains(std::string_view token) const { return lookup_.count(lower(token)) != 0; }

ModelPrediction LexiconModel::predict(const Instance& instance) const {
  bool hit = std::any_of(instance.tokens.begin(), instance.tokens.end(),
                         [this](const std::string& t) { return contains(t); });
  ModelPrediction pred;
  pred.model_name = "lexicon";
  pred.kind = ModelKind::Discrete;
  pred.level = Level::A;
  pred.hard_label = hit ? ClassLabel::OFF : ClassLabel::NOT;
  pred.confidences = {hit ? 1.0 : 0.0, hit ? 0.0 : 1.0, 0.0};
  return pred;
}

}  // namespace semilabel
