#pragma once

#include <random>
#include <string>
#include <vector>

#include "pmi_oracle.hpp"
#include "semilabel/corpus.hpp"
#include "semilabel/labels.hpp"

namespace fixtures {

inline semilabel::LabeledInstance labeled(const std::string& id, const std::string& text, semilabel::Level level,
                                          semilabel::ClassLabel label) {
  using namespace semilabel;
  HierLabel h;
  switch (level) {
    case Level::A: h = {label, std::nullopt, std::nullopt}; break;
    case Level::B: h = {ClassLabel::OFF, label, std::nullopt}; break;
    case Level::C: h = {ClassLabel::OFF, ClassLabel::TIN, label}; break;
  }
  return {Instance::from_raw(id, text), h};
}

// Random corpus with at most `max_tokens` unigram tokens drawn from a small
// vocabulary, every class non-empty.
inline std::vector<oracle::Doc> random_docs(std::mt19937_64& rng, int classes, std::size_t max_tokens) {
  std::uniform_int_distribution<int> vocab(0, 11);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::vector<oracle::Doc> docs;
  std::size_t used = 0;
  for (int i = 0; used < max_tokens; ++i) {
    oracle::Doc d;
    d.cls = i < classes ? i : cls(rng);
    int n = std::min<int>(len(rng), static_cast<int>(max_tokens - used));
    for (int i = 0; i < n; ++i) d.tokens.push_back("w" + std::to_string(vocab(rng)));
    used += d.tokens.size();
    docs.push_back(std::move(d));
  }
  return docs;
}

inline std::vector<semilabel::LabeledInstance> to_labeled(const std::vector<oracle::Doc>& docs, semilabel::Level level) {
  std::vector<semilabel::LabeledInstance> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::string text;
    for (const auto& t : docs[i].tokens) text += t + " ";
    out.push_back(labeled("d" + std::to_string(i), text, level, semilabel::classes_of(level)[docs[i].cls]));
  }
  return out;
}

}  // namespace fixtures
