#pragma once

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "semilabel/corpus.hpp"
#include "semilabel/prediction.hpp"

namespace semilabel {

// Level-A curse-word baseline: OFF iff any token is in the word list.
class LexiconModel {
 public:
  LexiconModel();  // the 22-word curse list
  explicit LexiconModel(std::span<const std::string> words);

  static const std::vector<std::string>& curse_words();

  ModelPrediction predict(const Instance& instance) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_set<std::string> lookup_;
};

}  // namespace semilabel
