#include "semilabel/labels.hpp"

#include <array>

#include "semilabel/errors.hpp"

namespace semilabel {

namespace {

constexpr std::array<ClassLabel, 2> kLevelA{ClassLabel::OFF, ClassLabel::NOT};
constexpr std::array<ClassLabel, 2> kLevelB{ClassLabel::TIN, ClassLabel::UNT};
constexpr std::array<ClassLabel, 3> kLevelC{ClassLabel::IND, ClassLabel::GRP, ClassLabel::OTH};

}  // namespace

std::span<const ClassLabel> classes_of(Level level) {
  switch (level) {
    case Level::A: return kLevelA;
    case Level::B: return kLevelB;
    case Level::C: return kLevelC;
  }
  return {};
}

std::size_t num_classes(Level level) { return classes_of(level).size(); }

Level level_of(ClassLabel label) {
  switch (label) {
    case ClassLabel::OFF:
    case ClassLabel::NOT: return Level::A;
    case ClassLabel::TIN:
    case ClassLabel::UNT: return Level::B;
    default: return Level::C;
  }
}

std::size_t class_index(ClassLabel label) {
  switch (label) {
    case ClassLabel::OFF: return 0;
    case ClassLabel::NOT: return 1;
    case ClassLabel::TIN: return 0;
    case ClassLabel::UNT: return 1;
    case ClassLabel::IND: return 0;
    case ClassLabel::GRP: return 1;
    case ClassLabel::OTH: return 2;
  }
  return 0;
}

ClassLabel positive_class(Level level) {
  switch (level) {
    case Level::A: return ClassLabel::OFF;
    case Level::B: return ClassLabel::UNT;
    case Level::C: return ClassLabel::IND;
  }
  return ClassLabel::OFF;
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::A: return "A";
    case Level::B: return "B";
    case Level::C: return "C";
  }
  return "?";
}

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::OFF: return "OFF";
    case ClassLabel::NOT: return "NOT";
    case ClassLabel::TIN: return "TIN";
    case ClassLabel::UNT: return "UNT";
    case ClassLabel::IND: return "IND";
    case ClassLabel::GRP: return "GRP";
    case ClassLabel::OTH: return "OTH";
  }
  return "?";
}

std::optional<Level> parse_level(std::string_view text) {
  if (text == "A") return Level::A;
  if (text == "B") return Level::B;
  if (text == "C") return Level::C;
  return std::nullopt;
}

std::optional<ClassLabel> parse_class(std::string_view text) {
  for (Level level : {Level::A, Level::B, Level::C}) {
    for (ClassLabel label : classes_of(level)) {
      if (to_string(label) == text) return label;
    }
  }
  return std::nullopt;
}

Level require_level(std::string_view text) {
  auto level = parse_level(text);
  if (!level) throw InputError("unknown level '" + std::string(text) + "' (expected A, B or C)");
  return *level;
}

bool HierLabel::valid() const {
  if (level_of(a) != Level::A) return false;
  if (b && level_of(*b) != Level::B) return false;
  if (c && level_of(*c) != Level::C) return false;
  if (a == ClassLabel::NOT && (b || c)) return false;
  if (c && b != ClassLabel::TIN) return false;
  return true;
}

std::optional<ClassLabel> HierLabel::at(Level level) const {
  switch (level) {
    case Level::A: return a;
    case Level::B: return b;
    case Level::C: return c;
  }
  return std::nullopt;
}

}  // namespace semilabel
