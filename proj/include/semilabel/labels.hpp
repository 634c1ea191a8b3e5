#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace semilabel {

// Taxonomy levels: A offensive or not, B targeted or not, C target type.
enum class Level : std::uint8_t { A, B, C };

// Class order inside each level doubles as the argmax tie-break order.
enum class ClassLabel : std::uint8_t { OFF, NOT, TIN, UNT, IND, GRP, OTH };

inline constexpr std::size_t kMaxClasses = 3;

std::span<const ClassLabel> classes_of(Level level);
std::size_t num_classes(Level level);
Level level_of(ClassLabel label);
// Position of `label` within its level's class list.
std::size_t class_index(ClassLabel label);

// The class whose confidence is aggregated at Levels A and B (OFF, UNT).
ClassLabel positive_class(Level level);

std::string_view to_string(Level level);
std::string_view to_string(ClassLabel label);
std::optional<Level> parse_level(std::string_view text);
std::optional<ClassLabel> parse_class(std::string_view text);
// Throws InputError for anything but A/B/C.
Level require_level(std::string_view text);

struct HierLabel {
  ClassLabel a = ClassLabel::NOT;
  std::optional<ClassLabel> b;
  std::optional<ClassLabel> c;

  // NULL propagation: NOT has no B/C, UNT has no C, each slot holds a class
  // of its own level.
  bool valid() const;
  std::optional<ClassLabel> at(Level level) const;

  friend bool operator==(const HierLabel&, const HierLabel&) = default;
};

}  // namespace semilabel
