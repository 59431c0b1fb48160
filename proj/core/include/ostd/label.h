#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ostd {

// Class 0 is hallucinated; tie-breaks that need a default class pick it.
enum class Label : std::uint8_t { kHallucinated = 0, kFaithful = 1 };

inline int as_int(Label l) { return static_cast<int>(l); }
inline Label label_from_int(int v) { return v ? Label::kFaithful : Label::kHallucinated; }

const char* to_string(Label l);
Label parse_label(std::string_view s);

// True when both classes occur.
bool has_both_classes(std::span<const Label> labels);

}  // namespace ostd
