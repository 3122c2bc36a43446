#pragma once

namespace wmark {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace wmark
