#pragma once

namespace mesynth {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace mesynth
