#pragma once

namespace backflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace backflow
