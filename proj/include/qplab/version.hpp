#pragma once

namespace qplab {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace qplab
