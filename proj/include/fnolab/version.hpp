#pragma once

namespace fnolab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fnolab
