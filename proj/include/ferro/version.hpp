#pragma once

namespace ferro {

inline constexpr const char* kVersion = "1.0.0";

} // namespace ferro
