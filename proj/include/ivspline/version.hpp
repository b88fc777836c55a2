#pragma once

namespace ivspline {
inline constexpr const char* kVersion = "0.1.0";
}
