#pragma once

namespace alb {
inline constexpr const char* kVersion = "0.1.0";
}
