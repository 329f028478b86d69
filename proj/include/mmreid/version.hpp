#pragma once

namespace mmreid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mmreid
