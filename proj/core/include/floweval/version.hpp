#pragma once

namespace floweval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace floweval
