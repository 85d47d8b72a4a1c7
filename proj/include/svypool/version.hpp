#pragma once

namespace svypool {

inline constexpr const char* version = "0.1.0";

} // namespace svypool
