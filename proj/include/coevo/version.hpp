#pragma once

namespace coevo {

inline constexpr const char* kEngineVersion = "0.1.0";

} // namespace coevo
