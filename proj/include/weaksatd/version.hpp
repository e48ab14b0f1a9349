#pragma once

namespace weaksatd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace weaksatd
