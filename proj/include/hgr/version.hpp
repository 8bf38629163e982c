#pragma once

namespace hgr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hgr
