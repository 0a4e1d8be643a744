#pragma once

namespace pottsfit {

inline constexpr const char* kVersion = "0.1.0";

}
