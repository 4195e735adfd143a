#pragma once

namespace anchorcrc {

inline constexpr const char* version = "0.1.0";

} // namespace anchorcrc
