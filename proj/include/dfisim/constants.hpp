#pragma once

namespace dfisim {

inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kEarthRotationRate = 7.2921159e-5; // rad/s

} // namespace dfisim
