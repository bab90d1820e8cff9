#pragma once

#include <cstdint>
#include <string>

namespace crispy {

using Bytes = std::uint64_t;

inline constexpr Bytes KiB = 1024;
inline constexpr Bytes MiB = 1024 * KiB;
inline constexpr Bytes GiB = 1024 * MiB;

// Human-readable size for log lines and reports. Files always carry exact
// byte counts.
std::string format_bytes(Bytes n);

// Exact round-trip form for doubles in text files.
std::string format_double(double v);

// Fixed-precision form for report tables.
std::string format_fixed(double v, int decimals);

}  // namespace crispy
