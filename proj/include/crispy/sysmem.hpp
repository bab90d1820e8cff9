#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "crispy/units.hpp"

namespace crispy {

// Source of system-wide memory-in-use readings. Tests inject synthetic
// readers; production code uses the OS counters.
using MemoryReader = std::function<Bytes()>;

// total - available from the OS memory counters, in bytes. Throws when the
// counters are unreadable or inconsistent; profiling must not continue on
// silent zeros.
Bytes read_system_memory();

// Parsing core, exposed for tests feeding synthetic counter text.
Bytes used_memory_from_meminfo(std::istream& in, const std::string& origin);

MemoryReader system_memory_reader();

}  // namespace crispy
