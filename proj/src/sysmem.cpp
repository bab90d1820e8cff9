#include "crispy/sysmem.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace crispy {

Bytes used_memory_from_meminfo(std::istream& in, const std::string& origin) {
    std::optional<Bytes> total;
    std::optional<Bytes> available;
    std::string key;
    Bytes value = 0;
    std::string unit;
    while (in >> key >> value) {
        std::getline(in, unit);  // consume " kB"
        if (key == "MemTotal:") total = value * KiB;
        else if (key == "MemAvailable:") available = value * KiB;
        if (total && available) break;
    }
    if (!total || !available) {
        throw std::runtime_error(origin + ": MemTotal/MemAvailable counters not found");
    }
    if (*available > *total) {
        throw std::runtime_error(origin + ": corrupt counters, available exceeds total");
    }
    return *total - *available;
}

Bytes read_system_memory() {
    std::ifstream in("/proc/meminfo");
    if (!in) throw std::runtime_error("cannot read /proc/meminfo");
    return used_memory_from_meminfo(in, "/proc/meminfo");
}

MemoryReader system_memory_reader() {
    return [] { return read_system_memory(); };
}

}  // namespace crispy
