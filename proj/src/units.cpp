#include "crispy/units.hpp"

#include <cinttypes>
#include <cstdio>

namespace crispy {

std::string format_bytes(Bytes n) {
    char buf[64];
    if (n >= GiB) {
        std::snprintf(buf, sizeof buf, "%.2f GiB", static_cast<double>(n) / static_cast<double>(GiB));
    } else if (n >= MiB) {
        std::snprintf(buf, sizeof buf, "%.2f MiB", static_cast<double>(n) / static_cast<double>(MiB));
    } else if (n >= KiB) {
        std::snprintf(buf, sizeof buf, "%.2f KiB", static_cast<double>(n) / static_cast<double>(KiB));
    } else {
        std::snprintf(buf, sizeof buf, "%" PRIu64 " B", n);
    }
    return buf;
}

std::string format_double(double v) {
    // %.17g round-trips any double exactly.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace crispy
