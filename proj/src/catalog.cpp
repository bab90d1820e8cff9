#include "crispy/catalog.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace crispy {

namespace {

const char* kHeader = "name,family,cores,memory_bytes,price_per_hour";

}  // namespace

MachineCatalog MachineCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog file: " + path.string());
    return parse(in, path.string());
}

MachineCatalog MachineCatalog::parse(std::istream& in, const std::string& origin) {
    MachineCatalog catalog;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto stripped = detail::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        auto fields = detail::split_fields(stripped);
        if (!header_seen) {
            if (fields.size() < 5 || fields[0] != "name") {
                throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                         ": expected catalog header '" + kHeader + "[,flags]'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() < 5 || fields.size() > 6) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": expected 5 or 6 fields, got " + std::to_string(fields.size()));
        }
        try {
            MachineType machine;
            machine.name = std::string(fields[0]);
            machine.family = parse_family(fields[1]);
            machine.cores = detail::parse_number<int>(fields[2], "cores");
            machine.memory_bytes = detail::parse_number<Bytes>(fields[3], "memory_bytes");
            machine.price_per_hour = detail::parse_double(fields[4], "price_per_hour");
            bool medium = false;
            if (fields.size() == 6) {
                for (auto flag : detail::split_fields(fields[5], ';')) {
                    if (flag == "medium") {
                        medium = true;
                    } else if (!flag.empty()) {
                        throw std::invalid_argument("unknown flag '" + std::string(flag) + "'");
                    }
                }
            }
            catalog.add(std::move(machine), medium);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) throw std::runtime_error(origin + ": empty catalog (missing header)");
    return catalog;
}

void MachineCatalog::add(MachineType machine, bool medium) {
    machine.validate();
    if (find(machine.name) != nullptr) {
        throw std::invalid_argument("duplicate machine type '" + machine.name + "' in catalog");
    }
    if (medium) {
        if (medium_) throw std::invalid_argument("catalog flags more than one machine type as medium");
        medium_ = machine.name;
    }
    machines_.push_back(std::move(machine));
}

const MachineType* MachineCatalog::find(std::string_view name) const {
    for (const auto& m : machines_) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

const MachineType& MachineCatalog::at(std::string_view name) const {
    const MachineType* m = find(name);
    if (!m) throw std::runtime_error("machine type '" + std::string(name) + "' not found in catalog");
    return *m;
}

}  // namespace crispy
