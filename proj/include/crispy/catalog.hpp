#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "crispy/core.hpp"

namespace crispy {

// Machine catalog file: CSV with header
//   name,family,cores,memory_bytes,price_per_hour[,flags]
// flags is a ';'-separated token list; the token "medium" marks the machine
// type used by the Medium baseline. '#' lines and blank lines are ignored.
class MachineCatalog {
public:
    static MachineCatalog load(const std::filesystem::path& path);
    static MachineCatalog parse(std::istream& in, const std::string& origin);

    void add(MachineType machine, bool medium = false);

    const MachineType* find(std::string_view name) const;
    const MachineType& at(std::string_view name) const;  // throws naming the unknown type
    const std::vector<MachineType>& machines() const { return machines_; }
    std::optional<std::string> medium_machine() const { return medium_; }
    bool empty() const { return machines_.empty(); }

private:
    std::vector<MachineType> machines_;
    std::optional<std::string> medium_;
};

}  // namespace crispy
