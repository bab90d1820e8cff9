#include "crispy/core.hpp"

#include <stdexcept>

namespace crispy {

MachineFamily parse_family(std::string_view s) {
    if (s == "c") return MachineFamily::c;
    if (s == "m") return MachineFamily::m;
    if (s == "r") return MachineFamily::r;
    if (s == "other") return MachineFamily::other;
    throw std::invalid_argument("unknown machine family '" + std::string(s) + "' (expected c, m, r or other)");
}

Framework parse_framework(std::string_view s) {
    if (s == "spark") return Framework::spark;
    if (s == "hadoop") return Framework::hadoop;
    if (s == "other") return Framework::other;
    throw std::invalid_argument("unknown framework '" + std::string(s) + "' (expected spark, hadoop or other)");
}

std::string_view to_string(MachineFamily f) {
    switch (f) {
        case MachineFamily::c: return "c";
        case MachineFamily::m: return "m";
        case MachineFamily::r: return "r";
        case MachineFamily::other: return "other";
    }
    return "other";
}

std::string_view to_string(Framework f) {
    switch (f) {
        case Framework::spark: return "spark";
        case Framework::hadoop: return "hadoop";
        case Framework::other: return "other";
    }
    return "other";
}

std::string_view to_string(Strategy s) {
    return s == Strategy::crispy ? "crispy" : "bfa_fallback";
}

void MachineType::validate() const {
    if (name.empty()) throw std::invalid_argument("machine type name must not be empty");
    if (cores < 1) throw std::invalid_argument("machine type '" + name + "': cores must be >= 1");
    if (memory_bytes == 0) throw std::invalid_argument("machine type '" + name + "': memory_bytes must be > 0");
    if (price_per_hour < 0.0) throw std::invalid_argument("machine type '" + name + "': price_per_hour must be >= 0");
}

void ClusterConfig::validate() const {
    machine_type.validate();
    if (node_count < 1) throw std::invalid_argument("cluster config: node_count must be >= 1");
}

ConfigKey key_of(const ClusterConfig& config) {
    return ConfigKey{config.machine_type.name, config.node_count};
}

std::string to_string(const ConfigKey& key) {
    return key.machine_name + " x" + std::to_string(key.node_count);
}

void ExecutionRecord::validate() const {
    if (job_name.empty()) throw std::invalid_argument("execution record: job name must not be empty");
    config.validate();
    if (!(runtime_seconds > 0.0)) throw std::invalid_argument("execution record: runtime_seconds must be > 0");
}

Bytes total_cluster_memory(const ClusterConfig& config) {
    return static_cast<Bytes>(config.node_count) * config.machine_type.memory_bytes;
}

double execution_cost(double runtime_seconds, const ClusterConfig& config) {
    if (!(runtime_seconds > 0.0)) throw std::invalid_argument("execution_cost: runtime_seconds must be > 0");
    return runtime_seconds * static_cast<double>(config.node_count) * config.machine_type.price_per_hour / 3600.0;
}

double record_cost(const ExecutionRecord& rec) {
    if (rec.cost) return *rec.cost;
    return execution_cost(rec.runtime_seconds, rec.config);
}

}  // namespace crispy
