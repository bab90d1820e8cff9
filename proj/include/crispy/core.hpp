#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crispy/units.hpp"

namespace crispy {

enum class MachineFamily { c, m, r, other };
enum class Framework { spark, hadoop, other };
enum class Strategy { crispy, bfa_fallback };

MachineFamily parse_family(std::string_view s);
Framework parse_framework(std::string_view s);
std::string_view to_string(MachineFamily f);
std::string_view to_string(Framework f);
std::string_view to_string(Strategy s);

// A purchasable node type.
struct MachineType {
    std::string name;
    MachineFamily family = MachineFamily::other;
    int cores = 1;
    Bytes memory_bytes = 0;
    double price_per_hour = 0.0;

    void validate() const;  // throws std::invalid_argument
};

// A node type plus scale-out. Identity is (machine name, node count).
struct ClusterConfig {
    MachineType machine_type;
    int node_count = 1;

    void validate() const;
};

// Ordering key for a ClusterConfig.
struct ConfigKey {
    std::string machine_name;
    int node_count = 1;

    friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
};

ConfigKey key_of(const ClusterConfig& config);
std::string to_string(const ConfigKey& key);  // "m4.xlarge x12"

// One historical execution of a job.
struct ExecutionRecord {
    std::string job_name;
    Framework framework = Framework::other;
    std::string dataset_label;
    std::optional<Bytes> dataset_bytes;
    ClusterConfig config;
    double runtime_seconds = 0.0;
    std::optional<double> cost;  // derived from runtime and price when absent

    void validate() const;
};

// One reading of system-wide memory in use.
struct MemorySample {
    std::int64_t elapsed_ms = 0;
    Bytes used_bytes = 0;
};

// One sampled local run of the job.
struct ProfilingRun {
    Bytes sample_bytes = 0;
    Bytes baseline_bytes = 0;
    std::vector<MemorySample> samples;
    Bytes peak_job_bytes = 0;  // max over samples of max(used - baseline, 0)
    Bytes mean_job_bytes = 0;  // recorded for diagnostics, never modeled
    double duration_seconds = 0.0;
    int exit_status = 0;   // >= 0 exit code, < 0 negated terminating signal
    bool timed_out = false;
    bool canceled = false;  // stopped early for runtime-target adjustment

    bool succeeded() const { return exit_status == 0 && !timed_out && !canceled; }
};

// Peak-memory-vs-input-size line with the linearity verdict.
struct MemoryModel {
    double slope = 0.0;      // bytes of memory per byte of input
    double intercept = 0.0;  // bytes
    double r2 = 0.0;
    bool is_linear = false;  // r2 > 0.99
};

struct Recommendation {
    ClusterConfig config;
    Bytes job_memory_bytes = 0;      // extrapolated job memory, 0 on fallback
    Bytes total_required_bytes = 0;  // requirement evaluated for the chosen config
    Strategy strategy = Strategy::bfa_fallback;
    bool satisfied_memory_constraint = true;
    std::string rationale;
};

Bytes total_cluster_memory(const ClusterConfig& config);

// Cost of one execution at per-second billing granularity.
double execution_cost(double runtime_seconds, const ClusterConfig& config);

// Stored cost when present, otherwise derived via execution_cost.
double record_cost(const ExecutionRecord& rec);

}  // namespace crispy
