#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crispy/core.hpp"
#include "crispy/sampler.hpp"
#include "crispy/sysmem.hpp"

namespace crispy {

// The profiled job as an opaque command. The template must contain exactly
// one {sample} placeholder for the sample path; runtime_tuning_args are
// substituted at an optional {tuning} placeholder (appended when absent) and
// are never parsed.
struct JobSpec {
    std::string command_template;
    std::map<std::string, std::string> environment;
    std::vector<std::string> runtime_tuning_args;
    std::filesystem::path working_dir;  // empty: inherit
    double timeout_seconds = 3600.0;

    void validate() const;
};

struct MonitorConfig {
    int poll_interval_ms = 500;
    int baseline_window_ms = 5000;
    // Before each baseline capture, wait up to this long for readings to
    // stabilize; freed memory of a just-finished run can take a moment to be
    // accounted. 0 disables the wait.
    int settle_timeout_ms = 10000;

    void validate() const;  // poll >= 50 ms, window >= poll
};

// Shell command with placeholders substituted; exposed for tests.
std::string render_command(const JobSpec& job, const std::string& sample_path);

// Mean memory-in-use over baseline_window_ms at poll_interval_ms spacing,
// taken before the job launches.
Bytes capture_baseline(const MonitorConfig& monitor, const MemoryReader& reader = system_memory_reader());

// Run the job on one sample while polling memory. The child runs in its own
// process group, which is killed as a whole on timeout or cancellation; a
// nonzero exit is recorded as a failed run, not thrown.
ProfilingRun run_profiled(const JobSpec& job, const std::filesystem::path& sample_path, Bytes sample_bytes,
                          const MonitorConfig& monitor, const MemoryReader& reader = system_memory_reader(),
                          std::optional<double> cancel_after_seconds = std::nullopt);

struct ProfileOptions {
    double accept_min_seconds = 30.0;
    double accept_max_seconds = 180.0;
    int max_adjust_iterations = 12;
    std::filesystem::path sample_dir = ".";
    SampleFormat format = SampleFormat::line_delimited;
    std::function<void(const std::string&)> log;  // optional progress sink
};

struct AdjustmentStep {
    double fraction = 0.0;
    double observed_runtime_seconds = 0.0;
    bool accepted = false;
};

struct ProfileResult {
    SamplePlan plan;                 // the accepted plan
    double accepted_fraction = 0.0;
    std::vector<std::filesystem::path> sample_paths;  // ordered by size
    std::vector<Bytes> actual_bytes;                  // ordered by size
    std::vector<ProfilingRun> runs;                   // ordered by sample_bytes
    std::vector<AdjustmentStep> adjustments;
    double total_seconds = 0.0;
};

// Full profiling procedure: materialize the largest sample, adjust the base
// fraction until its runtime is acceptable, then profile the four remaining
// sizes. Failed runs are retried once. Throws when adjustment does not
// converge within max_adjust_iterations or a run fails twice.
ProfileResult profile_job(const JobSpec& job, const std::filesystem::path& dataset_path,
                          Bytes full_dataset_bytes, double base_fraction, const MonitorConfig& monitor,
                          const ProfileOptions& options,
                          const MemoryReader& reader = system_memory_reader());

}  // namespace crispy
