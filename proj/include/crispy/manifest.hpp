#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crispy/core.hpp"
#include "crispy/evaluator.hpp"
#include "crispy/profiler.hpp"

namespace crispy {

// Staged pipeline state. profile writes the plan, samples and run summaries;
// model and recommend append their sections. Later stages reference earlier
// outputs by path; full memory traces live in per-run trace files.
struct RunManifest {
    std::string job_name;
    std::string job_command;
    std::string dataset_path;
    Bytes full_dataset_bytes = 0;
    double initial_base_fraction = 0.0;
    double accepted_base_fraction = 0.0;
    std::vector<Bytes> plan_sizes;

    struct SampleEntry {
        std::string path;
        Bytes target_bytes = 0;
        Bytes actual_bytes = 0;
    };
    std::vector<SampleEntry> samples;

    struct RunSummary {
        Bytes sample_bytes = 0;
        Bytes baseline_bytes = 0;
        Bytes peak_job_bytes = 0;
        Bytes mean_job_bytes = 0;
        double duration_seconds = 0.0;
        int exit_status = 0;
        bool timed_out = false;
        bool canceled = false;
        std::size_t sample_count = 0;
        std::string trace_path;
    };
    std::vector<RunSummary> runs;

    std::vector<AdjustmentStep> adjustments;
    double profiling_total_seconds = 0.0;

    std::optional<MemoryModel> model;
    std::optional<Recommendation> recommendation;
};

RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);

// Per-run trace file: run metadata plus one record per memory sample.
void write_trace(const std::filesystem::path& path, const ProfilingRun& run,
                 const std::string& sample_path, int poll_interval_ms, std::int64_t started_unix_ms);

// Memory-model files for evaluation without re-profiling: JSON objects with
// job, framework, optional dataset_label, slope, intercept, r2 and
// full_dataset_bytes. Returns a lookup over every *.json file in the
// directory; an entry without dataset_label matches any label of its job.
ModelLookup load_models_dir(const std::filesystem::path& dir);

}  // namespace crispy
