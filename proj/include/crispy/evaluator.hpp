#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crispy/catalog.hpp"
#include "crispy/core.hpp"
#include "crispy/memmodel.hpp"
#include "crispy/selector.hpp"

namespace crispy {

// Normalized cost of each strategy for one (framework, job, dataset) group.
// A cell is missing when the history cannot support it (e.g. the Medium
// config never ran this job).
struct EvaluationRow {
    std::string job_name;
    Framework framework = Framework::other;
    std::string dataset_label;
    std::optional<double> random_cost;
    std::optional<double> medium_cost;
    std::optional<double> bfa_cost;
    std::optional<double> crispy_cost;
};

struct ColumnMeans {
    std::optional<double> random;
    std::optional<double> medium;
    std::optional<double> bfa;
    std::optional<double> crispy;
};

// Per-config cost of one (framework, job, dataset_label) group, divided by
// the group minimum; repeated runs of a config are averaged first.
std::map<ConfigKey, double> normalize_costs(std::span<const ExecutionRecord> group);

// Mean of the group's normalized costs (expected cost of a random pick).
double baseline_random(const std::map<ConfigKey, double>& normalized);

// Normalized cost of the fixed medium config, or missing when the group
// lacks it.
std::optional<double> baseline_medium(const std::map<ConfigKey, double>& normalized,
                                      const ConfigKey& medium_config);

// Normalized cost, within the group, of the leave-one-out BFA ranking head,
// walking the ranking past configs absent from the group.
double baseline_bfa(std::span<const ExecutionRecord> history, Framework framework,
                    std::string_view job_name, std::string_view dataset_label);

// Normalized cost of the configuration the constrained selection picks,
// walking the ranking past configs absent from the group.
double evaluate_crispy(std::span<const ExecutionRecord> history, Framework framework,
                       std::string_view job_name, std::string_view dataset_label,
                       const std::optional<MemoryModel>& model, Bytes full_dataset_bytes,
                       const RequirementParams& params);

// Fitted model plus the dataset size it extrapolates to.
struct JobModel {
    MemoryModel model;
    Bytes full_dataset_bytes = 0;
};

using ModelLookup =
    std::function<std::optional<JobModel>(Framework, const std::string& job, const std::string& label)>;

// One row per (framework, job, dataset_label) group, sorted by framework,
// then job, then label.
std::vector<EvaluationRow> evaluate_all(std::span<const ExecutionRecord> history,
                                        const std::optional<ConfigKey>& medium_config,
                                        const ModelLookup& models, const RequirementParams& params);

// Column means with missing cells excluded.
ColumnMeans column_means(std::span<const EvaluationRow> rows);

// Human-readable comparison table (plus optional profiling-time table);
// byte-identical across runs over the same inputs.
std::string render_report(std::span<const EvaluationRow> rows,
                          const std::vector<std::pair<std::string, double>>* profiling_times = nullptr);

// Converter for an execution-history tree laid out as
//   <run dir "machine_count">/<workload dir "framework-job-label">/report.json
// where report.json carries elapsed_time seconds and an optional completed
// flag. Unconvertible entries are skipped with a warning; costs are derived
// from the catalog prices. All other report fields are dropped.
struct ScoutConversion {
    std::vector<ExecutionRecord> records;
    std::vector<std::string> warnings;
};

ScoutConversion convert_scout_tree(const std::filesystem::path& root, const MachineCatalog& catalog);

}  // namespace crispy
