#include "crispy/evaluator.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "text_util.hpp"

namespace crispy {

namespace {

std::vector<ExecutionRecord> collect_group(std::span<const ExecutionRecord> history, Framework framework,
                                           std::string_view job_name, std::string_view dataset_label) {
    std::vector<ExecutionRecord> group;
    for (const auto& rec : history) {
        if (rec.framework == framework && rec.job_name == job_name && rec.dataset_label == dataset_label) {
            group.push_back(rec);
        }
    }
    return group;
}

double walk_ranking(std::span<const RankedConfig> ranking, const std::map<ConfigKey, double>& normalized,
                    std::string_view what) {
    for (const auto& rc : ranking) {
        auto it = normalized.find(key_of(rc.config));
        if (it != normalized.end()) return it->second;
    }
    throw std::runtime_error(std::string(what) + ": no ranked configuration appears in the group");
}

}  // namespace

std::map<ConfigKey, double> normalize_costs(std::span<const ExecutionRecord> group) {
    if (group.empty()) throw std::invalid_argument("normalize_costs: empty group");
    struct Agg {
        double cost_sum = 0.0;
        int count = 0;
    };
    std::map<ConfigKey, Agg> agg;
    for (const auto& rec : group) {
        const double cost = record_cost(rec);
        if (!(cost > 0.0)) {
            throw std::invalid_argument("normalize_costs: non-positive cost for config " +
                                        to_string(key_of(rec.config)));
        }
        auto& a = agg[key_of(rec.config)];
        a.cost_sum += cost;
        a.count += 1;
    }
    double min_cost = 0.0;
    for (const auto& [key, a] : agg) {
        const double mean = a.cost_sum / a.count;
        if (min_cost == 0.0 || mean < min_cost) min_cost = mean;
    }
    std::map<ConfigKey, double> normalized;
    for (const auto& [key, a] : agg) {
        normalized[key] = (a.cost_sum / a.count) / min_cost;
    }
    return normalized;
}

double baseline_random(const std::map<ConfigKey, double>& normalized) {
    if (normalized.empty()) throw std::invalid_argument("baseline_random: empty group");
    double sum = 0.0;
    for (const auto& [key, v] : normalized) sum += v;
    return sum / static_cast<double>(normalized.size());
}

std::optional<double> baseline_medium(const std::map<ConfigKey, double>& normalized,
                                      const ConfigKey& medium_config) {
    auto it = normalized.find(medium_config);
    if (it == normalized.end()) return std::nullopt;
    return it->second;
}

double baseline_bfa(std::span<const ExecutionRecord> history, Framework framework,
                    std::string_view job_name, std::string_view dataset_label) {
    const auto ranking = bfa_rank(history, framework, job_name);
    const auto group = collect_group(history, framework, job_name, dataset_label);
    if (group.empty()) {
        throw std::invalid_argument("baseline_bfa: no records for job '" + std::string(job_name) +
                                    "' with dataset '" + std::string(dataset_label) + "'");
    }
    return walk_ranking(ranking, normalize_costs(group), "baseline_bfa");
}

double evaluate_crispy(std::span<const ExecutionRecord> history, Framework framework,
                       std::string_view job_name, std::string_view dataset_label,
                       const std::optional<MemoryModel>& model, Bytes full_dataset_bytes,
                       const RequirementParams& params) {
    const auto ranking = bfa_rank(history, framework, job_name);
    const auto group = collect_group(history, framework, job_name, dataset_label);
    if (group.empty()) {
        throw std::invalid_argument("evaluate_crispy: no records for job '" + std::string(job_name) +
                                    "' with dataset '" + std::string(dataset_label) + "'");
    }
    const auto normalized = normalize_costs(group);
    if (!model || !model->is_linear) {
        return walk_ranking(ranking, normalized, "evaluate_crispy");
    }
    for (const auto& rc : ranking) {
        const Bytes required =
            estimate_requirement(*model, full_dataset_bytes, rc.config.node_count, params);
        if (total_cluster_memory(rc.config) < required) continue;
        auto it = normalized.find(key_of(rc.config));
        if (it != normalized.end()) return it->second;
    }
    // No qualifying config ran this job: mirror select's largest-memory
    // policy restricted to configs present in the group.
    const RankedConfig* best = nullptr;
    for (const auto& rc : ranking) {
        if (!normalized.contains(key_of(rc.config))) continue;
        if (!best || total_cluster_memory(rc.config) > total_cluster_memory(best->config)) best = &rc;
    }
    if (!best) throw std::runtime_error("evaluate_crispy: no ranked configuration appears in the group");
    return normalized.at(key_of(best->config));
}

std::vector<EvaluationRow> evaluate_all(std::span<const ExecutionRecord> history,
                                        const std::optional<ConfigKey>& medium_config,
                                        const ModelLookup& models, const RequirementParams& params) {
    using RowKey = std::tuple<int, std::string, std::string>;  // framework order, job, label
    std::set<RowKey> keys;
    for (const auto& rec : history) {
        keys.insert(RowKey{static_cast<int>(rec.framework), rec.job_name, rec.dataset_label});
    }

    std::vector<EvaluationRow> rows;
    for (const auto& [fw_order, job, label] : keys) {
        const auto framework = static_cast<Framework>(fw_order);
        EvaluationRow row;
        row.job_name = job;
        row.framework = framework;
        row.dataset_label = label;
        const auto group = collect_group(history, framework, job, label);
        const auto normalized = normalize_costs(group);
        row.random_cost = baseline_random(normalized);
        if (medium_config) row.medium_cost = baseline_medium(normalized, *medium_config);
        try {
            row.bfa_cost = baseline_bfa(history, framework, job, label);
        } catch (const std::exception&) {
            // Leave-one-out history is empty or disjoint from the group.
        }
        try {
            std::optional<MemoryModel> model;
            Bytes full = 0;
            if (models) {
                if (auto jm = models(framework, job, label)) {
                    model = jm->model;
                    full = jm->full_dataset_bytes;
                }
            }
            row.crispy_cost = evaluate_crispy(history, framework, job, label, model, full, params);
        } catch (const std::exception&) {
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ColumnMeans column_means(std::span<const EvaluationRow> rows) {
    const auto mean_of = [&](auto getter) -> std::optional<double> {
        double sum = 0.0;
        int count = 0;
        for (const auto& row : rows) {
            if (const auto v = getter(row)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / count;
    };
    ColumnMeans means;
    means.random = mean_of([](const EvaluationRow& r) { return r.random_cost; });
    means.medium = mean_of([](const EvaluationRow& r) { return r.medium_cost; });
    means.bfa = mean_of([](const EvaluationRow& r) { return r.bfa_cost; });
    means.crispy = mean_of([](const EvaluationRow& r) { return r.crispy_cost; });
    return means;
}

std::string render_report(std::span<const EvaluationRow> rows,
                          const std::vector<std::pair<std::string, double>>* profiling_times) {
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_fixed(*v, 4) : std::string("-");
    };

    std::vector<std::array<std::string, 7>> table;
    table.push_back({"Job", "Framework", "Dataset", "Random", "Medium", "BFA", "Crispy"});
    bool any_missing = false;
    for (const auto& row : rows) {
        any_missing = any_missing || !row.random_cost || !row.medium_cost || !row.bfa_cost ||
                      !row.crispy_cost;
        table.push_back({row.job_name, std::string(to_string(row.framework)), row.dataset_label,
                         cell(row.random_cost), cell(row.medium_cost), cell(row.bfa_cost),
                         cell(row.crispy_cost)});
    }
    const auto means = column_means(rows);
    table.push_back({"Mean", "", "", cell(means.random), cell(means.medium), cell(means.bfa),
                     cell(means.crispy)});

    std::array<std::size_t, 7> widths{};
    for (const auto& r : table) {
        for (std::size_t c = 0; c < 7; ++c) widths[c] = std::max(widths[c], r[c].size());
    }
    std::ostringstream out;
    out << "Normalized job execution cost by selection method\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (i + 1 == table.size()) {
            for (std::size_t c = 0; c < 7; ++c) {
                out << std::string(widths[c], '-') << (c + 1 < 7 ? "  " : "");
            }
            out << '\n';
        }
        const auto& r = table[i];
        for (std::size_t c = 0; c < 7; ++c) {
            const bool numeric = c >= 3;
            const auto pad = widths[c] - r[c].size();
            if (numeric) out << std::string(pad, ' ') << r[c];
            else out << r[c] << std::string(pad, ' ');
            out << (c + 1 < 7 ? "  " : "");
        }
        out << '\n';
    }
    if (any_missing) out << "- = value missing from the dataset\n";

    if (profiling_times && !profiling_times->empty()) {
        out << "\nProfiling time per job\n";
        std::size_t name_width = std::string("Mean").size();
        for (const auto& [name, secs] : *profiling_times) name_width = std::max(name_width, name.size());
        double sum = 0.0;
        for (const auto& [name, secs] : *profiling_times) {
            out << name << std::string(name_width - name.size(), ' ') << "  " << format_fixed(secs, 1)
                << " s\n";
            sum += secs;
        }
        out << std::string(name_width, '-') << "\n";
        out << "Mean" << std::string(name_width - 4, ' ') << "  "
            << format_fixed(sum / static_cast<double>(profiling_times->size()), 1) << " s\n";
    }
    return out.str();
}

ScoutConversion convert_scout_tree(const std::filesystem::path& root, const MachineCatalog& catalog) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw std::runtime_error("convert_scout_tree: not a directory: " + root.string());
    }

    ScoutConversion result;
    const auto warn = [&](const std::string& msg) { result.warnings.push_back(msg); };

    // Run directories are named <machine_type>_<node_count> with the machine
    // type present in the catalog; anything else is ignored silently so the
    // tree may contain unrelated files.
    std::vector<fs::path> run_dirs;
    run_dirs.push_back(root);
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_directory()) run_dirs.push_back(entry.path());
    }
    std::sort(run_dirs.begin(), run_dirs.end());

    for (const auto& dir : run_dirs) {
        const std::string name = dir.filename().string();
        const auto underscore = name.rfind('_');
        if (underscore == std::string::npos) continue;
        const std::string machine_name = name.substr(0, underscore);
        const std::string count_str = name.substr(underscore + 1);
        const MachineType* machine = catalog.find(machine_name);
        if (!machine) continue;
        int node_count = 0;
        try {
            node_count = detail::parse_number<int>(count_str, "node count");
        } catch (const std::exception&) {
            continue;
        }
        if (node_count < 1) {
            warn(dir.string() + ": node count must be >= 1, skipped");
            continue;
        }

        for (const auto& workload : fs::directory_iterator(dir)) {
            if (!workload.is_directory()) continue;
            const std::string wname = workload.path().filename().string();
            const auto first = wname.find('-');
            const auto last = wname.rfind('-');
            if (first == std::string::npos || first == last) {
                warn(workload.path().string() + ": expected framework-job-label directory name, skipped");
                continue;
            }
            const auto report_path = workload.path() / "report.json";
            if (!fs::exists(report_path)) {
                warn(workload.path().string() + ": no report.json, skipped");
                continue;
            }
            try {
                std::ifstream in(report_path);
                const auto report = nlohmann::json::parse(in);
                if (report.contains("completed") && !report.at("completed").get<bool>()) {
                    warn(report_path.string() + ": run not completed, skipped");
                    continue;
                }
                ExecutionRecord rec;
                rec.job_name = wname.substr(first + 1, last - first - 1);
                rec.framework = parse_framework(wname.substr(0, first));
                rec.dataset_label = wname.substr(last + 1);
                rec.config.machine_type = *machine;
                rec.config.node_count = node_count;
                rec.runtime_seconds = report.at("elapsed_time").get<double>();
                if (!(rec.runtime_seconds > 0.0)) {
                    warn(report_path.string() + ": non-positive elapsed_time, skipped");
                    continue;
                }
                rec.cost = execution_cost(rec.runtime_seconds, rec.config);
                result.records.push_back(std::move(rec));
            } catch (const std::exception& e) {
                warn(report_path.string() + ": " + e.what() + ", skipped");
            }
        }
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const ExecutionRecord& a, const ExecutionRecord& b) {
                  return std::tie(a.framework, a.job_name, a.dataset_label, a.config.machine_type.name,
                                  a.config.node_count) <
                         std::tie(b.framework, b.job_name, b.dataset_label, b.config.machine_type.name,
                                  b.config.node_count);
              });
    return result;
}

}  // namespace crispy
