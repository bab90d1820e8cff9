#include "crispy/selector.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace crispy {

namespace {

struct GroupKey {
    std::string job_name;
    std::string dataset_label;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct ConfigCost {
    ClusterConfig config;
    double cost_sum = 0.0;
    int run_count = 0;
};

}  // namespace

std::vector<RankedConfig> bfa_rank(std::span<const ExecutionRecord> history, Framework framework,
                                   std::string_view exclude_job) {
    // Group the remaining records by (job, dataset_label); duplicate runs of
    // one config within a group are averaged before normalization.
    std::map<GroupKey, std::map<ConfigKey, ConfigCost>> groups;
    for (const auto& rec : history) {
        if (rec.framework != framework || rec.job_name == exclude_job) continue;
        const double cost = record_cost(rec);
        if (!(cost > 0.0)) {
            throw std::invalid_argument("bfa_rank: non-positive cost for job '" + rec.job_name + "'");
        }
        auto& entry = groups[GroupKey{rec.job_name, rec.dataset_label}][key_of(rec.config)];
        entry.config = rec.config;
        entry.cost_sum += cost;
        entry.run_count += 1;
    }
    if (groups.empty()) {
        throw std::invalid_argument("bfa_rank: no history left for framework '" +
                                    std::string(to_string(framework)) + "' after excluding job '" +
                                    std::string(exclude_job) + "'");
    }

    struct Accum {
        ClusterConfig config;
        double normalized_sum = 0.0;
        int group_count = 0;
    };
    std::map<ConfigKey, Accum> totals;
    for (const auto& [group_key, configs] : groups) {
        double group_min = 0.0;
        for (const auto& [key, cc] : configs) {
            const double mean_cost = cc.cost_sum / cc.run_count;
            if (group_min == 0.0 || mean_cost < group_min) group_min = mean_cost;
        }
        for (const auto& [key, cc] : configs) {
            const double mean_cost = cc.cost_sum / cc.run_count;
            auto& acc = totals[key];
            acc.config = cc.config;
            acc.normalized_sum += mean_cost / group_min;
            acc.group_count += 1;
        }
    }

    std::vector<RankedConfig> ranking;
    ranking.reserve(totals.size());
    for (const auto& [key, acc] : totals) {
        ranking.push_back(RankedConfig{acc.config, acc.normalized_sum / acc.group_count, acc.group_count});
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedConfig& a, const RankedConfig& b) {
        if (a.mean_normalized_cost != b.mean_normalized_cost) {
            return a.mean_normalized_cost < b.mean_normalized_cost;
        }
        const Bytes mem_a = total_cluster_memory(a.config);
        const Bytes mem_b = total_cluster_memory(b.config);
        if (mem_a != mem_b) return mem_a < mem_b;
        if (a.config.machine_type.name != b.config.machine_type.name) {
            return a.config.machine_type.name < b.config.machine_type.name;
        }
        return a.config.node_count < b.config.node_count;
    });
    return ranking;
}

Recommendation select(std::span<const RankedConfig> ranking, const std::optional<MemoryModel>& model,
                      Bytes full_dataset_bytes, const RequirementParams& params) {
    if (ranking.empty()) throw std::invalid_argument("select: empty ranking");

    Recommendation rec;
    if (!model || !model->is_linear) {
        rec.config = ranking.front().config;
        rec.job_memory_bytes = 0;
        rec.total_required_bytes = 0;
        rec.strategy = Strategy::bfa_fallback;
        rec.satisfied_memory_constraint = true;
        rec.rationale = model ? "memory model is not linear; total cluster memory requirement set to 0, "
                                "using the best-for-all ranking head"
                              : "no memory model; total cluster memory requirement set to 0, "
                                "using the best-for-all ranking head";
        return rec;
    }

    rec.strategy = Strategy::crispy;
    rec.job_memory_bytes = extrapolate_job_memory(*model, full_dataset_bytes);
    for (const auto& candidate : ranking) {
        const Bytes required =
            estimate_requirement(*model, full_dataset_bytes, candidate.config.node_count, params);
        if (total_cluster_memory(candidate.config) >= required) {
            rec.config = candidate.config;
            rec.total_required_bytes = required;
            rec.satisfied_memory_constraint = true;
            std::ostringstream why;
            why << "requirement " << format_bytes(required) << " satisfied by "
                << to_string(key_of(candidate.config)) << " with total "
                << format_bytes(total_cluster_memory(candidate.config));
            rec.rationale = why.str();
            return rec;
        }
    }

    // Nothing qualifies: pick the largest total memory available and warn.
    const RankedConfig* best = &ranking.front();
    for (const auto& candidate : ranking) {
        if (total_cluster_memory(candidate.config) > total_cluster_memory(best->config)) {
            best = &candidate;
        }
    }
    rec.config = best->config;
    rec.total_required_bytes =
        estimate_requirement(*model, full_dataset_bytes, best->config.node_count, params);
    rec.satisfied_memory_constraint = false;
    std::ostringstream why;
    why << "warning: no configuration satisfies the requirement; choosing the largest-memory "
        << "configuration " << to_string(key_of(best->config)) << " with total "
        << format_bytes(total_cluster_memory(best->config)) << " below required "
        << format_bytes(rec.total_required_bytes);
    rec.rationale = why.str();
    return rec;
}

}  // namespace crispy
