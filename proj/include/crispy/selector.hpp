#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crispy/core.hpp"
#include "crispy/memmodel.hpp"

namespace crispy {

// One candidate configuration with its historical cost-efficiency.
struct RankedConfig {
    ClusterConfig config;
    double mean_normalized_cost = 0.0;  // mean over jobs of per-job min-normalized cost
    int support_count = 0;              // number of (job, dataset) groups contributing
};

// "Best for All": rank configurations by mean normalized cost over all jobs
// on the given framework, excluding every record of exclude_job. Ties break
// by smaller total cluster memory, then machine type name, then node count.
std::vector<RankedConfig> bfa_rank(std::span<const ExecutionRecord> history, Framework framework,
                                   std::string_view exclude_job);

// Walk the ranking and pick the best-ranked configuration whose total cluster
// memory satisfies the per-configuration requirement; fall back to the
// ranking head when no linear model is available. When nothing qualifies,
// returns the largest-memory configuration with the constraint flagged
// unsatisfied.
Recommendation select(std::span<const RankedConfig> ranking, const std::optional<MemoryModel>& model,
                      Bytes full_dataset_bytes, const RequirementParams& params);

}  // namespace crispy
