#pragma once

#include <span>
#include <string>

#include "crispy/core.hpp"

namespace crispy {

// One (input size, peak memory) observation, in bytes.
struct SamplePoint {
    double input_bytes = 0.0;
    double peak_bytes = 0.0;
};

struct LineCoefficients {
    double slope = 0.0;
    double intercept = 0.0;
};

// Fixed per-node overhead plus multiplicative safety margin applied on top of
// the extrapolated job memory.
struct RequirementParams {
    Bytes per_node_overhead_bytes = 2 * GiB;
    double leeway_factor = 0.10;

    void validate() const;
};

// Ordinary least squares in closed form: slope = cov(x,y)/var(x).
LineCoefficients fit_linear(std::span<const SamplePoint> points);

// 1 - SS_res/SS_tot. When SS_tot is zero: 1.0 if SS_res is zero, else 0.0.
double r2_score(std::span<const SamplePoint> points, double slope, double intercept);

// Training-set gate: true iff r2 > 0.99 (strict).
bool decide_linearity(double r2);

// fit + score + verdict in one step.
MemoryModel fit_memory_model(std::span<const SamplePoint> points);

// max(slope * full + intercept, 0), rounded to whole bytes.
Bytes extrapolate_job_memory(const MemoryModel& model, Bytes full_dataset_bytes);

// job_bytes * (1 + leeway) + node_count * per_node_overhead. Requires a
// linear model; callers must use requirement 0 otherwise.
Bytes estimate_requirement(const MemoryModel& model, Bytes full_dataset_bytes, int node_count,
                           const RequirementParams& params);

// Structured text report of slope/intercept/r2/verdict.
std::string model_summary(const MemoryModel& model);

}  // namespace crispy
