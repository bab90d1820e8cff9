#include "crispy/memmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crispy {

void RequirementParams::validate() const {
    if (leeway_factor < 0.0) throw std::invalid_argument("leeway_factor must be >= 0");
}

LineCoefficients fit_linear(std::span<const SamplePoint> points) {
    if (points.size() < 2) throw std::invalid_argument("fit_linear: need at least 2 points");
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& p : points) {
        mean_x += p.input_bytes;
        mean_y += p.peak_bytes;
    }
    const auto n = static_cast<double>(points.size());
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        const double dx = p.input_bytes - mean_x;
        sxx += dx * dx;
        sxy += dx * (p.peak_bytes - mean_y);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_linear: all input sizes equal, degenerate design");
    const double slope = sxy / sxx;
    return LineCoefficients{slope, mean_y - slope * mean_x};
}

double r2_score(std::span<const SamplePoint> points, double slope, double intercept) {
    if (points.size() < 2) throw std::invalid_argument("r2_score: need at least 2 points");
    double mean_y = 0.0;
    for (const auto& p : points) mean_y += p.peak_bytes;
    mean_y /= static_cast<double>(points.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (const auto& p : points) {
        const double dy = p.peak_bytes - mean_y;
        ss_tot += dy * dy;
        const double res = p.peak_bytes - (slope * p.input_bytes + intercept);
        ss_res += res * res;
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

bool decide_linearity(double r2) {
    return r2 > 0.99;
}

MemoryModel fit_memory_model(std::span<const SamplePoint> points) {
    const auto line = fit_linear(points);
    MemoryModel model;
    model.slope = line.slope;
    model.intercept = line.intercept;
    model.r2 = r2_score(points, line.slope, line.intercept);
    model.is_linear = decide_linearity(model.r2);
    return model;
}

Bytes extrapolate_job_memory(const MemoryModel& model, Bytes full_dataset_bytes) {
    const double predicted = model.slope * static_cast<double>(full_dataset_bytes) + model.intercept;
    if (!(predicted > 0.0)) return 0;
    return static_cast<Bytes>(std::llround(predicted));
}

Bytes estimate_requirement(const MemoryModel& model, Bytes full_dataset_bytes, int node_count,
                           const RequirementParams& params) {
    if (!model.is_linear) {
        throw std::invalid_argument("estimate_requirement: model is not linear; use requirement 0 instead");
    }
    if (full_dataset_bytes == 0) throw std::invalid_argument("estimate_requirement: dataset size must be > 0");
    if (node_count < 1) throw std::invalid_argument("estimate_requirement: node_count must be >= 1");
    params.validate();
    const auto job_bytes = static_cast<double>(extrapolate_job_memory(model, full_dataset_bytes));
    const double required = job_bytes * (1.0 + params.leeway_factor) +
                            static_cast<double>(node_count) * static_cast<double>(params.per_node_overhead_bytes);
    return static_cast<Bytes>(std::llround(required));
}

std::string model_summary(const MemoryModel& model) {
    std::ostringstream out;
    out << "slope: " << format_double(model.slope) << " bytes memory per byte input\n"
        << "intercept: " << format_double(model.intercept) << " bytes\n"
        << "r2: " << format_double(model.r2) << "\n"
        << "verdict: " << (model.is_linear ? "linear (r2 > 0.99)" : "not linear (r2 <= 0.99)") << "\n";
    return out.str();
}

}  // namespace crispy
