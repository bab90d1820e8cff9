#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "crispy/memmodel.hpp"

namespace testutil {

inline double sse_of(std::span<const crispy::SamplePoint> pts, double slope, double intercept) {
    double sse = 0.0;
    for (const auto& p : pts) {
        const double r = p.peak_bytes - (slope * p.input_bytes + intercept);
        sse += r * r;
    }
    return sse;
}

// Brute-force least-squares oracle: nested grid search over the line
// parameters, refined around the best cell each round. The search runs in
// x-centered coordinates (y ~ a*(x - mean_x) + c) so the two axes decouple
// and the zoom provably brackets the optimum; only SSE evaluations are used.
inline crispy::LineCoefficients grid_search_fit(std::span<const crispy::SamplePoint> pts) {
    const std::size_t n = pts.size();
    double mean_x = 0.0;
    for (const auto& p : pts) mean_x += p.input_bytes;
    mean_x /= static_cast<double>(n);

    double max_dx = 0.0;
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        max_dx = std::max(max_dx, std::abs(p.input_bytes - mean_x));
        min_y = std::min(min_y, p.peak_bytes);
        max_y = std::max(max_y, p.peak_bytes);
    }
    const double y_span = std::max(max_y - min_y, 1.0);

    double a_lo = -2.0 * y_span / max_dx;
    double a_hi = 2.0 * y_span / max_dx;
    double c_lo = min_y - y_span;
    double c_hi = max_y + y_span;

    constexpr int kCells = 33;
    constexpr int kRounds = 60;
    double best_a = 0.0;
    double best_c = 0.0;
    for (int round = 0; round < kRounds; ++round) {
        const double a_step = (a_hi - a_lo) / (kCells - 1);
        const double c_step = (c_hi - c_lo) / (kCells - 1);
        double best_sse = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kCells; ++i) {
            const double a = a_lo + a_step * i;
            for (int j = 0; j < kCells; ++j) {
                const double c = c_lo + c_step * j;
                double sse = 0.0;
                for (const auto& p : pts) {
                    const double r = p.peak_bytes - (a * (p.input_bytes - mean_x) + c);
                    sse += r * r;
                }
                if (sse < best_sse) {
                    best_sse = sse;
                    best_a = a;
                    best_c = c;
                }
            }
        }
        a_lo = best_a - 1.5 * a_step;
        a_hi = best_a + 1.5 * a_step;
        c_lo = best_c - 1.5 * c_step;
        c_hi = best_c + 1.5 * c_step;
    }
    return crispy::LineCoefficients{best_a, best_c - best_a * mean_x};
}

}  // namespace testutil
