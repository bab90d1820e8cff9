#pragma once

#include <array>
#include <filesystem>
#include <optional>

#include "crispy/units.hpp"

namespace crispy {

// Five equally spaced sample sizes, the largest one being
// base_fraction * full_dataset_bytes.
struct SamplePlan {
    Bytes full_dataset_bytes = 0;
    double base_fraction = 0.0;
    std::array<Bytes, 5> sizes{};  // strictly increasing
};

SamplePlan plan_samples(Bytes full_dataset_bytes, double base_fraction = 0.01);

// Runtime-target check for the largest profiling run. Returns the adjusted
// fraction, or nullopt when the observed runtime is acceptable (30..180 s).
std::optional<double> adjust_base_fraction(double observed_runtime_seconds, double current_fraction);

// Generalized rule used by profile_job; adjust_base_fraction is the
// (30 s, 180 s) specialization.
std::optional<double> adjust_fraction_for_window(double observed_runtime_seconds, double current_fraction,
                                                 double accept_min_seconds, double accept_max_seconds);

enum class SampleFormat { line_delimited, raw_bytes };

SampleFormat parse_sample_format(std::string_view s);
std::string_view to_string(SampleFormat f);

// Writes a prefix of the dataset of size <= target_bytes to output_path and
// returns the bytes written. For line_delimited input the prefix ends on a
// record boundary and is the largest such prefix <= target_bytes.
Bytes materialize_sample(const std::filesystem::path& dataset_path, Bytes target_bytes,
                         const std::filesystem::path& output_path, SampleFormat format);

}  // namespace crispy
