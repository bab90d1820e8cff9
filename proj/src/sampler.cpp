#include "crispy/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace crispy {

SamplePlan plan_samples(Bytes full_dataset_bytes, double base_fraction) {
    if (full_dataset_bytes == 0) throw std::invalid_argument("plan_samples: dataset size must be > 0");
    if (!(base_fraction > 0.0) || base_fraction > 1.0) {
        throw std::invalid_argument("plan_samples: base_fraction must be in (0, 1]");
    }
    SamplePlan plan;
    plan.full_dataset_bytes = full_dataset_bytes;
    plan.base_fraction = base_fraction;
    const double base_size = base_fraction * static_cast<double>(full_dataset_bytes);
    for (int i = 0; i < 5; ++i) {
        plan.sizes[static_cast<std::size_t>(i)] =
            static_cast<Bytes>(std::llround(base_size * static_cast<double>(i + 1) / 5.0));
    }
    if (plan.sizes[0] < 1) {
        throw std::invalid_argument("plan_samples: smallest sample would be below one byte; "
                                    "dataset too small for base fraction " + std::to_string(base_fraction));
    }
    for (int i = 1; i < 5; ++i) {
        if (plan.sizes[static_cast<std::size_t>(i)] <= plan.sizes[static_cast<std::size_t>(i - 1)]) {
            throw std::invalid_argument("plan_samples: degenerate plan, sample sizes not strictly increasing");
        }
    }
    return plan;
}

std::optional<double> adjust_fraction_for_window(double observed_runtime_seconds, double current_fraction,
                                                 double accept_min_seconds, double accept_max_seconds) {
    if (!(observed_runtime_seconds > 0.0)) {
        throw std::invalid_argument("adjust_base_fraction: observed runtime must be > 0");
    }
    if (!(current_fraction > 0.0) || current_fraction > 1.0) {
        throw std::invalid_argument("adjust_base_fraction: current fraction must be in (0, 1]");
    }
    if (!(accept_min_seconds > 0.0) || !(accept_max_seconds > accept_min_seconds)) {
        throw std::invalid_argument("adjust_base_fraction: invalid runtime window");
    }
    if (observed_runtime_seconds >= accept_min_seconds && observed_runtime_seconds <= accept_max_seconds) {
        return std::nullopt;
    }
    if (observed_runtime_seconds > accept_max_seconds) return current_fraction / 2.0;
    return std::min(current_fraction * 2.0, 1.0);
}

std::optional<double> adjust_base_fraction(double observed_runtime_seconds, double current_fraction) {
    return adjust_fraction_for_window(observed_runtime_seconds, current_fraction, 30.0, 180.0);
}

SampleFormat parse_sample_format(std::string_view s) {
    if (s == "line_delimited") return SampleFormat::line_delimited;
    if (s == "raw_bytes") return SampleFormat::raw_bytes;
    throw std::invalid_argument("unknown sample format '" + std::string(s) +
                                "' (expected line_delimited or raw_bytes)");
}

std::string_view to_string(SampleFormat f) {
    return f == SampleFormat::line_delimited ? "line_delimited" : "raw_bytes";
}

Bytes materialize_sample(const std::filesystem::path& dataset_path, Bytes target_bytes,
                         const std::filesystem::path& output_path, SampleFormat format) {
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(dataset_path, ec);
    if (ec) throw std::runtime_error("cannot stat dataset: " + dataset_path.string() + ": " + ec.message());
    if (target_bytes == 0) throw std::invalid_argument("materialize_sample: target must be > 0");
    if (target_bytes > file_size) {
        throw std::invalid_argument("materialize_sample: target " + std::to_string(target_bytes) +
                                    " exceeds dataset size " + std::to_string(file_size));
    }

    std::ifstream in(dataset_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read dataset: " + dataset_path.string());
    std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write sample: " + output_path.string());

    // Copy the first target_bytes while tracking the last record boundary,
    // then shrink the output to that boundary for line_delimited input.
    std::vector<char> buf(1 << 20);
    Bytes copied = 0;
    Bytes last_boundary = 0;  // bytes up to and including the last '\n'
    while (copied < target_bytes) {
        const auto want = static_cast<std::streamsize>(std::min<Bytes>(buf.size(), target_bytes - copied));
        in.read(buf.data(), want);
        const auto got = in.gcount();
        if (got <= 0) throw std::runtime_error("unexpected end of dataset: " + dataset_path.string());
        out.write(buf.data(), got);
        if (!out) throw std::runtime_error("write failed: " + output_path.string());
        if (format == SampleFormat::line_delimited) {
            for (std::streamsize i = got - 1; i >= 0; --i) {
                if (buf[static_cast<std::size_t>(i)] == '\n') {
                    last_boundary = copied + static_cast<Bytes>(i) + 1;
                    break;
                }
            }
        }
        copied += static_cast<Bytes>(got);
    }
    out.close();

    Bytes actual = target_bytes;
    if (format == SampleFormat::line_delimited && target_bytes < file_size) {
        if (last_boundary == 0) {
            std::filesystem::remove(output_path);
            throw std::invalid_argument("materialize_sample: target " + std::to_string(target_bytes) +
                                        " is smaller than the first record of " + dataset_path.string());
        }
        actual = last_boundary;
        if (actual < target_bytes) std::filesystem::resize_file(output_path, actual);
    }
    return actual;
}

}  // namespace crispy
