// crispy - profiling-driven cluster-configuration assistant.
//
// Pipeline subcommands: profile -> model -> recommend, plus evaluate for the
// history-based strategy comparison and convert-scout for history ingestion.
// Exit codes: 0 success, 2 usage error, 3 memory constraint unsatisfied,
// 1 any other failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crispy/catalog.hpp"
#include "crispy/core.hpp"
#include "crispy/evaluator.hpp"
#include "crispy/history.hpp"
#include "crispy/manifest.hpp"
#include "crispy/memmodel.hpp"
#include "crispy/profiler.hpp"
#include "crispy/sampler.hpp"
#include "crispy/selector.hpp"

namespace {

using namespace crispy;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConstraint = 3;

struct ProfileArgs {
    std::string job_cmd;
    std::string dataset;
    std::uint64_t full_size = 0;
    std::string job_name = "job";
    double base_fraction = 0.01;
    int poll_ms = 500;
    int baseline_ms = 5000;
    int settle_ms = 10000;
    double timeout_secs = 3600.0;
    double accept_min_secs = 30.0;
    double accept_max_secs = 180.0;
    int max_adjust_iterations = 12;
    std::string format = "line_delimited";
    std::string workdir = ".";
    std::string manifest_path;
    std::vector<std::string> runtime_args;
    std::vector<std::string> env;
};

int cmd_profile(const ProfileArgs& args) {
    JobSpec job;
    job.command_template = args.job_cmd;
    job.timeout_seconds = args.timeout_secs;
    job.runtime_tuning_args = args.runtime_args;
    for (const auto& kv : args.env) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError("--env", "expected KEY=VALUE, got '" + kv + "'");
        }
        job.environment[kv.substr(0, eq)] = kv.substr(eq + 1);
    }

    MonitorConfig monitor;
    monitor.poll_interval_ms = args.poll_ms;
    monitor.baseline_window_ms = args.baseline_ms;
    monitor.settle_timeout_ms = args.settle_ms;

    const std::filesystem::path workdir = args.workdir;
    std::filesystem::create_directories(workdir / "samples");
    std::filesystem::create_directories(workdir / "traces");

    ProfileOptions options;
    options.accept_min_seconds = args.accept_min_secs;
    options.accept_max_seconds = args.accept_max_secs;
    options.max_adjust_iterations = args.max_adjust_iterations;
    options.sample_dir = workdir / "samples";
    options.format = parse_sample_format(args.format);
    options.log = [](const std::string& msg) { std::cerr << "[profile] " << msg << "\n"; };

    const auto started_unix_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count();
    const auto result =
        profile_job(job, args.dataset, args.full_size, args.base_fraction, monitor, options);

    RunManifest manifest;
    manifest.job_name = args.job_name;
    manifest.job_command = args.job_cmd;
    manifest.dataset_path = args.dataset;
    manifest.full_dataset_bytes = args.full_size;
    manifest.initial_base_fraction = args.base_fraction;
    manifest.accepted_base_fraction = result.accepted_fraction;
    manifest.plan_sizes.assign(result.plan.sizes.begin(), result.plan.sizes.end());
    for (std::size_t i = 0; i < result.sample_paths.size(); ++i) {
        manifest.samples.push_back(RunManifest::SampleEntry{result.sample_paths[i].string(),
                                                            result.plan.sizes[i],
                                                            result.actual_bytes[i]});
    }
    manifest.adjustments = result.adjustments;
    manifest.profiling_total_seconds = result.total_seconds;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& run = result.runs[i];
        const auto trace_path = workdir / "traces" / ("run_" + std::to_string(i + 1) + ".json");
        write_trace(trace_path, run, result.sample_paths[i].string(), monitor.poll_interval_ms,
                    started_unix_ms);
        RunManifest::RunSummary summary;
        summary.sample_bytes = run.sample_bytes;
        summary.baseline_bytes = run.baseline_bytes;
        summary.peak_job_bytes = run.peak_job_bytes;
        summary.mean_job_bytes = run.mean_job_bytes;
        summary.duration_seconds = run.duration_seconds;
        summary.exit_status = run.exit_status;
        summary.timed_out = run.timed_out;
        summary.canceled = run.canceled;
        summary.sample_count = run.samples.size();
        summary.trace_path = trace_path.string();
        manifest.runs.push_back(std::move(summary));
    }

    const auto manifest_path = args.manifest_path.empty()
                                   ? (workdir / "crispy_manifest.json").string()
                                   : args.manifest_path;
    save_manifest(manifest_path, manifest);
    std::cout << "profiled " << result.runs.size() << " samples in "
              << format_fixed(result.total_seconds, 1) << " s\n";
    for (const auto& run : result.runs) {
        std::cout << "  " << format_bytes(run.sample_bytes) << " -> peak "
                  << format_bytes(run.peak_job_bytes) << " (" << format_fixed(run.duration_seconds, 1)
                  << " s)\n";
    }
    std::cout << "manifest: " << manifest_path << "\n";
    return kExitOk;
}

int cmd_model(const std::string& manifest_path) {
    RunManifest manifest = load_manifest(manifest_path);
    std::vector<SamplePoint> points;
    for (const auto& run : manifest.runs) {
        if (run.exit_status == 0 && !run.timed_out && !run.canceled) {
            points.push_back(SamplePoint{static_cast<double>(run.sample_bytes),
                                         static_cast<double>(run.peak_job_bytes)});
        }
    }
    if (points.size() < 2) {
        throw std::runtime_error("manifest has " + std::to_string(points.size()) +
                                 " successful run(s); need at least 2 to fit a model");
    }
    const MemoryModel model = fit_memory_model(points);
    manifest.model = model;
    save_manifest(manifest_path, manifest);
    std::cout << model_summary(model);
    return kExitOk;
}

struct RecommendArgs {
    std::string manifest_path;
    bool no_model = false;
    std::string history;
    std::string catalog;
    std::string framework;
    std::string job_name;
    std::uint64_t full_size = 0;
    double overhead_gib = 2.0;
    double leeway = 0.10;
};

int cmd_recommend(const RecommendArgs& args) {
    const auto catalog = MachineCatalog::load(args.catalog);
    const auto history = load_history(args.history, catalog);
    const auto framework = parse_framework(args.framework);

    std::optional<RunManifest> manifest;
    std::optional<MemoryModel> model;
    std::string job_name = args.job_name;
    Bytes full_size = args.full_size;
    if (!args.no_model) {
        manifest = load_manifest(args.manifest_path);
        if (!manifest->model) {
            throw std::runtime_error("manifest has no memory model; run the model step first or pass --no-model");
        }
        model = manifest->model;
        if (job_name.empty()) job_name = manifest->job_name;
        if (full_size == 0) full_size = manifest->full_dataset_bytes;
    }
    if (job_name.empty()) {
        throw CLI::ValidationError("--job-name", "required with --no-model");
    }
    if (model && full_size == 0) {
        throw std::runtime_error("full dataset size unknown; profile recorded none, pass --full-size");
    }

    RequirementParams params;
    params.per_node_overhead_bytes = static_cast<Bytes>(args.overhead_gib * static_cast<double>(GiB));
    params.leeway_factor = args.leeway;

    const auto ranking = bfa_rank(history, framework, job_name);
    const Recommendation rec = select(ranking, model, full_size, params);

    std::cout << "strategy: " << to_string(rec.strategy) << "\n"
              << "configuration: " << to_string(key_of(rec.config)) << " ("
              << format_bytes(total_cluster_memory(rec.config)) << " total memory)\n"
              << "job memory: " << format_bytes(rec.job_memory_bytes) << "\n"
              << "total required: " << format_bytes(rec.total_required_bytes) << "\n"
              << "constraint satisfied: " << (rec.satisfied_memory_constraint ? "yes" : "no") << "\n"
              << "rationale: " << rec.rationale << "\n";

    if (manifest) {
        manifest->recommendation = rec;
        save_manifest(args.manifest_path, *manifest);
    }
    return rec.satisfied_memory_constraint ? kExitOk : kExitConstraint;
}

struct EvaluateArgs {
    std::string history;
    std::string catalog;
    std::string models_dir;
    std::string medium_config;  // "machine:count"
    std::string out_path;
    std::string profiling_times;
    double overhead_gib = 2.0;
    double leeway = 0.10;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const auto catalog = MachineCatalog::load(args.catalog);
    const auto history = load_history(args.history, catalog);

    std::optional<ConfigKey> medium;
    if (!args.medium_config.empty()) {
        const auto colon = args.medium_config.rfind(':');
        if (colon == std::string::npos || colon + 1 == args.medium_config.size()) {
            throw CLI::ValidationError("--medium-config", "expected MACHINE:COUNT");
        }
        ConfigKey key;
        key.machine_name = args.medium_config.substr(0, colon);
        try {
            key.node_count = std::stoi(args.medium_config.substr(colon + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--medium-config", "node count is not a number");
        }
        if (key.node_count < 1) {
            throw CLI::ValidationError("--medium-config", "node count must be >= 1");
        }
        catalog.at(key.machine_name);  // must exist
        medium = key;
    } else if (const auto name = catalog.medium_machine()) {
        medium = ConfigKey{*name, 12};
    }

    ModelLookup models;
    if (!args.models_dir.empty()) models = load_models_dir(args.models_dir);

    RequirementParams params;
    params.per_node_overhead_bytes = static_cast<Bytes>(args.overhead_gib * static_cast<double>(GiB));
    params.leeway_factor = args.leeway;

    const auto rows = evaluate_all(history, medium, models, params);

    std::optional<std::vector<std::pair<std::string, double>>> times;
    if (!args.profiling_times.empty()) {
        std::ifstream in(args.profiling_times);
        if (!in) throw std::runtime_error("cannot open profiling-times file: " + args.profiling_times);
        times.emplace();
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto comma = line.rfind(',');
            if (comma == std::string::npos) {
                throw std::runtime_error("profiling-times: expected 'job,seconds' lines");
            }
            times->emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
        }
    }

    const std::string report = render_report(rows, times ? &*times : nullptr);
    std::cout << report;

    if (!args.out_path.empty()) {
        nlohmann::ordered_json j;
        j["rows"] = nlohmann::ordered_json::array();
        const auto cell = [](const std::optional<double>& v) {
            return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
        };
        for (const auto& row : rows) {
            j["rows"].push_back(nlohmann::ordered_json{{"job", row.job_name},
                                                       {"framework", std::string(to_string(row.framework))},
                                                       {"dataset_label", row.dataset_label},
                                                       {"random", cell(row.random_cost)},
                                                       {"medium", cell(row.medium_cost)},
                                                       {"bfa", cell(row.bfa_cost)},
                                                       {"crispy", cell(row.crispy_cost)}});
        }
        const auto means = column_means(rows);
        j["means"] = nlohmann::ordered_json{{"random", cell(means.random)},
                                            {"medium", cell(means.medium)},
                                            {"bfa", cell(means.bfa)},
                                            {"crispy", cell(means.crispy)}};
        std::ofstream out(args.out_path);
        if (!out) throw std::runtime_error("cannot write results file: " + args.out_path);
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

int cmd_convert_scout(const std::string& root, const std::string& catalog_path,
                      const std::string& out_path) {
    const auto catalog = MachineCatalog::load(catalog_path);
    const auto conversion = convert_scout_tree(root, catalog);
    for (const auto& warning : conversion.warnings) {
        std::cerr << "[convert] " << warning << "\n";
    }
    if (conversion.records.empty()) {
        throw std::runtime_error("no executions found under " + root);
    }
    write_history(std::filesystem::path(out_path), conversion.records);
    std::cout << "wrote " << conversion.records.size() << " records to " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crispy - profiling-driven cluster-configuration assistant"};
    app.require_subcommand(1);

    ProfileArgs profile_args;
    auto* profile = app.add_subcommand("profile", "Run the job on five dataset samples and record memory traces");
    profile->add_option("--job-cmd", profile_args.job_cmd,
                        "Job command template with one {sample} placeholder")->required();
    profile->add_option("--dataset", profile_args.dataset, "Local dataset file to sample")
        ->required()->check(CLI::ExistingFile);
    profile->add_option("--full-size", profile_args.full_size,
                        "Full dataset size in bytes (suffixes like 100MB, 2GiB accepted)")
        ->required()->transform(CLI::AsSizeValue(true));
    profile->add_option("--job-name", profile_args.job_name, "Job name recorded in the manifest");
    profile->add_option("--base-fraction", profile_args.base_fraction,
                        "Initial fraction of the full dataset for the largest sample")
        ->check(CLI::Range(1e-9, 1.0));
    profile->add_option("--poll-ms", profile_args.poll_ms, "Memory poll interval")->check(CLI::Range(50, 60000));
    profile->add_option("--baseline-ms", profile_args.baseline_ms, "Baseline capture window")
        ->check(CLI::Range(50, 600000));
    profile->add_option("--settle-ms", profile_args.settle_ms,
                        "Max wait for memory readings to stabilize before each baseline (0 disables)")
        ->check(CLI::Range(0, 600000));
    profile->add_option("--timeout-secs", profile_args.timeout_secs, "Hard per-run timeout")
        ->check(CLI::PositiveNumber);
    profile->add_option("--accept-min-secs", profile_args.accept_min_secs,
                        "Lower bound of the accepted largest-sample runtime")->check(CLI::PositiveNumber);
    profile->add_option("--accept-max-secs", profile_args.accept_max_secs,
                        "Upper bound of the accepted largest-sample runtime")->check(CLI::PositiveNumber);
    profile->add_option("--max-adjust-iterations", profile_args.max_adjust_iterations,
                        "Base-fraction adjustment attempts before giving up")->check(CLI::Range(1, 100));
    profile->add_option("--format", profile_args.format, "Sample format: line_delimited or raw_bytes")
        ->check(CLI::IsMember({"line_delimited", "raw_bytes"}));
    profile->add_option("--workdir", profile_args.workdir, "Directory for samples, traces and the manifest");
    profile->add_option("--manifest", profile_args.manifest_path, "Manifest path (default <workdir>/crispy_manifest.json)");
    profile->add_option("--runtime-args", profile_args.runtime_args,
                        "Pass-through runtime tuning arguments (e.g. garbage-collector flags)");
    profile->add_option("--env", profile_args.env, "KEY=VALUE environment for the job")->expected(-1);

    std::string model_manifest = "crispy_manifest.json";
    auto* model = app.add_subcommand("model", "Fit the memory model from a profiling manifest");
    model->add_option("--manifest", model_manifest, "Manifest written by the profile step");

    RecommendArgs recommend_args;
    recommend_args.manifest_path = "crispy_manifest.json";
    auto* recommend = app.add_subcommand("recommend", "Recommend a cluster configuration");
    recommend->add_option("--manifest", recommend_args.manifest_path, "Manifest with a fitted model");
    recommend->add_flag("--no-model", recommend_args.no_model, "Pure best-for-all mode without a manifest");
    recommend->add_option("--history", recommend_args.history, "Execution history CSV")
        ->required()->check(CLI::ExistingFile);
    recommend->add_option("--catalog", recommend_args.catalog, "Machine catalog CSV")
        ->required()->check(CLI::ExistingFile);
    recommend->add_option("--framework", recommend_args.framework, "Framework of the job")
        ->required()->check(CLI::IsMember({"spark", "hadoop", "other"}));
    recommend->add_option("--job-name", recommend_args.job_name,
                          "Job to exclude from the ranking (default: manifest job name)");
    recommend->add_option("--full-size", recommend_args.full_size,
                          "Full dataset size override in bytes")->transform(CLI::AsSizeValue(true));
    recommend->add_option("--overhead-gib", recommend_args.overhead_gib,
                          "Per-node memory overhead in GiB")->check(CLI::NonNegativeNumber);
    recommend->add_option("--leeway", recommend_args.leeway, "Leeway factor on the job memory")
        ->check(CLI::NonNegativeNumber);

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "Compare Random/Medium/BFA/Crispy over a history");
    evaluate->add_option("--history", evaluate_args.history, "Execution history CSV")
        ->required()->check(CLI::ExistingFile);
    evaluate->add_option("--catalog", evaluate_args.catalog, "Machine catalog CSV")
        ->required()->check(CLI::ExistingFile);
    evaluate->add_option("--models-dir", evaluate_args.models_dir,
                         "Directory of per-job memory-model JSON files")->check(CLI::ExistingDirectory);
    evaluate->add_option("--medium-config", evaluate_args.medium_config,
                         "Medium baseline as MACHINE:COUNT (default: catalog medium flag, 12 nodes)");
    evaluate->add_option("--out", evaluate_args.out_path, "Machine-readable results file (JSON)");
    evaluate->add_option("--profiling-times", evaluate_args.profiling_times,
                         "CSV of job,seconds rows for the profiling-time table");
    evaluate->add_option("--overhead-gib", evaluate_args.overhead_gib,
                         "Per-node memory overhead in GiB")->check(CLI::NonNegativeNumber);
    evaluate->add_option("--leeway", evaluate_args.leeway, "Leeway factor on the job memory")
        ->check(CLI::NonNegativeNumber);

    std::string scout_root;
    std::string scout_catalog;
    std::string scout_out = "scout_history.csv";
    auto* convert = app.add_subcommand("convert-scout",
                                       "Convert a scout-style execution tree to the history CSV schema");
    convert->add_option("root", scout_root, "Tree of <machine_count>/<framework-job-label>/report.json")
        ->required()->check(CLI::ExistingDirectory);
    convert->add_option("--catalog", scout_catalog, "Machine catalog CSV")
        ->required()->check(CLI::ExistingFile);
    convert->add_option("--out", scout_out, "Output history CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (profile->parsed()) return cmd_profile(profile_args);
        if (model->parsed()) return cmd_model(model_manifest);
        if (recommend->parsed()) return cmd_recommend(recommend_args);
        if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
        if (convert->parsed()) return cmd_convert_scout(scout_root, scout_catalog, scout_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
