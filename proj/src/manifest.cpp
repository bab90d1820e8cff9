#include "crispy/manifest.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include <json.hpp>

namespace crispy {

namespace {

using Json = nlohmann::ordered_json;

Json model_to_json(const MemoryModel& model) {
    return Json{{"slope", model.slope},
                {"intercept", model.intercept},
                {"r2", model.r2},
                {"is_linear", model.is_linear}};
}

MemoryModel model_from_json(const nlohmann::json& j) {
    MemoryModel model;
    model.slope = j.at("slope").get<double>();
    model.intercept = j.at("intercept").get<double>();
    model.r2 = j.at("r2").get<double>();
    model.is_linear = j.value("is_linear", decide_linearity(model.r2));
    return model;
}

}  // namespace

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
    }

    RunManifest m;
    m.job_name = j.value("job_name", "");
    m.job_command = j.value("job_command", "");
    m.dataset_path = j.value("dataset_path", "");
    m.full_dataset_bytes = j.value("full_dataset_bytes", Bytes{0});
    m.initial_base_fraction = j.value("initial_base_fraction", 0.0);
    m.accepted_base_fraction = j.value("accepted_base_fraction", 0.0);
    if (j.contains("plan_sizes")) m.plan_sizes = j.at("plan_sizes").get<std::vector<Bytes>>();
    for (const auto& s : j.value("samples", nlohmann::json::array())) {
        m.samples.push_back(RunManifest::SampleEntry{s.at("path").get<std::string>(),
                                                     s.at("target_bytes").get<Bytes>(),
                                                     s.at("actual_bytes").get<Bytes>()});
    }
    for (const auto& r : j.value("runs", nlohmann::json::array())) {
        RunManifest::RunSummary run;
        run.sample_bytes = r.at("sample_bytes").get<Bytes>();
        run.baseline_bytes = r.at("baseline_bytes").get<Bytes>();
        run.peak_job_bytes = r.at("peak_job_bytes").get<Bytes>();
        run.mean_job_bytes = r.value("mean_job_bytes", Bytes{0});
        run.duration_seconds = r.at("duration_seconds").get<double>();
        run.exit_status = r.at("exit_status").get<int>();
        run.timed_out = r.value("timed_out", false);
        run.canceled = r.value("canceled", false);
        run.sample_count = r.value("sample_count", std::size_t{0});
        run.trace_path = r.value("trace_path", "");
        m.runs.push_back(std::move(run));
    }
    for (const auto& a : j.value("adjustments", nlohmann::json::array())) {
        m.adjustments.push_back(AdjustmentStep{a.at("fraction").get<double>(),
                                               a.at("observed_runtime_seconds").get<double>(),
                                               a.at("accepted").get<bool>()});
    }
    m.profiling_total_seconds = j.value("profiling_total_seconds", 0.0);
    if (j.contains("model")) m.model = model_from_json(j.at("model"));
    if (j.contains("recommendation")) {
        const auto& r = j.at("recommendation");
        Recommendation rec;
        rec.config.machine_type.name = r.at("machine_type").get<std::string>();
        rec.config.machine_type.family = parse_family(r.value("machine_family", "other"));
        rec.config.machine_type.cores = r.value("machine_cores", 1);
        rec.config.machine_type.memory_bytes = r.value("machine_memory_bytes", Bytes{1});
        rec.config.machine_type.price_per_hour = r.value("machine_price_per_hour", 0.0);
        rec.config.node_count = r.at("node_count").get<int>();
        rec.job_memory_bytes = r.at("job_memory_bytes").get<Bytes>();
        rec.total_required_bytes = r.at("total_required_bytes").get<Bytes>();
        rec.strategy = r.at("strategy").get<std::string>() == "crispy" ? Strategy::crispy
                                                                       : Strategy::bfa_fallback;
        rec.satisfied_memory_constraint = r.at("satisfied_memory_constraint").get<bool>();
        rec.rationale = r.value("rationale", "");
        m.recommendation = std::move(rec);
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
    Json j;
    j["job_name"] = m.job_name;
    j["job_command"] = m.job_command;
    j["dataset_path"] = m.dataset_path;
    j["full_dataset_bytes"] = m.full_dataset_bytes;
    j["initial_base_fraction"] = m.initial_base_fraction;
    j["accepted_base_fraction"] = m.accepted_base_fraction;
    j["plan_sizes"] = m.plan_sizes;
    j["samples"] = Json::array();
    for (const auto& s : m.samples) {
        j["samples"].push_back(Json{{"path", s.path},
                                    {"target_bytes", s.target_bytes},
                                    {"actual_bytes", s.actual_bytes}});
    }
    j["runs"] = Json::array();
    for (const auto& r : m.runs) {
        j["runs"].push_back(Json{{"sample_bytes", r.sample_bytes},
                                 {"baseline_bytes", r.baseline_bytes},
                                 {"peak_job_bytes", r.peak_job_bytes},
                                 {"mean_job_bytes", r.mean_job_bytes},
                                 {"duration_seconds", r.duration_seconds},
                                 {"exit_status", r.exit_status},
                                 {"timed_out", r.timed_out},
                                 {"canceled", r.canceled},
                                 {"sample_count", r.sample_count},
                                 {"trace_path", r.trace_path}});
    }
    j["adjustments"] = Json::array();
    for (const auto& a : m.adjustments) {
        j["adjustments"].push_back(Json{{"fraction", a.fraction},
                                        {"observed_runtime_seconds", a.observed_runtime_seconds},
                                        {"accepted", a.accepted}});
    }
    j["profiling_total_seconds"] = m.profiling_total_seconds;
    if (m.model) j["model"] = model_to_json(*m.model);
    if (m.recommendation) {
        const auto& rec = *m.recommendation;
        j["recommendation"] = Json{{"machine_type", rec.config.machine_type.name},
                                   {"machine_family", std::string(to_string(rec.config.machine_type.family))},
                                   {"machine_cores", rec.config.machine_type.cores},
                                   {"machine_memory_bytes", rec.config.machine_type.memory_bytes},
                                   {"machine_price_per_hour", rec.config.machine_type.price_per_hour},
                                   {"node_count", rec.config.node_count},
                                   {"job_memory_bytes", rec.job_memory_bytes},
                                   {"total_required_bytes", rec.total_required_bytes},
                                   {"strategy", std::string(to_string(rec.strategy))},
                                   {"satisfied_memory_constraint", rec.satisfied_memory_constraint},
                                   {"rationale", rec.rationale}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

void write_trace(const std::filesystem::path& path, const ProfilingRun& run,
                 const std::string& sample_path, int poll_interval_ms, std::int64_t started_unix_ms) {
    Json j;
    j["sample_path"] = sample_path;
    j["sample_bytes"] = run.sample_bytes;
    j["baseline_bytes"] = run.baseline_bytes;
    j["poll_interval_ms"] = poll_interval_ms;
    j["started_unix_ms"] = started_unix_ms;
    j["duration_seconds"] = run.duration_seconds;
    j["exit_status"] = run.exit_status;
    j["timed_out"] = run.timed_out;
    j["canceled"] = run.canceled;
    j["peak_job_bytes"] = run.peak_job_bytes;
    j["mean_job_bytes"] = run.mean_job_bytes;
    j["samples"] = Json::array();
    for (const auto& s : run.samples) {
        j["samples"].push_back(Json::array({s.elapsed_ms, s.used_bytes}));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path.string());
    out << j.dump(2) << '\n';
}

ModelLookup load_models_dir(const std::filesystem::path& dir) {
    // key: (framework, job, label); an empty label matches any label
    using Key = std::tuple<int, std::string, std::string>;
    auto table = std::make_shared<std::map<Key, JobModel>>();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed model file " + entry.path().string() + ": " + e.what());
        }
        try {
            Key key{static_cast<int>(parse_framework(j.at("framework").get<std::string>())),
                    j.at("job").get<std::string>(), j.value("dataset_label", "")};
            JobModel jm;
            jm.model = model_from_json(j);
            jm.full_dataset_bytes = j.at("full_dataset_bytes").get<Bytes>();
            if (!table->emplace(std::move(key), std::move(jm)).second) {
                throw std::invalid_argument("duplicate model entry");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("model file " + entry.path().string() + ": " + e.what());
        }
    }
    return [table](Framework framework, const std::string& job,
                   const std::string& label) -> std::optional<JobModel> {
        const auto exact = table->find(Key{static_cast<int>(framework), job, label});
        if (exact != table->end()) return exact->second;
        const auto any = table->find(Key{static_cast<int>(framework), job, ""});
        if (any != table->end()) return any->second;
        return std::nullopt;
    };
}

}  // namespace crispy
