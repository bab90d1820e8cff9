#include "crispy/history.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace crispy {

namespace {

const char* kHeaderPrefix = "job,framework,dataset_label,machine_type,node_count,runtime_seconds,cost";

ExecutionRecord parse_row(const std::vector<std::string_view>& fields, const MachineCatalog& catalog) {
    ExecutionRecord rec;
    rec.job_name = std::string(fields[0]);
    if (rec.job_name.empty()) throw std::invalid_argument("job must not be empty");
    rec.framework = parse_framework(fields[1]);
    rec.dataset_label = std::string(fields[2]);
    if (rec.dataset_label.empty()) throw std::invalid_argument("dataset_label must not be empty");
    rec.config.machine_type = catalog.at(fields[3]);
    rec.config.node_count = detail::parse_number<int>(fields[4], "node_count");
    if (rec.config.node_count < 1) throw std::invalid_argument("node_count must be >= 1");
    rec.runtime_seconds = detail::parse_double(fields[5], "runtime_seconds");
    if (!(rec.runtime_seconds > 0.0)) throw std::invalid_argument("runtime_seconds must be > 0");
    if (fields.size() > 6 && !fields[6].empty()) {
        rec.cost = detail::parse_double(fields[6], "cost");
        if (!(*rec.cost > 0.0)) throw std::invalid_argument("cost must be > 0");
    } else {
        rec.cost = execution_cost(rec.runtime_seconds, rec.config);
    }
    if (fields.size() > 7 && !fields[7].empty()) {
        rec.dataset_bytes = detail::parse_number<Bytes>(fields[7], "dataset_bytes");
    }
    return rec;
}

}  // namespace

std::vector<ExecutionRecord> load_history(const std::filesystem::path& path, const MachineCatalog& catalog) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open history file: " + path.string());
    return parse_history(in, catalog, path.string());
}

std::vector<ExecutionRecord> parse_history(std::istream& in, const MachineCatalog& catalog,
                                           const std::string& origin) {
    std::vector<ExecutionRecord> records;
    std::vector<std::string> errors;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto stripped = detail::trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        if (!header_seen) {
            if (stripped.substr(0, 4) != "job,") {
                throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                         ": expected history header '" + kHeaderPrefix + "[,dataset_bytes]'");
            }
            header_seen = true;
            continue;
        }
        auto fields = detail::split_fields(stripped);
        if (fields.size() < 6 || fields.size() > 8) {
            errors.push_back(origin + ":" + std::to_string(line_no) + ": expected 6 to 8 fields, got " +
                             std::to_string(fields.size()));
            continue;
        }
        try {
            records.push_back(parse_row(fields, catalog));
        } catch (const std::exception& e) {
            errors.push_back(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) throw std::runtime_error(origin + ": empty history file (missing header)");
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "history file has " << errors.size() << " malformed row(s):";
        for (const auto& e : errors) msg << "\n  " << e;
        throw std::runtime_error(msg.str());
    }
    return records;
}

void write_history(std::ostream& out, const std::vector<ExecutionRecord>& records) {
    out << kHeaderPrefix << ",dataset_bytes\n";
    for (const auto& rec : records) {
        out << rec.job_name << ',' << to_string(rec.framework) << ',' << rec.dataset_label << ','
            << rec.config.machine_type.name << ',' << rec.config.node_count << ','
            << format_double(rec.runtime_seconds) << ',';
        if (rec.cost) out << format_double(*rec.cost);
        out << ',';
        if (rec.dataset_bytes) out << *rec.dataset_bytes;
        out << '\n';
    }
}

void write_history(const std::filesystem::path& path, const std::vector<ExecutionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history file: " + path.string());
    write_history(out, records);
}

}  // namespace crispy
