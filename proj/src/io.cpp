#include "dqd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace dqd {

std::string fmt17(double value) {
    char buffer[40];
    const int n = std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return std::string(buffer, static_cast<std::size_t>(n));
}

namespace {

constexpr char kTrajectoryHeader[] =
    "t,sigma11,re_sigma12,im_sigma12,purity_defect,i_step,i_window,i_cum";
constexpr char kEnsembleHeader[] =
    "t,mean_sigma11,se_sigma11,mean_re_s12,mean_im_s12,abs_mean_s12,mean_purity_defect,n_traj";
constexpr char kRecoveryHeader[] =
    "outcome,final_sigma11,cond_sigma11,cond_re_sigma12,cond_im_sigma12,"
    "eps_rec,h_rec,delta_t_rec,omega_rec";
constexpr char kPurityHeader[] = "t,purity_defect";

// JSON has no representation for non-finite numbers; they become null.
std::string json_number(double value) {
    return std::isfinite(value) ? fmt17(value) : "null";
}

std::string json_string(const std::string& raw) {
    std::string out = "\"";
    for (const char c : raw) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

void append_json_array(std::string& out, const std::string& key,
                       const std::vector<double>& values, bool last = false) {
    out += "  ";
    out += json_string(key);
    out += ": [";
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k != 0) out += ", ";
        out += json_number(values[k]);
    }
    out += last ? "]\n" : "],\n";
}

// The resolved configuration rides along in every output: one `# key = value`
// comment per line for CSV, a flat "config" object for JSON.
std::string csv_config_echo(const RunConfig& config) {
    std::istringstream lines(write_config(config));
    std::string echoed, line;
    while (std::getline(lines, line)) {
        // The worker count cannot affect any result, so it is left out of the
        // rendered artifact: reruns with different parallelism must produce
        // byte-identical files.
        if (line.rfind("run.workers ", 0) == 0) continue;
        echoed += "# " + line + "\n";
    }
    return echoed;
}

std::string preset_note(const RunConfig& config) {
    if (!config.preset) return {};
    return "normalization (detector levels, s_i, time grid) for preset '" + *config.preset +
           "' is a simulation choice, not a measured value";
}

std::string json_config_object(const RunConfig& config) {
    std::string out = "  \"config\": {\n";
    std::istringstream lines(write_config(config));
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        const auto eq = line.find(" = ");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        if (key == "run.workers") continue;  // execution detail, see csv_config_echo
        if (!first) out += ",\n";
        first = false;
        // Numbers stay numeric; everything else is emitted as a string.
        double parsed = 0.0;
        const auto [ptr, ec] =
            std::from_chars(value.data(), value.data() + value.size(), parsed);
        const bool numeric = ec == std::errc() && ptr == value.data() + value.size();
        out += "    " + json_string(key) + ": ";
        if (value == "true" || value == "false") {
            out += value;
        } else if (numeric) {
            out += json_number(parsed);
        } else {
            out += json_string(value);
        }
    }
    out += "\n  },\n";
    return out;
}

std::string csv_preamble(const RunConfig& config) {
    std::string out = csv_config_echo(config);
    if (const std::string note = preset_note(config); !note.empty()) {
        out += "# note: " + note + "\n";
    }
    return out;
}

std::string json_preamble(const RunConfig& config) {
    std::string out = "{\n" + json_config_object(config);
    if (const std::string note = preset_note(config); !note.empty()) {
        out += "  \"note\": " + json_string(note) + ",\n";
    }
    return out;
}

}  // namespace

std::string render_trajectory_output(const TrajectoryRecord& record, const RunConfig& config) {
    // Detector output smoothed over the time needed to tell the two current
    // levels apart; with no response the running mean from zero is used.
    const double window = record.params.det.delta_i != 0.0
                              ? record.params.det.s_i /
                                    (record.params.det.delta_i * record.params.det.delta_i)
                              : std::numeric_limits<double>::infinity();
    const std::vector<double> filtered = filter_current(record, window);
    const std::vector<double> cumulative = cumulative_average(record);
    const std::size_t n_times = record.times.size();

    if (config.format == OutputFormat::Csv) {
        std::string out = csv_preamble(config);
        out += kTrajectoryHeader;
        out += '\n';
        for (std::size_t k = 0; k < n_times; ++k) {
            const DensityMatrix& rho = record.states[k];
            out += fmt17(record.times[k]);
            out += ',';
            out += fmt17(rho.sigma11);
            out += ',';
            out += fmt17(rho.re_sigma12);
            out += ',';
            out += fmt17(rho.im_sigma12);
            out += ',';
            out += fmt17(purity_defect(rho));
            if (k == 0) {
                // No step ends at t = 0, so there is no current yet.
                out += ",nan,nan,nan\n";
            } else {
                out += ',';
                out += fmt17(record.currents[k - 1].i_avg);
                out += ',';
                out += fmt17(filtered[k - 1]);
                out += ',';
                out += fmt17(cumulative[k - 1]);
                out += '\n';
            }
        }
        return out;
    }

    std::vector<double> sigma11(n_times), re(n_times), im(n_times), defect(n_times);
    for (std::size_t k = 0; k < n_times; ++k) {
        sigma11[k] = record.states[k].sigma11;
        re[k] = record.states[k].re_sigma12;
        im[k] = record.states[k].im_sigma12;
        defect[k] = purity_defect(record.states[k]);
    }
    std::vector<double> step_start(record.currents.size()), i_step(record.currents.size());
    for (std::size_t k = 0; k < record.currents.size(); ++k) {
        step_start[k] = record.currents[k].t_start;
        i_step[k] = record.currents[k].i_avg;
    }
    std::string out = json_preamble(config);
    append_json_array(out, "t", record.times);
    append_json_array(out, "sigma11", sigma11);
    append_json_array(out, "re_sigma12", re);
    append_json_array(out, "im_sigma12", im);
    append_json_array(out, "purity_defect", defect);
    append_json_array(out, "step_t_start", step_start);
    append_json_array(out, "i_step", i_step);
    append_json_array(out, "i_window", filtered);
    append_json_array(out, "i_cum", cumulative, true);
    out += "}\n";
    return out;
}

std::string render_ensemble_output(const EnsembleStats& stats, const RunConfig& config,
                                   const std::optional<FittedRate>& fitted) {
    if (config.format == OutputFormat::Csv) {
        std::string out = csv_preamble(config);
        if (fitted) {
            out += "# fitted_rate = " + fmt17(fitted->rate) + "\n";
            out += "# fitted_rate_log_intercept = " + fmt17(fitted->log_intercept) + "\n";
            out += "# fitted_rate_r_squared = " + fmt17(fitted->r_squared) + "\n";
            out += "# fitted_rate_t_max = " + fmt17(fitted->t_max) + "\n";
        }
        out += kEnsembleHeader;
        out += '\n';
        const std::string n_traj = std::to_string(stats.n_traj);
        for (std::size_t k = 0; k < stats.times.size(); ++k) {
            out += fmt17(stats.times[k]);
            out += ',';
            out += fmt17(stats.mean_sigma11[k]);
            out += ',';
            out += fmt17(stats.se_sigma11[k]);
            out += ',';
            out += fmt17(stats.mean_re_sigma12[k]);
            out += ',';
            out += fmt17(stats.mean_im_sigma12[k]);
            out += ',';
            out += fmt17(stats.abs_mean_offdiag[k]);
            out += ',';
            out += fmt17(stats.mean_purity_defect[k]);
            out += ',';
            out += n_traj;
            out += '\n';
        }
        return out;
    }

    std::string out = json_preamble(config);
    out += "  \"n_traj\": " + std::to_string(stats.n_traj) + ",\n";
    if (fitted) {
        out += "  \"fitted_rate\": {";
        out += "\"rate\": " + json_number(fitted->rate) + ", ";
        out += "\"log_intercept\": " + json_number(fitted->log_intercept) + ", ";
        out += "\"r_squared\": " + json_number(fitted->r_squared) + ", ";
        out += "\"t_max\": " + json_number(fitted->t_max);
        out += "},\n";
    }
    append_json_array(out, "t", stats.times);
    append_json_array(out, "mean_sigma11", stats.mean_sigma11);
    append_json_array(out, "se_sigma11", stats.se_sigma11);
    append_json_array(out, "mean_re_s12", stats.mean_re_sigma12);
    append_json_array(out, "se_re_s12", stats.se_re_sigma12);
    append_json_array(out, "mean_im_s12", stats.mean_im_sigma12);
    append_json_array(out, "se_im_s12", stats.se_im_sigma12);
    append_json_array(out, "abs_mean_s12", stats.abs_mean_offdiag);
    append_json_array(out, "mean_purity_defect", stats.mean_purity_defect);
    append_json_array(out, "se_purity_defect", stats.se_purity_defect, true);
    out += "}\n";
    return out;
}

std::string render_recovery_output(const RecoveryReport& report, const RunConfig& config) {
    const bool recovered = report.outcome == RecoveryOutcome::Recovered;
    const std::string outcome = recovered ? "recovered" : "already_localized";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double eps_rec = report.controls ? report.controls->eps_rec : nan;
    const double h_rec = report.controls ? report.controls->h_rec : nan;
    const double delta_t = report.controls ? report.controls->delta_t_rec : nan;
    const double omega = report.controls ? report.controls->omega_rec : nan;

    if (config.format == OutputFormat::Csv) {
        std::string out = csv_preamble(config);
        out += kRecoveryHeader;
        out += '\n';
        out += outcome;
        for (const double v : {report.final_sigma11, report.conditioned.sigma11,
                               report.conditioned.re_sigma12, report.conditioned.im_sigma12,
                               eps_rec, h_rec, delta_t, omega}) {
            out += ',';
            out += fmt17(v);
        }
        out += '\n';
        return out;
    }

    std::string out = json_preamble(config);
    out += "  \"outcome\": " + json_string(outcome) + ",\n";
    out += "  \"conditioned\": {\"sigma11\": " + json_number(report.conditioned.sigma11) +
           ", \"re_sigma12\": " + json_number(report.conditioned.re_sigma12) +
           ", \"im_sigma12\": " + json_number(report.conditioned.im_sigma12) + "},\n";
    if (report.controls) {
        out += "  \"controls\": {\"eps_rec\": " + json_number(eps_rec) +
               ", \"h_rec\": " + json_number(h_rec) +
               ", \"delta_t_rec\": " + json_number(delta_t) +
               ", \"omega_rec\": " + json_number(omega) + "},\n";
    } else {
        out += "  \"controls\": null,\n";
    }
    out += "  \"final_sigma11\": " + json_number(report.final_sigma11) + "\n}\n";
    return out;
}

std::string render_purity_output(const PurityTrace& trace, const RunConfig& config) {
    if (config.format == OutputFormat::Csv) {
        std::string out = csv_preamble(config);
        out += kPurityHeader;
        out += '\n';
        for (std::size_t k = 0; k < trace.times.size(); ++k) {
            out += fmt17(trace.times[k]);
            out += ',';
            out += fmt17(trace.defect[k]);
            out += '\n';
        }
        return out;
    }
    std::string out = json_preamble(config);
    append_json_array(out, "t", trace.times);
    append_json_array(out, "purity_defect", trace.defect, true);
    out += "}\n";
    return out;
}

namespace {

const char* expected_csv_header(OutputKind kind) {
    switch (kind) {
        case OutputKind::Trajectory: return kTrajectoryHeader;
        case OutputKind::Ensemble: return kEnsembleHeader;
        case OutputKind::Recovery: return kRecoveryHeader;
        case OutputKind::Purity: return kPurityHeader;
    }
    return "";
}

bool parses_as_double(const std::string& token) {
    double parsed = 0.0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), parsed);
    return ec == std::errc() && ptr == token.data() + token.size();
}

void validate_csv(const std::string& content, OutputKind kind, std::size_t expected_rows) {
    std::istringstream lines(content);
    std::string line;
    bool header_seen = false;
    std::size_t rows = 0;
    const std::string header = expected_csv_header(kind);
    const auto n_cols = static_cast<std::size_t>(
        std::count(header.begin(), header.end(), ',') + 1);
    while (std::getline(lines, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != header) {
                throw Error("output self-validation: header mismatch: " + line);
            }
            header_seen = true;
            continue;
        }
        ++rows;
        std::size_t start = 0, col = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string token = line.substr(start, comma - start);
            // The recovery outcome column is the one non-numeric cell.
            const bool outcome_cell = kind == OutputKind::Recovery && col == 0;
            if (!outcome_cell && !parses_as_double(token)) {
                throw Error("output self-validation: non-numeric cell '" + token + "'");
            }
            ++col;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (col != n_cols) {
            throw Error("output self-validation: expected " + std::to_string(n_cols) +
                        " columns, found " + std::to_string(col));
        }
    }
    if (!header_seen) {
        throw Error("output self-validation: missing header row");
    }
    if (rows != expected_rows) {
        throw Error("output self-validation: expected " + std::to_string(expected_rows) +
                    " rows, found " + std::to_string(rows));
    }
}

void require_numeric_array(const nlohmann::json& doc, const char* key,
                           std::size_t expected_size) {
    if (!doc.contains(key) || !doc[key].is_array()) {
        throw Error(std::string("output self-validation: missing array \"") + key + '"');
    }
    if (doc[key].size() != expected_size) {
        throw Error(std::string("output self-validation: array \"") + key +
                    "\" has size " + std::to_string(doc[key].size()) + ", expected " +
                    std::to_string(expected_size));
    }
    for (const auto& v : doc[key]) {
        if (!v.is_number() && !v.is_null()) {
            throw Error(std::string("output self-validation: non-numeric entry in \"") +
                        key + '"');
        }
    }
}

void validate_json(const std::string& content, OutputKind kind, std::size_t expected_rows) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& err) {
        throw Error(std::string("output self-validation: invalid JSON: ") + err.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
        throw Error("output self-validation: missing config object");
    }
    switch (kind) {
        case OutputKind::Trajectory:
            require_numeric_array(doc, "t", expected_rows);
            require_numeric_array(doc, "sigma11", expected_rows);
            require_numeric_array(doc, "re_sigma12", expected_rows);
            require_numeric_array(doc, "im_sigma12", expected_rows);
            require_numeric_array(doc, "purity_defect", expected_rows);
            require_numeric_array(doc, "i_step", expected_rows - 1);
            require_numeric_array(doc, "i_window", expected_rows - 1);
            require_numeric_array(doc, "i_cum", expected_rows - 1);
            break;
        case OutputKind::Ensemble:
            require_numeric_array(doc, "t", expected_rows);
            require_numeric_array(doc, "mean_sigma11", expected_rows);
            require_numeric_array(doc, "se_sigma11", expected_rows);
            require_numeric_array(doc, "abs_mean_s12", expected_rows);
            require_numeric_array(doc, "mean_purity_defect", expected_rows);
            if (!doc.contains("n_traj") || !doc["n_traj"].is_number_unsigned()) {
                throw Error("output self-validation: missing n_traj");
            }
            break;
        case OutputKind::Recovery:
            if (!doc.contains("outcome") || !doc["outcome"].is_string() ||
                !doc.contains("final_sigma11") || !doc["final_sigma11"].is_number()) {
                throw Error("output self-validation: malformed recovery report");
            }
            break;
        case OutputKind::Purity:
            require_numeric_array(doc, "t", expected_rows);
            require_numeric_array(doc, "purity_defect", expected_rows);
            break;
    }
}

}  // namespace

void self_validate(const std::string& content, const RunConfig& config, OutputKind kind,
                   std::size_t expected_rows) {
    if (config.format == OutputFormat::Csv) {
        validate_csv(content, kind, expected_rows);
    } else {
        validate_json(content, kind, expected_rows);
    }
}

void write_output_file(const std::string& path, const std::string& content,
                       const RunConfig& config, OutputKind kind, std::size_t expected_rows) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot open output file: " + path);
        }
        out << content;
        if (!out) {
            throw ConfigError("failed writing output file: " + path);
        }
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream readback;
    readback << in.rdbuf();
    if (!in) {
        throw ConfigError("cannot re-read output file: " + path);
    }
    self_validate(readback.str(), config, kind, expected_rows);
}

}  // namespace dqd
