#include "dqd/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dqd/ensemble.hpp"
#include "dqd/io.hpp"
#include "dqd/protocols.hpp"

namespace dqd {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Simulate: return "simulate";
        case Mode::Ensemble: return "ensemble";
        case Mode::Recover: return "recover";
        case Mode::Purify: return "purify";
    }
    return "simulate";
}

Mode mode_from_string(const std::string& name) {
    if (name == "simulate") return Mode::Simulate;
    if (name == "ensemble") return Mode::Ensemble;
    if (name == "recover") return Mode::Recover;
    if (name == "purify") return Mode::Purify;
    throw ParseError("unknown mode '" + name + "' (expected simulate, ensemble, recover or purify)");
}

std::string to_string(OutputFormat format) {
    return format == OutputFormat::Csv ? "csv" : "json";
}

OutputFormat format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw ParseError("unknown output format '" + name + "' (expected csv or json)");
}

namespace {

std::string trim(const std::string& raw) {
    const auto begin = raw.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = raw.find_last_not_of(" \t\r");
    return raw.substr(begin, end - begin + 1);
}

std::string where(const KeyValue& kv) {
    return kv.line > 0 ? "config line " + std::to_string(kv.line) : "option '" + kv.key + "'";
}

double parse_double(const KeyValue& kv) {
    double value = 0.0;
    const std::string& s = kv.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(where(kv) + ": '" + s + "' is not a number for " + kv.key);
    }
    return value;
}

std::uint64_t parse_u64(const KeyValue& kv) {
    std::uint64_t value = 0;
    const std::string& s = kv.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(where(kv) + ": '" + s + "' is not an unsigned integer for " + kv.key);
    }
    return value;
}

bool parse_bool(const KeyValue& kv) {
    if (kv.value == "true") return true;
    if (kv.value == "false") return false;
    throw ParseError(where(kv) + ": '" + kv.value + "' is not true/false for " + kv.key);
}

// Applies one assignment to the partially built config. The preset key is
// handled by the caller before anything else and is ignored here.
void apply_entry(RunConfig& config, const KeyValue& kv) {
    const std::string& key = kv.key;
    if (key == "preset") {
        config.preset = kv.value;
    } else if (key == "system.eps") {
        config.sys.eps = parse_double(kv);
    } else if (key == "system.h") {
        config.sys.h_coupling = parse_double(kv);
    } else if (key == "system.hbar") {
        config.sys.hbar = parse_double(kv);
    } else if (key == "detector.i0") {
        config.det.i0 = parse_double(kv);
    } else if (key == "detector.delta_i") {
        config.det.delta_i = parse_double(kv);
    } else if (key == "detector.s_i") {
        config.det.s_i = parse_double(kv);
    } else if (key == "detector.gamma_d") {
        config.det.gamma_d_extra = parse_double(kv);
    } else if (key == "state.sigma11") {
        config.rho0.sigma11 = parse_double(kv);
    } else if (key == "state.re_sigma12") {
        config.rho0.re_sigma12 = parse_double(kv);
    } else if (key == "state.im_sigma12") {
        config.rho0.im_sigma12 = parse_double(kv);
    } else if (key == "run.mode") {
        try {
            config.mode = mode_from_string(kv.value);
        } catch (const ParseError& err) {
            throw ParseError(where(kv) + ": " + err.what());
        }
    } else if (key == "run.scheme") {
        try {
            config.scheme = scheme_from_string(kv.value);
        } catch (const ParseError& err) {
            throw ParseError(where(kv) + ": " + err.what());
        }
    } else if (key == "run.seed") {
        config.seed = parse_u64(kv);
    } else if (key == "run.dt") {
        config.dt = parse_double(kv);
    } else if (key == "run.t_end") {
        config.t_end = parse_double(kv);
    } else if (key == "run.n_traj") {
        config.n_traj = static_cast<std::size_t>(parse_u64(kv));
    } else if (key == "run.workers") {
        config.workers = static_cast<unsigned>(parse_u64(kv));
    } else if (key == "run.allow_large_dt") {
        config.allow_large_dt = parse_bool(kv);
    } else if (key == "recover.h_rec") {
        config.h_rec = parse_double(kv);
    } else if (key == "output.path") {
        config.out_path = kv.value;
    } else if (key == "output.format") {
        try {
            config.format = format_from_string(kv.value);
        } catch (const ParseError& err) {
            throw ParseError(where(kv) + ": " + err.what());
        }
    } else {
        throw ParseError(where(kv) + ": unknown key '" + key + "'");
    }
}

void require_positive(const std::optional<double>& value, const char* field,
                      bool allow_zero = false) {
    if (!value) throw MissingField(field);
    if (!std::isfinite(*value) || (*value < 0.0) || (*value == 0.0 && !allow_zero)) {
        throw ParseError(std::string(field) + " must be " +
                         (allow_zero ? "nonnegative" : "positive") + " and finite, got " +
                         fmt17(*value));
    }
}

}  // namespace

std::vector<KeyValue> parse_config_text(const std::string& text) {
    std::vector<KeyValue> entries;
    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected 'key = value', got '" + line + "'");
        }
        KeyValue kv;
        kv.key = trim(line.substr(0, eq));
        kv.value = trim(line.substr(eq + 1));
        kv.line = line_no;
        if (kv.key.empty() || kv.value.empty()) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": empty key or value in '" + line + "'");
        }
        entries.push_back(std::move(kv));
    }
    return entries;
}

std::vector<KeyValue> preset_values(const std::string& name) {
    const auto kv = [](const char* key, const std::string& value) {
        return KeyValue{key, value, 0};
    };
    if (name == "fig1") {
        // Symmetric pure state watched by an ideal detector with the dots
        // uncoupled: pure localization dynamics.
        return {
            kv("system.eps", "0"),
            kv("system.h", "0"),
            kv("system.hbar", "1"),
            kv("detector.i0", "10"),
            kv("detector.delta_i", "1"),
            kv("detector.s_i", "1"),
            kv("detector.gamma_d", "0"),
            kv("state.sigma11", "0.5"),
            kv("state.re_sigma12", "0.5"),
            kv("state.im_sigma12", "0"),
            kv("run.dt", "0.02"),
            kv("run.t_end", "20"),
        };
    }
    const auto coupled = [&kv](double coupling_c, const char* dt) {
        // eps = h = hbar = s_i = 1, so the detector coupling equals
        // delta_i^2 and the precession frequency is sqrt(5).
        std::vector<KeyValue> values = {
            kv("system.eps", "1"),
            kv("system.h", "1"),
            kv("system.hbar", "1"),
            kv("detector.i0", "20"),
            kv("detector.delta_i", fmt17(std::sqrt(coupling_c))),
            kv("detector.s_i", "1"),
            kv("detector.gamma_d", "0"),
            kv("state.sigma11", "1"),
            kv("state.re_sigma12", "0"),
            kv("state.im_sigma12", "0"),
            kv("run.t_end", "50"),
        };
        values.push_back(kv("run.dt", dt));
        return values;
    };
    if (name == "fig2-c0.3") return coupled(0.3, "0.04");
    if (name == "fig2-c3") return coupled(3.0, "0.04");
    if (name == "fig2-c30") return coupled(30.0, "0.005");
    throw ParseError("unknown preset '" + name +
                     "' (expected fig1, fig2-c0.3, fig2-c3 or fig2-c30)");
}

RunConfig resolve_config(std::span<const KeyValue> file_entries,
                         std::span<const KeyValue> overrides) {
    RunConfig config;

    // The preset forms the base layer, so its name must be known before any
    // other assignment is applied. Flags outrank the file here as everywhere.
    std::optional<std::string> preset_name;
    for (const KeyValue& kv : file_entries) {
        if (kv.key == "preset") preset_name = kv.value;
    }
    for (const KeyValue& kv : overrides) {
        if (kv.key == "preset") preset_name = kv.value;
    }
    if (preset_name) {
        for (const KeyValue& kv : preset_values(*preset_name)) {
            apply_entry(config, kv);
        }
        config.preset = *preset_name;
    }
    for (const KeyValue& kv : file_entries) {
        apply_entry(config, kv);
    }
    for (const KeyValue& kv : overrides) {
        apply_entry(config, kv);
    }

    if (!config.seed) throw MissingField("run.seed");
    require_positive(config.dt, "run.dt");
    // In recover mode t_end is the measurement phase length, which may be
    // zero (pulse applied to the initial state directly).
    require_positive(config.t_end, "run.t_end", config.mode == Mode::Recover);
    if (config.mode == Mode::Ensemble) {
        if (!config.n_traj) throw MissingField("run.n_traj");
        if (*config.n_traj == 0) {
            throw ParseError("run.n_traj must be at least 1");
        }
    }
    validate_params(config.sys, config.det);
    validate_state(config.rho0);
    if (config.mode == Mode::Recover &&
        (!std::isfinite(config.h_rec) || config.h_rec == 0.0)) {
        throw ParseError("recover.h_rec must be finite and nonzero, got " + fmt17(config.h_rec));
    }
    if (config.out_path.empty()) {
        config.out_path = to_string(config.mode) + "." + to_string(config.format);
    }
    return config;
}

RunConfig load_config(const std::optional<std::string>& path,
                      std::span<const KeyValue> overrides) {
    std::vector<KeyValue> file_entries;
    if (path && !path->empty()) {
        std::ifstream in(*path);
        if (!in) {
            throw ConfigError("cannot read config file: " + *path);
        }
        std::ostringstream text;
        text << in.rdbuf();
        file_entries = parse_config_text(text.str());
    }
    return resolve_config(file_entries, overrides);
}

std::string write_config(const RunConfig& config) {
    std::string out;
    const auto put = [&out](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    if (config.preset) put("preset", *config.preset);
    put("system.eps", fmt17(config.sys.eps));
    put("system.h", fmt17(config.sys.h_coupling));
    put("system.hbar", fmt17(config.sys.hbar));
    put("detector.i0", fmt17(config.det.i0));
    put("detector.delta_i", fmt17(config.det.delta_i));
    put("detector.s_i", fmt17(config.det.s_i));
    put("detector.gamma_d", fmt17(config.det.gamma_d_extra));
    put("state.sigma11", fmt17(config.rho0.sigma11));
    put("state.re_sigma12", fmt17(config.rho0.re_sigma12));
    put("state.im_sigma12", fmt17(config.rho0.im_sigma12));
    put("run.mode", to_string(config.mode));
    put("run.scheme", to_string(config.scheme));
    if (config.seed) put("run.seed", std::to_string(*config.seed));
    if (config.dt) put("run.dt", fmt17(*config.dt));
    if (config.t_end) put("run.t_end", fmt17(*config.t_end));
    if (config.n_traj) put("run.n_traj", std::to_string(*config.n_traj));
    put("run.workers", std::to_string(config.workers));
    put("run.allow_large_dt", config.allow_large_dt ? "true" : "false");
    put("recover.h_rec", fmt17(config.h_rec));
    if (!config.out_path.empty()) put("output.path", config.out_path);
    put("output.format", to_string(config.format));
    return out;
}

namespace {

std::optional<FittedRate> ensemble_fit(const EnsembleStats& stats, const RunConfig& config) {
    // The log-linear fit only makes sense while the coherence envelope is
    // well above the statistical floor, so it stops after two decay times.
    const DerivedQuantities derived = derived_quantities(config.sys, config.det);
    const double total_rate = derived.gamma_d_meas + config.det.gamma_d_extra;
    const double t_cap = total_rate > 0.0 ? 2.0 / total_rate : *config.t_end;
    std::vector<double> times, values;
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
        if (stats.times[k] > t_cap * (1.0 + 1e-12)) break;
        if (stats.abs_mean_offdiag[k] <= 0.0) return std::nullopt;
        times.push_back(stats.times[k]);
        values.push_back(stats.abs_mean_offdiag[k]);
    }
    if (times.size() < 3) return std::nullopt;
    FitResult fit;
    try {
        fit = fit_decay_rate(times, values);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
    return FittedRate{fit.rate, fit.intercept, fit.r_squared, times.back()};
}

}  // namespace

void dispatch(const RunConfig& config) {
    switch (config.mode) {
        case Mode::Simulate: {
            const TrajectoryRecord record =
                run_trajectory(config.rho0, *config.t_end, *config.dt, config.sys, config.det,
                               *config.seed, config.scheme, 0, config.allow_large_dt);
            const std::string content = render_trajectory_output(record, config);
            write_output_file(config.out_path, content, config, OutputKind::Trajectory,
                              record.times.size());
            return;
        }
        case Mode::Ensemble: {
            const EnsembleStats stats =
                run_ensemble(config.rho0, *config.t_end, *config.dt, config.sys, config.det,
                             *config.seed, *config.n_traj, config.scheme, config.workers,
                             config.allow_large_dt);
            const std::string content =
                render_ensemble_output(stats, config, ensemble_fit(stats, config));
            write_output_file(config.out_path, content, config, OutputKind::Ensemble,
                              stats.times.size());
            return;
        }
        case Mode::Recover: {
            const RecoveryReport report = measurement_then_recovery(
                *config.t_end, *config.dt, config.det, config.h_rec, config.sys.hbar,
                *config.seed);
            const std::string content = render_recovery_output(report, config);
            write_output_file(config.out_path, content, config, OutputKind::Recovery, 1);
            return;
        }
        case Mode::Purify: {
            const PurityTrace trace =
                purification_experiment(*config.t_end, *config.dt, config.sys, config.det,
                                        *config.seed, 0, config.allow_large_dt);
            const std::string content = render_purity_output(trace, config);
            write_output_file(config.out_path, content, config, OutputKind::Purity,
                              trace.times.size());
            return;
        }
    }
}

}  // namespace dqd
