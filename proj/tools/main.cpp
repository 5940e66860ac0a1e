#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dqd/cli.hpp"
#include "dqd/io.hpp"
#include "json.hpp"

namespace {

// Machine-readable failure record on stderr, one line, mirroring the exit
// code so callers need not parse prose.
int report_error(const char* family, const std::string& message, int exit_code) {
    nlohmann::json record;
    record["error"] = family;
    record["message"] = message;
    record["exit_code"] = exit_code;
    std::fprintf(stderr, "%s\n", record.dump().c_str());
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic simulator of a monitored double-dot qubit"};

    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::string> mode;
    std::optional<std::string> scheme;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n_traj;
    std::optional<std::uint64_t> workers;
    std::optional<double> dt;
    std::optional<double> t_end;
    bool allow_large_dt = false;

    app.add_option("--config", config_path, "path to a key = value config file");
    app.add_option("--preset", preset, "scenario preset: fig1, fig2-c0.3, fig2-c3, fig2-c30");
    app.add_option("--mode", mode, "simulate, ensemble, recover or purify");
    app.add_option("--seed", seed, "master seed for the random stream family");
    app.add_option("--n-traj", n_traj, "trajectories per ensemble");
    app.add_option("--dt", dt, "integration step");
    app.add_option("--t-end", t_end, "simulated time span (measurement time in recover mode)");
    app.add_option("--scheme", scheme, "integration scheme: bayes or euler");
    app.add_option("--workers", workers, "worker threads for ensemble mode (0 = hardware)");
    app.add_option("--out", out_path, "output file path");
    app.add_option("--format", format, "output format: csv or json");
    app.add_flag("--allow-large-dt", allow_large_dt,
                 "run the split scheme beyond its accuracy-gated step bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) {
            return app.exit(err);  // --help
        }
        return report_error("config", err.what(), 2);
    }

    std::vector<dqd::KeyValue> overrides;
    const auto push = [&overrides](const char* key, const std::string& value) {
        overrides.push_back({key, value, 0});
    };
    if (preset) push("preset", *preset);
    if (mode) push("run.mode", *mode);
    if (seed) push("run.seed", std::to_string(*seed));
    if (n_traj) push("run.n_traj", std::to_string(*n_traj));
    if (dt) push("run.dt", dqd::fmt17(*dt));
    if (t_end) push("run.t_end", dqd::fmt17(*t_end));
    if (scheme) push("run.scheme", *scheme);
    if (workers) push("run.workers", std::to_string(*workers));
    if (out_path) push("output.path", *out_path);
    if (format) push("output.format", *format);
    if (allow_large_dt) push("run.allow_large_dt", "true");

    try {
        const dqd::RunConfig config = dqd::load_config(config_path, overrides);
        dqd::dispatch(config);
        return 0;
    } catch (const dqd::ConfigError& err) {
        return report_error("config", err.what(), 2);
    } catch (const dqd::ValidationError& err) {
        return report_error("validation", err.what(), 2);
    } catch (const dqd::NumericalError& err) {
        return report_error("numerical", err.what(), 3);
    } catch (const dqd::ProtocolError& err) {
        return report_error("protocol", err.what(), 4);
    } catch (const std::exception& err) {
        return report_error("internal", err.what(), 1);
    }
}
