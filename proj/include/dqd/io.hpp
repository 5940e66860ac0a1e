#pragma once

#include <optional>
#include <string>

#include "dqd/cli.hpp"
#include "dqd/ensemble.hpp"
#include "dqd/protocols.hpp"
#include "dqd/trajectory.hpp"

namespace dqd {

// Doubles rendered with 17 significant digits, enough to reproduce the exact
// bit pattern when parsed back.
std::string fmt17(double value);

// Log-linear decay fit of |E[sigma12]|(t) over t <= t_max, attached to
// ensemble outputs.
struct FittedRate {
    double rate = 0.0;
    double log_intercept = 0.0;
    double r_squared = 0.0;
    double t_max = 0.0;
};

// Renderers produce the full output file contents in the format selected by
// config.format. Every output embeds the resolved config: as `# key = value`
// comment lines in CSV, as a "config" object in JSON.
std::string render_trajectory_output(const TrajectoryRecord& record, const RunConfig& config);
std::string render_ensemble_output(const EnsembleStats& stats, const RunConfig& config,
                                   const std::optional<FittedRate>& fitted);
std::string render_recovery_output(const RecoveryReport& report, const RunConfig& config);
std::string render_purity_output(const PurityTrace& trace, const RunConfig& config);

enum class OutputKind { Trajectory, Ensemble, Recovery, Purity };

// Structural re-parse of rendered content: exact header / required keys,
// counted rows, every cell numeric. Throws Error on any mismatch; used as
// the post-write self check.
void self_validate(const std::string& content, const RunConfig& config, OutputKind kind,
                   std::size_t expected_rows);

// Writes content to path, reads it back and self-validates it.
void write_output_file(const std::string& path, const std::string& content,
                       const RunConfig& config, OutputKind kind, std::size_t expected_rows);

}  // namespace dqd
