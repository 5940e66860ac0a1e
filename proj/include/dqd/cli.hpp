#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqd/model.hpp"
#include "dqd/trajectory.hpp"

namespace dqd {

enum class Mode {
    Simulate,  // one trajectory
    Ensemble,  // many-trajectory statistics
    Recover,   // measure, then steer the state back to dot 1
    Purify,    // purity-defect trace from the fully mixed state
};

enum class OutputFormat { Csv, Json };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);  // throws ParseError
std::string to_string(OutputFormat format);
OutputFormat format_from_string(const std::string& name);  // throws ParseError

// A fully resolved run description. Optionals mark values that have no
// sensible default and must come from a preset, the config file or a flag.
struct RunConfig {
    Mode mode = Mode::Simulate;
    SystemParams sys;
    DetectorParams det;
    DensityMatrix rho0;
    std::optional<std::uint64_t> seed;
    Scheme scheme = Scheme::BayesSplit;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<std::size_t> n_traj;
    unsigned workers = 1;
    bool allow_large_dt = false;
    double h_rec = 1.0;  // recovery pulse coupling (recover mode)
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    std::optional<std::string> preset;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// One `key = value` assignment plus where it came from (config file line
// number, or 0 for command-line flags).
struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

// Parses the flat `key = value` config format. `#` starts a comment, blank
// lines are skipped, later assignments win. Throws ParseError with the line
// number for anything else.
std::vector<KeyValue> parse_config_text(const std::string& text);

// Assignments made by a named scenario preset. Throws ParseError for an
// unknown name.
std::vector<KeyValue> preset_values(const std::string& name);

// Builds a validated RunConfig from defaults, then the preset named in the
// entries (if any), then the file entries, then the override entries, in
// that precedence order. Throws MissingField for absent required values,
// ParseError for malformed ones and ValidationError for rejected parameters.
RunConfig resolve_config(std::span<const KeyValue> file_entries,
                         std::span<const KeyValue> overrides);

// resolve_config over the parsed contents of path (no file when path is
// empty). Throws ConfigError if the file cannot be read.
RunConfig load_config(const std::optional<std::string>& path,
                      std::span<const KeyValue> overrides);

// Canonical text form; load_config(write_config(c)) reproduces c exactly.
std::string write_config(const RunConfig& config);

// Runs the configured mode and writes the output file. Throws on failure;
// the caller maps exception families to exit codes.
void dispatch(const RunConfig& config);

}  // namespace dqd
