#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vmc/params.hpp"
#include "vmc/sim.hpp"

namespace vmc::cli {

/// Everything one command invocation needs. Field names double as JSON keys and flag names.
struct RunConfig {
    ConverterParams converter;
    SimConfig sim;
    bool parasitic_dynamics = false;  ///< embed resistive parasitics in the simulated matrices
    double target_v_out = 480.0;      ///< design target [V]
    double margin = 0.25;             ///< design rating margin (fraction above stress)
    double p_min = 50.0;              ///< sweep start [W]
    double p_max = 360.0;             ///< sweep end [W]
    int points = 20;                  ///< sweep point count
    double sweep_steady_tol = 1e-6;
    long sweep_max_cycles = 300000;
    std::string out_dir = ".";
    bool emit_waveforms = true;
    bool emit_summary = true;
    bool emit_sweep = true;

    RunConfig();
};

/// Flat field names accepted in config files and as --flags.
const std::vector<std::string>& config_fields();

/// Sets one field from its textual value; throws ConfigError on unknown names or bad values.
void set_field(RunConfig& config, const std::string& field, const std::string& value);

/// Reads a flat JSON object of field values on top of the defaults.
RunConfig load_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

/// Validates converter, simulation and command settings; throws ConfigError.
void validate_run_config(const RunConfig& config);

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigError = 1, kValidationError = 2, kNotConverged = 3 };

int cmd_analyze(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_design(const RunConfig& config, std::ostream& log);
int cmd_losses(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Parses argv and dispatches; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Column order of the waveform CSV.
const std::vector<std::string>& waveform_csv_columns();

/// Published JSON schema of summary.json.
const std::string& summary_schema();

/// Shortest round-trip decimal text of a double.
std::string format_number(double value);

}  // namespace vmc::cli
