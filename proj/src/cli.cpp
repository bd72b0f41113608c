#include "vmc/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "vmc/errors.hpp"
#include "vmc/losses.hpp"
#include "vmc/metrics.hpp"
#include "vmc/model.hpp"
#include "vmc/steady_state.hpp"
#include "vmc_summary_schema.hpp"

namespace vmc::cli {

using json = nlohmann::json;

namespace {

double parse_double(const std::string& field, const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ConfigError(field, "expected a finite number, got '" + text + "'");
    }
    return value;
}

long parse_count(const std::string& field, const std::string& text) {
    const double value = parse_double(field, text);
    if (value != std::floor(value) || std::abs(value) > 1e15) {
        throw ConfigError(field, "expected an integer, got '" + text + "'");
    }
    return static_cast<long>(value);
}

bool parse_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(field, "expected true or false, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

Setter number(double RunConfig::*member) {
    return [member](RunConfig& c, const std::string& v) { c.*member = parse_double("", v); };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = [] {
        std::vector<std::pair<std::string, Setter>> t;
        auto conv = [&t](const std::string& name, double ConverterParams::*m) {
            t.emplace_back(name, [name, m](RunConfig& c, const std::string& v) {
                c.converter.*m = parse_double(name, v);
            });
        };
        auto para = [&t](const std::string& name, double Parasitics::*m) {
            t.emplace_back(name, [name, m](RunConfig& c, const std::string& v) {
                c.converter.parasitics.*m = parse_double(name, v);
            });
        };
        conv("v_in", &ConverterParams::v_in);
        conv("duty", &ConverterParams::duty);
        conv("f_sw", &ConverterParams::f_sw);
        conv("l1", &ConverterParams::l1);
        conv("l2", &ConverterParams::l2);
        conv("c1", &ConverterParams::c1);
        conv("c2", &ConverterParams::c2);
        conv("c3", &ConverterParams::c3);
        conv("c4", &ConverterParams::c4);
        conv("c_out", &ConverterParams::c_out);
        conv("r_load", &ConverterParams::r_load);
        para("r_ds_on", &Parasitics::r_ds_on);
        para("v_f", &Parasitics::v_f);
        para("dcr", &Parasitics::dcr);
        para("esr", &Parasitics::esr);
        para("t_on", &Parasitics::t_on);
        para("t_off", &Parasitics::t_off);
        t.emplace_back("samples_per_period", [](RunConfig& c, const std::string& v) {
            c.sim.samples_per_period = static_cast<int>(parse_count("samples_per_period", v));
        });
        t.emplace_back("max_cycles", [](RunConfig& c, const std::string& v) {
            c.sim.max_cycles = parse_count("max_cycles", v);
        });
        t.emplace_back("steady_tol", [](RunConfig& c, const std::string& v) {
            c.sim.steady_tol = parse_double("steady_tol", v);
        });
        t.emplace_back("initial", [](RunConfig& c, const std::string& v) {
            if (v == "zero") {
                c.sim.initial = InitialState::Zero;
            } else if (v == "analytic-preload") {
                c.sim.initial = InitialState::AnalyticPreload;
            } else {
                throw ConfigError("initial", "expected 'zero' or 'analytic-preload', got '" + v + "'");
            }
        });
        t.emplace_back("parasitic_dynamics", [](RunConfig& c, const std::string& v) {
            c.parasitic_dynamics = parse_bool("parasitic_dynamics", v);
        });
        t.emplace_back("target_v_out", number(&RunConfig::target_v_out));
        t.emplace_back("margin", number(&RunConfig::margin));
        t.emplace_back("p_min", number(&RunConfig::p_min));
        t.emplace_back("p_max", number(&RunConfig::p_max));
        t.emplace_back("points", [](RunConfig& c, const std::string& v) {
            c.points = static_cast<int>(parse_count("points", v));
        });
        t.emplace_back("sweep_steady_tol", number(&RunConfig::sweep_steady_tol));
        t.emplace_back("sweep_max_cycles", [](RunConfig& c, const std::string& v) {
            c.sweep_max_cycles = parse_count("sweep_max_cycles", v);
        });
        return t;
    }();
    return table;
}

std::string initial_name(InitialState s) {
    switch (s) {
        case InitialState::Zero: return "zero";
        case InitialState::AnalyticPreload: return "analytic-preload";
        case InitialState::Explicit: return "explicit";
    }
    return "zero";
}

json config_json(const RunConfig& c) {
    const ConverterParams& p = c.converter;
    const Parasitics& q = p.parasitics;
    return json{{"v_in", p.v_in},
                {"duty", p.duty},
                {"f_sw", p.f_sw},
                {"l1", p.l1},
                {"l2", p.l2},
                {"c1", p.c1},
                {"c2", p.c2},
                {"c3", p.c3},
                {"c4", p.c4},
                {"c_out", p.c_out},
                {"r_load", p.r_load},
                {"r_ds_on", q.r_ds_on},
                {"v_f", q.v_f},
                {"dcr", q.dcr},
                {"esr", q.esr},
                {"t_on", q.t_on},
                {"t_off", q.t_off},
                {"samples_per_period", c.sim.samples_per_period},
                {"max_cycles", c.sim.max_cycles},
                {"steady_tol", c.sim.steady_tol},
                {"initial", initial_name(c.sim.initial)},
                {"parasitic_dynamics", c.parasitic_dynamics},
                {"target_v_out", c.target_v_out},
                {"margin", c.margin},
                {"p_min", c.p_min},
                {"p_max", c.p_max},
                {"points", c.points},
                {"sweep_steady_tol", c.sweep_steady_tol},
                {"sweep_max_cycles", c.sweep_max_cycles}};
}

json operating_point_json(const OperatingPoint& op) {
    return json{{"v_out", op.v_out},       {"v_c1", op.v_c1},         {"v_c2", op.v_c2},
                {"v_c3", op.v_c3},         {"v_c4", op.v_c4},         {"v_sw", op.v_sw},
                {"v_d", op.v_d},           {"i_out", op.i_out},       {"i_l_avg", op.i_l_avg},
                {"i_in_avg", op.i_in_avg}, {"delta_i_l", op.delta_i_l}, {"delta_i_in", op.delta_i_in},
                {"p_out", op.p_out}};
}

json metrics_json(const PeriodicMetrics& m) {
    return json{{"mean", m.mean}, {"rms", m.rms}, {"ripple_pp", m.ripple_pp}, {"min", m.min},
                {"max", m.max}};
}

json devices_json(const std::vector<DeviceStress>& devices) {
    json out = json::array();
    for (const auto& d : devices) {
        out.push_back({{"device", d.device},
                       {"peak_voltage", d.peak_voltage},
                       {"mean_current", d.mean_current}});
    }
    return out;
}

json base_summary(const std::string& command, const RunConfig& config) {
    return json{{"schema_version", 1}, {"command", command}, {"config", config_json(config)}};
}

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec || !std::filesystem::is_directory(config.out_dir)) {
        throw ConfigError("out", "cannot create output directory '" + config.out_dir + "'");
    }
}

void write_text(const RunConfig& config, const std::string& name, const std::string& text) {
    const std::filesystem::path path = std::filesystem::path(config.out_dir) / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("out", "cannot write '" + path.string() + "'");
    f << text;
}

void write_summary(const RunConfig& config, const json& summary) {
    if (!config.emit_summary) return;
    ensure_out_dir(config);
    write_text(config, "summary.json", summary.dump(2) + "\n");
    write_text(config, "schema.json", summary_schema());
}

void write_waveforms(const RunConfig& config, const WaveformSet& w) {
    if (!config.emit_waveforms) return;
    ensure_out_dir(config);
    const auto& names = waveform_csv_columns();
    std::vector<const std::vector<double>*> cols;
    for (const auto& n : names) cols.push_back(&w.column(n));
    std::string text;
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) text += ',';
        text += names[j];
    }
    text += '\n';
    const double t_start = w.column("t").front();
    for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (j) text += ',';
            const double v = (*cols[j])[k];
            text += format_number(j == 0 ? v - t_start : v);
        }
        text += '\n';
    }
    write_text(config, "waveforms.csv", text);
}

ConverterParams dynamics_params(const RunConfig& config) {
    ConverterParams p = config.converter;
    if (!config.parasitic_dynamics) p.parasitics = Parasitics::ideal();
    return p;
}

/// Builds and validates the model; returns nullopt after logging when validation fails.
std::optional<SwitchedModel> checked_model(const ConverterParams& p, std::ostream& log) {
    SwitchedModel model = build_proposed_converter(p);
    const ValidationReport report = validate_model(model);
    if (!report.ok()) {
        for (const auto& f : report.failures()) log << "model validation failed: " << f << "\n";
        return std::nullopt;
    }
    return model;
}

}  // namespace

RunConfig::RunConfig() = default;

const std::vector<std::string>& config_fields() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, setter] : setters()) out.push_back(name);
        return out;
    }();
    return names;
}

void set_field(RunConfig& config, const std::string& field, const std::string& value) {
    for (const auto& [name, setter] : setters()) {
        if (name != field) continue;
        try {
            setter(config, value);
        } catch (const ConfigError& e) {
            if (!e.field().empty()) throw;
            throw ConfigError(field, "expected a finite number, got '" + value + "'");
        }
        return;
    }
    throw ConfigError(field, "unknown configuration field");
}

RunConfig parse_config_text(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
    RunConfig config;
    for (const auto& [key, value] : doc.items()) {
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_boolean()) {
            text = value.get<bool>() ? "true" : "false";
        } else if (value.is_number()) {
            text = format_number(value.get<double>());
        } else {
            throw ConfigError(key, "expected a number, string or boolean");
        }
        set_field(config, key, text);
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("config", "cannot read '" + path + "'");
    std::ostringstream buffer;
    buffer << f.rdbuf();
    return parse_config_text(buffer.str());
}

void validate_run_config(const RunConfig& config) {
    validate_params(config.converter);
    config.sim.validate();
    if (!(config.margin >= 0.0)) throw ConfigError("margin", "must be >= 0");
    if (!(config.target_v_out > 0.0)) throw ConfigError("target_v_out", "must be > 0");
    if (!(config.p_min > 0.0)) throw ConfigError("p_min", "must be > 0");
    if (!(config.p_max >= config.p_min)) throw ConfigError("p_max", "must be >= p_min");
    if (config.points < 1) throw ConfigError("points", "must be >= 1");
    if (!(config.sweep_steady_tol > 0.0)) throw ConfigError("sweep_steady_tol", "must be > 0");
    if (config.sweep_max_cycles < 1) throw ConfigError("sweep_max_cycles", "must be >= 1");
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
    const OperatingPoint op = analytic_operating_point(config.converter);
    json summary = base_summary("analyze", config);
    summary["operating_point"] = operating_point_json(op);
    write_summary(config, summary);
    log << "v_out " << format_number(op.v_out) << " V, v_sw " << format_number(op.v_sw)
        << " V, v_d " << format_number(op.v_d) << " V, i_l_avg " << format_number(op.i_l_avg)
        << " A\n";
    return kOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
    const ConverterParams p = dynamics_params(config);
    const auto model = checked_model(p, log);
    if (!model) return kValidationError;
    const GateSchedule schedule = gate_schedule(p.duty, p.f_sw);
    const SteadyStateResult result = run_to_steady_state(*model, schedule, p, config.sim);

    json summary = base_summary("simulate", config);
    summary["simulation"] = {{"converged", result.converged},
                             {"cycles_used", result.cycles_used},
                             {"last_change", result.last_change},
                             {"parasitic_dynamics", config.parasitic_dynamics}};
    const WaveformSet& w = result.final_cycle;
    json metrics = json::object();
    for (const auto& name : waveform_csv_columns()) {
        if (name != "t") metrics[name] = metrics_json(column_metrics(w, name));
    }
    summary["metrics"] = metrics;
    const StressReport stress = stress_report(w);
    summary["stress"] = {{"switches", devices_json(stress.switches)},
                         {"diodes", devices_json(stress.diodes)}};
    const BalanceReport balance = balance_checks(w, p);
    summary["balance"] = {{"volt_second", balance.volt_second}, {"charge", balance.charge},
                          {"power_residual", balance.power_residual}, {"p_in", balance.p_in},
                          {"p_out", balance.p_out}, {"p_loss", balance.p_loss}};
    std::size_t violations = 0;
    if (result.converged) violations = check_diode_consistency(*model, result).violations.size();
    summary["consistency"] = {{"checked", result.converged}, {"violations", violations}};
    if (violations > 0) {
        summary["warnings"] = json::array(
            {"conduction assumptions violated at " + std::to_string(violations) + " samples"});
    }
    write_summary(config, summary);
    write_waveforms(config, w);

    log << (result.converged ? "converged" : "not converged") << " after " << result.cycles_used
        << " cycles; mean vout " << format_number(column_metrics(w, "vout").mean) << " V\n";
    return result.converged ? kOk : kNotConverged;
}

int cmd_design(const RunConfig& config, std::ostream& log) {
    const double v_in = config.converter.v_in;
    const double duty = solve_duty(v_in, config.target_v_out);
    ConverterParams p = config.converter;
    p.duty = duty;
    const OperatingPoint op = analytic_operating_point(p);
    const double k = 1.0 + config.margin;
    const double i_peak = op.i_l_avg + 0.5 * op.delta_i_l;

    json summary = base_summary("design", config);
    summary["operating_point"] = operating_point_json(op);
    summary["design"] = {
        {"target_v_out", config.target_v_out},
        {"duty", duty},
        {"gain", op.v_out / v_in},
        {"margin", config.margin},
        {"ratings",
         {{"switch_voltage", k * op.v_sw},
          {"switch_current", k * i_peak},
          {"diode_voltage", k * op.v_d},
          {"diode_current", k * op.i_out},
          {"inductor_current", k * i_peak},
          {"capacitor_voltage", {k * op.v_c1, k * op.v_c2, k * op.v_c3, k * op.v_c4}}}}};
    write_summary(config, summary);
    log << "duty " << format_number(duty) << ", switch rating " << format_number(k * op.v_sw)
        << " V\n";
    return kOk;
}

int cmd_losses(const RunConfig& config, std::ostream& log) {
    {
        const auto model = checked_model(dynamics_params(config), log);
        if (!model) return kValidationError;
    }
    LossReport report;
    try {
        report = evaluate_losses(config.converter, config.sim);
    } catch (const PreconditionError& e) {
        log << "steady state not reached: " << e.what() << "\n";
        return kNotConverged;
    }
    json summary = base_summary("losses", config);
    summary["losses"] = {{"p_inductor_dcr", report.p_inductor_dcr},
                         {"p_switch_conduction", report.p_switch_conduction},
                         {"p_switch_switching", report.p_switch_switching},
                         {"p_diode", report.p_diode},
                         {"p_capacitor_esr", report.p_capacitor_esr},
                         {"p_total", report.p_total},
                         {"shares", report.shares},
                         {"p_out", report.p_out},
                         {"efficiency", report.efficiency},
                         {"lossless", report.lossless}};

    if (!report.lossless) {
        const ConverterParams& p = config.converter;
        const SwitchedModel lossy = build_proposed_converter(p);
        const SteadyStateResult steady =
            run_to_steady_state(lossy, gate_schedule(p.duty, p.f_sw), p, config.sim);
        json check = {{"converged", steady.converged}, {"cycles_used", steady.cycles_used}};
        if (steady.converged) {
            const LossReport dyn = loss_breakdown(p, steady);
            const double p_in = dyn.p_in + dyn.p_switch_switching;
            check["p_in"] = p_in;
            check["p_out"] = dyn.p_out;
            check["efficiency"] = dyn.efficiency;
            check["closure"] = p_in > 0.0 ? (p_in - dyn.p_out - dyn.p_total) / p_in : 0.0;
        } else {
            check["p_in"] = 0.0;
            check["p_out"] = 0.0;
            check["efficiency"] = 0.0;
            check["closure"] = 0.0;
            summary["warnings"] = json::array({"dynamic cross-check did not converge"});
        }
        summary["dynamic_check"] = check;
    }
    write_summary(config, summary);
    log << "efficiency " << format_number(report.efficiency) << ", total loss "
        << format_number(report.p_total) << " W\n";
    return kOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
    std::vector<double> powers;
    for (int k = 0; k < config.points; ++k) {
        const double f = config.points == 1 ? 0.0 : static_cast<double>(k) / (config.points - 1);
        powers.push_back(config.p_min + f * (config.p_max - config.p_min));
    }
    SimConfig sim = sweep_config();
    sim.samples_per_period = config.sim.samples_per_period;
    sim.steady_tol = config.sweep_steady_tol;
    sim.max_cycles = config.sweep_max_cycles;
    const std::vector<SweepPoint> points = efficiency_sweep(config.converter, powers, sim);

    json summary = base_summary("sweep", config);
    json rows = json::array();
    json warnings = json::array();
    std::string csv = "p_out,efficiency\n";
    for (const auto& pt : points) {
        json row = {{"p_out", pt.p_out}, {"r_load", pt.r_load}, {"efficiency", pt.efficiency},
                    {"ok", pt.ok}};
        if (!pt.warning.empty()) {
            row["warning"] = pt.warning;
            warnings.push_back(format_number(pt.p_out) + " W " + pt.warning);
        }
        rows.push_back(row);
        if (pt.ok) csv += format_number(pt.p_out) + "," + format_number(pt.efficiency) + "\n";
    }
    summary["sweep"] = rows;
    if (!warnings.empty()) summary["warnings"] = warnings;
    write_summary(config, summary);
    if (config.emit_sweep) {
        ensure_out_dir(config);
        write_text(config, "sweep.csv", csv);
    }
    log << points.size() - warnings.size() << " of " << points.size() << " points evaluated\n";
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interleaved high step-up converter with voltage multiplier cells"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    bool lossless = false;
    std::map<std::string, std::string> overrides;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"analyze", "closed-form operating point"},
        {"simulate", "time-domain steady state with waveform CSV"},
        {"design", "duty cycle and device ratings for target_v_out"},
        {"losses", "loss breakdown and efficiency"},
        {"sweep", "efficiency versus output power"}};
    for (const auto& [name, description] : commands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "flat JSON configuration file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--lossless", lossless, "set every parasitic to zero");
        for (const auto& field : config_fields()) {
            sub->add_option_function<std::string>(
                "--" + field, [&overrides, field](const std::string& v) { overrides[field] = v; },
                "override " + field);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config_file(config_path);
        for (const auto& [field, value] : overrides) set_field(config, field, value);
        if (lossless) config.converter.parasitics = Parasitics::ideal();
        config.out_dir = out_dir;
        validate_run_config(config);
        if (command == "analyze") return cmd_analyze(config, out);
        if (command == "simulate") return cmd_simulate(config, out);
        if (command == "design") return cmd_design(config, out);
        if (command == "losses") return cmd_losses(config, out);
        return cmd_sweep(config, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const RegionError& e) {
        err << "region error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InfeasibleTarget& e) {
        err << "infeasible target: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

const std::vector<std::string>& waveform_csv_columns() {
    static const std::vector<std::string> names = {
        "t",    "iL1",  "iL2", "vC1", "vC2", "vC3", "vC4", "vout", "iin", "vsw1",
        "vsw2", "vd1",  "vd2", "vd3", "vd4", "id1", "id2", "id3",  "id4"};
    return names;
}

const std::string& summary_schema() {
    static const std::string text = detail::kSummarySchema;
    return text;
}

std::string format_number(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) return "nan";
    return std::string(buffer, ptr);
}

}  // namespace vmc::cli
