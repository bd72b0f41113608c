#include "vmc/losses.hpp"

#include <cmath>
#include <exception>

#include "vmc/errors.hpp"
#include "vmc/metrics.hpp"
#include "vmc/model.hpp"
#include "vmc/steady_state.hpp"

namespace vmc {

namespace {

void require_nonnegative(const char* what, double v) {
    if (!(v >= 0.0)) throw InputError(std::string(what) + " must be >= 0");
}

}  // namespace

double inductor_dcr_loss(double i_rms, double dcr, int count) {
    require_nonnegative("i_rms", i_rms);
    require_nonnegative("dcr", dcr);
    if (count < 0) throw InputError("count must be >= 0");
    return count * i_rms * i_rms * dcr;
}

double switch_conduction_loss(double r_ds_on, double i_s1_rms, double i_s2_rms) {
    require_nonnegative("r_ds_on", r_ds_on);
    require_nonnegative("i_s1_rms", i_s1_rms);
    require_nonnegative("i_s2_rms", i_s2_rms);
    return r_ds_on * i_s1_rms * i_s1_rms + r_ds_on * i_s2_rms * i_s2_rms;
}

double switch_switching_loss(double v_s, double i_l_avg, double t_on, double t_off, double f_sw) {
    require_nonnegative("v_s", v_s);
    require_nonnegative("i_l_avg", i_l_avg);
    require_nonnegative("t_on", t_on);
    require_nonnegative("t_off", t_off);
    require_nonnegative("f_sw", f_sw);
    return v_s * i_l_avg * (t_on + t_off) * f_sw / 2.0;
}

double diode_conduction_loss(double v_f, double i_d_avg, int diode_count) {
    require_nonnegative("v_f", v_f);
    require_nonnegative("i_d_avg", i_d_avg);
    if (diode_count < 0) throw InputError("diode_count must be >= 0");
    return diode_count * v_f * i_d_avg;
}

double capacitor_esr_loss(const std::vector<double>& i_c_rms, double esr) {
    require_nonnegative("esr", esr);
    double total = 0.0;
    for (double i : i_c_rms) {
        require_nonnegative("i_c_rms", i);
        total += i * i * esr;
    }
    return total;
}

LossReport loss_breakdown(const ConverterParams& params, const SteadyStateResult& steady) {
    if (!steady.converged) {
        throw PreconditionError("loss_breakdown requires a converged steady-state result");
    }
    const Parasitics& q = params.parasitics;
    const WaveformSet& w = steady.final_cycle;
    LossReport r;

    for (const char* name : {"iL1", "iL2"}) {
        r.p_inductor_dcr += inductor_dcr_loss(column_metrics(w, name).rms, q.dcr, 1);
    }
    r.p_switch_conduction = switch_conduction_loss(q.r_ds_on, column_metrics(w, "is1").rms,
                                                   column_metrics(w, "is2").rms);
    const StressReport stress = stress_report(w);
    for (int k = 0; k < 2; ++k) {
        const double i_l = std::max(0.0, w.exact_mean(k == 0 ? "iL1" : "iL2"));
        r.p_switch_switching += switch_switching_loss(stress.switches[k].peak_voltage, i_l, q.t_on,
                                                      q.t_off, params.f_sw);
    }
    for (const auto& d : stress.diodes) {
        r.p_diode += diode_conduction_loss(q.v_f, std::max(0.0, d.mean_current), 1);
    }
    std::vector<double> cap_rms;
    for (const char* name : {"ic1", "ic2", "ic3", "ic4", "icout"}) {
        if (w.has(name)) cap_rms.push_back(column_metrics(w, name).rms);
    }
    r.p_capacitor_esr = capacitor_esr_loss(cap_rms, q.esr);

    r.p_total = r.p_inductor_dcr + r.p_switch_conduction + r.p_switch_switching + r.p_diode +
                r.p_capacitor_esr;
    const std::map<std::string, double> items = {{"inductor_dcr", r.p_inductor_dcr},
                                                 {"switch_conduction", r.p_switch_conduction},
                                                 {"switch_switching", r.p_switch_switching},
                                                 {"diode", r.p_diode},
                                                 {"capacitor_esr", r.p_capacitor_esr}};
    r.lossless = r.p_total == 0.0;
    for (const auto& [name, value] : items) {
        r.shares[name] = r.lossless ? 0.0 : value / r.p_total;
    }

    const double vout_rms = column_metrics(w, "vout").rms;
    r.p_out = vout_rms * vout_rms / params.r_load;
    const Parasitics& dyn = steady.dynamics_parasitics;
    r.parasitics_in_dynamics = dyn.r_ds_on > 0.0 || dyn.v_f > 0.0 || dyn.dcr > 0.0 || dyn.esr > 0.0;
    if (r.parasitics_in_dynamics) {
        r.p_in = params.v_in * w.exact_mean("iin");
        const double denom = r.p_in + r.p_switch_switching;
        r.efficiency = denom > 0.0 ? r.p_out / denom : 1.0;
    } else {
        r.efficiency = r.lossless ? 1.0 : r.p_out / (r.p_out + r.p_total);
    }
    return r;
}

LossReport evaluate_losses(const ConverterParams& params, const SimConfig& config) {
    ConverterParams ideal = params;
    ideal.parasitics = Parasitics::ideal();
    const SwitchedModel model = build_proposed_converter(ideal);
    const GateSchedule schedule = gate_schedule(params.duty, params.f_sw);
    const SteadyStateResult steady = run_to_steady_state(model, schedule, ideal, config);
    return loss_breakdown(params, steady);
}

SimConfig sweep_config() {
    SimConfig config;
    config.initial = InitialState::AnalyticPreload;
    config.steady_tol = 1e-6;
    config.max_cycles = 300000;
    return config;
}

namespace {

SweepPoint sweep_point(const ConverterParams& params, double p_out, const SimConfig& config) {
    SweepPoint point;
    point.p_out = p_out;
    if (!(p_out > 0.0) || !std::isfinite(p_out)) {
        point.warning = "skipped: output power must be > 0";
        return point;
    }
    try {
        const double v_out = output_voltage(params.v_in, params.duty);
        ConverterParams p = params;
        p.r_load = v_out * v_out / p_out;
        point.r_load = p.r_load;
        point.efficiency = evaluate_losses(p, config).efficiency;
        point.ok = true;
    } catch (const std::exception& e) {
        point.warning = std::string("skipped: ") + e.what();
    }
    return point;
}

}  // namespace

std::vector<SweepPoint> efficiency_sweep(const ConverterParams& params,
                                         const std::vector<double>& p_out_range,
                                         const SimConfig& config) {
    std::vector<SweepPoint> out(p_out_range.size());
    const long n = static_cast<long>(p_out_range.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        out[idx] = sweep_point(params, p_out_range[idx], config);
    }
    return out;
}

std::vector<SweepPoint> efficiency_sweep_serial(const ConverterParams& params,
                                                const std::vector<double>& p_out_range,
                                                const SimConfig& config) {
    std::vector<SweepPoint> out;
    out.reserve(p_out_range.size());
    for (double p : p_out_range) out.push_back(sweep_point(params, p, config));
    return out;
}

}  // namespace vmc
