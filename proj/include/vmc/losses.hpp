#pragma once

#include <map>
#include <string>
#include <vector>

#include "vmc/params.hpp"
#include "vmc/sim.hpp"

namespace vmc {

struct LossReport {
    double p_inductor_dcr = 0.0;
    double p_switch_conduction = 0.0;
    double p_switch_switching = 0.0;
    double p_diode = 0.0;
    double p_capacitor_esr = 0.0;
    double p_total = 0.0;
    std::map<std::string, double> shares;  ///< category -> fraction of p_total
    double p_out = 0.0;                    ///< simulated output power
    double p_in = 0.0;                     ///< simulated input power (0 when not meaningful)
    double efficiency = 1.0;
    bool lossless = false;
    bool parasitics_in_dynamics = false;
};

/// count * i_rms^2 * dcr
double inductor_dcr_loss(double i_rms, double dcr, int count = 2);
/// r_ds_on * (i_s1_rms^2 + i_s2_rms^2)
double switch_conduction_loss(double r_ds_on, double i_s1_rms, double i_s2_rms);
/// v_s * i_l_avg * (t_on + t_off) * f_sw / 2 for one switch
double switch_switching_loss(double v_s, double i_l_avg, double t_on, double t_off, double f_sw);
/// diode_count * v_f * i_d_avg
double diode_conduction_loss(double v_f, double i_d_avg, int diode_count = 4);
/// sum of i_c_rms^2 * esr
double capacitor_esr_loss(const std::vector<double>& i_c_rms, double esr);

/// Itemized losses from the currents of a converged steady state. Efficiency is
/// P_out / (P_in + switching loss) when the run embedded parasitics in its dynamics,
/// otherwise p_out / (p_out + p_total).
LossReport loss_breakdown(const ConverterParams& params, const SteadyStateResult& steady);

/// Simulates the ideal-dynamics steady state and applies the parasitics of params to it.
LossReport evaluate_losses(const ConverterParams& params, const SimConfig& config);

struct SweepPoint {
    double p_out = 0.0;
    double r_load = 0.0;
    double efficiency = 0.0;
    bool ok = false;
    std::string warning;
};

/// Settling settings for load sweeps: analytic preload, steady_tol 1e-6 and a cycle budget
/// sized for the slow settling of lightly loaded points.
SimConfig sweep_config();

/// Efficiency at each requested output power (fixed duty, r_load = v_out^2 / p_out),
/// one OpenMP task per point.
std::vector<SweepPoint> efficiency_sweep(const ConverterParams& params,
                                         const std::vector<double>& p_out_range,
                                         const SimConfig& config);
/// Sequential reference for efficiency_sweep.
std::vector<SweepPoint> efficiency_sweep_serial(const ConverterParams& params,
                                                const std::vector<double>& p_out_range,
                                                const SimConfig& config);

}  // namespace vmc
