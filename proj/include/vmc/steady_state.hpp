#pragma once

#include <array>

#include "vmc/params.hpp"

namespace vmc {

/// Ideal (lossless) steady-state quantities.
struct OperatingPoint {
    double v_out = 0.0;
    double v_c1 = 0.0;
    double v_c2 = 0.0;
    double v_c3 = 0.0;
    double v_c4 = 0.0;
    double v_sw = 0.0;
    double v_d = 0.0;
    double i_out = 0.0;
    double i_l_avg = 0.0;
    double i_in_avg = 0.0;
    double delta_i_l = 0.0;
    double delta_i_in = 0.0;
    double p_out = 0.0;
};

double output_voltage(double v_in, double duty);
std::array<double, 4> capacitor_voltages(double v_in, double duty);
double switch_stress(double v_in, double duty);
double diode_stress(double v_in, double duty);
double avg_inductor_current(double i_out, double duty);
/// Peak-to-peak ripple v_in*D/(L*f) of one inductor.
double inductor_ripple(double v_in, double duty, double l, double f_sw);
/// Peak-to-peak ripple of i_L1 + i_L2 from piecewise-linear inductor currents.
double input_ripple_estimate(const ConverterParams& params);
OperatingPoint analytic_operating_point(const ConverterParams& params);
/// Duty giving v_out_target; throws InfeasibleTarget when the gain is 8 or less.
double solve_duty(double v_in, double v_out_target);

}  // namespace vmc
