#include "vmc/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vmc/errors.hpp"
#include "vmc/model.hpp"

namespace vmc {

namespace {

void require_region(double duty) {
    if (!(duty > 0.5 && duty < 1.0)) {
        throw RegionError("duty must satisfy 0.5 < duty < 1 for three-mode operation, got " +
                          std::to_string(duty));
    }
}

}  // namespace

double output_voltage(double v_in, double duty) {
    require_region(duty);
    return v_in * 4.0 / (1.0 - duty);
}

std::array<double, 4> capacitor_voltages(double v_in, double duty) {
    require_region(duty);
    const double low = v_in / (1.0 - duty);
    const double high = 2.0 * v_in / (1.0 - duty);
    return {high, low, low, high};
}

double switch_stress(double v_in, double duty) {
    require_region(duty);
    return v_in / (1.0 - duty);
}

double diode_stress(double v_in, double duty) {
    require_region(duty);
    return 2.0 * v_in / (1.0 - duty);
}

double avg_inductor_current(double i_out, double duty) {
    require_region(duty);
    if (i_out < 0.0) throw InputError("i_out must be >= 0");
    return 2.0 * i_out / (1.0 - duty);
}

double inductor_ripple(double v_in, double duty, double l, double f_sw) {
    require_region(duty);
    if (!(l > 0.0) || !(f_sw > 0.0)) throw InputError("l and f_sw must be > 0");
    if (std::isinf(l)) return 0.0;
    return v_in * duty / (l * f_sw);
}

double input_ripple_estimate(const ConverterParams& params) {
    const GateSchedule schedule = gate_schedule(params.duty, params.f_sw);
    const double v_c2 = switch_stress(params.v_in, params.duty);
    const double on1 = params.v_in / params.l1;
    const double on2 = params.v_in / params.l2;
    const double off1 = (params.v_in - v_c2) / params.l1;
    const double off2 = (params.v_in - v_c2) / params.l2;

    double level = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& tile : schedule.tiles) {
        double slope = 0.0;
        switch (tile.mode) {
            case ModeId::I: slope = on1 + on2; break;
            case ModeId::II: slope = off1 + on2; break;
            case ModeId::III: slope = on1 + off2; break;
        }
        level += slope * tile.duration;
        lo = std::min(lo, level);
        hi = std::max(hi, level);
    }
    return hi - lo;
}

OperatingPoint analytic_operating_point(const ConverterParams& params) {
    validate_params(params);
    const double d = params.duty;
    OperatingPoint op;
    op.v_out = output_voltage(params.v_in, d);
    const auto caps = capacitor_voltages(params.v_in, d);
    op.v_c1 = caps[0];
    op.v_c2 = caps[1];
    op.v_c3 = caps[2];
    op.v_c4 = caps[3];
    op.v_sw = switch_stress(params.v_in, d);
    op.v_d = diode_stress(params.v_in, d);
    op.i_out = op.v_out / params.r_load;
    op.p_out = op.v_out * op.i_out;
    op.i_l_avg = avg_inductor_current(op.i_out, d);
    op.i_in_avg = params.v_in > 0.0 ? op.p_out / params.v_in : 0.0;
    op.delta_i_l = inductor_ripple(params.v_in, d, params.l1, params.f_sw);
    op.delta_i_in = input_ripple_estimate(params);
    return op;
}

double solve_duty(double v_in, double v_out_target) {
    if (!(v_in > 0.0)) throw InputError("v_in must be > 0");
    if (!(v_out_target > 8.0 * v_in)) {
        throw InfeasibleTarget("target " + std::to_string(v_out_target) +
                               " V is not reachable: three-mode operation needs a gain above 8 "
                               "(minimum output above " +
                               std::to_string(8.0 * v_in) + " V)");
    }
    return 1.0 - 4.0 * v_in / v_out_target;
}

}  // namespace vmc
