#pragma once

#include "vmc/model.hpp"
#include "vmc/params.hpp"
#include "vmc/sim.hpp"

namespace vmc::testing {

/// Reference design with ideal devices, run to steady state once per test binary.
struct IdealSteadyState {
    ConverterParams params;
    SwitchedModel model;
    GateSchedule schedule;
    SteadyStateResult result;
};

inline const IdealSteadyState& ideal_steady_state() {
    static const IdealSteadyState fixture = [] {
        IdealSteadyState f;
        f.params = ideal_params();
        f.model = build_proposed_converter(f.params);
        f.schedule = gate_schedule(f.params.duty, f.params.f_sw);
        SimConfig config;
        config.initial = InitialState::AnalyticPreload;
        f.result = run_to_steady_state(f.model, f.schedule, f.params, config);
        return f;
    }();
    return fixture;
}

/// Period-boundary state at the start of the recorded steady-state cycle.
inline Eigen::VectorXd cycle_start_state(const SwitchedModel& model, const WaveformSet& w) {
    Eigen::VectorXd x(model.state_dim);
    for (int i = 0; i < model.state_dim; ++i) {
        x(i) = w.column(model.state_names[static_cast<std::size_t>(i)]).front();
    }
    return x;
}

}  // namespace vmc::testing
