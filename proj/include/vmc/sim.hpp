#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "vmc/model.hpp"
#include "vmc/params.hpp"

namespace vmc {

enum class InitialState { Zero, AnalyticPreload, Explicit };

struct SimConfig {
    int samples_per_period = 1000;      ///< recording grid, >= 64
    int settle_steps_per_period = 64;   ///< stepping grid while iterating towards steady state
    long max_cycles = 60000;
    double steady_tol = 1e-8;
    InitialState initial = InitialState::Zero;
    Eigen::VectorXd initial_vector;     ///< used when initial == Explicit
    double event_tol_v = 1e-9;          ///< overdrive beyond v_f that turns an allowed diode on [V]
    double event_tol_i = 1e-7;          ///< reverse current that turns a diode off [A]
    int max_events_per_tile = 256;

    void validate() const;
};

/// Sampled signals. Column "t" holds absolute sample times; sample k was taken with
/// modes[k] active and the diodes in diode_masks[k] (bit j = D(j+1)) conducting.
struct WaveformSet {
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<ModeId> modes;
    std::vector<unsigned> diode_masks;
    /// Exact time integral of each column over the recorded span ("t" holds the span
    /// length), accumulated from the propagator integrals rather than from the samples.
    std::vector<double> integrals;

    std::size_t size() const { return modes.size(); }
    bool has(const std::string& name) const;
    /// Throws InputError naming a missing column.
    const std::vector<double>& column(const std::string& name) const;
    /// Exact mean of a column over the recorded span.
    double exact_mean(const std::string& name) const;
};

struct SteadyStateResult {
    bool converged = false;
    long cycles_used = 0;
    double last_change = 0.0;
    WaveformSet final_cycle;          ///< one period, both endpoints included
    Eigen::VectorXd state_snapshot;   ///< state at the end of the last iterated period
    Parasitics dynamics_parasitics;   ///< parasitics embedded in the simulated model
};

/// Exact propagators exp(Aug*dt) of the augmented system z = [x; v_in; 1].
class PropagatorCache {
public:
    explicit PropagatorCache(const SwitchedModel& model) : model_(&model) {}
    const Eigen::MatrixXd& get(ModeId mode, std::size_t config, double dt);

private:
    const SwitchedModel* model_;
    std::map<std::tuple<int, std::size_t, std::uint64_t>, Eigen::MatrixXd> cache_;
};

/// Augmented generator for one configuration.
Eigen::MatrixXd augmented_generator(const SwitchedModel& model, ModeId mode, std::size_t config);

/// Advances x by dt under the full conduction set of a mode.
Eigen::VectorXd step_mode(const SwitchedModel& model, ModeId mode, const Eigen::VectorXd& x,
                          double v_in, double dt, PropagatorCache* cache = nullptr);

/// Advances x by dt under one conduction subset (index into ModeModel::configurations).
Eigen::VectorXd step_configuration(const SwitchedModel& model, ModeId mode, std::size_t config,
                                   const Eigen::VectorXd& x, double v_in, double dt,
                                   PropagatorCache* cache = nullptr);

/// Initial state selected by config.
Eigen::VectorXd initial_state(const SwitchedModel& model, const ConverterParams& params,
                              const SimConfig& config);

/// Simulates config.max_cycles periods and records every sample.
WaveformSet simulate(const SwitchedModel& model, const GateSchedule& schedule,
                     const ConverterParams& params, const SimConfig& config);

/// Iterates whole periods until the period-boundary state settles.
SteadyStateResult run_to_steady_state(const SwitchedModel& model, const GateSchedule& schedule,
                                      const ConverterParams& params, const SimConfig& config);

/// Relative max-norm change between two period-boundary snapshots.
double snapshot_change(const Eigen::VectorXd& previous, const Eigen::VectorXd& next);

struct ConsistencyViolation {
    double t = 0.0;
    ModeId mode = ModeId::I;
    std::string device;
    std::string kind;
    double value = 0.0;
};

struct ConsistencyReport {
    std::vector<ConsistencyViolation> violations;
    bool clean() const { return violations.empty(); }
};

/// Checks every recorded sample of a converged run against its conduction assumption:
/// conducting diodes carry current >= -tol_i, blocking diodes stay within tol_v of v_f,
/// and inductor currents stay above zero.
ConsistencyReport check_diode_consistency(const SwitchedModel& model,
                                          const SteadyStateResult& result, double tol_v = 1e-3,
                                          double tol_i = 1e-3);

/// Steady state for each parameter set, one OpenMP task per entry.
std::vector<SteadyStateResult> steady_state_sweep(const std::vector<ConverterParams>& points,
                                                  const SimConfig& config);
/// Sequential reference for steady_state_sweep.
std::vector<SteadyStateResult> steady_state_sweep_serial(
    const std::vector<ConverterParams>& points, const SimConfig& config);

}  // namespace vmc
