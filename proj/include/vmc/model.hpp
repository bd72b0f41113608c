#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "vmc/params.hpp"

namespace vmc {

enum class ModeId { I, II, III };

std::string to_string(ModeId mode);

/// One contiguous interval of constant switch state.
struct Tile {
    ModeId mode;
    double t_start;
    double duration;
};

/// Mode sequence over one switching period.
struct GateSchedule {
    double period = 0.0;
    std::vector<Tile> tiles;

    double mode_total(ModeId mode) const;
};

/// Mode tiles induced by S1 on [0, DT) and S2 on [T/2, T/2 + DT) mod T.
/// Throws RegionError unless 0.5 < duty < 1.
GateSchedule gate_schedule(double duty, double f_sw);

/// Affine signal of the augmented vector z = [x; v_in; 1].
using Row = Eigen::RowVectorXd;

/// Linear dynamics for one set of conducting diodes: dz/dt rows F = [A | b_vin | b_const].
struct Configuration {
    std::vector<std::string> diodes_on;
    Eigen::MatrixXd F;
    std::map<std::string, Row> observers;
};

/// Per-mode entry. A, B and observers describe the full conduction set; configurations
/// are indexed by bitmask over conduction_set (bit k set = conduction_set[k] on).
struct ModeModel {
    ModeId id = ModeId::I;
    std::vector<std::string> switch_set;
    std::vector<std::string> conduction_set;
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::VectorXd B_const;
    std::map<std::string, Row> observers;
    std::vector<Configuration> configurations;
};

struct SwitchedModel {
    int state_dim = 0;
    std::vector<std::string> state_names;
    std::vector<std::string> diode_names;
    std::map<ModeId, ModeModel> modes;
    Parasitics dynamics_parasitics;  ///< parasitics embedded in the matrices

    const ModeModel& mode(ModeId id) const;
    int state_index(const std::string& name) const;
};

/// Signals every mode must expose (state columns plus device observers).
const std::vector<std::string>& required_observers();

/// Builds the two-phase interleaved boost with a four-capacitor multiplier ladder.
/// Resistive parasitics and the diode drop enter the matrices; switching times do not.
SwitchedModel build_proposed_converter(const ConverterParams& params);

/// Nominal period-boundary state from the ideal relations (used as a preload).
Eigen::VectorXd nominal_state(const SwitchedModel& model, const ConverterParams& params);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool ok() const;
    std::vector<std::string> failures() const;
};

ValidationReport validate_model(const SwitchedModel& model);

}  // namespace vmc
