#include "vmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vmc/errors.hpp"

namespace vmc {

std::string to_string(ModeId mode) {
    switch (mode) {
        case ModeId::I: return "I";
        case ModeId::II: return "II";
        case ModeId::III: return "III";
    }
    return "?";
}

double GateSchedule::mode_total(ModeId mode) const {
    double total = 0.0;
    for (const auto& tile : tiles) {
        if (tile.mode == mode) total += tile.duration;
    }
    return total;
}

GateSchedule gate_schedule(double duty, double f_sw) {
    if (!(duty > 0.5 && duty < 1.0)) {
        throw RegionError("duty must satisfy 0.5 < duty < 1 for three-mode operation");
    }
    if (!(f_sw > 0.0) || !std::isfinite(f_sw)) {
        throw ConfigError("f_sw", "must be finite and > 0");
    }
    const double period = 1.0 / f_sw;

    // Gate edges as fractions of the period; S2 wraps past T.
    std::vector<double> edges = {0.0, duty, 0.5, duty - 0.5, 1.0};
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    auto s1_on = [&](double u) { return u < duty; };
    auto s2_on = [&](double u) { return u >= 0.5 || u < duty - 0.5; };

    GateSchedule schedule;
    schedule.period = period;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double mid = 0.5 * (edges[k] + edges[k + 1]);
        const bool a = s1_on(mid);
        const bool b = s2_on(mid);
        ModeId mode = a && b ? ModeId::I : (a ? ModeId::III : ModeId::II);
        const double start = edges[k] * period;
        const double duration = (edges[k + 1] - edges[k]) * period;
        if (!schedule.tiles.empty() && schedule.tiles.back().mode == mode) {
            schedule.tiles.back().duration += duration;
        } else {
            schedule.tiles.push_back({mode, start, duration});
        }
    }
    return schedule;
}

const ModeModel& SwitchedModel::mode(ModeId id) const {
    auto it = modes.find(id);
    if (it == modes.end()) {
        throw InputError("model has no mode " + to_string(id));
    }
    return it->second;
}

int SwitchedModel::state_index(const std::string& name) const {
    for (std::size_t k = 0; k < state_names.size(); ++k) {
        if (state_names[k] == name) return static_cast<int>(k);
    }
    return -1;
}

const std::vector<std::string>& required_observers() {
    static const std::vector<std::string> names = {
        "iL1", "iL2", "vC1", "vC2", "vC3", "vC4", "vout", "iin", "vsw1", "vsw2",
        "vd1", "vd2", "vd3", "vd4", "id1", "id2", "id3", "id4"};
    return names;
}

namespace {

constexpr double kFloor = 1e-5;  // series resistance of conducting devices and capacitors
constexpr double kOff = 1e8;     // blocking device resistance

enum Node : int { kGnd = -1, kA = 0, kB = 1, kN1 = 2, kN2 = 3, kN3 = 4, kOut = 5, kNodes = 6 };

struct CapSpec {
    const char* name;
    const char* current;
    int neg;
    int pos;
};

struct DiodeSpec {
    const char* name;
    int anode;
    int cathode;
};

const CapSpec kCaps[] = {{"vC1", "ic1", kB, kN2},
                         {"vC2", "ic2", kA, kN1},
                         {"vC3", "ic3", kGnd, kOut},
                         {"vC4", "ic4", kN1, kN3},
                         {"vCout", "icout", kGnd, kOut}};

const DiodeSpec kDiodes[] = {{"D1", kN1, kN2}, {"D2", kB, kN1}, {"D3", kN3, kOut}, {"D4", kN2, kN3}};

/// Nodal solve of the resistive network seen by the state sources.
class Network {
public:
    Network(int nx) : nx_(nx), nz_(nx + 2), G_(Eigen::MatrixXd::Zero(kNodes, kNodes)),
                      J_(Eigen::MatrixXd::Zero(kNodes, nx + 2)) {}

    void conductance(int p, int q, double g) {
        if (p >= 0) G_(p, p) += g;
        if (q >= 0) G_(q, q) += g;
        if (p >= 0 && q >= 0) {
            G_(p, q) -= g;
            G_(q, p) -= g;
        }
    }

    void inject(int node, const Row& row) {
        if (node >= 0) J_.row(node) += row;
    }

    void solve() { V_ = G_.fullPivLu().solve(J_); }

    Row voltage(int node) const {
        if (node < 0) return Row::Zero(nz_);
        return V_.row(node);
    }

    Row unit(int col) const {
        Row r = Row::Zero(nz_);
        r(col) = 1.0;
        return r;
    }

    int nx() const { return nx_; }

private:
    int nx_;
    int nz_;
    Eigen::MatrixXd G_;
    Eigen::MatrixXd J_;
    Eigen::MatrixXd V_;
};

Configuration build_configuration(const ConverterParams& p, bool s1, bool s2,
                                  const std::vector<std::string>& diodes_on) {
    const Parasitics& q = p.parasitics;
    const int ncap = p.c_out > 0.0 ? 5 : 4;
    const int nx = 2 + ncap;
    const int vin_col = nx;
    const int one_col = nx + 1;
    Network net(nx);

    auto is_on = [&](const char* name) {
        return std::find(diodes_on.begin(), diodes_on.end(), name) != diodes_on.end();
    };

    const double g_s1 = s1 ? 1.0 / (q.r_ds_on + kFloor) : 1.0 / kOff;
    const double g_s2 = s2 ? 1.0 / (q.r_ds_on + kFloor) : 1.0 / kOff;
    net.conductance(kA, kGnd, g_s1);
    net.conductance(kB, kGnd, g_s2);
    net.conductance(kOut, kGnd, 1.0 / p.r_load);

    net.inject(kA, net.unit(0));
    net.inject(kB, net.unit(1));

    const double g_c = 1.0 / (q.esr + kFloor);
    for (int k = 0; k < ncap; ++k) {
        net.conductance(kCaps[k].pos, kCaps[k].neg, g_c);
        Row src = g_c * net.unit(2 + k);
        net.inject(kCaps[k].pos, src);
        net.inject(kCaps[k].neg, -src);
    }

    const double g_d = 1.0 / kFloor;
    for (const auto& d : kDiodes) {
        if (is_on(d.name)) {
            net.conductance(d.anode, d.cathode, g_d);
            Row drop = g_d * q.v_f * net.unit(one_col);
            net.inject(d.anode, drop);
            net.inject(d.cathode, -drop);
        } else {
            net.conductance(d.anode, d.cathode, 1.0 / kOff);
        }
    }
    net.solve();

    Configuration cfg;
    cfg.diodes_on = diodes_on;
    auto& obs = cfg.observers;
    const Row vin = net.unit(vin_col);

    obs["iL1"] = net.unit(0);
    obs["iL2"] = net.unit(1);
    for (int k = 0; k < ncap; ++k) {
        obs[kCaps[k].name] = net.unit(2 + k);
        obs[kCaps[k].current] =
            g_c * (net.voltage(kCaps[k].pos) - net.voltage(kCaps[k].neg) - net.unit(2 + k));
    }
    obs["vout"] = net.voltage(kOut);
    obs["iload"] = net.voltage(kOut) / p.r_load;
    obs["iin"] = net.unit(0) + net.unit(1);
    obs["vsw1"] = net.voltage(kA);
    obs["vsw2"] = net.voltage(kB);
    obs["is1"] = g_s1 * net.voltage(kA);
    obs["is2"] = g_s2 * net.voltage(kB);
    obs["vl1"] = vin - net.voltage(kA) - q.dcr * net.unit(0);
    obs["vl2"] = vin - net.voltage(kB) - q.dcr * net.unit(1);
    for (int k = 0; k < 4; ++k) {
        const auto& d = kDiodes[k];
        const Row forward = net.voltage(d.anode) - net.voltage(d.cathode);
        const std::string idx = std::to_string(k + 1);
        obs["vd" + idx] = -forward;
        obs["vod" + idx] = forward - q.v_f * net.unit(one_col);
        if (is_on(d.name)) {
            obs["id" + idx] = g_d * (forward - q.v_f * net.unit(one_col));
        } else {
            obs["id" + idx] = forward / kOff;
        }
    }

    cfg.F = Eigen::MatrixXd::Zero(nx, nx + 2);
    cfg.F.row(0) = obs["vl1"] / p.l1;
    cfg.F.row(1) = obs["vl2"] / p.l2;
    const double caps[] = {p.c1, p.c2, p.c3, p.c4, p.c_out};
    for (int k = 0; k < ncap; ++k) {
        cfg.F.row(2 + k) = obs[kCaps[k].current] / caps[k];
    }
    return cfg;
}

ModeModel build_mode(const ConverterParams& p, ModeId id) {
    ModeModel m;
    m.id = id;
    bool s1 = true;
    bool s2 = true;
    switch (id) {
        case ModeId::I:
            m.switch_set = {"S1", "S2"};
            break;
        case ModeId::II:
            s1 = false;
            m.switch_set = {"S2"};
            m.conduction_set = {"D1", "D3"};
            break;
        case ModeId::III:
            s2 = false;
            m.switch_set = {"S1"};
            m.conduction_set = {"D2", "D4"};
            break;
    }
    const std::size_t n = m.conduction_set.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::string> on;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (std::size_t{1} << k)) on.push_back(m.conduction_set[k]);
        }
        m.configurations.push_back(build_configuration(p, s1, s2, on));
    }
    const Configuration& full = m.configurations.back();
    const int nx = static_cast<int>(full.F.rows());
    m.A = full.F.leftCols(nx);
    m.B = full.F.col(nx);
    m.B_const = full.F.col(nx + 1);
    m.observers = full.observers;
    return m;
}

}  // namespace

SwitchedModel build_proposed_converter(const ConverterParams& params) {
    validate_params(params);
    SwitchedModel model;
    model.state_names = {"iL1", "iL2", "vC1", "vC2", "vC3", "vC4"};
    if (params.c_out > 0.0) model.state_names.push_back("vCout");
    model.state_dim = static_cast<int>(model.state_names.size());
    model.diode_names = {"D1", "D2", "D3", "D4"};
    model.dynamics_parasitics = params.parasitics;
    model.dynamics_parasitics.t_on = 0.0;
    model.dynamics_parasitics.t_off = 0.0;
    for (ModeId id : {ModeId::I, ModeId::II, ModeId::III}) {
        model.modes.emplace(id, build_mode(params, id));
    }
    return model;
}

Eigen::VectorXd nominal_state(const SwitchedModel& model, const ConverterParams& params) {
    const double v_sw = params.v_in / (1.0 - params.duty);
    const double i_out = 4.0 * v_sw / params.r_load;
    const double i_l = 2.0 * i_out / (1.0 - params.duty);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.state_dim);
    x.head(6) << i_l, i_l, 2.0 * v_sw, v_sw, 4.0 * v_sw, 2.0 * v_sw;
    if (model.state_dim > 6) x(6) = 4.0 * v_sw;
    return x;
}

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.passed) out.push_back(c.name + ": " + c.detail);
    }
    return out;
}

ValidationReport validate_model(const SwitchedModel& model) {
    ValidationReport report;
    struct Expected {
        ModeId id;
        std::vector<std::string> switches;
        std::vector<std::string> diodes;
    };
    const std::vector<Expected> table = {{ModeId::I, {"S1", "S2"}, {}},
                                         {ModeId::II, {"S2"}, {"D1", "D3"}},
                                         {ModeId::III, {"S1"}, {"D2", "D4"}}};

    const bool three = model.modes.size() == 3 && model.modes.count(ModeId::I) &&
                       model.modes.count(ModeId::II) && model.modes.count(ModeId::III);
    report.checks.push_back({"three_modes", three,
                             three ? "" : "expected modes I, II, III; found " +
                                              std::to_string(model.modes.size())});

    for (const auto& e : table) {
        auto it = model.modes.find(e.id);
        const std::string tag = "mode_" + to_string(e.id);
        if (it == model.modes.end()) {
            report.checks.push_back({tag + "_present", false, "missing"});
            continue;
        }
        const ModeModel& m = it->second;

        auto sorted = [](std::vector<std::string> v) {
            std::sort(v.begin(), v.end());
            return v;
        };
        auto join = [](const std::vector<std::string>& v) {
            std::ostringstream os;
            os << "{";
            for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
            os << "}";
            return os.str();
        };
        const bool cond_ok = sorted(m.conduction_set) == sorted(e.diodes);
        report.checks.push_back({tag + "_conduction_set", cond_ok,
                                 cond_ok ? "" : "mode table mismatch: expected " + join(e.diodes) +
                                                    ", found " + join(m.conduction_set)});
        const bool sw_ok = sorted(m.switch_set) == sorted(e.switches);
        report.checks.push_back({tag + "_switch_set", sw_ok,
                                 sw_ok ? "" : "mode table mismatch: expected " + join(e.switches) +
                                                  ", found " + join(m.switch_set)});

        std::vector<std::string> missing;
        for (const auto& name : required_observers()) {
            if (!m.observers.count(name)) missing.push_back(name);
        }
        report.checks.push_back({tag + "_observers", missing.empty(),
                                 missing.empty() ? "" : "missing observer " + join(missing)});

        const bool finite = m.A.allFinite() && m.B.allFinite() &&
                            m.A.rows() == model.state_dim && m.A.cols() == model.state_dim;
        report.checks.push_back({tag + "_A_finite", finite,
                                 finite ? "" : "A is non-finite or has the wrong shape"});

        const bool configs_ok =
            m.configurations.size() == (std::size_t{1} << m.conduction_set.size());
        report.checks.push_back({tag + "_configurations", configs_ok,
                                 configs_ok ? "" : "one configuration per conduction subset required"});
    }
    return report;
}

}  // namespace vmc
