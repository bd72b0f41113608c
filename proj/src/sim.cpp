#include "vmc/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <unsupported/Eigen/MatrixFunctions>

#include "vmc/errors.hpp"

namespace vmc {

void SimConfig::validate() const {
    if (samples_per_period < 64) throw ConfigError("samples_per_period", "must be >= 64");
    if (settle_steps_per_period < 4) throw ConfigError("settle_steps_per_period", "must be >= 4");
    if (max_cycles < 1) throw ConfigError("max_cycles", "must be >= 1");
    if (!(steady_tol > 0.0)) throw ConfigError("steady_tol", "must be > 0");
    if (!(event_tol_v > 0.0)) throw ConfigError("event_tol_v", "must be > 0");
    if (!(event_tol_i > 0.0)) throw ConfigError("event_tol_i", "must be > 0");
}

bool WaveformSet::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& WaveformSet::column(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InputError("missing column " + name);
    return columns[static_cast<std::size_t>(it - names.begin())];
}

double WaveformSet::exact_mean(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InputError("missing column " + name);
    if (integrals.empty() || integrals[0] <= 0.0) throw InputError("no integrals recorded");
    return integrals[static_cast<std::size_t>(it - names.begin())] / integrals[0];
}

Eigen::MatrixXd augmented_generator(const SwitchedModel& model, ModeId mode, std::size_t config) {
    const auto& cfg = model.mode(mode).configurations.at(config);
    const int nz = model.state_dim + 2;
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(nz, nz);
    aug.topRows(model.state_dim) = cfg.F;
    return aug;
}

const Eigen::MatrixXd& PropagatorCache::get(ModeId mode, std::size_t config, double dt) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &dt, sizeof bits);
    auto key = std::make_tuple(static_cast<int>(mode), config, bits);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Eigen::MatrixXd phi = (augmented_generator(*model_, mode, config) * dt).exp();
    return cache_.emplace(key, std::move(phi)).first->second;
}

namespace {

Eigen::VectorXd augment(const Eigen::VectorXd& x, double v_in) {
    Eigen::VectorXd z(x.size() + 2);
    z << x, v_in, 1.0;
    return z;
}

}  // namespace

Eigen::VectorXd step_configuration(const SwitchedModel& model, ModeId mode, std::size_t config,
                                   const Eigen::VectorXd& x, double v_in, double dt,
                                   PropagatorCache* cache) {
    if (dt < 0.0) throw InputError("dt must be >= 0");
    if (dt == 0.0) return x;
    const Eigen::VectorXd z = augment(x, v_in);
    Eigen::VectorXd out;
    if (cache) {
        out = cache->get(mode, config, dt) * z;
    } else {
        out = (augmented_generator(model, mode, config) * dt).exp() * z;
    }
    if (!out.allFinite()) {
        throw NumericalFailure("non-finite state in mode " + to_string(mode));
    }
    return out.head(model.state_dim);
}

Eigen::VectorXd step_mode(const SwitchedModel& model, ModeId mode, const Eigen::VectorXd& x,
                          double v_in, double dt, PropagatorCache* cache) {
    const std::size_t full = model.mode(mode).configurations.size() - 1;
    return step_configuration(model, mode, full, x, v_in, dt, cache);
}

Eigen::VectorXd initial_state(const SwitchedModel& model, const ConverterParams& params,
                              const SimConfig& config) {
    switch (config.initial) {
        case InitialState::Zero:
            return Eigen::VectorXd::Zero(model.state_dim);
        case InitialState::AnalyticPreload:
            return nominal_state(model, params);
        case InitialState::Explicit:
            if (config.initial_vector.size() != model.state_dim) {
                throw ConfigError("initial_state", "explicit vector has wrong dimension");
            }
            return config.initial_vector;
    }
    return Eigen::VectorXd::Zero(model.state_dim);
}

double snapshot_change(const Eigen::VectorXd& previous, const Eigen::VectorXd& next) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < next.size(); ++k) {
        const double scale = std::max(std::abs(next(k)), 1e-9);
        worst = std::max(worst, std::abs(next(k) - previous(k)) / scale);
    }
    return worst;
}

namespace {

constexpr int kLevels = 40;
constexpr std::uint64_t kTicks = std::uint64_t{1} << kLevels;

const std::vector<std::string>& recorded_observers() {
    static const std::vector<std::string> names = {
        "vout", "iin", "vsw1", "vsw2", "vd1",  "vd2",  "vd3",  "vd4",  "id1", "id2", "id3",
        "id4",  "is1", "is2",  "ic1",  "ic2",  "ic3",  "ic4",  "vl1",  "vl2", "iload",
        "vod1", "vod2", "vod3", "vod4"};
    return names;
}

/// Steps one period through the tiles, commutating diodes inside each mode's conduction set.
class PeriodRunner {
public:
    PeriodRunner(const SwitchedModel& model, const GateSchedule& schedule, double v_in,
                 const SimConfig& config)
        : model_(model), schedule_(schedule), v_in_(v_in), config_(config) {
        for (ModeId id : {ModeId::I, ModeId::II, ModeId::III}) {
            const ModeModel& m = model.mode(id);
            auto& per_mode = checks_[static_cast<int>(id)];
            auto& per_obs = observers_[static_cast<int>(id)];
            auto& per_mask = masks_[static_cast<int>(id)];
            for (const auto& cfg : m.configurations) {
                std::vector<DiodeCheck> dc;
                for (std::size_t k = 0; k < m.conduction_set.size(); ++k) {
                    const std::string idx = m.conduction_set[k].substr(1);
                    dc.push_back({k, cfg.observers.at("id" + idx), cfg.observers.at("vod" + idx)});
                }
                per_mode.push_back(std::move(dc));

                Eigen::MatrixXd obs(static_cast<Eigen::Index>(names().size()) - 1,
                                    model.state_dim + 2);
                for (std::size_t r = 1; r < names().size(); ++r) {
                    obs.row(static_cast<Eigen::Index>(r) - 1) = cfg.observers.at(names()[r]);
                }
                per_obs.push_back(std::move(obs));

                unsigned mask = 0;
                for (const auto& d : cfg.diodes_on) mask |= 1u << (std::stoi(d.substr(1)) - 1);
                per_mask.push_back(mask);
            }
        }
    }

    const std::vector<std::string>& names() {
        if (names_.empty()) {
            names_.push_back("t");
            for (const auto& s : model_.state_names) names_.push_back(s);
            for (const auto& s : recorded_observers()) {
                if (model_.mode(ModeId::I).observers.count(s)) names_.push_back(s);
            }
            if (model_.state_dim > 6) names_.push_back("icout");
        }
        return names_;
    }

    void prepare_record(WaveformSet& w, int samples_per_period) {
        w.names = names();
        w.columns.assign(w.names.size(), {});
        w.integrals.assign(w.names.size(), 0.0);
        w.dt = schedule_.period / samples_per_period;
    }

    /// Runs one period from x, returning the end state. When rec is set, samples are
    /// appended; the period start is recorded only if record_start.
    Eigen::VectorXd run(const Eigen::VectorXd& x, int steps_per_period, double t0,
                        WaveformSet* rec, bool record_start) {
        Eigen::VectorXd z = augment(x, v_in_);
        const double period = schedule_.period;
        Eigen::VectorXd acc;
        if (rec) {
            acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rec->names.size()) - 1);
            integrals_ = &acc;
        }
        for (std::size_t k = 0; k < schedule_.tiles.size(); ++k) {
            const Tile& tile = schedule_.tiles[k];
            const ModeId mode = tile.mode;
            std::size_t cfg = entry_config(mode, z);
            if (rec && record_start && k == 0) record(*rec, t0, z, mode, cfg);
            const long n = std::max<long>(
                1, static_cast<long>(std::ceil(steps_per_period * tile.duration / period - 1e-9)));
            const double h = tile.duration / static_cast<double>(n);
            int events = 0;
            for (long s = 0; s < n; ++s) {
                const double t = t0 + tile.t_start + static_cast<double>(s + 1) * h;
                advance(z, mode, cfg, h, events);
                if (!z.allFinite()) {
                    throw NumericalFailure("non-finite state in mode " + to_string(mode) +
                                           " at t = " + std::to_string(t));
                }
                if (rec) record(*rec, t, z, mode, cfg);
            }
        }
        if (rec) {
            integrals_ = nullptr;
            rec->integrals[0] += period;
            for (Eigen::Index r = 0; r < acc.size(); ++r) {
                rec->integrals[static_cast<std::size_t>(r) + 1] += acc(r);
            }
        }
        return z.head(model_.state_dim);
    }

private:
    struct DiodeCheck {
        std::size_t bit;
        Row current;
        Row forward;
    };

    struct Levels {
        std::vector<Eigen::MatrixXd> phi;
        std::vector<Eigen::MatrixXd> psi;
        std::vector<char> ready;
    };

    /// Propagator over h/2^level; psi is its time integral, so that the exact integral of
    /// z over the sub-step is psi * z.
    const Levels& levels(ModeId mode, std::size_t cfg, double h, int level) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &h, sizeof bits);
        auto key = std::make_tuple(static_cast<int>(mode), cfg, bits);
        Levels& lv = props_[key];
        if (lv.phi.empty()) {
            lv.phi.resize(kLevels + 1);
            lv.psi.resize(kLevels + 1);
            lv.ready.assign(kLevels + 1, 0);
        }
        if (!lv.ready[level]) {
            const double dt = std::ldexp(h, -level);
            const Eigen::Index nz = model_.state_dim + 2;
            Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * nz, 2 * nz);
            big.topLeftCorner(nz, nz) = augmented_generator(model_, mode, cfg);
            big.topRightCorner(nz, nz) = Eigen::MatrixXd::Identity(nz, nz);
            const Eigen::MatrixXd e = (big * dt).exp();
            lv.phi[level] = e.topLeftCorner(nz, nz);
            lv.psi[level] = e.topRightCorner(nz, nz);
            lv.ready[level] = 1;
        }
        return lv;
    }

    /// Advances z over one dyadic sub-step, accumulating exact observer integrals if enabled.
    void substep(Eigen::VectorXd& z, const Eigen::VectorXd* next, ModeId mode, std::size_t cfg,
                 double h, int level) {
        const Levels& lv = levels(mode, cfg, h, level);
        if (integrals_) {
            integrals_->noalias() += observers_[static_cast<int>(mode)][cfg] * (lv.psi[level] * z);
        }
        if (next) {
            z = *next;
        } else {
            z = lv.phi[level] * z;
        }
    }

    const Eigen::MatrixXd& propagator(ModeId mode, std::size_t cfg, double h, int level) {
        return levels(mode, cfg, h, level).phi[level];
    }

    bool consistent(ModeId mode, std::size_t cfg, const Eigen::VectorXd& z, double tol_v,
                    double tol_i) const {
        for (const auto& d : checks_[static_cast<int>(mode)][cfg]) {
            const bool on = (cfg >> d.bit) & 1u;
            if (on && d.current.dot(z) < -tol_i) return false;
            if (!on && d.forward.dot(z) > tol_v) return false;
        }
        return true;
    }

    std::size_t toggled(ModeId mode, std::size_t cfg, const Eigen::VectorXd& z) const {
        std::size_t next = cfg;
        for (const auto& d : checks_[static_cast<int>(mode)][cfg]) {
            const bool on = (cfg >> d.bit) & 1u;
            if (on && d.current.dot(z) < -config_.event_tol_i) next &= ~(std::size_t{1} << d.bit);
            if (!on && d.forward.dot(z) > config_.event_tol_v) next |= std::size_t{1} << d.bit;
        }
        return next;
    }

    std::size_t entry_config(ModeId mode, const Eigen::VectorXd& z) const {
        const auto& cfgs = model_.mode(mode).configurations;
        std::vector<std::size_t> order(cfgs.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [](std::size_t a, std::size_t b) {
            return std::popcount(a) > std::popcount(b);
        });
        for (std::size_t c : order) {
            if (consistent(mode, c, z, config_.event_tol_v, config_.event_tol_i)) return c;
        }
        return cfgs.size() - 1;
    }

    /// Advances z by h. Commutation instants are located on a dyadic grid of h/2^40: the
    /// largest aligned power-of-two sub-step is tried and, on violation, bisected down to
    /// the first violating tick where the conduction set is toggled.
    void advance(Eigen::VectorXd& z, ModeId mode, std::size_t& cfg, double h, int& events) {
        const bool commutates = !model_.mode(mode).conduction_set.empty();
        if (!commutates || events > config_.max_events_per_tile) {
            substep(z, nullptr, mode, cfg, h, 0);
            return;
        }
        auto level_of = [](std::uint64_t span) { return kLevels - std::countr_zero(span); };
        std::uint64_t pos = 0;
        Eigen::VectorXd trial;
        while (pos < kTicks) {
            std::uint64_t span = pos == 0 ? kTicks : (pos & (~pos + 1));
            trial.noalias() = propagator(mode, cfg, h, level_of(span)) * z;
            if (consistent(mode, cfg, trial, config_.event_tol_v, config_.event_tol_i)) {
                substep(z, &trial, mode, cfg, h, level_of(span));
                pos += span;
                continue;
            }
            // Consistent at pos, violated at pos + span; bad holds the violating state.
            Eigen::VectorXd bad = trial;
            while (span > 1) {
                span >>= 1;
                trial.noalias() = propagator(mode, cfg, h, level_of(span)) * z;
                if (consistent(mode, cfg, trial, config_.event_tol_v, config_.event_tol_i)) {
                    substep(z, &trial, mode, cfg, h, level_of(span));
                    pos += span;
                } else {
                    bad = trial;
                }
            }
            substep(z, &bad, mode, cfg, h, kLevels);
            pos += 1;
            cfg = toggled(mode, cfg, z);
            if (++events > config_.max_events_per_tile) {
                // Chattering guard: finish the step without further commutation.
                while (pos < kTicks) {
                    const std::uint64_t rest = pos & (~pos + 1);
                    substep(z, nullptr, mode, cfg, h, level_of(rest));
                    pos += rest;
                }
                return;
            }
        }
    }

    void record(WaveformSet& w, double t, const Eigen::VectorXd& z, ModeId mode, std::size_t cfg) {
        const Eigen::VectorXd values = observers_[static_cast<int>(mode)][cfg] * z;
        w.columns[0].push_back(t);
        for (Eigen::Index r = 0; r < values.size(); ++r) {
            w.columns[static_cast<std::size_t>(r) + 1].push_back(values(r));
        }
        w.modes.push_back(mode);
        w.diode_masks.push_back(masks_[static_cast<int>(mode)][cfg]);
    }

    const SwitchedModel& model_;
    const GateSchedule& schedule_;
    double v_in_;
    SimConfig config_;
    std::vector<std::string> names_;
    std::vector<std::vector<DiodeCheck>> checks_[3];
    std::vector<Eigen::MatrixXd> observers_[3];
    std::vector<unsigned> masks_[3];
    std::map<std::tuple<int, std::size_t, std::uint64_t>, Levels> props_;
    Eigen::VectorXd* integrals_ = nullptr;
};

}  // namespace

WaveformSet simulate(const SwitchedModel& model, const GateSchedule& schedule,
                     const ConverterParams& params, const SimConfig& config) {
    config.validate();
    PeriodRunner runner(model, schedule, params.v_in, config);
    WaveformSet w;
    runner.prepare_record(w, config.samples_per_period);
    Eigen::VectorXd x = initial_state(model, params, config);
    for (long c = 0; c < config.max_cycles; ++c) {
        x = runner.run(x, config.samples_per_period, static_cast<double>(c) * schedule.period, &w,
                       c == 0);
    }
    return w;
}

SteadyStateResult run_to_steady_state(const SwitchedModel& model, const GateSchedule& schedule,
                                      const ConverterParams& params, const SimConfig& config) {
    config.validate();
    PeriodRunner runner(model, schedule, params.v_in, config);
    SteadyStateResult result;
    result.dynamics_parasitics = model.dynamics_parasitics;
    Eigen::VectorXd x = initial_state(model, params, config);
    Eigen::VectorXd previous = x;
    for (long c = 1; c <= config.max_cycles; ++c) {
        previous = x;
        x = runner.run(previous, config.settle_steps_per_period, 0.0, nullptr, false);
        result.cycles_used = c;
        result.last_change = snapshot_change(previous, x);
        if (result.last_change < config.steady_tol) {
            result.converged = true;
            break;
        }
    }
    result.state_snapshot = x;
    runner.prepare_record(result.final_cycle, config.samples_per_period);
    runner.run(previous, config.samples_per_period, 0.0, &result.final_cycle, true);
    return result;
}

ConsistencyReport check_diode_consistency(const SwitchedModel& model,
                                          const SteadyStateResult& result, double tol_v,
                                          double tol_i) {
    if (!result.converged) {
        throw PreconditionError("diode consistency requires a converged steady-state result");
    }
    ConsistencyReport report;
    const WaveformSet& w = result.final_cycle;
    const auto& t = w.column("t");
    for (std::size_t j = 0; j < model.diode_names.size(); ++j) {
        const std::string idx = std::to_string(j + 1);
        const auto& id = w.column("id" + idx);
        const auto& vod = w.column("vod" + idx);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const bool on = (w.diode_masks[k] >> j) & 1u;
            if (on && id[k] < -tol_i) {
                report.violations.push_back(
                    {t[k], w.modes[k], model.diode_names[j], "negative current while conducting", id[k]});
            } else if (!on && vod[k] > tol_v) {
                report.violations.push_back(
                    {t[k], w.modes[k], model.diode_names[j], "forward biased while blocking", vod[k]});
            }
        }
    }
    for (const char* name : {"iL1", "iL2"}) {
        const auto& i = w.column(name);
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (i[k] <= 0.0) {
                report.violations.push_back(
                    {t[k], w.modes[k], name, "inductor current reached zero", i[k]});
            }
        }
    }
    return report;
}

namespace {

SteadyStateResult solve_point(const ConverterParams& p, const SimConfig& config) {
    const SwitchedModel model = build_proposed_converter(p);
    const GateSchedule schedule = gate_schedule(p.duty, p.f_sw);
    return run_to_steady_state(model, schedule, p, config);
}

}  // namespace

std::vector<SteadyStateResult> steady_state_sweep(const std::vector<ConverterParams>& points,
                                                  const SimConfig& config) {
    std::vector<SteadyStateResult> out(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        try {
            out[idx] = solve_point(points[idx], config);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<SteadyStateResult> steady_state_sweep_serial(
    const std::vector<ConverterParams>& points, const SimConfig& config) {
    std::vector<SteadyStateResult> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(solve_point(p, config));
    return out;
}

}  // namespace vmc
