// =============================================================================
// model_core: parameters, gate schedule, switched model and structural validation
// =============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support/reference.hpp"
#include "vmc/errors.hpp"
#include "vmc/model.hpp"
#include "vmc/sim.hpp"

using namespace vmc;
using Catch::Approx;

namespace {

bool has_failure_containing(const ValidationReport& report, const std::string& needle) {
    for (const auto& f : report.failures()) {
        if (f.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("Parameter validation names the offending field", "[model_core][params]") {
    ConverterParams p;
    REQUIRE_NOTHROW(validate_params(p));

    SECTION("non-positive inductance") {
        p.l2 = 0.0;
        try {
            validate_params(p);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.field() == "l2");
        }
    }
    SECTION("negative parasitic") {
        p.parasitics.esr = -1e-3;
        try {
            validate_params(p);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(e.field() == "esr");
        }
    }
    SECTION("duty outside (0, 1)") {
        p.duty = 1.0;
        REQUIRE_THROWS_AS(validate_params(p), ConfigError);
    }
    SECTION("negative output capacitor") {
        p.c_out = -1e-6;
        REQUIRE_THROWS_AS(validate_params(p), ConfigError);
    }
    SECTION("build_proposed_converter validates first") {
        p.r_load = -5.0;
        REQUIRE_THROWS_AS(build_proposed_converter(p), ConfigError);
    }
}

TEST_CASE("Component library entries carry the rated parasitics", "[model_core][params]") {
    const auto sw = library_switch();
    const auto d = library_diode();
    REQUIRE(sw.part == "IPA075N15N3GXKSA1");
    REQUIRE(sw.implied.r_ds_on == Approx(7.5e-3));
    REQUIRE(d.part == "40CPQ100");
    REQUIRE(d.implied.v_f == Approx(0.61));
    for (const auto* q : {&sw.implied, &d.implied}) {
        REQUIRE(q->r_ds_on >= 0.0);
        REQUIRE(q->v_f >= 0.0);
        REQUIRE(q->dcr >= 0.0);
        REQUIRE(q->esr >= 0.0);
        REQUIRE(q->t_on >= 0.0);
        REQUIRE(q->t_off >= 0.0);
    }
    REQUIRE(Parasitics::ideal().is_ideal());
    REQUIRE_FALSE(Parasitics{}.is_ideal());
}

TEST_CASE("Gate schedule matches the enumerated gate states", "[model_core][schedule]") {
    SECTION("duty 0.75 at 100 kHz") {
        const GateSchedule s = gate_schedule(0.75, 100e3);
        REQUIRE(s.period == Approx(10e-6));
        REQUIRE(s.tiles.size() == 4);
        const ModeId expected[] = {ModeId::I, ModeId::III, ModeId::I, ModeId::II};
        for (std::size_t k = 0; k < 4; ++k) {
            REQUIRE(s.tiles[k].mode == expected[k]);
            REQUIRE(s.tiles[k].t_start == Approx(2.5e-6 * static_cast<double>(k)).margin(1e-18));
            REQUIRE(s.tiles[k].duration == Approx(2.5e-6).margin(1e-18));
        }
    }
    SECTION("duty 0.6 at 100 kHz") {
        const GateSchedule s = gate_schedule(0.6, 100e3);
        REQUIRE(s.mode_total(ModeId::I) == Approx(2e-6).margin(1e-18));
        REQUIRE(s.mode_total(ModeId::II) == Approx(4e-6).margin(1e-18));
        REQUIRE(s.mode_total(ModeId::III) == Approx(4e-6).margin(1e-18));
    }
    SECTION("tiles agree with the enumeration oracle over many duties") {
        for (double duty = 0.51; duty < 0.99; duty += 0.0137) {
            const auto oracle = testing::enumerate_modes(duty, 100e3);
            const GateSchedule s = gate_schedule(duty, 100e3);
            // The schedule may split a mode across the period wrap; merge adjacent equal modes.
            std::vector<std::pair<ModeId, double>> merged;
            for (const auto& tile : s.tiles) {
                if (!merged.empty() && merged.back().first == tile.mode) {
                    merged.back().second += tile.duration;
                } else {
                    merged.emplace_back(tile.mode, tile.duration);
                }
            }
            REQUIRE(merged.size() == oracle.size());
            for (std::size_t k = 0; k < oracle.size(); ++k) {
                REQUIRE(merged[k].first == oracle[k].first);
                REQUIRE(merged[k].second == Approx(oracle[k].second).margin(1e-17));
            }
        }
    }
    SECTION("duty at or beyond the three-mode region is rejected") {
        REQUIRE_THROWS_AS(gate_schedule(0.5, 100e3), RegionError);
        REQUIRE_THROWS_AS(gate_schedule(0.3, 100e3), RegionError);
        REQUIRE_THROWS_AS(gate_schedule(1.0, 100e3), RegionError);
        REQUIRE_THROWS_AS(gate_schedule(0.7, 0.0), ConfigError);
        try {
            gate_schedule(0.4, 100e3);
        } catch (const RegionError& e) {
            REQUIRE(std::string(e.what()).find("0.5") != std::string::npos);
        }
    }
}

TEST_CASE("Schedule tiles are contiguous and cover one period", "[model_core][schedule][property]") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> duty_dist(0.5001, 0.9999);
    std::uniform_real_distribution<double> log_f(3.0, 6.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double duty = duty_dist(rng);
        const double f_sw = std::pow(10.0, log_f(rng));
        const GateSchedule s = gate_schedule(duty, f_sw);
        const double period = 1.0 / f_sw;
        double t = 0.0;
        double sum = 0.0;
        for (const auto& tile : s.tiles) {
            REQUIRE(tile.duration >= 0.0);
            REQUIRE(tile.t_start == Approx(t).margin(1e-15 * period));
            t = tile.t_start + tile.duration;
            sum += tile.duration;
        }
        REQUIRE(std::abs(sum - period) <= 1e-14 * period);
        const double occupancy = std::abs(s.mode_total(ModeId::I) - (2.0 * duty - 1.0) * period) +
                                 std::abs(s.mode_total(ModeId::II) - (1.0 - duty) * period) +
                                 std::abs(s.mode_total(ModeId::III) - (1.0 - duty) * period);
        REQUIRE(occupancy < 1e-12 * period);
    }
}

TEST_CASE("Default model has the three-mode structure", "[model_core][model]") {
    const SwitchedModel m = build_proposed_converter(ConverterParams{});
    REQUIRE(m.state_dim == 6);
    REQUIRE(m.state_names ==
            std::vector<std::string>{"iL1", "iL2", "vC1", "vC2", "vC3", "vC4"});
    REQUIRE(m.modes.size() == 3);
    REQUIRE(m.mode(ModeId::I).conduction_set.empty());
    REQUIRE(m.mode(ModeId::I).switch_set == std::vector<std::string>{"S1", "S2"});
    REQUIRE(m.mode(ModeId::II).conduction_set == std::vector<std::string>{"D1", "D3"});
    REQUIRE(m.mode(ModeId::II).switch_set == std::vector<std::string>{"S2"});
    REQUIRE(m.mode(ModeId::III).conduction_set == std::vector<std::string>{"D2", "D4"});
    REQUIRE(m.mode(ModeId::III).switch_set == std::vector<std::string>{"S1"});
    for (const auto& [id, mode] : m.modes) {
        REQUIRE(mode.A.rows() == 6);
        REQUIRE(mode.A.cols() == 6);
        REQUIRE(mode.B.size() == 6);
        REQUIRE(mode.configurations.size() == (std::size_t{1} << mode.conduction_set.size()));
    }
    REQUIRE(validate_model(m).ok());
}

TEST_CASE("Output capacitor adds a state", "[model_core][model]") {
    ConverterParams p;
    p.c_out = 10e-6;
    const SwitchedModel m = build_proposed_converter(p);
    REQUIRE(m.state_dim == 7);
    REQUIRE(m.state_names.back() == "vCout");
    REQUIRE(validate_model(m).ok());
}

TEST_CASE("Mode I charges both inductors from the source", "[model_core][model]") {
    const ConverterParams p = ideal_params();
    const SwitchedModel m = build_proposed_converter(p);
    const ModeModel& mode = m.mode(ModeId::I);
    REQUIRE(mode.B(0) == Approx(1.0 / p.l1));
    REQUIRE(mode.B(1) == Approx(1.0 / p.l2));
    // Multiplier capacitors are isolated from the inductors in Mode I up to the off-state
    // leakage of the blocking devices, measured against the 1/L and 1/C scales of each row.
    const double caps[] = {p.c1, p.c2, p.c3, p.c4};
    for (int c = 2; c < 6; ++c) {
        REQUIRE(std::abs(mode.A(0, c)) < 1e-9 / p.l1);
        REQUIRE(std::abs(mode.A(1, c)) < 1e-9 / p.l2);
        REQUIRE(std::abs(mode.A(c, 0)) < 1e-9 / caps[c - 2]);
        REQUIRE(std::abs(mode.A(c, 1)) < 1e-9 / caps[c - 2]);
    }
}

TEST_CASE("validate_model reports structural defects", "[model_core][validation]") {
    SwitchedModel m = build_proposed_converter(ConverterParams{});

    SECTION("swapped Mode II conduction set") {
        m.modes.at(ModeId::II).conduction_set = {"D2", "D4"};
        const ValidationReport r = validate_model(m);
        REQUIRE_FALSE(r.ok());
        REQUIRE(has_failure_containing(r, "mode table mismatch"));
        REQUIRE(has_failure_containing(r, "{D1,D3}"));
    }
    SECTION("missing vsw1 observer") {
        m.modes.at(ModeId::III).observers.erase("vsw1");
        const ValidationReport r = validate_model(m);
        REQUIRE_FALSE(r.ok());
        REQUIRE(has_failure_containing(r, "missing observer"));
        REQUIRE(has_failure_containing(r, "vsw1"));
    }
    SECTION("non-finite dynamics") {
        m.modes.at(ModeId::I).A(0, 0) = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_FALSE(validate_model(m).ok());
    }
    SECTION("missing mode") {
        m.modes.erase(ModeId::II);
        REQUIRE_FALSE(validate_model(m).ok());
    }
}

TEST_CASE("Every CSV column is observable in every mode", "[model_core][observers]") {
    const SwitchedModel m = build_proposed_converter(ConverterParams{});
    const std::vector<std::string> csv = {"iL1",  "iL2",  "vC1", "vC2", "vC3", "vC4", "vout",
                                          "iin",  "vsw1", "vsw2", "vd1", "vd2", "vd3", "vd4",
                                          "id1",  "id2",  "id3", "id4"};
    const auto& required = required_observers();
    for (const auto& name : csv) {
        REQUIRE(std::find(required.begin(), required.end(), name) != required.end());
        for (const auto& [id, mode] : m.modes) REQUIRE(mode.observers.count(name) == 1);
    }
}

TEST_CASE("Nominal preload state follows the ideal relations", "[model_core][model]") {
    const ConverterParams p = ideal_params();
    const SwitchedModel m = build_proposed_converter(p);
    const Eigen::VectorXd x = nominal_state(m, p);
    REQUIRE(x.size() == 6);
    REQUIRE(x(0) == Approx(6.0));
    REQUIRE(x(1) == Approx(6.0));
    REQUIRE(x(2) == Approx(240.0));
    REQUIRE(x(3) == Approx(120.0));
    REQUIRE(x(5) == Approx(240.0));
}

TEST_CASE("Leg relabeling approximately swaps the inductor waveforms",
          "[model_core][symmetry][property]") {
    // The multiplier ladder is not mirror symmetric between the legs, so the relabeled
    // run reproduces the swapped currents only approximately.
    ConverterParams a = ideal_params();
    a.l1 = 100e-6;
    a.l2 = 140e-6;
    ConverterParams b = a;
    std::swap(b.l1, b.l2);
    SimConfig config;
    config.initial = InitialState::AnalyticPreload;
    const auto ra = run_to_steady_state(build_proposed_converter(a), gate_schedule(a.duty, a.f_sw),
                                        a, config);
    const auto rb = run_to_steady_state(build_proposed_converter(b), gate_schedule(b.duty, b.f_sw),
                                        b, config);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    const auto& a1 = ra.final_cycle.column("iL1");
    const auto& a2 = ra.final_cycle.column("iL2");
    const auto& b1 = rb.final_cycle.column("iL1");
    const auto& b2 = rb.final_cycle.column("iL2");
    const std::size_t n = a1.size() - 1;
    const std::size_t half = n / 2;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t shifted = (k + half) % n;
        worst = std::max(worst, std::abs(b1[shifted] - a2[k]));
        worst = std::max(worst, std::abs(b2[shifted] - a1[k]));
    }
    const double i_avg = 6.0;
    INFO("worst swapped-current deviation " << worst << " A");
    REQUIRE(worst / i_avg < 0.05);
}
