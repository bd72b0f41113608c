// =============================================================================
// loss_efficiency: itemized losses, efficiency and load sweeps
// =============================================================================

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "support/fixtures.hpp"
#include "vmc/errors.hpp"
#include "vmc/losses.hpp"
#include "vmc/metrics.hpp"
#include "vmc/steady_state.hpp"

using namespace vmc;
using Catch::Approx;

namespace {

/// Lossy parameters evaluated on the shared ideal steady state.
LossReport reference_losses(const Parasitics& q) {
    const auto& f = testing::ideal_steady_state();
    ConverterParams p = f.params;
    p.parasitics = q;
    return loss_breakdown(p, f.result);
}

/// Steady state with the parasitics embedded in the dynamics.
const SteadyStateResult& lossy_steady_state() {
    static const SteadyStateResult r = [] {
        const ConverterParams p;
        SimConfig c;
        c.initial = InitialState::AnalyticPreload;
        return run_to_steady_state(build_proposed_converter(p), gate_schedule(p.duty, p.f_sw), p,
                                   c);
    }();
    return r;
}

}  // namespace

TEST_CASE("Inductor winding loss", "[loss_efficiency]") {
    REQUIRE(inductor_dcr_loss(6.0244, 0.05, 2) == Approx(3.63).epsilon(1e-3));
    REQUIRE(inductor_dcr_loss(6.0244, 0.0, 2) == 0.0);
    REQUIRE(inductor_dcr_loss(2.0 * 4.1, 0.07) == Approx(4.0 * inductor_dcr_loss(4.1, 0.07)));
    REQUIRE_THROWS_AS(inductor_dcr_loss(-1.0, 0.05), InputError);
    REQUIRE_THROWS_AS(inductor_dcr_loss(1.0, -0.05), InputError);
}

TEST_CASE("Switch conduction loss", "[loss_efficiency]") {
    REQUIRE(switch_conduction_loss(7.5e-3, 5.196, 5.196) == Approx(0.405).epsilon(1e-3));
    REQUIRE(switch_conduction_loss(0.0, 5.0, 6.0) == 0.0);
    REQUIRE_THROWS_AS(switch_conduction_loss(7.5e-3, -1.0, 1.0), InputError);
    REQUIRE_THROWS_AS(switch_conduction_loss(-7.5e-3, 1.0, 1.0), InputError);
}

TEST_CASE("Simulated switch RMS against the flat-top approximation", "[loss_efficiency]") {
    const auto& f = testing::ideal_steady_state();
    const double flat_top = 6.0 * std::sqrt(0.75);
    REQUIRE(flat_top == Approx(5.196).epsilon(1e-4));
    const double s1 = column_metrics(f.result.final_cycle, "is1").rms;
    const double s2 = column_metrics(f.result.final_cycle, "is2").rms;
    INFO("switch rms " << s1 << " and " << s2 << " A");
    REQUIRE(s1 > 0.0);
    REQUIRE(s2 > 0.0);
    // Total conduction loss from the simulated RMS stays within 15% of the flat-top figure.
    const double p_sim = switch_conduction_loss(7.5e-3, s1, s2);
    REQUIRE(p_sim == Approx(0.405).epsilon(0.15));
}

TEST_CASE("Symmetric legs give equal switch conduction terms", "[loss_efficiency][symmetry]") {
    const auto& f = testing::ideal_steady_state();
    const double s1 = column_metrics(f.result.final_cycle, "is1").rms;
    const double s2 = column_metrics(f.result.final_cycle, "is2").rms;
    const double t1 = 7.5e-3 * s1 * s1;
    const double t2 = 7.5e-3 * s2 * s2;
    INFO("per-switch conduction loss " << t1 << " W and " << t2 << " W");
    REQUIRE(std::abs(t1 - t2) <= 0.01 * std::max(t1, t2));
}

TEST_CASE("Switching loss", "[loss_efficiency]") {
    const double one = switch_switching_loss(120.0, 6.0, 20e-9, 20e-9, 100e3);
    REQUIRE(one == Approx(1.44).epsilon(1e-12));
    REQUIRE(2.0 * one == Approx(2.88).epsilon(1e-12));
    REQUIRE(switch_switching_loss(120.0, 6.0, 0.0, 0.0, 100e3) == 0.0);
    REQUIRE(switch_switching_loss(120.0, 6.0, 20e-9, 20e-9, 50e3) == Approx(0.5 * one));
    REQUIRE_THROWS_AS(switch_switching_loss(120.0, 6.0, -1e-9, 20e-9, 100e3), InputError);
}

TEST_CASE("Diode conduction loss", "[loss_efficiency]") {
    REQUIRE(diode_conduction_loss(0.61, 0.75, 4) == Approx(1.83).epsilon(1e-12));
    REQUIRE(diode_conduction_loss(0.61, 0.0, 4) == 0.0);
    REQUIRE(diode_conduction_loss(0.61, 0.75, 1) == Approx(0.4575).epsilon(1e-12));
    REQUIRE_THROWS_AS(diode_conduction_loss(0.61, -0.75, 4), InputError);
}

TEST_CASE("Capacitor ESR loss", "[loss_efficiency]") {
    const std::vector<double> i = {1.0, 2.0, 0.5, 3.0};
    REQUIRE(capacitor_esr_loss(i, 0.0) == 0.0);
    REQUIRE(capacitor_esr_loss(i, 0.02) == Approx(2.0 * capacitor_esr_loss(i, 0.01)));
    REQUIRE(capacitor_esr_loss(i, 0.01) == Approx(0.01 * (1.0 + 4.0 + 0.25 + 9.0)));
    REQUIRE_THROWS_AS(capacitor_esr_loss({1.0, -2.0}, 0.01), InputError);
    REQUIRE_THROWS_AS(capacitor_esr_loss(i, -0.01), InputError);
}

TEST_CASE("Loss breakdown at the reference design", "[loss_efficiency][breakdown]") {
    const LossReport r = reference_losses(Parasitics{});
    INFO("dcr " << r.p_inductor_dcr << " W, conduction " << r.p_switch_conduction
                << " W, switching " << r.p_switch_switching << " W, diode " << r.p_diode
                << " W, esr " << r.p_capacitor_esr << " W");
    REQUIRE(r.p_diode == Approx(1.83).epsilon(0.01));
    REQUIRE(r.efficiency == Approx(0.96).margin(0.01));
    REQUIRE(r.p_total == r.p_inductor_dcr + r.p_switch_conduction + r.p_switch_switching +
                             r.p_diode + r.p_capacitor_esr);
    REQUIRE(r.p_capacitor_esr > 0.0);
    const double smallest = std::min({r.p_inductor_dcr, r.p_switch_conduction,
                                      r.p_switch_switching, r.p_diode, r.p_capacitor_esr});
    REQUIRE(r.p_capacitor_esr == smallest);
    double share_sum = 0.0;
    for (const auto& [name, share] : r.shares) share_sum += share;
    REQUIRE(share_sum == Approx(1.0).epsilon(1e-12));
    REQUIRE(r.efficiency >= 0.0);
    REQUIRE(r.efficiency <= 1.0);
}

TEST_CASE("Diode share is the largest loss category", "[loss_efficiency][breakdown]") {
    const LossReport r = reference_losses(Parasitics{});
    const auto largest = std::max_element(
        r.shares.begin(), r.shares.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    INFO("largest category " << largest->first << " at " << largest->second);
    REQUIRE(largest->first == "diode");
}

TEST_CASE("Lossless breakdown", "[loss_efficiency][breakdown]") {
    const LossReport r = reference_losses(Parasitics::ideal());
    REQUIRE(r.lossless);
    REQUIRE(r.p_total == 0.0);
    REQUIRE(r.efficiency == 1.0);
    for (const auto& [name, share] : r.shares) REQUIRE(share == 0.0);
}

TEST_CASE("Loss breakdown requires a converged run", "[loss_efficiency][errors]") {
    const ConverterParams p = ideal_params();
    SimConfig c;
    c.max_cycles = 1;
    const SteadyStateResult r =
        run_to_steady_state(build_proposed_converter(p), gate_schedule(p.duty, p.f_sw), p, c);
    REQUIRE_THROWS_AS(loss_breakdown(ConverterParams{}, r), PreconditionError);
}

TEST_CASE("Resistive shares keep their ratios under parasitic scaling",
          "[loss_efficiency][property]") {
    const LossReport base = reference_losses(Parasitics{});
    for (double k : {0.25, 2.0, 7.0}) {
        Parasitics q;
        q.dcr *= k;
        q.esr *= k;
        q.r_ds_on *= k;
        const LossReport scaled = reference_losses(q);
        REQUIRE(scaled.p_inductor_dcr / scaled.p_capacitor_esr ==
                Approx(base.p_inductor_dcr / base.p_capacitor_esr).epsilon(1e-12));
        REQUIRE(scaled.p_inductor_dcr / scaled.p_switch_conduction ==
                Approx(base.p_inductor_dcr / base.p_switch_conduction).epsilon(1e-12));
    }
}

TEST_CASE("Power accounting closes with parasitics in the dynamics", "[loss_efficiency][property]") {
    const ConverterParams p;
    const SteadyStateResult& r = lossy_steady_state();
    REQUIRE(r.converged);
    const LossReport dyn = loss_breakdown(p, r);
    REQUIRE(dyn.parasitics_in_dynamics);
    // The simulated input power covers everything except the switching transitions,
    // which the matrices do not model.
    const double p_in = dyn.p_in + dyn.p_switch_switching;
    const double closure = std::abs(p_in - dyn.p_out - dyn.p_total) / p_in;
    INFO("P_in " << p_in << " W, P_out " << dyn.p_out << " W, p_total " << dyn.p_total << " W");
    REQUIRE(closure < 0.02);

    const BalanceReport b = balance_checks(r.final_cycle, p);
    REQUIRE(std::abs(b.power_residual) < 1e-3);
}

TEST_CASE("Simulated efficiency agrees with the loss model", "[loss_efficiency][property]") {
    const ConverterParams p;
    const LossReport dyn = loss_breakdown(p, lossy_steady_state());
    const LossReport model = reference_losses(Parasitics{});
    INFO("simulated " << dyn.efficiency << ", loss model " << model.efficiency);
    REQUIRE(std::abs(dyn.efficiency - model.efficiency) < 0.01);
    const double from_items = dyn.p_out / (dyn.p_out + dyn.p_total);
    REQUIRE(std::abs(dyn.efficiency - from_items) < 0.01);
}

TEST_CASE("Efficiency sweep peaks inside the load range", "[loss_efficiency][sweep]") {
    std::vector<double> powers;
    for (int k = 0; k < 20; ++k) powers.push_back(50.0 + 310.0 * k / 19.0);
    const auto points = efficiency_sweep(ConverterParams{}, powers, sweep_config());
    REQUIRE(points.size() == 20);
    for (const auto& pt : points) {
        INFO(pt.p_out << " W " << pt.warning);
        REQUIRE(pt.ok);
    }
    bool monotone_increasing = true;
    for (std::size_t k = 1; k < points.size(); ++k) {
        if (points[k].efficiency < points[k - 1].efficiency) monotone_increasing = false;
    }
    REQUIRE_FALSE(monotone_increasing);
    const auto peak = std::max_element(points.begin(), points.end(),
                                       [](const auto& a, const auto& b) {
                                           return a.efficiency < b.efficiency;
                                       });
    REQUIRE(peak->p_out < 360.0);
}

TEST_CASE("Single sweep point reproduces the breakdown", "[loss_efficiency][sweep]") {
    const ConverterParams p;
    const SimConfig c = sweep_config();
    const auto points = efficiency_sweep(p, {360.0}, c);
    REQUIRE(points.size() == 1);
    REQUIRE(points[0].ok);
    REQUIRE(points[0].r_load == Approx(640.0).epsilon(1e-12));
    REQUIRE(points[0].efficiency == Approx(evaluate_losses(p, c).efficiency).epsilon(1e-12));
}

TEST_CASE("Lossless sweep is flat at one", "[loss_efficiency][sweep]") {
    ConverterParams p;
    p.parasitics = Parasitics::ideal();
    const auto points = efficiency_sweep(p, {60.0, 200.0, 360.0}, sweep_config());
    for (const auto& pt : points) {
        REQUIRE(pt.ok);
        REQUIRE(pt.efficiency == 1.0);
    }
}

TEST_CASE("Infeasible load points are skipped with a warning", "[loss_efficiency][sweep]") {
    const auto points = efficiency_sweep(ConverterParams{}, {-5.0, 0.0}, sweep_config());
    for (const auto& pt : points) {
        REQUIRE_FALSE(pt.ok);
        REQUIRE(pt.warning.find("skipped") == 0);
    }
}
