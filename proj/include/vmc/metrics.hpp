#pragma once

#include <string>
#include <vector>

#include "vmc/params.hpp"
#include "vmc/sim.hpp"

namespace vmc {

struct PeriodicMetrics {
    double mean = 0.0;
    double rms = 0.0;
    double ripple_pp = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Trapezoidal mean/rms of a series sampled at uniform dt over exactly one period
/// (first and last samples are the period endpoints).
PeriodicMetrics periodic_metrics(const std::vector<double>& series, double dt);
/// Same over explicit sample times.
PeriodicMetrics periodic_metrics(const std::vector<double>& series, const std::vector<double>& t);
/// Metrics of a named column, using the column's sample times.
PeriodicMetrics column_metrics(const WaveformSet& w, const std::string& name);

struct DeviceStress {
    std::string device;
    double peak_voltage = 0.0;  ///< peak blocking voltage [V]
    double mean_current = 0.0;  ///< period-average conduction current [A]
};

struct StressReport {
    std::vector<DeviceStress> switches;
    std::vector<DeviceStress> diodes;
};

/// Peak off-state voltage and mean current per switch and diode.
StressReport stress_report(const WaveformSet& w);

struct BalanceReport {
    std::vector<double> volt_second;  ///< per inductor, normalized by v_in*T
    std::vector<double> charge;       ///< per capacitor, normalized by i_out*T
    double power_residual = 0.0;      ///< (P_in - P_out - P_loss)/P_in
    double p_in = 0.0;
    double p_out = 0.0;
    double p_loss = 0.0;              ///< dissipation of the parasitics embedded in the dynamics

    double worst() const;
};

/// Volt-second, charge and power balance of a one-period waveform.
BalanceReport balance_checks(const WaveformSet& w, const ConverterParams& params);

}  // namespace vmc
