#include "vmc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vmc/errors.hpp"

namespace vmc {

namespace {

PeriodicMetrics finish(const std::vector<double>& series, double integral, double integral_sq,
                       double span) {
    PeriodicMetrics m;
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    m.min = *lo;
    m.max = *hi;
    m.ripple_pp = m.max - m.min;
    if (span > 0.0) {
        m.mean = integral / span;
        m.rms = std::sqrt(std::max(integral_sq / span, 0.0));
    } else {
        m.mean = series.front();
        m.rms = std::abs(series.front());
    }
    return m;
}

}  // namespace

PeriodicMetrics periodic_metrics(const std::vector<double>& series, double dt) {
    if (series.empty()) throw InputError("periodic_metrics: empty series");
    if (!(dt > 0.0)) throw InputError("periodic_metrics: dt must be > 0");
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k) {
        s += 0.5 * (series[k - 1] + series[k]) * dt;
        s2 += 0.5 * (series[k - 1] * series[k - 1] + series[k] * series[k]) * dt;
    }
    return finish(series, s, s2, dt * static_cast<double>(series.size() - 1));
}

PeriodicMetrics periodic_metrics(const std::vector<double>& series, const std::vector<double>& t) {
    if (series.empty()) throw InputError("periodic_metrics: empty series");
    if (t.size() != series.size()) throw InputError("periodic_metrics: time/series length mismatch");
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double h = t[k] - t[k - 1];
        s += 0.5 * (series[k - 1] + series[k]) * h;
        s2 += 0.5 * (series[k - 1] * series[k - 1] + series[k] * series[k]) * h;
    }
    return finish(series, s, s2, t.back() - t.front());
}

PeriodicMetrics column_metrics(const WaveformSet& w, const std::string& name) {
    return periodic_metrics(w.column(name), w.column("t"));
}

namespace {

double mean_of(const WaveformSet& w, const std::string& name) {
    if (!w.integrals.empty() && w.integrals[0] > 0.0) return w.exact_mean(name);
    return column_metrics(w, name).mean;
}

double peak_of(const WaveformSet& w, const std::string& name) {
    const auto& c = w.column(name);
    if (c.empty()) throw InputError("empty column " + name);
    return std::max(0.0, *std::max_element(c.begin(), c.end()));
}

}  // namespace

StressReport stress_report(const WaveformSet& w) {
    std::string missing;
    for (const char* name : {"vsw1", "vsw2", "is1", "is2", "vd1", "vd2", "vd3", "vd4", "id1", "id2",
                             "id3", "id4"}) {
        if (std::find(w.names.begin(), w.names.end(), name) == w.names.end()) {
            missing += missing.empty() ? name : std::string(", ") + name;
        }
    }
    if (!missing.empty()) throw InputError("stress_report: missing columns " + missing);
    StressReport r;
    for (int k = 1; k <= 2; ++k) {
        const std::string idx = std::to_string(k);
        r.switches.push_back({"S" + idx, peak_of(w, "vsw" + idx), mean_of(w, "is" + idx)});
    }
    for (int k = 1; k <= 4; ++k) {
        const std::string idx = std::to_string(k);
        r.diodes.push_back({"D" + idx, peak_of(w, "vd" + idx), mean_of(w, "id" + idx)});
    }
    return r;
}

double BalanceReport::worst() const {
    double m = std::abs(power_residual);
    for (double v : volt_second) m = std::max(m, std::abs(v));
    for (double v : charge) m = std::max(m, std::abs(v));
    return m;
}

BalanceReport balance_checks(const WaveformSet& w, const ConverterParams& params) {
    BalanceReport b;
    const auto& t = w.column("t");
    const double span = t.back() - t.front();
    auto integral = [&](const std::string& name) {
        if (!w.integrals.empty() && w.integrals[0] > 0.0) return w.exact_mean(name) * span;
        return column_metrics(w, name).mean * span;
    };
    const double vout_mean = mean_of(w, "vout");
    const double i_out = vout_mean / params.r_load;
    const double v_scale = params.v_in > 0.0 ? params.v_in * span : span;
    const double q_scale = i_out > 0.0 ? i_out * span : span;

    for (const char* name : {"vl1", "vl2"}) b.volt_second.push_back(integral(name) / v_scale);
    std::vector<std::string> caps = {"ic1", "ic2", "ic3", "ic4"};
    if (w.has("icout")) caps.push_back("icout");
    for (const auto& name : caps) b.charge.push_back(integral(name) / q_scale);

    const Parasitics& q = params.parasitics;
    b.p_in = params.v_in * mean_of(w, "iin");
    const double vout_rms = column_metrics(w, "vout").rms;
    b.p_out = vout_rms * vout_rms / params.r_load;
    double loss = 0.0;
    for (const char* name : {"iL1", "iL2"}) loss += q.dcr * std::pow(column_metrics(w, name).rms, 2);
    for (const char* name : {"is1", "is2"}) loss += q.r_ds_on * std::pow(column_metrics(w, name).rms, 2);
    for (const auto& name : caps) loss += q.esr * std::pow(column_metrics(w, name).rms, 2);
    for (const char* name : {"id1", "id2", "id3", "id4"}) loss += q.v_f * mean_of(w, name);
    b.p_loss = loss;
    b.power_residual = b.p_in > 0.0 ? (b.p_in - b.p_out - b.p_loss) / b.p_in : 0.0;
    return b;
}

}  // namespace vmc
