#pragma once

#include <string>

namespace vmc {

/// Device parasitics. Zero means the mechanism is ideal.
struct Parasitics {
    double r_ds_on = 7.5e-3;  ///< switch on-resistance [ohm]
    double v_f = 0.61;        ///< diode forward drop [V]
    double dcr = 0.1;         ///< inductor winding resistance [ohm]
    double esr = 10e-3;       ///< capacitor series resistance [ohm]
    double t_on = 30e-9;      ///< switch turn-on transition [s]
    double t_off = 30e-9;     ///< switch turn-off transition [s]

    static Parasitics ideal() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
    bool is_ideal() const;
};

/// Electrical parameters of the converter. Defaults reproduce the reference design point.
struct ConverterParams {
    double v_in = 30.0;
    double duty = 0.75;
    double f_sw = 100e3;
    double l1 = 120e-6;
    double l2 = 120e-6;
    double c1 = 20e-6;
    double c2 = 20e-6;
    double c3 = 20e-6;
    double c4 = 20e-6;
    double c_out = 0.0;  ///< optional output capacitor, 0 = absent
    double r_load = 640.0;  ///< load resistance, +infinity = no load
    Parasitics parasitics;

    double period() const { return 1.0 / f_sw; }
};

/// Throws ConfigError naming the first field that violates its invariant.
void validate_params(const ConverterParams& p);

/// Table values with every parasitic set to zero.
ConverterParams ideal_params();

/// Part-number record implying a parasitic subset.
struct ComponentLibraryEntry {
    std::string part;
    Parasitics implied;
};

/// Switch entry: IPA075N15N3 (R_ds(on) 7.5 mOhm, 150 V).
ComponentLibraryEntry library_switch();
/// Diode entry: 40CPQ100 (V_F 0.61 V).
ComponentLibraryEntry library_diode();

}  // namespace vmc
