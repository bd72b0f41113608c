#include "vmc/params.hpp"

#include <cmath>

#include "vmc/errors.hpp"

namespace vmc {

bool Parasitics::is_ideal() const {
    return r_ds_on == 0.0 && v_f == 0.0 && dcr == 0.0 && esr == 0.0 && t_on == 0.0 &&
           t_off == 0.0;
}

namespace {

void require_positive(const char* name, double v) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw ConfigError(name, "must be finite and > 0");
    }
}

void require_nonnegative(const char* name, double v) {
    if (!std::isfinite(v) || v < 0.0) {
        throw ConfigError(name, "must be finite and >= 0");
    }
}

}  // namespace

void validate_params(const ConverterParams& p) {
    require_nonnegative("v_in", p.v_in);
    if (!std::isfinite(p.duty) || p.duty <= 0.0 || p.duty >= 1.0) {
        throw ConfigError("duty", "must lie in (0, 1)");
    }
    require_positive("f_sw", p.f_sw);
    require_positive("l1", p.l1);
    require_positive("l2", p.l2);
    require_positive("c1", p.c1);
    require_positive("c2", p.c2);
    require_positive("c3", p.c3);
    require_positive("c4", p.c4);
    require_nonnegative("c_out", p.c_out);
    if (std::isnan(p.r_load) || p.r_load <= 0.0) {
        throw ConfigError("r_load", "must be > 0 (infinity means no load)");
    }
    require_nonnegative("r_ds_on", p.parasitics.r_ds_on);
    require_nonnegative("v_f", p.parasitics.v_f);
    require_nonnegative("dcr", p.parasitics.dcr);
    require_nonnegative("esr", p.parasitics.esr);
    require_nonnegative("t_on", p.parasitics.t_on);
    require_nonnegative("t_off", p.parasitics.t_off);
}

ConverterParams ideal_params() {
    ConverterParams p;
    p.parasitics = Parasitics::ideal();
    return p;
}

ComponentLibraryEntry library_switch() {
    Parasitics q = Parasitics::ideal();
    q.r_ds_on = 7.5e-3;
    return {"IPA075N15N3GXKSA1", q};
}

ComponentLibraryEntry library_diode() {
    Parasitics q = Parasitics::ideal();
    q.v_f = 0.61;
    return {"40CPQ100", q};
}

}  // namespace vmc
