#include "doa/presets.hpp"

namespace doa {

std::string default_swing_params_path() { return std::string(DOA_DATA_DIR) + "/ne39_reduced.params"; }

SwingParams load_swing_with_equilibrium(const std::string& path) {
    SwingParams p = load_swing_params(path);
    if (p.delta_eq) return p;
    Vec guess(2 * p.m);
    for (int i = 0; i < p.m; ++i) {
        guess(2 * i) = p.omega0;
        guess(2 * i + 1) = 0.0;
    }
    const Vec xe = refine_equilibrium(make_swing(p), guess);
    Vec d(p.m);
    for (int i = 0; i < p.m; ++i) d(i) = xe(2 * i + 1);
    p.delta_eq = d;
    return p;
}

Preset make_preset(const std::string& name, const std::string& params_path) {
    if (name == "vdp") return {name, make_vanderpol(), DistanceSquared{Vec::Zero(2)}, {}, Region::cube(2, -4, 4), ""};
    if (name == "linear") return {name, make_linear(2), DistanceSquared{Vec::Zero(2)}, {}, Region::cube(2, -3, 3), ""};
    if (name == "swing") {
        const std::string path = params_path.empty() ? default_swing_params_path() : params_path;
        const SwingParams p = load_swing_with_equilibrium(path);
        Preset s{name, make_swing(p), FieldNormScaled{1000.0}, {}, swing_region(p), path};
        s.cfg.M = 250.0;
        s.cfg.alpha = 0.08;
        // Absolute speeds sit near omega0, so the default relative tolerance
        // leaves solver noise above the convergence threshold.
        s.cfg.solver.rel_tol = 1e-8;
        s.cfg.solver.abs_tol = 1e-10;
        return s;
    }
    throw Error("unknown system '" + name + "' (expected vdp, swing or linear)");
}

}  // namespace doa
