#pragma once

#include "doa/zubov.hpp"

#include <string>

namespace doa {

/// A system together with the W function, solver settings and sampling
/// region used for it by default.
struct Preset {
    std::string name;
    SystemModel sys;
    WKind w;
    ZubovConfig cfg;
    Region region;
    std::string params_path;  ///< swing only
};

/// Path of the shipped 39-bus parameter file.
std::string default_swing_params_path();

/// Loads swing parameters; if the file has no delta_eq, the equilibrium is
/// refined from a flat start (omega0, 0).
SwingParams load_swing_with_equilibrium(const std::string& path);

/// "vdp", "linear" or "swing". `params_path` is only used for swing (empty
/// selects the shipped file).
Preset make_preset(const std::string& name, const std::string& params_path = "");

}  // namespace doa
