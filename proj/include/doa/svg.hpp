#pragma once

#include "doa/levelset.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace doa {

struct ScatterPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double value = 0.0;  ///< colour-mapped on [0, vmax]
    bool censored = false;
};

/// Initial conditions coloured by I-value; censored points drawn as hollow markers.
void write_scatter_svg(std::ostream& os, const Region& region, const std::vector<ScatterPoint>& pts,
                       double vmax, const std::string& title);

/// Level curves over the region, one colour per level.
void write_level_curves_svg(std::ostream& os, const Region& region, const std::vector<LevelCurve>& curves,
                            const std::string& title);

}  // namespace doa
