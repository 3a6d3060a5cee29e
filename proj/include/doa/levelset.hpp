#pragma once

#include "doa/types.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace doa {

/// V sampled on a regular nx x ny node grid over a 2-D region;
/// values(i, j) belongs to node(i, j).
struct GridField {
    Region region;
    Eigen::Index nx = 0;
    Eigen::Index ny = 0;
    Mat values;
    std::size_t failures = 0;  ///< nodes whose evaluator threw (stored as 1)

    Eigen::Vector2d node(Eigen::Index i, Eigen::Index j) const;
};

using Evaluator = std::function<double(const Vec&)>;

GridField evaluate_grid(const Evaluator& evaluator, const Region& region, Eigen::Index nx,
                        Eigen::Index ny, std::size_t workers = 1);

using Polyline = std::vector<Eigen::Vector2d>;

struct LevelCurve {
    double level = 0.0;
    std::vector<Polyline> polylines;  ///< closed loops repeat their first vertex at the end
};

/// Marching squares for {V = r}; saddle cells are split according to the
/// cell-centre value (mean of the corners).
LevelCurve extract_level(const GridField& g, double r);

bool is_closed(const Polyline& p);

/// Even-odd point-in-polygon test against a closed polyline.
bool point_in_polygon(const Polyline& poly, const Eigen::Vector2d& p);

/// x1 coordinates where the curve crosses the half-axis {x2 = 0, x1 > 0}.
std::vector<double> positive_x1_crossings(const LevelCurve& c);

/// Comma-separated table level,polyline_id,x1,x2.
void write_level_curves_csv(std::ostream& os, const std::vector<LevelCurve>& curves);

}  // namespace doa
