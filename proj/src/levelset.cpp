#include "doa/levelset.hpp"

#include "doa/parallel.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace doa {

Eigen::Vector2d GridField::node(Eigen::Index i, Eigen::Index j) const {
    const double dx = (region.upper(0) - region.lower(0)) / static_cast<double>(nx - 1);
    const double dy = (region.upper(1) - region.lower(1)) / static_cast<double>(ny - 1);
    return {region.lower(0) + static_cast<double>(i) * dx, region.lower(1) + static_cast<double>(j) * dy};
}

GridField evaluate_grid(const Evaluator& evaluator, const Region& region, Eigen::Index nx,
                        Eigen::Index ny, std::size_t workers) {
    require_dim("evaluate_grid region", 2, region.dim());
    if (nx < 2 || ny < 2) throw Error("evaluate_grid: need at least 2 nodes per axis");
    GridField g;
    g.region = region;
    g.nx = nx;
    g.ny = ny;
    g.values.resize(nx, ny);
    std::vector<char> failed(static_cast<std::size_t>(nx * ny), 0);
    parallel_for(static_cast<std::size_t>(nx * ny), workers, [&](std::size_t k) {
        const auto i = static_cast<Eigen::Index>(k) / ny;
        const auto j = static_cast<Eigen::Index>(k) % ny;
        const Vec x = g.node(i, j);
        try {
            g.values(i, j) = evaluator(x);
        } catch (const std::exception&) {
            g.values(i, j) = 1.0;
            failed[k] = 1;
        }
    });
    for (char f : failed) g.failures += static_cast<std::size_t>(f);
    return g;
}

namespace {

// Crossing vertices are identified by the grid edge they lie on, so adjacent
// cells produce bit-identical shared vertices.
struct EdgeKey {
    static std::int64_t horizontal(Eigen::Index i, Eigen::Index j, Eigen::Index ny) { return (i * (ny + 1) + j) * 2; }
    static std::int64_t vertical(Eigen::Index i, Eigen::Index j, Eigen::Index ny) { return (i * (ny + 1) + j) * 2 + 1; }
};

}  // namespace

LevelCurve extract_level(const GridField& g, double r) {
    if (!(r > 0.0 && r < 1.0)) throw Error("extract_level: level must lie in (0, 1)");
    LevelCurve curve;
    curve.level = r;

    std::unordered_map<std::int64_t, Eigen::Vector2d> position;
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> adjacent;

    auto vertex = [&](Eigen::Index i0, Eigen::Index j0, Eigen::Index i1, Eigen::Index j1) {
        const std::int64_t key = (i0 == i1) ? EdgeKey::vertical(i0, j0, g.ny) : EdgeKey::horizontal(i0, j0, g.ny);
        if (!position.count(key)) {
            const double va = g.values(i0, j0), vb = g.values(i1, j1);
            const double t = (r - va) / (vb - va);
            position[key] = g.node(i0, j0) + t * (g.node(i1, j1) - g.node(i0, j0));
        }
        return key;
    };
    auto link = [&](std::int64_t a, std::int64_t b) {
        adjacent[a].push_back(b);
        adjacent[b].push_back(a);
    };

    for (Eigen::Index i = 0; i + 1 < g.nx; ++i) {
        for (Eigen::Index j = 0; j + 1 < g.ny; ++j) {
            // Corners counter-clockwise: 00, 10, 11, 01.
            const double v[4] = {g.values(i, j), g.values(i + 1, j), g.values(i + 1, j + 1), g.values(i, j + 1)};
            const bool in[4] = {v[0] < r, v[1] < r, v[2] < r, v[3] < r};
            const int count = in[0] + in[1] + in[2] + in[3];
            if (count == 0 || count == 4) continue;

            // Edge e joins corner e and corner e+1.
            auto edge = [&](int e) {
                switch (e) {
                    case 0: return vertex(i, j, i + 1, j);
                    case 1: return vertex(i + 1, j, i + 1, j + 1);
                    case 2: return vertex(i, j + 1, i + 1, j + 1);
                    default: return vertex(i, j, i, j + 1);
                }
            };
            const bool saddle = count == 2 && in[0] == in[2];
            if (saddle) {
                const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) < r;
                // Cut off the corners whose state differs from the centre.
                for (int c = 0; c < 4; ++c)
                    if (in[c] != centre_in) link(edge((c + 3) % 4), edge(c));
            } else {
                int ends[2], n = 0;
                for (int e = 0; e < 4; ++e)
                    if (in[e] != in[(e + 1) % 4]) ends[n++] = e;
                link(edge(ends[0]), edge(ends[1]));
            }
        }
    }

    // Chain segments: open chains from degree-1 vertices first, then loops.
    std::unordered_map<std::int64_t, bool> used;
    std::vector<std::int64_t> keys;
    keys.reserve(adjacent.size());
    for (const auto& [k, _] : adjacent) keys.push_back(k);
    std::sort(keys.begin(), keys.end());

    auto walk = [&](std::int64_t start) {
        Polyline line{position[start]};
        used[start] = true;
        std::int64_t cur = start;
        for (;;) {
            std::int64_t next = -1;
            for (auto nb : adjacent[cur])
                if (!used[nb]) {
                    next = nb;
                    break;
                }
            if (next < 0) {
                for (auto nb : adjacent[cur])
                    if (nb == start && line.size() > 2) line.push_back(position[start]);
                break;
            }
            used[next] = true;
            line.push_back(position[next]);
            cur = next;
        }
        curve.polylines.push_back(std::move(line));
    };
    for (auto k : keys)
        if (!used[k] && adjacent[k].size() == 1) walk(k);
    for (auto k : keys)
        if (!used[k]) walk(k);
    return curve;
}

bool is_closed(const Polyline& p) { return p.size() > 3 && p.front() == p.back(); }

bool point_in_polygon(const Polyline& poly, const Eigen::Vector2d& p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        const auto& pa = poly[a];
        const auto& pb = poly[b];
        if ((pa.y() > p.y()) != (pb.y() > p.y())) {
            const double x = pb.x() + (p.y() - pb.y()) * (pa.x() - pb.x()) / (pa.y() - pb.y());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

std::vector<double> positive_x1_crossings(const LevelCurve& c) {
    std::vector<double> out;
    for (const auto& line : c.polylines) {
        for (std::size_t k = 0; k + 1 < line.size(); ++k) {
            const auto& a = line[k];
            const auto& b = line[k + 1];
            if ((a.y() < 0) == (b.y() < 0)) continue;
            const double t = a.y() / (a.y() - b.y());
            const double x = a.x() + t * (b.x() - a.x());
            if (x > 0) out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_level_curves_csv(std::ostream& os, const std::vector<LevelCurve>& curves) {
    os << "level,polyline_id,x1,x2\n";
    char buf[128];
    for (const auto& c : curves) {
        for (std::size_t id = 0; id < c.polylines.size(); ++id) {
            for (const auto& v : c.polylines[id]) {
                std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", c.level, id, v.x(), v.y());
                os << buf;
            }
        }
    }
}

}  // namespace doa
