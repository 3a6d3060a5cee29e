#include "doa/zubov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace doa {

void ZubovConfig::validate() const {
    if (!(delta_I > 0) || !(M > 0) || !(alpha > 0) || !(dt_chunk > 0) || !(t_max > 0))
        throw Error("ZubovConfig: delta_I, M, alpha, dt_chunk and t_max must be positive");
    if (t_max < dt_chunk) throw Error("ZubovConfig: t_max must be at least dt_chunk");
    if (max_samples < 2) throw Error("ZubovConfig: max_samples must be at least 2");
    solver.validate();
}

std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Converged: return "converged";
        case OutcomeKind::Exceeded: return "exceeded";
        case OutcomeKind::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

void thin(TrajectoryRecord& r, std::size_t cap) {
    const std::size_t n = r.size();
    if (n <= cap) return;
    TrajectoryRecord out;
    out.t.reserve(cap);
    out.x.reserve(cap);
    out.z.reserve(cap);
    for (std::size_t k = 0; k < cap; ++k) {
        const std::size_t i = (k * (n - 1) + (cap - 1) / 2) / (cap - 1);
        out.t.push_back(r.t[i]);
        out.x.push_back(std::move(r.x[i]));
        out.z.push_back(r.z[i]);
    }
    r = std::move(out);
}

void append(TrajectoryRecord& r, const TrajectoryChunk& c) {
    // The first sample of every chunk repeats the previous chunk's last one.
    const std::size_t first = r.size() == 0 ? 0 : 1;
    for (std::size_t i = first; i < c.samples.size(); ++i) {
        r.t.push_back(c.samples[i].t);
        r.x.push_back(c.samples[i].s.x);
        r.z.push_back(c.samples[i].s.z);
    }
}

}  // namespace

IValueOutcome compute_I(const SystemModel& sys, const WKind& w, const Vec& x0, const ZubovConfig& cfg) {
    cfg.validate();
    require_dim("compute_I initial state", sys.dim(), x0.size());

    IValueOutcome out;
    out.x0 = x0;
    SolverConfig solver = cfg.solver;
    ChunkOptions opts;
    opts.norm_bound = cfg.norm_bound;
    opts.z_limit = cfg.M;

    AugmentedState s{x0, 0.0};
    double t = 0.0;
    for (;;) {
        TrajectoryChunk chunk;
        try {
            chunk = integrate_chunk(sys, w, s, t, cfg.dt_chunk, solver, opts);
        } catch (const BlowUpError& e) {
            out.kind = OutcomeKind::Exceeded;
            out.blew_up = true;
            out.elapsed = e.time();
            out.z_final = s.z;
            break;
        }
        append(out.trajectory, chunk);
        s = chunk.back().s;
        t = chunk.back().t;
        solver.h_init = std::clamp(chunk.next_step, solver.h_min, solver.h_max);
        out.elapsed = t;
        out.z_final = s.z;

        if (chunk.hit_z_limit || s.z > cfg.M) {
            out.kind = OutcomeKind::Exceeded;
            break;
        }
        const auto& before = chunk.samples[chunk.samples.size() - 2];
        const double slope = (s.z - before.s.z) / chunk.last_step;
        if (slope < cfg.delta_I) {
            out.kind = OutcomeKind::Converged;
            out.I = s.z;
            break;
        }
        if (t >= cfg.t_max) {
            out.kind = OutcomeKind::Inconclusive;
            break;
        }
    }
    thin(out.trajectory, cfg.max_samples);
    return out;
}

double eval_V(const IValueOutcome& outcome, double alpha) {
    switch (outcome.kind) {
        case OutcomeKind::Converged: return std::tanh(alpha * outcome.I);
        case OutcomeKind::Exceeded: return 1.0;
        case OutcomeKind::Inconclusive: break;
    }
    throw Error("eval_V: cannot classify within t_max (inconclusive outcome)");
}

Calibration calibrate_from_max(double max_converged_I) {
    if (!(max_converged_I >= 0) || !std::isfinite(max_converged_I))
        throw Error("calibrate: invalid maximum converged I");
    Calibration c;
    c.max_converged_I = max_converged_I;
    c.M = std::max(50.0, 50.0 * std::ceil(2.0 * max_converged_I / 50.0));
    // 20/M or a neighbouring double, chosen so that alpha * M rounds to 20.
    c.alpha = 20.0 / c.M;
    for (double a : {c.alpha, std::nextafter(c.alpha, 0.0), std::nextafter(c.alpha, 1.0)})
        if (a * c.M == 20.0) {
            c.alpha = a;
            break;
        }
    c.gap = max_converged_I > 0 ? c.M / max_converged_I : std::numeric_limits<double>::infinity();
    return c;
}

Calibration calibrate(const std::vector<IValueOutcome>& outcomes) {
    double max_I = -1.0;
    std::size_t conv = 0, exc = 0, inc = 0;
    for (const auto& o : outcomes) {
        switch (o.kind) {
            case OutcomeKind::Converged:
                ++conv;
                max_I = std::max(max_I, o.I);
                break;
            case OutcomeKind::Exceeded: ++exc; break;
            case OutcomeKind::Inconclusive: ++inc; break;
        }
    }
    if (conv == 0) throw Error("calibrate: no converged outcomes");
    Calibration c = calibrate_from_max(max_I);
    c.converged = conv;
    c.exceeded = exc;
    c.inconclusive = inc;
    return c;
}

std::ostream& operator<<(std::ostream& os, const Calibration& c) {
    return os << "max converged I = " << c.max_converged_I << ", M = " << c.M
              << ", alpha = " << c.alpha << ", gap = " << c.gap << "x (" << c.converged
              << " converged, " << c.exceeded << " exceeded, " << c.inconclusive
              << " inconclusive)";
}

double zubov_residual(const SystemModel& sys, const WKind& w, const Vec& x0, const ZubovConfig& cfg,
                      const ResidualOptions& opt) {
    const IValueOutcome out = compute_I(sys, w, x0, cfg);
    if (!out.converged())
        throw Error("zubov_residual: initial state did not converge (" + to_string(out.kind) + ")");
    if (out.I == 0.0) return 0.0;

    // Uniform re-sampling of the same trajectory.
    std::vector<AugmentedState> grid{{x0, 0.0}};
    SolverConfig solver = cfg.solver;
    ChunkOptions chunk_opts;
    chunk_opts.norm_bound = cfg.norm_bound;
    const auto n_steps = static_cast<std::size_t>(std::ceil(out.elapsed / opt.sample_dt));
    double t = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const auto chunk = integrate_chunk(sys, w, grid.back(), t, opt.sample_dt, solver, chunk_opts);
        solver.h_init = std::clamp(chunk.next_step, solver.h_min, solver.h_max);
        t = chunk.back().t;
        grid.push_back(chunk.back().s);
    }

    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) v[k] = std::tanh(cfg.alpha * (out.I - grid[k].z));

    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        if (!(v[k] < opt.v_cap)) continue;
        const double dvdt = (v[k + 1] - v[k - 1]) / (2.0 * opt.sample_dt);
        const double rhs = psi(v[k], eval_w(w, sys, grid[k].x), cfg.alpha) * (1.0 - v[k]);
        worst = std::max(worst, std::abs(dvdt + rhs) / std::max(1e-8, std::abs(dvdt)));
    }
    return worst;
}

void write_ivalue_table(std::ostream& os, const std::vector<IValueOutcome>& outcomes, double M) {
    os << "sample_index,I,censored\n";
    char buf[64];
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (o.kind == OutcomeKind::Inconclusive) continue;
        const bool censored = o.kind == OutcomeKind::Exceeded;
        std::snprintf(buf, sizeof buf, "%.17g", censored ? M : o.I);
        os << i << ',' << buf << ',' << (censored ? 1 : 0) << '\n';
    }
}

}  // namespace doa
