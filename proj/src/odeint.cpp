#include "doa/odeint.hpp"

#include <algorithm>

namespace doa {

void SolverConfig::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw Error("SolverConfig: tolerances must be positive");
    if (!(h_min > 0) || !(h_min <= h_init) || !(h_init <= h_max))
        throw Error("SolverConfig: need 0 < h_min <= h_init <= h_max");
}

namespace {

// Packed augmented field y = (x, z) -> (f(x), W(x)).
class PackedField {
public:
    PackedField(const SystemModel& sys, const WKind& w)
        : sys_(sys), w_(w), x_(sys.dim()), fx_(sys.dim()) {}

    void operator()(const Vec& y, Vec& dy) {
        const Eigen::Index n = sys_.dim();
        x_ = y.head(n);
        sys_.eval_into(x_, fx_);
        dy.head(n) = fx_;
        dy(n) = eval_w(w_, x_, fx_);
    }

private:
    const SystemModel& sys_;
    const WKind& w_;
    Vec x_, fx_;
};

void check_finite(const Vec& v, const std::string& what) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i))) throw NonFiniteError("non-finite " + what, i);
}

Vec pack(const AugmentedState& s) {
    Vec y(s.x.size() + 1);
    y.head(s.x.size()) = s.x;
    y(s.x.size()) = s.z;
    return y;
}

AugmentedState unpack(const Vec& y) {
    const Eigen::Index n = y.size() - 1;
    return {y.head(n), y(n)};
}

// Shared stepping loop for chunk integration and z-targeting.
class Stepper {
public:
    Stepper(const SystemModel& sys, const WKind& w, const AugmentedState& s0, double t0,
            const SolverConfig& cfg, double h_max)
        : field_(sys, w), dp_(sys.dim() + 1), cfg_(cfg), h_max_(h_max), t_(t0), y_(pack(s0)),
          k1_(y_.size()), y_new_(y_.size()), k7_(y_.size()) {
        cfg_.validate();
        require_dim("augmented initial state", sys.dim(), s0.x.size());
        field_(y_, k1_);
        check_finite(y_, "state");
        check_finite(k1_, "derivative");
        h_ = std::clamp(cfg_.h_init, cfg_.h_min, std::max(cfg_.h_min, h_max_));
    }

    // Tries one step of size h_try; returns true if it was accepted.
    bool try_step(double h_try, bool lands_on, double t_land) {
        const double err = dp_.attempt(field_, y_, k1_, h_try, cfg_.rel_tol, cfg_.abs_tol, y_new_, k7_);
        if (!std::isfinite(err)) {
            check_finite(y_new_, "state");
            check_finite(k7_, "derivative");
            throw NonFiniteError("non-finite error estimate", 0);
        }
        if (err <= 1.0) {
            y_prev_ = y_;
            t_prev_ = t_;
            k1_prev_ = k1_;
            std::swap(y_, y_new_);
            std::swap(k1_, k7_);
            t_ = lands_on ? t_land : t_ + h_try;
            last_step_ = h_try;
            ++accepted_;
            const double proposal = std::min(h_max_, propose_step(h_try, err));
            h_ = h_try < h_ ? std::max(h_, proposal) : proposal;
            h_ = std::max(h_, cfg_.h_min);
            return true;
        }
        ++rejected_;
        h_ = h_try * std::max(0.2, std::min(1.0, 0.9 * std::pow(err, -0.2)));
        if (h_ < cfg_.h_min)
            throw StepUnderflowError("step size fell below h_min at t=" + std::to_string(t_));
        return false;
    }

    // Reintegrates the last accepted step with a shorter length so that z hits
    // the target; z is monotone in the step length because W >= 0.
    void settle_on_z(double z_target) {
        const Eigen::Index iz = y_.size() - 1;
        double lo = 0.0, hi = last_step_;
        double g_lo = y_prev_(iz) - z_target, g_hi = y_(iz) - z_target;
        Vec y_try(y_.size()), k_try(y_.size());
        double best = hi;
        Vec y_best = y_;
        int side = 0;
        for (int it = 0; it < 200; ++it) {
            if (std::abs(g_hi) <= 1e-14 * std::max(1.0, std::abs(z_target)) || hi - lo <= 1e-16 * last_step_)
                break;
            double hm = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            if (!(hm > lo && hm < hi)) hm = 0.5 * (lo + hi);
            dp_.attempt(field_, y_prev_, k1_prev_, hm, cfg_.rel_tol, cfg_.abs_tol, y_try, k_try);
            const double gm = y_try(iz) - z_target;
            if (gm >= 0) {
                hi = hm;
                g_hi = gm;
                best = hm;
                y_best = y_try;
                if (side == +1) g_lo *= 0.5;  // Illinois modification
                side = +1;
            } else {
                lo = hm;
                g_lo = gm;
                if (side == -1) g_hi *= 0.5;
                side = -1;
            }
        }
        y_ = y_best;
        t_ = t_prev_ + best;
    }

    double t() const { return t_; }
    double h() const { return h_; }
    const Vec& y() const { return y_; }
    double z() const { return y_(y_.size() - 1); }
    double x_norm() const { return y_.head(y_.size() - 1).norm(); }
    double last_step() const { return last_step_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t rejected() const { return rejected_; }

private:
    PackedField field_;
    DormandPrince54<double> dp_;
    SolverConfig cfg_;
    double h_max_;
    double t_;
    double t_prev_ = 0.0;
    double h_ = 0.0;
    double last_step_ = 0.0;
    Vec y_, k1_, y_new_, k7_, y_prev_, k1_prev_;
    std::size_t accepted_ = 0, rejected_ = 0;
};

}  // namespace

AugmentedField make_augmented(const SystemModel& sys, const WKind& w) {
    return [sys, w](const Vec& x, Vec& dx, double& dz) {
        sys.eval_into(x, dx);
        dz = eval_w(w, x, dx);
    };
}

StepResult rk45_step(const AugmentedField& f, double t, const AugmentedState& s, double h,
                     const SolverConfig& cfg) {
    (void)t;  // autonomous
    if (!(h >= cfg.h_min && h <= cfg.h_max)) throw Error("rk45_step: step outside [h_min, h_max]");
    const Eigen::Index n = s.x.size();
    Vec xb(n), fb(n);
    auto packed = [&](const Vec& y, Vec& dy) {
        xb = y.head(n);
        double dz = 0.0;
        f(xb, fb, dz);
        dy.head(n) = fb;
        dy(n) = dz;
    };
    const Vec y = pack(s);
    Vec k1(n + 1), y_new(n + 1), k7(n + 1);
    packed(y, k1);
    check_finite(y, "state");
    check_finite(k1, "derivative");
    DormandPrince54<double> dp(n + 1);
    const double err = dp.attempt(packed, y, k1, h, cfg.rel_tol, cfg.abs_tol, y_new, k7);
    check_finite(y_new, "state");
    check_finite(k7, "derivative");

    StepResult r;
    r.err = err;
    r.accepted = err <= 1.0;
    r.next = r.accepted ? unpack(y_new) : s;
    r.h_next = r.accepted ? propose_step(h, err)
                          : h * std::max(0.2, std::min(1.0, 0.9 * std::pow(err, -0.2)));
    r.h_next = std::clamp(r.h_next, cfg.h_min, cfg.h_max);
    return r;
}

TrajectoryChunk integrate_chunk(const SystemModel& sys, const WKind& w, const AugmentedState& s0,
                                double t0, double dt_chunk, const SolverConfig& cfg,
                                const ChunkOptions& opts) {
    if (!(dt_chunk > 0)) throw Error("integrate_chunk: chunk length must be positive");
    SolverConfig local = cfg;
    local.h_max = std::min(cfg.h_max, dt_chunk);
    local.h_init = std::clamp(cfg.h_init, local.h_min, local.h_max);
    Stepper st(sys, w, s0, t0, local, local.h_max);

    TrajectoryChunk chunk;
    chunk.samples.push_back({t0, s0});
    const double t_end = t0 + dt_chunk;
    while (st.t() < t_end) {
        const double remaining = t_end - st.t();
        double h_try = st.h();
        bool lands = false;
        if (h_try >= remaining) {
            h_try = remaining;
            lands = true;
        } else if (h_try > 0.5 * remaining) {
            h_try = 0.5 * remaining;  // avoid a sliver final step
        }
        if (!st.try_step(h_try, lands, t_end)) continue;

        chunk.samples.push_back({st.t(), unpack(st.y())});
        if (st.x_norm() > opts.norm_bound) throw BlowUpError(st.t(), st.x_norm());
        if (st.z() > opts.z_limit) {
            chunk.hit_z_limit = true;
            break;
        }
    }
    chunk.last_step = st.last_step();
    chunk.next_step = st.h();
    chunk.steps_accepted = st.accepted();
    chunk.steps_rejected = st.rejected();
    return chunk;
}

TrajectorySample advance_to_z(const SystemModel& sys, const WKind& w, const AugmentedState& s0,
                              double t0, double z_target, const SolverConfig& cfg,
                              const ChunkOptions& opts) {
    if (s0.z >= z_target) return {t0, s0};
    SolverConfig local = cfg;
    if (!std::isfinite(local.h_max)) local.h_max = 1.0;
    local.h_init = std::clamp(cfg.h_init, local.h_min, local.h_max);
    Stepper st(sys, w, s0, t0, local, local.h_max);
    constexpr std::size_t max_steps = 10'000'000;
    while (st.accepted() < max_steps) {
        if (!st.try_step(st.h(), false, 0.0)) continue;
        if (st.x_norm() > opts.norm_bound) throw BlowUpError(st.t(), st.x_norm());
        if (st.z() >= z_target) {
            st.settle_on_z(z_target);
            return {st.t(), unpack(st.y())};
        }
    }
    throw Error("advance_to_z: target z not reached");
}

}  // namespace doa
