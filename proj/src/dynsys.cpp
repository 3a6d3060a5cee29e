#include "doa/dynsys.hpp"

#include <charconv>
#include <random>
#include <sstream>

namespace doa {

SystemModel::SystemModel(std::string name, Eigen::Index dim, FieldFn field,
                         std::optional<Vec> equilibrium_hint)
    : name_(std::move(name)), dim_(dim), field_(std::move(field)),
      equilibrium_hint_(std::move(equilibrium_hint)) {
    if (dim_ < 1) throw Error("SystemModel: dimension must be positive");
    if (equilibrium_hint_) require_dim("SystemModel equilibrium hint", dim_, equilibrium_hint_->size());
}

Vec SystemModel::operator()(const Vec& x) const {
    require_dim("SystemModel " + name_, dim_, x.size());
    Vec dx(dim_);
    field_(x, dx);
    return dx;
}

double eval_w(const WKind& w, const SystemModel& sys, const Vec& x) {
    require_dim("eval_w", sys.dim(), x.size());
    if (const auto* d = std::get_if<DistanceSquared>(&w)) {
        require_dim("eval_w center", sys.dim(), d->center.size());
        return (x - d->center).squaredNorm();
    }
    return sys(x).squaredNorm() / std::get<FieldNormScaled>(w).scale;
}

std::string describe(const WKind& w) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* d = std::get_if<DistanceSquared>(&w)) {
        os << "distance_squared:";
        for (Eigen::Index i = 0; i < d->center.size(); ++i) os << (i ? " " : "") << d->center(i);
    } else {
        os << "field_norm_scaled:" << std::get<FieldNormScaled>(w).scale;
    }
    return os.str();
}

WKind parse_w(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::istringstream rest(colon == std::string::npos ? "" : text.substr(colon + 1));
    if (kind == "distance_squared") {
        std::vector<double> c;
        for (double v; rest >> v;) c.push_back(v);
        return DistanceSquared{Eigen::Map<Vec>(c.data(), static_cast<Eigen::Index>(c.size()))};
    }
    if (kind == "field_norm_scaled") {
        double s = 0;
        if (!(rest >> s) || !(s > 0)) throw Error("parse_w: bad scale in '" + text + "'");
        return FieldNormScaled{s};
    }
    throw Error("parse_w: unknown W descriptor '" + text + "'");
}

SystemModel make_vanderpol() {
    return SystemModel("vdp", 2, [](const Vec& x, Vec& dx) { dx = vanderpol_field(x); },
                       Vec::Zero(2));
}

SystemModel make_linear(Eigen::Index dim) {
    return SystemModel("linear", dim, [](const Vec& x, Vec& dx) { dx = -x; }, Vec::Zero(dim));
}

// -----------------------------------------------------------------------------

Mat numeric_jacobian(const SystemModel& sys, const Vec& x) {
    const Eigen::Index n = sys.dim();
    Mat J(n, n);
    Vec xp = x, xm = x, fp(n), fm(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
        xp(j) = x(j) + h;
        xm(j) = x(j) - h;
        sys.eval_into(xp, fp);
        sys.eval_into(xm, fm);
        J.col(j) = (fp - fm) / (xp(j) - xm(j));
        xp(j) = xm(j) = x(j);
    }
    return J;
}

Vec refine_equilibrium(const SystemModel& sys, const Vec& guess, const NewtonOptions& opt) {
    require_dim("refine_equilibrium", sys.dim(), guess.size());
    Vec x = guess;
    Vec fx = sys(x);
    for (int it = 0; it < opt.max_iter; ++it) {
        if (fx.norm() <= opt.tol) return x;
        const Mat J = numeric_jacobian(sys, x);
        // Central differences are good to roughly 1e-10 relative; smaller
        // pivots are treated as exact zeros.
        Eigen::CompleteOrthogonalDecomposition<Mat> cod;
        cod.setThreshold(1e-8);
        cod.compute(J);
        const Vec step = cod.solve(-fx);
        // A step that cannot shrink the linear model means f is (numerically)
        // outside the Jacobian's range.
        if (cod.rank() == 0 || !step.allFinite() || (J * step + fx).norm() >= 0.99 * fx.norm())
            throw SingularJacobianError("refine_equilibrium: singular Jacobian at iteration " +
                                        std::to_string(it));
        // Backtrack on |f| so distant guesses do not overshoot; fall back to
        // the full step if no fraction decreases it.
        const double f0 = fx.norm();
        Vec trial(x.size()), ftrial(x.size());
        double lambda = 1.0;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            trial = x + lambda * step;
            sys.eval_into(trial, ftrial);
            if (ftrial.allFinite() && ftrial.norm() < f0) break;
        }
        if (!(ftrial.allFinite() && ftrial.norm() < f0)) {
            trial = x + step;
            sys.eval_into(trial, ftrial);
        }
        x = trial;
        fx = ftrial;
    }
    if (fx.norm() <= opt.tol) return x;
    throw NonConvergenceError("refine_equilibrium: no convergence after " +
                                  std::to_string(opt.max_iter) + " iterations (|f| = " +
                                  std::to_string(fx.norm()) + ")",
                              x);
}

Vec sample_uniform_at(const Region& r, std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(r.dim());
    for (Eigen::Index k = 0; k < r.dim(); ++k)
        x(k) = r.lower(k) + (r.upper(k) - r.lower(k)) * u(gen);
    return x;
}

std::vector<Vec> sample_uniform(const Region& r, std::size_t n, std::uint64_t seed) {
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_uniform_at(r, seed, i));
    return out;
}

}  // namespace doa
