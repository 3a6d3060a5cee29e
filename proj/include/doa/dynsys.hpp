#pragma once

#include "doa/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace doa {

/// Right-hand side f of an autonomous system x' = f(x). Writes f(x) into `dx`
/// (already sized to the system dimension).
using FieldFn = std::function<void(const Vec& x, Vec& dx)>;

/// A named autonomous vector field.
class SystemModel {
public:
    SystemModel(std::string name, Eigen::Index dim, FieldFn field,
                std::optional<Vec> equilibrium_hint = std::nullopt);

    const std::string& name() const { return name_; }
    Eigen::Index dim() const { return dim_; }
    const std::optional<Vec>& equilibrium_hint() const { return equilibrium_hint_; }

    /// f(x) into a caller-owned buffer; no dimension check (hot path).
    void eval_into(const Vec& x, Vec& dx) const { field_(x, dx); }

    /// f(x), dimension-checked.
    Vec operator()(const Vec& x) const;

private:
    std::string name_;
    Eigen::Index dim_;
    FieldFn field_;
    std::optional<Vec> equilibrium_hint_;
};

// -----------------------------------------------------------------------------
// W-functions
// -----------------------------------------------------------------------------

/// W(x) = |x - center|^2, for a single known equilibrium.
struct DistanceSquared {
    Vec center;
};

/// W(x) = |f(x)|^2 / scale, vanishing on every equilibrium.
struct FieldNormScaled {
    double scale = 1.0;
};

using WKind = std::variant<DistanceSquared, FieldNormScaled>;

/// Nonnegative W evaluated at x.
double eval_w(const WKind& w, const SystemModel& sys, const Vec& x);

/// W from a state and its already-evaluated field value.
inline double eval_w(const WKind& w, const Vec& x, const Vec& fx) {
    if (const auto* d = std::get_if<DistanceSquared>(&w))
        return (x - d->center).squaredNorm();
    return fx.squaredNorm() / std::get<FieldNormScaled>(w).scale;
}

std::string describe(const WKind& w);
WKind parse_w(const std::string& text);

// -----------------------------------------------------------------------------
// Model vector fields
// -----------------------------------------------------------------------------

/// Time-reversed van der Pol oscillator; the origin is asymptotically stable
/// and its basin is bounded by an unstable limit cycle.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> vanderpol_field(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Scalar x1 = x(0), x2 = x(1);
    return {-x2, x1 - (Scalar(1) - x1 * x1) * x2};
}

SystemModel make_vanderpol();

/// x' = -x in R^dim.
SystemModel make_linear(Eigen::Index dim = 2);

/// Classical multi-machine swing model parameters.
struct SwingParams {
    int m = 0;
    Vec H;    ///< inertia constants [s]
    double D = 0.0;
    Vec Pm;   ///< mechanical power [pu]
    Vec E;    ///< internal EMF magnitudes [pu]
    Mat G;    ///< reduced conductance matrix
    Mat B;    ///< reduced susceptance matrix
    double f0 = 60.0;
    double omega0 = 2.0 * std::numbers::pi * 60.0;
    std::optional<Vec> delta_eq;  ///< equilibrium rotor angles, if known

    /// Throws Error if any shape or sign invariant is broken.
    void validate() const;
};

/// Reads the `key = values` parameter format; see data/README.md.
SwingParams parse_swing_params(std::istream& in, const std::string& source = "<stream>");
SwingParams load_swing_params(const std::string& path);

/// Swing dynamics; state ordered (w_1, d_1, ..., w_m, d_m).
void swing_field(const SwingParams& p, const Vec& x, Vec& dx);
Vec swing_field(const SwingParams& p, const Vec& x);

/// Swing model with the equilibrium hint (w = omega0, delta = delta_eq) when
/// the parameters provide delta_eq.
SystemModel make_swing(SwingParams p);

/// Region used for power-system sampling: |w_i - omega0| < dw and
/// |d_i - delta_eq_i| < dd.
Region swing_region(const SwingParams& p, double dw = 1.5, double dd = 0.4 * std::numbers::pi);

// -----------------------------------------------------------------------------
// Equilibria and sampling
// -----------------------------------------------------------------------------

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, Vec last) : Error(what), last_(std::move(last)) {}
    const Vec& last_iterate() const { return last_; }

private:
    Vec last_;
};

class SingularJacobianError : public Error {
public:
    using Error::Error;
};

/// Central-difference Jacobian, step 1e-6 * max(1, |x_i|).
Mat numeric_jacobian(const SystemModel& sys, const Vec& x);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

/// Newton refinement of an equilibrium guess. Rank-deficient but consistent
/// Jacobians (equilibrium manifolds) take the minimum-norm step.
Vec refine_equilibrium(const SystemModel& sys, const Vec& guess, const NewtonOptions& opt = {});

/// n i.i.d. uniform samples in the box. Sample i is a pure function of
/// (seed, i).
std::vector<Vec> sample_uniform(const Region& r, std::size_t n, std::uint64_t seed);

/// Single sample i of the stream identified by seed.
Vec sample_uniform_at(const Region& r, std::uint64_t seed, std::uint64_t index);

}  // namespace doa
