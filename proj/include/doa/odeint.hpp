#pragma once

#include "doa/dynsys.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace doa {

struct SolverConfig {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double h_init = 1e-3;
    double h_min = 1e-10;
    double h_max = std::numeric_limits<double>::infinity();  ///< clamped to the chunk length

    void validate() const;
};

/// State of the augmented system x' = f(x), z' = W(x).
struct AugmentedState {
    Vec x;
    double z = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    AugmentedState s;
};

struct TrajectoryChunk {
    std::vector<TrajectorySample> samples;  ///< chunk start plus every accepted step
    double last_step = 0.0;                 ///< size of the final accepted step
    double next_step = 0.0;                 ///< controller proposal for the following chunk
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    bool hit_z_limit = false;               ///< stopped early because z exceeded the limit

    const TrajectorySample& back() const { return samples.back(); }
};

struct ChunkOptions {
    double norm_bound = 1e6;
    double z_limit = std::numeric_limits<double>::infinity();
};

class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what, Eigen::Index component)
        : Error(what + " (component " + std::to_string(component) + ")"), component_(component) {}
    Eigen::Index component() const { return component_; }

private:
    Eigen::Index component_;
};

class BlowUpError : public Error {
public:
    BlowUpError(double t, double norm)
        : Error("trajectory left the norm bound at t=" + std::to_string(t) +
                " (|x| = " + std::to_string(norm) + ")"),
          t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

class StepUnderflowError : public Error {
public:
    using Error::Error;
};

/// Dormand-Prince 5(4) tableau.
namespace dp54 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp54

/// One Dormand-Prince attempt on a packed state. `k1` must hold f(y); on
/// return `k7` holds f(y_new) (first-same-as-last). Returns the scaled RMS
/// error estimate; a value <= 1 means the step meets the tolerances.
template <typename Scalar>
class DormandPrince54 {
public:
    using Vector = VectorX<Scalar>;

    explicit DormandPrince54(Eigen::Index n) : k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), tmp_(n) {}

    template <typename Field>
    Scalar attempt(Field&& f, const Vector& y, const Vector& k1, Scalar h, Scalar rtol, Scalar atol,
                   Vector& y_new, Vector& k7) {
        using namespace dp54;
        tmp_ = y + h * a21 * k1;
        f(tmp_, k2_);
        tmp_ = y + h * (a31 * k1 + a32 * k2_);
        f(tmp_, k3_);
        tmp_ = y + h * (a41 * k1 + a42 * k2_ + a43 * k3_);
        f(tmp_, k4_);
        tmp_ = y + h * (a51 * k1 + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f(tmp_, k5_);
        tmp_ = y + h * (a61 * k1 + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f(tmp_, k6_);
        y_new = y + h * (b1 * k1 + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        f(y_new, k7);
        tmp_ = h * (e1 * k1 + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7);
        const auto scale = (atol + rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array());
        return std::sqrt((tmp_.array() / scale).square().mean());
    }

private:
    Vector k2_, k3_, k4_, k5_, k6_, tmp_;
};

/// Step-size proposal h * min(5, max(0.2, 0.9 err^(-1/5))).
inline double propose_step(double h, double err) {
    if (err <= 0.0) return 5.0 * h;
    return h * std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
}

/// Augmented right-hand side (f(x), W(x)).
using AugmentedField = std::function<void(const Vec& x, Vec& dx, double& dz)>;

AugmentedField make_augmented(const SystemModel& sys, const WKind& w);

struct StepResult {
    bool accepted = false;
    AugmentedState next;
    double err = 0.0;
    double h_next = 0.0;
};

/// Single controlled Dormand-Prince step of the augmented system.
StepResult rk45_step(const AugmentedField& f, double t, const AugmentedState& s, double h,
                     const SolverConfig& cfg);

/// Integrates the augmented system over exactly [t0, t0 + dt_chunk]; the last
/// step is clipped onto the endpoint. Stops early (hit_z_limit) once z
/// exceeds opts.z_limit.
TrajectoryChunk integrate_chunk(const SystemModel& sys, const WKind& w, const AugmentedState& s0,
                                double t0, double dt_chunk, const SolverConfig& cfg,
                                const ChunkOptions& opts = {});

/// Integrates from (t0, s0) until z reaches z_target and returns the state at
/// that crossing (z equal to the target up to ~1e-12 relative).
TrajectorySample advance_to_z(const SystemModel& sys, const WKind& w, const AugmentedState& s0,
                              double t0, double z_target, const SolverConfig& cfg,
                              const ChunkOptions& opts = {});

}  // namespace doa
