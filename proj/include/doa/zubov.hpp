#pragma once

#include "doa/odeint.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace doa {

/// Knobs of the integral evaluation V(x) = tanh(alpha I(x)).
struct ZubovConfig {
    double delta_I = 1e-6;  ///< slope threshold on dz/dt at a chunk end
    double M = 200.0;       ///< divergence threshold on z
    double alpha = 0.1;     ///< scale factor inside tanh
    double dt_chunk = 1.0;
    double t_max = 500.0;
    std::size_t max_samples = 2000;  ///< stored trajectory length cap
    double norm_bound = 1e6;
    SolverConfig solver;

    void validate() const;
};

enum class OutcomeKind { Converged, Exceeded, Inconclusive };

std::string to_string(OutcomeKind k);

/// Thinned trajectory of the augmented system, columns aligned by index.
struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<double> z;

    std::size_t size() const { return t.size(); }
};

struct IValueOutcome {
    OutcomeKind kind = OutcomeKind::Inconclusive;
    double I = 0.0;        ///< z(K dT); meaningful for Converged
    double z_final = 0.0;
    double elapsed = 0.0;  ///< K dT, or the stop time inside the last chunk
    bool blew_up = false;
    Vec x0;
    TrajectoryRecord trajectory;

    bool converged() const { return kind == OutcomeKind::Converged; }
};

/// Chained chunk integration of the augmented system from x0 until
/// z > M (Exceeded), dz/dt < delta_I at a chunk end (Converged) or t_max
/// (Inconclusive).
IValueOutcome compute_I(const SystemModel& sys, const WKind& w, const Vec& x0, const ZubovConfig& cfg);

/// tanh(alpha I) for Converged, 1 for Exceeded; throws for Inconclusive.
double eval_V(const IValueOutcome& outcome, double alpha);

/// Psi = alpha (1 + v) W.
inline double psi(double v, double w_val, double alpha) { return alpha * (1.0 + v) * w_val; }

struct Calibration {
    double M = 0.0;
    double alpha = 0.0;
    double max_converged_I = 0.0;
    double gap = 0.0;  ///< M / max converged I
    std::size_t converged = 0, exceeded = 0, inconclusive = 0;
};

std::ostream& operator<<(std::ostream& os, const Calibration& c);

/// M = smallest multiple of 50 that is >= 2 * (max converged I), alpha = 20/M.
Calibration calibrate(const std::vector<IValueOutcome>& outcomes);
Calibration calibrate_from_max(double max_converged_I);

struct ResidualOptions {
    double sample_dt = 1e-2;  ///< spacing of the finite-difference grid
    double v_cap = 1.0;       ///< only samples with V < v_cap are scored
};

/// Max relative defect |dV/dt + Psi (1 - V)| / max(1e-8, |dV/dt|) of Zubov's
/// equation along the trajectory from x0, with dV/dt from centred differences.
double zubov_residual(const SystemModel& sys, const WKind& w, const Vec& x0, const ZubovConfig& cfg,
                      const ResidualOptions& opt = {});

/// Writes the I-value table (sample_index,I,censored); censored rows carry M.
void write_ivalue_table(std::ostream& os, const std::vector<IValueOutcome>& outcomes, double M);

}  // namespace doa
