#pragma once

#include "doa/zubov.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace doa {

struct DataPoint {
    Vec x;
    double v = 0.0;
};

/// Label convention of a dataset: V-space (tanh-scaled, in [0,1]) or the raw
/// integral I-space.
enum class LabelSpace { V, I };

std::string to_string(LabelSpace s);
LabelSpace parse_label_space(const std::string& s);

struct DatasetMeta {
    std::string system;
    std::string w;
    double alpha = 0.0;
    double M = 0.0;
    double delta_I = 0.0;
    std::uint64_t seed = 0;
    Vec region_lower;
    Vec region_upper;
    std::size_t n_traj = 0;
    std::size_t k_extra = 0;
    std::size_t converged = 0;
    std::size_t exceeded = 0;
    std::size_t inconclusive = 0;
    LabelSpace labels = LabelSpace::V;
    std::map<std::string, std::string> extra;  ///< unrecognised header keys, kept verbatim
};

struct Dataset {
    Eigen::Index dim = 0;
    std::vector<DataPoint> points;
    DatasetMeta meta;

    std::size_t size() const { return points.size(); }
    /// Inputs as columns (dim x N) and labels (N).
    Mat inputs() const;
    Vec labels() const;
};

bool operator==(const DatasetMeta& a, const DatasetMeta& b);
bool operator==(const Dataset& a, const Dataset& b);

struct GenerateOptions {
    std::size_t workers = 1;
    LabelSpace labels = LabelSpace::V;
};

/// Samples n_traj initial states in `region`, evaluates each with compute_I
/// and emits the anchor point plus, for converged trajectories, k_extra
/// points where z crosses q/(k_extra+1) * I. Output order is by sample index.
Dataset generate_dataset(const SystemModel& sys, const WKind& w, const ZubovConfig& cfg,
                         const Region& region, std::size_t n_traj, std::size_t k_extra,
                         std::uint64_t seed, const GenerateOptions& opt = {});

/// Data points contributed by one evaluated trajectory.
std::vector<DataPoint> trajectory_points(const SystemModel& sys, const WKind& w,
                                         const ZubovConfig& cfg, const IValueOutcome& outcome,
                                         std::size_t k_extra, LabelSpace labels = LabelSpace::V);

void write_dataset(const Dataset& d, std::ostream& os);
void write_dataset(const Dataset& d, const std::string& path);
Dataset read_dataset(std::istream& is, const std::string& source = "<stream>");
Dataset read_dataset(const std::string& path);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins on [0, 1]; a label of exactly 1 lands in the last bin.
std::vector<HistogramBin> label_histogram(const Dataset& d, std::size_t bins);

}  // namespace doa
