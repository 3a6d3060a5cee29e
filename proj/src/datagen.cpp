#include "doa/datagen.hpp"

#include "doa/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace doa {

std::string to_string(LabelSpace s) { return s == LabelSpace::V ? "V" : "I"; }

LabelSpace parse_label_space(const std::string& s) {
    if (s == "V") return LabelSpace::V;
    if (s == "I") return LabelSpace::I;
    throw Error("unknown label space '" + s + "' (expected V or I)");
}

Mat Dataset::inputs() const {
    Mat X(dim, static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = points[i].x;
    return X;
}

Vec Dataset::labels() const {
    Vec y(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) y(static_cast<Eigen::Index>(i)) = points[i].v;
    return y;
}

namespace {

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }

}  // namespace

bool operator==(const DatasetMeta& a, const DatasetMeta& b) {
    return a.system == b.system && a.w == b.w && a.alpha == b.alpha && a.M == b.M &&
           a.delta_I == b.delta_I && a.seed == b.seed && same_vec(a.region_lower, b.region_lower) &&
           same_vec(a.region_upper, b.region_upper) && a.n_traj == b.n_traj &&
           a.k_extra == b.k_extra && a.converged == b.converged && a.exceeded == b.exceeded &&
           a.inconclusive == b.inconclusive && a.labels == b.labels && a.extra == b.extra;
}

bool operator==(const Dataset& a, const Dataset& b) {
    if (a.dim != b.dim || a.points.size() != b.points.size() || !(a.meta == b.meta)) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i)
        if (!same_vec(a.points[i].x, b.points[i].x) || a.points[i].v != b.points[i].v) return false;
    return true;
}

std::vector<DataPoint> trajectory_points(const SystemModel& sys, const WKind& w,
                                         const ZubovConfig& cfg, const IValueOutcome& outcome,
                                         std::size_t k_extra, LabelSpace labels) {
    std::vector<DataPoint> pts;
    switch (outcome.kind) {
        case OutcomeKind::Inconclusive: return pts;
        case OutcomeKind::Exceeded:
            pts.push_back({outcome.x0, labels == LabelSpace::V ? 1.0 : cfg.M});
            return pts;
        case OutcomeKind::Converged: break;
    }
    const double I = outcome.I;
    auto label = [&](double remaining) {
        return labels == LabelSpace::V ? std::tanh(cfg.alpha * remaining) : remaining;
    };
    pts.push_back({outcome.x0, label(I)});
    if (I <= 0.0) return pts;

    const auto& rec = outcome.trajectory;
    ChunkOptions opts;
    opts.norm_bound = cfg.norm_bound;
    for (std::size_t q = 1; q <= k_extra; ++q) {
        const double target = static_cast<double>(q) / static_cast<double>(k_extra + 1) * I;
        // Last stored sample strictly below the target.
        const auto it = std::lower_bound(rec.z.begin(), rec.z.end(), target);
        const std::size_t j = it == rec.z.begin() ? 0 : static_cast<std::size_t>(it - rec.z.begin()) - 1;
        const auto hit = advance_to_z(sys, w, {rec.x[j], rec.z[j]}, rec.t[j], target, cfg.solver, opts);
        pts.push_back({hit.s.x, label(std::max(0.0, I - hit.s.z))});
    }
    return pts;
}

Dataset generate_dataset(const SystemModel& sys, const WKind& w, const ZubovConfig& cfg,
                         const Region& region, std::size_t n_traj, std::size_t k_extra,
                         std::uint64_t seed, const GenerateOptions& opt) {
    if (n_traj < 1) throw Error("generate_dataset: need at least one trajectory");
    require_dim("generate_dataset region", sys.dim(), region.dim());
    cfg.validate();

    std::vector<std::vector<DataPoint>> per_traj(n_traj);
    std::vector<OutcomeKind> kinds(n_traj);
    parallel_for(n_traj, opt.workers, [&](std::size_t i) {
        const Vec x0 = sample_uniform_at(region, seed, i);
        const auto outcome = compute_I(sys, w, x0, cfg);
        kinds[i] = outcome.kind;
        per_traj[i] = trajectory_points(sys, w, cfg, outcome, k_extra, opt.labels);
    });

    Dataset d;
    d.dim = sys.dim();
    auto& m = d.meta;
    m.system = sys.name();
    m.w = describe(w);
    m.alpha = cfg.alpha;
    m.M = cfg.M;
    m.delta_I = cfg.delta_I;
    m.seed = seed;
    m.region_lower = region.lower;
    m.region_upper = region.upper;
    m.n_traj = n_traj;
    m.k_extra = k_extra;
    m.labels = opt.labels;
    for (std::size_t i = 0; i < n_traj; ++i) {
        switch (kinds[i]) {
            case OutcomeKind::Converged: ++m.converged; break;
            case OutcomeKind::Exceeded: ++m.exceeded; break;
            case OutcomeKind::Inconclusive: ++m.inconclusive; break;
        }
        for (auto& p : per_traj[i]) d.points.push_back(std::move(p));
    }
    return d;
}

// -----------------------------------------------------------------------------
// File format
// -----------------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "# doa-dataset 1";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const Vec& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += fmt(v(i));
    }
    return s;
}

double to_double(std::string_view s, const std::string& source, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(source, line, "bad number '" + std::string(s) + "'");
    return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& source, std::size_t line) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(source, line, "bad integer '" + s + "'");
    return v;
}

Vec to_vec(const std::string& s, const std::string& source, std::size_t line) {
    std::vector<double> vals;
    std::istringstream is(s);
    for (std::string tok; is >> tok;) vals.push_back(to_double(tok, source, line));
    return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

void write_dataset(const Dataset& d, std::ostream& os) {
    const auto& m = d.meta;
    os << kMagic << '\n';
    os << "# dim=" << d.dim << '\n';
    os << "# system=" << m.system << '\n';
    os << "# w=" << m.w << '\n';
    os << "# alpha=" << fmt(m.alpha) << '\n';
    os << "# M=" << fmt(m.M) << '\n';
    os << "# delta_I=" << fmt(m.delta_I) << '\n';
    os << "# seed=" << m.seed << '\n';
    os << "# region_lower=" << fmt(m.region_lower) << '\n';
    os << "# region_upper=" << fmt(m.region_upper) << '\n';
    os << "# n_traj=" << m.n_traj << '\n';
    os << "# k_extra=" << m.k_extra << '\n';
    os << "# converged=" << m.converged << '\n';
    os << "# exceeded=" << m.exceeded << '\n';
    os << "# inconclusive=" << m.inconclusive << '\n';
    os << "# labels=" << to_string(m.labels) << '\n';
    for (const auto& [k, v] : m.extra) os << "# " << k << '=' << v << '\n';
    os << "# columns=";
    for (Eigen::Index i = 0; i < d.dim; ++i) os << 'x' << (i + 1) << ',';
    os << "v\n";
    std::string row;
    for (const auto& p : d.points) {
        row.clear();
        for (Eigen::Index i = 0; i < p.x.size(); ++i) {
            row += fmt(p.x(i));
            row += ',';
        }
        row += fmt(p.v);
        row += '\n';
        os << row;
    }
}

void write_dataset(const Dataset& d, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write dataset '" + path + "'");
    write_dataset(d, os);
    if (!os) throw Error("error while writing dataset '" + path + "'");
}

Dataset read_dataset(std::istream& is, const std::string& source) {
    Dataset d;
    auto& m = d.meta;
    std::string line;
    std::size_t lineno = 0;
    bool have_dim = false;
    if (!std::getline(is, line) || line != kMagic)
        throw ParseError(source, 1, "missing '" + std::string(kMagic) + "' header");
    ++lineno;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (line.size() < 2 || line[1] != ' ' || eq == std::string::npos)
                throw ParseError(source, lineno, "malformed header line");
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "dim") {
                d.dim = static_cast<Eigen::Index>(to_uint(val, source, lineno));
                have_dim = true;
            } else if (key == "system") m.system = val;
            else if (key == "w") m.w = val;
            else if (key == "alpha") m.alpha = to_double(val, source, lineno);
            else if (key == "M") m.M = to_double(val, source, lineno);
            else if (key == "delta_I") m.delta_I = to_double(val, source, lineno);
            else if (key == "seed") m.seed = to_uint(val, source, lineno);
            else if (key == "region_lower") m.region_lower = to_vec(val, source, lineno);
            else if (key == "region_upper") m.region_upper = to_vec(val, source, lineno);
            else if (key == "n_traj") m.n_traj = to_uint(val, source, lineno);
            else if (key == "k_extra") m.k_extra = to_uint(val, source, lineno);
            else if (key == "converged") m.converged = to_uint(val, source, lineno);
            else if (key == "exceeded") m.exceeded = to_uint(val, source, lineno);
            else if (key == "inconclusive") m.inconclusive = to_uint(val, source, lineno);
            else if (key == "labels") {
                try {
                    m.labels = parse_label_space(val);
                } catch (const Error& e) {
                    throw ParseError(source, lineno, e.what());
                }
            } else if (key == "columns") continue;
            else m.extra[key] = val;
            continue;
        }
        if (!have_dim) throw ParseError(source, lineno, "data row before '# dim=' header");
        DataPoint p;
        p.x.resize(d.dim);
        std::string_view rest(line);
        Eigen::Index col = 0;
        double last = 0;
        for (;;) {
            const auto comma = rest.find(',');
            const std::string_view field = rest.substr(0, comma);
            if (col > d.dim)
                throw ParseError(source, lineno, "expected " + std::to_string(d.dim + 1) + " columns");
            const double v = to_double(field, source, lineno);
            if (col < d.dim) p.x(col) = v;
            else last = v;
            ++col;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (col != d.dim + 1)
            throw ParseError(source, lineno,
                             "expected " + std::to_string(d.dim + 1) + " columns, got " + std::to_string(col));
        if (m.labels == LabelSpace::V && !(last >= 0.0 && last <= 1.0))
            throw ParseError(source, lineno, "label outside [0, 1]");
        p.v = last;
        d.points.push_back(std::move(p));
    }
    if (!have_dim) throw ParseError(source, lineno, "missing '# dim=' header");
    return d;
}

Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open dataset '" + path + "'");
    return read_dataset(is, path);
}

std::vector<HistogramBin> label_histogram(const Dataset& d, std::size_t bins) {
    if (bins < 1) throw Error("label_histogram: need at least one bin");
    std::vector<HistogramBin> h(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h[b].low = static_cast<double>(b) / static_cast<double>(bins);
        h[b].high = static_cast<double>(b + 1) / static_cast<double>(bins);
    }
    for (const auto& p : d.points) {
        const double v = std::clamp(p.v, 0.0, 1.0);
        auto b = static_cast<std::size_t>(v * static_cast<double>(bins));
        h[std::min(b, bins - 1)].count++;
    }
    return h;
}

}  // namespace doa
