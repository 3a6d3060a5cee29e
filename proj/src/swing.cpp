#include "doa/dynsys.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace doa {

void SwingParams::validate() const {
    if (m < 1) throw Error("SwingParams: m must be positive");
    require_dim("SwingParams H", m, H.size());
    require_dim("SwingParams Pm", m, Pm.size());
    require_dim("SwingParams E", m, E.size());
    if (G.rows() != m || G.cols() != m) throw Error("SwingParams: G must be m x m");
    if (B.rows() != m || B.cols() != m) throw Error("SwingParams: B must be m x m");
    if ((H.array() <= 0).any()) throw Error("SwingParams: inertia constants must be positive");
    if (!(f0 > 0)) throw Error("SwingParams: f0 must be positive");
    if (std::abs(omega0 - 2.0 * std::numbers::pi * f0) > 1e-12 * omega0)
        throw Error("SwingParams: omega0 must equal 2*pi*f0");
    if (delta_eq) require_dim("SwingParams delta_eq", m, delta_eq->size());
}

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& source,
                                  std::size_t line) {
    std::vector<double> out;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
        if (p == end) break;
        double v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc())
            throw ParseError(source, line, "expected a number near '" + std::string(p, end) + "'");
        out.push_back(v);
        p = next;
    }
    return out;
}

}  // namespace

SwingParams parse_swing_params(std::istream& in, const std::string& source) {
    static const char* known[] = {"m", "f0", "D", "H", "E", "Pm", "G", "B", "delta_eq"};
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, std::size_t> key_line;
    std::string current;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = raw.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            std::string key = line.substr(0, eq);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            if (std::find(std::begin(known), std::end(known), key) == std::end(known))
                throw ParseError(source, lineno, "unknown key '" + key + "'");
            if (values.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
            current = key;
            key_line[key] = lineno;
            values[key] = parse_numbers(line.substr(eq + 1), source, lineno);
        } else {
            if (current.empty()) throw ParseError(source, lineno, "values before any key");
            auto more = parse_numbers(line, source, lineno);
            values[current].insert(values[current].end(), more.begin(), more.end());
        }
    }

    auto take = [&](const std::string& key) -> const std::vector<double>& {
        auto it = values.find(key);
        if (it == values.end()) throw ParseError(source, lineno, "missing key '" + key + "'");
        return it->second;
    };
    auto scalar = [&](const std::string& key) {
        const auto& v = take(key);
        if (v.size() != 1) throw ParseError(source, key_line[key], "'" + key + "' must be a scalar");
        return v[0];
    };

    SwingParams p;
    const double m = scalar("m");
    if (m < 1 || m != std::floor(m)) throw ParseError(source, key_line["m"], "m must be a positive integer");
    p.m = static_cast<int>(m);
    p.f0 = scalar("f0");
    p.omega0 = 2.0 * std::numbers::pi * p.f0;
    p.D = scalar("D");

    auto vec = [&](const std::string& key) {
        const auto& v = take(key);
        if (static_cast<int>(v.size()) != p.m)
            throw ParseError(source, key_line[key],
                             "'" + key + "' needs " + std::to_string(p.m) + " values, got " +
                                 std::to_string(v.size()));
        return Vec(Eigen::Map<const Vec>(v.data(), p.m));
    };
    auto square = [&](const std::string& key) {
        const auto& v = take(key);
        if (static_cast<long>(v.size()) != static_cast<long>(p.m) * p.m)
            throw ParseError(source, key_line[key],
                             "'" + key + "' is not square: expected " + std::to_string(p.m * p.m) +
                                 " values, got " + std::to_string(v.size()));
        return Mat(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            v.data(), p.m, p.m));
    };
    p.H = vec("H");
    p.E = vec("E");
    p.Pm = vec("Pm");
    p.G = square("G");
    p.B = square("B");
    if (values.count("delta_eq")) p.delta_eq = vec("delta_eq");
    try {
        p.validate();
    } catch (const Error& e) {
        throw ParseError(source, lineno, e.what());
    }
    return p;
}

SwingParams load_swing_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open swing parameter file '" + path + "'");
    return parse_swing_params(in, path);
}

void swing_field(const SwingParams& p, const Vec& x, Vec& dx) {
    const int m = p.m;
    // sin/cos of angle differences via sum formulas: O(m) trig calls.
    thread_local Vec s, c;
    s.resize(m);
    c.resize(m);
    for (int i = 0; i < m; ++i) {
        s(i) = std::sin(x(2 * i + 1));
        c(i) = std::cos(x(2 * i + 1));
    }
    for (int i = 0; i < m; ++i) {
        const double wi = x(2 * i);
        double coupling = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            const double sij = s(i) * c(j) - c(i) * s(j);
            const double cij = c(i) * c(j) + s(i) * s(j);
            coupling += p.E(j) * (p.B(i, j) * sij + p.G(i, j) * cij);
        }
        const double pe = p.E(i) * p.E(i) * p.G(i, i) + p.E(i) * coupling;
        dx(2 * i) = p.omega0 / (2.0 * p.H(i)) * (p.Pm(i) - p.D * (wi - p.omega0) / p.omega0 - pe);
        dx(2 * i + 1) = wi - p.omega0;
    }
}

Vec swing_field(const SwingParams& p, const Vec& x) {
    require_dim("swing_field", 2 * p.m, x.size());
    Vec dx(2 * p.m);
    swing_field(p, x, dx);
    return dx;
}

SystemModel make_swing(SwingParams p) {
    p.validate();
    std::optional<Vec> hint;
    if (p.delta_eq) {
        Vec x(2 * p.m);
        for (int i = 0; i < p.m; ++i) {
            x(2 * i) = p.omega0;
            x(2 * i + 1) = (*p.delta_eq)(i);
        }
        hint = x;
    }
    const Eigen::Index dim = 2 * p.m;
    return SystemModel("swing", dim,
                       [p = std::move(p)](const Vec& x, Vec& dx) { swing_field(p, x, dx); },
                       std::move(hint));
}

Region swing_region(const SwingParams& p, double dw, double dd) {
    if (!p.delta_eq) throw Error("swing_region: parameters carry no delta_eq");
    Vec lo(2 * p.m), hi(2 * p.m);
    for (int i = 0; i < p.m; ++i) {
        lo(2 * i) = p.omega0 - dw;
        hi(2 * i) = p.omega0 + dw;
        lo(2 * i + 1) = (*p.delta_eq)(i) - dd;
        hi(2 * i + 1) = (*p.delta_eq)(i) + dd;
    }
    return Region(lo, hi);
}

}  // namespace doa
