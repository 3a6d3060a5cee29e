#include "doa/datagen.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace doa;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

const WKind kDist2 = DistanceSquared{Vec::Zero(2)};

std::string to_text(const Dataset& d) {
    std::ostringstream os;
    write_dataset(d, os);
    return os.str();
}

Dataset from_text(const std::string& s) {
    std::istringstream is(s);
    return read_dataset(is, "text");
}

Dataset small_vdp(std::size_t workers, std::size_t n = 40, std::size_t k = 3) {
    GenerateOptions opt;
    opt.workers = workers;
    return generate_dataset(make_vanderpol(), kDist2, ZubovConfig{}, Region::cube(2, -3, 3), n, k, 99, opt);
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("one point per trajectory without augmentation") {
    const auto d = small_vdp(1, 50, 0);
    CHECK(d.size() == 50 - d.meta.inconclusive);
    CHECK(d.meta.converged + d.meta.exceeded + d.meta.inconclusive == 50);
    CHECK(d.meta.n_traj == 50);
    CHECK(d.meta.k_extra == 0);
}

TEST_CASE("point count with augmentation") {
    const auto d = small_vdp(1, 60, 4);
    CHECK(d.meta.converged > 0);
    CHECK(d.meta.exceeded > 0);
    CHECK(d.size() == 60 - d.meta.inconclusive + 4 * d.meta.converged);
    for (const auto& p : d.points) {
        CHECK(p.v >= 0.0);
        CHECK(p.v <= 1.0);
        CHECK(p.x.size() == 2);
    }
}

TEST_CASE("midpoint of a linear trajectory") {
    // z(t) = 2 (1 - e^-2t), I = 2; z = 1 where |x|^2 = 2.
    ZubovConfig cfg;
    cfg.alpha = 0.1;
    const auto lin = make_linear(2);
    const auto o = compute_I(lin, kDist2, v2(2, 0), cfg);
    REQUIRE(o.converged());
    const auto pts = trajectory_points(lin, kDist2, cfg, o, 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == v2(2, 0));
    CHECK(pts[0].v == doctest::Approx(std::tanh(0.1 * 2.0)).epsilon(1e-5));
    CHECK(pts[1].x.squaredNorm() == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(pts[1].v == doctest::Approx(std::tanh(0.1 * 1.0)).epsilon(1e-5));

    const auto raw = trajectory_points(lin, kDist2, cfg, o, 1, LabelSpace::I);
    CHECK(raw[0].v == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(raw[1].v == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("exceeded trajectories contribute a single label-1 point") {
    ZubovConfig cfg;
    const auto vdp = make_vanderpol();
    const auto o = compute_I(vdp, kDist2, v2(4, 4), cfg);
    REQUIRE(o.kind == OutcomeKind::Exceeded);
    const auto pts = trajectory_points(vdp, kDist2, cfg, o, 4);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].v == 1.0);
    CHECK(trajectory_points(vdp, kDist2, cfg, o, 4, LabelSpace::I)[0].v == cfg.M);
}

TEST_CASE("trajectories starting on the equilibrium are not augmented") {
    ZubovConfig cfg;
    const auto vdp = make_vanderpol();
    const auto o = compute_I(vdp, kDist2, v2(0, 0), cfg);
    const auto pts = trajectory_points(vdp, kDist2, cfg, o, 4);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].v == 0.0);
}

TEST_CASE("augmented labels match recomputation") {
    ZubovConfig cfg;
    const auto vdp = make_vanderpol();
    for (const Vec& x0 : {v2(1.2, 0.8), v2(-0.6, -1.9)}) {
        const auto o = compute_I(vdp, kDist2, x0, cfg);
        REQUIRE(o.converged());
        const auto pts = trajectory_points(vdp, kDist2, cfg, o, 4);
        REQUIRE(pts.size() == 5);
        for (std::size_t k = 1; k < pts.size(); ++k) {
            const double v = eval_V(compute_I(vdp, kDist2, pts[k].x, cfg), cfg.alpha);
            CHECK(std::abs(v - pts[k].v) <= 2e-3);
            // Labels decrease along the trajectory at even quantiles.
            CHECK(pts[k].v < pts[k - 1].v);
        }
    }
}

TEST_CASE("anchor points are unique per trajectory") {
    const auto d = small_vdp(1, 30, 4);
    std::set<std::pair<double, double>> seen;
    const auto xs = sample_uniform(Region::cube(2, -3, 3), 30, 99);
    for (const auto& x : xs) seen.insert({x(0), x(1)});
    std::size_t anchors = 0;
    for (const auto& p : d.points) anchors += seen.count({p.x(0), p.x(1)});
    CHECK(anchors == 30 - d.meta.inconclusive);
}

TEST_CASE("output does not depend on the worker count") {
    const auto a = small_vdp(1);
    const auto b = small_vdp(3);
    CHECK(to_text(a) == to_text(b));
}

TEST_CASE("generation rejects a mismatched region") {
    CHECK_THROWS_AS(generate_dataset(make_vanderpol(), kDist2, ZubovConfig{}, Region::cube(3, -1, 1), 5, 0, 1),
                    DimensionError);
    CHECK_THROWS_AS(generate_dataset(make_vanderpol(), kDist2, ZubovConfig{}, Region::cube(2, -1, 1), 0, 0, 1),
                    Error);
}

TEST_CASE("dataset file round trip") {
    auto d = small_vdp(1, 12, 2);
    d.meta.extra["note"] = "kept";
    const auto back = from_text(to_text(d));
    CHECK(back == d);
    CHECK(back.meta.extra.at("note") == "kept");
    CHECK(to_text(back) == to_text(d));
}

TEST_CASE("empty dataset") {
    Dataset d;
    d.dim = 2;
    d.meta.system = "vdp";
    d.meta.w = describe(kDist2);
    d.meta.region_lower = v2(-1, -1);
    d.meta.region_upper = v2(1, 1);
    const std::string text = to_text(d);
    CHECK(text.rfind("# doa-dataset 1\n", 0) == 0);
    CHECK(text.find("# columns=x1,x2,v\n") != std::string::npos);
    const auto back = from_text(text);
    CHECK(back.size() == 0);
    CHECK(back == d);
}

TEST_CASE("exact file layout") {
    Dataset d;
    d.dim = 2;
    d.meta.system = "linear";
    d.meta.w = "distance_squared:0 0";
    d.meta.alpha = 0.1;
    d.meta.M = 200;
    d.meta.delta_I = 1e-6;
    d.meta.seed = 7;
    d.meta.region_lower = v2(-3, -3);
    d.meta.region_upper = v2(3, 3);
    d.meta.n_traj = 1;
    d.meta.k_extra = 0;
    d.meta.converged = 1;
    d.points.push_back({v2(2, 0), 0.19737532022490401});
    CHECK(to_text(d) ==
          "# doa-dataset 1\n"
          "# dim=2\n"
          "# system=linear\n"
          "# w=distance_squared:0 0\n"
          "# alpha=0.10000000000000001\n"
          "# M=200\n"
          "# delta_I=9.9999999999999995e-07\n"
          "# seed=7\n"
          "# region_lower=-3 -3\n"
          "# region_upper=3 3\n"
          "# n_traj=1\n"
          "# k_extra=0\n"
          "# converged=1\n"
          "# exceeded=0\n"
          "# inconclusive=0\n"
          "# labels=V\n"
          "# columns=x1,x2,v\n"
          "2,0,0.19737532022490401\n");
}

TEST_CASE("parse errors name the line") {
    const std::string good = to_text(small_vdp(1, 3, 0));
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            from_text(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    const std::size_t header_lines = 17;
    CHECK(line_of(good + "1,2\n") == header_lines + 4);
    CHECK(line_of(good + "1,2,3,4\n") == header_lines + 4);
    CHECK(line_of(good + "1,x,0.5\n") == header_lines + 4);
    CHECK(line_of(good + "1,2,1.5\n") == header_lines + 4);
    CHECK(line_of("not a dataset\n") == 1);
    CHECK_THROWS_AS(read_dataset("/nonexistent/data.csv"), Error);
}

TEST_CASE("label histogram") {
    Dataset d;
    d.dim = 1;
    SUBCASE("all ones land in the last bin") {
        for (int i = 0; i < 7; ++i) d.points.push_back({Vec::Zero(1), 1.0});
        const auto h = label_histogram(d, 10);
        REQUIRE(h.size() == 10);
        CHECK(h.back().count == 7);
        CHECK(h.back().high == 1.0);
    }
    SUBCASE("one label per bin") {
        for (int i = 0; i < 10; ++i) d.points.push_back({Vec::Zero(1), 0.05 + 0.1 * i});
        for (const auto& b : label_histogram(d, 10)) CHECK(b.count == 1);
    }
    SUBCASE("counts add up") {
        const auto g = small_vdp(1, 30, 4);
        std::size_t total = 0;
        for (const auto& b : label_histogram(g, 7)) total += b.count;
        CHECK(total == g.size());
    }
    CHECK_THROWS_AS(label_histogram(d, 0), Error);
}

TEST_CASE("label space names") {
    CHECK(parse_label_space("V") == LabelSpace::V);
    CHECK(parse_label_space("I") == LabelSpace::I);
    CHECK(to_string(LabelSpace::I) == "I");
    CHECK_THROWS_AS(parse_label_space("W"), Error);
}

}  // TEST_SUITE
