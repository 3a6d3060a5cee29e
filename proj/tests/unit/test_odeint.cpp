#include "doa/odeint.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace doa;

namespace {

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

const WKind kDist2 = DistanceSquared{Vec::Zero(2)};

}  // namespace

TEST_SUITE("odeint") {

TEST_CASE("constant rate z' = 1 is integrated exactly") {
    // Zero-dimensional state carrying only z.
    const AugmentedField f = [](const Vec&, Vec&, double& dz) { dz = 1.0; };
    SolverConfig cfg;
    const auto r = rk45_step(f, 0.0, {Vec(0), 0.0}, 0.125, cfg);
    CHECK(r.accepted);
    CHECK(r.next.z == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("linear decay to t = 1 matches exp(-1)") {
    const auto lin = make_linear(1);
    SolverConfig cfg;
    cfg.rel_tol = 1e-6;
    Vec x0(1);
    x0 << 1.0;
    const auto chunk = integrate_chunk(lin, DistanceSquared{Vec::Zero(1)}, {x0, 0.0}, 0.0, 1.0, cfg);
    CHECK(chunk.back().t == 1.0);
    CHECK(std::abs(chunk.back().s.x(0) - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("error estimate scales with the fifth power of the step") {
    const auto vdp = make_vanderpol();
    const auto f = make_augmented(vdp, kDist2);
    SolverConfig cfg;
    // z starts away from zero so its error scale does not shrink with h.
    const AugmentedState s{v2(1.0, 1.0), 10.0};
    const double e1 = rk45_step(f, 0.0, s, 0.1, cfg).err;
    const double e2 = rk45_step(f, 0.0, s, 0.05, cfg).err;
    const double ratio = e1 / e2;
    CHECK(ratio >= 20.0);
    CHECK(ratio <= 45.0);
}

TEST_CASE("step controller") {
    CHECK(propose_step(1.0, 0.0) == 5.0);
    CHECK(propose_step(1.0, 1e-12) == 5.0);
    CHECK(propose_step(1.0, 1e12) == doctest::Approx(0.2));
    CHECK(propose_step(2.0, 1.0) == doctest::Approx(1.8));

    const auto vdp = make_vanderpol();
    const auto f = make_augmented(vdp, kDist2);
    SolverConfig cfg;
    const auto big = rk45_step(f, 0.0, {v2(2.0, 2.0), 0.0}, 2.0, cfg);
    CHECK_FALSE(big.accepted);
    CHECK(big.h_next < 2.0);
}

TEST_CASE("non-finite derivative names the component") {
    SystemModel bad("bad", 2, [](const Vec& x, Vec& dx) {
        dx(0) = 0.0;
        dx(1) = x(1) > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    });
    SolverConfig cfg;
    try {
        integrate_chunk(bad, kDist2, {v2(0.0, 0.6), 0.0}, 0.0, 1.0, cfg);
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
        CHECK(e.component() == 1);
    }
}

TEST_CASE("constant integrand over a chunk") {
    SystemModel still("still", 2, [](const Vec&, Vec& dx) { dx.setZero(); });
    SolverConfig cfg;
    const auto chunk = integrate_chunk(still, kDist2, {v2(1.0, 0.0), 0.0}, 0.0, 2.0, cfg);
    CHECK(chunk.back().t == 2.0);
    CHECK(chunk.back().s.z == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("van der Pol chunk accumulates z") {
    const auto vdp = make_vanderpol();
    SolverConfig cfg;
    const auto chunk = integrate_chunk(vdp, kDist2, {v2(0.5, 0.5), 0.0}, 3.0, 1.0, cfg);
    REQUIRE(chunk.samples.size() >= 2);
    CHECK(chunk.samples.front().t == 3.0);
    CHECK(chunk.back().t == 4.0);
    CHECK(chunk.last_step > 0.0);
    CHECK(chunk.steps_accepted + 1 == chunk.samples.size());
    for (std::size_t k = 1; k < chunk.samples.size(); ++k) {
        CHECK(chunk.samples[k].t > chunk.samples[k - 1].t);
        CHECK(chunk.samples[k].s.z > chunk.samples[k - 1].s.z);
        CHECK(chunk.samples[k].s.x.allFinite());
    }
    CHECK(chunk.back().t - chunk.samples[chunk.samples.size() - 2].t == doctest::Approx(chunk.last_step));
}

TEST_CASE("linear system integral over a long chunk") {
    // z(10) = (1 - e^-20) |x0|^2 / 2
    const auto lin = make_linear(2);
    SolverConfig cfg;
    const auto chunk = integrate_chunk(lin, kDist2, {v2(1.0, 1.0), 0.0}, 0.0, 10.0, cfg);
    CHECK(std::abs(chunk.back().s.z - (1.0 - std::exp(-20.0))) < 1e-5);
}

TEST_CASE("z is non-decreasing along random trajectories") {
    const auto vdp = make_vanderpol();
    SolverConfig cfg;
    for (double a : {-1.0, -0.5, 0.3, 1.0}) {
        for (double b : {-1.0, 0.0, 1.0}) {
            const auto chunk = integrate_chunk(vdp, kDist2, {v2(a, b), 0.0}, 0.0, 3.0, cfg);
            for (std::size_t k = 1; k < chunk.samples.size(); ++k)
                CHECK(chunk.samples[k].s.z >= chunk.samples[k - 1].s.z - 1e-12);
        }
    }
}

TEST_CASE("halving the chunk length leaves the state at a fixed horizon unchanged") {
    const auto vdp = make_vanderpol();
    SolverConfig cfg;
    auto run = [&](double dt) {
        AugmentedState s{v2(1.2, -0.4), 0.0};
        double t = 0.0;
        double h = cfg.h_init;
        while (t < 4.0 - 1e-12) {
            SolverConfig c = cfg;
            c.h_init = h;
            const auto chunk = integrate_chunk(vdp, kDist2, s, t, dt, c);
            s = chunk.back().s;
            t = chunk.back().t;
            h = chunk.next_step;
        }
        return s;
    };
    const auto a = run(1.0);
    const auto b = run(0.5);
    CHECK((a.x - b.x).norm() / a.x.norm() < 10 * cfg.rel_tol);
    CHECK(std::abs(a.z - b.z) / a.z < 10 * cfg.rel_tol);
}

TEST_CASE("global error decreases as the tolerance tightens") {
    const auto lin = make_linear(1);
    Vec x0(1);
    x0 << 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double tol : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        SolverConfig cfg;
        cfg.rel_tol = tol;
        cfg.abs_tol = tol * 1e-3;
        const auto chunk = integrate_chunk(lin, DistanceSquared{Vec::Zero(1)}, {x0, 0.0}, 0.0, 5.0, cfg);
        const double err = std::abs(chunk.back().s.x(0) - std::exp(-5.0));
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("blow-up guard") {
    SystemModel grow("grow", 1, [](const Vec& x, Vec& dx) { dx(0) = x(0) * x(0); });
    SolverConfig cfg;
    Vec x0(1);
    x0 << 1.0;
    // Finite-time escape at t = 1.
    CHECK_THROWS_AS(integrate_chunk(grow, DistanceSquared{Vec::Zero(1)}, {x0, 0.0}, 0.0, 2.0, cfg), BlowUpError);
    ChunkOptions tight;
    tight.norm_bound = 10.0;
    try {
        integrate_chunk(grow, DistanceSquared{Vec::Zero(1)}, {x0, 0.0}, 0.0, 2.0, cfg, tight);
        FAIL("expected BlowUpError");
    } catch (const BlowUpError& e) {
        CHECK(e.time() == doctest::Approx(0.9).epsilon(0.02));
    }
}

TEST_CASE("step underflow") {
    SystemModel stiff("stiff", 1, [](const Vec& x, Vec& dx) { dx(0) = -1e14 * (x(0) - std::cos(x(0))); });
    SolverConfig cfg;
    cfg.h_min = 1e-6;
    cfg.h_init = 1e-3;
    Vec x0(1);
    x0 << 2.0;
    CHECK_THROWS_AS(integrate_chunk(stiff, DistanceSquared{Vec::Zero(1)}, {x0, 0.0}, 0.0, 1.0, cfg),
                    StepUnderflowError);
}

TEST_CASE("z limit stops the chunk early") {
    const auto lin = make_linear(2);
    SolverConfig cfg;
    ChunkOptions opts;
    opts.z_limit = 0.5;
    const auto chunk = integrate_chunk(lin, kDist2, {v2(1.0, 1.0), 0.0}, 0.0, 10.0, cfg, opts);
    CHECK(chunk.hit_z_limit);
    CHECK(chunk.back().s.z > 0.5);
    CHECK(chunk.back().t < 10.0);
}

TEST_CASE("advance_to_z lands on the target") {
    // z(t) = 2 (1 - e^-2t) from (2, 0); z = 1 when |x|^2 = 2.
    const auto lin = make_linear(2);
    SolverConfig cfg;
    const auto hit = advance_to_z(lin, kDist2, {v2(2.0, 0.0), 0.0}, 0.0, 1.0, cfg);
    CHECK(hit.s.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hit.s.x.squaredNorm() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(hit.t == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("solver configuration validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.h_min = 1.0;
    cfg.h_init = 0.1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    const auto lin = make_linear(2);
    CHECK_THROWS_AS(integrate_chunk(lin, kDist2, {v2(1, 1), 0.0}, 0.0, 0.0, SolverConfig{}), Error);
}

}  // TEST_SUITE
