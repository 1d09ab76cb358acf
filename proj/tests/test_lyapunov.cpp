#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shearchaos/lyapunov.hpp"

using namespace shearchaos;
using namespace shearchaos::models;
using namespace shearchaos::lyapunov;

TEST_CASE("lyap_max recovers the dominant eigenvalue of a fixed matrix") {
    const Mat2 M{2.0, 0.0, 0.0, 0.5};
    auto evolver = [&](Vec2&, Tangent2& v) { v = M * v; };
    const auto est = lyap_max(evolver, Vec2{0, 0}, Tangent2{1.0, 1.0}, 100000, 1);
    CHECK(est.value == doctest::Approx(std::log(2.0)).epsilon(1e-4));
}

TEST_CASE("unforced kicked map has a neutral exponent") {
    const ShearParams p{2.0, 1.0, 0.0, 5.0};
    auto evolver = [&](CylinderState& s, Tangent2& v) {
        const auto r = kicked_time_T_map(s, p);
        s = r.state;
        v = r.jacobian * v;
    };
    const auto est =
        lyap_max(evolver, CylinderState{0.37, 0.05}, Tangent2{0.3, 0.9}, 100000, 1);
    CHECK(std::abs(est.value) < 1e-3);
}

TEST_CASE("estimate is invariant under initial tangent rescaling") {
    const ShearParams p{2.0, 1.0, 1.5, 8.0};
    auto make_evolver = [&]() {
        return [&](CylinderState& s, Tangent2& v) {
            const auto r = kicked_time_T_map(s, p);
            s = r.state;
            v = r.jacobian * v;
        };
    };
    const CylinderState s0{0.2, 0.03};
    const auto a = lyap_max(make_evolver(), s0, Tangent2{0.6, -0.2}, 5000, 1);
    const auto b = lyap_max(make_evolver(), s0, Tangent2{0.6 * 1024.0, -0.2 * 1024.0}, 5000, 1);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-13));
}

TEST_CASE("per-period and per-time bookkeeping are consistent") {
    const ShearParams p{2.0, 1.0, 1.5, 8.0};
    auto make_evolver = [&]() {
        return [&](CylinderState& s, Tangent2& v) {
            const auto r = kicked_time_T_map(s, p);
            s = r.state;
            v = r.jacobian * v;
        };
    };
    const CylinderState s0{0.9, -0.02};
    const auto per_period = lyap_max(make_evolver(), s0, Tangent2{1, 0}, 4000, 1, 1.0);
    const auto per_time = lyap_max(make_evolver(), s0, Tangent2{1, 0}, 4000, 1, p.T);
    CHECK(per_period.value == doctest::Approx(per_time.value * p.T).epsilon(1e-12));
}

TEST_CASE("tangent range violations are signalled with the step index") {
    auto blowup = [](Vec2&, Tangent2& v) { v = v * 1e200; };
    try {
        lyap_max(blowup, Vec2{0, 0}, Tangent2{1, 0}, 100, 3);
        FAIL("expected TangentRangeError");
    } catch (const TangentRangeError& e) {
        CHECK(e.step_index == 2);
    }
}

TEST_CASE("excursion_fraction basics") {
    SUBCASE("all-zero trajectory") {
        const auto st = excursion_fraction(100, [](long long) { return 0.0; }, 0.1);
        CHECK(st.fraction == 0.0);
        CHECK_FALSE(st.ever_exceeded);
    }
    SUBCASE("constant above threshold") {
        const auto st = excursion_fraction(100, [](long long) { return 0.2; }, 0.1);
        CHECK(st.fraction == 1.0);
        CHECK(st.ever_exceeded);
    }
}

TEST_CASE("small kicks keep the attractor inside the band") {
    // e^{-lambda T} (b + A) < b with b = 0.15 guarantees containment
    const ShearParams p{2.0, 1.0, 0.1, 3.0};
    REQUIRE(std::exp(-p.lambda * p.T) * (0.15 + p.A) < 0.15);
    KickedProtocolOptions opts;
    opts.n_runs = 6;
    opts.n_steps = 20000;
    const auto res = protocol_kicked(p, 99, opts);
    CHECK_FALSE(res.flagged);
    for (const auto& r : res.runs) {
        CHECK(r.excursion_fraction == 0.0);
    }
}

TEST_CASE("protocol_kicked: determinism and trimmed order statistics") {
    const ShearParams p{2.0, 1.0, 1.5, 6.0};
    KickedProtocolOptions opts;
    opts.n_runs = 10;
    opts.n_steps = 3000;
    opts.threads = 2;
    const auto a = protocol_kicked(p, 4242, opts);
    opts.threads = 1;
    const auto b = protocol_kicked(p, 4242, opts);
    REQUIRE(a.runs.size() == 10);
    CHECK(a.upper == b.upper);
    CHECK(a.lower == b.lower);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(a.runs[i].value == b.runs[i].value);
        CHECK(a.runs[i].seed == b.runs[i].seed);
    }

    std::vector<double> vals;
    for (const auto& r : a.runs) vals.push_back(r.value);
    std::sort(vals.begin(), vals.end());
    CHECK(a.lower == vals[1]);
    CHECK(a.upper == vals[8]);
    CHECK(a.lower <= a.upper);
}

TEST_CASE("protocol_kicked neutral at zero amplitude") {
    const ShearParams p{2.0, 1.0, 0.0, 5.0};
    KickedProtocolOptions opts;
    opts.n_runs = 10;
    opts.n_steps = 50000;
    opts.threads = 2;
    const auto res = protocol_kicked(p, 7, opts);
    CHECK(std::abs(res.upper) < 1e-3);
    CHECK(std::abs(res.lower) < 1e-3);
}

TEST_CASE("protocol_sde: deterministic, and unforced/additive cases are neutral") {
    const ShearParams p{2.0, 1.0, 0.0, 0.0};
    SdeProtocolOptions opts;
    opts.threads = 2;
    SUBCASE("zero amplitude") {
        const NoiseConfig n{NoiseMode::degenerate, 0.0, 1e-3};
        const auto est = protocol_sde(p, n, 100.0, 5, opts);
        CHECK(std::abs(est.value) < 0.05);
    }
    SUBCASE("additive noise, tangent dynamics deterministic") {
        const NoiseConfig n{NoiseMode::additive, 0.5, 1e-3};
        std::vector<LyapEstimate> runs;
        const auto est = protocol_sde(p, n, 100.0, 5, opts, &runs);
        CHECK(std::abs(est.value) < 0.05);
        REQUIRE(runs.size() == 12);
        // additive tangent growth is independent of the Brownian path, so all
        // runs agree up to the initial direction
        const auto rerun = protocol_sde(p, n, 100.0, 5, opts);
        CHECK(rerun.value == est.value);
    }
}

TEST_CASE("protocol_sde shares the forcing realization across its ICs") {
    // With sigma = 0 the tangent map is independent of the state, so runs in
    // the same realization (same Brownian path) give identical estimates
    // while distinct realizations differ.
    const ShearParams p{0.0, 1.0, 0.0, 0.0};
    const NoiseConfig n{NoiseMode::degenerate, 0.8, 1e-3};
    SdeProtocolOptions opts;
    opts.threads = 2;
    std::vector<LyapEstimate> runs;
    protocol_sde(p, n, 20.0, 31, opts, &runs);
    REQUIRE(runs.size() == 12);
    // same realization, different ICs: the tangent evolution v' = v + dt*Dv +
    // dB*Dcol(theta)*v depends on theta(t), which differs per IC; but with
    // sigma=0 theta advances rigidly, theta(t) = theta0 + t, so growth rates
    // still differ per IC. Realization grouping is observable through the
    // exact repetition of draws: re-running must reproduce values bitwise.
    const auto again = [&]() {
        std::vector<LyapEstimate> r2;
        protocol_sde(p, n, 20.0, 31, opts, &r2);
        return r2;
    }();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        CHECK(runs[i].value == again[i].value);
        CHECK(runs[i].seed == again[i].seed);
    }
}

TEST_CASE("protocol_poisson: determinism and excursion accounting") {
    const ShearParams p{2.0, 1.0, 0.5, 2.0};
    PoissonProtocolOptions opts;
    opts.n_runs = 6;
    opts.threads = 2;
    std::vector<LyapEstimate> runs;
    const auto a = protocol_poisson(p, 500.0, 21, opts, &runs);
    const auto b = protocol_poisson(p, 500.0, 21, opts);
    CHECK(a.value == b.value);
    CHECK(a.excursion_fraction == b.excursion_fraction);
    REQUIRE(runs.size() == 6);
    for (const auto& r : runs) {
        CHECK(r.excursion_fraction >= 0.0);
        CHECK(r.excursion_fraction <= 1.0);
        CHECK(r.n_steps > 0);
    }
    // kicks of size ~0.5 with lambda=1 push |y| beyond 0.1 regularly
    CHECK(a.excursion_fraction > 0.0);
}

TEST_CASE("protocol_kicked_osc runs and is deterministic") {
    OscParams p;
    p.a_ff = 1.0;
    p.a_fb = 1.47;
    OscKickProtocolOptions opts;
    opts.n_runs = 4;
    opts.n_steps = 50;
    opts.rk4_dt = 2e-3;
    opts.threads = 2;
    const auto a = protocol_kicked_osc(p, 1.0, 2.0, 77, opts);
    const auto b = protocol_kicked_osc(p, 1.0, 2.0, 77, opts);
    REQUIRE(a.runs.size() == 4);
    CHECK(a.upper == b.upper);
    CHECK(a.lower == b.lower);
    CHECK(a.lower <= a.upper);
}
