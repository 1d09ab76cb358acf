#include <doctest.h>

#include <cmath>

#include "shearchaos/integrators.hpp"
#include "shearchaos/models.hpp"
#include "shearchaos/rng.hpp"

using namespace shearchaos;
using namespace shearchaos::models;

namespace {

double circle_dist(double a, double b) {
    const double d = std::abs(wrap_phase(a) - wrap_phase(b));
    return std::min(d, 1.0 - d);
}

}  // namespace

TEST_CASE("wrap_phase reduces to [0,1)") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(1.0) == 0.0);
    CHECK(wrap_phase(2.25) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(wrap_phase(-0.25) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(wrap_phase(-3.0) == 0.0);
    const double w = wrap_phase(-1e-18);
    CHECK(w >= 0.0);
    CHECK(w < 1.0);
}

TEST_CASE("shear_flow_map on the invariant cycle") {
    const ShearParams p{3.7, 0.9, 0.0, 1.0};
    const auto s = shear_flow_map({0.3, 0.0}, 2.7, p);
    CHECK(s.theta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.y == 0.0);
}

TEST_CASE("shear_flow_map closed form vs RK4 of the drift") {
    const ShearParams p{2.0, 1.0, 0.0, 1.0};
    const auto s = shear_flow_map({0.3, 0.1}, 1.0, p);
    CHECK(s.theta == doctest::Approx(0.426424).epsilon(1e-5));
    CHECK(s.y == doctest::Approx(0.036788).epsilon(1e-4));

    auto drift = [&p](const Vec2& x) { return Vec2{1.0 + p.sigma * x.d2, -p.lambda * x.d2}; };
    const Vec2 ref = integrators::rk4_flow(drift, Vec2{0.3, 0.1}, 1.0, 1e-3);
    CHECK(s.theta == doctest::Approx(wrap_phase(ref.d1)).epsilon(1e-10));
    CHECK(s.y == doctest::Approx(ref.d2).epsilon(1e-10));
}

TEST_CASE("zero shear decouples theta") {
    RngStream rng(11);
    for (int i = 0; i < 50; ++i) {
        const ShearParams p{0.0, rng.uniform(0.1, 3.0), 0.0, 1.0};
        const CylinderState s0{rng.u01(), rng.uniform(-2.0, 2.0)};
        const double t = rng.uniform(0.0, 5.0);
        const auto s = shear_flow_map(s0, t, p);
        CHECK(circle_dist(s.theta, s0.theta + t) < 1e-12);
        CHECK(s.y == doctest::Approx(s0.y * std::exp(-p.lambda * t)).epsilon(1e-12));
    }
}

TEST_CASE("shear flow semigroup property") {
    RngStream rng(42);
    for (int i = 0; i < 200; ++i) {
        const ShearParams p{rng.uniform(0.0, 4.0), rng.uniform(0.05, 3.0), 0.0, 1.0};
        const CylinderState s0{rng.u01(), rng.uniform(-2.0, 2.0)};
        const double t1 = rng.uniform(0.0, 3.0);
        const double t2 = rng.uniform(0.0, 3.0);
        const auto twice = shear_flow_map(shear_flow_map(s0, t1, p), t2, p);
        const auto once = shear_flow_map(s0, t1 + t2, p);
        CHECK(circle_dist(twice.theta, once.theta) < 1e-12);
        CHECK(twice.y == doctest::Approx(once.y).epsilon(1e-12));
    }
}

TEST_CASE("shear_flow_jacobian basics and finite differences") {
    const ShearParams p{2.0, 1.0, 0.0, 1.0};
    SUBCASE("time zero is the identity") {
        const auto J = shear_flow_jacobian(0.0, p);
        CHECK(J.a11 == 1.0);
        CHECK(J.a12 == 0.0);
        CHECK(J.a21 == 0.0);
        CHECK(J.a22 == 1.0);
    }
    SUBCASE("frozen values at t=1") {
        const auto J = shear_flow_jacobian(1.0, p);
        CHECK(J.a11 == doctest::Approx(1.0));
        CHECK(J.a12 == doctest::Approx(1.264241).epsilon(1e-5));
        CHECK(J.a21 == 0.0);
        CHECK(J.a22 == doctest::Approx(0.367879).epsilon(1e-5));
    }
    SUBCASE("determinant is the volume contraction") {
        RngStream rng(7);
        for (int i = 0; i < 50; ++i) {
            const ShearParams q{rng.uniform(0.0, 5.0), rng.uniform(0.1, 2.0), 0.0, 1.0};
            const double t = rng.uniform(0.0, 10.0);
            CHECK(shear_flow_jacobian(t, q).det() ==
                  doctest::Approx(std::exp(-q.lambda * t)).epsilon(1e-12));
        }
    }
    SUBCASE("matches central differences of the lifted flow") {
        RngStream rng(13);
        const double eps = 1e-6;
        for (int i = 0; i < 30; ++i) {
            const ShearParams q{rng.uniform(0.0, 4.0), rng.uniform(0.1, 2.0), 0.0, 1.0};
            const double t = rng.uniform(0.0, 4.0);
            const Vec2 x{rng.u01(), rng.uniform(-1.0, 1.0)};
            const auto J = shear_flow_jacobian(t, q);
            const Vec2 dth = (shear_flow_lift({x.d1 + eps, x.d2}, t, q) -
                              shear_flow_lift({x.d1 - eps, x.d2}, t, q)) *
                             (0.5 / eps);
            const Vec2 dy = (shear_flow_lift({x.d1, x.d2 + eps}, t, q) -
                             shear_flow_lift({x.d1, x.d2 - eps}, t, q)) *
                            (0.5 / eps);
            CHECK(dth.d1 == doctest::Approx(J.a11).epsilon(1e-6));
            CHECK(dth.d2 == doctest::Approx(J.a21).epsilon(1e-6));
            CHECK(dy.d1 == doctest::Approx(J.a12).epsilon(1e-6));
            CHECK(dy.d2 == doctest::Approx(J.a22).epsilon(1e-6));
        }
    }
}

TEST_CASE("kick_map_sine") {
    SUBCASE("fixed where sin vanishes") {
        const auto r = kick_map_sine({0.0, 0.5}, 3.0);
        CHECK(r.state.theta == 0.0);
        CHECK(r.state.y == 0.5);
    }
    SUBCASE("quarter phase gets the full amplitude") {
        const auto r = kick_map_sine({0.25, 0.0}, 0.1);
        CHECK(r.state.theta == 0.25);
        CHECK(r.state.y == doctest::Approx(0.1).epsilon(1e-14));
    }
    SUBCASE("area preserving") {
        RngStream rng(3);
        for (int i = 0; i < 50; ++i) {
            const auto r = kick_map_sine({rng.u01(), rng.uniform(-1.0, 1.0)},
                                         rng.uniform(-3.0, 3.0));
            CHECK(r.jacobian.det() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("kicked_time_T_map") {
    SUBCASE("frozen example") {
        const ShearParams p{2.0, 1.0, 0.1, 1.0};
        const auto r = kicked_time_T_map({0.25, 0.0}, p);
        CHECK(r.state.theta == doctest::Approx(0.376424).epsilon(1e-5));
        CHECK(r.state.y == doctest::Approx(0.036788).epsilon(1e-4));
    }
    SUBCASE("zero kick reduces to the flow") {
        RngStream rng(5);
        for (int i = 0; i < 30; ++i) {
            const ShearParams p{rng.uniform(0.0, 4.0), rng.uniform(0.1, 2.0), 0.0,
                                rng.uniform(0.5, 10.0)};
            const CylinderState s{rng.u01(), rng.uniform(-1.0, 1.0)};
            const auto r = kicked_time_T_map(s, p);
            const auto f = shear_flow_map(s, p.T, p);
            CHECK(circle_dist(r.state.theta, f.theta) < 1e-14);
            CHECK(r.state.y == doctest::Approx(f.y).epsilon(1e-14));
        }
    }
    SUBCASE("composition matches the explicit time-T formula") {
        RngStream rng(17);
        for (int i = 0; i < 100; ++i) {
            const ShearParams p{rng.uniform(0.0, 4.0), rng.uniform(0.1, 2.0),
                                rng.uniform(0.0, 2.0), rng.uniform(0.5, 10.0)};
            const CylinderState s{rng.u01(), rng.uniform(-1.0, 1.0)};
            const auto r = kicked_time_T_map(s, p);
            const double u = s.y + p.A * std::sin(kTwoPi * s.theta);
            const double decay = std::exp(-p.lambda * p.T);
            const double theta_T =
                s.theta + p.T + (p.sigma / p.lambda) * u * (1.0 - decay);
            CHECK(circle_dist(r.state.theta, theta_T) < 1e-12);
            CHECK(r.state.y == doctest::Approx(decay * u).epsilon(1e-12));
            CHECK(r.jacobian.det() == doctest::Approx(decay).epsilon(1e-12));
        }
    }
}

TEST_CASE("sample_kick_schedule statistics and determinism") {
    const PoissonKickLaw law{2.0, 1.0};
    SUBCASE("gap mean obeys the law of large numbers") {
        RngStream rng(100);
        const auto events = sample_kick_schedule(law, 1e6, rng);
        REQUIRE(events.size() > 100000);
        const double mean_gap = events.back().time / static_cast<double>(events.size());
        CHECK(mean_gap == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("amplitudes stay in the band, times increase") {
        RngStream rng(101);
        const auto events = sample_kick_schedule(law, 1e4, rng);
        double prev = 0.0;
        for (const auto& ev : events) {
            CHECK(ev.time > prev);
            CHECK(ev.time <= 1e4);
            CHECK(ev.amplitude >= 0.8);
            CHECK(ev.amplitude <= 1.2);
            prev = ev.time;
        }
    }
    SUBCASE("identical seed, identical schedule") {
        RngStream a(7), b(7), c(8);
        const auto ea = sample_kick_schedule(law, 1e3, a);
        const auto eb = sample_kick_schedule(law, 1e3, b);
        const auto ec = sample_kick_schedule(law, 1e3, c);
        REQUIRE(ea.size() == eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(ea[i].time == eb[i].time);
            CHECK(ea[i].amplitude == eb[i].amplitude);
        }
        CHECK(ea.size() != ec.size());
    }
}

TEST_CASE("sde_fields per mode") {
    const ShearParams p{2.0, 1.0, 0.0, 1.0};
    SUBCASE("drift and its jacobian") {
        const auto f = sde_fields({0.3, 0.7}, p, {NoiseMode::degenerate, 0.5, 1e-4});
        CHECK(f.drift.d1 == doctest::Approx(1.0 + 2.0 * 0.7));
        CHECK(f.drift.d2 == doctest::Approx(-0.7));
        CHECK(f.drift_jacobian.a12 == doctest::Approx(2.0));
        CHECK(f.drift_jacobian.a22 == doctest::Approx(-1.0));
    }
    SUBCASE("sine-modulated columns vanish at theta = 0") {
        for (auto mode : {NoiseMode::degenerate, NoiseMode::isotropic}) {
            const auto f = sde_fields({0.0, 0.4}, p, {mode, 0.5, 1e-4});
            for (int k = 0; k < f.n_channels; ++k) {
                CHECK(f.columns[k].d1 == 0.0);
                CHECK(f.columns[k].d2 == 0.0);
            }
        }
    }
    SUBCASE("additive columns are constant with zero derivatives") {
        const auto f = sde_fields({0.3, 0.4}, p, {NoiseMode::additive, 0.5, 1e-4});
        REQUIRE(f.n_channels == 2);
        CHECK(f.columns[0].d1 == 0.5);
        CHECK(f.columns[0].d2 == 0.0);
        CHECK(f.columns[1].d1 == 0.0);
        CHECK(f.columns[1].d2 == 0.5);
        for (int k = 0; k < 2; ++k) {
            CHECK(f.column_jacobians[k].frobenius_norm() == 0.0);
        }
    }
    SUBCASE("degenerate column at quarter phase") {
        const auto f = sde_fields({0.25, 0.0}, p, {NoiseMode::degenerate, 0.7, 1e-4});
        REQUIRE(f.n_channels == 1);
        CHECK(f.columns[0].d1 == 0.0);
        CHECK(f.columns[0].d2 == doctest::Approx(0.7).epsilon(1e-14));
        // cos(pi/2) = 0: the theta-derivative vanishes here
        CHECK(f.column_jacobians[0].a21 == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("column jacobians match finite differences") {
        RngStream rng(23);
        const double eps = 1e-6;
        for (auto mode : {NoiseMode::degenerate, NoiseMode::isotropic, NoiseMode::additive}) {
            for (int i = 0; i < 20; ++i) {
                const NoiseConfig n{mode, rng.uniform(0.1, 1.0), 1e-4};
                const CylinderState s{rng.u01(), rng.uniform(-1.0, 1.0)};
                const auto f = sde_fields(s, p, n);
                const auto fp = sde_fields({s.theta + eps, s.y}, p, n);
                const auto fm = sde_fields({s.theta - eps, s.y}, p, n);
                for (int k = 0; k < f.n_channels; ++k) {
                    const Vec2 d = (fp.columns[k] - fm.columns[k]) * (0.5 / eps);
                    CHECK(f.column_jacobians[k].a11 ==
                          doctest::Approx(d.d1).epsilon(1e-6).scale(1.0));
                    CHECK(f.column_jacobians[k].a21 ==
                          doctest::Approx(d.d2).epsilon(1e-6).scale(1.0));
                    // y-derivatives are identically zero in every mode
                    CHECK(f.column_jacobians[k].a12 == 0.0);
                    CHECK(f.column_jacobians[k].a22 == 0.0);
                }
            }
        }
    }
}

TEST_CASE("pulse bump normalization and smoothness") {
    const double w = 0.05;
    SUBCASE("unit integral by Simpson quadrature") {
        const int n = 100000;  // even
        const double h = 2.0 * w / n;
        double sum = pulse_bump(-w, w) + pulse_bump(w, w);
        for (int i = 1; i < n; ++i) {
            sum += (i % 2 == 1 ? 4.0 : 2.0) * pulse_bump(-w + i * h, w);
        }
        CHECK(sum * h / 3.0 == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("vanishes with derivative at the support boundary") {
        CHECK(pulse_bump(w, w) == 0.0);
        CHECK(pulse_bump(-w, w) == 0.0);
        CHECK(pulse_bump_deriv(w, w) == 0.0);
        CHECK(std::abs(pulse_bump(w - 1e-7, w)) < 1e-9);
        CHECK(pulse_bump(0.5, w) == 0.0);
    }
    SUBCASE("peak value and periodicity") {
        CHECK(pulse_bump(0.0, w) == doctest::Approx(20.0));
        CHECK(pulse_bump(1.0 - 0.01, w) == doctest::Approx(pulse_bump(-0.01, w)));
    }
    SUBCASE("derivative matches finite differences") {
        for (double th : {-0.04, -0.01, 0.0, 0.013, 0.049}) {
            const double eps = 1e-7;
            const double fd = (pulse_bump(th + eps, w) - pulse_bump(th - eps, w)) / (2 * eps);
            CHECK(pulse_bump_deriv(th, w) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("osc_vector_field special points") {
    OscParams p;
    p.nu1 = 1.0;
    p.nu2 = 1.1;
    p.a_ff = 1.5;
    p.a_fb = 1.0;
    SUBCASE("insensitive at theta1 = 0") {
        const auto v = osc_vector_field(TorusState{0.0, 0.02}, p, 123.0);
        CHECK(v.d1 == doctest::Approx(1.0));
    }
    SUBCASE("coasting outside the pulse support") {
        const auto v = osc_vector_field(TorusState{0.5, 0.5}, p, 0.0);
        CHECK(v.d1 == doctest::Approx(1.0));
        CHECK(v.d2 == doctest::Approx(1.1));
    }
    SUBCASE("peak pulse value: unit coupling into oscillator 1") {
        const auto v = osc_vector_field(TorusState{0.5, 0.0}, p, 0.0);
        CHECK(v.d1 == doctest::Approx(1.0 + 20.0 / std::numbers::pi).epsilon(1e-12));
    }
    SUBCASE("feedforward branch drives oscillator 2") {
        const auto v = osc_vector_field(TorusState{0.0, 0.5}, p, 0.0);
        CHECK(v.d2 == doctest::Approx(1.1 + 1.5 * 20.0 / std::numbers::pi).epsilon(1e-12));
    }
    SUBCASE("field jacobian matches finite differences") {
        RngStream rng(31);
        const double eps = 1e-7;
        for (int i = 0; i < 30; ++i) {
            const Vec2 x{rng.u01(), rng.u01()};
            const double input = rng.uniform(-1.0, 1.0);
            const Mat2 J = osc_field_jacobian(x, p, input);
            const Vec2 d1 = (osc_vector_field(Vec2{x.d1 + eps, x.d2}, p, input) -
                             osc_vector_field(Vec2{x.d1 - eps, x.d2}, p, input)) *
                            (0.5 / eps);
            const Vec2 d2 = (osc_vector_field(Vec2{x.d1, x.d2 + eps}, p, input) -
                             osc_vector_field(Vec2{x.d1, x.d2 - eps}, p, input)) *
                            (0.5 / eps);
            CHECK(J.a11 == doctest::Approx(d1.d1).epsilon(1e-4).scale(100.0));
            CHECK(J.a21 == doctest::Approx(d1.d2).epsilon(1e-4).scale(100.0));
            CHECK(J.a12 == doctest::Approx(d2.d1).epsilon(1e-4).scale(100.0));
            CHECK(J.a22 == doctest::Approx(d2.d2).epsilon(1e-4).scale(100.0));
        }
    }
}

TEST_CASE("osc_kick_map closed form") {
    SUBCASE("theta = 0 is fixed for every amplitude") {
        for (double A : {-2.0, 0.0, 0.5, 3.0}) {
            CHECK(osc_kick_phase(0.0, A) == 0.0);
        }
    }
    SUBCASE("half phase with unit kick") {
        CHECK(osc_kick_phase(0.5, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("zero amplitude is the identity") {
        for (double th = 0.05; th < 1.0; th += 0.1) {
            CHECK(osc_kick_phase(th, 0.0) == doctest::Approx(th).epsilon(1e-12));
        }
    }
    SUBCASE("theta2 untouched") {
        const auto s = osc_kick_map({0.3, 0.77}, 1.5);
        CHECK(s.theta2 == 0.77);
        CHECK(s.theta1 == doctest::Approx(osc_kick_phase(0.3, 1.5)));
    }
    SUBCASE("agrees with direct integration of the kick flow") {
        for (double A : {0.25, 0.5, 1.0, 1.7, 3.0}) {
            for (double th = 0.02; th < 1.0; th += 0.049) {
                auto kick_field = [A](const Vec2& x) {
                    return Vec2{A * phase_sensitivity(x.d1), 0.0};
                };
                const Vec2 ode =
                    integrators::rk4_flow(kick_field, Vec2{th, 0.0}, 1.0, 1e-4);
                CHECK(osc_kick_phase(th, A) == doctest::Approx(ode.d1).epsilon(1e-8));
            }
        }
    }
    SUBCASE("derivative matches finite differences") {
        for (double A : {0.25, 1.0, 3.0}) {
            for (double th = 0.05; th < 1.0; th += 0.09) {
                const double eps = 1e-7;
                const double fd =
                    (osc_kick_phase(th + eps, A) - osc_kick_phase(th - eps, A)) / (2 * eps);
                CHECK(osc_kick_deriv(th, A) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("osc_sde_fields diffusion column") {
    OscParams p;
    const auto f = osc_sde_fields({0.25, 0.6}, p, 0.4);
    REQUIRE(f.n_channels == 1);
    CHECK(f.columns[0].d1 == doctest::Approx(0.4 * phase_sensitivity(0.25)));
    CHECK(f.columns[0].d2 == 0.0);
    CHECK(f.column_jacobians[0].a11 ==
          doctest::Approx(0.4 * phase_sensitivity_deriv(0.25)));
    const auto v = osc_vector_field(TorusState{0.25, 0.6}, p, 0.0);
    CHECK(f.drift.d1 == v.d1);
    CHECK(f.drift.d2 == v.d2);
}
