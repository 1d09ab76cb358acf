#pragma once

#include <cmath>
#include <tuple>
#include <utility>

#include "shearchaos/linalg.hpp"
#include "shearchaos/models.hpp"
#include "shearchaos/rng.hpp"

// Time steppers. The deterministic integrator is classical RK4, optionally
// advancing a tangent vector or a full Jacobian alongside the state through
// the variational equation d/dt v = Df(x(t)) v. The stochastic integrator is
// Euler-Maruyama (Ito), reusing the same Brownian increments for the state
// and the tangent within a step.

namespace shearchaos::integrators {

// One classical fourth-order step of dx/dt = field(x).
template <class Field>
Vec2 rk4_step(Field&& field, const Vec2& s, double dt) {
    const Vec2 k1 = field(s);
    const Vec2 k2 = field(s + k1 * (dt / 2.0));
    const Vec2 k3 = field(s + k2 * (dt / 2.0));
    const Vec2 k4 = field(s + k3 * dt);
    return s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
}

// Joint RK4 step of the state and a variational payload V (Tangent2 or Mat2),
// treating (x, V) as one ODE with dV/dt = Df(x) V.
template <class Field, class FieldJac, class Payload>
std::pair<Vec2, Payload> rk4_variational_step(Field&& field, FieldJac&& jac, const Vec2& s,
                                              const Payload& v, double dt) {
    const Vec2 k1 = field(s);
    const Payload m1 = jac(s) * v;

    const Vec2 s2 = s + k1 * (dt / 2.0);
    const Vec2 k2 = field(s2);
    const Payload m2 = jac(s2) * (v + m1 * (dt / 2.0));

    const Vec2 s3 = s + k2 * (dt / 2.0);
    const Vec2 k3 = field(s3);
    const Payload m3 = jac(s3) * (v + m2 * (dt / 2.0));

    const Vec2 s4 = s + k3 * dt;
    const Vec2 k4 = field(s4);
    const Payload m4 = jac(s4) * (v + m3 * dt);

    return {s + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0),
            v + (m1 + (m2 + m3) * 2.0 + m4) * (dt / 6.0)};
}

// Integrate the flow for time t in steps of dt (plus one remainder step),
// propagating the payload through the variational equation. With a Mat2
// payload seeded at identity this returns the Jacobian of the time-t flow.
template <class Field, class FieldJac, class Payload>
std::pair<Vec2, Payload> rk4_flow_with_variational(Field&& field, FieldJac&& jac, Vec2 s,
                                                   Payload v, double t, double dt) {
    const long long n_full = static_cast<long long>(std::floor(t / dt));
    for (long long i = 0; i < n_full; ++i) {
        std::tie(s, v) = rk4_variational_step(field, jac, s, v, dt);
    }
    const double rem = t - static_cast<double>(n_full) * dt;
    if (rem > 0.0) {
        std::tie(s, v) = rk4_variational_step(field, jac, s, v, rem);
    }
    return {s, v};
}

// Plain flow without variational payload.
template <class Field>
Vec2 rk4_flow(Field&& field, Vec2 s, double t, double dt) {
    const long long n_full = static_cast<long long>(std::floor(t / dt));
    for (long long i = 0; i < n_full; ++i) s = rk4_step(field, s, dt);
    const double rem = t - static_cast<double>(n_full) * dt;
    if (rem > 0.0) s = rk4_step(field, s, rem);
    return s;
}

// One Euler-Maruyama step of the state and tangent. `fields` maps a Vec2
// state to models::SdeFields. The Brownian increments dB_k ~ N(0, dt) drawn
// here drive both the state and the tangent update.
template <class FieldsFn>
std::pair<Vec2, Tangent2> em_step(FieldsFn&& fields, const Vec2& s, const Tangent2& v,
                                  double dt, RngStream& rng) {
    const models::SdeFields f = fields(s);
    const double sqrt_dt = std::sqrt(dt);

    Vec2 ds = f.drift * dt;
    Tangent2 dv = (f.drift_jacobian * v) * dt;
    for (int k = 0; k < f.n_channels; ++k) {
        const double db = sqrt_dt * rng.normal();
        ds += f.columns[k] * db;
        dv += (f.column_jacobians[k] * v) * db;
    }
    return {s + ds, v + dv};
}

// Cylinder convenience wrapper: wraps theta after the step.
inline std::pair<models::CylinderState, Tangent2> em_step(const models::ShearParams& p,
                                                          const models::NoiseConfig& n,
                                                          const models::CylinderState& s,
                                                          const Tangent2& v, RngStream& rng) {
    auto [sn, vn] = em_step(
        [&](const Vec2& x) {
            return models::sde_fields(models::CylinderState{x.d1, x.d2}, p, n);
        },
        Vec2{s.theta, s.y}, v, n.dt, rng);
    return {models::CylinderState{sn.d1, sn.d2}.wrapped(), vn};
}

}  // namespace shearchaos::integrators
