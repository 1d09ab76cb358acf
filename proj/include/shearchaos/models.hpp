#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "shearchaos/linalg.hpp"
#include "shearchaos/rng.hpp"

// The dynamical systems under study: a linear shear flow on the cylinder
// S^1 x R forced by kicks, Poisson kicks or white noise, and a pair of
// pulse-coupled phase oscillators on the torus T^2.

namespace shearchaos::models {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduce a phase to [0, 1).
inline double wrap_phase(double theta) {
    theta -= std::floor(theta);
    return theta < 1.0 ? theta : 0.0;
}

// Point on the cylinder S^1 x R.
struct CylinderState {
    double theta = 0.0;  // phase in [0, 1)
    double y = 0.0;      // shear coordinate

    CylinderState wrapped() const { return {wrap_phase(theta), y}; }
};

// Point on the torus T^2 = [0,1)^2.
struct TorusState {
    double theta1 = 0.0;
    double theta2 = 0.0;

    TorusState wrapped() const { return {wrap_phase(theta1), wrap_phase(theta2)}; }
};

// Parameters of the kicked shear flow:
//   theta' = 1 + sigma*y,   y' = -lambda*y + forcing.
struct ShearParams {
    double sigma = 0.0;   // shear strength
    double lambda = 1.0;  // contraction rate toward y = 0; must be > 0
    double A = 0.0;       // kick amplitude
    double T = 1.0;       // kick period, or mean kick interval
};

// Kick times with exponential inter-arrival gaps (mean mean_interval) and
// amplitudes uniform on [band_lo, band_hi] * base_amplitude.
struct PoissonKickLaw {
    double mean_interval = 1.0;
    double base_amplitude = 0.0;
    double band_lo = 0.8;
    double band_hi = 1.2;
};

enum class NoiseMode { degenerate, isotropic, additive };

struct NoiseConfig {
    NoiseMode mode = NoiseMode::degenerate;
    double amplitude = 0.0;  // Brownian coefficient a
    double dt = 1e-4;        // Euler-Maruyama step

    int channels() const { return mode == NoiseMode::degenerate ? 1 : 2; }
};

// Coupled phase oscillator pair. Oscillator 1 receives the external input
// and the feedback branch of the loop; oscillator 2 sits downstream on the
// feedforward branch:
//   theta1' = nu1 + z(theta1) * (a_fb * g(theta2) + input)
//   theta2' = nu2 + z(theta2) * a_ff * g(theta1)
// With a_ff = 1 the pair 1:1 phase-locks as a_fb increases past ~1.4.
struct OscParams {
    double nu1 = 1.0;
    double nu2 = 1.1;
    double a_ff = 1.0;  // feedforward coupling, oscillator 1 -> 2
    double a_fb = 1.4;  // feedback coupling, oscillator 2 -> 1
    double pulse_halfwidth = 0.05;  // support half-width of the bump g
};

// ---------------------------------------------------------------------------
// Shear flow maps (closed form, no integration)
// ---------------------------------------------------------------------------

// Unforced time-t flow:
//   theta -> theta + t + (sigma/lambda) * y * (1 - e^{-lambda t})  (mod 1)
//   y     -> y * e^{-lambda t}
CylinderState shear_flow_map(const CylinderState& s, double t, const ShearParams& p);

// As above but on a lift: theta is not reduced mod 1.
Vec2 shear_flow_lift(const Vec2& s, double t, const ShearParams& p);

// Differential of the time-t flow; state-independent.
Mat2 shear_flow_jacobian(double t, const ShearParams& p);

struct MapResult {
    CylinderState state;
    Mat2 jacobian;
};

// Instantaneous kick y -> y + amplitude * sin(2 pi theta).
MapResult kick_map_sine(const CylinderState& s, double amplitude);

// One kick period of the kicked system: F_T = Phi_T o kick.
MapResult kicked_time_T_map(const CylinderState& s, const ShearParams& p);

struct KickEvent {
    double time;
    double amplitude;
};

// Kick schedule on [0, horizon]: strictly increasing times with exponential
// gaps, amplitudes uniform on [band_lo*A, band_hi*A].
std::vector<KickEvent> sample_kick_schedule(const PoissonKickLaw& law, double horizon,
                                            RngStream& rng);

// ---------------------------------------------------------------------------
// Ito SDE coefficient fields
// ---------------------------------------------------------------------------

// Drift, diffusion columns and their exact state derivatives at one state.
// n_channels is 1 (degenerate) or 2 (isotropic, additive).
struct SdeFields {
    Vec2 drift;
    Mat2 drift_jacobian;
    int n_channels = 0;
    std::array<Vec2, 2> columns{};
    std::array<Mat2, 2> column_jacobians{};
};

// Inline: evaluated once per Euler-Maruyama step in long runs.
inline SdeFields sde_fields(const CylinderState& s, const ShearParams& p,
                            const NoiseConfig& n) {
    SdeFields f;
    f.drift = {1.0 + p.sigma * s.y, -p.lambda * s.y};
    f.drift_jacobian = {0.0, p.sigma, 0.0, -p.lambda};

    const double a = n.amplitude;
    switch (n.mode) {
        case NoiseMode::degenerate: {
            const double mod = a * std::sin(kTwoPi * s.theta);
            const double dmod = kTwoPi * a * std::cos(kTwoPi * s.theta);
            f.n_channels = 1;
            f.columns[0] = {0.0, mod};
            f.column_jacobians[0] = {0.0, 0.0, dmod, 0.0};
            break;
        }
        case NoiseMode::isotropic: {
            const double mod = a * std::sin(kTwoPi * s.theta);
            const double dmod = kTwoPi * a * std::cos(kTwoPi * s.theta);
            f.n_channels = 2;
            f.columns[0] = {mod, 0.0};
            f.column_jacobians[0] = {dmod, 0.0, 0.0, 0.0};
            f.columns[1] = {0.0, mod};
            f.column_jacobians[1] = {0.0, 0.0, dmod, 0.0};
            break;
        }
        case NoiseMode::additive: {
            f.n_channels = 2;
            f.columns[0] = {a, 0.0};
            f.columns[1] = {0.0, a};
            // constant columns: zero derivatives
            break;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Oscillator pair
// ---------------------------------------------------------------------------

// Coupling pulse g: raised cosine on [-w, w] (mod 1), normalized to unit
// integral. With w = 1/20 this is g(theta) = 10 * (1 + cos(20 pi theta)).
double pulse_bump(double theta, double halfwidth);
double pulse_bump_deriv(double theta, double halfwidth);

// Sensitivity z(theta) = (1 - cos(2 pi theta)) / (2 pi) and its derivative.
inline double phase_sensitivity(double theta) {
    return (1.0 - std::cos(kTwoPi * theta)) / kTwoPi;
}
inline double phase_sensitivity_deriv(double theta) {
    return std::sin(kTwoPi * theta);
}

// Velocity of the (possibly forced) oscillator flow; periodic in both
// arguments, so it can be evaluated on lifts.
Vec2 osc_vector_field(const TorusState& s, const OscParams& p, double input);
inline Vec2 osc_vector_field(const Vec2& lift, const OscParams& p, double input) {
    return osc_vector_field(TorusState{lift.d1, lift.d2}, p, input);
}

// State derivative of the vector field.
Mat2 osc_field_jacobian(const TorusState& s, const OscParams& p, double input);
inline Mat2 osc_field_jacobian(const Vec2& lift, const OscParams& p, double input) {
    return osc_field_jacobian(TorusState{lift.d1, lift.d2}, p, input);
}

// Instantaneous kick of strength A acting on theta1 only: the unit-time flow
// of dtheta/du = A * z(theta), with closed form
//   cot(pi theta_new) = cot(pi theta_old) - A.
// theta = 0 is fixed for every A.
double osc_kick_phase(double theta, double A);

// d(theta_new)/d(theta_old) along the kick; equals z(theta_new)/z(theta_old).
double osc_kick_deriv(double theta, double A);

TorusState osc_kick_map(const TorusState& s, double A);

// SDE fields for the oscillator driven by white noise through input:
// one diffusion column (a * z(theta1), 0).
inline SdeFields osc_sde_fields(const TorusState& s, const OscParams& p,
                                double noise_amplitude) {
    SdeFields f;
    f.drift = osc_vector_field(s, p, 0.0);
    f.drift_jacobian = osc_field_jacobian(s, p, 0.0);
    f.n_channels = 1;
    f.columns[0] = {noise_amplitude * phase_sensitivity(s.theta1), 0.0};
    f.column_jacobians[0] = {noise_amplitude * phase_sensitivity_deriv(s.theta1), 0.0,
                             0.0, 0.0};
    return f;
}

}  // namespace shearchaos::models
