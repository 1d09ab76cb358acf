#include "shearchaos/models.hpp"

#include <cmath>
#include <stdexcept>

namespace shearchaos::models {

namespace {

// Shared core of the flow map: theta drift and y contraction over time t.
struct FlowCoeffs {
    double decay;  // e^{-lambda t}
    double gain;   // (sigma/lambda) * (1 - e^{-lambda t})
};

FlowCoeffs flow_coeffs(double t, const ShearParams& p) {
    if (!(p.lambda > 0.0)) {
        throw std::invalid_argument("ShearParams: lambda must be > 0");
    }
    const double decay = std::exp(-p.lambda * t);
    return {decay, (p.sigma / p.lambda) * (1.0 - decay)};
}

}  // namespace

CylinderState shear_flow_map(const CylinderState& s, double t, const ShearParams& p) {
    const auto c = flow_coeffs(t, p);
    return CylinderState{wrap_phase(s.theta + t + c.gain * s.y), s.y * c.decay};
}

Vec2 shear_flow_lift(const Vec2& s, double t, const ShearParams& p) {
    const auto c = flow_coeffs(t, p);
    return {s.d1 + t + c.gain * s.d2, s.d2 * c.decay};
}

Mat2 shear_flow_jacobian(double t, const ShearParams& p) {
    const auto c = flow_coeffs(t, p);
    return {1.0, c.gain, 0.0, c.decay};
}

MapResult kick_map_sine(const CylinderState& s, double amplitude) {
    const double theta = wrap_phase(s.theta);
    MapResult r;
    r.state = {theta, s.y + amplitude * std::sin(kTwoPi * theta)};
    r.jacobian = {1.0, 0.0, kTwoPi * amplitude * std::cos(kTwoPi * theta), 1.0};
    return r;
}

MapResult kicked_time_T_map(const CylinderState& s, const ShearParams& p) {
    const MapResult kicked = kick_map_sine(s, p.A);
    MapResult r;
    r.state = shear_flow_map(kicked.state, p.T, p);
    r.jacobian = shear_flow_jacobian(p.T, p) * kicked.jacobian;
    return r;
}

std::vector<KickEvent> sample_kick_schedule(const PoissonKickLaw& law, double horizon,
                                            RngStream& rng) {
    std::vector<KickEvent> events;
    if (law.mean_interval > 0.0) {
        events.reserve(static_cast<std::size_t>(horizon / law.mean_interval * 1.1) + 8);
    }
    double t = rng.exponential(law.mean_interval);
    while (t <= horizon) {
        const double amp =
            law.base_amplitude * rng.uniform(law.band_lo, law.band_hi);
        events.push_back({t, amp});
        t += rng.exponential(law.mean_interval);
    }
    return events;
}

double pulse_bump(double theta, double halfwidth) {
    // wrap the offset into [-1/2, 1/2)
    double u = theta - std::floor(theta);
    if (u >= 0.5) u -= 1.0;
    if (std::abs(u) >= halfwidth) return 0.0;
    return (1.0 + std::cos(std::numbers::pi * u / halfwidth)) / (2.0 * halfwidth);
}

double pulse_bump_deriv(double theta, double halfwidth) {
    double u = theta - std::floor(theta);
    if (u >= 0.5) u -= 1.0;
    if (std::abs(u) >= halfwidth) return 0.0;
    const double k = std::numbers::pi / halfwidth;
    return -k * std::sin(k * u) / (2.0 * halfwidth);
}

Vec2 osc_vector_field(const TorusState& s, const OscParams& p, double input) {
    const double g1 = pulse_bump(s.theta1, p.pulse_halfwidth);
    const double g2 = pulse_bump(s.theta2, p.pulse_halfwidth);
    return {p.nu1 + phase_sensitivity(s.theta1) * (p.a_fb * g2 + input),
            p.nu2 + phase_sensitivity(s.theta2) * p.a_ff * g1};
}

Mat2 osc_field_jacobian(const TorusState& s, const OscParams& p, double input) {
    const double g1 = pulse_bump(s.theta1, p.pulse_halfwidth);
    const double g2 = pulse_bump(s.theta2, p.pulse_halfwidth);
    const double dg1 = pulse_bump_deriv(s.theta1, p.pulse_halfwidth);
    const double dg2 = pulse_bump_deriv(s.theta2, p.pulse_halfwidth);
    const double z1 = phase_sensitivity(s.theta1);
    const double z2 = phase_sensitivity(s.theta2);
    const double dz1 = phase_sensitivity_deriv(s.theta1);
    const double dz2 = phase_sensitivity_deriv(s.theta2);
    return {dz1 * (p.a_fb * g2 + input), z1 * p.a_fb * dg2,
            z2 * p.a_ff * dg1, dz2 * p.a_ff * g1};
}

double osc_kick_phase(double theta, double A) {
    const double th = wrap_phase(theta);
    const double s = std::sin(std::numbers::pi * th);
    if (s == 0.0) return th;  // theta = 0 is fixed for every A
    const double cot = std::cos(std::numbers::pi * th) / s;
    // atan2(1, x) is the inverse of cot on (0, pi)
    return std::atan2(1.0, cot - A) / std::numbers::pi;
}

double osc_kick_deriv(double theta, double A) {
    const double th = wrap_phase(theta);
    if (std::sin(std::numbers::pi * th) == 0.0) return 1.0;
    const double zn = phase_sensitivity(osc_kick_phase(th, A));
    const double zo = phase_sensitivity(th);
    return zn / zo;
}

TorusState osc_kick_map(const TorusState& s, double A) {
    return {osc_kick_phase(s.theta1, A), wrap_phase(s.theta2)};
}

}  // namespace shearchaos::models
