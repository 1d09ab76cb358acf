#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shearchaos/linalg.hpp"
#include "shearchaos/models.hpp"

// Largest-Lyapunov-exponent estimation by tangent-vector growth tracking,
// and the multi-run aggregation protocols used throughout the studies.

namespace shearchaos::lyapunov {

// One run's exponent estimate. `value` is per step-duration unit: per kick
// period for iterated maps, per unit time for flows and SDEs.
struct LyapEstimate {
    double value = 0.0;
    long long n_steps = 0;
    double excursion_fraction = 0.0;     // fraction of samples beyond the primary threshold
    double excursion_fraction_hi = 0.0;  // ditto for the secondary threshold, if any
    bool ever_exceeded = false;
    std::uint64_t seed = 0;
};

// Aggregate of a multi-run protocol. For the trimmed protocols, (upper,
// lower) are the max and min of the runs remaining after discarding the
// single largest and smallest estimate. All raw runs are retained.
struct ProtocolResult {
    double upper = 0.0;
    double lower = 0.0;
    std::vector<LyapEstimate> runs;
    bool flagged = false;
};

// Tangent norm left the representable range between renormalizations.
// Callers should retry with a smaller renorm_every.
class TangentRangeError : public std::runtime_error {
public:
    explicit TangentRangeError(long long step)
        : std::runtime_error("tangent norm out of range at step " + std::to_string(step)),
          step_index(step) {}
    long long step_index;
};

// Streaming |y|-threshold statistics over trajectory samples.
class ExcursionTracker {
public:
    explicit ExcursionTracker(double threshold, double threshold_hi = 0.0)
        : threshold_(threshold), threshold_hi_(threshold_hi) {}

    void add(double y) {
        const double a = std::abs(y);
        ++n_;
        if (a > threshold_) {
            ++n_over_;
            ever_ = true;
        }
        if (threshold_hi_ > 0.0 && a > threshold_hi_) ++n_over_hi_;
    }

    double fraction() const { return n_ == 0 ? 0.0 : static_cast<double>(n_over_) / n_; }
    double fraction_hi() const {
        return n_ == 0 ? 0.0 : static_cast<double>(n_over_hi_) / n_;
    }
    bool ever_exceeded() const { return ever_; }

private:
    double threshold_;
    double threshold_hi_;
    long long n_ = 0;
    long long n_over_ = 0;
    long long n_over_hi_ = 0;
    bool ever_ = false;
};

struct ExcursionStats {
    double fraction = 0.0;
    bool ever_exceeded = false;
};

// Fraction of sampled |y| values exceeding the threshold, plus the
// "ever exceeded" flag.
template <class Sampler>
ExcursionStats excursion_fraction(long long n_samples, Sampler&& y_at, double threshold) {
    ExcursionTracker tracker(threshold);
    for (long long i = 0; i < n_samples; ++i) tracker.add(y_at(i));
    return {tracker.fraction(), tracker.ever_exceeded()};
}

// Largest Lyapunov exponent of a one-step evolver acting on (state, tangent).
// The initial tangent is normalized on entry, renormalized to unit length
// every renorm_every steps, and the exponent is the mean log growth per
// step_duration. `observe` is called with the state after every step.
template <class State, class Evolver, class Observer>
LyapEstimate lyap_max(Evolver&& step, State s, Tangent2 v, long long n_steps,
                      long long renorm_every, double step_duration, Observer&& observe) {
    if (n_steps < renorm_every || renorm_every < 1) {
        throw std::invalid_argument("lyap_max: need n_steps >= renorm_every >= 1");
    }
    double nv = v.norm();
    if (!(nv > 0.0) || !std::isfinite(nv)) {
        throw std::invalid_argument("lyap_max: initial tangent must be nonzero");
    }
    v = v * (1.0 / nv);

    double log_growth = 0.0;
    long long since_renorm = 0;
    for (long long i = 0; i < n_steps; ++i) {
        step(s, v);
        observe(static_cast<const State&>(s));
        if (++since_renorm == renorm_every || i + 1 == n_steps) {
            nv = v.norm();
            if (!std::isfinite(nv) || nv < 1e-280 || nv > 1e280) {
                throw TangentRangeError(i);
            }
            log_growth += std::log(nv);
            v = v * (1.0 / nv);
            // components this far below unit length carry no information and
            // would eventually drag the arithmetic into subnormal range
            if (std::abs(v.d1) < 1e-100) v.d1 = 0.0;
            if (std::abs(v.d2) < 1e-100) v.d2 = 0.0;
            since_renorm = 0;
        }
    }

    LyapEstimate est;
    est.value = log_growth / (static_cast<double>(n_steps) * step_duration);
    est.n_steps = n_steps;
    return est;
}

template <class State, class Evolver>
LyapEstimate lyap_max(Evolver&& step, State s, Tangent2 v, long long n_steps,
                      long long renorm_every, double step_duration = 1.0) {
    return lyap_max(step, s, v, n_steps, renorm_every, step_duration,
                    [](const State&) {});
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

struct KickedProtocolOptions {
    int n_runs = 10;
    long long n_steps = 400000;
    double excursion_threshold = 0.15;
    int threads = 1;
    std::uint64_t cell_index = 0;  // folded into run seeds
};

// Study-1 protocol for the periodically kicked shear flow: n_runs independent
// initial conditions uniform on [0,1) x [-0.1, 0.1], exponents per kick
// period, trimmed aggregation. Flagged when any run's orbit ever leaves
// |y| < excursion_threshold.
ProtocolResult protocol_kicked(const models::ShearParams& p, std::uint64_t master_seed,
                               const KickedProtocolOptions& opts = {});

struct OscKickProtocolOptions {
    int n_runs = 10;
    long long n_steps = 400000;
    double rk4_dt = 1e-3;
    int threads = 1;
    std::uint64_t cell_index = 0;
};

// Same trimmed protocol for the periodically kicked oscillator pair, with
// initial conditions uniform on the torus and the flow legs integrated by
// RK4 with variational coupling. Exponents per kick period.
ProtocolResult protocol_kicked_osc(const models::OscParams& p, double A, double T,
                                   std::uint64_t master_seed,
                                   const OscKickProtocolOptions& opts = {});

struct SdeProtocolOptions {
    int n_realizations = 3;       // independent forcing realizations
    int ics_per_realization = 4;  // independent initial conditions each
    long long renorm_every = 1000;
    double threshold = 0.3;
    double threshold_hi = 0.5;
    int threads = 1;
    std::uint64_t cell_index = 0;
};

// SDE protocol: n_realizations independent Brownian paths, each shared by
// ics_per_realization independent initial conditions; the returned estimate
// averages all runs (exponent per unit time). Per-run estimates are appended
// to runs_out when given.
LyapEstimate protocol_sde(const models::ShearParams& p, const models::NoiseConfig& n,
                          double horizon, std::uint64_t master_seed,
                          const SdeProtocolOptions& opts = {},
                          std::vector<LyapEstimate>* runs_out = nullptr);

// White-noise-forced oscillator pair under the same realization/IC scheme.
LyapEstimate protocol_sde_osc(const models::OscParams& p, double noise_amplitude,
                              double em_dt, double horizon, std::uint64_t master_seed,
                              const SdeProtocolOptions& opts = {},
                              std::vector<LyapEstimate>* runs_out = nullptr);

struct PoissonProtocolOptions {
    int n_runs = 10;
    double threshold = 0.1;
    int threads = 1;
    std::uint64_t cell_index = 0;
};

// Poisson-kick protocol: n_runs independent (schedule, initial condition)
// pairs, averaged. Exponents per unit time; the excursion fraction is the
// exact fraction of time spent beyond the threshold, computed from the
// closed-form decay between kicks.
LyapEstimate protocol_poisson(const models::ShearParams& p, double horizon,
                              std::uint64_t master_seed,
                              const PoissonProtocolOptions& opts = {},
                              std::vector<LyapEstimate>* runs_out = nullptr);

}  // namespace shearchaos::lyapunov
