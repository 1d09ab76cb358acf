#include "shearchaos/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "shearchaos/integrators.hpp"
#include "shearchaos/parallel.hpp"

namespace shearchaos::lyapunov {

namespace {

// Random unit tangent; the estimate is invariant under the choice, this just
// decorrelates runs.
Tangent2 random_direction(RngStream& rng) {
    const double ang = models::kTwoPi * rng.u01();
    return {std::cos(ang), std::sin(ang)};
}

ProtocolResult aggregate_trimmed(std::vector<LyapEstimate> runs) {
    ProtocolResult res;
    std::vector<double> vals;
    vals.reserve(runs.size());
    for (const auto& r : runs) {
        vals.push_back(r.value);
        res.flagged = res.flagged || r.ever_exceeded;
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    if (n >= 3) {
        // discard the single largest and smallest estimate
        res.lower = vals[1];
        res.upper = vals[n - 2];
    } else if (n > 0) {
        res.lower = vals.front();
        res.upper = vals.back();
    }
    res.runs = std::move(runs);
    return res;
}

// Exact time a decaying |y| exponential spends above thr during a segment of
// length dt_seg, starting from y0.
double time_above(double y0, double dt_seg, double thr, double lambda) {
    const double a = std::abs(y0);
    if (dt_seg <= 0.0 || a <= thr) return 0.0;
    return std::min(dt_seg, std::log(a / thr) / lambda);
}

// Flat run-index layout for the realization/IC protocols.
struct SdeRunId {
    int realization;
    int ic;
};

}  // namespace

ProtocolResult protocol_kicked(const models::ShearParams& p, std::uint64_t master_seed,
                               const KickedProtocolOptions& opts) {
    std::vector<LyapEstimate> runs(static_cast<std::size_t>(opts.n_runs));
    parallel_for(opts.n_runs, opts.threads, [&](long long r) {
        const std::uint64_t seed =
            derive_seed(master_seed, opts.cell_index, static_cast<std::uint64_t>(r));
        RngStream rng(seed);
        models::CylinderState s{rng.u01(), rng.uniform(-0.1, 0.1)};
        const Tangent2 v0 = random_direction(rng);

        ExcursionTracker tracker(opts.excursion_threshold);
        auto evolver = [&](models::CylinderState& st, Tangent2& tv) {
            const auto m = models::kicked_time_T_map(st, p);
            st = m.state;
            tv = m.jacobian * tv;
        };
        LyapEstimate est =
            lyap_max(evolver, s, v0, opts.n_steps, 1, 1.0,
                     [&](const models::CylinderState& st) { tracker.add(st.y); });
        est.seed = seed;
        est.excursion_fraction = tracker.fraction();
        est.ever_exceeded = tracker.ever_exceeded();
        runs[static_cast<std::size_t>(r)] = est;
    });
    return aggregate_trimmed(std::move(runs));
}

ProtocolResult protocol_kicked_osc(const models::OscParams& p, double A, double T,
                                   std::uint64_t master_seed,
                                   const OscKickProtocolOptions& opts) {
    auto field = [&p](const Vec2& x) { return models::osc_vector_field(x, p, 0.0); };
    auto jac = [&p](const Vec2& x) { return models::osc_field_jacobian(x, p, 0.0); };

    std::vector<LyapEstimate> runs(static_cast<std::size_t>(opts.n_runs));
    parallel_for(opts.n_runs, opts.threads, [&](long long r) {
        const std::uint64_t seed =
            derive_seed(master_seed, opts.cell_index, static_cast<std::uint64_t>(r));
        RngStream rng(seed);
        models::TorusState s{rng.u01(), rng.u01()};
        const Tangent2 v0 = random_direction(rng);

        auto evolver = [&](models::TorusState& st, Tangent2& tv) {
            const double th1 = models::osc_kick_phase(st.theta1, A);
            tv = Mat2{models::osc_kick_deriv(st.theta1, A), 0.0, 0.0, 1.0} * tv;
            auto [lift, vout] = integrators::rk4_flow_with_variational(
                field, jac, Vec2{th1, st.theta2}, tv, T, opts.rk4_dt);
            st = models::TorusState{lift.d1, lift.d2}.wrapped();
            tv = vout;
        };
        LyapEstimate est = lyap_max(evolver, s, v0, opts.n_steps, 1, 1.0);
        est.seed = seed;
        runs[static_cast<std::size_t>(r)] = est;
    });
    return aggregate_trimmed(std::move(runs));
}

namespace {

// Shared realization/IC scheme for the SDE protocols. run_one must return
// the per-run estimate given (noise stream, ic stream).
template <class RunFn>
LyapEstimate averaged_sde_protocol(const SdeProtocolOptions& opts, std::uint64_t master_seed,
                                   std::vector<LyapEstimate>* runs_out, RunFn&& run_one) {
    const int n_total = opts.n_realizations * opts.ics_per_realization;
    std::vector<LyapEstimate> runs(static_cast<std::size_t>(n_total));
    parallel_for(n_total, opts.threads, [&](long long idx) {
        const SdeRunId id{static_cast<int>(idx) / opts.ics_per_realization,
                          static_cast<int>(idx) % opts.ics_per_realization};
        // One Brownian path per realization, shared by all of its initial
        // conditions: the noise stream is re-seeded identically for each IC.
        const std::uint64_t forcing_seed = derive_seed(
            master_seed, opts.cell_index, 1000 + static_cast<std::uint64_t>(id.realization));
        const std::uint64_t ic_seed =
            derive_seed(master_seed, opts.cell_index,
                        2000 + 64 * static_cast<std::uint64_t>(id.realization) +
                            static_cast<std::uint64_t>(id.ic));
        RngStream noise(forcing_seed);
        RngStream ics(ic_seed);
        LyapEstimate est = run_one(noise, ics);
        est.seed = ic_seed;
        runs[static_cast<std::size_t>(idx)] = est;
    });

    LyapEstimate mean;
    for (const auto& r : runs) {
        mean.value += r.value;
        mean.excursion_fraction += r.excursion_fraction;
        mean.excursion_fraction_hi += r.excursion_fraction_hi;
        mean.n_steps = r.n_steps;
    }
    mean.value /= n_total;
    mean.excursion_fraction /= n_total;
    mean.excursion_fraction_hi /= n_total;
    mean.ever_exceeded = mean.excursion_fraction > 0.2;
    mean.seed = master_seed;
    if (runs_out) *runs_out = std::move(runs);
    return mean;
}

}  // namespace

LyapEstimate protocol_sde(const models::ShearParams& p, const models::NoiseConfig& n,
                          double horizon, std::uint64_t master_seed,
                          const SdeProtocolOptions& opts,
                          std::vector<LyapEstimate>* runs_out) {
    const long long steps = std::llround(horizon / n.dt);
    const long long renorm = std::max<long long>(1, std::min(opts.renorm_every, steps));
    return averaged_sde_protocol(
        opts, master_seed, runs_out, [&](RngStream& noise, RngStream& ics) {
            models::CylinderState s{ics.u01(), ics.uniform(-0.1, 0.1)};
            const Tangent2 v0 = random_direction(ics);
            ExcursionTracker tracker(opts.threshold, opts.threshold_hi);
            auto evolver = [&](models::CylinderState& st, Tangent2& tv) {
                auto [sn, vn] = integrators::em_step(p, n, st, tv, noise);
                st = sn;
                tv = vn;
            };
            LyapEstimate est =
                lyap_max(evolver, s, v0, steps, renorm, n.dt,
                         [&](const models::CylinderState& st) { tracker.add(st.y); });
            est.excursion_fraction = tracker.fraction();
            est.excursion_fraction_hi = tracker.fraction_hi();
            est.ever_exceeded = tracker.fraction() > 0.2;
            return est;
        });
}

LyapEstimate protocol_sde_osc(const models::OscParams& p, double noise_amplitude,
                              double em_dt, double horizon, std::uint64_t master_seed,
                              const SdeProtocolOptions& opts,
                              std::vector<LyapEstimate>* runs_out) {
    const long long steps = std::llround(horizon / em_dt);
    const long long renorm = std::max<long long>(1, std::min(opts.renorm_every, steps));
    auto fields = [&](const Vec2& x) {
        return models::osc_sde_fields(models::TorusState{x.d1, x.d2}, p, noise_amplitude);
    };
    return averaged_sde_protocol(
        opts, master_seed, runs_out, [&](RngStream& noise, RngStream& ics) {
            models::TorusState s{ics.u01(), ics.u01()};
            const Tangent2 v0 = random_direction(ics);
            auto evolver = [&](models::TorusState& st, Tangent2& tv) {
                auto [sn, vn] = integrators::em_step(fields, Vec2{st.theta1, st.theta2},
                                                     tv, em_dt, noise);
                st = models::TorusState{sn.d1, sn.d2}.wrapped();
                tv = vn;
            };
            return lyap_max(evolver, s, v0, steps, renorm, em_dt);
        });
}

LyapEstimate protocol_poisson(const models::ShearParams& p, double horizon,
                              std::uint64_t master_seed,
                              const PoissonProtocolOptions& opts,
                              std::vector<LyapEstimate>* runs_out) {
    std::vector<LyapEstimate> runs(static_cast<std::size_t>(opts.n_runs));
    parallel_for(opts.n_runs, opts.threads, [&](long long r) {
        const std::uint64_t seed = derive_seed(master_seed, opts.cell_index,
                                               3000 + static_cast<std::uint64_t>(r));
        RngStream rng(seed);
        models::CylinderState s{rng.u01(), rng.uniform(-0.1, 0.1)};
        Tangent2 v = random_direction(rng);

        const models::PoissonKickLaw law{p.T, p.A};
        const auto schedule = models::sample_kick_schedule(law, horizon, rng);

        double log_growth = 0.0;
        double over_time = 0.0;
        double t_prev = 0.0;
        for (const auto& ev : schedule) {
            const double seg = ev.time - t_prev;
            over_time += time_above(s.y, seg, opts.threshold, p.lambda);
            v = models::shear_flow_jacobian(seg, p) * v;
            s = models::shear_flow_map(s, seg, p);
            const auto kicked = models::kick_map_sine(s, ev.amplitude);
            s = kicked.state;
            v = kicked.jacobian * v;
            const double nv = v.norm();
            if (!std::isfinite(nv) || nv < 1e-280 || nv > 1e280) {
                throw TangentRangeError(static_cast<long long>(&ev - schedule.data()));
            }
            log_growth += std::log(nv);
            v = v * (1.0 / nv);
            if (std::abs(v.d1) < 1e-100) v.d1 = 0.0;
            if (std::abs(v.d2) < 1e-100) v.d2 = 0.0;
            t_prev = ev.time;
        }
        const double tail = horizon - t_prev;
        over_time += time_above(s.y, tail, opts.threshold, p.lambda);
        v = models::shear_flow_jacobian(tail, p) * v;
        log_growth += std::log(v.norm());

        LyapEstimate est;
        est.value = log_growth / horizon;  // per unit time
        est.n_steps = static_cast<long long>(schedule.size());
        est.excursion_fraction = over_time / horizon;
        est.ever_exceeded = est.excursion_fraction > 0.2;
        est.seed = seed;
        runs[static_cast<std::size_t>(r)] = est;
    });

    LyapEstimate mean;
    for (const auto& r : runs) {
        mean.value += r.value;
        mean.excursion_fraction += r.excursion_fraction;
        mean.n_steps += r.n_steps;
    }
    mean.value /= opts.n_runs;
    mean.excursion_fraction /= opts.n_runs;
    mean.n_steps /= opts.n_runs;
    mean.ever_exceeded = mean.excursion_fraction > 0.2;
    mean.seed = master_seed;
    if (runs_out) *runs_out = std::move(runs);
    return mean;
}

}  // namespace shearchaos::lyapunov
