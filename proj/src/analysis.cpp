#include "shearchaos/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "shearchaos/integrators.hpp"
#include "shearchaos/parallel.hpp"

namespace shearchaos::analysis {

using models::kTwoPi;

// ---------------------------------------------------------------------------
// Singular limit and regime classification
// ---------------------------------------------------------------------------

CircleMapProfile::CircleMapProfile()
    : shape([](double th) { return std::sin(kTwoPi * th); }),
      shape_deriv([](double th) { return kTwoPi * std::cos(kTwoPi * th); }) {}

CircleMapProfile CircleMapProfile::sine(double drift, double gain) {
    CircleMapProfile prof;
    prof.drift = drift;
    prof.gain = gain;
    return prof;
}

double singular_limit_map(double theta, const CircleMapProfile& prof) {
    return models::wrap_phase(theta + prof.drift + prof.gain * prof.shape(theta));
}

namespace {

double map_deriv(const CircleMapProfile& prof, double theta) {
    return 1.0 + prof.gain * prof.shape_deriv(theta);
}

// Zeros of f' located by a grid scan plus bisection.
std::vector<double> critical_points(const CircleMapProfile& prof, int grid) {
    std::vector<double> zeros;
    const double h = 1.0 / grid;
    double prev = map_deriv(prof, 0.0);
    for (int i = 1; i <= grid; ++i) {
        const double th = i * h;
        const double cur = map_deriv(prof, th);
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = (i - 1) * h, hi = th;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((map_deriv(prof, mid) < 0.0) == (prev < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push_back(models::wrap_phase(0.5 * (lo + hi)));
        }
        prev = cur;
    }
    return zeros;
}

double circle_distance(double a, double b) {
    const double d = std::abs(models::wrap_phase(a) - models::wrap_phase(b));
    return std::min(d, 1.0 - d);
}

}  // namespace

double min_derivative(const CircleMapProfile& prof, const RegimeOptions& opts) {
    const double h = 1.0 / opts.grid;
    double lo = map_deriv(prof, 0.0);
    for (int i = 1; i < opts.grid; ++i) lo = std::min(lo, map_deriv(prof, i * h));
    return lo;
}

double expansion_statistic(const CircleMapProfile& prof, const RegimeOptions& opts) {
    const auto zeros = critical_points(prof, opts.grid);
    const double h = 1.0 / opts.grid;
    double sum = 0.0;
    long long count = 0;
    for (int i = 0; i < opts.grid; ++i) {
        const double th = (i + 0.5) * h;
        bool excluded = false;
        for (double z : zeros) {
            if (circle_distance(th, z) < opts.critical_radius) {
                excluded = true;
                break;
            }
        }
        if (excluded) continue;
        sum += std::log(std::abs(map_deriv(prof, th)));
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

Regime classify_regime(const CircleMapProfile& prof, double expansion_threshold,
                       const RegimeOptions& opts) {
    if (min_derivative(prof, opts) > 0.0) return Regime::invertible;
    return expansion_statistic(prof, opts) > expansion_threshold
               ? Regime::strong_expansion
               : Regime::weak_expansion;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::invertible: return "invertible";
        case Regime::weak_expansion: return "weak-expansion";
        case Regime::strong_expansion: return "strong-expansion";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Rotation number
// ---------------------------------------------------------------------------

double rotation_number(const models::OscParams& p, int n_returns,
                       const RotationOptions& opts) {
    if (n_returns < 100) {
        throw std::invalid_argument("rotation_number: need n_returns >= 100");
    }
    auto field = [&p](const Vec2& x) { return models::osc_vector_field(x, p, 0.0); };

    Vec2 x{opts.initial.theta1, opts.initial.theta2};  // lift
    double next_section = std::floor(x.d2) + 1.0;
    double theta1_at_transient = 0.0;
    double theta1_last = 0.0;
    int crossings = 0;
    // the baseline must itself sit on the section, so at least one crossing
    // is always discarded
    const int transient = std::max(1, opts.transient_returns);
    const int needed = transient + n_returns;
    double time_since_crossing = 0.0;

    while (crossings < needed) {
        const Vec2 xn = integrators::rk4_step(field, x, opts.rk4_dt);
        if (xn.d2 >= next_section) {
            // bisect the substep length to the crossing time
            double lo = 0.0, hi = opts.rk4_dt;
            while (hi - lo > opts.bisection_tol) {
                const double mid = 0.5 * (lo + hi);
                if (integrators::rk4_step(field, x, mid).d2 >= next_section) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            const Vec2 hit = integrators::rk4_step(field, x, 0.5 * (lo + hi));
            ++crossings;
            if (crossings == transient) theta1_at_transient = hit.d1;
            theta1_last = hit.d1;
            next_section += 1.0;
            time_since_crossing = 0.0;
        } else {
            time_since_crossing += opts.rk4_dt;
            if (time_since_crossing > opts.max_time_per_return) {
                throw std::runtime_error("rotation_number: orbit failed to return");
            }
        }
        x = xn;
    }
    return (theta1_last - theta1_at_transient) / static_cast<double>(n_returns);
}

// ---------------------------------------------------------------------------
// Curve evolution
// ---------------------------------------------------------------------------

namespace {

struct CurveRefiner {
    const std::function<Vec2(const Vec2&)>& flow;
    double tol;
    std::size_t budget;
    Polyline& out;
    static constexpr int kMaxDepth = 48;

    // a, b are points of the initial curve with images fa, fb; inserts the
    // images of intermediate initial points so adjacent output vertices end
    // up closer than tol.
    void refine(const Vec2& a, const Vec2& b, const Vec2& fa, const Vec2& fb, int depth) {
        if ((fb - fa).norm() <= tol) return;
        if (out.points.size() >= budget || depth >= kMaxDepth) {
            out.truncated = true;
            return;
        }
        const Vec2 m = (a + b) * 0.5;
        const Vec2 fm = flow(m);
        refine(a, m, fa, fm, depth + 1);
        if (out.points.size() >= budget) {
            out.truncated = true;
            return;
        }
        out.points.push_back(fm);
        refine(m, b, fm, fb, depth + 1);
    }
};

}  // namespace

Polyline evolve_curve(const Polyline& c, double t,
                      const std::function<Vec2(const Vec2&)>& lift_flow, double refine_tol,
                      std::size_t vertex_budget) {
    if (refine_tol <= 0.0) throw std::invalid_argument("evolve_curve: refine_tol must be > 0");
    Polyline out;
    out.timestamp = c.timestamp + t;
    out.id = c.id;
    if (c.points.empty()) return out;

    CurveRefiner refiner{lift_flow, refine_tol, vertex_budget, out};
    Vec2 prev = c.points.front();
    Vec2 fprev = lift_flow(prev);
    out.points.push_back(fprev);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const Vec2 cur = c.points[i];
        const Vec2 fcur = lift_flow(cur);
        refiner.refine(prev, cur, fprev, fcur, 0);
        out.points.push_back(fcur);
        prev = cur;
        fprev = fcur;
    }
    return out;
}

Polyline evolve_curve(const Polyline& c, double t, const models::OscParams& p,
                      double refine_tol, std::size_t vertex_budget, double rk4_dt) {
    auto field = [&p](const Vec2& x) { return models::osc_vector_field(x, p, 0.0); };
    return evolve_curve(
        c, t, [&](const Vec2& z) { return integrators::rk4_flow(field, z, t, rk4_dt); },
        refine_tol, vertex_budget);
}

Polyline evolve_curve(const Polyline& c, double t, const models::ShearParams& p,
                      double refine_tol, std::size_t vertex_budget) {
    return evolve_curve(
        c, t, [&](const Vec2& z) { return models::shear_flow_lift(z, t, p); }, refine_tol,
        vertex_budget);
}

// ---------------------------------------------------------------------------
// Most contracted direction and foliations
// ---------------------------------------------------------------------------

ContractionDirection most_contracted_direction(const Mat2& J) {
    // eigen-decomposition of the Gram matrix J^T J
    const double a = J.a11 * J.a11 + J.a21 * J.a21;
    const double b = J.a11 * J.a12 + J.a21 * J.a22;
    const double c = J.a12 * J.a12 + J.a22 * J.a22;
    const double disc = std::sqrt(std::max(0.0, (a - c) * (a - c) + 4.0 * b * b));
    const double mu_min = 0.5 * (a + c - disc);
    const double mu_max = 0.5 * (a + c + disc);

    Vec2 v{b, mu_min - a};
    const Vec2 alt{mu_min - c, b};
    if (alt.norm() > v.norm()) v = alt;
    if (v.norm() == 0.0) v = {1.0, 0.0};  // isotropic Gram matrix
    v = v * (1.0 / v.norm());
    if (v.d2 < 0.0 || (v.d2 == 0.0 && v.d1 < 0.0)) v = v * -1.0;

    ContractionDirection out;
    out.direction = v;
    const double s_min = std::sqrt(std::max(mu_min, 0.0));
    const double s_max = std::sqrt(mu_max);
    out.singular_ratio =
        s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();
    out.degenerate = out.singular_ratio < 1.0 + 1e-6;
    return out;
}

FoliationField foliation_field(const Rect& region, double t, const JacobianProvider& jac,
                               int nx, int ny, int threads) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("foliation_field: grid must be >= 2x2");
    FoliationField field;
    field.region = region;
    field.nx = nx;
    field.ny = ny;
    field.horizon = t;
    field.nodes.resize(static_cast<std::size_t>(nx) * ny);
    const double hx = (region.x1 - region.x0) / (nx - 1);
    const double hy = (region.y1 - region.y0) / (ny - 1);
    parallel_for(static_cast<long long>(nx) * ny, threads, [&](long long idx) {
        const int j = static_cast<int>(idx / nx);
        const int i = static_cast<int>(idx % nx);
        const Vec2 z{region.x0 + i * hx, region.y0 + j * hy};
        const auto cd = most_contracted_direction(jac(z));
        field.nodes[static_cast<std::size_t>(idx)] = {z, cd.direction, cd.singular_ratio,
                                                      cd.degenerate};
    });
    return field;
}

namespace {

// Midpoint step along the line field with sign continuity against `along`.
bool field_step(const JacobianProvider& jac, const Vec2& z, Vec2& along, Vec2& out,
                double h) {
    auto cd1 = most_contracted_direction(jac(z));
    if (cd1.degenerate) return false;
    Vec2 d1 = cd1.direction;
    if (d1.dot(along) < 0.0) d1 = d1 * -1.0;
    const auto cd2 = most_contracted_direction(jac(z + d1 * (0.5 * h)));
    if (cd2.degenerate) return false;
    Vec2 d2 = cd2.direction;
    if (d2.dot(d1) < 0.0) d2 = d2 * -1.0;
    out = z + d2 * h;
    along = d2;
    return true;
}

}  // namespace

std::vector<Polyline> trace_foliation_curves(const Rect& region, const JacobianProvider& jac,
                                             std::span<const Vec2> seeds,
                                             const TraceOptions& opts) {
    std::vector<Polyline> leaves;
    leaves.reserve(seeds.size());
    int id = 0;
    for (const Vec2& seed : seeds) {
        Polyline leaf;
        leaf.id = id++;
        const auto cd = most_contracted_direction(jac(seed));
        if (cd.degenerate) {
            leaf.points.push_back(seed);
            leaf.degenerate_end = true;
            leaves.push_back(std::move(leaf));
            continue;
        }

        auto trace_side = [&](Vec2 dir) {
            std::vector<Vec2> pts;
            Vec2 z = seed;
            Vec2 along = dir;
            for (int k = 0; k < opts.max_steps; ++k) {
                Vec2 zn;
                if (!field_step(jac, z, along, zn, opts.arc_step)) {
                    leaf.degenerate_end = true;
                    break;
                }
                if (!region.contains(zn)) break;
                pts.push_back(zn);
                z = zn;
            }
            return pts;
        };

        auto back = trace_side(cd.direction * -1.0);
        auto fwd = trace_side(cd.direction);
        leaf.points.reserve(back.size() + fwd.size() + 1);
        leaf.points.insert(leaf.points.end(), back.rbegin(), back.rend());
        leaf.points.push_back(seed);
        leaf.points.insert(leaf.points.end(), fwd.begin(), fwd.end());
        leaves.push_back(std::move(leaf));
    }
    return leaves;
}

FoliationResult trace_stable_foliation(const Rect& region, double t,
                                       const models::OscParams& p, int grid,
                                       std::span<const Vec2> seeds, const TraceOptions& opts,
                                       double rk4_dt, int threads) {
    auto field = [&p](const Vec2& x) { return models::osc_vector_field(x, p, 0.0); };
    auto fjac = [&p](const Vec2& x) { return models::osc_field_jacobian(x, p, 0.0); };
    JacobianProvider jac = [&, t, rk4_dt](const Vec2& z) {
        return integrators::rk4_flow_with_variational(field, fjac, z, Mat2::identity(), t,
                                                      rk4_dt)
            .second;
    };
    FoliationResult res;
    res.field = foliation_field(region, t, jac, grid, grid, threads);
    res.leaves = trace_foliation_curves(region, jac, seeds, opts);
    return res;
}

FoliationResult trace_stable_foliation_shear(const Rect& region, double t,
                                             const models::ShearParams& p, int grid,
                                             std::span<const Vec2> seeds,
                                             const TraceOptions& opts) {
    const Mat2 J = models::shear_flow_jacobian(t, p);
    JacobianProvider jac = [J](const Vec2&) { return J; };
    FoliationResult res;
    res.field = foliation_field(region, t, jac, grid, grid);
    res.leaves = trace_foliation_curves(region, jac, seeds, opts);
    return res;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void put_number(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    os << buf;
}

}  // namespace

void write_polylines(std::ostream& os, std::span<const Polyline> curves) {
    os << "# x y curve_id flags\n";
    os << "# flags bit 0: truncated (vertex budget), bit 1: degenerate end\n";
    for (const auto& c : curves) {
        const int flags = (c.truncated ? 1 : 0) | (c.degenerate_end ? 2 : 0);
        os << "# curve " << c.id << " t=" << c.timestamp << " points=" << c.points.size()
           << "\n";
        for (const auto& pt : c.points) {
            put_number(os, pt.d1);
            os << ' ';
            put_number(os, pt.d2);
            os << ' ' << c.id << ' ' << flags << '\n';
        }
        os << '\n';
    }
}

void write_foliation_field(std::ostream& os, const FoliationField& field) {
    os << "# x y dir_x dir_y singular_ratio degenerate\n";
    os << "# horizon t=" << field.horizon << " grid=" << field.nx << "x" << field.ny << "\n";
    for (const auto& n : field.nodes) {
        put_number(os, n.pos.d1);
        os << ' ';
        put_number(os, n.pos.d2);
        os << ' ';
        put_number(os, n.direction.d1);
        os << ' ';
        put_number(os, n.direction.d2);
        os << ' ';
        put_number(os, n.singular_ratio);
        os << ' ' << (n.degenerate ? 1 : 0) << '\n';
    }
}

}  // namespace shearchaos::analysis
