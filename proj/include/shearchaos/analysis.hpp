#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "shearchaos/linalg.hpp"
#include "shearchaos/models.hpp"

// Geometric diagnostics: singular-limit circle maps and their regime
// classification, rotation numbers of the oscillator pair, kicked-curve
// evolution for folding snapshots, and finite-time stable foliations.

namespace shearchaos::analysis {

// ---------------------------------------------------------------------------
// Singular-limit circle map  f_a(theta) = theta + a + gain * H(theta)  (mod 1)
// ---------------------------------------------------------------------------

struct CircleMapProfile {
    double drift = 0.0;  // phase offset a
    double gain = 0.0;   // (sigma/lambda) * A
    std::function<double(double)> shape;        // forcing shape H
    std::function<double(double)> shape_deriv;  // H'

    CircleMapProfile();  // defaults to H = sin(2 pi theta)
    static CircleMapProfile sine(double drift, double gain);
};

double singular_limit_map(double theta, const CircleMapProfile& prof);

enum class Regime { invertible, weak_expansion, strong_expansion };

struct RegimeOptions {
    double critical_radius = 0.05;  // phase-units exclusion around critical points
    int grid = 1 << 18;             // sampling resolution
};

// min over theta of f_a'(theta); injectivity boundary is where this hits 0.
double min_derivative(const CircleMapProfile& prof, const RegimeOptions& opts = {});

// Mean of log|f_a'| over the circle minus critical_radius-neighborhoods of
// the critical points of f_a.
double expansion_statistic(const CircleMapProfile& prof, const RegimeOptions& opts = {});

// invertible iff min f' > 0; otherwise weak vs. strong expansion by whether
// expansion_statistic exceeds the threshold.
Regime classify_regime(const CircleMapProfile& prof, double expansion_threshold = 0.5,
                       const RegimeOptions& opts = {});

const char* regime_name(Regime r);

// ---------------------------------------------------------------------------
// Rotation number of the unforced oscillator pair
// ---------------------------------------------------------------------------

struct RotationOptions {
    double rk4_dt = 1e-3;
    int transient_returns = 100;  // returns discarded before averaging
    double bisection_tol = 1e-10;
    double max_time_per_return = 1e3;  // guard against a non-returning orbit
    models::TorusState initial{0.25, 0.0};
};

// Average theta1 lift advance per return of the flow to the cross-section
// {theta2 = 0}, over n_returns returns after the transient.
double rotation_number(const models::OscParams& p, int n_returns,
                       const RotationOptions& opts = {});

// ---------------------------------------------------------------------------
// Curve evolution (lifted polylines)
// ---------------------------------------------------------------------------

struct Polyline {
    std::vector<Vec2> points;  // lifted coordinates, not reduced mod 1
    double timestamp = 0.0;
    bool truncated = false;       // vertex budget hit during refinement
    bool degenerate_end = false;  // foliation trace stopped at a degenerate node
    int id = 0;
};

// Flow every vertex for time t under the given lift flow map, inserting
// midpoints (flowed from refined initial data) wherever adjacent images
// separate beyond refine_tol. Truncates when the vertex budget is hit.
Polyline evolve_curve(const Polyline& c, double t,
                      const std::function<Vec2(const Vec2&)>& lift_flow, double refine_tol,
                      std::size_t vertex_budget = 200000);

// The oscillator flow (RK4 on the lift) and the shear flow (closed form).
Polyline evolve_curve(const Polyline& c, double t, const models::OscParams& p,
                      double refine_tol, std::size_t vertex_budget = 200000,
                      double rk4_dt = 1e-3);
Polyline evolve_curve(const Polyline& c, double t, const models::ShearParams& p,
                      double refine_tol, std::size_t vertex_budget = 200000);

// ---------------------------------------------------------------------------
// Finite-time stable directions and foliations
// ---------------------------------------------------------------------------

struct ContractionDirection {
    Tangent2 direction;    // unit; sign-normalized to d2 >= 0 (d1 >= 0 on the axis)
    double singular_ratio; // larger / smaller singular value
    bool degenerate;       // singular values equal within 1e-6 relative
};

// Right singular vector of the smaller singular value of J:
// ||J v|| <= ||J u|| for every unit u.
ContractionDirection most_contracted_direction(const Mat2& J);

struct Rect {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;
    bool contains(const Vec2& z) const {
        return z.d1 >= x0 && z.d1 <= x1 && z.d2 >= y0 && z.d2 <= y1;
    }
};

struct FoliationNode {
    Vec2 pos;
    Tangent2 direction;
    double singular_ratio = 0.0;
    bool degenerate = false;
};

struct FoliationField {
    Rect region;
    int nx = 0, ny = 0;
    double horizon = 0.0;
    std::vector<FoliationNode> nodes;  // row-major, x fastest
};

// Jacobian of the time-t flow at a point (lift coordinates).
using JacobianProvider = std::function<Mat2(const Vec2&)>;

FoliationField foliation_field(const Rect& region, double t, const JacobianProvider& jac,
                               int nx, int ny, int threads = 1);

struct TraceOptions {
    double arc_step = 0.005;
    int max_steps = 4000;  // per direction from the seed
};

// Integrate leaves of the most-contracted line field through the seed
// points with a fixed arclength step, disambiguating the sign by continuity
// along each curve. A leaf stops at the region boundary, at a degenerate
// node (flagged), or at the step limit.
std::vector<Polyline> trace_foliation_curves(const Rect& region, const JacobianProvider& jac,
                                             std::span<const Vec2> seeds,
                                             const TraceOptions& opts = {});

struct FoliationResult {
    FoliationField field;
    std::vector<Polyline> leaves;
};

// Oscillator-pair foliation: DPhi_t by RK4 with variational coupling.
FoliationResult trace_stable_foliation(const Rect& region, double t,
                                       const models::OscParams& p, int grid,
                                       std::span<const Vec2> seeds,
                                       const TraceOptions& opts = {}, double rk4_dt = 1e-3,
                                       int threads = 1);

// Unforced shear flow as a 2-D system on the cylinder (closed-form Jacobian).
FoliationResult trace_stable_foliation_shear(const Rect& region, double t,
                                             const models::ShearParams& p, int grid,
                                             std::span<const Vec2> seeds,
                                             const TraceOptions& opts = {});

// Plain-text tables, one point per line: x, y, curve-id, flags.
void write_polylines(std::ostream& os, std::span<const Polyline> curves);
void write_foliation_field(std::ostream& os, const FoliationField& field);

}  // namespace shearchaos::analysis
