// Command-line front end: parameter sweeps, single-cell Lyapunov runs,
// stable-foliation traces, kicked-curve snapshots and singular-limit
// regime classification.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "shearchaos/analysis.hpp"
#include "shearchaos/integrators.hpp"
#include "shearchaos/sweep.hpp"

namespace sc = shearchaos;
using sc::Vec2;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_config = true) {
    if (with_config) {
        cmd->add_option("config", opts.config_path, "config file (key=value text)")
            ->required()
            ->check(CLI::ExistingFile);
    }
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--out", opts.out, "output path (default: config 'out' or stdout)");
    cmd->add_option("--threads", opts.threads,
                    "worker threads (default: SHEARCHAOS_THREADS or hardware)");
}

sc::sweep::SweepConfig load_config(const CommonOpts& opts) {
    auto cfg = sc::sweep::parse_config_file(opts.config_path);
    if (opts.seed) cfg.master_seed = *opts.seed;
    if (!opts.out.empty()) cfg.out_path = opts.out;
    if (opts.threads > 0) cfg.threads = opts.threads;
    return cfg;
}

// Write to the configured path, or stdout when none is set.
void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_sweep(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    const auto rows = sc::sweep::run_sweep(cfg);

    std::ostringstream csv;
    sc::sweep::emit_csv(rows, csv);
    write_output(cfg.out_path, csv.str());

    int n_failed = 0;
    for (const auto& row : rows) {
        if (row.failed) {
            ++n_failed;
            std::cerr << "cell failed: " << row.error << "\n";
        }
    }
    std::cerr << "sweep: " << rows.size() << " cells, " << n_failed << " failed";
    if (!cfg.out_path.empty()) std::cerr << ", wrote " << cfg.out_path;
    std::cerr << "\n";
    return n_failed == 0 ? 0 : 2;
}

int cmd_lyap(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    if (cfg.cell_count() != 1) {
        std::cerr << "lyap: config has sweep axes (" << cfg.cell_count()
                  << " cells); use the sweep subcommand for grids\n";
        return 1;
    }
    const auto cell =
        sc::sweep::run_cell_detailed(cfg, 0, sc::sweep::resolve_threads(cfg.threads));

    std::ostringstream log;
    log << "model " << sc::sweep::model_name(cfg.model) << ", master seed "
        << cfg.master_seed << "\n";
    for (const auto& [name, value] : cell.row.params) {
        log << "  " << name << " = " << value << "\n";
    }
    if (cell.row.failed) {
        log << "FAILED: " << cell.row.error << "\n";
    } else {
        log << "runs:\n";
        for (std::size_t i = 0; i < cell.runs.size(); ++i) {
            const auto& r = cell.runs[i];
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "  run %2zu  seed %20llu  lyap % .6e  excursion %.4f%s\n", i,
                          static_cast<unsigned long long>(r.seed), r.value,
                          r.excursion_fraction, r.ever_exceeded ? "  [flag]" : "");
            log << buf;
        }
        log << "aggregate: upper " << cell.row.lyap_upper << ", lower "
            << cell.row.lyap_lower << ", per unit time " << cell.row.lyap_per_time
            << "\nexcursion fraction " << cell.row.excursion_fraction << ", flag "
            << (cell.row.excursion_flag ? "true" : "false") << ", steps per run "
            << cell.row.n_steps << "\n";
    }
    write_output(cfg.out_path, log.str());
    return cell.row.failed ? 2 : 0;
}

std::vector<Vec2> default_foliation_seeds(const sc::analysis::Rect& r, int n = 7) {
    std::vector<Vec2> seeds;
    for (int i = 1; i <= n; ++i) {
        const double fx = static_cast<double>(i) / (n + 1);
        seeds.push_back({r.x0 + fx * (r.x1 - r.x0), r.y0 + fx * (r.y1 - r.y0)});
        seeds.push_back({r.x0 + fx * (r.x1 - r.x0), r.y0 + (1.0 - fx) * (r.y1 - r.y0)});
    }
    return seeds;
}

int cmd_foliation(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    const auto params = cfg.cell_params(0);  // axes, if any, pin their start value
    const auto& fol = cfg.foliation;
    auto seeds = fol.seeds.empty() ? default_foliation_seeds(fol.region) : fol.seeds;
    sc::analysis::TraceOptions trace;
    trace.arc_step = fol.arc_step;
    trace.max_steps = fol.max_steps;

    sc::analysis::FoliationResult result;
    if (cfg.model == sc::sweep::Model::osc_pair) {
        sc::models::OscParams p;
        p.nu1 = params.at("nu1");
        p.nu2 = params.at("nu2");
        p.a_ff = params.at("a_ff");
        p.a_fb = params.at("a_fb");
        result = sc::analysis::trace_stable_foliation(
            fol.region, fol.t, p, fol.grid, seeds, trace, cfg.protocol.rk4_dt,
            sc::sweep::resolve_threads(cfg.threads));
    } else {
        const sc::models::ShearParams p{params.at("sigma"), params.at("lambda"), 0.0, 0.0};
        result =
            sc::analysis::trace_stable_foliation_shear(fol.region, fol.t, p, fol.grid, seeds, trace);
    }

    std::ostringstream leaves;
    leaves << "# stable-foliation leaves, model " << sc::sweep::model_name(cfg.model)
           << ", t=" << fol.t << "\n";
    sc::analysis::write_polylines(leaves, result.leaves);
    write_output(cfg.out_path, leaves.str());

    // the direction field goes next to the leaves table
    if (!cfg.out_path.empty()) {
        std::ofstream field_out(cfg.out_path + ".field");
        if (!field_out)
            throw std::runtime_error("cannot open output file: " + cfg.out_path + ".field");
        sc::analysis::write_foliation_field(field_out, result.field);
        std::cerr << "foliation: " << result.leaves.size() << " leaves, wrote "
                  << cfg.out_path << " and " << cfg.out_path << ".field\n";
    } else {
        std::cout << "\n";
        sc::analysis::write_foliation_field(std::cout, result.field);
    }
    return 0;
}

// Record one lap of the (settled) oscillator orbit as a lifted polyline:
// theta2 runs through one unit.
sc::analysis::Polyline osc_orbit_lap(const sc::models::OscParams& p, double settle_time,
                                     int n_points, double dt) {
    auto field = [&p](const Vec2& x) { return sc::models::osc_vector_field(x, p, 0.0); };
    Vec2 x = sc::integrators::rk4_flow(field, Vec2{0.25, 0.0}, settle_time, dt);
    x = {sc::models::wrap_phase(x.d1), sc::models::wrap_phase(x.d2)};

    sc::analysis::Polyline lap;
    lap.points.push_back(x);
    const double target = x.d2 + 1.0;
    const double frac = 1.0 / n_points;
    double next_record = x.d2 + frac;
    while (x.d2 < target) {
        x = sc::integrators::rk4_step(field, x, dt);
        if (x.d2 >= next_record) {
            lap.points.push_back(x);
            next_record += frac;
        }
    }
    return lap;
}

int cmd_snapshot(const CommonOpts& opts) {
    const auto cfg = load_config(opts);
    const auto params = cfg.cell_params(0);
    const auto& snap = cfg.snapshot;

    sc::analysis::Polyline base;
    std::function<Vec2(const Vec2&, double)> flow;
    std::function<sc::analysis::Polyline(const sc::analysis::Polyline&)> kick;

    if (cfg.model == sc::sweep::Model::osc_pair) {
        sc::models::OscParams p;
        p.nu1 = params.at("nu1");
        p.nu2 = params.at("nu2");
        p.a_ff = params.at("a_ff");
        p.a_fb = params.at("a_fb");
        base = osc_orbit_lap(p, snap.settle_time, snap.base_points, cfg.protocol.rk4_dt);
        auto field = [p](const Vec2& x) { return sc::models::osc_vector_field(x, p, 0.0); };
        const double dt = cfg.protocol.rk4_dt;
        flow = [field, dt](const Vec2& z, double t) {
            return sc::integrators::rk4_flow(field, z, t, dt);
        };
        const double A = snap.kick_amplitude;
        kick = [A](const sc::analysis::Polyline& c) {
            sc::analysis::Polyline out = c;
            for (auto& pt : out.points) {
                // kick acts on theta1; stay on the lift
                pt.d1 = std::floor(pt.d1) +
                        sc::models::osc_kick_phase(pt.d1 - std::floor(pt.d1), A);
            }
            return out;
        };
    } else {
        const sc::models::ShearParams p{params.at("sigma"), params.at("lambda"), 0.0, 0.0};
        // the limit cycle y = 0, one full lap in theta
        for (int i = 0; i <= snap.base_points; ++i) {
            base.points.push_back({static_cast<double>(i) / snap.base_points, 0.0});
        }
        flow = [p](const Vec2& z, double t) { return sc::models::shear_flow_lift(z, t, p); };
        const double A = snap.kick_amplitude;
        kick = [A](const sc::analysis::Polyline& c) {
            sc::analysis::Polyline out = c;
            for (auto& pt : out.points) {
                pt.d2 += A * std::sin(sc::models::kTwoPi * pt.d1);
            }
            return out;
        };
    }

    const sc::analysis::Polyline kicked = kick(base);
    const Vec2 ref = base.points.front();

    std::ostringstream os;
    os << "# kicked-curve snapshots, model " << sc::sweep::model_name(cfg.model)
       << ", kick A=" << snap.kick_amplitude << "\n";
    os << "# frame: " << (snap.moving_frame ? "moving" : "fixed")
       << "; moving frame subtracts the displacement of the reference point (" << ref.d1
       << ", " << ref.d2 << ")\n";
    os << "# curve ids: 2k = unkicked at times[k], 2k+1 = kicked at times[k]\n";

    std::vector<sc::analysis::Polyline> curves;
    for (std::size_t k = 0; k < snap.times.size(); ++k) {
        const double t = snap.times[k];
        auto flow_t = [&](const Vec2& z) { return flow(z, t); };
        sc::analysis::Polyline blue =
            sc::analysis::evolve_curve(base, t, flow_t, snap.refine_tol, snap.vertex_budget);
        sc::analysis::Polyline red =
            sc::analysis::evolve_curve(kicked, t, flow_t, snap.refine_tol, snap.vertex_budget);
        blue.timestamp = red.timestamp = t;
        if (snap.moving_frame) {
            const Vec2 offset = flow(ref, t) - ref;
            for (auto& pt : blue.points) pt = pt - offset;
            for (auto& pt : red.points) pt = pt - offset;
        }
        blue.id = static_cast<int>(2 * k);
        red.id = static_cast<int>(2 * k + 1);
        curves.push_back(std::move(blue));
        curves.push_back(std::move(red));
    }
    sc::analysis::write_polylines(os, curves);
    write_output(cfg.out_path, os.str());
    return 0;
}

int cmd_regime(double gain, double drift, double threshold, double radius,
               const std::string& out) {
    sc::analysis::RegimeOptions opts;
    opts.critical_radius = radius;
    const auto prof = sc::analysis::CircleMapProfile::sine(drift, gain);
    const auto regime = sc::analysis::classify_regime(prof, threshold, opts);

    std::ostringstream os;
    os << "gain " << gain << " (injectivity boundary at 1/(2*pi) = "
       << 1.0 / sc::models::kTwoPi << ")\n";
    os << "min f' = " << sc::analysis::min_derivative(prof, opts) << "\n";
    if (regime != sc::analysis::Regime::invertible) {
        os << "expansion statistic = " << sc::analysis::expansion_statistic(prof, opts)
           << " (threshold " << threshold << ", critical radius " << radius << ")\n";
    }
    os << "regime: " << sc::analysis::regime_name(regime) << "\n";
    write_output(out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shearchaos: Lyapunov-exponent studies of forced shear flows and "
                 "coupled oscillators"};
    app.require_subcommand(1);

    CommonOpts sweep_opts, lyap_opts, fol_opts, snap_opts;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "run a parameter sweep and emit a CSV table");
    add_common(sweep_cmd, sweep_opts);
    auto* lyap_cmd =
        app.add_subcommand("lyap", "run a single cell with a verbose per-run log");
    add_common(lyap_cmd, lyap_opts);
    auto* fol_cmd = app.add_subcommand(
        "foliation", "trace the finite-time stable foliation (text tables)");
    add_common(fol_cmd, fol_opts);
    auto* snap_cmd = app.add_subcommand(
        "snapshot", "evolve a curve and its kicked image at listed times");
    add_common(snap_cmd, snap_opts);

    double regime_gain = 0.0, regime_drift = 0.0, regime_threshold = 0.5,
           regime_radius = 0.05;
    CommonOpts regime_opts;
    auto* regime_cmd = app.add_subcommand(
        "regime", "classify the singular-limit circle map at the given gain");
    regime_cmd->add_option("gain", regime_gain, "gain (sigma/lambda)*A of f_a")->required();
    regime_cmd->add_option("--drift", regime_drift, "phase offset a (irrelevant to regime)");
    regime_cmd->add_option("--threshold", regime_threshold,
                           "weak/strong expansion threshold (default 0.5)");
    regime_cmd->add_option("--critical-radius", regime_radius,
                           "exclusion radius around critical points (default 0.05)");
    add_common(regime_cmd, regime_opts, /*with_config=*/false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
        if (lyap_cmd->parsed()) return cmd_lyap(lyap_opts);
        if (fol_cmd->parsed()) return cmd_foliation(fol_opts);
        if (snap_cmd->parsed()) return cmd_snapshot(snap_opts);
        if (regime_cmd->parsed())
            return cmd_regime(regime_gain, regime_drift, regime_threshold, regime_radius,
                              regime_opts.out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
