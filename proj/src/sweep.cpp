#include "shearchaos/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>

#include "shearchaos/lyapunov.hpp"
#include "shearchaos/parallel.hpp"

namespace shearchaos::sweep {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key) {
    return params.at(key);
}

struct EffectiveExcursion {
    double threshold;
    double threshold_hi;
    bool ever_mode;
};

EffectiveExcursion effective_excursion(const SweepConfig& cfg) {
    EffectiveExcursion e{0.0, 0.0, false};
    switch (cfg.model) {
        case Model::kicked_shear: e = {0.15, 0.0, true}; break;
        case Model::poisson_shear: e = {0.1, 0.0, false}; break;
        case Model::sde_shear: e = {0.3, 0.5, false}; break;
        case Model::osc_pair: e = {0.0, 0.0, false}; break;
    }
    if (cfg.excursion.threshold >= 0.0) e.threshold = cfg.excursion.threshold;
    if (cfg.excursion.threshold_hi >= 0.0) e.threshold_hi = cfg.excursion.threshold_hi;
    if (cfg.excursion.mode == ExcursionSettings::Mode::ever) e.ever_mode = true;
    if (cfg.excursion.mode == ExcursionSettings::Mode::fraction) e.ever_mode = false;
    return e;
}

double mean_fraction(const std::vector<lyapunov::LyapEstimate>& runs) {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.excursion_fraction;
    return s / static_cast<double>(runs.size());
}

}  // namespace

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SHEARCHAOS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return default_thread_count();
}

CellDetail run_cell_detailed(const SweepConfig& cfg, long long grid_index, int threads) {
    CellDetail cell;
    SweepResultRow& row = cell.row;
    row.model = cfg.model;
    row.params = cfg.cell_params(grid_index);
    row.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(grid_index), 0);
    const auto exc = effective_excursion(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        switch (cfg.model) {
            case Model::kicked_shear: {
                const models::ShearParams p{get(row.params, "sigma"), get(row.params, "lambda"),
                                            get(row.params, "A"), get(row.params, "T")};
                lyapunov::KickedProtocolOptions opts;
                opts.n_runs = cfg.protocol.runs;
                opts.n_steps = cfg.protocol.steps;
                opts.excursion_threshold = exc.threshold;
                opts.threads = threads;
                opts.cell_index = static_cast<std::uint64_t>(grid_index);
                auto res = lyapunov::protocol_kicked(p, cfg.master_seed, opts);
                row.lyap_upper = res.upper;
                row.lyap_lower = res.lower;
                row.lyap_per_time = res.upper / p.T;
                row.excursion_fraction = mean_fraction(res.runs);
                row.excursion_flag =
                    exc.ever_mode ? res.flagged : row.excursion_fraction > 0.2;
                row.n_steps = cfg.protocol.steps;
                cell.runs = std::move(res.runs);
                break;
            }
            case Model::poisson_shear: {
                const models::ShearParams p{get(row.params, "sigma"), get(row.params, "lambda"),
                                            get(row.params, "A"), get(row.params, "T")};
                lyapunov::PoissonProtocolOptions opts;
                opts.n_runs = cfg.protocol.runs;
                opts.threshold = exc.threshold;
                opts.threads = threads;
                opts.cell_index = static_cast<std::uint64_t>(grid_index);
                const auto est = lyapunov::protocol_poisson(p, cfg.protocol.horizon,
                                                            cfg.master_seed, opts, &cell.runs);
                row.lyap_upper = est.value;
                row.lyap_lower = est.value;
                row.lyap_per_time = est.value;
                row.excursion_fraction = est.excursion_fraction;
                row.excursion_flag = est.ever_exceeded;
                row.n_steps = est.n_steps;
                break;
            }
            case Model::sde_shear: {
                const models::ShearParams p{get(row.params, "sigma"), get(row.params, "lambda"),
                                            0.0, 0.0};
                const models::NoiseConfig n{cfg.noise, get(row.params, "a"), cfg.protocol.dt};
                lyapunov::SdeProtocolOptions opts;
                opts.n_realizations = cfg.protocol.realizations;
                opts.ics_per_realization = cfg.protocol.ics_per_realization;
                opts.renorm_every = cfg.protocol.renorm_every;
                opts.threshold = exc.threshold;
                opts.threshold_hi = exc.threshold_hi;
                opts.threads = threads;
                opts.cell_index = static_cast<std::uint64_t>(grid_index);
                const auto est = lyapunov::protocol_sde(p, n, cfg.protocol.horizon,
                                                        cfg.master_seed, opts, &cell.runs);
                row.lyap_upper = est.value;
                row.lyap_lower = est.value;
                row.lyap_per_time = est.value;
                row.excursion_fraction = est.excursion_fraction;
                row.excursion_flag = est.ever_exceeded;
                row.n_steps = est.n_steps;
                break;
            }
            case Model::osc_pair: {
                models::OscParams p;
                p.nu1 = get(row.params, "nu1");
                p.nu2 = get(row.params, "nu2");
                p.a_ff = get(row.params, "a_ff");
                p.a_fb = get(row.params, "a_fb");
                if (cfg.forcing == OscForcing::kicks) {
                    lyapunov::OscKickProtocolOptions opts;
                    opts.n_runs = cfg.protocol.runs;
                    opts.n_steps = cfg.protocol.steps;
                    opts.rk4_dt = cfg.protocol.rk4_dt;
                    opts.threads = threads;
                    opts.cell_index = static_cast<std::uint64_t>(grid_index);
                    auto res = lyapunov::protocol_kicked_osc(
                        p, get(row.params, "A"), get(row.params, "T"), cfg.master_seed, opts);
                    row.lyap_upper = res.upper;
                    row.lyap_lower = res.lower;
                    row.lyap_per_time = res.upper / get(row.params, "T");
                    row.n_steps = cfg.protocol.steps;
                    cell.runs = std::move(res.runs);
                } else {
                    lyapunov::SdeProtocolOptions opts;
                    opts.n_realizations = cfg.protocol.realizations;
                    opts.ics_per_realization = cfg.protocol.ics_per_realization;
                    opts.renorm_every = cfg.protocol.renorm_every;
                    opts.threads = threads;
                    opts.cell_index = static_cast<std::uint64_t>(grid_index);
                    const auto est = lyapunov::protocol_sde_osc(
                        p, get(row.params, "a"), cfg.protocol.dt, cfg.protocol.horizon,
                        cfg.master_seed, opts, &cell.runs);
                    row.lyap_upper = est.value;
                    row.lyap_lower = est.value;
                    row.lyap_per_time = est.value;
                    row.n_steps = est.n_steps;
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

SweepResultRow run_cell(const SweepConfig& cfg, long long grid_index, int threads) {
    return run_cell_detailed(cfg, grid_index, threads).row;
}

std::vector<SweepResultRow> run_sweep(const SweepConfig& cfg) {
    const long long n_cells = cfg.cell_count();
    const int threads = resolve_threads(cfg.threads);
    // Put the parallelism where the work is: across cells for grids, inside
    // the protocol for single cells.
    const int cell_threads = n_cells >= threads ? threads : 1;
    const int proto_threads = n_cells >= threads ? 1 : threads;

    std::vector<SweepResultRow> rows(static_cast<std::size_t>(n_cells));
    parallel_for(n_cells, cell_threads, [&](long long i) {
        rows[static_cast<std::size_t>(i)] = run_cell(cfg, i, proto_threads);
    });
    return rows;
}

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* const kHeader =
    "model,sigma,lambda,A,T,a,a_ff,a_fb,nu1,nu2,lyap_upper,lyap_lower,lyap_per_time,"
    "excursion_fraction,excursion_flag,n_steps,seed";

}  // namespace

void emit_csv(const std::vector<SweepResultRow>& rows, std::ostream& os) {
    os << kHeader << '\n';
    const char* param_cols[] = {"sigma", "lambda", "A", "T", "a", "a_ff", "a_fb", "nu1", "nu2"};
    for (const auto& row : rows) {
        os << model_name(row.model);
        for (const char* col : param_cols) {
            os << ',';
            const auto it = row.params.find(col);
            if (it != row.params.end()) os << fmt9(it->second);
        }
        if (row.failed) {
            // metrics left empty; the error is reported on stderr by the caller
            os << ",,,,,,";
        } else {
            os << ',' << fmt9(row.lyap_upper) << ',' << fmt9(row.lyap_lower) << ','
               << fmt9(row.lyap_per_time) << ',' << fmt9(row.excursion_fraction) << ','
               << (row.excursion_flag ? "true" : "false") << ',' << row.n_steps;
        }
        os << ',' << row.seed << '\n';
    }
}

void emit_csv(const std::vector<SweepResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    emit_csv(rows, out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace shearchaos::sweep
