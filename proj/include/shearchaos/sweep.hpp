#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "shearchaos/analysis.hpp"
#include "shearchaos/lyapunov.hpp"
#include "shearchaos/models.hpp"

// Sweep harness: a flat key=value config format with section headers, a
// deterministic grid runner dispatching cells to the model-appropriate
// protocol, and CSV emission.

namespace shearchaos::sweep {

enum class Model { kicked_shear, poisson_shear, sde_shear, osc_pair };
enum class OscForcing { kicks, noise };

const char* model_name(Model m);

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line_number, const std::string& msg);
    int line;
};

struct Axis {
    std::string name;
    double start = 0.0, stop = 0.0, step = 1.0;

    int count() const;
    double value(int i) const { return start + i * step; }
};

struct ProtocolSettings {
    long long steps = 400000;      // map iterates per run
    int runs = 10;                 // runs for the kicked and Poisson protocols
    double horizon = 5000.0;       // SDE / Poisson time horizon
    double dt = 1e-4;              // Euler-Maruyama step
    double rk4_dt = 1e-3;          // oscillator flow step
    long long renorm_every = 1000; // SDE renormalization stride
    int realizations = 3;
    int ics_per_realization = 4;
};

struct ExcursionSettings {
    // negative means "use the model default":
    // kicked_shear 0.15 (ever exceeded), poisson_shear 0.1 (20% of time),
    // sde_shear 0.3 and 0.5 (20% of time).
    double threshold = -1.0;
    double threshold_hi = -1.0;
    enum class Mode { model_default, ever, fraction };
    Mode mode = Mode::model_default;
};

struct FoliationSettings {
    analysis::Rect region{0.0, 1.0, 0.0, 1.0};
    int grid = 40;
    double t = 5.0;
    double arc_step = 0.005;
    int max_steps = 4000;
    std::vector<Vec2> seeds;  // empty: an interior lattice is used
};

struct SnapshotSettings {
    std::vector<double> times{0.0, 2.5, 3.5};
    bool moving_frame = true;
    double kick_amplitude = 1.5;
    double refine_tol = 0.02;
    std::size_t vertex_budget = 200000;
    double settle_time = 50.0;  // oscillator: time to land on the attractor
    int base_points = 257;
};

struct SweepConfig {
    Model model = Model::kicked_shear;
    OscForcing forcing = OscForcing::kicks;
    bool forcing_set = false;
    models::NoiseMode noise = models::NoiseMode::degenerate;

    std::map<std::string, double> params;  // fixed parameter values by name
    std::vector<Axis> axes;                // at most two swept axes

    ProtocolSettings protocol;
    ExcursionSettings excursion;
    FoliationSettings foliation;
    SnapshotSettings snapshot;

    std::uint64_t master_seed = 0;
    std::string out_path;
    int threads = 0;  // 0: SHEARCHAOS_THREADS env var, else hardware

    long long cell_count() const;
    // Fixed params with the swept axes overridden for grid cell `idx`
    // (row-major, first axis outermost).
    std::map<std::string, double> cell_params(long long idx) const;
};

// Parse the flat key=value text (with optional [section] headers).
// Unknown keys, malformed lines and invalid axes throw ConfigError.
SweepConfig parse_config(const std::string& text);
SweepConfig parse_config_file(const std::string& path);

struct SweepResultRow {
    Model model = Model::kicked_shear;
    std::map<std::string, double> params;
    double lyap_upper = 0.0;
    double lyap_lower = 0.0;
    double lyap_per_time = 0.0;
    double excursion_fraction = 0.0;
    bool excursion_flag = false;
    long long n_steps = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;
    bool failed = false;
    std::string error;
};

// Evaluate every grid cell with the model-appropriate protocol. Rows come
// back in grid order and are fully deterministic given the master seed,
// independent of the thread count. Per-cell failures are recorded in the
// row; the sweep never aborts.
std::vector<SweepResultRow> run_sweep(const SweepConfig& cfg);

// Single cell (used by the verbose `lyap` subcommand).
SweepResultRow run_cell(const SweepConfig& cfg, long long grid_index, int threads);

struct CellDetail {
    SweepResultRow row;
    std::vector<lyapunov::LyapEstimate> runs;
};

// As run_cell, but retains the raw per-run estimates.
CellDetail run_cell_detailed(const SweepConfig& cfg, long long grid_index, int threads);

void emit_csv(const std::vector<SweepResultRow>& rows, std::ostream& os);
void emit_csv(const std::vector<SweepResultRow>& rows, const std::string& path);

// threads > 0 wins; otherwise SHEARCHAOS_THREADS, otherwise hardware.
int resolve_threads(int requested);

}  // namespace shearchaos::sweep
