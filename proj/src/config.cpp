#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "shearchaos/sweep.hpp"

namespace shearchaos::sweep {

ConfigError::ConfigError(int line_number, const std::string& msg)
    : std::runtime_error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + msg
                                         : "config: " + msg),
      line(line_number) {}

const char* model_name(Model m) {
    switch (m) {
        case Model::kicked_shear: return "kicked_shear";
        case Model::poisson_shear: return "poisson_shear";
        case Model::sde_shear: return "sde_shear";
        case Model::osc_pair: return "osc_pair";
    }
    return "?";
}

int Axis::count() const {
    return static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
}

long long SweepConfig::cell_count() const {
    long long n = 1;
    for (const auto& ax : axes) n *= ax.count();
    return n;
}

std::map<std::string, double> SweepConfig::cell_params(long long idx) const {
    auto resolved = params;
    if (axes.empty()) return resolved;
    if (axes.size() == 1) {
        resolved[axes[0].name] = axes[0].value(static_cast<int>(idx));
    } else {
        const int inner = axes[1].count();
        resolved[axes[0].name] = axes[0].value(static_cast<int>(idx / inner));
        resolved[axes[1].name] = axes[1].value(static_cast<int>(idx % inner));
    }
    return resolved;
}

namespace {

const std::set<std::string> kParamNames = {"sigma", "lambda", "A",   "T",  "a",
                                           "a_ff",  "a_fb",   "nu1", "nu2"};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, "trailing characters in number '" + v + "'");
    return x;
}

long long parse_int(const std::string& v, int line) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError(line, "trailing characters in integer '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a seed (unsigned integer), got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, "trailing characters in seed '" + v + "'");
    return x;
}

// "x,y;x,y;..." -> points
std::vector<Vec2> parse_points(const std::string& v, int line) {
    std::vector<Vec2> pts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto comma = item.find(',');
        if (comma == std::string::npos)
            throw ConfigError(line, "expected 'x,y' pair, got '" + item + "'");
        pts.push_back({parse_double(trim(item.substr(0, comma)), line),
                       parse_double(trim(item.substr(comma + 1)), line)});
    }
    if (pts.empty()) throw ConfigError(line, "empty point list");
    return pts;
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> xs;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) xs.push_back(parse_double(item, line));
    }
    if (xs.empty()) throw ConfigError(line, "empty list");
    return xs;
}

Axis parse_axis(const std::string& name, const std::string& v, int line) {
    Axis ax;
    ax.name = name;
    std::stringstream ss(v);
    std::string part;
    std::vector<double> vals;
    while (std::getline(ss, part, ':')) vals.push_back(parse_double(trim(part), line));
    if (vals.size() != 3)
        throw ConfigError(line, "axis must be start:stop:step, got '" + v + "'");
    ax.start = vals[0];
    ax.stop = vals[1];
    ax.step = vals[2];
    if (ax.step <= 0.0) throw ConfigError(line, "axis step must be > 0");
    if (ax.stop < ax.start) throw ConfigError(line, "axis stop < start");
    return ax;
}

struct KeyHandlerContext {
    SweepConfig& cfg;
    bool model_set = false;
};

void handle_key(KeyHandlerContext& ctx, const std::string& key, const std::string& value,
                int line) {
    SweepConfig& cfg = ctx.cfg;

    if (key == "model") {
        if (value == "kicked_shear") cfg.model = Model::kicked_shear;
        else if (value == "poisson_shear") cfg.model = Model::poisson_shear;
        else if (value == "sde_shear") cfg.model = Model::sde_shear;
        else if (value == "osc_pair") cfg.model = Model::osc_pair;
        else throw ConfigError(line, "unknown model '" + value + "'");
        ctx.model_set = true;
        return;
    }
    if (key == "noise") {
        if (value == "degenerate") cfg.noise = models::NoiseMode::degenerate;
        else if (value == "isotropic") cfg.noise = models::NoiseMode::isotropic;
        else if (value == "additive") cfg.noise = models::NoiseMode::additive;
        else throw ConfigError(line, "unknown noise mode '" + value + "'");
        return;
    }
    if (key == "forcing") {
        if (value == "kicks") cfg.forcing = OscForcing::kicks;
        else if (value == "noise") cfg.forcing = OscForcing::noise;
        else throw ConfigError(line, "unknown forcing '" + value + "'");
        cfg.forcing_set = true;
        return;
    }
    if (key == "seed") {
        cfg.master_seed = parse_u64(value, line);
        return;
    }
    if (key == "out") {
        cfg.out_path = value;
        return;
    }
    if (key == "threads") {
        cfg.threads = static_cast<int>(parse_int(value, line));
        return;
    }
    if (kParamNames.count(key)) {
        cfg.params[key] = parse_double(value, line);
        return;
    }
    if (key.rfind("sweep.", 0) == 0) {
        const std::string name = key.substr(6);
        if (!kParamNames.count(name))
            throw ConfigError(line, "sweep axis over unknown parameter '" + name + "'");
        for (const auto& ax : cfg.axes)
            if (ax.name == name)
                throw ConfigError(line, "duplicate sweep axis '" + name + "'");
        if (cfg.axes.size() >= 2) throw ConfigError(line, "at most two sweep axes");
        cfg.axes.push_back(parse_axis(name, value, line));
        return;
    }

    // protocol settings
    if (key == "protocol.steps") { cfg.protocol.steps = parse_int(value, line); return; }
    if (key == "protocol.runs") {
        cfg.protocol.runs = static_cast<int>(parse_int(value, line));
        return;
    }
    if (key == "protocol.horizon") { cfg.protocol.horizon = parse_double(value, line); return; }
    if (key == "protocol.dt") { cfg.protocol.dt = parse_double(value, line); return; }
    if (key == "protocol.rk4_dt") { cfg.protocol.rk4_dt = parse_double(value, line); return; }
    if (key == "protocol.renorm_every") {
        cfg.protocol.renorm_every = parse_int(value, line);
        return;
    }
    if (key == "protocol.realizations") {
        cfg.protocol.realizations = static_cast<int>(parse_int(value, line));
        return;
    }
    if (key == "protocol.ics_per_realization") {
        cfg.protocol.ics_per_realization = static_cast<int>(parse_int(value, line));
        return;
    }

    // excursion settings
    if (key == "excursion.threshold") {
        cfg.excursion.threshold = parse_double(value, line);
        return;
    }
    if (key == "excursion.threshold_hi") {
        cfg.excursion.threshold_hi = parse_double(value, line);
        return;
    }
    if (key == "excursion.mode") {
        if (value == "ever") cfg.excursion.mode = ExcursionSettings::Mode::ever;
        else if (value == "fraction") cfg.excursion.mode = ExcursionSettings::Mode::fraction;
        else throw ConfigError(line, "unknown excursion mode '" + value + "'");
        return;
    }

    // foliation settings
    if (key == "foliation.x0") { cfg.foliation.region.x0 = parse_double(value, line); return; }
    if (key == "foliation.x1") { cfg.foliation.region.x1 = parse_double(value, line); return; }
    if (key == "foliation.y0") { cfg.foliation.region.y0 = parse_double(value, line); return; }
    if (key == "foliation.y1") { cfg.foliation.region.y1 = parse_double(value, line); return; }
    if (key == "foliation.grid") {
        cfg.foliation.grid = static_cast<int>(parse_int(value, line));
        return;
    }
    if (key == "foliation.t") { cfg.foliation.t = parse_double(value, line); return; }
    if (key == "foliation.arc_step") {
        cfg.foliation.arc_step = parse_double(value, line);
        return;
    }
    if (key == "foliation.max_steps") {
        cfg.foliation.max_steps = static_cast<int>(parse_int(value, line));
        return;
    }
    if (key == "foliation.seeds") {
        cfg.foliation.seeds = parse_points(value, line);
        return;
    }

    // snapshot settings
    if (key == "snapshot.times") { cfg.snapshot.times = parse_list(value, line); return; }
    if (key == "snapshot.frame") {
        if (value == "moving") cfg.snapshot.moving_frame = true;
        else if (value == "fixed") cfg.snapshot.moving_frame = false;
        else throw ConfigError(line, "snapshot frame must be 'moving' or 'fixed'");
        return;
    }
    if (key == "snapshot.kick_A") {
        cfg.snapshot.kick_amplitude = parse_double(value, line);
        return;
    }
    if (key == "snapshot.refine_tol") {
        cfg.snapshot.refine_tol = parse_double(value, line);
        return;
    }
    if (key == "snapshot.budget") {
        cfg.snapshot.vertex_budget = static_cast<std::size_t>(parse_int(value, line));
        return;
    }
    if (key == "snapshot.settle_time") {
        cfg.snapshot.settle_time = parse_double(value, line);
        return;
    }
    if (key == "snapshot.base_points") {
        cfg.snapshot.base_points = static_cast<int>(parse_int(value, line));
        return;
    }

    throw ConfigError(line, "unknown key '" + key + "'");
}

// Parameters each model accepts; anything else is rejected.
std::set<std::string> allowed_params(Model m, OscForcing forcing) {
    switch (m) {
        case Model::kicked_shear:
        case Model::poisson_shear: return {"sigma", "lambda", "A", "T"};
        case Model::sde_shear: return {"sigma", "lambda", "a"};
        case Model::osc_pair: {
            std::set<std::string> s = {"nu1", "nu2", "a_ff", "a_fb"};
            if (forcing == OscForcing::kicks) {
                s.insert("A");
                s.insert("T");
            } else {
                s.insert("a");
            }
            return s;
        }
    }
    return {};
}

std::vector<std::string> required_params(Model m, OscForcing forcing) {
    switch (m) {
        case Model::kicked_shear:
        case Model::poisson_shear: return {"sigma", "lambda", "A", "T"};
        case Model::sde_shear: return {"sigma", "lambda", "a"};
        case Model::osc_pair:
            if (forcing == OscForcing::kicks) return {"a_ff", "a_fb", "A", "T"};
            return {"a_ff", "a_fb", "a"};
    }
    return {};
}

void validate(SweepConfig& cfg, bool model_set) {
    if (!model_set) throw ConfigError(0, "missing required key 'model'");
    if (cfg.model == Model::osc_pair && !cfg.forcing_set) {
        throw ConfigError(0, "model osc_pair requires 'forcing=kicks' or 'forcing=noise'");
    }

    // oscillator frequency defaults
    if (cfg.model == Model::osc_pair) {
        cfg.params.try_emplace("nu1", 1.0);
        cfg.params.try_emplace("nu2", 1.1);
    }

    const auto allowed = allowed_params(cfg.model, cfg.forcing);
    for (const auto& [name, value] : cfg.params) {
        (void)value;
        if (!allowed.count(name)) {
            throw ConfigError(0, "parameter '" + name + "' is not used by model " +
                                     model_name(cfg.model));
        }
    }
    for (const auto& ax : cfg.axes) {
        if (!allowed.count(ax.name)) {
            throw ConfigError(0, "sweep axis '" + ax.name + "' is not a parameter of model " +
                                     model_name(cfg.model));
        }
    }
    for (const auto& name : required_params(cfg.model, cfg.forcing)) {
        const bool swept = std::any_of(cfg.axes.begin(), cfg.axes.end(),
                                       [&](const Axis& ax) { return ax.name == name; });
        if (!swept && !cfg.params.count(name)) {
            throw ConfigError(0, "missing required key '" + name + "' for model " +
                                     model_name(cfg.model));
        }
    }

    if (cfg.protocol.steps < 1) throw ConfigError(0, "protocol.steps must be >= 1");
    if (cfg.protocol.runs < 1) throw ConfigError(0, "protocol.runs must be >= 1");
    if (cfg.protocol.dt <= 0.0) throw ConfigError(0, "protocol.dt must be > 0");
    if (cfg.protocol.rk4_dt <= 0.0) throw ConfigError(0, "protocol.rk4_dt must be > 0");
    if (cfg.protocol.horizon <= 0.0) throw ConfigError(0, "protocol.horizon must be > 0");
    if (cfg.foliation.grid < 2) throw ConfigError(0, "foliation.grid must be >= 2");
}

}  // namespace

SweepConfig parse_config(const std::string& text) {
    SweepConfig cfg;
    KeyHandlerContext ctx{cfg};

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::string section;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected key=value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "empty key");
        if (!section.empty()) key = section + "." + key;
        handle_key(ctx, key, value, line);
    }

    validate(cfg, ctx.model_set);
    return cfg;
}

SweepConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace shearchaos::sweep
