#include "hsv/harness.hpp"

#include "hsv/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace hsv {

using nlohmann::ordered_json;

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("config: key '" + key + "' expects a real number, got '" + v + "'");
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config: key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + shortest(v[i]);
    return s;
}

struct Key {
    std::string name;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define HSV_REAL(NAME, FIELD)                                                                 \
    Key{NAME, [](const ExperimentConfig& c) { return shortest(c.FIELD); },                    \
        [](ExperimentConfig& c, const std::string& v) { c.FIELD = parse_double(NAME, v); }}
#define HSV_INT(NAME, FIELD)                                                                  \
    Key{NAME, [](const ExperimentConfig& c) { return std::to_string(c.FIELD); },              \
        [](ExperimentConfig& c, const std::string& v) { c.FIELD = parse_int(NAME, v); }}

const std::vector<Key>& keys() {
    static const std::vector<Key> k{
        Key{"preset", [](const ExperimentConfig& c) { return c.preset; },
            [](ExperimentConfig& c, const std::string& v) { c.preset = v; }},
        HSV_REAL("amplitude", amplitude),
        HSV_INT("K", K),
        HSV_INT("Nz", Nz),
        HSV_REAL("Z_max", Z_max),
        HSV_REAL("c_grade", c_grade),
        HSV_REAL("nu", phys.nu),
        HSV_REAL("mu0", phys.mu0),
        HSV_REAL("gamma", phys.gamma),
        HSV_REAL("eps0", phys.eps0),
        HSV_REAL("a", phys.a),
        HSV_REAL("theta0", phys.theta0),
        HSV_REAL("dt", step.dt),
        HSV_REAL("picard_tol", step.picard_tol),
        HSV_INT("picard_max", step.picard_max),
        HSV_INT("s_substeps", step.s_substeps),
        HSV_REAL("tol_div", step.tol_div),
        HSV_INT("snapshot_every", step.snapshot_every),
        HSV_REAL("noslip_tol", step.noslip_tol),
        HSV_REAL("tail_tol", step.tail_tol),
        Key{"nu_list", [](const ExperimentConfig& c) { return list_text(c.nu_list); },
            [](ExperimentConfig& c, const std::string& v) { c.nu_list = parse_list("nu_list", v); }},
        HSV_REAL("T", T),
        HSV_REAL("kato_c", kato_c),
        HSV_INT("mu_samples", mu_samples),
        HSV_REAL("ratio_bound", ratio_bound),
        HSV_INT("fit_points", fit_points),
        Key{"norm_tracking", [](const ExperimentConfig& c) { return std::string(c.norm_tracking ? "true" : "false"); },
            [](ExperimentConfig& c, const std::string& v) { c.norm_tracking = parse_bool("norm_tracking", v); }},
        HSV_REAL("kernel_t", kernel_t),
        HSV_REAL("kernel_xi", kernel_xi),
    };
    return k;
}

#undef HSV_REAL
#undef HSV_INT

NormParams norm_params(const ExperimentConfig& cfg, double gamma) {
    NormParams p = norm_params_from(cfg.phys, cfg.mu_samples);
    p.gamma = gamma;
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
    try {
        phys.validate();
        step.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const auto& names = preset_names();
    if (std::ranges::find(names, preset) == names.end()) throw ConfigError("config: unknown preset '" + preset + "'");
    if (!std::isfinite(amplitude)) throw ConfigError("config: amplitude must be finite");
    if (K < 1) throw ConfigError("config: K must be >= 1");
    if (Nz < 16) throw ConfigError("config: Nz must be >= 16");
    if (!(Z_max >= 1.0 + phys.mu0 + 1.0)) throw ConfigError("config: Z_max must be >= mu0 + 2");
    if (!(c_grade > 0.0 && c_grade <= 1.0)) throw ConfigError("config: c_grade must lie in (0, 1]");
    for (size_t i = 0; i < nu_list.size(); ++i) {
        if (!(nu_list[i] > 0.0 && nu_list[i] <= 1.0)) throw ConfigError("config: nu_list entries must lie in (0, 1]");
        if (i > 0 && !(nu_list[i] < nu_list[i - 1])) throw ConfigError("config: nu_list must be strictly decreasing");
    }
    if (!(T >= 0.0 && T <= 1.0)) throw ConfigError("config: T must lie in [0, 1]");
    if (!(kato_c > 0.0)) throw ConfigError("config: kato_c must be positive");
    if (mu_samples < 2) throw ConfigError("config: mu_samples must be >= 2");
    if (!(ratio_bound >= 1.0)) throw ConfigError("config: ratio_bound must be >= 1");
    if (fit_points < 2) throw ConfigError("config: fit_points must be >= 2");
    if (!(kernel_t > 0.0)) throw ConfigError("config: kernel_t must be positive");
    if (!(kernel_xi >= 0.0)) throw ConfigError("config: kernel_xi must be non-negative");
}

double ExperimentConfig::nu_min() const {
    double m = phys.nu;
    for (double v : nu_list) m = std::min(m, v);
    return m;
}

GridPtr ExperimentConfig::make_grid() const {
    try {
        return hsv::make_grid(K, Nz, Z_max, nu_min(), phys.mu0, c_grade);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

SpectralField ExperimentConfig::initial_vorticity(const GridPtr& grid) const {
    return make_initial_data(preset, amplitude, grid);
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::map<std::string, const Key*> index;
    for (const Key& k : keys()) index[k.name] = &k;
    std::set<std::string> seen;
    std::stringstream ss{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        it->second->set(cfg, value);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::string* text_out) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("config: cannot read " + path.string() + ": " + e.what());
    }
    ExperimentConfig cfg = parse_config(text);
    if (text_out) *text_out = std::move(text);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Key& k : keys()) out.emplace_back(k.name, k.get(cfg));
    return out;
}

double gamma_rule(double triple0, double mu0) { return 4.0 * (1.0 + triple0) / mu0; }

// ---------------------------------------------------------------------------
// Experiments

bool fit_rate(const std::vector<NuRun>& runs, int points, double& rate) {
    std::vector<const NuRun*> ok;
    for (const NuRun& r : runs)
        if (r.ok && r.E > 0.0) ok.push_back(&r);
    std::ranges::sort(ok, [](const NuRun* a, const NuRun* b) { return a->nu < b->nu; });
    if (ok.size() > static_cast<size_t>(points)) ok.resize(static_cast<size_t>(points));
    if (ok.size() < 2) return false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ok.size());
    for (const NuRun* r : ok) {
        const double x = std::log(r->nu), y = std::log(r->E);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return false;
    rate = (n * sxy - sx * sy) / den;
    return true;
}

SweepResult run_inviscid_limit_experiment(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    SweepResult res;
    if (cfg.nu_list.empty()) return res;
    const GridPtr grid = cfg.make_grid();
    const SpectralField w0 = cfg.initial_vorticity(grid);

    Trajectory euler;
    try {
        euler = solve_euler(w0, cfg.T, cfg.step);
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = std::string("euler: ") + e.what();
        for (double nu : cfg.nu_list) {
            NuRun r;
            r.nu = nu;
            r.error = "skipped after euler failure";
            res.runs.push_back(std::move(r));
        }
        return res;
    }
    for (const auto& s : euler.snapshots) res.t.push_back(s.t);

    res.runs.resize(cfg.nu_list.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (size_t i = next++; i < cfg.nu_list.size(); i = next++) {
            NuRun& run = res.runs[i];
            run.nu = cfg.nu_list[i];
            if (failed) {
                run.error = "skipped after failure";
                continue;
            }
            try {
                PhysParams p = cfg.phys;
                p.nu = run.nu;
                const Trajectory tr = solve_navier_stokes(w0, cfg.T, p, cfg.step);
                if (tr.snapshots.size() != euler.snapshots.size())
                    throw NumericalError("snapshot times differ from the Euler run");
                for (size_t s = 0; s < tr.snapshots.size(); ++s) {
                    if (tr.snapshots[s].t != euler.snapshots[s].t)
                        throw NumericalError("snapshot times differ from the Euler run");
                    const double e = std::sqrt(2.0 * kinetic_energy(tr.snapshots[s].u - euler.snapshots[s].u));
                    run.err.push_back(e);
                    run.E = std::max(run.E, e);
                    run.noslip_max = std::max(run.noslip_max, tr.snapshots[s].noslip_residual);
                }
                run.max_u = tr.max_u;
                run.kato = tr.snapshots.size() >= 2 ? kato_dissipation(tr, cfg.kato_c, run.nu) : 0.0;
                run.ok = true;
            } catch (const std::exception& e) {
                run.error = e.what();
                failed = true;
            }
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(cfg.nu_list.size()));
    std::vector<std::thread> pool;
    for (int j = 1; j < n; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const NuRun& r : res.runs)
        if (!r.ok) {
            res.ok = false;
            if (res.error.empty()) res.error = "nu=" + shortest(r.nu) + ": " + r.error;
        }
    res.rate_valid = fit_rate(res.runs, cfg.fit_points, res.rate);
    return res;
}

NormSeries run_norm_tracking_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    NormSeries out;
    out.nu = cfg.phys.nu;
    const GridPtr grid = cfg.make_grid();
    const SpectralField w0 = cfg.initial_vorticity(grid);

    const NormReport r0 = cumulative_norm(w0, 0.0, norm_params(cfg, cfg.phys.gamma > 0.0 ? cfg.phys.gamma : 1.0));
    out.triple0 = r0.triple;
    out.gamma = cfg.phys.gamma > 0.0 ? cfg.phys.gamma : gamma_rule(r0.triple, cfg.phys.mu0);
    const NormParams np = norm_params(cfg, out.gamma);
    out.T = np.t_max();
    out.dt = std::min(cfg.step.dt, 0.1 * out.T);

    StepConfig sc = cfg.step;
    sc.dt = out.dt;
    sc.snapshot_every = 1;
    try {
        const Trajectory tr = solve_navier_stokes(w0, out.T, cfg.phys, sc);
        for (const auto& s : tr.snapshots) {
            // the last stamp may exceed T by round-off in the step accumulation
            out.reports.push_back(cumulative_norm(s.omega, std::min(s.t, out.T), np));
            out.reports.back().t = s.t;
            if (out.triple0 > 0.0) out.max_ratio = std::max(out.max_ratio, out.reports.back().triple / out.triple0);
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.flagged = out.max_ratio > cfg.ratio_bound;
    return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string manifest_json(const ExperimentConfig& cfg, std::string_view config_text, const SweepResult* result) {
    ordered_json params = ordered_json::object();
    for (const Key& k : keys()) {
        const std::string v = k.get(cfg);
        if (k.name == "preset")
            params[k.name] = v;
        else if (k.name == "nu_list")
            params[k.name] = cfg.nu_list;
        else if (k.name == "norm_tracking")
            params[k.name] = cfg.norm_tracking;
        else if (k.name == "K" || k.name == "Nz" || k.name == "picard_max" || k.name == "s_substeps" ||
                 k.name == "snapshot_every" || k.name == "mu_samples" || k.name == "fit_points")
            params[k.name] = std::stoi(v);
        else
            params[k.name] = parse_double(k.name, v);
    }
    ordered_json m;
    m["program"] = "halfspace-vortex";
    m["config_hash"] = git_blob_hash(config_text);
    m["params"] = params;
    m["derived"] = {{"nu_min", cfg.nu_min()},
                    {"gamma_rule", "4 (1 + triple0) / mu0 when gamma = 0"},
                    {"default_dt_rule", "min(dt, 0.1 mu0 / (2 gamma)) for norm tracking"}};
    if (result && result->has_norms) {
        m["derived"]["gamma"] = result->norms.gamma;
        m["derived"]["norm_T"] = result->norms.T;
        m["derived"]["norm_dt"] = result->norms.dt;
        m["derived"]["triple0"] = result->norms.triple0;
    }
    m["frozen_constants"] = {{"ratio_bound", cfg.ratio_bound},
                             {"rate_band", {0.3, 0.7}},
                             {"fit_points", cfg.fit_points},
                             {"mu_endpoint_offset", 1e-3},
                             {"energy_slack", 1e-6},
                             {"weight_C_monotone", 1.0},
                             {"weight_C_doubling", 2.0},
                             {"weight_C_linear", 1.0},
                             {"weight_C_exp", 1.0},
                             {"weight_Cprime_exp", 1.0},
                             {"z_derivative_stencil_points", Grid::kStencilWidth}};
    if (result) {
        m["status"] = result->ok ? "ok" : "failed";
        if (!result->ok) m["error"] = result->error;
    }
    return m.dump(2) + "\n";
}

void emit_report(const ExperimentConfig& cfg, std::string_view config_text, const SweepResult& result,
                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "manifest.json", manifest_json(cfg, config_text, &result));
    std::string summary = "config_hash " + git_blob_hash(config_text) + "\n";
    summary += std::string("status ") + (result.ok ? "ok" : "failed") + "\n";
    if (!result.ok) summary += "error " + result.error + "\n";

    if (!result.runs.empty()) {
        std::string e = "nu,E,ok\n", k = "nu,kato,ok\n";
        std::string series = "t";
        for (const NuRun& r : result.runs) {
            e += fmt17(r.nu) + ',' + fmt17(r.E) + ',' + (r.ok ? "1" : "0") + '\n';
            k += fmt17(r.nu) + ',' + fmt17(r.kato) + ',' + (r.ok ? "1" : "0") + '\n';
            series += ",err_nu_" + shortest(r.nu);
        }
        series += '\n';
        for (size_t s = 0; s < result.t.size(); ++s) {
            series += fmt17(result.t[s]);
            for (const NuRun& r : result.runs) series += ',' + (s < r.err.size() ? fmt17(r.err[s]) : std::string("nan"));
            series += '\n';
        }
        write_file_atomic(out_dir / "E_vs_nu.csv", e);
        write_file_atomic(out_dir / "kato_vs_nu.csv", k);
        write_file_atomic(out_dir / "error_series.csv", series);

        summary += "inviscid limit sweep\n";
        for (const NuRun& r : result.runs) {
            summary += "  nu " + shortest(r.nu) + "  E " + fmt17(r.E) + "  kato " + fmt17(r.kato) + "  noslip/max|u| " +
                       (r.max_u > 0.0 ? fmt17(r.noslip_max / r.max_u) : std::string("0")) +
                       (r.ok ? "" : "  FAILED: " + r.error) + "\n";
        }
        bool e_dec = true, k_dec = true;
        for (size_t i = 1; i < result.runs.size(); ++i) {
            e_dec = e_dec && result.runs[i].E < result.runs[i - 1].E;
            k_dec = k_dec && result.runs[i].kato < result.runs[i - 1].kato;
        }
        summary += std::string("  E strictly decreasing ") + (e_dec ? "yes" : "no") + "\n";
        summary += std::string("  kato strictly decreasing ") + (k_dec ? "yes" : "no") + "\n";
        summary += "  fitted exponent " + (result.rate_valid ? fmt17(result.rate) : std::string("undefined")) + "\n";
    }
    if (result.has_norms) {
        const NormSeries& ns = result.norms;
        std::string csv = "t,X_t,Y_t,Z,triple,ratio\n";
        for (const NormReport& r : ns.reports)
            csv += fmt17(r.t) + ',' + fmt17(r.X_t) + ',' + fmt17(r.Y_t) + ',' + fmt17(r.Z) + ',' + fmt17(r.triple) + ',' +
                   fmt17(ns.triple0 > 0.0 ? r.triple / ns.triple0 : 0.0) + '\n';
        write_file_atomic(out_dir / "norm_series.csv", csv);
        summary += "norm tracking\n";
        summary += "  nu " + shortest(ns.nu) + "  gamma " + fmt17(ns.gamma) + "  T " + fmt17(ns.T) + "  dt " + fmt17(ns.dt) +
                   "\n";
        summary += "  triple0 " + fmt17(ns.triple0) + "  max ratio " + fmt17(ns.max_ratio) + "  bound " +
                   shortest(cfg.ratio_bound) + (ns.flagged ? "  EXCEEDED" : "  within bound") + "\n";
        if (!ns.ok) summary += "  FAILED: " + ns.error + "\n";
    }
    if (!result.runs.empty() || result.has_norms) write_file_atomic(out_dir / "summary.txt", summary);
}

std::string norm_report_json(const NormReport& r, const NormParams& p) {
    ordered_json j;
    j["t"] = r.t;
    j["X_t"] = r.X_t;
    j["Y_t"] = r.Y_t;
    j["Z"] = r.Z;
    j["S"] = r.S;
    j["triple"] = r.triple;
    j["Xbar_t"] = r.Xbar_t;
    j["Xfrak_t"] = r.Xfrak_t;
    j["S_phi"] = r.S_phi;
    j["Z_phi"] = r.Z_phi;
    j["decay_rate"] = r.decay_rate;
    j["params"] = {{"mu0", p.mu0}, {"gamma", p.gamma}, {"eps0", p.eps0},
                   {"a", p.a},     {"nu", p.nu},       {"mu_samples", p.mu_samples}};
    ordered_json rows = ordered_json::array();
    for (const MuRow& m : r.rows)
        rows.push_back({{"mu", m.mu}, {"X_mu", m.X_mu}, {"Xbar_mu", m.Xbar_mu}, {"Xfrak_mu", m.Xfrak_mu},
                        {"X_sum", m.X_sum}, {"Y_mu", m.Y_mu}, {"Y_sum", m.Y_sum}, {"S_mu", m.S_mu}});
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

std::string norm_rows_csv(const NormReport& r) {
    std::string s = "mu,X_mu,Xbar_mu,Xfrak_mu,X_sum,Y_mu,Y_sum,S_mu\n";
    for (const MuRow& m : r.rows)
        s += fmt17(m.mu) + ',' + fmt17(m.X_mu) + ',' + fmt17(m.Xbar_mu) + ',' + fmt17(m.Xfrak_mu) + ',' + fmt17(m.X_sum) +
             ',' + fmt17(m.Y_mu) + ',' + fmt17(m.Y_sum) + ',' + fmt17(m.S_mu) + '\n';
    return s;
}

NormParams resolve_norm_params(const ExperimentConfig& cfg, const GridPtr& grid) {
    if (cfg.phys.gamma > 0.0) return norm_params(cfg, cfg.phys.gamma);
    const SpectralField w0 = make_initial_data(cfg.preset, cfg.amplitude, grid);
    return norm_params(cfg, gamma_rule(cumulative_norm(w0, 0.0, norm_params(cfg, 1.0)).triple, cfg.phys.mu0));
}

}  // namespace hsv
