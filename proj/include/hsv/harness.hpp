/// @file harness.hpp
/// @brief Experiment configuration, viscosity sweeps, norm tracking and report output.

#pragma once

#include "hsv/field.hpp"
#include "hsv/norms.hpp"
#include "hsv/stepper.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsv {

/// Malformed or inconsistent configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string preset = "single-roll";
    double amplitude = 1.0;
    int K = 8;
    int Nz = 192;
    double Z_max = 5.0;
    double c_grade = Grid::kDefaultGrade;
    PhysParams phys;
    StepConfig step;
    std::vector<double> nu_list{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    double T = 0.1;
    double kato_c = 5.0;
    int mu_samples = 32;
    double ratio_bound = 3.0;
    int fit_points = 3;
    bool norm_tracking = true;  ///< sweep also runs the norm-tracking experiment
    double kernel_t = 0.1;      ///< kernel table time
    double kernel_xi = 1.0;     ///< kernel table |xi|

    /// Throws ConfigError if an invariant is violated.
    void validate() const;
    /// Smallest viscosity the grid must resolve: min(nu, nu_list).
    double nu_min() const;
    GridPtr make_grid() const;
    SpectralField initial_vorticity(const GridPtr& grid) const;
};

/// Parses flat "key = value" lines. Blank lines and lines starting with '#'
/// are skipped. Unknown keys, duplicates and malformed values throw ConfigError.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses a config file. Throws ConfigError if unreadable.
ExperimentConfig load_config(const std::filesystem::path& path, std::string* text_out = nullptr);

/// Every config key in manifest order, with its value as written by the manifest.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

/// gamma = 4 (1 + |||omega0|||_0) / mu0.
double gamma_rule(double triple0, double mu0);

struct NuRun {
    double nu = 0.0;
    bool ok = false;
    std::string error;
    double E = 0.0;     ///< sup_t ||u^nu - u_Euler||_{L2}
    double kato = 0.0;  ///< nu int_0^T int_{z <= c nu} |grad u|^2
    double noslip_max = 0.0;
    double max_u = 0.0;
    std::vector<double> err;  ///< ||u^nu - u_Euler||_{L2} on the shared snapshot times
};

struct NormSeries {
    bool ok = false;
    std::string error;
    double nu = 0.0;
    double gamma = 0.0;
    double T = 0.0;
    double dt = 0.0;
    double triple0 = 0.0;
    double max_ratio = 0.0;  ///< max_t triple(t) / triple(0), 0 when triple(0) = 0
    bool flagged = false;    ///< max_ratio above the ratio bound
    std::vector<NormReport> reports;
};

struct SweepResult {
    bool ok = true;  ///< false when any solver failed; partial results are kept
    std::string error;
    std::vector<double> t;  ///< shared snapshot times
    std::vector<NuRun> runs;
    double rate = 0.0;  ///< p in E ~ C nu^p over the smallest fit_points viscosities
    bool rate_valid = false;
    bool has_norms = false;
    NormSeries norms;
};

/// Euler once, then Navier-Stokes for every nu on the same grid and snapshot
/// times. Viscosities run on up to `jobs` threads; results do not depend on it.
SweepResult run_inviscid_limit_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Navier-Stokes at cfg.phys.nu up to T = mu0 / (2 gamma), cumulative norm at
/// every step. gamma follows gamma_rule when cfg.phys.gamma is 0, and
/// dt = min(cfg.step.dt, T / 10).
NormSeries run_norm_tracking_experiment(const ExperimentConfig& cfg);

/// Least-squares slope of log E against log nu over the `points` smallest nu
/// with E > 0. Returns false when fewer than two such points exist.
bool fit_rate(const std::vector<NuRun>& runs, int points, double& rate);

/// Manifest JSON: every config value, the resolved derived values, frozen
/// constants and the git-style hash of the config text.
std::string manifest_json(const ExperimentConfig& cfg, std::string_view config_text, const SweepResult* result);

/// Writes manifest.json always; E_vs_nu.csv, kato_vs_nu.csv, error_series.csv
/// when runs exist; norm_series.csv when norms were tracked; summary.txt.
/// Output depends only on the inputs.
void emit_report(const ExperimentConfig& cfg, std::string_view config_text, const SweepResult& result,
                 const std::filesystem::path& out_dir);

/// NormReport as JSON, with the norm parameters it was evaluated with.
std::string norm_report_json(const NormReport& r, const NormParams& p);

/// Per-mu table: mu, X_mu, Xbar_mu, Xfrak_mu, X_sum, Y_mu, Y_sum, S_mu.
std::string norm_rows_csv(const NormReport& r);

/// NormParams from the config with gamma resolved: cfg.phys.gamma when
/// positive, otherwise gamma_rule applied to the config's initial data on grid.
NormParams resolve_norm_params(const ExperimentConfig& cfg, const GridPtr& grid);

}  // namespace hsv
