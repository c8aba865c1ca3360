// halfspace-vortex: solve | norms | sweep | kernels

#include "hsv/harness.hpp"
#include "hsv/io.hpp"
#include "hsv/kernels.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace hsv;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string snapshot_name(size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "omega_%04zu.csv", i);
    return buf;
}

int cmd_solve(const ExperimentConfig& cfg, const std::string& text, const fs::path& out) {
    const GridPtr grid = cfg.make_grid();
    const SpectralField w0 = cfg.initial_vorticity(grid);
    fs::create_directories(out);
    SweepResult status;
    int rc = 0;
    try {
        const Trajectory tr = solve_navier_stokes(w0, cfg.T, cfg.phys, cfg.step);
        std::string snaps = "index,t,file,energy,noslip_residual\n";
        for (size_t i = 0; i < tr.snapshots.size(); ++i) {
            const auto& s = tr.snapshots[i];
            write_field_dump(out / snapshot_name(i), s.omega, cfg.phys, s.t);
            snaps += std::to_string(i) + ',' + fmt17(s.t) + ',' + snapshot_name(i) + ',' + fmt17(s.energy) + ',' +
                     fmt17(s.noslip_residual) + '\n';
        }
        std::string steps = "t,energy,noslip_residual,picard_iterations\n";
        for (size_t i = 0; i < tr.step_t.size(); ++i)
            steps += fmt17(tr.step_t[i]) + ',' + fmt17(tr.step_energy[i]) + ',' + fmt17(tr.step_noslip[i]) + ',' +
                     std::to_string(i < tr.step_picard_iterations.size() ? tr.step_picard_iterations[i] : 0) + '\n';
        write_file_atomic(out / "snapshots.csv", snaps);
        write_file_atomic(out / "trajectory.csv", steps);
    } catch (const NumericalError& e) {
        status.ok = false;
        status.error = e.what();
        std::cerr << "numerical failure: " << e.what() << '\n';
        rc = kExitNumerical;
    }
    write_file_atomic(out / "manifest.json", manifest_json(cfg, text, &status));
    return rc;
}

int cmd_norms(const ExperimentConfig& cfg, const fs::path& in, double t, const fs::path& out) {
    FieldDump d;
    try {
        d = read_field_dump(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot read field dump: ") + e.what());
    }
    NormParams p = resolve_norm_params(cfg, d.field.grid_ptr());
    p.validate();
    if (!(t >= 0.0 && t <= p.t_max()))
        throw ConfigError("--t must lie in [0, mu0/(2 gamma)] = [0, " + fmt17(p.t_max()) + "]");
    const NormReport r = cumulative_norm(d.field, t, p);
    fs::create_directories(out);
    const std::string stem = in.stem().string();
    write_file_atomic(out / (stem + "_norms.json"), norm_report_json(r, p));
    write_file_atomic(out / (stem + "_norms_mu.csv"), norm_rows_csv(r));
    std::cout << "triple " << fmt17(r.triple) << "  X " << fmt17(r.X_t) << "  Y " << fmt17(r.Y_t) << "  Z " << fmt17(r.Z)
              << '\n';
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& text, const fs::path& out, int jobs) {
    SweepResult res = run_inviscid_limit_experiment(cfg, jobs);
    if (cfg.norm_tracking && res.ok) {
        res.norms = run_norm_tracking_experiment(cfg);
        res.has_norms = true;
        if (!res.norms.ok) {
            res.ok = false;
            res.error = "norm tracking: " + res.norms.error;
        }
    }
    emit_report(cfg, text, res, out);
    if (fs::exists(out / "summary.txt")) std::cout << read_file(out / "summary.txt");
    if (!res.ok) {
        std::cerr << "numerical failure: " << res.error << '\n';
        return kExitNumerical;
    }
    return 0;
}

int cmd_kernels(const ExperimentConfig& cfg, const std::string& text, const fs::path& out) {
    const GridPtr grid = cfg.make_grid();
    fs::create_directories(out);
    std::string csv = "z,zbar,G1,G2,Htilde,R\n";
    for (double z : grid->z())
        for (double zb : grid->z()) {
            const KernelQuery q{cfg.kernel_t, cfg.phys.nu, cfg.kernel_xi, z, zb};
            csv += fmt17(z) + ',' + fmt17(zb) + ',' + fmt17(robin_g1(q)) + ',' + fmt17(heat_dirichlet(q)) + ',' +
                   fmt17(heat_neumann(q)) + ',' + fmt17(robin_residual(q)) + '\n';
        }
    write_file_atomic(out / "kernels.csv", csv);
    const ResidualFit fit = fit_residual_bound(cfg.phys.nu);
    nlohmann::ordered_json j{{"nu", fit.nu}, {"theta", fit.theta}, {"C", fit.C}, {"C_floor", fit.C_floor},
                             {"samples", fit.samples}};
    write_file_atomic(out / "residual_fit.json", j.dump(2) + "\n");
    SweepResult status;
    write_file_atomic(out / "manifest.json", manifest_json(cfg, text, &status));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral vorticity solver on the half space with norm tracking and viscosity sweeps"};
    app.require_subcommand(1);
    std::string config, out = "out", in;
    int jobs = 1;
    double t = 0.0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "flat key = value config file")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--jobs", jobs, "worker threads across viscosities")->check(CLI::PositiveNumber);
    };
    auto* solve = app.add_subcommand("solve", "Navier-Stokes trajectory with field dumps");
    auto* norms = app.add_subcommand("norms", "cumulative norm of a field dump");
    auto* sweep = app.add_subcommand("sweep", "inviscid-limit sweep and norm tracking");
    auto* kernels = app.add_subcommand("kernels", "kernel table and residual bound fit");
    for (auto* s : {solve, norms, sweep, kernels}) add_common(s);
    norms->add_option("--in", in, "field dump CSV")->required();
    norms->add_option("--t", t, "time of the dump in the norm")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        std::string text;
        const ExperimentConfig cfg = load_config(config, &text);
        if (*solve) return cmd_solve(cfg, text, out);
        if (*norms) return cmd_norms(cfg, in, t, out);
        if (*sweep) return cmd_sweep(cfg, text, out, jobs);
        return cmd_kernels(cfg, text, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
