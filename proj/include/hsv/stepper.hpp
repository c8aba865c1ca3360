/// @file stepper.hpp
/// @brief Time integration of the vorticity system: mild-formulation steps for
///        Navier-Stokes, an RK4 Euler reference, and the Kato dissipation integral.

#pragma once

#include "hsv/field.hpp"
#include "hsv/kernels.hpp"
#include "hsv/nonlinear.hpp"

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

namespace hsv {

/// Raised when the solution is no longer trustworthy: Picard stalls, NaN
/// appears, CFL is violated, or no-slip drifts beyond tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepConfig {
    double dt = 1e-3;
    double picard_tol = 1e-9;
    int picard_max = 50;
    int s_substeps = 4;
    double tol_div = 1e-6;
    int snapshot_every = 10;
    double noslip_tol = 5e-3;
    /// Allowed fraction of sum |omega|^2 within one unit of Z_max.
    double tail_tol = 1e-8;

    /// Throws std::invalid_argument if an invariant is violated.
    void validate() const;
};

struct TrajectorySnapshot {
    double t = 0.0;
    SpectralField omega;
    SpectralField u;
    double noslip_residual = 0.0;  ///< max_xi |u_{h,xi}(0)|
    double energy = 0.0;           ///< (1/2) sum_xi int |u_xi|^2 dz
};

struct Trajectory {
    std::vector<TrajectorySnapshot> snapshots;
    /// Per-step series, starting at t = 0.
    std::vector<double> step_t;
    std::vector<double> step_energy;
    std::vector<double> step_noslip;
    std::vector<int> step_picard_iterations;
    double max_u = 0.0;  ///< largest |u| coefficient seen
};

/// Kinetic energy (1/2) sum_xi int |u_xi|^2 dz with the grid weights.
double kinetic_energy(const SpectralField& u);

/// max_xi of the Euclidean norm of (u_1, u_2) at z = 0.
double noslip_residual(const SpectralField& u);

/// sum_xi int_{Z_max - 1}^{Z_max} |omega|^2 over sum_xi int |omega|^2.
double tail_fraction(const SpectralField& omega);

/// Rebuilds xi . omega_h from d_z omega_3 on every mode with xi != 0, leaving
/// the transverse part of omega_h untouched. The wall condition conserves all
/// of int e^{-|xi| z} omega_h, but only its transverse part is conserved by the
/// flow; the longitudinal part follows omega_3 through div omega = 0.
void restore_divergence_free(SpectralField& omega);

/// Mild-formulation stepper for one viscosity. Building it tabulates the kernels.
class NavierStokesStepper {
public:
    NavierStokesStepper(GridPtr grid, double nu, const StepConfig& cfg);

    /// omega(t + dt) from the fixed point
    ///   w = G(dt) w_t + int G(dt-s) N ds - int G(dt-s, z, 0) (B_h, 0) ds,
    /// with N, B linear in s across the step. Picard starts from G(dt) w_t.
    SpectralField step(const SpectralField& omega_t);

    int last_iterations() const { return last_iterations_; }
    const NonlinearOperator& nonlinear() const { return nl_; }

private:
    void apply_linear(const SpectralField& w, const SpectralField& N, const std::vector<std::array<cplx, 2>>& B,
                      bool end_weights, SpectralField& out) const;

    GridPtr grid_;
    double nu_;
    StepConfig cfg_;
    StokesPropagator prop_;
    NonlinearOperator nl_;
    int last_iterations_ = 0;
};

SpectralField duhamel_step(const SpectralField& omega_t, double t, double dt, const PhysParams& params,
                           const StepConfig& cfg);

/// Marches to T (0 <= T <= 1) and records snapshots every cfg.snapshot_every
/// steps plus the final time. Throws NumericalError on failure.
Trajectory solve_navier_stokes(const SpectralField& omega0, double T, const PhysParams& params,
                               const StepConfig& cfg);

/// omega_t = N(omega) by classical RK4 with the same spatial operators.
Trajectory solve_euler(const SpectralField& omega0, double T, const StepConfig& cfg);

/// nu int_0^T sum_xi int_{z <= c nu} |grad u|^2 dz dt, trapezoid over snapshots.
/// Throws std::invalid_argument when c nu lies below the first interior node
/// or fewer than two snapshots are present.
double kato_dissipation(const Trajectory& traj, double c, double nu);

/// sum_xi int_0^{zc} |grad u|^2 dz at one time, linear interpolation in the last cell.
double near_wall_dissipation(const SpectralField& grad_u, double zc);

}  // namespace hsv
