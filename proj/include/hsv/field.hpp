/// @file field.hpp
/// @brief Spectral fields on the half space T^2 x R_+.
///
/// Horizontal directions are represented by Fourier modes xi = (xi1, xi2)
/// with |xi1|, |xi2| <= K; the vertical direction is sampled on a graded mesh
/// that clusters nodes near the wall. Convention: f(x) = sum_xi f_xi e^{i xi.x},
/// so a horizontal derivative d/dx_j multiplies mode xi by i*xi_j.

#pragma once

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hsv {

using cplx = std::complex<double>;

struct Mode {
    int xi1 = 0;
    int xi2 = 0;

    double magnitude() const;
    bool is_zero() const { return xi1 == 0 && xi2 == 0; }
    int linf() const;
    friend bool operator==(const Mode&, const Mode&) = default;
};

/// Horizontal mode set plus graded vertical mesh.
///
/// Nodes follow z(s) = Z_max (e^{beta s} - 1)/(e^beta - 1) with s uniform in
/// [0, 1]. beta is the smallest grading that puts the first cell at or below
/// c_grade * min(sqrt(nu_min), 1/Nz) and at least Nz/4 nodes inside
/// [0, 10 sqrt(nu_min)].
class Grid {
public:
    static constexpr double kDefaultGrade = 0.25;

    int K() const { return K_; }
    int Nz() const { return static_cast<int>(z_.size()); }
    double Z_max() const { return Z_max_; }
    double mu0() const { return mu0_; }
    double nu_min() const { return nu_min_; }
    double beta() const { return beta_; }
    double c_grade() const { return c_grade_; }

    std::span<const double> z() const { return z_; }
    double z(int j) const { return z_[static_cast<size_t>(j)]; }
    /// Composite trapezoid weights on the mesh; they sum to Z_max.
    std::span<const double> quad_weights() const { return w_; }

    int modes_per_side() const { return 2 * K_ + 1; }
    int n_modes() const { return modes_per_side() * modes_per_side(); }
    Mode mode(int m) const;
    /// Index of xi in the lexicographic (xi1, xi2) ordering, or -1 if outside.
    int index(int xi1, int xi2) const;
    int index(Mode xi) const { return index(xi.xi1, xi.xi2); }
    int negated(int m) const { return n_modes() - 1 - m; }

    /// Sixth-order d/dz stencil for node j: first neighbour index and weights.
    int stencil_start(int j) const { return stencil_start_[static_cast<size_t>(j)]; }
    std::span<const double> stencil(int j) const;
    static constexpr int kStencilWidth = 7;

    /// True when two grids describe the same discretization.
    bool same_as(const Grid& other) const;

private:
    friend std::shared_ptr<const Grid> make_grid(int, int, double, double, double, double);
    Grid() = default;

    int K_ = 0;
    double Z_max_ = 0.0;
    double mu0_ = 0.0;
    double nu_min_ = 1.0;
    double beta_ = 0.0;
    double c_grade_ = kDefaultGrade;
    std::vector<double> z_;
    std::vector<double> w_;
    std::vector<int> stencil_start_;
    std::vector<double> stencil_w_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the graded grid. Throws std::invalid_argument on bad input
/// (K < 1, Nz < 16, Z_max <= 1 + mu0, nu_min outside (0, 1]).
GridPtr make_grid(int K, int Nz, double Z_max, double nu_min, double mu0,
                  double c_grade = Grid::kDefaultGrade);

/// ncomp complex vertical profiles per horizontal mode.
/// Storage is [mode][component][z] contiguous.
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(GridPtr grid, int ncomp);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    int ncomp() const { return ncomp_; }
    bool empty() const { return !grid_; }

    std::span<cplx> profile(int m, int c);
    std::span<const cplx> profile(int m, int c) const;
    cplx& at(int m, int c, int j) { return data_[offset(m, c) + static_cast<size_t>(j)]; }
    cplx at(int m, int c, int j) const { return data_[offset(m, c) + static_cast<size_t>(j)]; }

    std::span<cplx> raw() { return data_; }
    std::span<const cplx> raw() const { return data_; }

    /// Single component as a scalar field.
    SpectralField component(int c) const;
    void set_component(int c, const SpectralField& scalar);

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    SpectralField& operator*=(cplx s);
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

    double max_abs() const;
    bool is_finite() const;
    /// max over modes, components and nodes of |f_{-xi} - conj(f_xi)|.
    double reality_defect() const;
    /// Replaces f_xi by the Hermitian average so the field is exactly real.
    void symmetrize();

private:
    size_t offset(int m, int c) const {
        return (static_cast<size_t>(m) * static_cast<size_t>(ncomp_) + static_cast<size_t>(c)) *
               static_cast<size_t>(grid_->Nz());
    }

    GridPtr grid_;
    int ncomp_ = 0;
    std::vector<cplx> data_;
};

using SpectralVectorField = SpectralField;

/// Scalar symbols entering kernels and norms.
struct PhysParams {
    double nu = 1e-2;
    double mu0 = 0.5;
    double gamma = 0.0;  ///< 0 selects the automatic rule in the harness
    double eps0 = 0.125;
    double a = 0.25;
    double theta0 = 0.7;

    /// Throws std::invalid_argument if an invariant is violated.
    void validate() const;
};

/// Sixth-order d/dz of one profile on the graded mesh.
void ddz(const Grid& grid, std::span<const cplx> f, std::span<cplx> out);
std::vector<cplx> ddz(const Grid& grid, std::span<const cplx> f);

/// Multi-index for D^alpha = dx^a1 dy^a2 (z dz)^a3.
using MultiIndex = std::array<int, 3>;

/// D^alpha f with |alpha| <= 2. Horizontal multipliers are applied first,
/// then the (z dz) factors innermost-first. Throws std::invalid_argument for
/// |alpha| > 2.
SpectralField conormal_derivative(const SpectralField& f, const MultiIndex& alpha);

/// Plain derivative grad^alpha = dx^a1 dy^a2 dz^a3 (no order limit).
SpectralField plain_derivative(const SpectralField& f, const MultiIndex& alpha);

/// Multiplies mode xi by (1 + |xi|)^power.
SpectralField horizontal_weight(const SpectralField& f, int power);

// ---------------------------------------------------------------------------
// Initial data catalog

/// Known presets: "single-roll", "shear", "shear-wave".
const std::vector<std::string>& preset_names();

/// Vorticity omega_0 = curl u_0 of the named preset.
/// Throws std::invalid_argument for unknown names.
SpectralField make_initial_data(const std::string& preset, double amplitude, const GridPtr& grid);

/// The analytic velocity u_0 behind make_initial_data.
SpectralField initial_velocity(const std::string& preset, double amplitude, const GridPtr& grid);

}  // namespace hsv
