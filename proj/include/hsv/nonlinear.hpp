/// @file nonlinear.hpp
/// @brief Dealiased horizontal products, the vortex nonlinearity and its wall trace.
///
/// Products are formed on a 3K x 3K collocation grid per z node. Every output
/// mode with |xi|_inf <= floor(2K/3) then equals the truncated convolution
/// exactly; modes above that bound are zeroed.

#pragma once

#include "hsv/biot_savart.hpp"
#include "hsv/field.hpp"

#include <array>
#include <memory>
#include <vector>

namespace hsv {

/// FFTW plans and buffers for one grid. Not safe to share across threads;
/// creating plans is internally serialized.
class ProductPlan {
public:
    explicit ProductPlan(GridPtr grid);
    ~ProductPlan();
    ProductPlan(const ProductPlan&) = delete;
    ProductPlan& operator=(const ProductPlan&) = delete;

    const Grid& grid() const { return *grid_; }
    int collocation_points() const { return M_; }
    int dealias_bound() const { return D_; }
    bool kept(const Mode& xi) const { return xi.linf() <= D_; }

    /// Physical samples of one component, layout [z][x1][x2], x_n = 2 pi n / M.
    std::vector<double> to_physical(const SpectralField& f, int c) const;
    /// Spectral coefficients of physical samples into component c, masked.
    void to_spectral(const std::vector<double>& phys, SpectralField& out, int c) const;

    /// Pairs (eta, xi - eta) of grid modes contributing to output mode xi.
    std::vector<std::pair<int, int>> pairing(int m) const;

private:
    struct Impl;
    GridPtr grid_;
    int M_ = 0;
    int D_ = 0;
    std::unique_ptr<Impl> impl_;
};

/// (fg)_xi(z) = sum_eta f_eta(z) g_{xi-eta}(z), then the dealias mask.
/// f and g are scalar fields (component 0). Throws std::invalid_argument on grid mismatch.
SpectralField spectral_product(const SpectralField& f, const SpectralField& g);

/// Same product by explicit convolution over the pairing table.
SpectralField spectral_product_direct(const SpectralField& f, const SpectralField& g);

/// Evaluates N = omega.grad u - u.grad omega.
class NonlinearOperator {
public:
    explicit NonlinearOperator(GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const BiotSavart& biot_savart() const { return bs_; }
    const ProductPlan& plan() const { return plan_; }

    /// N = (omega_h . grad_h u) + omega_3 d_z u - (u_h . grad_h omega) - (u_3/z)(z d_z omega).
    SpectralField N(const SpectralField& omega) const;
    /// Same quantity with u_3 d_z omega formed directly.
    SpectralField N_undecomposed(const SpectralField& omega) const;

    /// Horizontal wall data B_xi = int_0^inf e^{-|xi| z} N_{h,xi}(z) dz, one pair per mode.
    std::vector<std::array<cplx, 2>> boundary_data(const SpectralField& N) const;

private:
    SpectralField assemble(const SpectralField& omega, bool decomposed) const;

    GridPtr grid_;
    BiotSavart bs_;
    ProductPlan plan_;
};

SpectralField nonlinearity_N(const SpectralField& omega);

std::vector<std::array<cplx, 2>> boundary_data_B(const SpectralField& omega, const SpectralField& N);

}  // namespace hsv
