#pragma once

#include "euwick/geometry.hpp"

namespace euwick {

/// Short-distance expansion of the Green kernel at mass m in dimension D:
///   H(sigma) = sum_n u_n sigma^{n - (D-2)/2}  (singular exponents only)
///            + sum_n v_n sigma^n log(sigma / nu^2)   (even D)
/// together with the fitted smooth polynomial tail sum_n w_n sigma^n, which
/// is recorded but excluded from H.
struct HadamardExpansion {
    int dim = 0;
    int order = 0;
    double mass = 0.0;
    double nu = 1.0;
    Eigen::VectorXd u_exponents;  // exponents of the u-columns
    Eigen::VectorXd u;            // u-coefficients, aligned with u_exponents
    Eigen::VectorXd v;            // log-column coefficients (empty for odd D)
    Eigen::VectorXd smooth;       // fitted smooth tail, diagnostics only
    double fit_rms = 0.0;

    /// Singular part H(sigma); excludes the smooth tail.
    double singular_value(double sigma) const;
    /// Full fitted model including the smooth tail.
    double fitted_value(double sigma) const;
    /// Leading log coefficient v_0 (0 for odd D).
    double v0() const { return v.size() > 0 ? v[0] : 0.0; }
};

/// Fits the expansion coefficients by least squares against the closed-form
/// free-space Green function, sampled at the nearest distinct lattice
/// separation shells.
HadamardExpansion fit_hadamard(const LatticeSpace& lattice, int order, double nu,
                               int shells = 32);

/// Effective scalar mass squared c + g^{jk} A_j A_k of a constant background.
double effective_mass_squared(const BackgroundGeometry& geometry);

/// Exact lattice Green kernel G(x, y): inverse of E normalized so that
/// (E G)(., y) is the lattice delta density, i.e. G = E^{-1} / mu.
Eigen::MatrixXd exact_green_kernel(const LatticeSpace& lattice);
Eigen::MatrixXd exact_green_kernel(const LatticeSpace& lattice, const Eigen::MatrixXd& E);

/// Green kernel entry on a flat torus via the Fourier symbol sum; O(N) per
/// entry, for lattices too large to invert densely.
double spectral_green_entry(const LatticeSpace& lattice, long x, long y);

/// Entrywise singular matrix H(sigma(x, y)); the diagonal is set to zero and
/// must never be used (no coincidence limit).
Eigen::MatrixXd hadamard_matrix(const LatticeSpace& lattice, const HadamardExpansion& h);

/// Smooth remainder W = G - H with the diagonal filled by a polynomial fit
/// of W against sigma over the nearest separation shells, evaluated at
/// sigma = 0.
Eigen::MatrixXd smooth_remainder(const LatticeSpace& lattice, const Eigen::MatrixXd& green,
                                 const HadamardExpansion& h, int shells = 4);

/// Coincidence value [W](x) computed from spectral Green entries only; for
/// refinement sweeps on large lattices.
double coincidence_smooth_spectral(const LatticeSpace& lattice, const HadamardExpansion& h,
                                   long site, int shells = 4);

/// A parametrix: a symmetric site kernel P differing from the exact Green
/// kernel by a smooth symmetric kernel, together with its Hadamard data and
/// smooth remainder W_P = P - H.
class Parametrix {
  public:
    /// The fundamental solution itself, the distinguished parametrix.
    static Parametrix green(LatticePtr lattice, int hadamard_order = 3, double nu = 1.0);

    /// P + S for a smooth symmetric kernel S (an affine shift in the family
    /// of parametrices); shares the Hadamard data.
    Parametrix shifted(const Eigen::MatrixXd& smooth_kernel) const;

    const LatticePtr& lattice() const { return lattice_; }
    const Eigen::MatrixXd& kernel() const { return kernel_; }
    const HadamardExpansion& hadamard() const { return hadamard_; }
    /// Smooth remainder W_P including its coincidence diagonal.
    const Eigen::MatrixXd& smooth() const { return smooth_; }
    /// Coincidence values [W_P](x), the diagonal of smooth().
    Eigen::VectorXd coincidence() const { return smooth_.diagonal(); }

    /// E P - delta_mu; identically zero for the exact Green kernel and a
    /// smooth kernel for any parametrix.
    Eigen::MatrixXd defect(const Eigen::MatrixXd& E) const;

  private:
    LatticePtr lattice_;
    Eigen::MatrixXd kernel_;
    HadamardExpansion hadamard_;
    Eigen::MatrixXd smooth_;
};

}  // namespace euwick
