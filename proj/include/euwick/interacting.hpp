#pragma once

#include "euwick/algebra.hpp"
#include "euwick/series.hpp"

namespace euwick {

using FunctionalSeries = FormalSeries<PolynomialFunctional>;

/// Z_V = exp_{._P}(lambda V): coefficient n is the n-fold star power of V
/// over n!.
FunctionalSeries partition_function(const PolynomialFunctional& v, const ContractionKernel& p,
                                    int order);

/// Series star product: every coefficient pair combined with the given
/// kernel, Cauchy style.
FunctionalSeries series_star(const FunctionalSeries& a, const FunctionalSeries& b,
                             const ContractionKernel& k);

/// Moeller map R_V(F) = Z_V^{-1 (rel)} .rel (Z_V ._P F), a series in the
/// coupling; rel is the product with kernel P - G_fund.
FunctionalSeries moller_map(const PolynomialFunctional& f, const PolynomialFunctional& v,
                            const ContractionKernel& p, const Eigen::MatrixXd& green_fund,
                            int order);

/// Kernel coefficients P_t of the perturbative parametrix
/// P_[[s]] = sum_t s^t P_t = sum_n (-P G_s)^n P for the family E_s;
/// index 0 is P itself.
std::vector<Eigen::MatrixXd> perturbative_parametrix(const Parametrix& p,
                                                     const SmoothFamily& family, int order);

/// Residual norm ||E_s K_{[[s]]}(s) mu - Id|| of the truncated perturbative
/// parametrix at parameter s.
double perturbative_residual(const Parametrix& p, const SmoothFamily& family,
                             const std::vector<Eigen::MatrixXd>& kernels, double s);

/// beta_s F = exp[Upsilon_{P_s - P}] F as a series in s (coefficient list).
std::vector<PolynomialFunctional> beta_map(const PolynomialFunctional& f, const Parametrix& p,
                                           const std::vector<Eigen::MatrixXd>& kernels,
                                           int order);

/// Star product of two s-series with the s-dependent kernel P_s.
std::vector<PolynomialFunctional> series_star_graded(
    const std::vector<PolynomialFunctional>& a, const std::vector<PolynomialFunctional>& b,
    const Parametrix& p, const std::vector<Eigen::MatrixXd>& kernels, int order);

/// Perturbative-agreement check for a mass-type family c_s = c + s rho with
/// the locally-subtracted quadratic Wick power.
struct PpaReport {
    Eigen::VectorXd residual;        // per-site local density
    double max_outside_support = 0;  // residual away from supp(rho)
    double spectral_oracle_error = 0;  // |analytic dG/ds - finite difference|
};
PpaReport ppa_check(const Parametrix& p, const Eigen::VectorXd& rho, double fd_step = 1e-4);

}  // namespace euwick
