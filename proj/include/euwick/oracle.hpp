#pragma once

#include <functional>
#include <random>

#include "euwick/functional.hpp"

namespace euwick {

/// Sum over perfect matchings of {0..n-1} of the product of pair weights.
/// Returns 0 for odd n.  Brute-force recursion; n <= ~16.
cdouble isserlis_sum(int n, const std::function<cdouble(int, int)>& weight);

/// Gaussian moment of a factored functional at mean zero with site-level
/// covariance C: every factor is a linear functional of the field, so each
/// term contributes its coefficient times an Isserlis sum of slot pairings
/// <u, (J C J^T) w>.  Independent of the algebraic product machinery.
cdouble isserlis_moment(const PolynomialFunctional& f, const Eigen::MatrixXd& covariance);

/// Draws mean-zero Gaussian site configurations with the given covariance.
class GaussianSampler {
  public:
    GaussianSampler(const Eigen::MatrixXd& covariance, unsigned long seed);
    Eigen::VectorXd sample();

  private:
    Eigen::MatrixXd root_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

struct McEstimate {
    double mean;
    double std_error;
    long samples;
};

/// Monte Carlo expectation of F under the Gaussian measure.
McEstimate mc_expectation(const PolynomialFunctional& f, const Eigen::MatrixXd& covariance,
                          long samples, unsigned long seed);

/// Adaptive Simpson quadrature on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 30);

/// Least-squares polynomial fit y ~ sum_j c_j x^j, degree deg; returns the
/// coefficients (size deg + 1) and rms residual.
struct PolyFit {
    Eigen::VectorXd coeffs;
    double rms_residual;
    double r_squared;
};
PolyFit polyfit(const std::vector<double>& xs, const std::vector<double>& ys, int deg);

/// Golden-section minimization of a unimodal function on [a, b].
double golden_minimize(const std::function<double(double)>& f, double a, double b,
                       double tol = 1e-10);

/// Continuum free-space Green function of -Laplace + m^2 at separation r > 0,
/// dimensions 2, 3, 4 (closed forms; modified Bessel for 2 and 4).
double free_space_green(int dim, double mass, double r);

/// Richardson-extrapolated central difference derivative of given order
/// (1 or 2) of a scalar function at x.
double richardson_derivative(const std::function<double(double)>& f, double x, int order,
                             double h = 1e-3);

}  // namespace euwick
