#pragma once

#include <map>

#include "euwick/algebra.hpp"

namespace euwick {

/// Normal-ordered local power :Phi^k:(f) = exp[Upsilon_{W_P}] phi^k(f).
PolynomialFunctional wick_power(const Parametrix& p, int k, const Eigen::VectorXd& f);

/// Normal ordering of an arbitrary classical local functional.
PolynomialFunctional wick_of(const Parametrix& p, const PolynomialFunctional& classical);

/// <F^{(1)}, t> as a functional of the field (one factor contracted away).
PolynomialFunctional directional_derivative(const PolynomialFunctional& f,
                                            const Eigen::VectorXcd& test);

/// Redefined power: :Phi^k:(f) + sum_m binom(k, m) c_m :Phi^{k-m}:(f),
/// with constant redefinition parameters c_m, m = 2..k.
PolynomialFunctional redefine_wick_power(const Parametrix& p, int k, const Eigen::VectorXd& f,
                                         const std::map<int, double>& c);

/// Recovers the redefinition constants c_m from a candidate power and the
/// reference family; inverse of redefine_wick_power.
std::map<int, double> extract_ambiguity(const Parametrix& p, int k, const Eigen::VectorXd& f,
                                        const PolynomialFunctional& candidate);

/// Residual of the discrete Leibniz rule along an axis for normal-ordered
/// powers, evaluated on the site configuration phi:
///   grad^+ :Phi^k:  vs  k :Phi^{k-1} grad^+ Phi:
/// with a forward difference grad^+; identically zero for k = 1 and O(a)
/// for k >= 2.
double leibniz_residual(const Parametrix& p, int k, int axis, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& phi);

/// Value at phi = 0 of the scale-transformed power: instantiate :Phi^k: on
/// the background scaled by lambda (with smearing weight lambda^D f and the
/// field-scaling prefactor) and evaluate at zero.  Even k only gives a
/// nonzero value.
double scaled_wick_value(const BackgroundGeometry& base, int sites_per_axis, int k,
                         const Eigen::VectorXd& f, double lambda, int hadamard_order = 3,
                         double nu = 1.0);

}  // namespace euwick
