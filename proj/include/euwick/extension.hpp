#pragma once

#include <functional>
#include <map>

#include <Eigen/Dense>

namespace euwick {

/// Rotation-invariant singular kernel u(y) = amplitude |y|^{-alpha} log^m |y|
/// on the relative coordinate space of dimension ambient_dim, singular at 0.
struct RadialKernel {
    double amplitude = 1.0;
    double alpha = 0.0;
    int log_power = 0;
    int ambient_dim = 3;

    double value(double r) const;
};

/// Scaling degree of the kernel (logs contribute nothing).
double scaling_degree(const RadialKernel& kernel);

/// Whether the extension across 0 is unique (sd < ambient dimension).
bool unique_extension(const RadialKernel& kernel);

/// Taylor-subtraction order  max(ceil(sd) - ambient_dim, -1);  -1 means no
/// subtraction.
int subtraction_order(const RadialKernel& kernel);

struct ExtensionResult {
    double value = 0.0;
    int subtraction_order = -1;
    double cutoff_radius = 0.0;
    /// Taylor data of the test function at 0 used for subtraction, keyed by
    /// multi-index; the weight dependence of the value is a combination of
    /// exactly these numbers.
    std::map<std::vector<int>, double> taylor_data;
};

/// Pairing of the extended kernel with a test function on a centered cubic
/// grid: sum over y != 0 of u(|y|) (f(y) - T_f(y) 1_{|y| <= R}) a^d.
ExtensionResult extend(const RadialKernel& kernel, int half_sites, double spacing,
                       const std::function<double(const Eigen::VectorXd&)>& f,
                       double cutoff_radius);

/// Refinement-extrapolated pairing value: repeats extend on 'levels' grids
/// with halved spacing (fixed physical extent) and removes the leading
/// discretization error by Aitken extrapolation.
double extrapolated_pair(const RadialKernel& kernel, int half_sites, double spacing,
                         const std::function<double(const Eigen::VectorXd&)>& f,
                         double cutoff_radius, int levels = 3);

/// Radial quadrature oracle for rotation-invariant test functions:
/// S_{d-1} * integral of r^{d-1} u(r) f(r) dr, by adaptive Simpson.
double radial_quadrature(const RadialKernel& kernel,
                         const std::function<double(double)>& f_radial, double r_max,
                         double tol = 1e-10);

/// Surface area of the unit sphere in dimension d.
double unit_sphere_area(int d);

/// Radial scaling expansion of a kernel t(r) with leading exponent -alpha:
/// t(r) = r^{-alpha} sum_k tau_k r^k + remainder.
struct ScalingExpansion {
    double alpha = 0.0;
    Eigen::VectorXd tau;  // amplitudes of r^{-alpha + k}, k = 0..m
    double remainder_scaling_degree = 0.0;
};
ScalingExpansion scaling_expansion_flat(const std::function<double(double)>& t, double alpha,
                                        int orders, double r_min, double r_max,
                                        int samples = 64);

/// Scaling degree measured from a log-log fit of |t| near 0.
double measured_scaling_degree(const std::function<double(double)>& t, double r_min,
                               double r_max, int samples = 32);

}  // namespace euwick
