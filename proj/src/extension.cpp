#include "euwick/extension.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "euwick/oracle.hpp"

namespace euwick {

double RadialKernel::value(double r) const {
    if (r <= 0.0) throw std::domain_error("radial kernel evaluated at origin");
    double v = amplitude * std::pow(r, -alpha);
    for (int i = 0; i < log_power; ++i) v *= std::log(r);
    return v;
}

double scaling_degree(const RadialKernel& kernel) { return kernel.alpha; }

bool unique_extension(const RadialKernel& kernel) {
    return scaling_degree(kernel) < kernel.ambient_dim;
}

int subtraction_order(const RadialKernel& kernel) {
    int q = static_cast<int>(std::ceil(scaling_degree(kernel))) - kernel.ambient_dim;
    return std::max(q, -1);
}

namespace {

/// Taylor data of f at 0 up to order q (q <= 2) by Richardson-extrapolated
/// central differences.
std::map<std::vector<int>, double> taylor_data(
    const std::function<double(const Eigen::VectorXd&)>& f, int dim, int q) {
    std::map<std::vector<int>, double> data;
    if (q < 0) return data;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
    std::vector<int> beta0(dim, 0);
    data[beta0] = f(zero);
    if (q >= 1) {
        for (int j = 0; j < dim; ++j) {
            auto fj = [&](double t) {
                Eigen::VectorXd y = zero;
                y[j] = t;
                return f(y);
            };
            std::vector<int> beta(dim, 0);
            beta[j] = 1;
            data[beta] = richardson_derivative(fj, 0.0, 1, 1e-3);
        }
    }
    if (q >= 2) {
        for (int j = 0; j < dim; ++j) {
            for (int k = j; k < dim; ++k) {
                std::vector<int> beta(dim, 0);
                beta[j] += 1;
                beta[k] += 1;
                if (j == k) {
                    auto fj = [&](double t) {
                        Eigen::VectorXd y = zero;
                        y[j] = t;
                        return f(y);
                    };
                    data[beta] = richardson_derivative(fj, 0.0, 2, 1e-3);
                } else {
                    auto fjk = [&](double t) {
                        Eigen::VectorXd y = zero;
                        y[j] = t;
                        y[k] = t;
                        return f(y);
                    };
                    auto fjmk = [&](double t) {
                        Eigen::VectorXd y = zero;
                        y[j] = t;
                        y[k] = -t;
                        return f(y);
                    };
                    // d2f/dxj dxk from the two diagonal second derivatives
                    data[beta] = 0.25 * (richardson_derivative(fjk, 0.0, 2, 1e-3) -
                                         richardson_derivative(fjmk, 0.0, 2, 1e-3));
                }
            }
        }
    }
    if (q > 2) throw std::invalid_argument("subtraction order beyond the stored jet table");
    return data;
}

double taylor_value(const std::map<std::vector<int>, double>& data, const Eigen::VectorXd& y) {
    // T(y) = sum_beta (d^beta f)(0) / beta! * y^beta
    double acc = 0.0;
    for (const auto& [beta, d] : data) {
        double mono = 1.0;
        double fact = 1.0;
        for (size_t j = 0; j < beta.size(); ++j) {
            for (int r = 0; r < beta[j]; ++r) mono *= y[j];
            for (int r = 1; r <= beta[j]; ++r) fact *= r;
        }
        acc += d / fact * mono;
    }
    return acc;
}

}  // namespace

ExtensionResult extend(const RadialKernel& kernel, int half_sites, double spacing,
                       const std::function<double(const Eigen::VectorXd&)>& f,
                       double cutoff_radius) {
    const int d = kernel.ambient_dim;
    const int q = subtraction_order(kernel);
    ExtensionResult res;
    res.subtraction_order = q;
    res.cutoff_radius = cutoff_radius;
    res.taylor_data = taylor_data(f, d, q);

    const double cell = std::pow(spacing, d);
    std::vector<int> idx(d, -half_sites);
    Eigen::VectorXd y(d);
    double acc = 0.0;
    while (true) {
        bool origin = true;
        for (int j = 0; j < d; ++j) {
            y[j] = idx[j] * spacing;
            if (idx[j] != 0) origin = false;
        }
        if (!origin) {
            double r = y.norm();
            double val = f(y);
            if (q >= 0 && r <= cutoff_radius) val -= taylor_value(res.taylor_data, y);
            acc += kernel.value(r) * val;
        }
        int j = 0;
        while (j < d && ++idx[j] > half_sites) idx[j++] = -half_sites;
        if (j == d) break;
    }
    res.value = acc * cell;
    return res;
}

double extrapolated_pair(const RadialKernel& kernel, int half_sites, double spacing,
                         const std::function<double(const Eigen::VectorXd&)>& f,
                         double cutoff_radius, int levels) {
    std::vector<double> v, a;
    for (int l = 0; l < levels; ++l) {
        v.push_back(extend(kernel, half_sites << l, spacing / (1 << l), f, cutoff_radius).value);
        a.push_back(spacing / (1 << l));
    }
    if (levels < 2) return v.back();

    // The lattice-sum error is carried by the singular origin region: Taylor
    // expanding the test function there gives error terms a^{d - alpha + 2k}
    // (odd orders cancel by the parity of a centered grid), each multiplied
    // by powers of log(a) when the kernel carries logs.  Remove as many terms
    // as the level count allows by solving the square Vandermonde-type system
    //   v_l = v_inf + sum_i c_i phi_i(a_l).
    std::vector<std::pair<double, int>> basis;  // exponent, log power
    for (int k = 0; int(basis.size()) < levels - 1; ++k) {
        double p = kernel.ambient_dim - kernel.alpha + 2 * k;
        if (p <= 0.0) continue;
        for (int j = 0; j <= kernel.log_power && int(basis.size()) < levels - 1; ++j)
            basis.emplace_back(p, j);
        if (k > 8 * levels) break;
    }
    const int m = int(basis.size());
    Eigen::MatrixXd M(levels, m + 1);
    Eigen::VectorXd rhs(levels);
    for (int l = 0; l < levels; ++l) {
        M(l, 0) = 1.0;
        for (int i = 0; i < m; ++i)
            M(l, i + 1) = std::pow(a[l], basis[i].first) *
                          std::pow(std::log(a[l]), basis[i].second);
        rhs[l] = v[l];
    }
    Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);
    if (!std::isfinite(sol[0])) return v.back();
    return sol[0];
}

double unit_sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double radial_quadrature(const RadialKernel& kernel,
                         const std::function<double(double)>& f_radial, double r_max,
                         double tol) {
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        return std::pow(r, kernel.ambient_dim - 1) * kernel.value(r) * f_radial(r);
    };
    // split at 1 to keep the adaptive rule honest near the singular end
    double split = std::min(1.0, 0.5 * r_max);
    double inner = adaptive_simpson(integrand, 0.0, split, tol);
    double outer = adaptive_simpson(integrand, split, r_max, tol);
    return unit_sphere_area(kernel.ambient_dim) * (inner + outer);
}

ScalingExpansion scaling_expansion_flat(const std::function<double(double)>& t, double alpha,
                                        int orders, double r_min, double r_max, int samples) {
    if (samples <= orders + 2)
        throw std::invalid_argument("insufficient radial samples for the requested order");
    std::vector<double> xs(samples), ys(samples);
    for (int i = 0; i < samples; ++i) {
        double r = r_min + (r_max - r_min) * i / (samples - 1);
        xs[i] = r;
        ys[i] = t(r) * std::pow(r, alpha);
    }
    PolyFit fit = polyfit(xs, ys, orders);
    ScalingExpansion ex;
    ex.alpha = alpha;
    ex.tau = fit.coeffs;
    auto remainder = [t, alpha, coeffs = fit.coeffs](double r) {
        double model = 0.0;
        double p = std::pow(r, -alpha);
        for (long k = 0; k < coeffs.size(); ++k) {
            model += coeffs[k] * p;
            p *= r;
        }
        return t(r) - model;
    };
    double rem_scale = 0.0;
    for (int i = 0; i < samples; ++i) rem_scale = std::max(rem_scale, std::abs(remainder(xs[i])));
    if (rem_scale < 1e-13 * (std::abs(ys[0]) + 1.0) * std::pow(r_min, -alpha)) {
        ex.remainder_scaling_degree = -std::numeric_limits<double>::infinity();
    } else {
        ex.remainder_scaling_degree = measured_scaling_degree(remainder, r_min, r_max, samples);
    }
    return ex;
}

double measured_scaling_degree(const std::function<double(double)>& t, double r_min,
                               double r_max, int samples) {
    std::vector<double> xs, ys;
    for (int i = 0; i < samples; ++i) {
        double r = r_min * std::pow(r_max / r_min, double(i) / (samples - 1));
        double v = std::abs(t(r));
        if (v <= 0.0) continue;
        xs.push_back(std::log(r));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 3) return 0.0;
    return -polyfit(xs, ys, 1).coeffs[1];
}

}  // namespace euwick
