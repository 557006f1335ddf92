#include "euwick/interacting.hpp"

#include <cmath>
#include <map>

#include "euwick/oracle.hpp"

namespace euwick {

FunctionalSeries partition_function(const PolynomialFunctional& v, const ContractionKernel& p,
                                    int order) {
    std::vector<PolynomialFunctional> c(order + 1);
    c[0] = constant_functional(v.lattice(), 1.0);
    for (int n = 1; n <= order; ++n) {
        c[n] = star_product(c[n - 1], v, p);
        c[n] *= cdouble(1.0 / n);
    }
    return FunctionalSeries(std::move(c));
}

FunctionalSeries series_star(const FunctionalSeries& a, const FunctionalSeries& b,
                             const ContractionKernel& k) {
    return FunctionalSeries::product(
        a, b,
        [&](const PolynomialFunctional& x, const PolynomialFunctional& y) {
            return star_product(x, y, k);
        });
}

FunctionalSeries moller_map(const PolynomialFunctional& f, const PolynomialFunctional& v,
                            const ContractionKernel& p, const Eigen::MatrixXd& green_fund,
                            int order) {
    ContractionKernel rel(p.lattice(), p.site_kernel() - green_fund, true, "relative");
    FunctionalSeries z = partition_function(v, p, order);
    auto rel_mul = [&](const PolynomialFunctional& x, const PolynomialFunctional& y) {
        return star_product(x, y, rel);
    };
    FunctionalSeries z_inv =
        FunctionalSeries::inverse(z, constant_functional(v.lattice(), 1.0), rel_mul);
    // F carries no coupling dependence: only the order-0 slot holds F.
    std::vector<PolynomialFunctional> f_series(order + 1, PolynomialFunctional(f.lattice()));
    f_series[0] = f;
    FunctionalSeries zf = FunctionalSeries::product(
        z, FunctionalSeries(std::move(f_series)),
        [&](const PolynomialFunctional& x, const PolynomialFunctional& y) {
            return star_product(x, y, p);
        });
    return FunctionalSeries::product(z_inv, zf, rel_mul);
}

std::vector<Eigen::MatrixXd> perturbative_parametrix(const Parametrix& p,
                                                     const SmoothFamily& family, int order) {
    const auto& lat = *p.lattice();
    const long N = lat.site_count();
    Eigen::VectorXd mu = lat.volume_weight();
    std::vector<Eigen::MatrixXd> e_coeff(order + 1);  // E_s = E_0 + sum_t s^t e_coeff[t]
    double fact = 1.0;
    for (int t = 1; t <= order; ++t) {
        fact *= t;
        e_coeff[t] = family_operator_derivative(family, lat, t) / fact;
    }
    std::vector<Eigen::MatrixXd> kernels(order + 1);
    kernels[0] = p.kernel();
    for (int t = 1; t <= order; ++t) {
        kernels[t] = Eigen::MatrixXd::Zero(N, N);
        for (int u = 1; u <= t; ++u)
            kernels[t] -= p.kernel() * mu.asDiagonal() * e_coeff[u] * kernels[t - u];
    }
    return kernels;
}

double perturbative_residual(const Parametrix& p, const SmoothFamily& family,
                             const std::vector<Eigen::MatrixXd>& kernels, double s) {
    const auto& lat = *p.lattice();
    Eigen::MatrixXd e_s = family.operator_at(lat, s);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(lat.site_count(), lat.site_count());
    double sp = 1.0;
    for (const auto& kt : kernels) {
        k += sp * kt;
        sp *= s;
    }
    Eigen::MatrixXd op = e_s * k * lat.volume_weight().asDiagonal();
    op -= Eigen::MatrixXd::Identity(lat.site_count(), lat.site_count());
    return op.cwiseAbs().maxCoeff();
}

namespace {

std::vector<ContractionKernel> graded_kernels(const Parametrix& p,
                                              const std::vector<Eigen::MatrixXd>& kernels) {
    std::vector<ContractionKernel> g;
    for (size_t t = 1; t < kernels.size(); ++t)
        g.emplace_back(p.lattice(), kernels[t], true, "parametrix-order-" + std::to_string(t));
    return g;
}

}  // namespace

std::vector<PolynomialFunctional> beta_map(const PolynomialFunctional& f, const Parametrix& p,
                                           const std::vector<Eigen::MatrixXd>& kernels,
                                           int order) {
    return gamma_exp_graded(graded_kernels(p, kernels), f, order);
}

std::vector<PolynomialFunctional> series_star_graded(
    const std::vector<PolynomialFunctional>& a, const std::vector<PolynomialFunctional>& b,
    const Parametrix& p, const std::vector<Eigen::MatrixXd>& kernels, int order) {
    ContractionKernel k0(p.lattice(), p.kernel(), true, "parametrix");
    auto graded = graded_kernels(p, kernels);
    std::vector<PolynomialFunctional> out(order + 1, PolynomialFunctional(p.lattice()));
    for (int i = 0; i < static_cast<int>(a.size()) && i <= order; ++i) {
        for (int j = 0; j < static_cast<int>(b.size()) && i + j <= order; ++j) {
            auto prod = star_product_graded(a[i], b[j], k0, graded, order - i - j);
            for (int t = 0; t < static_cast<int>(prod.size()); ++t) {
                out[i + j + t] += prod[t];
            }
        }
    }
    for (auto& o : out) o.merge_terms();
    return out;
}

PpaReport ppa_check(const Parametrix& p, const Eigen::VectorXd& rho, double fd_step) {
    const auto& lat = *p.lattice();
    const long N = lat.site_count();
    const Eigen::VectorXd mu = lat.volume_weight();

    // Analytic first-order kernel of the mass family: dG_s/ds = -G (mu rho) G.
    Eigen::MatrixXd p1 = -p.kernel() * mu.cwiseProduct(rho).asDiagonal() * p.kernel();

    // Independent oracle: finite difference of the exact deformed kernel.
    Eigen::MatrixXd e0 = elliptic_operator(lat);
    Eigen::MatrixXd ep = e0, em = e0;
    ep += (fd_step * rho).asDiagonal();
    em -= (fd_step * rho).asDiagonal();
    Eigen::MatrixXd fd =
        (exact_green_kernel(lat, ep) - exact_green_kernel(lat, em)) / (2.0 * fd_step);
    double oracle_err = (fd - p1).cwiseAbs().maxCoeff();

    // PPA residual of the locally-subtracted quadratic power: the deformed
    // side subtracts the singular expansion at the local mass
    // m_s(x)^2 = m^2 + s rho(x), so the s-derivatives of the Green parts
    // cancel exactly against the beta kernel and what remains is the local
    // density -rho(x) d[H-coincidence]/dm^2.
    const auto& geo = lat.geometry();
    auto h_coincidence = [&](double m2) {
        BackgroundGeometry g = geo;
        g.c_const = m2 - (effective_mass_squared(geo) - geo.c_const);
        LatticeSpace shifted(g, lat.sites_per_axis());
        HadamardExpansion h = fit_hadamard(shifted, p.hadamard().order, p.hadamard().nu);
        // Coincidence value of the subtraction alone: fit -H over the same
        // shells used for the smooth remainder and evaluate at sigma = 0.
        std::vector<double> xs, ys;
        std::map<long, double> shells;
        for (long y = 1; y < lat.site_count(); ++y)
            shells[std::llround(lat.sigma(0, y) * 1e12)] = lat.sigma(0, y);
        int used = 0;
        for (auto& [key, sig] : shells) {
            if (used++ >= 4) break;
            xs.push_back(sig);
            ys.push_back(-h.singular_value(sig));
        }
        return polyfit(xs, ys, std::min<int>(static_cast<int>(xs.size()) - 1, 2)).coeffs[0];
    };
    double m2 = effective_mass_squared(geo);
    double dh = (h_coincidence(m2 + fd_step) - h_coincidence(m2 - fd_step)) / (2.0 * fd_step);

    PpaReport rep;
    rep.residual = rho * dh;
    rep.spectral_oracle_error = oracle_err;
    rep.max_outside_support = 0.0;
    for (long x = 0; x < N; ++x)
        if (rho[x] == 0.0)
            rep.max_outside_support = std::max(rep.max_outside_support,
                                               std::abs(rep.residual[x]));
    return rep;
}

}  // namespace euwick
