#include "euwick/wick.hpp"

#include <cmath>

namespace euwick {

namespace {

ContractionKernel smooth_kernel(const Parametrix& p) {
    return ContractionKernel(p.lattice(), p.smooth(), true, "smooth-remainder");
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

PolynomialFunctional wick_power(const Parametrix& p, int k, const Eigen::VectorXd& f) {
    return gamma_exp(smooth_kernel(p), local_monomial(p.lattice(), k, f));
}

PolynomialFunctional wick_of(const Parametrix& p, const PolynomialFunctional& classical) {
    return gamma_exp(smooth_kernel(p), classical);
}

PolynomialFunctional directional_derivative(const PolynomialFunctional& f,
                                            const Eigen::VectorXcd& test) {
    PolynomialFunctional r(f.lattice());
    // Prolong the direction to jet slots so derivative factors pair against
    // its lattice differences, matching factor_value on configurations.
    Eigen::VectorXcd jtest = f.jet(test.real()).cast<cdouble>() +
                             cdouble{0.0, 1.0} * f.jet(test.imag()).cast<cdouble>();
    for (const auto& t : f.terms()) {
        for (size_t i = 0; i < t.factors.size(); ++i) {
            cdouble w = t.factors[i].is_basis()
                            ? jtest[t.factors[i].basis]
                            : jtest.cwiseProduct(t.factors[i].dense).sum();
            if (w == cdouble{}) continue;
            Term nt;
            nt.coeff = t.coeff * w;
            for (size_t j = 0; j < t.factors.size(); ++j)
                if (j != i) nt.factors.push_back(t.factors[j]);
            r.add_term(std::move(nt));
        }
    }
    r.merge_terms();
    return r;
}

PolynomialFunctional redefine_wick_power(const Parametrix& p, int k, const Eigen::VectorXd& f,
                                         const std::map<int, double>& c) {
    PolynomialFunctional r = wick_power(p, k, f);
    for (const auto& [m, cm] : c) {
        if (m < 2 || m > k) throw std::invalid_argument("redefinition index must be in 2..k");
        r += binom(k, m) * cm * wick_power(p, k - m, f);
    }
    return r;
}

namespace {

/// Coefficient of the all-value monomial phi(x)^d at a site where f != 0.
cdouble leading_coefficient(const PolynomialFunctional& r, int degree, long site) {
    const int nj = r.jet_components();
    long slot = site * nj;
    for (const auto& t : r.terms()) {
        if (t.degree() != degree) continue;
        bool match = true;
        for (const auto& fac : t.factors)
            if (!fac.is_basis() || fac.basis != slot) match = false;
        if (match) return t.coeff;
    }
    return 0.0;
}

}  // namespace

std::map<int, double> extract_ambiguity(const Parametrix& p, int k, const Eigen::VectorXd& f,
                                        const PolynomialFunctional& candidate) {
    PolynomialFunctional residual = candidate - wick_power(p, k, f);
    residual.merge_terms();
    long site = -1;
    for (long x = 0; x < p.lattice()->site_count(); ++x)
        if (f[x] != 0.0) site = x;
    if (site < 0) throw std::invalid_argument("smearing weight is identically zero");
    double fmu = f[site] * p.lattice()->volume_weight(site);
    // Degree-0 terms merge across sites, so the constant carries the full
    // smeared weight rather than a single site's.
    double fmu_total = f.dot(p.lattice()->volume_weight());

    std::map<int, double> c;
    for (int m = 2; m <= k; ++m) {
        cdouble lead = leading_coefficient(residual, k - m, site);
        double cm = (lead / (m == k ? fmu_total : fmu)).real() / binom(k, m);
        if (std::abs(cm) > 1e-14) {
            c[m] = cm;
            residual -= binom(k, m) * cdouble(cm) * wick_power(p, k - m, f);
            residual.merge_terms();
        }
    }
    if (residual.coeff_norm() > 1e-9)
        throw std::runtime_error("candidate is not a constant redefinition of the power");
    return c;
}

double leibniz_residual(const Parametrix& p, int k, int axis, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& phi) {
    const auto& lat = *p.lattice();
    const int nj = 1 + lat.dim();
    const double h = lat.spacing()[axis];

    // grad^+ :Phi^k:(f) := sum_x f mu ( :phi^k:(x + e) - :phi^k:(x) ) / h
    PolynomialFunctional lhs(p.lattice());
    // k :Phi^{k-1} grad^+ Phi:(f)
    PolynomialFunctional rhs(p.lattice());
    for (long x = 0; x < lat.site_count(); ++x) {
        if (f[x] == 0.0) continue;
        long xp = lat.neighbor(x, axis, +1);
        if (xp < 0) continue;
        double w = f[x] * lat.volume_weight(x) / h;
        Term plus;
        plus.coeff = w;
        for (int i = 0; i < k; ++i) plus.factors.push_back(Factor::unit(xp * nj));
        Term minus;
        minus.coeff = -w;
        for (int i = 0; i < k; ++i) minus.factors.push_back(Factor::unit(x * nj));
        lhs.add_term(std::move(plus));
        lhs.add_term(std::move(minus));

        Term rp;
        rp.coeff = k * w;
        for (int i = 0; i < k - 1; ++i) rp.factors.push_back(Factor::unit(x * nj));
        rp.factors.push_back(Factor::unit(xp * nj));
        Term rm;
        rm.coeff = -k * w;
        for (int i = 0; i < k; ++i) rm.factors.push_back(Factor::unit(x * nj));
        rhs.add_term(std::move(rp));
        rhs.add_term(std::move(rm));
    }
    auto kernel = smooth_kernel(p);
    PolynomialFunctional diff = gamma_exp(kernel, lhs) - gamma_exp(kernel, rhs);
    return std::abs(diff.evaluate(phi));
}

double scaled_wick_value(const BackgroundGeometry& base, int sites_per_axis, int k,
                         const Eigen::VectorXd& f, double lambda, int hadamard_order,
                         double nu) {
    BackgroundGeometry scaled = scale_background(base, lambda);
    LatticePtr lat = build_lattice(scaled, sites_per_axis);
    Parametrix p = Parametrix::green(lat, hadamard_order, nu);
    double dphi = engineering_dimensions(base.dim).d_phi;
    Eigen::VectorXd fl = std::pow(lambda, base.dim) * f;
    PolynomialFunctional obs =
        rescale_field(wick_power(p, k, fl), lambda, dphi);
    return obs.evaluate(Eigen::VectorXd::Zero(lat->site_count())).real();
}

}  // namespace euwick
