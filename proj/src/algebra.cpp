#include "euwick/algebra.hpp"

#include <cmath>

#include "euwick/oracle.hpp"

namespace euwick {

namespace {

Eigen::MatrixXd centered_difference(const LatticeSpace& lat, int axis) {
    const long N = lat.site_count();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
    double inv = 1.0 / (2.0 * lat.spacing()[axis]);
    for (long x = 0; x < N; ++x) {
        long p = lat.neighbor(x, axis, +1), m = lat.neighbor(x, axis, -1);
        if (p >= 0) C(x, p) += inv;
        if (m >= 0) C(x, m) -= inv;
    }
    return C;
}

}  // namespace

ContractionKernel::ContractionKernel(LatticePtr lattice, Eigen::MatrixXd site_kernel,
                                     bool diag_valid, std::string label)
    : lattice_(std::move(lattice)),
      kernel_(std::move(site_kernel)),
      diag_valid_(diag_valid),
      label_(std::move(label)) {
    const int nj = 1 + lattice_->dim();
    blocks_.resize(nj * nj);
    block_ready_.assign(nj * nj, false);
}

ContractionKernel ContractionKernel::difference(const ContractionKernel& a,
                                               const ContractionKernel& b) {
    return ContractionKernel(a.lattice_, a.kernel_ - b.kernel_,
                             a.diag_valid_ && b.diag_valid_, a.label_ + "-" + b.label_);
}

const Eigen::MatrixXd& ContractionKernel::block(int a, int b) const {
    const int nj = 1 + lattice_->dim();
    int idx = a * nj + b;
    if (!block_ready_[idx]) {
        if (a == 0 && b == 0) {
            blocks_[idx] = kernel_;
        } else if (b == 0) {
            blocks_[idx] = centered_difference(*lattice_, a - 1) * kernel_;
        } else if (a == 0) {
            blocks_[idx] = kernel_ * centered_difference(*lattice_, b - 1).transpose();
        } else {
            blocks_[idx] = centered_difference(*lattice_, a - 1) * kernel_ *
                           centered_difference(*lattice_, b - 1).transpose();
        }
        block_ready_[idx] = true;
    }
    return blocks_[idx];
}

void ContractionKernel::check_overlap(long site_a, long site_b) const {
    if (diag_valid_) return;
    auto ma = lattice_->multi_index(site_a);
    auto mb = lattice_->multi_index(site_b);
    int n = lattice_->sites_per_axis();
    for (int d = 0; d < lattice_->dim(); ++d) {
        int off = std::abs(ma[d] - mb[d]);
        if (lattice_->periodic()) off = std::min(off, n - off);
        if (off > 1) return;
    }
    throw std::domain_error("kernel '" + label_ +
                            "' has no coincidence limit; contraction needs a smooth part");
}

cdouble ContractionKernel::pair(const Factor& u, const Factor& w) const {
    const int nj = 1 + lattice_->dim();
    if (u.is_basis() && w.is_basis()) {
        long x = u.basis / nj, y = w.basis / nj;
        check_overlap(x, y);
        return block(static_cast<int>(u.basis % nj), static_cast<int>(w.basis % nj))(x, y);
    }
    if (!diag_valid_)
        throw std::domain_error("kernel '" + label_ +
                                "' has no coincidence limit; smeared contraction refused");
    const long N = lattice_->site_count();
    auto component = [&](const Eigen::VectorXcd& v, int a) {
        return Eigen::Map<const Eigen::VectorXcd, 0, Eigen::InnerStride<>>(
            v.data() + a, N, Eigen::InnerStride<>(nj));
    };
    if (u.is_basis()) {
        long x = u.basis / nj;
        int a = static_cast<int>(u.basis % nj);
        cdouble acc = 0.0;
        for (int b = 0; b < nj; ++b)
            acc += block(a, b).row(x).cast<cdouble>().cwiseProduct(
                component(w.dense, b).transpose()).sum();
        return acc;
    }
    if (w.is_basis()) {
        long y = w.basis / nj;
        int b = static_cast<int>(w.basis % nj);
        cdouble acc = 0.0;
        for (int a = 0; a < nj; ++a)
            acc += block(a, b).col(y).cast<cdouble>().cwiseProduct(component(u.dense, a)).sum();
        return acc;
    }
    cdouble acc = 0.0;
    for (int a = 0; a < nj; ++a)
        for (int b = 0; b < nj; ++b)
            acc += (component(u.dense, a).transpose() *
                    (block(a, b).cast<cdouble>() * component(w.dense, b)))
                       .value();
    return acc;
}

namespace {

/// Weight of a contraction as a truncated polynomial in the grading
/// parameter; plain kernels use a degree-0 polynomial.
using WeightPoly = std::vector<cdouble>;

WeightPoly poly_mul(const WeightPoly& a, const WeightPoly& b, int max_order) {
    WeightPoly r(std::min<size_t>(a.size() + b.size() - 1, max_order + 1), cdouble{});
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size() && i + j < r.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

/// Internal-pairing recursion shared by the plain and graded gamma maps.
void gamma_term(const std::vector<Factor>& fs,
                const std::function<WeightPoly(const Factor&, const Factor&)>& weight,
                int max_order, const cdouble& coeff,
                std::vector<std::vector<Term>>& out) {
    const int p = static_cast<int>(fs.size());
    std::vector<int> used(p, 0);
    std::vector<int> kept;
    std::function<void(int, const WeightPoly&)> rec = [&](int i, const WeightPoly& w) {
        while (i < p && used[i]) ++i;
        if (i == p) {
            Term t;
            t.coeff = coeff;
            for (int k : kept) t.factors.push_back(fs[k]);
            for (size_t o = 0; o < w.size(); ++o) {
                if (w[o] == cdouble{}) continue;
                Term to = t;
                to.coeff *= w[o];
                out[o].push_back(std::move(to));
            }
            return;
        }
        used[i] = 1;
        kept.push_back(i);
        rec(i + 1, w);
        kept.pop_back();
        for (int j = i + 1; j < p; ++j) {
            if (used[j]) continue;
            WeightPoly pw = weight(fs[i], fs[j]);
            bool nonzero = false;
            for (auto& c : pw)
                if (c != cdouble{}) nonzero = true;
            if (nonzero) {
                used[j] = 1;
                rec(i + 1, poly_mul(w, pw, max_order));
                used[j] = 0;
            }
        }
        used[i] = 0;
    };
    rec(0, WeightPoly{cdouble{1.0, 0.0}});
}

/// Cross-matching recursion shared by the plain and graded star products.
void star_terms(const Term& ta, const Term& tb,
                const std::function<WeightPoly(const Factor&, const Factor&)>& weight,
                int max_order, std::vector<std::vector<Term>>& out) {
    const int p = ta.degree(), q = tb.degree();
    std::vector<int> used_b(q, 0);
    std::vector<std::pair<int, int>> matched;
    std::function<void(int, const WeightPoly&)> rec = [&](int i, const WeightPoly& w) {
        if (i == p) {
            Term t;
            t.coeff = ta.coeff * tb.coeff;
            std::vector<int> used_a(p, 0);
            for (auto& [ia, ib] : matched) used_a[ia] = 1;
            for (int k = 0; k < p; ++k)
                if (!used_a[k]) t.factors.push_back(ta.factors[k]);
            for (int k = 0; k < q; ++k)
                if (!used_b[k]) t.factors.push_back(tb.factors[k]);
            for (size_t o = 0; o < w.size(); ++o) {
                if (w[o] == cdouble{}) continue;
                Term to = t;
                to.coeff *= w[o];
                out[o].push_back(std::move(to));
            }
            return;
        }
        rec(i + 1, w);  // factor i of A stays unmatched
        for (int j = 0; j < q; ++j) {
            if (used_b[j]) continue;
            WeightPoly pw = weight(ta.factors[i], tb.factors[j]);
            bool nonzero = false;
            for (auto& c : pw)
                if (c != cdouble{}) nonzero = true;
            if (nonzero) {
                used_b[j] = 1;
                matched.push_back({i, j});
                rec(i + 1, poly_mul(w, pw, max_order));
                matched.pop_back();
                used_b[j] = 0;
            }
        }
    };
    rec(0, WeightPoly{cdouble{1.0, 0.0}});
}

}  // namespace

PolynomialFunctional gamma_exp(const ContractionKernel& s, const PolynomialFunctional& f) {
    std::vector<std::vector<Term>> out(1);
    auto weight = [&](const Factor& u, const Factor& w) { return WeightPoly{s.pair(u, w)}; };
    for (const auto& t : f.terms()) gamma_term(t.factors, weight, 0, t.coeff, out);
    PolynomialFunctional r(f.lattice());
    for (auto& t : out[0]) r.add_term(std::move(t));
    r.merge_terms();
    return r;
}

PolynomialFunctional star_product(const PolynomialFunctional& f, const PolynomialFunctional& g,
                                  const ContractionKernel& k) {
    std::vector<std::vector<Term>> out(1);
    auto weight = [&](const Factor& u, const Factor& w) { return WeightPoly{k.pair(u, w)}; };
    for (const auto& ta : f.terms())
        for (const auto& tb : g.terms()) star_terms(ta, tb, weight, 0, out);
    PolynomialFunctional r(f.lattice() ? f.lattice() : g.lattice());
    for (auto& t : out[0]) r.add_term(std::move(t));
    r.merge_terms();
    return r;
}

std::vector<PolynomialFunctional> star_product_graded(
    const PolynomialFunctional& f, const PolynomialFunctional& g, const ContractionKernel& k0,
    const std::vector<ContractionKernel>& graded, int max_order) {
    std::vector<std::vector<Term>> out(max_order + 1);
    auto weight = [&](const Factor& u, const Factor& w) {
        WeightPoly poly(std::min<int>(max_order, static_cast<int>(graded.size())) + 1,
                        cdouble{});
        poly[0] = k0.pair(u, w);
        for (size_t t = 0; t < graded.size() && t + 1 < poly.size() + 0u; ++t)
            poly[t + 1] = graded[t].pair(u, w);
        return poly;
    };
    for (const auto& ta : f.terms())
        for (const auto& tb : g.terms()) star_terms(ta, tb, weight, max_order, out);
    std::vector<PolynomialFunctional> r(max_order + 1, PolynomialFunctional(f.lattice()));
    for (int o = 0; o <= max_order; ++o) {
        for (auto& t : out[o]) r[o].add_term(std::move(t));
        r[o].merge_terms();
    }
    return r;
}

std::vector<PolynomialFunctional> gamma_exp_graded(const std::vector<ContractionKernel>& graded,
                                                   const PolynomialFunctional& f,
                                                   int max_order) {
    std::vector<std::vector<Term>> out(max_order + 1);
    auto weight = [&](const Factor& u, const Factor& w) {
        WeightPoly poly(std::min<int>(max_order, static_cast<int>(graded.size())) + 1,
                        cdouble{});
        for (size_t t = 0; t < graded.size() && t + 1 < poly.size(); ++t)
            poly[t + 1] = graded[t].pair(u, w);
        return poly;
    };
    for (const auto& t : f.terms()) gamma_term(t.factors, weight, max_order, t.coeff, out);
    std::vector<PolynomialFunctional> r(max_order + 1, PolynomialFunctional(f.lattice()));
    for (int o = 0; o <= max_order; ++o) {
        for (auto& t : out[o]) r[o].add_term(std::move(t));
        r[o].merge_terms();
    }
    return r;
}

PolynomialFunctional change_of_parametrix(const Parametrix& p, const Parametrix& q,
                                          const PolynomialFunctional& f) {
    ContractionKernel diff(p.lattice(), p.kernel() - q.kernel(), true, "parametrix-shift");
    return gamma_exp(diff, f);
}

PolynomialFunctional rescale_field(const PolynomialFunctional& f, double lambda, double d_phi) {
    PolynomialFunctional r = f;
    for (auto& t : r.terms()) t.coeff *= std::pow(lambda, d_phi * t.degree());
    return r;
}

AlmostHomogeneousFit fit_almost_homogeneous(const std::vector<double>& lambdas,
                                            const std::vector<double>& values,
                                            int max_log_degree) {
    const int n = static_cast<int>(lambdas.size());
    if (n < max_log_degree + 3)
        throw std::invalid_argument("need more scale samples than fit parameters");
    std::vector<double> logs(n);
    for (int i = 0; i < n; ++i) logs[i] = std::log(lambdas[i]);

    auto residual_at = [&](double kappa, Eigen::VectorXd* coeffs) {
        std::vector<double> z(n);
        double scale = 0.0;
        for (int i = 0; i < n; ++i) {
            z[i] = values[i] / std::pow(lambdas[i], kappa);
            scale = std::max(scale, std::abs(z[i]));
        }
        PolyFit fit = polyfit(logs, z, max_log_degree);
        if (coeffs) *coeffs = fit.coeffs;
        return scale > 0.0 ? fit.rms_residual / scale : 0.0;
    };

    // initial slope estimate from the endpoints of the log-log graph
    double k0 = 0.0;
    if (values.front() != 0.0 && values.back() != 0.0 &&
        (values.front() > 0) == (values.back() > 0)) {
        k0 = (std::log(std::abs(values.back())) - std::log(std::abs(values.front()))) /
             (logs.back() - logs.front());
    }
    double kappa = golden_minimize([&](double k) { return residual_at(k, nullptr); },
                                   k0 - 4.0, k0 + 4.0, 1e-9);
    AlmostHomogeneousFit fit;
    fit.kappa = kappa;
    fit.rel_residual = residual_at(kappa, &fit.log_coeffs);
    return fit;
}

}  // namespace euwick
