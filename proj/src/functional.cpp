#include "euwick/functional.hpp"

#include <algorithm>
#include <map>

namespace euwick {

int PolynomialFunctional::degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.degree());
    return d;
}

void PolynomialFunctional::add_term(Term t) { terms_.push_back(std::move(t)); }

void PolynomialFunctional::merge_terms(double drop_tol) {
    std::map<std::vector<long>, cdouble> basis_terms;
    std::vector<Term> rest;
    for (auto& t : terms_) {
        bool all_basis = std::all_of(t.factors.begin(), t.factors.end(),
                                     [](const Factor& f) { return f.is_basis(); });
        if (all_basis) {
            std::vector<long> key(t.factors.size());
            for (size_t i = 0; i < t.factors.size(); ++i) key[i] = t.factors[i].basis;
            std::sort(key.begin(), key.end());
            basis_terms[key] += t.coeff;
        } else {
            rest.push_back(std::move(t));
        }
    }
    terms_.clear();
    for (auto& [key, c] : basis_terms) {
        if (std::abs(c) <= drop_tol) continue;
        Term t;
        t.coeff = c;
        for (long s : key) t.factors.push_back(Factor::unit(s));
        terms_.push_back(std::move(t));
    }
    for (auto& t : rest) {
        if (std::abs(t.coeff) <= drop_tol) continue;
        terms_.push_back(std::move(t));
    }
}

Eigen::VectorXd PolynomialFunctional::jet(const Eigen::VectorXd& phi) const {
    const auto& lat = *lattice_;
    const int D = lat.dim();
    const long N = lat.site_count();
    Eigen::VectorXd j(slot_count());
    for (long x = 0; x < N; ++x) {
        j[slot(x, 0)] = phi[x];
        for (int a = 0; a < D; ++a) {
            long p = lat.neighbor(x, a, +1), m = lat.neighbor(x, a, -1);
            double vp = p >= 0 ? phi[p] : 0.0;
            double vm = m >= 0 ? phi[m] : 0.0;
            j[slot(x, a + 1)] = (vp - vm) / (2.0 * lat.spacing()[a]);
        }
    }
    return j;
}

cdouble PolynomialFunctional::factor_value(const Factor& f, const Eigen::VectorXd& jphi) const {
    if (f.is_basis()) return jphi[f.basis];
    return f.dense.cwiseProduct(jphi.cast<cdouble>()).sum();
}

cdouble PolynomialFunctional::evaluate(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd jphi = jet(phi);
    cdouble total = 0.0;
    for (const auto& t : terms_) {
        cdouble v = t.coeff;
        for (const auto& f : t.factors) v *= factor_value(f, jphi);
        total += v;
    }
    return total;
}

cdouble PolynomialFunctional::derivative_pairing(
    const Eigen::VectorXd& phi, const std::vector<Eigen::VectorXcd>& tests) const {
    Eigen::VectorXd jphi = jet(phi);
    const int k = static_cast<int>(tests.size());
    cdouble total = 0.0;
    for (const auto& t : terms_) {
        const int p = t.degree();
        if (p < k) continue;
        // pairings of each test vector with a distinct factor, summed over
        // injective assignments; the remaining factors are evaluated on phi.
        std::vector<cdouble> fv(p);
        for (int i = 0; i < p; ++i) fv[i] = factor_value(t.factors[i], jphi);
        // test-factor pairing table
        Eigen::MatrixXcd pair(k, p);
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < p; ++i)
                pair(a, i) = t.factors[i].is_basis()
                                 ? tests[a][t.factors[i].basis]
                                 : tests[a].cwiseProduct(t.factors[i].dense).sum();
        std::vector<int> used(p, 0);
        std::function<cdouble(int)> rec = [&](int a) -> cdouble {
            if (a == k) {
                cdouble rest = 1.0;
                for (int i = 0; i < p; ++i)
                    if (!used[i]) rest *= fv[i];
                return rest;
            }
            cdouble acc = 0.0;
            for (int i = 0; i < p; ++i) {
                if (used[i]) continue;
                used[i] = 1;
                acc += pair(a, i) * rec(a + 1);
                used[i] = 0;
            }
            return acc;
        };
        total += t.coeff * rec(0);
    }
    return total;
}

Eigen::VectorXcd PolynomialFunctional::gradient(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd jphi = jet(phi);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(slot_count());
    for (const auto& t : terms_) {
        const int p = t.degree();
        std::vector<cdouble> fv(p);
        for (int i = 0; i < p; ++i) fv[i] = factor_value(t.factors[i], jphi);
        for (int i = 0; i < p; ++i) {
            cdouble rest = t.coeff;
            for (int j = 0; j < p; ++j)
                if (j != i) rest *= fv[j];
            if (t.factors[i].is_basis())
                g[t.factors[i].basis] += rest;
            else
                g += rest * t.factors[i].dense;
        }
    }
    return g;
}

PolynomialFunctional& PolynomialFunctional::operator+=(const PolynomialFunctional& other) {
    if (!lattice_) lattice_ = other.lattice_;
    for (const auto& t : other.terms_) terms_.push_back(t);
    return *this;
}

PolynomialFunctional& PolynomialFunctional::operator-=(const PolynomialFunctional& other) {
    if (!lattice_) lattice_ = other.lattice_;
    for (auto t : other.terms_) {
        t.coeff = -t.coeff;
        terms_.push_back(std::move(t));
    }
    return *this;
}

PolynomialFunctional& PolynomialFunctional::operator*=(cdouble scalar) {
    for (auto& t : terms_) t.coeff *= scalar;
    return *this;
}

PolynomialFunctional PolynomialFunctional::conjugate() const {
    PolynomialFunctional r = *this;
    for (auto& t : r.terms_) {
        t.coeff = std::conj(t.coeff);
        for (auto& f : t.factors)
            if (!f.is_basis()) f.dense = f.dense.conjugate();
    }
    return r;
}

PolynomialFunctional PolynomialFunctional::pullback(const LatticeIsometry& iso) const {
    const auto& lat = *lattice_;
    const int D = lat.dim();
    const int nj = jet_components();
    // slot (x, a) -> sum_b jet_map(b, a) * slot(iso(x), b); for a signed
    // permutation there is exactly one image slot per source slot.
    auto map_slot = [&](long s, double& sign) -> long {
        long x = s / nj;
        int a = static_cast<int>(s % nj);
        long y = iso.site_map[x];
        if (a == 0) {
            sign = 1.0;
            return y * nj;
        }
        for (int b = 0; b < D; ++b) {
            if (iso.jet_map(b, a - 1) != 0.0) {
                sign = iso.jet_map(b, a - 1);
                return y * nj + b + 1;
            }
        }
        throw std::logic_error("jet map is not a signed permutation");
    };
    PolynomialFunctional r(lattice_);
    for (const auto& t : terms_) {
        Term nt;
        nt.coeff = t.coeff;
        for (const auto& f : t.factors) {
            if (f.is_basis()) {
                double sign = 1.0;
                long img = map_slot(f.basis, sign);
                nt.coeff *= sign;
                nt.factors.push_back(Factor::unit(img));
            } else {
                Eigen::VectorXcd v = Eigen::VectorXcd::Zero(slot_count());
                for (long s = 0; s < slot_count(); ++s) {
                    if (f.dense[s] == cdouble{}) continue;
                    double sign = 1.0;
                    long img = map_slot(s, sign);
                    v[img] += sign * f.dense[s];
                }
                nt.factors.push_back(Factor::vector(std::move(v)));
            }
        }
        r.terms_.push_back(std::move(nt));
    }
    return r;
}

std::vector<long> PolynomialFunctional::support() const {
    std::vector<bool> hit(lattice_ ? lattice_->site_count() : 0, false);
    const int nj = jet_components();
    for (const auto& t : terms_) {
        for (const auto& f : t.factors) {
            if (f.is_basis()) {
                hit[f.basis / nj] = true;
            } else {
                for (long s = 0; s < f.dense.size(); ++s)
                    if (f.dense[s] != cdouble{}) hit[s / nj] = true;
            }
        }
    }
    std::vector<long> out;
    for (long x = 0; x < static_cast<long>(hit.size()); ++x)
        if (hit[x]) out.push_back(x);
    return out;
}

double PolynomialFunctional::coeff_norm() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
    return m;
}

PolynomialFunctional pointwise_product(const PolynomialFunctional& a,
                                       const PolynomialFunctional& b) {
    PolynomialFunctional r(a.lattice() ? a.lattice() : b.lattice());
    for (const auto& ta : a.terms()) {
        for (const auto& tb : b.terms()) {
            Term t;
            t.coeff = ta.coeff * tb.coeff;
            t.factors = ta.factors;
            t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
            r.add_term(std::move(t));
        }
    }
    r.merge_terms();
    return r;
}

PolynomialFunctional constant_functional(LatticePtr lattice, cdouble value) {
    PolynomialFunctional r(std::move(lattice));
    Term t;
    t.coeff = value;
    r.add_term(std::move(t));
    return r;
}

PolynomialFunctional linear_field(LatticePtr lattice, const Eigen::VectorXd& f) {
    PolynomialFunctional r(lattice);
    const int nj = r.jet_components();
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(r.slot_count());
    for (long x = 0; x < lattice->site_count(); ++x)
        v[x * nj] = f[x] * lattice->volume_weight(x);
    Term t;
    t.factors.push_back(Factor::vector(std::move(v)));
    r.add_term(std::move(t));
    return r;
}

PolynomialFunctional local_monomial(LatticePtr lattice, int k, const Eigen::VectorXd& f) {
    PolynomialFunctional r(lattice);
    const int nj = r.jet_components();
    for (long x = 0; x < lattice->site_count(); ++x) {
        if (f[x] == 0.0) continue;
        Term t;
        t.coeff = f[x] * lattice->volume_weight(x);
        for (int i = 0; i < k; ++i) t.factors.push_back(Factor::unit(x * nj));
        r.add_term(std::move(t));
    }
    return r;
}

PolynomialFunctional gradient_squared(LatticePtr lattice, const Eigen::VectorXd& f) {
    PolynomialFunctional r(lattice);
    const int nj = r.jet_components();
    Eigen::MatrixXd ginv = lattice->geometry().metric.inverse();
    const int D = lattice->dim();
    for (long x = 0; x < lattice->site_count(); ++x) {
        if (f[x] == 0.0) continue;
        for (int j = 0; j < D; ++j) {
            for (int k = 0; k < D; ++k) {
                if (ginv(j, k) == 0.0) continue;
                Term t;
                t.coeff = f[x] * lattice->volume_weight(x) * ginv(j, k);
                t.factors.push_back(Factor::unit(x * nj + j + 1));
                t.factors.push_back(Factor::unit(x * nj + k + 1));
                r.add_term(std::move(t));
            }
        }
    }
    r.merge_terms();
    return r;
}

namespace {

// Expands dense factors into basis combinations so coefficient comparison is
// canonical.  Intended for residual checks on modest lattices.
PolynomialFunctional expand_dense(const PolynomialFunctional& f, double tol) {
    PolynomialFunctional r(f.lattice());
    for (const auto& t : f.terms()) {
        std::vector<Term> acc{Term{t.coeff, {}}};
        for (const auto& fac : t.factors) {
            if (fac.is_basis()) {
                for (auto& a : acc) a.factors.push_back(fac);
                continue;
            }
            std::vector<Term> next;
            for (const auto& a : acc) {
                for (long s = 0; s < fac.dense.size(); ++s) {
                    if (std::abs(fac.dense[s]) <= tol) continue;
                    Term n = a;
                    n.coeff *= fac.dense[s];
                    n.factors.push_back(Factor::unit(s));
                    next.push_back(std::move(n));
                }
            }
            acc = std::move(next);
            if (acc.size() > 2'000'000)
                throw std::runtime_error("dense expansion too large for exact comparison");
        }
        for (auto& a : acc) r.add_term(std::move(a));
    }
    r.merge_terms();
    return r;
}

}  // namespace

double functional_distance(const PolynomialFunctional& a, const PolynomialFunctional& b) {
    PolynomialFunctional d = a;
    d -= b;
    d.merge_terms();
    bool any_dense = false;
    for (const auto& t : d.terms())
        for (const auto& f : t.factors)
            if (!f.is_basis()) any_dense = true;
    if (any_dense) d = expand_dense(d, 0.0);
    return d.coeff_norm();
}

}  // namespace euwick
