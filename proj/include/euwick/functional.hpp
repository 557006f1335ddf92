#pragma once

#include <complex>
#include <optional>

#include "euwick/geometry.hpp"

namespace euwick {

using cdouble = std::complex<double>;

/// One linear slot functional on field configurations.  Slots enumerate the
/// first-order jet of the field: slot(x, 0) samples phi(x), slot(x, a) with
/// a >= 1 samples the centered difference of phi along axis a at x.  A factor
/// is either a unit basis slot (basis >= 0) or a dense vector over all slots;
/// its value on a configuration is the plain dot with the jet prolongation.
struct Factor {
    long basis = -1;
    Eigen::VectorXcd dense;

    bool is_basis() const { return basis >= 0; }
    static Factor unit(long slot) {
        Factor f;
        f.basis = slot;
        return f;
    }
    static Factor vector(Eigen::VectorXcd v) {
        Factor f;
        f.dense = std::move(v);
        return f;
    }
};

struct Term {
    cdouble coeff{1.0, 0.0};
    std::vector<Factor> factors;

    int degree() const { return static_cast<int>(factors.size()); }
};

/// Polynomial functional of the field, stored in factored form: a sum of
/// terms, each a coefficient times a product of linear slot factors.  The
/// coefficient and factors absorb the volume weights, so evaluation and all
/// pairings are plain dots.
class PolynomialFunctional {
  public:
    PolynomialFunctional() = default;
    explicit PolynomialFunctional(LatticePtr lattice) : lattice_(std::move(lattice)) {}

    const LatticePtr& lattice() const { return lattice_; }
    int jet_components() const { return lattice_ ? 1 + lattice_->dim() : 0; }
    long slot_count() const { return lattice_ ? lattice_->site_count() * jet_components() : 0; }
    long slot(long site, int jet) const { return site * jet_components() + jet; }

    const std::vector<Term>& terms() const { return terms_; }
    std::vector<Term>& terms() { return terms_; }
    bool empty() const { return terms_.empty(); }
    int degree() const;

    void add_term(Term t);
    /// Collects terms whose factors are all basis slots by sorted slot
    /// multiset and drops terms with negligible coefficients.
    void merge_terms(double drop_tol = 0.0);

    /// F(phi): sum of coeff * prod <factor, j phi>.
    cdouble evaluate(const Eigen::VectorXd& phi) const;
    /// <F^(k)(phi), t_1 x ... x t_k> with slot-space test vectors.
    cdouble derivative_pairing(const Eigen::VectorXd& phi,
                               const std::vector<Eigen::VectorXcd>& tests) const;
    /// First functional derivative at phi as a slot-space covector.
    Eigen::VectorXcd gradient(const Eigen::VectorXd& phi) const;

    /// Jet prolongation of a site configuration to slot space.
    Eigen::VectorXd jet(const Eigen::VectorXd& phi) const;
    /// Value of one factor on the jet of phi.
    cdouble factor_value(const Factor& f, const Eigen::VectorXd& jphi) const;

    PolynomialFunctional& operator+=(const PolynomialFunctional& other);
    PolynomialFunctional& operator-=(const PolynomialFunctional& other);
    PolynomialFunctional& operator*=(cdouble scalar);
    friend PolynomialFunctional operator+(PolynomialFunctional a, const PolynomialFunctional& b) {
        a += b;
        return a;
    }
    friend PolynomialFunctional operator-(PolynomialFunctional a, const PolynomialFunctional& b) {
        a -= b;
        return a;
    }
    friend PolynomialFunctional operator*(cdouble s, PolynomialFunctional a) {
        a *= s;
        return a;
    }

    /// Complex conjugation of coefficients and dense factors.
    PolynomialFunctional conjugate() const;
    /// Pullback along a lattice isometry acting on sites and jet components.
    PolynomialFunctional pullback(const LatticeIsometry& iso) const;

    /// Sites carrying any basis factor or nonzero dense entry.
    std::vector<long> support() const;

    /// Largest absolute coefficient, for residual norms.
    double coeff_norm() const;

  private:
    LatticePtr lattice_;
    std::vector<Term> terms_;
};

/// Classical (pointwise) product: concatenates factor lists termwise.
PolynomialFunctional pointwise_product(const PolynomialFunctional& a,
                                       const PolynomialFunctional& b);

/// Constant functional c * 1.
PolynomialFunctional constant_functional(LatticePtr lattice, cdouble value);

/// Smeared field Phi(f) = sum_x f(x) phi(x) mu(x); f given per site.
PolynomialFunctional linear_field(LatticePtr lattice, const Eigen::VectorXd& f);

/// Local monomial phi^k(f) = sum_x f(x) phi(x)^k mu(x).
PolynomialFunctional local_monomial(LatticePtr lattice, int k, const Eigen::VectorXd& f);

/// Gradient-squared local functional sum_x f(x) g^{jk} (grad phi)_j (grad phi)_k mu(x),
/// with centered-difference gradients.
PolynomialFunctional gradient_squared(LatticePtr lattice, const Eigen::VectorXd& f);

/// Maximum coefficient distance between merged forms of a and b, the norm
/// used for all algebraic residual checks.
double functional_distance(const PolynomialFunctional& a, const PolynomialFunctional& b);

}  // namespace euwick
