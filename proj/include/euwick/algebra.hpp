#pragma once

#include "euwick/functional.hpp"
#include "euwick/parametrix.hpp"

namespace euwick {

/// A symmetric site kernel used as a contraction weight, extended lazily to
/// jet slots with centered-difference stencils.  Kernels with a short-
/// distance singularity carry diag_valid = false and refuse contractions at
/// or next to coincidence.
class ContractionKernel {
  public:
    ContractionKernel() = default;
    ContractionKernel(LatticePtr lattice, Eigen::MatrixXd site_kernel, bool diag_valid = true,
                      std::string label = {});

    static ContractionKernel difference(const ContractionKernel& a, const ContractionKernel& b);

    const LatticePtr& lattice() const { return lattice_; }
    const Eigen::MatrixXd& site_kernel() const { return kernel_; }
    bool diag_valid() const { return diag_valid_; }
    const std::string& label() const { return label_; }
    bool is_zero(double tol = 0.0) const { return kernel_.cwiseAbs().maxCoeff() <= tol; }

    /// Slot block (C_a K C_b^T)(x, y); a, b are jet components (0 = value).
    const Eigen::MatrixXd& block(int a, int b) const;

    /// Contraction weight <u, K_slots w> between two factors.
    cdouble pair(const Factor& u, const Factor& w) const;

  private:
    void check_overlap(long site_a, long site_b) const;

    LatticePtr lattice_;
    Eigen::MatrixXd kernel_;
    bool diag_valid_ = true;
    std::string label_;
    mutable std::vector<Eigen::MatrixXd> blocks_;
    mutable std::vector<bool> block_ready_;
};

/// exp[Upsilon_S] F: sum over sets of disjoint internal contractions of each
/// term, each pair weighted by S.  Exact (terminating) on polynomials.
PolynomialFunctional gamma_exp(const ContractionKernel& s, const PolynomialFunctional& f);

/// Star product (F ._K G): sum over partial matchings between the factor
/// lists of F-terms and G-terms; matched pairs contribute K-weights.
PolynomialFunctional star_product(const PolynomialFunctional& f, const PolynomialFunctional& g,
                                  const ContractionKernel& k);

/// Star product with the order-graded kernel K_0 + sum_{t>=1} s^t D_t,
/// truncated at total order max_order; component o of the result collects
/// the s^o coefficient.
std::vector<PolynomialFunctional> star_product_graded(
    const PolynomialFunctional& f, const PolynomialFunctional& g,
    const ContractionKernel& k0, const std::vector<ContractionKernel>& graded, int max_order);

/// exp[Upsilon_{S(s)}] with S(s) = sum_{t>=1} s^t D_t, truncated likewise.
std::vector<PolynomialFunctional> gamma_exp_graded(const std::vector<ContractionKernel>& graded,
                                                   const PolynomialFunctional& f, int max_order);

/// Change of parametrix alpha_P^Q = exp[Upsilon_{P - Q}], the cocycle
/// intertwining ._P with ._Q.
PolynomialFunctional change_of_parametrix(const Parametrix& p, const Parametrix& q,
                                          const PolynomialFunctional& f);

/// Field-scaling part of the observable rescaling: multiplies each degree-p
/// term by lambda^{p d_phi}.
PolynomialFunctional rescale_field(const PolynomialFunctional& f, double lambda, double d_phi);

/// Fit value(lambda) ~ lambda^kappa * poly(log lambda) over a lambda grid.
struct AlmostHomogeneousFit {
    double kappa = 0.0;
    Eigen::VectorXd log_coeffs;  // polynomial in log(lambda)
    double rel_residual = 0.0;
};
AlmostHomogeneousFit fit_almost_homogeneous(const std::vector<double>& lambdas,
                                            const std::vector<double>& values,
                                            int max_log_degree);

}  // namespace euwick
