#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace euwick {

/// Background triple h = (g, A, c) on a flat D-dimensional patch or torus.
/// The metric is a constant SPD matrix for the supported kinds; c may be a
/// constant or a per-position field sampled when a lattice is built.
struct BackgroundGeometry {
    enum class Kind { FlatTorus, FlatPatch };

    int dim = 2;
    Kind kind = Kind::FlatTorus;
    Eigen::MatrixXd metric;               // D x D, constant, SPD
    Eigen::VectorXd covector_A;           // constant covector, length D
    double c_const = 0.0;                 // constant part of c
    std::function<double(const Eigen::VectorXd&)> c_field;  // optional, adds to c_const
    std::vector<double> extent;           // per-axis physical lengths

    std::string id() const;
    void validate() const;
};

/// Engineering dimensions (d_phi, d_A, d_c) of the background data in
/// dimension D; the weights making the quadratic Lagrangian density
/// scale-invariant.
struct EngineeringDimensions {
    double d_phi;
    double d_A;
    double d_c;
};
EngineeringDimensions engineering_dimensions(int dim);

/// h -> h_lambda = (lambda^-2 g, A, lambda^2 c).
BackgroundGeometry scale_background(const BackgroundGeometry& geometry, double lambda);

/// Finite periodic discretization of the background.
class LatticeSpace {
  public:
    LatticeSpace(const BackgroundGeometry& geometry, int sites_per_axis);

    int dim() const { return dim_; }
    int sites_per_axis() const { return n_; }
    long site_count() const { return site_count_; }
    const std::vector<double>& spacing() const { return spacing_; }
    bool periodic() const { return periodic_; }
    const Eigen::VectorXd& volume_weight() const { return volume_weight_; }
    double volume_weight(long site) const { return volume_weight_[site]; }
    /// Coordinate of a site, row of an N x D matrix.
    const Eigen::MatrixXd& coordinates() const { return coords_; }
    const BackgroundGeometry& geometry() const { return geometry_; }

    /// Site index arithmetic (row-major over axes).
    long index(const std::vector<int>& multi) const;
    std::vector<int> multi_index(long site) const;
    long neighbor(long site, int axis, int step) const;

    /// Minimal-image displacement y - x (coordinate difference, periodic
    /// wrap applied), and metric distance derived from it.
    Eigen::VectorXd displacement(long x, long y) const;
    double distance(long x, long y) const;
    /// Halved squared geodesic distance sigma(x, y).
    double sigma(long x, long y) const;

    static constexpr long kSiteCap = 1 << 17;

  private:
    BackgroundGeometry geometry_;
    int dim_;
    int n_;
    long site_count_;
    bool periodic_;
    std::vector<double> spacing_;
    Eigen::VectorXd volume_weight_;
    Eigen::MatrixXd coords_;
};

using LatticePtr = std::shared_ptr<const LatticeSpace>;

LatticePtr build_lattice(const BackgroundGeometry& geometry, int sites_per_axis);

/// Discretized operator E = -(grad_j - A_j) g^{jk} (grad_k + A_k) + c acting
/// on site samples. Second-order centered differences; exactly symmetric.
Eigen::MatrixXd elliptic_operator(const LatticeSpace& lattice);
Eigen::MatrixXd elliptic_operator(const LatticeSpace& lattice, const BackgroundGeometry& geometry);

/// Lattice symbol of E at integer momentum k (flat torus, constant
/// coefficients): eigenvalue of E on the plane wave exp(2 pi i k.x / L).
double elliptic_symbol(const LatticeSpace& lattice, const std::vector<int>& momentum);
double elliptic_symbol(const LatticeSpace& lattice, const BackgroundGeometry& geometry,
                       const std::vector<int>& momentum);

/// A smooth compactly supported family of backgrounds h_s.  The deformation
/// is declared through per-site perturbation fields, polynomial in s for the
/// scalar coefficient c and conformal in s for the metric.
class SmoothFamily {
  public:
    /// c_s(x) = c(x) + sum_j s^j rho_j(x); rho_j sampled per site.
    static SmoothFamily scalar_polynomial(const BackgroundGeometry& base,
                                          std::vector<Eigen::VectorXd> rho);
    /// g_s = (1 + s * chi(x)) g with chi sampled per site (conformal factor).
    static SmoothFamily conformal_metric(const BackgroundGeometry& base,
                                         Eigen::VectorXd chi);

    const BackgroundGeometry& base() const { return base_; }
    bool is_polynomial() const { return kind_ == Kind::ScalarPolynomial; }
    int polynomial_degree() const;
    bool varies_metric() const { return kind_ == Kind::ConformalMetric; }
    const std::vector<long>& support_mask(const LatticeSpace& lattice) const;

    /// Assemble E_s on the given lattice (lattice built from base()).
    Eigen::MatrixXd operator_at(const LatticeSpace& lattice, double s) const;
    /// Per-site c_s samples (scalar families).
    Eigen::VectorXd c_at(const LatticeSpace& lattice, double s) const;

  private:
    enum class Kind { ScalarPolynomial, ConformalMetric };
    Kind kind_;
    BackgroundGeometry base_;
    std::vector<Eigen::VectorXd> rho_;  // scalar family coefficients
    Eigen::VectorXd chi_;               // conformal factor
    mutable std::vector<long> support_cache_;
    mutable long support_cache_sites_ = -1;
};

/// G^(n) = d^n E_s / ds^n at s = 0.  Exact for polynomial scalar families;
/// high-order central differences otherwise.
Eigen::MatrixXd family_operator_derivative(const SmoothFamily& family,
                                           const LatticeSpace& lattice, int order);

/// Lattice isometry: a site permutation together with the induced linear
/// action on first-derivative jet components (signed axis permutation).
struct LatticeIsometry {
    std::vector<long> site_map;   // site -> image site
    Eigen::MatrixXd jet_map;      // D x D signed permutation

    static LatticeIsometry translation(const LatticeSpace& lattice, const std::vector<int>& shift);
    static LatticeIsometry reflection(const LatticeSpace& lattice, int axis);
    static LatticeIsometry axis_swap(const LatticeSpace& lattice, int axis_a, int axis_b);

    /// Checks the permutation preserves minimal-image distances.
    bool is_isometry(const LatticeSpace& lattice) const;
    Eigen::MatrixXd permutation_matrix(const LatticeSpace& lattice) const;
};

}  // namespace euwick
