#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "euwick/algebra.hpp"
#include "euwick/extension.hpp"
#include "euwick/interacting.hpp"
#include "euwick/oracle.hpp"
#include "euwick/wick.hpp"

namespace py = pybind11;
using namespace euwick;

namespace {

BackgroundGeometry make_torus(int dim, std::vector<double> extent, double c,
                              std::optional<std::vector<double>> metric_diag,
                              std::optional<std::vector<double>> A) {
    BackgroundGeometry g;
    g.dim = dim;
    g.kind = BackgroundGeometry::Kind::FlatTorus;
    g.extent = std::move(extent);
    g.c_const = c;
    g.metric = Eigen::MatrixXd::Identity(dim, dim);
    if (metric_diag)
        for (int i = 0; i < dim; ++i) g.metric(i, i) = (*metric_diag)[i];
    g.covector_A = Eigen::VectorXd::Zero(dim);
    if (A)
        for (int i = 0; i < dim; ++i) g.covector_A[i] = (*A)[i];
    g.validate();
    return g;
}

}  // namespace

PYBIND11_MODULE(_euwick, m) {
    m.doc() = "Lattice algebras of a Euclidean scalar field: parametrices, "
              "deformation products, normal-ordered powers, perturbation theory.";

    py::class_<BackgroundGeometry>(m, "BackgroundGeometry")
        .def_readonly("dim", &BackgroundGeometry::dim)
        .def_readonly("extent", &BackgroundGeometry::extent)
        .def_readonly("c", &BackgroundGeometry::c_const);
    m.def("make_torus", &make_torus, py::arg("dim"), py::arg("extent"), py::arg("c") = 0.0,
          py::arg("metric_diag") = std::nullopt, py::arg("A") = std::nullopt,
          "Flat torus background with constant coefficients.");
    m.def("scale_background", &scale_background, py::arg("geometry"), py::arg("lam"));

    py::class_<LatticeSpace, std::shared_ptr<LatticeSpace>>(m, "Lattice")
        .def_property_readonly("site_count", &LatticeSpace::site_count)
        .def_property_readonly("dim", &LatticeSpace::dim)
        .def_property_readonly("spacing", &LatticeSpace::spacing)
        .def_property_readonly("coordinates", &LatticeSpace::coordinates)
        .def("volume_weight", [](const LatticeSpace& l) { return l.volume_weight(); })
        .def("sigma", &LatticeSpace::sigma, py::arg("x"), py::arg("y"),
             "Half squared geodesic (metric) distance between two sites.");
    m.def(
        "build_lattice",
        [](const BackgroundGeometry& g, int n) {
            return std::const_pointer_cast<LatticeSpace>(build_lattice(g, n));
        },
        py::arg("geometry"), py::arg("sites_per_axis"));
    m.def("elliptic_operator",
          [](const LatticeSpace& l) { return elliptic_operator(l); }, py::arg("lattice"));
    m.def("exact_green_kernel",
          [](const LatticeSpace& l) { return exact_green_kernel(l); }, py::arg("lattice"));

    py::class_<PolynomialFunctional>(m, "Functional")
        .def("evaluate", &PolynomialFunctional::evaluate, py::arg("phi"))
        .def("coeff_norm", &PolynomialFunctional::coeff_norm)
        .def("__add__",
             [](const PolynomialFunctional& a, const PolynomialFunctional& b) { return a + b; })
        .def("__sub__",
             [](const PolynomialFunctional& a, const PolynomialFunctional& b) { return a - b; })
        .def("__rmul__", [](const PolynomialFunctional& a, cdouble s) { return s * a; });
    m.def("linear_field", &linear_field, py::arg("lattice"), py::arg("f"),
          "Phi(f) = sum_x f(x) phi(x) mu(x)");
    m.def("local_monomial", &local_monomial, py::arg("lattice"), py::arg("k"), py::arg("f"),
          "Phi^k(f) = sum_x f(x) phi(x)^k mu(x)");
    m.def("pointwise_product", &pointwise_product);
    m.def("functional_distance", &functional_distance,
          "Canonical distance between two polynomial functionals.");

    py::class_<HadamardExpansion>(m, "HadamardExpansion")
        .def_readonly("u", &HadamardExpansion::u)
        .def_property_readonly("v0", &HadamardExpansion::v0)
        .def("singular_value", &HadamardExpansion::singular_value, py::arg("sigma"));

    py::class_<Parametrix>(m, "Parametrix")
        .def_static("green", &Parametrix::green, py::arg("lattice"),
                    py::arg("hadamard_order") = 3, py::arg("nu") = 1.0)
        .def("shifted", &Parametrix::shifted, py::arg("smooth_kernel"))
        .def_property_readonly("kernel", &Parametrix::kernel)
        .def_property_readonly("smooth", &Parametrix::smooth)
        .def_property_readonly("hadamard", &Parametrix::hadamard)
        .def("coincidence", &Parametrix::coincidence);

    py::class_<ContractionKernel>(m, "ContractionKernel")
        .def(py::init([](std::shared_ptr<LatticeSpace> lattice, const Eigen::MatrixXd& kernel,
                         bool diag_valid, std::string label) {
                 if (!lattice) throw std::invalid_argument("lattice handle is empty");
                 return ContractionKernel(std::move(lattice), kernel, diag_valid,
                                          std::move(label));
             }),
             py::arg("lattice"), py::arg("site_kernel"), py::arg("diag_valid") = true,
             py::arg("label") = "");
    m.def("star_product", &star_product, py::arg("f"), py::arg("g"), py::arg("kernel"));
    m.def("change_of_parametrix", &change_of_parametrix, py::arg("p"), py::arg("q"),
          py::arg("f"));

    m.def("wick_power", &wick_power, py::arg("parametrix"), py::arg("k"), py::arg("f"));
    m.def("leibniz_residual", &leibniz_residual, py::arg("parametrix"), py::arg("k"),
          py::arg("axis"), py::arg("f"), py::arg("phi"));
    m.def("scaled_wick_value", &scaled_wick_value, py::arg("base"), py::arg("sites_per_axis"),
          py::arg("k"), py::arg("f"), py::arg("lam"), py::arg("hadamard_order") = 3,
          py::arg("nu") = 1.0);

    py::class_<AlmostHomogeneousFit>(m, "AlmostHomogeneousFit")
        .def_readonly("kappa", &AlmostHomogeneousFit::kappa)
        .def_readonly("log_coeffs", &AlmostHomogeneousFit::log_coeffs)
        .def_readonly("rel_residual", &AlmostHomogeneousFit::rel_residual);
    m.def("fit_almost_homogeneous", &fit_almost_homogeneous, py::arg("lambdas"),
          py::arg("values"), py::arg("log_degree"));

    py::class_<RadialKernel>(m, "RadialKernel")
        .def(py::init([](double alpha, int log_power, int ambient_dim, double amplitude) {
                 return RadialKernel{amplitude, alpha, log_power, ambient_dim};
             }),
             py::arg("alpha"), py::arg("log_power") = 0, py::arg("ambient_dim") = 3,
             py::arg("amplitude") = 1.0)
        .def("value", &RadialKernel::value, py::arg("r"));
    m.def("scaling_degree", &scaling_degree);
    m.def("unique_extension", &unique_extension);
    m.def("extrapolated_pair", &extrapolated_pair, py::arg("kernel"), py::arg("half_sites"),
          py::arg("spacing"), py::arg("f"), py::arg("cutoff_radius"), py::arg("levels") = 3);
    m.def("radial_quadrature", &radial_quadrature, py::arg("kernel"), py::arg("f_radial"),
          py::arg("r_max"), py::arg("tol") = 1e-10);

    m.def("isserlis_moment", &isserlis_moment, py::arg("f"), py::arg("covariance"));
    m.def(
        "mc_expectation",
        [](const PolynomialFunctional& f, const Eigen::MatrixXd& cov, long n,
           unsigned long seed) {
            auto e = mc_expectation(f, cov, n, seed);
            return py::make_tuple(e.mean, e.std_error, e.samples);
        },
        py::arg("f"), py::arg("covariance"), py::arg("samples"), py::arg("seed"),
        "Returns (mean, std_error, samples).");
}
