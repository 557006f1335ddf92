#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "euwick/functional.hpp"

using namespace euwick;

namespace {

LatticePtr lat8() {
    BackgroundGeometry g;
    g.dim = 2;
    g.metric = Eigen::MatrixXd::Identity(2, 2);
    g.covector_A = Eigen::VectorXd::Zero(2);
    g.c_const = 1.0;
    g.extent = {4.0, 4.0};
    return build_lattice(g, 8);
}

Eigen::VectorXd random_field(long n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

}  // namespace

TEST_CASE("linear field evaluates as a mu-weighted sum") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[3] = 2.0;
    f[17] = -1.0;
    auto F = linear_field(lat, f);
    Eigen::VectorXd phi = random_field(lat->site_count(), 1);
    double expect = 2.0 * phi[3] * 0.25 - 1.0 * phi[17] * 0.25;
    CHECK(F.evaluate(phi).real() == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("local monomial and pointwise product") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[5] = 1.0;
    auto F2 = local_monomial(lat, 2, f);
    auto F3 = local_monomial(lat, 3, f);
    Eigen::VectorXd phi = random_field(lat->site_count(), 2);
    CHECK(F2.evaluate(phi).real() ==
          doctest::Approx(0.25 * phi[5] * phi[5]).epsilon(1e-14));
    auto P = pointwise_product(F2, F3);
    CHECK(P.evaluate(phi).real() ==
          doctest::Approx(F2.evaluate(phi).real() * F3.evaluate(phi).real()).epsilon(1e-13));
}

TEST_CASE("gradient-squared matches centered differences") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[12] = 1.0;
    auto G = gradient_squared(lat, f);
    Eigen::VectorXd phi = random_field(lat->site_count(), 3);
    double gx = (phi[lat->neighbor(12, 0, 1)] - phi[lat->neighbor(12, 0, -1)]) / 1.0;
    double gy = (phi[lat->neighbor(12, 1, 1)] - phi[lat->neighbor(12, 1, -1)]) / 1.0;
    CHECK(G.evaluate(phi).real() == doctest::Approx(0.25 * (gx * gx + gy * gy)).epsilon(1e-13));
}

TEST_CASE("derivative pairing equals finite-difference directional derivatives") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[5] = 1.3;
    f[6] = -0.4;
    auto F = local_monomial(lat, 3, f);
    Eigen::VectorXd phi = random_field(lat->site_count(), 4);
    Eigen::VectorXd dir = random_field(lat->site_count(), 5);

    // build the slot test vector as the jet of the direction
    Eigen::VectorXcd t = F.jet(dir).cast<cdouble>();
    double fd = 0.0;
    double h = 1e-5;
    fd = (F.evaluate(phi + h * dir).real() - F.evaluate(phi - h * dir).real()) / (2.0 * h);
    CHECK(F.derivative_pairing(phi, {t}).real() == doctest::Approx(fd).epsilon(1e-8));

    // second derivative against the same direction
    double fd2 = (F.evaluate(phi + h * dir).real() - 2.0 * F.evaluate(phi).real() +
                  F.evaluate(phi - h * dir).real()) /
                 (h * h);
    CHECK(F.derivative_pairing(phi, {t, t}).real() == doctest::Approx(fd2).epsilon(1e-5));

    // gradient agrees with the single-test pairing
    Eigen::VectorXcd g = F.gradient(phi);
    CHECK(std::abs(g.cwiseProduct(t).sum() - F.derivative_pairing(phi, {t})) < 1e-12);
}

TEST_CASE("merge collects identical basis monomials") {
    auto lat = lat8();
    PolynomialFunctional F(lat);
    Term a;
    a.coeff = 2.0;
    a.factors = {Factor::unit(10), Factor::unit(4)};
    Term b;
    b.coeff = 3.0;
    b.factors = {Factor::unit(4), Factor::unit(10)};
    F.add_term(a);
    F.add_term(b);
    F.merge_terms();
    REQUIRE(F.terms().size() == 1);
    CHECK(F.terms()[0].coeff == cdouble{5.0, 0.0});
}

TEST_CASE("conjugate realizes the involution on evaluations") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[9] = 1.0;
    auto F = cdouble{0.0, 2.0} * local_monomial(lat, 2, f);
    Eigen::VectorXd phi = random_field(lat->site_count(), 6);
    CHECK(F.conjugate().evaluate(phi) == std::conj(F.evaluate(phi)));
}

TEST_CASE("pullback along translation relabels sites") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[5] = 1.0;
    auto F = local_monomial(lat, 2, f);
    auto iso = LatticeIsometry::translation(*lat, {1, 0});
    auto G = F.pullback(iso);
    Eigen::VectorXd phi = random_field(lat->site_count(), 7);
    // pulled-back functional samples the image site
    long img = iso.site_map[5];
    CHECK(G.evaluate(phi).real() == doctest::Approx(0.25 * phi[img] * phi[img]).epsilon(1e-14));
}

TEST_CASE("pullback along reflection flips gradient slots consistently") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[12] = 1.0;
    auto F = gradient_squared(lat, f);
    auto iso = LatticeIsometry::reflection(*lat, 0);
    auto G = F.pullback(iso);
    Eigen::VectorXd phi = random_field(lat->site_count(), 8);
    // gradient-squared is reflection invariant up to relabeling:
    // G(phi) must equal F(phi composed with the inverse reflection)
    Eigen::VectorXd phi_pull(lat->site_count());
    for (long s = 0; s < lat->site_count(); ++s) phi_pull[iso.site_map[s]] = phi[s];
    CHECK(G.evaluate(phi).real() == doctest::Approx(F.evaluate(phi_pull).real()).epsilon(1e-12));
}

TEST_CASE("support and distance") {
    auto lat = lat8();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[7] = 1.0;
    auto F = local_monomial(lat, 2, f);
    auto sup = F.support();
    REQUIRE(sup.size() == 1);
    CHECK(sup[0] == 7);
    CHECK(functional_distance(F, F) == 0.0);
    auto G = linear_field(lat, f);
    CHECK(functional_distance(G, G) == 0.0);
    CHECK(functional_distance(F, G) > 0.0);
}
