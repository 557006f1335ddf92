#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "euwick/oracle.hpp"
#include "euwick/wick.hpp"

using namespace euwick;

namespace {

BackgroundGeometry geo(int dim, double mass2 = 1.0, double extent = 4.0) {
    BackgroundGeometry g;
    g.dim = dim;
    g.metric = Eigen::MatrixXd::Identity(dim, dim);
    g.covector_A = Eigen::VectorXd::Zero(dim);
    g.c_const = mass2;
    g.extent.assign(dim, extent);
    return g;
}

Eigen::VectorXd bump(const LatticePtr& lat, long site, double amp = 1.0) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[site] = amp;
    return f;
}

Eigen::VectorXd random_field(long n, unsigned seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, amp);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

double factorial2(int n) {  // double factorial, (-1)!! = 1
    double r = 1.0;
    for (int m = n; m > 1; m -= 2) r *= m;
    return r;
}

}  // namespace

TEST_CASE("derivative axiom: d/dphi :Phi^k: = k :Phi^{k-1}:") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 7, 0.5);
    Eigen::VectorXcd dir = random_field(lat->site_count(), 8).cast<cdouble>();
    for (int k = 2; k <= 4; ++k) {
        auto wk = wick_power(p, k, f);
        auto lhs = directional_derivative(wk, dir);
        // k :Phi^{k-1}:(f . dir) — contraction removes one field against dir
        Eigen::VectorXd fd(lat->site_count());
        // direction enters pointwise: d/ds :(phi + s dir)^k:(f) = k :phi^{k-1} dir:(f)
        auto wkm = wick_power(p, k - 1, f);
        // compare on random configurations
        for (unsigned s : {21u, 22u, 23u}) {
            Eigen::VectorXd phi = random_field(lat->site_count(), s, 0.8);
            // evaluate k * sum_x f(x) mu(x) dir(x) * d(:phi^{k-1}:)/... is not
            // simply wkm; instead check against finite difference of wk along dir.
            double h = 1e-6;
            Eigen::VectorXd dr = dir.real();
            cdouble num = (wk.evaluate(phi + h * dr) - wk.evaluate(phi - h * dr)) / (2.0 * h);
            cdouble ana = lhs.evaluate(phi);
            CHECK(std::abs(num - ana) < 1e-4 * std::max(1.0, std::abs(ana)));
        }
        (void)wkm;
    }
}

TEST_CASE("exact derivative identity via pairing") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 3, 0.5);
    for (int k = 2; k <= 4; ++k) {
        auto wk = wick_power(p, k, f);
        auto wkm = wick_power(p, k - 1, f);
        // test direction supported at one site x0: <:Phi^k:^{(1)}, delta_x0>
        long x0 = 12;
        Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(lat->site_count());
        dir[x0] = 1.0;
        auto lhs = directional_derivative(wk, dir);
        // reference: k :Phi^{k-1}: smeared with f restricted to x0
        auto rhs = cdouble(double(k)) * wick_power(p, k - 1, bump(lat, x0, f[x0]));
        CHECK(functional_distance(lhs, rhs) < 1e-10);
        (void)wkm;
    }
}

TEST_CASE("hermiticity and phi=0 moments") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 5, 0.5);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(lat->site_count());
    const Eigen::MatrixXd& W = p.smooth();
    for (int k = 1; k <= 6; ++k) {
        auto wk = wick_power(p, k, f);
        // real smearing + real kernel: self-conjugate
        CHECK(functional_distance(wk.conjugate(), wk) < 1e-14);
        cdouble v = wk.evaluate(zero);
        if (k % 2 == 1) {
            CHECK(std::abs(v) == 0.0);
        } else {
            // (k-1)!! integral of [W]^{k/2} f dmu
            double ref = 0.0;
            for (long x = 0; x < lat->site_count(); ++x)
                ref += std::pow(W(x, x), k / 2) * f[x] * lat->volume_weight(x);
            ref *= factorial2(k - 1);
            CHECK(std::abs(v - ref) < 1e-8 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("equivariance under change of parametrix") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    const long N = lat->site_count();
    Eigen::MatrixXd S(N, N);
    for (long x = 0; x < N; ++x)
        for (long y = 0; y < N; ++y) S(x, y) = 0.03 * std::cos(0.7 * (x * 0.31 + y * 0.17));
    S = Eigen::MatrixXd(0.5 * (S + S.transpose()));
    Parametrix q = p.shifted(S);
    Eigen::VectorXd f = random_field(N, 9, 0.4);
    for (int k = 2; k <= 4; ++k) {
        // alpha_Q^P maps the P-ordered power into the Q-ordered algebra; the
        // classical functional underneath is the same, so
        // alpha_Q^P :Phi^k:_P = exp[Upsilon_{Q-P}] exp[Upsilon_{W_P}] phi^k
        //                     = exp[Upsilon_{W_Q}] phi^k = :Phi^k:_Q.
        auto mapped = change_of_parametrix(q, p, wick_power(p, k, f));
        CHECK(functional_distance(mapped, wick_power(q, k, f)) < 1e-10);
    }
}

TEST_CASE("ambiguity redefinition round-trip and locality of extracted constants") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 13, 0.5);
    for (long i = 0; i < lat->site_count(); ++i) f[i] += 1.1;  // keep support full
    std::map<int, double> c{{2, 0.8}, {3, -0.45}, {4, 0.21}};
    auto cand = redefine_wick_power(p, 4, f, c);
    auto got = extract_ambiguity(p, 4, f, cand);
    REQUIRE(got.size() == c.size());
    for (auto& [m, v] : c) CHECK(got.at(m) == doctest::Approx(v).epsilon(1e-12));
    // reconstruction agrees exactly
    CHECK(functional_distance(redefine_wick_power(p, 4, f, got), cand) < 1e-12);
    // trivial candidate extracts zeros
    auto zeros = extract_ambiguity(p, 3, f, wick_power(p, 3, f));
    for (auto& [m, v] : zeros) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("discrete Leibniz rule: exact for k=1, first order for k=2") {
    auto lat = build_lattice(geo(2), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 17, 0.3);
    Eigen::VectorXd phi = random_field(lat->site_count(), 18, 0.7);
    CHECK(leibniz_residual(p, 1, 0, f, phi) < 1e-13);

    // halving the spacing (doubling n at fixed extent) should halve the k=2
    // residual; compare smooth data: a single smooth field and smearing.
    auto smooth_data = [](const LatticePtr& l) {
        Eigen::VectorXd v(l->site_count()), w(l->site_count());
        const Eigen::MatrixXd& pos = l->coordinates();
        for (long i = 0; i < l->site_count(); ++i) {
            v[i] = std::sin(2.0 * M_PI * pos(i, 0) / 4.0) * std::cos(2.0 * M_PI * pos(i, 1) / 4.0);
            w[i] = 1.0 + 0.5 * std::cos(2.0 * M_PI * pos(i, 0) / 4.0);
        }
        return std::pair{v, w};
    };
    auto lat2 = build_lattice(geo(2), 16);
    Parametrix p2 = Parametrix::green(lat2);
    auto [phi1, f1] = smooth_data(lat);
    auto [phi2, f2] = smooth_data(lat2);
    double r1 = leibniz_residual(p, 2, 0, f1, phi1);
    double r2 = leibniz_residual(p2, 2, 0, f2, phi2);
    double ratio = r1 / r2;
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("almost-homogeneous scaling of Wick powers") {
    // D=3: kappa = k(D-2)/2 = k/2, no logs.
    auto g3 = geo(3, 1.0, 3.0);
    auto lat = build_lattice(g3, 6);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(lat->site_count());
    std::vector<double> lambdas, vals;
    for (int i = 0; i < 6; ++i) {
        double l = std::pow(2.0, -0.3 * i);
        lambdas.push_back(l);
        vals.push_back(scaled_wick_value(g3, 6, 2, f, l));
    }
    auto fit = fit_almost_homogeneous(lambdas, vals, 0);
    CHECK(fit.kappa == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.rel_residual < 1e-6);

    // D=2: kappa = 0 with a genuine log term for k=2.
    auto g2 = geo(2, 1.0, 4.0);
    auto lat2 = build_lattice(g2, 8);
    Eigen::VectorXd f2 = Eigen::VectorXd::Ones(lat2->site_count());
    std::vector<double> l2, v2;
    for (int i = 0; i < 6; ++i) {
        double l = std::pow(2.0, -0.4 * i);
        l2.push_back(l);
        v2.push_back(scaled_wick_value(g2, 8, 2, f2, l));
    }
    auto fit2 = fit_almost_homogeneous(l2, v2, 1);
    CHECK(std::abs(fit2.kappa) < 1e-6);
    CHECK(std::abs(fit2.log_coeffs[1]) > 1e-4);
    CHECK(fit2.rel_residual < 1e-6);
}
