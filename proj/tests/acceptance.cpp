// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "euwick/extension.hpp"
#include "euwick/interacting.hpp"
#include "euwick/oracle.hpp"
#include "euwick/wick.hpp"

using namespace euwick;

namespace {

int g_failures = 0;

void report(int criterion, const char* what, bool ok, double value, double tol) {
    std::printf("%s  criterion %2d: %s (value %.3e, tolerance %.1e)\n", ok ? "PASS" : "FAIL",
                criterion, what, value, tol);
    if (!ok) ++g_failures;
}

BackgroundGeometry geo(int dim, double mass2, double extent) {
    BackgroundGeometry g;
    g.dim = dim;
    g.metric = Eigen::MatrixXd::Identity(dim, dim);
    g.covector_A = Eigen::VectorXd::Zero(dim);
    g.c_const = mass2;
    g.extent.assign(dim, extent);
    return g;
}

Eigen::VectorXd random_field(long n, unsigned seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, amp);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

Eigen::VectorXd bump(const LatticePtr& lat, long site, double amp = 1.0) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(lat->site_count());
    f[site] = amp;
    return f;
}

// ---------------------------------------------------------------- criterion 1
void criterion1() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);
    Parametrix p = Parametrix::green(lat);
    ContractionKernel P(lat, p.kernel(), true, "P");
    auto A = local_monomial(lat, 3, bump(lat, 5, 1.2));
    auto B = local_monomial(lat, 2, bump(lat, 20, -0.7)) + linear_field(lat, bump(lat, 9));
    auto C = local_monomial(lat, 2, bump(lat, 33, 0.4));

    double comm = functional_distance(star_product(A, B, P), star_product(B, A, P));
    double assoc = functional_distance(star_product(star_product(A, B, P), C, P),
                                       star_product(A, star_product(B, C, P), P));

    const long N = lat->site_count();
    auto smooth = [&](double amp, double freq) {
        Eigen::MatrixXd S(N, N);
        for (long x = 0; x < N; ++x)
            for (long y = 0; y < N; ++y) S(x, y) = amp * std::cos(freq * (x * 0.31 + y * 0.17));
        return Eigen::MatrixXd(0.5 * (S + S.transpose()));
    };
    Parametrix q = p.shifted(smooth(0.05, 1.0));
    Parametrix r = p.shifted(smooth(0.02, 2.3));
    ContractionKernel Q(lat, q.kernel(), true, "Q");
    double hom = functional_distance(
        change_of_parametrix(p, q, star_product(A, B, Q)),
        star_product(change_of_parametrix(p, q, A), change_of_parametrix(p, q, B), P));
    double cocycle = functional_distance(
        change_of_parametrix(p, q, change_of_parametrix(q, r, A)),
        change_of_parametrix(p, r, A));
    auto Ac = cdouble{0.5, 1.5} * A;
    auto Bc = cdouble{0.0, -2.0} * linear_field(lat, bump(lat, 30));
    double invol =
        std::max(functional_distance(star_product(Ac, Bc, P).conjugate(),
                                     star_product(Ac.conjugate(), Bc.conjugate(), P)),
                 functional_distance(Ac.conjugate().conjugate(), Ac));

    report(1, "star-product commutativity", comm < 1e-12, comm, 1e-12);
    report(1, "star-product associativity", assoc < 1e-10, assoc, 1e-10);
    double alpha = std::max(hom, cocycle);
    report(1, "parametrix-change homomorphism and cocycle", alpha < 1e-12, alpha, 1e-12);
    report(1, "involution laws", invol < 1e-14, invol, 1e-14);
}

// ---------------------------------------------------------------- criterion 2
void criterion2() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);  // N = 64
    Eigen::MatrixXd green = exact_green_kernel(*lat);
    ContractionKernel G(lat, green, true, "green");
    std::vector<PolynomialFunctional> Ls;
    for (int i = 0; i < 6; ++i) Ls.push_back(linear_field(lat, random_field(lat->site_count(), 100 + i)));
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(lat->site_count());
    double worst = 0.0;
    for (int deg : {2, 3, 4, 5, 6}) {
        PolynomialFunctional prod = Ls[0];
        PolynomialFunctional classical = Ls[0];
        for (int i = 1; i < deg; ++i) {
            prod = star_product(prod, Ls[i], G);
            classical = pointwise_product(classical, Ls[i]);
        }
        cdouble star_val = prod.evaluate(zero);
        cdouble oracle = isserlis_moment(classical, green);
        worst = std::max(worst,
                         std::abs(star_val - oracle) / std::max(1.0, std::abs(oracle)));
    }
    report(2, "Gaussian moments vs Isserlis enumeration, degrees 2..6", worst < 1e-12, worst,
           1e-12);
}

// ---------------------------------------------------------------- criterion 3
void criterion3() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);
    Parametrix p = Parametrix::green(lat);
    const long N = lat->site_count();
    Eigen::VectorXd f = random_field(N, 3, 0.5);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(N);

    double deriv = 0.0;
    for (int k = 2; k <= 4; ++k) {
        long x0 = 12;
        Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(N);
        dir[x0] = 1.0;
        auto lhs = directional_derivative(wick_power(p, k, f), dir);
        auto rhs = cdouble(double(k)) * wick_power(p, k - 1, bump(lat, x0, f[x0]));
        deriv = std::max(deriv, functional_distance(lhs, rhs));
    }

    double herm = 0.0, oddv = 0.0, evenv = 0.0;
    const Eigen::MatrixXd& W = p.smooth();
    for (int k = 1; k <= 6; ++k) {
        auto wk = wick_power(p, k, f);
        herm = std::max(herm, functional_distance(wk.conjugate(), wk));
        cdouble v = wk.evaluate(zero);
        if (k % 2 == 1) {
            oddv = std::max(oddv, std::abs(v));
        } else {
            double dblfact = 1.0;
            for (int m = k - 1; m > 1; m -= 2) dblfact *= m;
            double ref = 0.0;
            for (long x = 0; x < N; ++x)
                ref += std::pow(W(x, x), k / 2) * f[x] * lat->volume_weight(x);
            ref *= dblfact;
            evenv = std::max(evenv, std::abs(v - ref) / std::max(1.0, std::abs(ref)));
        }
    }

    Eigen::MatrixXd S(N, N);
    for (long x = 0; x < N; ++x)
        for (long y = 0; y < N; ++y) S(x, y) = 0.03 * std::cos(0.7 * (x * 0.31 + y * 0.17));
    S = Eigen::MatrixXd(0.5 * (S + S.transpose()));
    Parametrix q = p.shifted(S);
    double equiv = 0.0;
    for (int k = 2; k <= 4; ++k)
        equiv = std::max(equiv, functional_distance(
                                    change_of_parametrix(q, p, wick_power(p, k, f)),
                                    wick_power(q, k, f)));

    report(3, "derivative axiom for normal-ordered powers, k <= 4", deriv < 1e-10, deriv, 1e-10);
    report(3, "hermiticity of normal-ordered powers", herm < 1e-14, herm, 1e-14);
    report(3, "odd-power vacuum values vanish", oddv == 0.0, oddv, 0.0);
    report(3, "even-power vacuum values vs coincidence moments", evenv < 1e-8, evenv, 1e-8);
    report(3, "equivariance under affine parametrix shifts", equiv < 1e-10, equiv, 1e-10);
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
    // D = 3: dimension k (D-2)/2 = k/2, no logs.
    auto g3 = geo(3, 1.0, 3.0);
    auto lat3 = build_lattice(g3, 6);
    Eigen::VectorXd f3 = Eigen::VectorXd::Ones(lat3->site_count());
    std::vector<double> lam3, val3;
    for (int i = 0; i < 6; ++i) {
        double l = std::pow(2.0, -0.3 * i);
        lam3.push_back(l);
        val3.push_back(scaled_wick_value(g3, 6, 2, f3, l));
    }
    auto fit3 = fit_almost_homogeneous(lam3, val3, 0);
    double err3 = std::abs(fit3.kappa - 1.0);
    report(4, "scaling dimension of the quadratic power, D=3 (no logs)",
           err3 < 1e-6 && fit3.rel_residual < 1e-6, err3, 1e-6);

    // D = 4: dimension k, with a genuine log term.
    auto g4 = geo(4, 1.0, 3.0);
    auto lat4 = build_lattice(g4, 6);
    Eigen::VectorXd f4 = Eigen::VectorXd::Ones(lat4->site_count());
    std::vector<double> lam4, val4;
    for (int i = 0; i < 6; ++i) {
        double l = std::pow(2.0, -0.3 * i);
        lam4.push_back(l);
        val4.push_back(scaled_wick_value(g4, 6, 2, f4, l));
    }
    auto fit4 = fit_almost_homogeneous(lam4, val4, 1);
    double err4 = std::abs(fit4.kappa - 2.0);
    bool ok4 = err4 < 1e-6 && std::abs(fit4.log_coeffs[1]) > 1e-6 && fit4.rel_residual < 1e-6;
    report(4, "scaling dimension of the quadratic power, D=4 (log detected)", ok4, err4, 1e-6);
}

// ---------------------------------------------------------------- criterion 5
void criterion5() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);
    Parametrix p = Parametrix::green(lat);
    Eigen::VectorXd f = random_field(lat->site_count(), 13, 0.5);
    for (long i = 0; i < lat->site_count(); ++i) f[i] += 1.1;
    std::map<int, double> c{{2, 0.8}, {3, -0.45}, {4, 0.21}};
    auto cand = redefine_wick_power(p, 4, f, c);
    auto got = extract_ambiguity(p, 4, f, cand);
    double worst = 1.0;
    if (got.size() == c.size()) {
        worst = 0.0;
        for (auto& [m, v] : c) worst = std::max(worst, std::abs(got.at(m) - v));
    }
    report(5, "ambiguity constants recovered from a redefined power", worst < 1e-12, worst,
           1e-12);

    // field-independence: extraction with a different smearing yields the
    // same constants (their first functional derivative vanishes)
    Eigen::VectorXd f2 = random_field(lat->site_count(), 14, 0.4);
    for (long i = 0; i < lat->site_count(); ++i) f2[i] += 1.4;
    auto cand2 = redefine_wick_power(p, 4, f2, c);
    auto got2 = extract_ambiguity(p, 4, f2, cand2);
    double drift = 0.0;
    for (auto& [m, v] : got) drift = std::max(drift, std::abs(v - got2.at(m)));
    report(5, "extracted constants independent of the smearing", drift < 1e-10, drift, 1e-10);
}

// ---------------------------------------------------------------- criterion 6
void criterion6() {
    // D = 3, fixed extent, n = 6, 12, 24.
    auto g3 = geo(3, 1.0, 3.0);
    std::vector<double> as, gdiag, wdiag;
    for (int n : {6, 12, 24}) {
        auto lat = build_lattice(g3, n);
        as.push_back(lat->spacing()[0]);
        gdiag.push_back(spectral_green_entry(*lat, 0, 0));
        HadamardExpansion h = fit_hadamard(*lat, 3, 1.0);
        wdiag.push_back(coincidence_smooth_spectral(*lat, h, 0));
    }
    // successive differences isolate the divergent part: d ~ a^{-1}
    double d1 = gdiag[1] - gdiag[0];
    double d2 = gdiag[2] - gdiag[1];
    double rate = -std::log2(d2 / d1);  // divergence exponent of P(x,x)
    report(6, "diagonal divergence rate of P(x,x), D=3", std::abs(rate + 1.0) < 0.1, rate, 0.1);

    double w1 = std::abs(wdiag[1] - wdiag[0]);
    double w2 = std::abs(wdiag[2] - wdiag[1]);
    double wrate = std::log2(w1 / w2);
    report(6, "coincidence smooth part converges under refinement, D=3", wrate > 0.0, wrate,
           0.0);

    // D = 2: diagonal diverges like log(1/a).
    auto g2 = geo(2, 1.0, 4.0);
    std::vector<double> xs, ys;
    for (int n : {8, 16, 32, 64}) {
        auto lat = build_lattice(g2, n);
        xs.push_back(std::log(1.0 / lat->spacing()[0]));
        ys.push_back(spectral_green_entry(*lat, 0, 0));
    }
    PolyFit fit = polyfit(xs, ys, 1);
    report(6, "logarithmic diagonal divergence, D=2 (R^2 of log fit)", fit.r_squared > 0.99,
           fit.r_squared, 0.99);
}

// ---------------------------------------------------------------- criterion 7
void criterion7() {
    // integrable case: grid pairing matches the radial quadrature oracle
    RadialKernel k{1.3, 2.0, 0, 3};
    auto f = [](const Eigen::VectorXd& y) { return std::exp(-y.squaredNorm()); };
    double grid = extrapolated_pair(k, 20, 0.25, f, 0.8, 4);
    double oracle = radial_quadrature(k, [](double r) { return std::exp(-r * r); }, 5.0);
    double qerr = std::abs(grid - oracle) / std::abs(oracle);
    double grid2 = extrapolated_pair(k, 20, 0.25, f, 1.6, 4);
    double werr = std::abs(grid2 - grid) / std::abs(grid);
    report(7, "integrable kernel matches quadrature oracle", qerr < 1e-6, qerr, 1e-6);
    report(7, "integrable-kernel value independent of the weight", werr < 1e-8, werr, 1e-8);

    // borderline case: r^-4 in 4 relative dimensions; the weight dependence
    // is a pure counterterm c * f(0)
    RadialKernel crit{1.0, 4.0, 0, 4};
    std::vector<std::function<double(const Eigen::VectorXd&)>> fs = {
        [](const Eigen::VectorXd& y) { return std::exp(-y.squaredNorm()); },
        [](const Eigen::VectorXd& y) { return 0.6 * std::exp(-0.5 * y.squaredNorm()); },
        [](const Eigen::VectorXd& y) {
            return 1.7 * std::exp(-y.squaredNorm()) * (1.0 + 0.4 * y[0] * y[1]);
        },
        [](const Eigen::VectorXd& y) { return -0.9 * std::exp(-2.0 * y.squaredNorm()); }};
    std::vector<double> shifts, f0s;
    for (auto& fn : fs) {
        double v1 = extend(crit, 10, 0.3, fn, 0.6).value;
        double v2 = extend(crit, 10, 0.3, fn, 1.2).value;
        shifts.push_back(v2 - v1);
        f0s.push_back(fn(Eigen::VectorXd::Zero(4)));
    }
    // least squares for shift = c * f(0); report the relative residual
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < fs.size(); ++i) {
        num += shifts[i] * f0s[i];
        den += f0s[i] * f0s[i];
    }
    double cfit = num / den;
    double resid = 0.0, scale = 0.0;
    for (size_t i = 0; i < fs.size(); ++i) {
        resid = std::max(resid, std::abs(shifts[i] - cfit * f0s[i]));
        scale = std::max(scale, std::abs(shifts[i]));
    }
    double rel = resid / scale;
    report(7, "borderline kernel: weight dependence fits c*f(0)", rel < 1e-6, rel, 1e-6);
}

// ---------------------------------------------------------------- criterion 8
void criterion8() {
    auto g2 = geo(2, 1.0, 4.0);
    auto lat = build_lattice(g2, 8);
    auto lat2 = build_lattice(g2, 16);
    Parametrix p = Parametrix::green(lat);
    Parametrix p2 = Parametrix::green(lat2);

    Eigen::VectorXd f = random_field(lat->site_count(), 17, 0.3);
    Eigen::VectorXd phi = random_field(lat->site_count(), 18, 0.7);
    double r1lin = leibniz_residual(p, 1, 0, f, phi);
    report(8, "discrete Leibniz rule exact for the linear power", r1lin < 1e-13, r1lin, 1e-13);

    auto smooth_data = [](const LatticePtr& l) {
        Eigen::VectorXd v(l->site_count()), w(l->site_count());
        const Eigen::MatrixXd& pos = l->coordinates();
        for (long i = 0; i < l->site_count(); ++i) {
            v[i] = std::sin(2.0 * M_PI * pos(i, 0) / 4.0) * std::cos(2.0 * M_PI * pos(i, 1) / 4.0);
            w[i] = 1.0 + 0.5 * std::cos(2.0 * M_PI * pos(i, 0) / 4.0);
        }
        return std::pair{v, w};
    };
    auto [phi1, f1] = smooth_data(lat);
    auto [phi2, f2] = smooth_data(lat2);
    double ratio = leibniz_residual(p, 2, 0, f1, phi1) / leibniz_residual(p2, 2, 0, f2, phi2);
    report(8, "quadratic-power Leibniz residual halves with the spacing",
           std::abs(ratio - 2.0) < 0.4, ratio, 0.4);
}

// ---------------------------------------------------------------- criterion 9
void criterion9() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);
    Parametrix p = Parametrix::green(lat);
    ContractionKernel P(lat, p.kernel(), true, "P");
    const long N = lat->site_count();

    // V = 0 identity
    auto F0 = local_monomial(lat, 3, random_field(N, 4, 0.5));
    auto R0 = moller_map(F0, PolynomialFunctional(lat), P, p.kernel(), 3);
    double vid = functional_distance(R0.coefficients()[0], F0);
    for (int n = 1; n <= 3; ++n) vid = std::max(vid, R0.coefficients()[n].coeff_norm());
    report(9, "Moeller map with V=0 is the identity", vid < 1e-14, vid, 1e-14);

    // Born step
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(N);
    rho[10] = 0.8;
    rho[11] = -0.5;
    rho[18] = 0.3;
    Eigen::VectorXd f = random_field(N, 6, 0.7);
    auto V = cdouble(0.5) * local_monomial(lat, 2, rho);
    auto RB = moller_map(linear_field(lat, f), V, P, p.kernel(), 2);
    Eigen::VectorXd h = rho.cwiseProduct(p.kernel() * f.cwiseProduct(lat->volume_weight()).eval());
    double born = functional_distance(RB.coefficients()[1], linear_field(lat, h));
    report(9, "Born-series first-order term", born < 1e-10, born, 1e-10);

    // intertwiner at orders <= 2
    Eigen::MatrixXd E = elliptic_operator(*lat);
    Eigen::VectorXd hw =
        (E.transpose() * f.cwiseProduct(lat->volume_weight()).eval()).cwiseQuotient(
            lat->volume_weight());
    auto RF = moller_map(linear_field(lat, hw), V, P, p.kernel(), 3);
    auto RV1 = moller_map(linear_field(lat, rho.cwiseProduct(f)), V, P, p.kernel(), 3);
    double inter = functional_distance(RF.coefficients()[0], linear_field(lat, hw));
    for (int n = 1; n <= 2; ++n)
        inter = std::max(inter,
                         functional_distance(RF.coefficients()[n], RV1.coefficients()[n - 1]));
    report(9, "intertwiner identity through order 2", inter < 1e-10, inter, 1e-10);

    // order-1 two-point function vs Monte Carlo at 1e5 samples
    Eigen::VectorXd g = random_field(N, 15, 0.5);
    auto F2 = pointwise_product(linear_field(lat, f), linear_field(lat, g));
    auto R2 = moller_map(F2, V, P, p.kernel(), 1);
    double order1 = R2.coefficients()[1].evaluate(Eigen::VectorXd::Zero(N)).real();
    GaussianSampler sampler(p.kernel(), 20240711);
    const long samples = 100000;
    std::vector<double> prod(samples);
    double mean_f = 0.0, mean_v = 0.0;
    std::vector<double> fv(samples), vv(samples);
    for (long i = 0; i < samples; ++i) {
        Eigen::VectorXd phi = sampler.sample();
        fv[i] = F2.evaluate(phi).real();
        vv[i] = V.evaluate(phi).real();
        mean_f += fv[i];
        mean_v += vv[i];
    }
    mean_f /= samples;
    mean_v /= samples;
    double cov = 0.0, var = 0.0;
    for (long i = 0; i < samples; ++i) {
        double q = (fv[i] - mean_f) * (vv[i] - mean_v);
        cov += q;
    }
    cov /= samples;
    for (long i = 0; i < samples; ++i) {
        double q = (fv[i] - mean_f) * (vv[i] - mean_v) - cov;
        var += q * q;
    }
    double se = std::sqrt(var) / samples;
    double sigmas = std::abs(cov - order1) / se;
    report(9, "first-order two-point function within 3 sigma of Monte Carlo", sigmas < 3.0,
           sigmas, 3.0);
}

// --------------------------------------------------------------- criterion 10
void criterion10() {
    auto lat = build_lattice(geo(2, 1.0, 4.0), 8);
    Parametrix p = Parametrix::green(lat);
    const long N = lat->site_count();
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(N);
    rho[10] = 0.8;
    rho[11] = -0.5;
    rho[18] = 0.3;
    SmoothFamily fam = SmoothFamily::scalar_polynomial(lat->geometry(), {rho});
    auto kernels = perturbative_parametrix(p, fam, 2);

    std::vector<double> ls, lr;
    for (double s : {0.04, 0.02, 0.01, 0.005}) {
        ls.push_back(std::log(s));
        lr.push_back(std::log(perturbative_residual(p, fam, kernels, s)));
    }
    double slope = polyfit(ls, lr, 1).coeffs[1];
    report(10, "order-2 perturbative parametrix residual is O(s^3)",
           std::abs(slope - 3.0) < 0.2, slope, 0.2);

    ContractionKernel P(lat, p.kernel(), true, "P");
    auto A = local_monomial(lat, 2, random_field(N, 23, 0.4));
    auto B = pointwise_product(linear_field(lat, random_field(N, 21, 0.5)),
                               linear_field(lat, random_field(N, 22, 0.5)));
    auto lhs = beta_map(star_product(A, B, P), p, kernels, 1);
    auto rhs =
        series_star_graded(beta_map(A, p, kernels, 1), beta_map(B, p, kernels, 1), p, kernels, 1);
    double hom = 0.0;
    for (int o = 0; o <= 1; ++o) hom = std::max(hom, functional_distance(lhs[o], rhs[o]));
    report(10, "beta map is an order-1 homomorphism", hom < 1e-10, hom, 1e-10);

    auto lat3 = build_lattice(geo(3, 1.0, 3.0), 6);
    Parametrix p3 = Parametrix::green(lat3);
    Eigen::VectorXd rho3 = Eigen::VectorXd::Zero(lat3->site_count());
    rho3[7] = 1.0;
    rho3[8] = -0.6;
    auto rep = ppa_check(p3, rho3);
    report(10, "perturbative-agreement residual vanishes outside supp(rho)",
           rep.max_outside_support < 1e-12, rep.max_outside_support, 1e-12);
    report(10, "perturbative-agreement kernel matches the spectral oracle",
           rep.spectral_oracle_error < 1e-6, rep.spectral_oracle_error, 1e-6);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (g_failures == 0) {
        std::printf("ALL CRITERIA PASSED\n");
        return 0;
    }
    std::printf("%d CHECK(S) FAILED\n", g_failures);
    return 1;
}
