#include "euwick/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace euwick {

cdouble isserlis_sum(int n, const std::function<cdouble(int, int)>& weight) {
    if (n % 2 != 0) return 0.0;
    std::vector<int> alive;
    for (int i = 0; i < n; ++i) alive.push_back(i);
    std::function<cdouble(std::vector<int>&)> rec = [&](std::vector<int>& rem) -> cdouble {
        if (rem.empty()) return 1.0;
        int first = rem.front();
        cdouble acc = 0.0;
        for (size_t j = 1; j < rem.size(); ++j) {
            std::vector<int> next;
            for (size_t i = 1; i < rem.size(); ++i)
                if (i != j) next.push_back(rem[i]);
            acc += weight(first, rem[j]) * rec(next);
        }
        return acc;
    };
    return rec(alive);
}

cdouble isserlis_moment(const PolynomialFunctional& f, const Eigen::MatrixXd& covariance) {
    // Slot-extended covariance entries on demand: factors live in jet-slot
    // space, the covariance is given between site values; gradient slots pick
    // up centered differences of the covariance.
    const auto& lat = *f.lattice();
    const int nj = f.jet_components();
    auto diff = [&](const Eigen::VectorXd& col, long x, int a) -> double {
        if (a == 0) return col[x];
        long p = lat.neighbor(x, a - 1, +1), m = lat.neighbor(x, a - 1, -1);
        double vp = p >= 0 ? col[p] : 0.0;
        double vm = m >= 0 ? col[m] : 0.0;
        return (vp - vm) / (2.0 * lat.spacing()[a - 1]);
    };
    auto slot_cov = [&](long s, long t) -> double {
        long x = s / nj, y = t / nj;
        int a = static_cast<int>(s % nj), b = static_cast<int>(t % nj);
        if (b == 0) return diff(covariance.col(y), x, a);
        long p = lat.neighbor(y, b - 1, +1), m = lat.neighbor(y, b - 1, -1);
        double vp = p >= 0 ? diff(covariance.col(p), x, a) : 0.0;
        double vm = m >= 0 ? diff(covariance.col(m), x, a) : 0.0;
        return (vp - vm) / (2.0 * lat.spacing()[b - 1]);
    };
    auto factor_cov = [&](const Factor& u, const Factor& w) -> cdouble {
        if (u.is_basis() && w.is_basis()) return slot_cov(u.basis, w.basis);
        cdouble acc = 0.0;
        if (u.is_basis()) {
            for (long t = 0; t < w.dense.size(); ++t)
                if (w.dense[t] != cdouble{}) acc += w.dense[t] * slot_cov(u.basis, t);
            return acc;
        }
        if (w.is_basis()) {
            for (long s = 0; s < u.dense.size(); ++s)
                if (u.dense[s] != cdouble{}) acc += u.dense[s] * slot_cov(s, w.basis);
            return acc;
        }
        for (long s = 0; s < u.dense.size(); ++s) {
            if (u.dense[s] == cdouble{}) continue;
            for (long t = 0; t < w.dense.size(); ++t)
                if (w.dense[t] != cdouble{}) acc += u.dense[s] * w.dense[t] * slot_cov(s, t);
        }
        return acc;
    };
    cdouble total = 0.0;
    for (const auto& term : f.terms()) {
        auto weight = [&](int i, int j) {
            return factor_cov(term.factors[i], term.factors[j]);
        };
        total += term.coeff * isserlis_sum(term.degree(), weight);
    }
    return total;
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& covariance, unsigned long seed)
    : rng_(seed) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
    Eigen::VectorXd ev = es.eigenvalues();
    for (long i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-10 * std::abs(ev.maxCoeff()))
            throw std::invalid_argument("covariance is not positive semi-definite");
        ev[i] = std::sqrt(std::max(ev[i], 0.0));
    }
    root_ = es.eigenvectors() * ev.asDiagonal();
}

Eigen::VectorXd GaussianSampler::sample() {
    Eigen::VectorXd z(root_.cols());
    for (long i = 0; i < z.size(); ++i) z[i] = normal_(rng_);
    return root_ * z;
}

McEstimate mc_expectation(const PolynomialFunctional& f, const Eigen::MatrixXd& covariance,
                          long samples, unsigned long seed) {
    GaussianSampler sampler(covariance, seed);
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < samples; ++i) {
        double v = f.evaluate(sampler.sample()).real();
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / samples;
    double var = std::max(0.0, sum2 / samples - mean * mean);
    return {mean, std::sqrt(var / samples), samples};
}

namespace {

double simpson_panel(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_panel(f, a, fa, m, fm, lm, flm);
    double right = simpson_panel(f, m, fm, b, fb, rm, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson_panel(f, a, fa, b, fb, m, fm);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

PolyFit polyfit(const std::vector<double>& xs, const std::vector<double>& ys, int deg) {
    const int n = static_cast<int>(xs.size());
    Eigen::MatrixXd V(n, deg + 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j <= deg; ++j) {
            V(i, j) = p;
            p *= xs[i];
        }
        y[i] = ys[i];
    }
    PolyFit fit;
    fit.coeffs = V.colPivHouseholderQr().solve(y);
    Eigen::VectorXd r = V * fit.coeffs - y;
    fit.rms_residual = std::sqrt(r.squaredNorm() / n);
    double mean = y.mean();
    double ss_tot = (y.array() - mean).square().sum();
    fit.r_squared = ss_tot > 0.0 ? 1.0 - r.squaredNorm() / ss_tot : 1.0;
    return fit;
}

double golden_minimize(const std::function<double(double)>& f, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double free_space_green(int dim, double mass, double r) {
    using std::numbers::pi;
    if (r <= 0.0) throw std::invalid_argument("free-space Green needs r > 0");
    switch (dim) {
        case 2:
            if (mass == 0.0) return -std::log(r) / (2.0 * pi);
            return std::cyl_bessel_k(0, mass * r) / (2.0 * pi);
        case 3:
            return std::exp(-mass * r) / (4.0 * pi * r);
        case 4:
            if (mass == 0.0) return 1.0 / (4.0 * pi * pi * r * r);
            return mass * std::cyl_bessel_k(1, mass * r) / (4.0 * pi * pi * r);
        default:
            throw std::invalid_argument("free-space Green supports dimensions 2..4");
    }
}

double richardson_derivative(const std::function<double(double)>& f, double x, int order,
                             double h) {
    auto fd = [&](double step) {
        if (order == 1) return (f(x + step) - f(x - step)) / (2.0 * step);
        if (order == 2) return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
        throw std::invalid_argument("richardson_derivative supports order 1 or 2");
    };
    double d1 = fd(h), d2 = fd(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace euwick
