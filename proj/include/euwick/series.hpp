#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace euwick {

/// Truncated formal power series with coefficients in T.  Arithmetic is
/// exact order-by-order; the truncation order of a combination is the
/// minimum of the operands'.
template <typename T>
class FormalSeries {
  public:
    FormalSeries() = default;
    explicit FormalSeries(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) {}

    int order() const { return static_cast<int>(coeffs_.size()) - 1; }
    const T& operator[](int n) const { return coeffs_.at(n); }
    T& operator[](int n) { return coeffs_.at(n); }
    const std::vector<T>& coefficients() const { return coeffs_; }

    FormalSeries truncated(int n) const {
        if (n > order()) throw std::invalid_argument("cannot extend a series by truncation");
        return FormalSeries(std::vector<T>(coeffs_.begin(), coeffs_.begin() + n + 1));
    }

    /// Cauchy product with a caller-supplied bilinear product on T.
    static FormalSeries product(const FormalSeries& a, const FormalSeries& b,
                                const std::function<T(const T&, const T&)>& mul) {
        int n = std::min(a.order(), b.order());
        std::vector<T> c(n + 1);
        for (int o = 0; o <= n; ++o) {
            bool first = true;
            for (int i = 0; i <= o; ++i) {
                T term = mul(a[i], b[o - i]);
                if (first) {
                    c[o] = term;
                    first = false;
                } else {
                    c[o] = c[o] + term;
                }
            }
        }
        return FormalSeries(std::move(c));
    }

    /// Multiplicative inverse given the inverse u of the leading coefficient
    /// in the supplied product (series with invertible head).
    static FormalSeries inverse(const FormalSeries& a, const T& head_inverse,
                                const std::function<T(const T&, const T&)>& mul) {
        int n = a.order();
        std::vector<T> c(n + 1);
        c[0] = head_inverse;
        for (int o = 1; o <= n; ++o) {
            // c_o = -u * sum_{i=1..o} a_i c_{o-i}
            T acc = mul(a[1], c[o - 1]);
            for (int i = 2; i <= o; ++i) acc = acc + mul(a[i], c[o - i]);
            c[o] = T{} - mul(head_inverse, acc);
        }
        return FormalSeries(std::move(c));
    }

    FormalSeries operator+(const FormalSeries& b) const {
        int n = std::min(order(), b.order());
        std::vector<T> c(n + 1);
        for (int o = 0; o <= n; ++o) c[o] = coeffs_[o] + b[o];
        return FormalSeries(std::move(c));
    }
    FormalSeries operator-(const FormalSeries& b) const {
        int n = std::min(order(), b.order());
        std::vector<T> c(n + 1);
        for (int o = 0; o <= n; ++o) c[o] = coeffs_[o] - b[o];
        return FormalSeries(std::move(c));
    }

  private:
    std::vector<T> coeffs_;
};

}  // namespace euwick
