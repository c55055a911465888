#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

/// Dense real polynomial in the monomial basis, coefficients in ascending
/// powers. The leading coefficient is always nonzero.
class Polynomial {
public:
    explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
        if (coeffs_.empty())
            throw Error(ErrorCode::invalid_argument, "polynomial needs at least one coefficient");
        if (coeffs_.back() == 0.0 || !std::isfinite(coeffs_.back()))
            throw Error(ErrorCode::invalid_argument, "polynomial leading coefficient must be nonzero");
    }

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_.at(i); }
    double leading() const noexcept { return coeffs_.back(); }

    /// Horner evaluation; T is double or std::complex<double>.
    template <class T>
    T operator()(T x) const {
        T acc = T(coeffs_.back());
        for (std::size_t i = coeffs_.size() - 1; i-- > 0;) acc = acc * x + T(coeffs_[i]);
        return acc;
    }

    /// Value and first derivative in a single Horner sweep.
    template <class T>
    std::pair<T, T> value_and_derivative(T x) const {
        T p = T(coeffs_.back());
        T dp = T(0.0);
        for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
            dp = dp * x + p;
            p = p * x + T(coeffs_[i]);
        }
        return {p, dp};
    }

    /// sum |c_i| |x|^i. Evaluated at max(1, |z|) it is the denominator of
    /// the backward-error residual, which stays meaningful at z = 0.
    double magnitude(double abs_x) const noexcept {
        double acc = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * abs_x + std::abs(coeffs_[i]);
        return acc;
    }

    Polynomial derivative() const {
        if (degree() == 0)
            throw Error(ErrorCode::invalid_argument, "derivative of a constant is not representable");
        std::vector<double> d(degree());
        for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
        return Polynomial(std::move(d));
    }

private:
    std::vector<double> coeffs_;
};

/// Quotient of a synthetic division by (x - root) plus the relative size of
/// the discarded remainder.
struct Deflation {
    Polynomial quotient;
    double remainder = 0.0;
    double relative_remainder = 0.0;
};

/// Forward (top-down) synthetic division by the linear factor (x - root).
inline Deflation deflate(const Polynomial& p, double root) {
    if (p.degree() == 0)
        throw Error(ErrorCode::invalid_argument, "cannot deflate a constant polynomial");
    const auto c = p.coeffs();
    const std::size_t n = p.degree();
    std::vector<double> q(n);
    double carry = c[n];
    for (std::size_t i = n; i-- > 0;) {
        q[i] = carry;
        carry = c[i] + root * carry;
    }
    const double scale = p.magnitude(std::max(1.0, std::abs(root)));
    return {Polynomial(std::move(q)), carry, scale > 0.0 ? std::abs(carry) / scale : 0.0};
}

namespace detail {

/// Ascending-coefficient product accumulated in double-double.
class CompensatedPoly {
public:
    CompensatedPoly() : c_{DoubleDouble{1.0, 0.0}} {}
    explicit CompensatedPoly(std::vector<DoubleDouble> c) : c_(std::move(c)) {}

    /// Multiply by (x + shift).
    void multiply_linear(double shift) {
        c_.push_back(DoubleDouble{});
        for (std::size_t i = c_.size() - 1; i > 0; --i) c_[i] = c_[i - 1] + c_[i] * shift;
        c_[0] = c_[0] * shift;
    }

    /// Multiply by (x^2 + linear x + constant).
    void multiply_quadratic(double linear, double constant) {
        std::vector<DoubleDouble> out(c_.size() + 2);
        for (std::size_t i = 0; i < c_.size(); ++i) {
            out[i] = out[i] + c_[i] * constant;
            out[i + 1] = out[i + 1] + c_[i] * linear;
            out[i + 2] = out[i + 2] + c_[i];
        }
        c_ = std::move(out);
    }

    void scale(double s) {
        for (auto& x : c_) x = x * s;
    }

    std::vector<DoubleDouble>& terms() noexcept { return c_; }
    const std::vector<DoubleDouble>& terms() const noexcept { return c_; }

    std::vector<double> rounded() const {
        std::vector<double> out(c_.size());
        for (std::size_t i = 0; i < c_.size(); ++i) out[i] = c_[i].value();
        return out;
    }

private:
    std::vector<DoubleDouble> c_;
};

}  // namespace detail

}  // namespace ebm
