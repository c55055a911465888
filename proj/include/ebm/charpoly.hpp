#pragma once

#include <cmath>
#include <compare>
#include <complex>
#include <concepts>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/polynomial.hpp"
#include "ebm/prony_model.hpp"

namespace ebm {

/// Spatial mode index k >= 1 with wavenumber 2k - 1 (from u = sin((2k-1)x)).
class ModeIndex {
public:
    explicit ModeIndex(int k) : k_(k) {
        if (k < 1) throw Error(ErrorCode::invalid_argument, "mode index k must be >= 1");
    }

    int value() const noexcept { return k_; }
    double wavenumber() const noexcept { return 2.0 * k_ - 1.0; }
    double wavenumber_sq() const noexcept { return wavenumber() * wavenumber(); }
    /// 1/(2k-1)^2, the leading coefficient of the mode-k polynomial.
    double inverse_wavenumber_sq() const noexcept { return 1.0 / wavenumber_sq(); }

    auto operator<=>(const ModeIndex&) const = default;

private:
    int k_;
};

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, complex>;

namespace detail {

inline double inverse_wavenumber_sq(std::optional<ModeIndex> k) noexcept {
    return k ? k->inverse_wavenumber_sq() : 0.0;
}

// Product-form evaluation of
//   (D + c lambda^2) prod_j (lambda + r_j) - sum_i b_i prod_{j != i} (lambda + r_j)
// with c = 1/(2k-1)^2, or c = 0 for the limit polynomial. Excluded products
// are formed directly so the value stays accurate at lambda = -r_i.
template <Scalar T>
T char_poly(const PronyModel& m, double c, T lambda) {
    const std::size_t n = m.size();
    const auto r = m.rates();
    const auto b = m.weights();
    T full = T(1.0);
    for (std::size_t j = 0; j < n; ++j) full *= lambda + r[j];
    T sum = T(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        T except = T(1.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) except *= lambda + r[j];
        sum += b[i] * except;
    }
    return (m.modulus() + c * lambda * lambda) * full - sum;
}

template <Scalar T>
T char_poly_derivative(const PronyModel& m, double c, T lambda) {
    const std::size_t n = m.size();
    const auto r = m.rates();
    const auto b = m.weights();

    T full = T(1.0);
    for (std::size_t j = 0; j < n; ++j) full *= lambda + r[j];

    // d/dlambda prod_j (lambda + r_j) = sum_l prod_{j != l}
    T dfull = T(0.0);
    for (std::size_t l = 0; l < n; ++l) {
        T except = T(1.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != l) except *= lambda + r[j];
        dfull += except;
    }

    // d/dlambda sum_i b_i prod_{j != i} = sum_i b_i sum_{l != i} prod_{j != i,l}
    T dsum = T(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        T inner = T(0.0);
        for (std::size_t l = 0; l < n; ++l) {
            if (l == i) continue;
            T except = T(1.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && j != l) except *= lambda + r[j];
            inner += except;
        }
        dsum += b[i] * inner;
    }
    return 2.0 * c * lambda * full + (m.modulus() + c * lambda * lambda) * dfull - dsum;
}

// Sum of the magnitudes of the product-form terms: the scale against which
// a computed value of the polynomial is compared when judging a root.
inline double char_poly_scale(const PronyModel& m, double c, complex lambda) {
    const std::size_t n = m.size();
    const auto r = m.rates();
    const auto b = m.weights();
    double full = 1.0;
    for (std::size_t j = 0; j < n; ++j) full *= std::abs(lambda + r[j]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double except = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) except *= std::abs(lambda + r[j]);
        sum += b[i] * except;
    }
    return (m.modulus() + c * std::norm(lambda)) * full + sum;
}

}  // namespace detail

/// P_N(lambda) = D prod (lambda + r_j) - sum b_i prod_{j != i} (lambda + r_j).
template <Scalar T>
T eval_limit_poly(const PronyModel& model, T lambda) {
    return detail::char_poly(model, 0.0, lambda);
}

/// P_N^k(lambda) = (D + lambda^2/(2k-1)^2) prod (lambda + r_j) - sum b_i prod_{j != i}.
template <Scalar T>
T eval_char_poly(const PronyModel& model, ModeIndex k, T lambda) {
    return detail::char_poly(model, k.inverse_wavenumber_sq(), lambda);
}

/// Analytic derivative of P_N (no k) or P_N^k.
template <Scalar T>
T eval_derivative(const PronyModel& model, T lambda, std::optional<ModeIndex> k = std::nullopt) {
    return detail::char_poly_derivative(model, detail::inverse_wavenumber_sq(k), lambda);
}

/// |P(lambda)| divided by the running magnitude of its product-form terms.
inline double scaled_residual(const PronyModel& model, std::optional<ModeIndex> k, complex lambda) {
    const double c = detail::inverse_wavenumber_sq(k);
    const double scale = detail::char_poly_scale(model, c, lambda);
    const double value = std::abs(detail::char_poly(model, c, lambda));
    return scale > 0.0 ? value / scale : value;
}

/// Secular function f_P(lambda) = D - sum b_i / (lambda + r_i), plus
/// lambda^2/(2k-1)^2 when a mode index is supplied.
inline double eval_secular(const PronyModel& model, double lambda,
                           std::optional<ModeIndex> k = std::nullopt) {
    double f = model.modulus() + detail::inverse_wavenumber_sq(k) * lambda * lambda;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double r = model.rate(i);
        const double gap = lambda + r;
        if (std::abs(gap) < 1e-13 * r) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "secular function evaluated at a pole: lambda = " << lambda << " is within "
                << std::abs(gap) << " of -r_" << (i + 1) << " = " << -r;
            throw Error(ErrorCode::pole, msg.str());
        }
        f -= model.weight(i) / gap;
    }
    return f;
}

enum class Expansion { compensated, plain };

/// Monomial coefficients (ascending) of P_N, or of P_N^k when k is given.
/// The product form stays the reference; this exists for the polynomial root
/// oracle and for the inverse recovery.
inline Polynomial expand_coefficients(const PronyModel& model, std::optional<ModeIndex> k = std::nullopt,
                                      Expansion mode = Expansion::compensated) {
    const std::size_t n = model.size();
    const double c = detail::inverse_wavenumber_sq(k);
    const std::size_t degree = k ? n + 2 : n;

    if (mode == Expansion::plain) {
        std::vector<double> full{1.0};
        for (std::size_t j = 0; j < n; ++j) {
            full.push_back(0.0);
            for (std::size_t i = full.size() - 1; i > 0; --i) full[i] = full[i - 1] + full[i] * model.rate(j);
            full[0] *= model.rate(j);
        }
        std::vector<double> out(degree + 1, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            out[i] += model.modulus() * full[i];
            if (k) out[i + 2] += c * full[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> except{1.0};
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                except.push_back(0.0);
                for (std::size_t t = except.size() - 1; t > 0; --t)
                    except[t] = except[t - 1] + except[t] * model.rate(j);
                except[0] *= model.rate(j);
            }
            for (std::size_t t = 0; t < except.size(); ++t) out[t] -= model.weight(i) * except[t];
        }
        return Polynomial(std::move(out));
    }

    using detail::DoubleDouble;
    detail::CompensatedPoly full;
    for (std::size_t j = 0; j < n; ++j) full.multiply_linear(model.rate(j));

    std::vector<DoubleDouble> out(degree + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out[i] = out[i] + full.terms()[i] * model.modulus();
        if (k) out[i + 2] = out[i + 2] + full.terms()[i] * c;
    }
    for (std::size_t i = 0; i < n; ++i) {
        detail::CompensatedPoly except;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) except.multiply_linear(model.rate(j));
        for (std::size_t t = 0; t < except.terms().size(); ++t)
            out[t] = out[t] + -(except.terms()[t] * model.weight(i));
    }
    std::vector<double> rounded(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) rounded[i] = out[i].value();
    return Polynomial(std::move(rounded));
}

}  // namespace ebm
