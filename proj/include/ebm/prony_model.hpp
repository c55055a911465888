#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebm/error.hpp"

namespace ebm {

/// Kohlrausch relaxation exp(-(t/tau)^beta).
struct StretchedExponential {
    double tau = 1.0;
    double beta = 0.5;

    static StretchedExponential create(double tau, double beta) {
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw Error(ErrorCode::invalid_argument, "stretched exponential needs tau > 0");
        if (!(beta > 0.0 && beta < 1.0))
            throw Error(ErrorCode::invalid_argument, "stretched exponential needs 0 < beta < 1");
        return {tau, beta};
    }

    double operator()(double t) const { return std::exp(-std::pow(t / tau, beta)); }
};

/// Extended Burgers relaxation model: rates r_i, weights b_i = s_i r_i and
/// an independent instantaneous modulus D. Immutable once built.
class PronyModel {
public:
    static PronyModel create(std::vector<double> rates, std::vector<double> weights,
                             double instantaneous_modulus) {
        if (rates.empty())
            throw Error(ErrorCode::invalid_model, "model needs at least one Prony term (N >= 1)");
        if (rates.size() != weights.size())
            throw Error(ErrorCode::invalid_model, "rate and weight lists differ in length");
        for (std::size_t i = 0; i < rates.size(); ++i) {
            if (!(rates[i] > 0.0) || !std::isfinite(rates[i]))
                throw Error(ErrorCode::invalid_model,
                            "rate r_" + std::to_string(i + 1) + " must be positive and finite");
            if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
                throw Error(ErrorCode::invalid_model,
                            "weight b_" + std::to_string(i + 1) + " must be positive and finite");
            if (i > 0 && !(rates[i] > rates[i - 1]))
                throw Error(ErrorCode::invalid_model, "rates must be strictly increasing");
        }
        if (!(instantaneous_modulus > 0.0) || !std::isfinite(instantaneous_modulus))
            throw Error(ErrorCode::invalid_model, "instantaneous modulus D must be positive");

        PronyModel m;
        m.strengths_.resize(rates.size());
        for (std::size_t i = 0; i < rates.size(); ++i) {
            m.strengths_[i] = weights[i] / rates[i];
            m.h_ += m.strengths_[i];
        }
        m.rates_ = std::move(rates);
        m.weights_ = std::move(weights);
        m.modulus_ = instantaneous_modulus;
        return m;
    }

    std::size_t size() const noexcept { return rates_.size(); }
    std::span<const double> rates() const noexcept { return rates_; }
    std::span<const double> weights() const noexcept { return weights_; }
    /// s_i = b_i / r_i.
    std::span<const double> strengths() const noexcept { return strengths_; }
    double rate(std::size_t i) const { return rates_.at(i); }
    double weight(std::size_t i) const { return weights_.at(i); }
    double modulus() const noexcept { return modulus_; }
    /// h = sum b_i / r_i, the value of the Prony series at t = 0.
    double h() const noexcept { return h_; }
    double weight_sum() const noexcept {
        double s = 0.0;
        for (double b : weights_) s += b;
        return s;
    }
    double max_rate() const noexcept { return rates_.back(); }

private:
    PronyModel() = default;

    std::vector<double> rates_;
    std::vector<double> weights_;
    std::vector<double> strengths_;
    double modulus_ = 0.0;
    double h_ = 0.0;
};

inline PronyModel validate_model(std::size_t n, std::span<const double> rates,
                                 std::span<const double> weights, double modulus) {
    if (n == 0) throw Error(ErrorCode::invalid_model, "N must be at least 1");
    if (rates.size() != n || weights.size() != n)
        throw Error(ErrorCode::invalid_model, "rate/weight lists must have length N");
    return PronyModel::create({rates.begin(), rates.end()}, {weights.begin(), weights.end()}, modulus);
}

/// b_i = h r_i / N, so every term carries strength h / N.
inline PronyModel equal_contribution_model(std::vector<double> rates, double h, double modulus) {
    if (!(h > 0.0)) throw Error(ErrorCode::invalid_model, "h must be positive");
    const double n = static_cast<double>(rates.size());
    std::vector<double> weights(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) weights[i] = h * rates[i] / n;
    return PronyModel::create(std::move(rates), std::move(weights), modulus);
}

/// G(t) = sum s_i exp(-r_i t).
inline double relaxation_value(const PronyModel& model, double t) {
    if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "relaxation time must be t >= 0");
    double g = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) g += model.strengths()[i] * std::exp(-model.rate(i) * t);
    return g;
}

enum class Regime { overdamped_solid, quasi_static_critical, sub_critical };

constexpr const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::overdamped_solid: return "OVERDAMPED_SOLID";
        case Regime::quasi_static_critical: return "QUASI_STATIC_CRITICAL";
        case Regime::sub_critical: return "SUB_CRITICAL";
    }
    return "?";
}

struct RegimeLabel {
    Regime regime;
    double tolerance;
};

/// D versus h trichotomy; |D - h| <= tol * max(D, h) counts as D = h.
inline RegimeLabel classify_regime(const PronyModel& model, double tol = 1e-12) {
    if (!(tol >= 0.0)) throw Error(ErrorCode::invalid_argument, "regime tolerance must be >= 0");
    const double d = model.modulus();
    const double h = model.h();
    if (std::abs(d - h) <= tol * std::max(d, h)) return {Regime::quasi_static_critical, tol};
    return {d > h ? Regime::overdamped_solid : Regime::sub_critical, tol};
}

// ---------------------------------------------------------------------------
// Prony ingestion of a stretched exponential

namespace detail {

// Lawson-Hanson active-set NNLS: min ||A x - y|| subject to x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    const Eigen::Index n = a.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-12 * std::max(1.0, a.norm() * y.norm());

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
        Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(y);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(static_cast<Eigen::Index>(c));
        return z;
    };

    for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
        Eigen::VectorXd w = a.transpose() * (y - a * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) best_w = w(j), best = j;
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner <= static_cast<int>(n); ++inner) {
            Eigen::VectorXd z = solve_passive();
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
                    alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
        }
    }
    return x;
}

inline void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, "fit time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "fit time grid must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error(ErrorCode::invalid_argument, "fit time grid must be strictly increasing");
    }
}

}  // namespace detail

/// Non-negative strengths s_i for a fixed rate ladder, unconstrained by the
/// strict positivity a PronyModel needs.
struct LeastSquaresStrengths {
    std::vector<double> strengths;
    double residual_sum_squares = 0.0;
};

inline LeastSquaresStrengths least_squares_strengths(const StretchedExponential& target,
                                                     std::span<const double> rates,
                                                     std::span<const double> grid) {
    detail::check_grid(grid);
    if (rates.empty()) throw Error(ErrorCode::invalid_argument, "rate ladder is empty");
    const auto rows = static_cast<Eigen::Index>(grid.size());
    const auto cols = static_cast<Eigen::Index>(rates.size());
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = grid[static_cast<std::size_t>(i)];
        y(i) = target(t);
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = std::exp(-rates[static_cast<std::size_t>(j)] * t);
    }
    const Eigen::VectorXd s = detail::nnls(a, y);
    LeastSquaresStrengths out;
    out.strengths.assign(s.data(), s.data() + s.size());
    out.residual_sum_squares = (a * s - y).squaredNorm();
    return out;
}

enum class FitMode { equal_contribution, least_squares };

struct FitOptions {
    FitMode mode = FitMode::least_squares;
    std::vector<double> rates;                    // fixed ladder, length N
    double h = 1.0;                               // equal-contribution total strength
    std::optional<double> instantaneous_modulus;  // defaults to the fitted h
};

struct PronyFit {
    PronyModel model;
    double residual_sum_squares = 0.0;
};

inline double fit_residual(const StretchedExponential& target, const PronyModel& model,
                           std::span<const double> grid) {
    double rss = 0.0;
    for (double t : grid) {
        const double e = relaxation_value(model, t) - target(t);
        rss += e * e;
    }
    return rss;
}

inline PronyFit fit_prony(const StretchedExponential& target, std::size_t n,
                          std::span<const double> grid, const FitOptions& options) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "fit needs N >= 1");
    if (options.rates.size() != n)
        throw Error(ErrorCode::invalid_argument, "rate ladder must have N entries");
    detail::check_grid(grid);

    if (options.mode == FitMode::equal_contribution) {
        PronyModel m = equal_contribution_model(options.rates, options.h,
                                                options.instantaneous_modulus.value_or(options.h));
        const double rss = fit_residual(target, m, grid);
        return {std::move(m), rss};
    }

    const auto ls = least_squares_strengths(target, options.rates, grid);
    std::vector<double> weights(n);
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(ls.strengths[i] > 0.0))
            throw Error(ErrorCode::infeasible_fit,
                        "least-squares weight for rate " + std::to_string(options.rates[i]) +
                            " is pinned at zero; the rate ladder does not fit the target");
        weights[i] = ls.strengths[i] * options.rates[i];
        h += ls.strengths[i];
    }
    PronyModel m = PronyModel::create(options.rates, std::move(weights),
                                      options.instantaneous_modulus.value_or(h));
    return {std::move(m), ls.residual_sum_squares};
}

}  // namespace ebm
