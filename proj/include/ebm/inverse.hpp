#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ebm/charpoly.hpp"
#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/polynomial.hpp"
#include "ebm/prony_model.hpp"
#include "ebm/rootfinder.hpp"

namespace ebm {

/// The N+2 roots of one mode-k polynomial, in any order. Non-real roots
/// must come in conjugate pairs.
struct ClusterObservation {
    ModeIndex k{1};
    std::vector<complex> roots;
};

inline ClusterObservation observe(const SpectralCluster& cluster) { return {cluster.k, cluster.all_roots()}; }

namespace detail {

inline double closure_tolerance(complex z) { return 1e-12 * std::max(1.0, std::abs(z)); }

struct FactoredRoots {
    std::vector<double> linear;    // real roots, ascending
    std::vector<complex> upper;    // one representative (im > 0) per conjugate pair, sorted
};

// Splits roots into real ones and conjugate pairs. Sorting first makes every
// downstream computation independent of the input order.
inline FactoredRoots factor_roots(std::span<const complex> roots) {
    FactoredRoots out;
    std::vector<complex> upper, lower;
    for (const auto& z : roots) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw Error(ErrorCode::invalid_argument, "observed root is not finite");
        if (std::abs(z.imag()) <= closure_tolerance(z)) out.linear.push_back(z.real());
        else if (z.imag() > 0.0) upper.push_back(z);
        else lower.push_back(std::conj(z));
    }
    auto by_parts = [](complex a, complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(out.linear.begin(), out.linear.end());
    std::sort(upper.begin(), upper.end(), by_parts);
    std::sort(lower.begin(), lower.end(), by_parts);
    if (upper.size() != lower.size())
        throw Error(ErrorCode::conjugate_closure, "non-real roots do not come in conjugate pairs");

    std::vector<bool> used(lower.size(), false);
    for (const auto& z : upper) {
        std::size_t best = lower.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(z - lower[i]);
            if (d < best_d) best_d = d, best = i;
        }
        if (best == lower.size() || best_d > closure_tolerance(z))
            throw Error(ErrorCode::conjugate_closure,
                        "root " + format_double(z.real()) + "+" + format_double(z.imag()) +
                            "i has no conjugate partner within 1e-12");
        used[best] = true;
        out.upper.push_back(0.5 * (z + lower[best]));
    }
    return out;
}

// c * prod (lambda - z) over the factored roots, evaluated directly.
inline double product_value(const FactoredRoots& f, double leading, double lambda) {
    double value = leading;
    for (double a : f.linear) value *= lambda - a;
    for (const auto& z : f.upper) value *= std::norm(lambda - z);
    return value;
}

// Value and derivative of the product form.
inline std::pair<double, double> product_value_and_derivative(const FactoredRoots& f, double leading,
                                                              double lambda) {
    double value = leading, dvalue = 0.0;
    for (double a : f.linear) {
        dvalue = dvalue * (lambda - a) + value;
        value *= lambda - a;
    }
    for (const auto& z : f.upper) {
        const double q = std::norm(lambda - z);
        const double dq = 2.0 * (lambda - z.real());
        dvalue = dvalue * q + value * dq;
        value *= q;
    }
    return {value, dvalue};
}

inline Polynomial expand_factored(const FactoredRoots& f, double leading) {
    CompensatedPoly acc;
    for (double a : f.linear) acc.multiply_linear(-a);
    for (const auto& z : f.upper) acc.multiply_quadratic(-2.0 * z.real(), std::norm(z));
    acc.scale(leading);
    return Polynomial(acc.rounded());
}

}  // namespace detail

/// Real coefficients (ascending) of leading * prod (lambda - z_i). Conjugate
/// pairs are merged into real quadratics before expansion.
inline Polynomial poly_from_roots(std::span<const complex> roots, double leading) {
    if (!(leading != 0.0) || !std::isfinite(leading))
        throw Error(ErrorCode::invalid_argument, "leading coefficient must be finite and nonzero");
    return detail::expand_factored(detail::factor_roots(roots), leading);
}

inline void check_observation(const ClusterObservation& obs) {
    if (obs.roots.size() < 3)
        throw Error(ErrorCode::invalid_argument, "a cluster needs N + 2 >= 3 roots");
    detail::factor_roots(obs.roots);
}

struct RecoveryDiagnostics {
    double lambda2_residual = 0.0;        // two lowest coefficients of the scaled difference, relative
    std::vector<double> rate_residuals;   // |P1(-r_i) - P2(-r_i)| relative to the term sizes
    std::vector<double> weight_residuals; // |b_i from P1 - b_i from P2| / b_i
    double modulus_consistency = 0.0;     // |D from P1 - D from P2| / D
    double reconstruction_error = 0.0;    // recovered model expanded vs observed polynomials
    double forward_distance = 0.0;        // matching distance of the recomputed clusters
};

struct RecoveredModel {
    PronyModel model;
    double modulus = 0.0;
    RecoveryDiagnostics diagnostics;
};

namespace detail {

struct WeightsAndModulus {
    std::vector<double> weights;
    double modulus;
};

// b_i = -P(-r_i) / prod_{j != i}(r_j - r_i);  D = P(0)/prod r + sum b/r.
inline WeightsAndModulus weights_from(const FactoredRoots& f, double leading, std::span<const double> r) {
    const std::size_t n = r.size();
    WeightsAndModulus out{std::vector<double>(n), 0.0};
    double prod_r = 1.0, h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double denom = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) denom *= r[j] - r[i];
        out.weights[i] = -product_value(f, leading, -r[i]) / denom;
        prod_r *= r[i];
        h += out.weights[i] / r[i];
    }
    out.modulus = product_value(f, leading, 0.0) / prod_r + h;
    return out;
}

inline double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace detail

/// Recovers D, r and b from the full root sets of two distinct mode indices.
inline RecoveredModel recover_model(const ClusterObservation& obs_a, const ClusterObservation& obs_b) {
    if (obs_a.k == obs_b.k)
        throw Error(ErrorCode::degenerate_pair, "both clusters have k = " + std::to_string(obs_a.k.value()) +
                                                    "; the difference identity needs distinct k");
    if (obs_a.roots.size() != obs_b.roots.size())
        throw Error(ErrorCode::inconsistent_clusters, "clusters have different lengths");
    check_observation(obs_a);
    check_observation(obs_b);
    const auto& lo = obs_a.k < obs_b.k ? obs_a : obs_b;
    const auto& hi = obs_a.k < obs_b.k ? obs_b : obs_a;
    const std::size_t n = lo.roots.size() - 2;

    const double c1 = lo.k.inverse_wavenumber_sq();
    const double c2 = hi.k.inverse_wavenumber_sq();
    const auto f1 = detail::factor_roots(lo.roots);
    const auto f2 = detail::factor_roots(hi.roots);
    const auto p1 = detail::expand_factored(f1, c1);
    const auto p2 = detail::expand_factored(f2, c2);

    // (P1 - P2) / (c1 - c2) = lambda^2 prod (lambda + r_j).
    const double span = c1 - c2;
    std::vector<double> diff(n + 3);
    double scale = 0.0;
    for (std::size_t i = 0; i <= n + 2; ++i) {
        const auto d = detail::two_sum(p1[i], -p2[i]);
        diff[i] = (d.hi + d.lo) / span;
        scale = std::max(scale, std::abs(diff[i]));
    }
    RecoveryDiagnostics diag;
    diag.lambda2_residual = std::max(std::abs(diff[0]), std::abs(diff[1])) / scale;
    if (diag.lambda2_residual > 1e-9)
        throw Error(ErrorCode::inconsistent_clusters,
                    "scaled difference is not divisible by lambda^2 (residual " +
                        format_double(diag.lambda2_residual) + ")");
    std::vector<double> monic(diff.begin() + 2, diff.end());
    const double lead = monic.back();
    for (auto& c : monic) c /= lead;

    std::vector<double> rates;
    rates.reserve(n);
    for (const auto& z : oracle_roots(Polynomial(monic))) {
        if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z)))
            throw Error(ErrorCode::recovery_invalid, "recovered rate is not real");
        rates.push_back(-z.real());
    }

    // Newton polish on g = P1 - P2 in product form, where -r_j is an exact root.
    auto g = [&](double x) {
        const auto [v1, d1] = detail::product_value_and_derivative(f1, c1, x);
        const auto [v2, d2] = detail::product_value_and_derivative(f2, c2, x);
        return std::array<double, 3>{v1 - v2, d1 - d2, std::abs(v1) + std::abs(v2)};
    };
    for (auto& r : rates) {
        double x = -r;
        auto cur = g(x);
        for (int step = 0; step < 8 && cur[0] != 0.0 && cur[1] != 0.0; ++step) {
            const double next = x - cur[0] / cur[1];
            const auto trial = g(next);
            if (!(std::abs(trial[0]) < std::abs(cur[0]))) break;
            x = next;
            cur = trial;
        }
        r = -x;
    }
    std::sort(rates.begin(), rates.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (!(rates[i] > 0.0))
            throw Error(ErrorCode::recovery_invalid, "recovered rate r_" + std::to_string(i + 1) + " is not positive");
        if (i > 0 && !(rates[i] > rates[i - 1]))
            throw Error(ErrorCode::recovery_invalid, "recovered rates are not strictly ordered");
    }
    for (double r : rates) {
        const auto v = g(-r);
        diag.rate_residuals.push_back(v[2] > 0.0 ? std::abs(v[0]) / v[2] : 0.0);
    }

    const auto main = detail::weights_from(f2, c2, rates);
    const auto cross = detail::weights_from(f1, c1, rates);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(main.weights[i] > 0.0))
            throw Error(ErrorCode::recovery_invalid,
                        "recovered weight b_" + std::to_string(i + 1) + " = " + format_double(main.weights[i]) +
                            " is not positive");
        diag.weight_residuals.push_back(detail::relative_error(cross.weights[i], main.weights[i]));
    }
    if (!(main.modulus > 0.0))
        throw Error(ErrorCode::recovery_invalid,
                    "recovered D = " + format_double(main.modulus) + " is not positive");
    diag.modulus_consistency = detail::relative_error(cross.modulus, main.modulus);

    auto model = PronyModel::create(rates, main.weights, main.modulus);

    for (const auto* obs : {&lo, &hi}) {
        const auto observed = obs == &lo ? p1 : p2;
        const auto forward = expand_coefficients(model, obs->k);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i <= n + 2; ++i) {
            num = std::max(num, std::abs(forward[i] - observed[i]));
            den = std::max(den, std::abs(observed[i]));
        }
        diag.reconstruction_error = std::max(diag.reconstruction_error, num / den);
        const auto recomputed = cluster_roots(model, obs->k).all_roots();
        diag.forward_distance = std::max(diag.forward_distance, matching_distance(recomputed, obs->roots));
    }
    return {std::move(model), main.modulus, std::move(diag)};
}

// ---------------------------------------------------------------------------
// Noise robustness

struct TrialOutcome {
    std::size_t trial = 0;
    bool recovered = false;
    std::string failure;  // error code name when not recovered
    double rate_error = std::numeric_limits<double>::quiet_NaN();    // max relative over r_i
    double weight_error = std::numeric_limits<double>::quiet_NaN();  // max relative over b_i
    double modulus_error = std::numeric_limits<double>::quiet_NaN();
};

struct PerturbationTable {
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::vector<TrialOutcome> trials;
    std::size_t failures = 0;
    double max_rate_error = 0.0;
    double max_weight_error = 0.0;
    double max_modulus_error = 0.0;
};

/// Each root is scaled by (1 + noise * u) with u uniform on [-1, 1]; a
/// conjugate pair shares one draw.
inline std::vector<complex> perturb_roots(std::span<const complex> roots, double noise, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto f = detail::factor_roots(roots);
    std::vector<complex> out;
    out.reserve(roots.size());
    for (double a : f.linear) out.emplace_back(a * (1.0 + noise * unit(rng)), 0.0);
    for (const auto& z : f.upper) {
        const complex w = z * (1.0 + noise * unit(rng));
        out.push_back(w);
        out.push_back(std::conj(w));
    }
    return out;
}

inline PerturbationTable perturbation_study(const PronyModel& model, ModeIndex k1, ModeIndex k2, double noise,
                                            std::size_t trials, std::uint64_t seed) {
    if (!(noise >= 0.0) || !std::isfinite(noise))
        throw Error(ErrorCode::invalid_argument, "noise level must be finite and >= 0");
    const auto limit = limit_roots(model);
    const auto base1 = observe(cluster_roots(model, k1, limit));
    const auto base2 = observe(cluster_roots(model, k2, limit));

    PerturbationTable table;
    table.noise = noise;
    table.seed = seed;
    table.trials = parallel_map(trials, [&](std::size_t t) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(std::uint64_t(t) >> 32)};
        std::mt19937_64 rng(seq);
        TrialOutcome out;
        out.trial = t;
        try {
            ClusterObservation o1{k1, perturb_roots(base1.roots, noise, rng)};
            ClusterObservation o2{k2, perturb_roots(base2.roots, noise, rng)};
            const auto rec = recover_model(o1, o2);
            out.recovered = true;
            out.rate_error = out.weight_error = 0.0;
            for (std::size_t i = 0; i < model.size(); ++i) {
                out.rate_error = std::max(out.rate_error, detail::relative_error(rec.model.rate(i), model.rate(i)));
                out.weight_error =
                    std::max(out.weight_error, detail::relative_error(rec.model.weight(i), model.weight(i)));
            }
            out.modulus_error = detail::relative_error(rec.modulus, model.modulus());
        } catch (const Error& e) {
            out.failure = to_string(e.code());
        }
        return out;
    });
    for (const auto& t : table.trials) {
        if (!t.recovered) {
            ++table.failures;
            continue;
        }
        table.max_rate_error = std::max(table.max_rate_error, t.rate_error);
        table.max_weight_error = std::max(table.max_weight_error, t.weight_error);
        table.max_modulus_error = std::max(table.max_modulus_error, t.modulus_error);
    }
    return table;
}

}  // namespace ebm
