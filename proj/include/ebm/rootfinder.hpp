#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ebm/charpoly.hpp"
#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/polynomial.hpp"
#include "ebm/prony_model.hpp"

namespace ebm {

/// The N simple real roots a_1 > a_2 > ... > a_N of the limit polynomial.
struct LimitSpectrum {
    std::vector<double> roots;
    std::vector<double> secular_residuals;  // |f_P(a_j)|
    double upper_bound = 0.0;               // top of the a_1 bracket
};

/// Extra roots beyond the interlaced ones: a conjugate pair p +/- iq, q > 0...
struct ComplexPair {
    double re = 0.0;
    double im = 0.0;
    bool borderline = false;  // discriminant within rounding of zero
};

/// ...or two more real roots (small k only), first <= second.
struct RealPair {
    double first = 0.0;
    double second = 0.0;
};

/// All N + 2 roots of P_N^k for one mode index.
struct SpectralCluster {
    ModeIndex k{1};
    std::vector<double> real_roots;  // a_1^k > ... > a_N^k, one per bracket
    std::variant<ComplexPair, RealPair> extra;
    std::size_t sign_changes = 0;
    double deflation_residual = 0.0;
    double max_scaled_residual = 0.0;

    bool has_complex_pair() const noexcept { return std::holds_alternative<ComplexPair>(extra); }
    const ComplexPair& pair() const { return std::get<ComplexPair>(extra); }

    double extra_sum() const {
        if (const auto* c = std::get_if<ComplexPair>(&extra)) return 2.0 * c->re;
        const auto& r = std::get<RealPair>(extra);
        return r.first + r.second;
    }

    double extra_product() const {
        if (const auto* c = std::get_if<ComplexPair>(&extra)) return c->re * c->re + c->im * c->im;
        const auto& r = std::get<RealPair>(extra);
        return r.first * r.second;
    }

    /// Real roots first, then the extra pair (p + iq before p - iq).
    std::vector<complex> all_roots() const {
        std::vector<complex> out;
        out.reserve(real_roots.size() + 2);
        for (double a : real_roots) out.emplace_back(a, 0.0);
        if (const auto* c = std::get_if<ComplexPair>(&extra)) {
            out.emplace_back(c->re, c->im);
            out.emplace_back(c->re, -c->im);
        } else {
            const auto& r = std::get<RealPair>(extra);
            out.emplace_back(r.second, 0.0);
            out.emplace_back(r.first, 0.0);
        }
        return out;
    }
};

namespace detail {

struct Interval {
    double lo;
    double hi;
};

// Pole-to-pole interval holding root j (0-based): (-r_j, -r_{j-1}), or
// (-r_0, +inf) for the top root.
inline Interval pole_interval(const PronyModel& m, std::size_t j) {
    const double lo = -m.rate(j);
    const double hi = j == 0 ? std::numeric_limits<double>::infinity() : -m.rate(j - 1);
    return {lo, hi};
}

// Inset from the poles: 1e-10 times the local rate gap.
inline double pole_inset(const PronyModel& m, std::size_t j) {
    if (j > 0) return 1e-10 * (m.rate(j) - m.rate(j - 1));
    if (m.size() > 1) return 1e-10 * std::min(m.rate(0), m.rate(1) - m.rate(0));
    return 1e-10 * m.rate(0);
}

// Bisection on an increasing-through-zero function with f(lo) < 0 <= f(hi).
template <class F>
double bisect(F&& f, double lo, double hi, double width) {
    if (f(hi) == 0.0) return hi;
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// At most five Newton steps on the product form; a step is kept only while
// it stays inside (lo, hi) and lowers |P|.
inline double newton_polish(const PronyModel& m, double c, double x, double lo, double hi) {
    double px = char_poly(m, c, x);
    for (int step = 0; step < 5 && px != 0.0; ++step) {
        const double dp = char_poly_derivative(m, c, x);
        if (dp == 0.0 || !std::isfinite(dp)) break;
        const double next = x - px / dp;
        if (!(next > lo && next < hi)) break;
        const double pn = char_poly(m, c, next);
        if (!(std::abs(pn) < std::abs(px))) break;
        x = next;
        px = pn;
    }
    return x;
}

inline complex newton_polish(const PronyModel& m, double c, complex z) {
    complex pz = char_poly(m, c, z);
    for (int step = 0; step < 5 && pz != 0.0; ++step) {
        const complex dp = char_poly_derivative(m, c, z);
        if (dp == 0.0) break;
        const complex next = z - pz / dp;
        const complex pn = char_poly(m, c, next);
        if (!(std::abs(pn) < std::abs(pz))) break;
        z = next;
        pz = pn;
    }
    return z;
}

[[noreturn]] inline void bracket_failure(std::size_t j, double lo, double hi, double flo, double fhi,
                                         std::optional<ModeIndex> k) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no sign change of the secular function in bracket " << (j + 1) << " [" << lo << ", " << hi
        << "]: f(lo) = " << flo << ", f(hi) = " << fhi;
    if (k) msg << " (k = " << k->value() << ")";
    throw Error(ErrorCode::bracket_failure, msg.str());
}

}  // namespace detail

/// Roots of the limit polynomial, one per interlacing bracket.
inline LimitSpectrum limit_roots(const PronyModel& model) {
    const std::size_t n = model.size();
    double max_b = 0.0;
    for (double b : model.weights()) max_b = std::max(max_b, b);

    LimitSpectrum out;
    out.upper_bound = std::max(0.0, static_cast<double>(n) * max_b / model.modulus()) + 1.0;
    out.roots.resize(n);
    out.secular_residuals.resize(n);

    const double width = 1e-14 * model.max_rate();
    auto f = [&](double x) { return eval_secular(model, x); };
    for (std::size_t j = 0; j < n; ++j) {
        const auto poles = detail::pole_interval(model, j);
        const double eps = detail::pole_inset(model, j);
        const double lo = poles.lo + eps;
        const double hi = j == 0 ? out.upper_bound : poles.hi - eps;
        const double flo = f(lo), fhi = f(hi);
        if (!(flo < 0.0) || !(fhi >= 0.0)) detail::bracket_failure(j, lo, hi, flo, fhi, std::nullopt);
        double a = detail::bisect(f, lo, hi, width);
        a = detail::newton_polish(model, 0.0, a, poles.lo, poles.hi);
        out.roots[j] = a;
        out.secular_residuals[j] = std::abs(f(a));
    }
    return out;
}

/// All N + 2 roots of P_N^k. Real roots come from the secular brackets with
/// the limit root as upper end; the remaining pair from deflating the
/// monomial form, then Newton-polished on the product form. When a bracket
/// holds three roots (small k), the largest is the interlaced one.
inline SpectralCluster cluster_roots(const PronyModel& model, ModeIndex k, const LimitSpectrum& limit) {
    const std::size_t n = model.size();
    const double c = k.inverse_wavenumber_sq();
    const double width = 1e-14 * model.max_rate();
    auto f = [&](double x) { return eval_secular(model, x, k); };

    SpectralCluster out;
    out.k = k;
    out.real_roots.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto poles = detail::pole_interval(model, j);
        const double eps = detail::pole_inset(model, j);
        const double lo = poles.lo + eps;
        // f^k(a_j) = a_j^2/(2k-1)^2 >= 0, so the limit root caps the bracket;
        // fall back to the outer end if rounding puts it a hair negative.
        double hi = limit.roots.at(j);
        if (!(hi > lo) || f(hi) < 0.0) hi = j == 0 ? limit.upper_bound : poles.hi - eps;
        const double flo = f(lo), fhi = f(hi);
        if (!(flo < 0.0) || !(fhi >= 0.0)) detail::bracket_failure(j, lo, hi, flo, fhi, k);
        ++out.sign_changes;
        const double a = detail::bisect(f, lo, hi, width);
        out.real_roots[j] = detail::newton_polish(model, c, a, poles.lo, poles.hi);
    }

    // Deflate smallest-magnitude roots first (stable forward deflation).
    Polynomial reduced = expand_coefficients(model, k);
    std::vector<double> order(out.real_roots);
    std::sort(order.begin(), order.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (double root : order) {
        auto step = deflate(reduced, root);
        out.deflation_residual = std::max(out.deflation_residual, step.relative_remainder);
        reduced = std::move(step.quotient);
    }
    if (out.deflation_residual > 1e-8) {
        std::ostringstream msg;
        msg << "deflation residual " << out.deflation_residual << " exceeds 1e-8 at k = " << k.value()
            << " (ill-conditioned monomial form)";
        throw Error(ErrorCode::deflation_failure, msg.str());
    }

    const double sum = -reduced[1] / reduced[2];
    const double product = reduced[0] / reduced[2];
    const double disc = sum * sum - 4.0 * product;
    const double threshold =
        1e-10 * std::max({sum * sum, std::abs(4.0 * product), std::numeric_limits<double>::min()});

    if (disc > threshold) {
        const double sq = std::sqrt(disc);
        double x1 = 0.5 * (sum + std::copysign(sq, sum));
        double x2 = x1 != 0.0 ? product / x1 : 0.5 * (sum - sq);
        const double inf = std::numeric_limits<double>::infinity();
        x1 = detail::newton_polish(model, c, x1, -inf, inf);
        x2 = detail::newton_polish(model, c, x2, -inf, inf);

        // Keep the largest root of each bracket as the interlaced one.
        for (double* x : {&x1, &x2}) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto poles = detail::pole_interval(model, j);
                if (*x > poles.lo && *x < poles.hi && *x > out.real_roots[j]) {
                    std::swap(*x, out.real_roots[j]);
                    break;
                }
            }
        }
        out.extra = RealPair{std::min(x1, x2), std::max(x1, x2)};
    } else {
        ComplexPair pair;
        pair.borderline = std::abs(disc) <= threshold;
        complex z(0.5 * sum, 0.5 * std::sqrt(std::max(-disc, 0.0)));
        z = detail::newton_polish(model, c, z);
        pair.re = z.real();
        pair.im = std::max(std::abs(z.imag()), std::numeric_limits<double>::min());
        out.extra = pair;
    }

    for (const complex& z : out.all_roots())
        out.max_scaled_residual = std::max(out.max_scaled_residual, scaled_residual(model, k, z));
    return out;
}

inline SpectralCluster cluster_roots(const PronyModel& model, ModeIndex k) {
    return cluster_roots(model, k, limit_roots(model));
}

/// Clusters for k_min..k_max, computed in parallel and returned in k order.
inline std::vector<SpectralCluster> cluster_range(const PronyModel& model, int k_min, int k_max,
                                                  const LimitSpectrum& limit) {
    if (k_min < 1 || k_max < k_min)
        throw Error(ErrorCode::invalid_argument, "k range must satisfy 1 <= k_min <= k_max");
    const auto count = static_cast<std::size_t>(k_max - k_min + 1);
    return parallel_map(count, [&](std::size_t i) {
        return cluster_roots(model, ModeIndex(k_min + static_cast<int>(i)), limit);
    });
}

inline std::vector<SpectralCluster> cluster_range(const PronyModel& model, int k_min, int k_max) {
    return cluster_range(model, k_min, k_max, limit_roots(model));
}

// ---------------------------------------------------------------------------
// Independent oracle: simultaneous (Aberth-Ehrlich) iteration on the
// monomial coefficients.

/// Backward-error residual |P(z)| / sum |c_i| max(1, |z|)^i.
inline double backward_residual(const Polynomial& p, complex z) {
    const double scale = p.magnitude(std::max(1.0, std::abs(z)));
    return scale > 0.0 ? std::abs(p(z)) / scale : 0.0;
}

inline std::vector<complex> oracle_roots(const Polynomial& poly, int max_iterations = 500) {
    const std::size_t n = poly.degree();
    if (n == 0) throw Error(ErrorCode::invalid_argument, "oracle needs a polynomial of degree >= 1");
    const auto c = poly.coeffs();
    if (n == 1) return {complex(-c[0] / c[1], 0.0)};

    // Perturbed circle around the centroid, radius from Fujiwara's bound.
    const double lead = c[n];
    double bound = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        double coef = std::abs(c[n - i] / lead);
        if (i == n) coef *= 0.5;
        bound = std::max(bound, std::pow(coef, 1.0 / static_cast<double>(i)));
    }
    bound = 2.0 * bound;
    const complex center(-c[n - 1] / (lead * static_cast<double>(n)), 0.0);
    const double radius = std::max(bound, 1e-3);
    std::vector<complex> z(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n) + 0.4;
        z[j] = center + std::polar(radius * (1.0 + 0.01 * static_cast<double>(j) / static_cast<double>(n)), angle);
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    bool converged = false;
    for (int iter = 0; iter < max_iterations && !converged; ++iter) {
        converged = true;
        for (std::size_t j = 0; j < n; ++j) {
            const auto [p, dp] = poly.value_and_derivative(z[j]);
            if (std::abs(p) <= 8.0 * eps * poly.magnitude(std::max(1.0, std::abs(z[j])))) continue;
            const complex ratio = p / dp;
            complex repulsion(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (i != j) repulsion += 1.0 / (z[j] - z[i]);
            const complex step = ratio / (1.0 - ratio * repulsion);
            z[j] -= step;
            if (std::abs(step) > 2.0 * eps * std::max(1.0, std::abs(z[j]))) converged = false;
        }
    }
    if (!converged) {
        // Accept a stalled run only if every root already sits at rounding level.
        double worst = 0.0;
        for (const auto& root : z) worst = std::max(worst, backward_residual(poly, root));
        if (worst > 1e-12)
            throw Error(ErrorCode::non_convergence,
                        "Aberth iteration did not converge within " + std::to_string(max_iterations) +
                            " iterations (worst residual " + format_double(worst) + ")");
    }

    // Real coefficients: pair each upper-half-plane root with its mirror and
    // symmetrize; everything left over is real.
    std::vector<bool> used(n, false);
    std::vector<complex> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (used[j] || z[j].imag() <= 0.0) continue;
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i] || i == j || z[i].imag() >= 0.0) continue;
            const double d = std::abs(z[j] - std::conj(z[i]));
            if (d < best_d) best_d = d, best = i;
        }
        if (best < n && best_d <= 0.5 * z[j].imag()) {
            used[j] = used[best] = true;
            const complex avg = 0.5 * (z[j] + std::conj(z[best]));
            out.push_back(avg);
            out.push_back(std::conj(avg));
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        if (!used[j]) out.emplace_back(z[j].real(), 0.0);

    for (const auto& root : out) {
        const double res = backward_residual(poly, root);
        if (res > 1e-10)
            throw Error(ErrorCode::non_convergence,
                        "oracle root " + format_double(root.real()) + "+" + format_double(root.imag()) +
                            "i has backward residual " + format_double(res));
    }
    std::sort(out.begin(), out.end(), [](complex a, complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

/// Bottleneck (optimal max-distance) matching between two equal-size root
/// multisets. Returns +inf when the sizes differ.
inline double matching_distance(std::span<const complex> a, std::span<const complex> b) {
    const std::size_t n = a.size();
    if (n != b.size()) return std::numeric_limits<double>::infinity();
    if (n == 0) return 0.0;
    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = std::abs(a[i] - b[j]);
    std::vector<double> levels(dist);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    auto perfect = [&](double t) {
        std::vector<std::size_t> match(n, n);
        std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i,
                                                                          std::vector<bool>& seen) {
            for (std::size_t j = 0; j < n; ++j) {
                if (dist[i * n + j] > t || seen[j]) continue;
                seen[j] = true;
                if (match[j] == n || augment(match[j], seen)) {
                    match[j] = i;
                    return true;
                }
            }
            return false;
        };
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<bool> seen(n, false);
            if (!augment(i, seen)) return false;
        }
        return true;
    };

    std::size_t lo = 0, hi = levels.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (perfect(levels[mid])) hi = mid;
        else lo = mid + 1;
    }
    return levels[lo];
}

// ---------------------------------------------------------------------------
// Reduced (N+2)x(N+2) matrix of the first-order system with the spatial
// operator replaced by -(2k-1)^2.

class ReducedMatrix {
public:
    explicit ReducedMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}

    std::size_t dimension() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return a_.at(i * dim_ + j); }
    double& operator()(std::size_t i, std::size_t j) { return a_.at(i * dim_ + j); }

    std::vector<complex> apply(std::span<const complex> x) const {
        if (x.size() != dim_) throw Error(ErrorCode::invalid_argument, "dimension mismatch in apply");
        std::vector<complex> y(dim_, complex(0.0, 0.0));
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) y[i] += a_[i * dim_ + j] * x[j];
        return y;
    }

private:
    std::size_t dim_;
    std::vector<double> a_;
};

/// State (u, v, w_1..w_N):  u' = v,  v' = -D w2 u - sum b_i w_i,
/// w_i' = -w2 u - r_i w_i,  with w2 = (2k-1)^2.
inline ReducedMatrix reduced_matrix(const PronyModel& model, ModeIndex k) {
    const std::size_t n = model.size();
    const double w2 = k.wavenumber_sq();
    ReducedMatrix a(n + 2);
    a(0, 1) = 1.0;
    a(1, 0) = -model.modulus() * w2;
    for (std::size_t i = 0; i < n; ++i) {
        a(1, 2 + i) = -model.weight(i);
        a(2 + i, 0) = -w2;
        a(2 + i, 2 + i) = -model.rate(i);
    }
    return a;
}

/// Eigenvector (1, lambda, -(2k-1)^2/(lambda + r_1), ...) in reduced coordinates.
inline std::vector<complex> reduced_eigenvector(const PronyModel& model, ModeIndex k, complex lambda) {
    const std::size_t n = model.size();
    std::vector<complex> u(n + 2);
    u[0] = 1.0;
    u[1] = lambda;
    for (std::size_t i = 0; i < n; ++i) {
        const complex gap = lambda + model.rate(i);
        if (std::abs(gap) < 1e-13 * model.rate(i))
            throw Error(ErrorCode::pole, "eigenvector undefined at lambda = -r_" + std::to_string(i + 1));
        u[2 + i] = -k.wavenumber_sq() / gap;
    }
    return u;
}

/// ||A U(lambda) - lambda U(lambda)||_inf / ||U(lambda)||_inf.
inline double eigen_residual(const PronyModel& model, ModeIndex k, complex lambda) {
    const auto u = reduced_eigenvector(model, k, lambda);
    const auto au = reduced_matrix(model, k).apply(u);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num = std::max(num, std::abs(au[i] - lambda * u[i]));
        den = std::max(den, std::abs(u[i]));
    }
    return num / den;
}

}  // namespace ebm
