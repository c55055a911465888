#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebm/charpoly.hpp"
#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/prony_model.hpp"
#include "ebm/rootfinder.hpp"

namespace ebm {

inline std::vector<ModeIndex> mode_range(int k_min, int k_max) {
    if (k_min < 1 || k_max < k_min)
        throw Error(ErrorCode::invalid_argument, "k range must satisfy 1 <= k_min <= k_max");
    std::vector<ModeIndex> ks;
    ks.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    for (int k = k_min; k <= k_max; ++k) ks.emplace_back(k);
    return ks;
}

/// Limit spectrum plus the clusters for an ascending list of mode indices.
struct SpectralSweep {
    LimitSpectrum limit;
    std::vector<SpectralCluster> clusters;
};

inline SpectralSweep spectral_sweep(const PronyModel& model, std::span<const ModeIndex> ks) {
    if (ks.empty()) throw Error(ErrorCode::invalid_argument, "k list is empty");
    for (std::size_t i = 1; i < ks.size(); ++i)
        if (!(ks[i - 1] < ks[i])) throw Error(ErrorCode::invalid_argument, "k list must be strictly ascending");
    SpectralSweep sweep;
    sweep.limit = limit_roots(model);
    sweep.clusters = parallel_map(ks.size(), [&](std::size_t i) { return cluster_roots(model, ks[i], sweep.limit); });
    return sweep;
}

// ---------------------------------------------------------------------------
// Convergence of clusters toward the limit spectrum

struct RealRootRow {
    int k = 0;
    std::size_t j = 0;  // 1-based root index
    double root = 0.0;
    double limit = 0.0;
    double gap = 0.0;         // a_j - a_j^k
    double scaled_gap = 0.0;  // k^2 (a_j - a_j^k)
};

struct PairRow {
    int k = 0;
    bool is_complex = true;
    double p = 0.0;  // real part (half the pair sum for a real pair)
    double q = std::numeric_limits<double>::quiet_NaN();
    double p_error = 0.0;   // |p + sum b / (2D)|
    double p_scaled = 0.0;  // k^2 * p_error
    double q_error = std::numeric_limits<double>::quiet_NaN();   // |q - (2k-1) sqrt(D)|
    double q_scaled = std::numeric_limits<double>::quiet_NaN();  // (2k-1) * q_error
};

struct ConvergenceReport {
    LimitSpectrum limit;
    double p_limit = 0.0;       // -sum b / (2D)
    double sqrt_modulus = 0.0;  // sqrt(D)
    std::vector<RealRootRow> real_rows;  // sorted by k, then j
    std::vector<PairRow> pair_rows;      // sorted by k
    // Empirical suprema over the computed range.
    double m1 = 0.0;  // max k^2 (a_j - a_j^k)
    double m2 = 0.0;  // max k^2 |p^k + sum b/(2D)|
    double m3 = 0.0;  // max (2k-1) |q^k - (2k-1) sqrt(D)|
    double min_gap = std::numeric_limits<double>::infinity();
};

inline ConvergenceReport convergence_table(const PronyModel& model, const SpectralSweep& sweep) {
    ConvergenceReport rep;
    rep.limit = sweep.limit;
    rep.p_limit = -model.weight_sum() / (2.0 * model.modulus());
    rep.sqrt_modulus = std::sqrt(model.modulus());
    const std::size_t n = model.size();

    for (const auto& cl : sweep.clusters) {
        const int k = cl.k.value();
        const double k2 = static_cast<double>(k) * k;
        for (std::size_t j = 0; j < n; ++j) {
            RealRootRow row;
            row.k = k;
            row.j = j + 1;
            row.root = cl.real_roots[j];
            row.limit = sweep.limit.roots[j];
            row.gap = row.limit - row.root;
            row.scaled_gap = k2 * row.gap;
            rep.m1 = std::max(rep.m1, row.scaled_gap);
            rep.min_gap = std::min(rep.min_gap, row.gap);
            rep.real_rows.push_back(row);
        }
        PairRow pr;
        pr.k = k;
        pr.is_complex = cl.has_complex_pair();
        pr.p = 0.5 * cl.extra_sum();
        pr.p_error = std::abs(pr.p - rep.p_limit);
        pr.p_scaled = k2 * pr.p_error;
        if (pr.is_complex) {
            const double w = cl.k.wavenumber();
            pr.q = cl.pair().im;
            pr.q_error = std::abs(pr.q - w * rep.sqrt_modulus);
            pr.q_scaled = w * pr.q_error;
            rep.m2 = std::max(rep.m2, pr.p_scaled);
            rep.m3 = std::max(rep.m3, pr.q_scaled);
        }
        rep.pair_rows.push_back(pr);
    }
    return rep;
}

inline ConvergenceReport convergence_table(const PronyModel& model, std::span<const ModeIndex> ks) {
    return convergence_table(model, spectral_sweep(model, ks));
}

// ---------------------------------------------------------------------------
// Explicit k0

/// Constants of the explicit large-k certificate. N >= 2 only: the formulas
/// contain r^(N-2) and R^(N-2).
struct K0Certificate {
    std::size_t n = 0;
    double max_weight = 0.0;  // B
    double min_weight = 0.0;  // b
    double min_rate_gap = 0.0;  // r
    double mu = 0.0;
    double radius = 0.0;  // R = 2 r_N + N B / D + 1
    double delta = 0.0;
    double epsilon = 0.0;
    double m = 0.0;
    double k0_raw = 0.0;
    double k0 = 0.0;  // ceil(k0_raw)
};

inline K0Certificate explicit_k0(const PronyModel& model) {
    const std::size_t n = model.size();
    if (n < 2)
        throw Error(ErrorCode::unsupported_configuration,
                    "explicit k0 needs N >= 2 (the constants involve r^(N-2) and R^(N-2))");
    const double nn = static_cast<double>(n);
    const double d = model.modulus();
    const auto w = model.weights();
    const auto r = model.rates();

    K0Certificate c;
    c.n = n;
    c.max_weight = *std::max_element(w.begin(), w.end());
    c.min_weight = *std::min_element(w.begin(), w.end());
    c.min_rate_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) c.min_rate_gap = std::min(c.min_rate_gap, r[i + 1] - r[i]);

    const double big_b = c.max_weight, small_b = c.min_weight, gap = c.min_rate_gap;
    const double two_rn = 2.0 * r[n - 1];
    const double numerator = small_b * std::pow(gap, nn - 1.0);
    const double denominator =
        4.0 * d * std::pow(two_rn, nn - 1.0) + 4.0 * nn * big_b * std::pow(two_rn, nn - 2.0) + 1.0;
    c.mu = std::min({numerator / denominator, gap / 4.0, r[0] / 4.0});
    c.radius = two_rn + nn * big_b / d + 1.0;
    c.delta = std::pow(gap, nn - 2.0) / (2.0 * nn * std::pow(c.radius, nn - 2.0)) * c.mu;
    c.epsilon = d * c.mu * std::pow(gap, nn - 2.0) / 4.0;
    c.m = d * c.mu * c.delta * std::pow(gap, nn - 2.0) / 2.0;
    c.k0_raw = std::pow(c.radius, (nn + 2.0) / 2.0) / std::sqrt(c.m) +
               std::pow(c.radius, (nn + 1.0) / 2.0) / std::sqrt(c.epsilon) + 1.0;
    c.k0 = std::ceil(c.k0_raw);
    return c;
}

// ---------------------------------------------------------------------------
// Bound verification

struct Violation {
    int k = 0;        // 0 for k-independent checks
    std::size_t j = 0;  // 1-based index, 0 when not applicable
    double measured = 0.0;
    double bound = 0.0;
};

/// One inequality or identity checked over the sweep. slack is the smallest
/// margin seen (positive means satisfied); measured/bound are the values at
/// that worst case.
struct BoundCheck {
    std::string name;
    bool applicable = true;
    bool holds = true;
    double measured = 0.0;
    double bound = 0.0;
    double slack = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    std::vector<Violation> violations;
    std::string note;

    // Record one comparison where `margin` >= 0 means the bound is met.
    void record(int k, std::size_t j, double value, double limit, double margin, bool ok) {
        ++evaluations;
        if (margin < slack) {
            slack = margin;
            measured = value;
            bound = limit;
        }
        if (!ok) {
            holds = false;
            if (violations.size() < 64) violations.push_back({k, j, value, limit});
        }
    }
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    std::optional<K0Certificate> certificate;
    int first_complex_k = 0;  // from here on every cluster in range has a complex pair
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;

    bool all_hold() const {
        return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return !c.applicable || c.holds; });
    }

    const BoundCheck& at(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw Error(ErrorCode::invalid_argument, "no bound check named " + name);
    }
};

namespace detail {

// |sum b_i/(x + r_i) - D - c x^2| over the magnitude of the terms involved.
inline double secular_identity_defect(const PronyModel& m, double x, double c) {
    double sum = 0.0, scale = m.modulus() + c * x * x;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double t = m.weight(i) / (x + m.rate(i));
        sum += t;
        scale += std::abs(t);
    }
    return std::abs(sum - m.modulus() - c * x * x) / scale;
}

inline double elementary2(std::span<const double> x) {
    double e1 = 0.0, e2 = 0.0;
    for (double v : x) {
        e2 += e1 * v;
        e1 += v;
    }
    return e2;
}

}  // namespace detail

/// Relative defect of the lambda^N coefficient identity
///   e2(r) + D (2k-1)^2 = pair_product + pair_sum * sum a_j^k + e2(a^k).
inline double coefficient_identity_defect(const PronyModel& model, const SpectralCluster& cl) {
    const double lhs = detail::elementary2(model.rates()) + model.modulus() * cl.k.wavenumber_sq();
    double sum_a = 0.0;
    for (double a : cl.real_roots) sum_a += a;
    const double rhs = cl.extra_product() + cl.extra_sum() * sum_a + detail::elementary2(cl.real_roots);
    return std::abs(lhs - rhs) / std::abs(lhs);
}

/// |sum a_j^k + pair_sum + sum r_j| / sum r_j.
inline double trace_identity_defect(const PronyModel& model, const SpectralCluster& cl) {
    double sum_r = 0.0, total = cl.extra_sum();
    for (double r : model.rates()) sum_r += r;
    for (double a : cl.real_roots) total += a;
    return std::abs(total + sum_r) / sum_r;
}

/// |D - sum b_j / sum (a_j + r_j)| / D.
inline double rep_modulus_defect(const PronyModel& model, const LimitSpectrum& limit) {
    double shifted = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) shifted += limit.roots[j] + model.rate(j);
    return std::abs(model.modulus() - model.weight_sum() / shifted) / model.modulus();
}

inline BoundReport verify_bounds(const PronyModel& model, const SpectralSweep& sweep) {
    const std::size_t n = model.size();
    const auto& limit = sweep.limit;
    const auto& clusters = sweep.clusters;
    const auto conv = convergence_table(model, sweep);

    BoundReport rep;
    rep.m1 = conv.m1;
    rep.m2 = conv.m2;
    rep.m3 = conv.m3;
    if (n >= 2) rep.certificate = explicit_k0(model);

    for (std::size_t i = clusters.size(); i-- > 0;) {
        if (!clusters[i].has_complex_pair()) break;
        rep.first_complex_k = clusters[i].k.value();
    }

    // Interlacing of the cluster roots with the poles.
    BoundCheck interlacing{"interlacing"};
    for (const auto& cl : clusters)
        for (std::size_t j = 0; j < n; ++j) {
            const auto poles = detail::pole_interval(model, j);
            const double a = cl.real_roots[j];
            const double margin = std::min(a - poles.lo, poles.hi - a);
            interlacing.record(cl.k.value(), j + 1, a, margin >= 0 ? poles.lo : poles.hi, margin, margin > 0.0);
        }

    BoundCheck trace{"trace_identity"};
    for (const auto& cl : clusters) {
        const double defect = trace_identity_defect(model, cl);
        trace.record(cl.k.value(), 0, defect, 1e-9, 1e-9 - defect, defect <= 1e-9);
    }

    BoundCheck coeff{"coefficient_identity"};
    for (const auto& cl : clusters) {
        const double defect = coefficient_identity_defect(model, cl);
        coeff.record(cl.k.value(), 0, defect, 1e-8, 1e-8 - defect, defect <= 1e-8);
    }

    BoundCheck strip{"strip_membership"};
    const double strip_tol = 1e-12 * std::max(1.0, model.max_rate());
    strip.note = "closed strip with rounding allowance; a line when N = 1";
    for (const auto& cl : clusters) {
        const double top = cl.real_roots[0];
        if (cl.has_complex_pair()) {
            const double lo = 0.5 * (-model.max_rate() - top);
            const double hi = 0.5 * (-model.rate(0) - top);
            const double p = cl.pair().re;
            const double margin = std::min(p - lo, hi - p);
            strip.record(cl.k.value(), 0, p, p - lo < hi - p ? lo : hi, margin, margin >= -strip_tol);
        } else {
            const auto& rp = std::get<RealPair>(cl.extra);
            const double margin = std::min(rp.first + model.max_rate(), top - rp.second);
            strip.record(cl.k.value(), 0, rp.first, -model.max_rate(), margin, margin >= -strip_tol);
        }
    }

    BoundCheck top_bound{"a1_upper_bound"};
    {
        double max_b = *std::max_element(model.weights().begin(), model.weights().end());
        const double bound = static_cast<double>(n) * max_b / model.modulus();
        top_bound.record(0, 1, limit.roots[0], bound, bound - limit.roots[0], limit.roots[0] <= bound);
    }

    BoundCheck one_sided{"one_sidedness"};
    for (const auto& row : conv.real_rows)
        one_sided.record(row.k, row.j, row.gap, 0.0, row.gap, row.gap >= -1e-12);
    one_sided.note = "a_j - a_j^k >= 0, rounding allowance 1e-12";

    BoundCheck secular_limit{"secular_identity_limit"};
    for (std::size_t j = 0; j < n; ++j) {
        const double defect = detail::secular_identity_defect(model, limit.roots[j], 0.0);
        secular_limit.record(0, j + 1, defect, 1e-10, 1e-10 - defect, defect <= 1e-10);
    }
    BoundCheck secular_cluster{"secular_identity_cluster"};
    for (const auto& cl : clusters)
        for (std::size_t j = 0; j < n; ++j) {
            const double defect =
                detail::secular_identity_defect(model, cl.real_roots[j], cl.k.inverse_wavenumber_sq());
            secular_cluster.record(cl.k.value(), j + 1, defect, 1e-10, 1e-10 - defect, defect <= 1e-10);
        }
    secular_limit.note = secular_cluster.note = "defect relative to the summed term magnitudes";

    BoundCheck rep_d{"rep_D"};
    {
        const double defect = rep_modulus_defect(model, limit);
        rep_d.record(0, 0, defect, 1e-10, 1e-10 - defect, defect <= 1e-10);
    }

    BoundCheck separation{"limit_root_separation"};
    BoundCheck pole_floor{"pole_neighborhood_lower_bound"};
    if (rep.certificate) {
        const auto& cert = *rep.certificate;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double gap = limit.roots[j] - limit.roots[j + 1];
            separation.record(0, j + 1, gap, 2.0 * cert.mu, gap - 2.0 * cert.mu, gap >= 2.0 * cert.mu);
        }
        const double floor = cert.min_weight * std::pow(cert.min_rate_gap, static_cast<double>(n) - 1.0) / 2.0;
        constexpr int samples = 10000;
        for (std::size_t l = 0; l < n; ++l) {
            const double center = -model.rate(l);
            double worst = std::numeric_limits<double>::infinity();
            for (int s = 0; s < samples; ++s) {
                const double x = center - cert.mu + 2.0 * cert.mu * s / (samples - 1);
                worst = std::min(worst, std::abs(eval_limit_poly(model, x)));
            }
            pole_floor.record(0, l + 1, worst, floor, worst - floor, worst >= floor);
        }
        pole_floor.note = "sampled at 10^4 points per neighborhood, not exhaustive";
    } else {
        separation.applicable = pole_floor.applicable = false;
        separation.note = pole_floor.note = "needs the N >= 2 certificate constants";
    }

    // Adjacent-cluster distances with the empirical constants.
    BoundCheck adj_real{"adjacent_real_gap"}, adj_p{"adjacent_p_gap"}, adj_q{"adjacent_q_gap"};
    for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
        const auto& a = clusters[i];
        const auto& b = clusters[i + 1];
        const int k = a.k.value();
        if (b.k.value() != k + 1) continue;
        const double k2 = static_cast<double>(k) * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = std::abs(b.real_roots[j] - a.real_roots[j]);
            const double bound = 2.0 * conv.m1 / k2;
            adj_real.record(k, j + 1, d, bound, bound - d, d <= bound * (1.0 + 1e-12) + 1e-15);
        }
        if (a.has_complex_pair() && b.has_complex_pair()) {
            const double dp = std::abs(b.pair().re - a.pair().re);
            const double bp = 2.0 * conv.m2 / k2;
            adj_p.record(k, 0, dp, bp, bp - dp, dp <= bp * (1.0 + 1e-12) + 1e-15);
            const double dq = std::abs(b.pair().im - a.pair().im);
            const double bq = 2.0 * conv.m3 / a.k.wavenumber() + 2.0 * conv.sqrt_modulus;
            adj_q.record(k, 0, dq, bq, bq - dq, dq <= bq);
        }
    }
    adj_real.note = adj_p.note = adj_q.note = "constants are empirical suprema over the computed range";

    rep.checks = {interlacing, trace, coeff, strip, top_bound, one_sided, secular_limit, secular_cluster,
                  rep_d, separation, pole_floor, adj_real, adj_p, adj_q};
    return rep;
}

inline BoundReport verify_bounds(const PronyModel& model, std::span<const ModeIndex> ks) {
    return verify_bounds(model, spectral_sweep(model, ks));
}

}  // namespace ebm
