#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "ebm/presets.hpp"
#include "ebm/rootfinder.hpp"
#include "support/oracles.hpp"

using namespace ebm;

namespace {

std::vector<complex> sorted(std::vector<complex> z) {
    std::sort(z.begin(), z.end(), [](complex a, complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return z;
}

std::vector<complex> reference_roots(const oracle::ReferenceCluster& ref) {
    std::vector<complex> z;
    for (double a : ref.real_roots) z.emplace_back(a, 0.0);
    if (ref.q > 0.0) {
        z.emplace_back(ref.p, ref.q);
        z.emplace_back(ref.p, -ref.q);
    }
    return sorted(z);
}

}  // namespace

TEST(Polynomial, Basics) {
    EXPECT_THROW(Polynomial({}), Error);
    EXPECT_THROW(Polynomial({1.0, 0.0}), Error);
    const Polynomial p({1.0, 2.0, 1.0, 1.0});
    EXPECT_EQ(p(2.0), 1.0 + 4.0 + 4.0 + 8.0);
    EXPECT_EQ(p.derivative()(2.0), 2.0 + 4.0 + 12.0);
    const auto [v, d] = p.value_and_derivative(2.0);
    EXPECT_EQ(v, 17.0);
    EXPECT_EQ(d, 18.0);
    // (x + 1)(x^2 + 1) deflated by -1
    const auto q = deflate(Polynomial({1.0, 1.0, 1.0, 1.0}), -1.0);
    EXPECT_EQ(q.remainder, 0.0);
    EXPECT_EQ(std::vector<double>(q.quotient.coeffs().begin(), q.quotient.coeffs().end()),
              (std::vector<double>{1.0, 0.0, 1.0}));
}

TEST(LimitRoots, ClosedForms) {
    const auto worked = limit_roots(preset_model("worked"));
    ASSERT_EQ(worked.roots.size(), 2u);
    EXPECT_LE(std::abs(worked.roots[0]), 1e-12);
    EXPECT_NEAR(worked.roots[1], -7.5, 1e-13);
    const auto toy = limit_roots(preset_model("toy"));
    EXPECT_NEAR(toy.roots[0], -0.5, 1e-15);
}

TEST(LimitRoots, MatchReferenceValues) {
    for (const auto& ref : oracle::reference_clusters()) {
        if (ref.k != 0) continue;
        const auto lim = limit_roots(preset_model(ref.preset));
        ASSERT_EQ(lim.roots.size(), ref.real_roots.size()) << ref.preset;
        for (std::size_t j = 0; j < lim.roots.size(); ++j)
            EXPECT_NEAR(lim.roots[j], ref.real_roots[j], 1e-13 * std::max(1.0, std::abs(ref.real_roots[j])))
                << ref.preset << " j=" << j;
    }
}

TEST(LimitRoots, DenseSignScan) {
    // One sign change per bracket, found on a fine grid in long double.
    for (const char* name : {"n5-d1", "n5-d0.5", "n9-d5"}) {
        const auto m = preset_model(name);
        const std::size_t points = std::string(name) == "n5-d1" ? 1000000 : 100000;
        const auto lim = limit_roots(m);
        auto f = [&](oracle::ld x) { return oracle::secular(m, 0.0L, x); };
        for (std::size_t j = 0; j < m.size(); ++j) {
            const oracle::ld lo = -m.rate(j) + 1e-9L;
            const oracle::ld hi = j == 0 ? static_cast<oracle::ld>(lim.upper_bound) : -m.rate(j - 1) - 1e-9L;
            const auto changes = oracle::sign_scan(f, lo, hi, points);
            ASSERT_EQ(changes.size(), 1u) << name << " bracket " << j;
            const double step = static_cast<double>(hi - lo) / static_cast<double>(points);
            EXPECT_NEAR(lim.roots[j], static_cast<double>(changes[0]), step) << name << " j=" << j;
            const auto exact = oracle::bisect(f, changes[0] - step, changes[0] + step);
            EXPECT_NEAR(lim.roots[j], static_cast<double>(exact), 1e-13 * std::max(1.0L, std::abs(exact)));
        }
    }
}

TEST(ClusterRoots, ToyCubic) {
    const auto cl = cluster_roots(preset_model("toy"), ModeIndex(1));
    ASSERT_TRUE(cl.has_complex_pair());
    EXPECT_NEAR(cl.real_roots[0], -0.569840, 1e-5);
    EXPECT_NEAR(cl.pair().re, -0.215080, 1e-5);
    EXPECT_NEAR(cl.pair().im, 1.307142, 1e-5);
}

TEST(ClusterRoots, MatchReferenceValues) {
    for (const auto& ref : oracle::reference_clusters()) {
        if (ref.k == 0) continue;
        const auto model = preset_model(ref.preset);
        const auto cl = cluster_roots(model, ModeIndex(ref.k));
        const auto got = sorted(cl.all_roots());
        const auto want = reference_roots(ref);
        ASSERT_EQ(got.size(), want.size()) << ref.preset << " k=" << ref.k;
        for (std::size_t i = 0; i < got.size(); ++i)
            EXPECT_LE(std::abs(got[i] - want[i]), 1e-12 * std::max(1.0, std::abs(want[i])))
                << ref.preset << " k=" << ref.k << " root " << i << " got " << got[i] << " want " << want[i];
    }
}

TEST(ClusterRoots, ExtraRealPairLeavesLargestRootInterlaced) {
    // n5-d0.5 at k = 1: the top bracket (-5, inf) holds three real roots.
    const auto cl = cluster_roots(preset_model("n5-d0.5"), ModeIndex(1));
    ASSERT_FALSE(cl.has_complex_pair());
    EXPECT_NEAR(cl.real_roots[0], 0.6662194607771456984, 1e-13);
    const auto& rp = std::get<RealPair>(cl.extra);
    EXPECT_NEAR(rp.second, -0.75967598465225469436, 1e-13);
    EXPECT_NEAR(rp.first, -4.9581099683150974613, 1e-13);
}

TEST(ClusterRoots, QuasiStaticRootIsKIndependent) {
    for (int k = 1; k <= 60; ++k) {
        const auto cl = cluster_roots(preset_model("worked"), ModeIndex(k));
        EXPECT_LE(std::abs(cl.real_roots[0]), 1e-12) << k;
    }
}

TEST(ClusterRoots, ImaginaryPartTracksWavenumber) {
    const auto toy = preset_model("toy");
    double prev = INFINITY;
    for (int k : {10, 40, 160, 640}) {
        const auto cl = cluster_roots(toy, ModeIndex(k));
        const double err = std::abs(cl.pair().im / ModeIndex(k).wavenumber() - std::sqrt(2.0));
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(ClusterRoots, InterlacingOverPresets) {
    for (const auto& p : ladder_presets()) {
        const auto clusters = cluster_range(p.model, 1, 50);
        for (const auto& cl : clusters) {
            ASSERT_EQ(cl.real_roots.size(), p.n);
            EXPECT_EQ(cl.sign_changes, p.n);
            for (std::size_t j = 0; j < p.n; ++j) {
                EXPECT_GT(cl.real_roots[j], -p.model.rate(j)) << p.name;
                if (j > 0) EXPECT_LT(cl.real_roots[j], -p.model.rate(j - 1)) << p.name;
            }
            EXPECT_LT(cl.max_scaled_residual, 1e-10) << p.name << " k=" << cl.k.value();
        }
    }
}

TEST(OracleRoots, SmallCases) {
    const auto lin = oracle_roots(Polynomial({1.0, 1.0}));
    ASSERT_EQ(lin.size(), 1u);
    EXPECT_EQ(lin[0], complex(-1.0, 0.0));
    const auto quad = oracle_roots(Polynomial({1.0, 0.0, 1.0}));
    ASSERT_EQ(quad.size(), 2u);
    EXPECT_NEAR(std::abs(quad[0] - complex(0.0, 1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(quad[1] - complex(0.0, -1.0)), 0.0, 1e-15);
}

TEST(OracleRoots, AgreesWithBracketing) {
    const auto toy = preset_model("toy");
    const auto z = oracle_roots(expand_coefficients(toy, ModeIndex(1)));
    EXPECT_LT(matching_distance(z, cluster_roots(toy, ModeIndex(1)).all_roots()), 1e-8);
    for (const char* name : {"n9-d0.5", "n9-d5", "n5-d1"})
        for (int k : {1, 5, 25}) {
            const auto m = preset_model(name);
            const auto oz = oracle_roots(expand_coefficients(m, ModeIndex(k)));
            EXPECT_LT(matching_distance(oz, cluster_roots(m, ModeIndex(k)).all_roots()), 1e-9 * m.max_rate())
                << name << " k=" << k;
        }
}

TEST(MatchingDistance, Bottleneck) {
    const std::vector<complex> a{{0, 0}, {1, 0}, {5, 1}};
    const std::vector<complex> b{{5, 1.5}, {0.1, 0}, {1, 0}};
    EXPECT_DOUBLE_EQ(matching_distance(a, b), 0.5);
    EXPECT_TRUE(std::isinf(matching_distance(a, std::vector<complex>{{0, 0}})));
}

TEST(ReducedMatrix, ToyEntries) {
    const auto a = reduced_matrix(preset_model("toy"), ModeIndex(1));
    const double want[3][3] = {{0, 1, 0}, {-2, 0, -1}, {-1, 0, -1}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a(i, j), want[i][j]) << i << "," << j;
}

TEST(ReducedMatrix, EigenResidual) {
    const auto toy = preset_model("toy");
    for (const auto& z : cluster_roots(toy, ModeIndex(1)).all_roots()) EXPECT_LT(eigen_residual(toy, ModeIndex(1), z), 1e-8);
    EXPECT_GT(eigen_residual(toy, ModeIndex(1), complex(0.0, 0.0)), 1e-3);
    EXPECT_GT(eigen_residual(toy, ModeIndex(1), complex(-0.2, 0.0)), 1e-3);
    EXPECT_LT(eigen_residual(preset_model("worked"), ModeIndex(4), complex(0.0, 0.0)), 1e-12);
    EXPECT_THROW(reduced_eigenvector(toy, ModeIndex(1), complex(-1.0, 0.0)), Error);
}
