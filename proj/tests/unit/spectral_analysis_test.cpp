#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ebm/presets.hpp"
#include "ebm/spectral_analysis.hpp"
#include "support/oracles.hpp"

using namespace ebm;

TEST(ConvergenceTable, QuasiStaticColumnIsZero) {
    const auto ks = mode_range(1, 30);
    const auto rep = convergence_table(preset_model("worked"), ks);
    for (const auto& row : rep.real_rows)
        if (row.j == 1) EXPECT_LE(std::abs(row.gap), 1e-12) << row.k;
}

TEST(ConvergenceTable, ToySettles) {
    const auto ks = mode_range(1, 50);
    const auto rep = convergence_table(preset_model("toy"), ks);
    ASSERT_EQ(rep.real_rows.size(), 50u);
    const double tenth = rep.real_rows[9].scaled_gap;
    const double last = rep.real_rows[49].scaled_gap;
    EXPECT_GT(tenth, 0.0);
    EXPECT_LE(last / tenth, 2.0);
    EXPECT_GE(last / tenth, 0.5);
    for (const auto& pr : rep.pair_rows) {
        ASSERT_TRUE(pr.is_complex);
        EXPECT_NEAR(pr.q / (2.0 * pr.k - 1.0), std::sqrt(2.0), 1.0 / (2.0 * pr.k - 1.0));
        EXPECT_LE(pr.q_scaled, rep.m3);
    }
    EXPECT_GE(rep.min_gap, -1e-12);
}

TEST(ConvergenceTable, RejectsBadLists) {
    EXPECT_THROW(convergence_table(preset_model("toy"), std::vector<ModeIndex>{}), Error);
    EXPECT_THROW(convergence_table(preset_model("toy"), std::vector<ModeIndex>{ModeIndex(3), ModeIndex(2)}), Error);
    EXPECT_THROW(mode_range(3, 2), Error);
}

TEST(ExplicitK0, WorkedExample) {
    const auto c = explicit_k0(preset_model("worked"));
    EXPECT_EQ(c.max_weight, 5.0);
    EXPECT_EQ(c.min_weight, 2.5);
    EXPECT_EQ(c.min_rate_gap, 5.0);
    EXPECT_EQ(c.mu, 12.5 / 121.0);
    EXPECT_EQ(c.radius, 31.0);
    EXPECT_DOUBLE_EQ(c.delta, c.mu / 4.0);
    EXPECT_DOUBLE_EQ(c.epsilon, c.mu / 4.0);
    EXPECT_DOUBLE_EQ(c.m, c.mu * c.delta / 2.0);
    EXPECT_NEAR(c.k0_raw, oracle::worked_k0, 1e-9 * oracle::worked_k0);
    EXPECT_EQ(c.k0, std::ceil(oracle::worked_k0));
}

TEST(ExplicitK0, InvariantsOnPresets) {
    for (const auto& p : ladder_presets()) {
        if (p.n < 2) {
            try {
                explicit_k0(p.model);
                FAIL() << p.name;
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::unsupported_configuration);
            }
            continue;
        }
        const auto c = explicit_k0(p.model);
        EXPECT_LE(c.mu, std::min(c.min_rate_gap / 4.0, p.model.rate(0) / 4.0)) << p.name;
        EXPECT_GT(c.delta, 0.0);
        EXPECT_GT(c.epsilon, 0.0);
        EXPECT_GT(c.m, 0.0);
        EXPECT_GE(c.k0, 1.0);
        EXPECT_EQ(c.k0, std::ceil(c.k0_raw));
    }
}

TEST(VerifyBounds, WorkedModel) {
    const auto ks = mode_range(1, 60);
    const auto rep = verify_bounds(preset_model("worked"), ks);
    EXPECT_TRUE(rep.all_hold());
    const auto& sep = rep.at("limit_root_separation");
    ASSERT_TRUE(sep.applicable);
    EXPECT_NEAR(sep.slack, 7.5 - 2.0 * (12.5 / 121.0), 1e-12);
    EXPECT_EQ(rep.at("pole_neighborhood_lower_bound").evaluations, 2u);
    EXPECT_TRUE(rep.at("strip_membership").holds);
    EXPECT_EQ(rep.first_complex_k, 3);  // k = 1, 2 carry a real extra pair
    ASSERT_TRUE(rep.certificate.has_value());
    EXPECT_GT(rep.certificate->k0, 1000.0);
}

TEST(VerifyBounds, AllPresetsHold) {
    const auto ks = mode_range(1, 40);
    for (const auto& p : ladder_presets()) {
        const auto rep = verify_bounds(p.model, ks);
        for (const auto& c : rep.checks) {
            if (!c.applicable) continue;
            EXPECT_TRUE(c.holds) << p.name << " " << c.name << " measured " << c.measured << " bound " << c.bound;
            EXPECT_GT(c.evaluations, 0u) << c.name;
        }
        EXPECT_EQ(rep.certificate.has_value(), p.n >= 2);
    }
}

TEST(VerifyBounds, ViolationsAreRecorded) {
    BoundCheck c{"demo"};
    c.record(3, 2, 1.5, 1.0, -0.5, false);
    c.record(4, 2, 0.5, 1.0, 0.5, true);
    EXPECT_FALSE(c.holds);
    ASSERT_EQ(c.violations.size(), 1u);
    EXPECT_EQ(c.violations[0].k, 3);
    EXPECT_EQ(c.slack, -0.5);
    EXPECT_EQ(c.measured, 1.5);
}
