#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "ebm/charpoly.hpp"
#include "ebm/presets.hpp"
#include "support/oracles.hpp"

using namespace ebm;

namespace {

const PronyModel toy = preset_model("toy");
const PronyModel worked = preset_model("worked");
const PronyModel unit = PronyModel::create({1.0}, {1.0}, 1.0);

}  // namespace

TEST(ModeIndex, Wavenumber) {
    EXPECT_EQ(ModeIndex(1).wavenumber(), 1.0);
    EXPECT_EQ(ModeIndex(3).wavenumber_sq(), 25.0);
    EXPECT_EQ(ModeIndex(2).inverse_wavenumber_sq(), 1.0 / 9.0);
    EXPECT_THROW(ModeIndex(0), Error);
}

TEST(CharPoly, LimitValues) {
    EXPECT_EQ(eval_limit_poly(unit, 0.0), 0.0);
    EXPECT_EQ(eval_limit_poly(toy, -0.5), 0.0);
    EXPECT_EQ(eval_limit_poly(worked, -5.0), -12.5);
    EXPECT_EQ(eval_limit_poly(worked, complex(-5.0, 0.0)), complex(-12.5, 0.0));
}

TEST(CharPoly, ModeValues) {
    EXPECT_EQ(eval_char_poly(toy, ModeIndex(1), -1.0), -1.0);
    for (int k : {1, 2, 7, 50}) EXPECT_EQ(eval_char_poly(unit, ModeIndex(k), 0.0), 0.0);
    for (const auto& p : ladder_presets())
        for (int k : {1, 4, 30})
            for (double r : p.model.rates())
                EXPECT_EQ(eval_char_poly(p.model, ModeIndex(k), -r), eval_limit_poly(p.model, -r)) << p.name;
}

TEST(CharPoly, Secular) {
    EXPECT_NEAR(eval_secular(toy, 1e12), 2.0, 1e-11);
    EXPECT_EQ(eval_secular(toy, -0.5), 0.0);
    EXPECT_EQ(eval_secular(worked, 0.0), 0.0);
    EXPECT_NEAR(eval_secular(toy, 1.0, ModeIndex(1)), 2.0 + 1.0 - 0.5, 1e-15);
    try {
        eval_secular(worked, -5.0);
        FAIL() << "pole not reported";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::pole);
    }
}

TEST(CharPoly, Expansion) {
    const auto cubic = expand_coefficients(toy, ModeIndex(1));
    ASSERT_EQ(cubic.degree(), 3u);
    EXPECT_EQ(std::vector<double>(cubic.coeffs().begin(), cubic.coeffs().end()), (std::vector<double>{1, 2, 1, 1}));
    const auto line = expand_coefficients(toy);
    EXPECT_EQ(std::vector<double>(line.coeffs().begin(), line.coeffs().end()), (std::vector<double>{1, 2}));
    for (int k : {1, 2, 5, 100}) {
        const auto p = expand_coefficients(preset_model("n9-d5"), ModeIndex(k));
        EXPECT_EQ(p.degree(), 11u);
        EXPECT_EQ(p.leading(), 1.0 / ((2.0 * k - 1) * (2.0 * k - 1)));
    }
}

TEST(CharPoly, ExpansionMatchesProductForm) {
    for (const auto& p : ladder_presets())
        for (int k : {1, 3, 20}) {
            const ModeIndex mk(k);
            const auto poly = expand_coefficients(p.model, mk);
            const auto plain = expand_coefficients(p.model, mk, Expansion::plain);
            for (double x : {-0.3, 1.7, -7.1, -23.9}) {
                const double ref = eval_char_poly(p.model, mk, x);
                const double scale = poly.magnitude(std::max(1.0, std::abs(x)));
                EXPECT_LE(std::abs(poly(x) - ref), 1e-14 * scale) << p.name << " k=" << k << " x=" << x;
                EXPECT_LE(std::abs(plain(x) - ref), 1e-12 * scale) << p.name << " k=" << k << " x=" << x;
            }
        }
}

TEST(CharPoly, Derivative) {
    for (double x : {-3.0, 0.0, 2.5}) EXPECT_EQ(eval_derivative(toy, x), 2.0);
    for (const auto& p : ladder_presets())
        EXPECT_EQ(eval_derivative(p.model, 0.0, ModeIndex(3)), eval_derivative(p.model, 0.0)) << p.name;
    for (std::optional<ModeIndex> k : {std::optional<ModeIndex>{}, std::optional<ModeIndex>{ModeIndex(2)}}) {
        const auto f = [&](double x) { return k ? eval_char_poly(worked, *k, x) : eval_limit_poly(worked, x); };
        const double fd = oracle::central_difference(f, 1.0);
        EXPECT_NEAR(eval_derivative(worked, 1.0, k), fd, 1e-6 * std::abs(fd));
    }
    const complex z(-1.0, 2.0);
    const complex h(1e-6, 0.0);
    const complex fd = (eval_char_poly(worked, ModeIndex(1), z + h) - eval_char_poly(worked, ModeIndex(1), z - h)) /
                       (2.0 * h);
    EXPECT_LT(std::abs(eval_derivative(worked, z, ModeIndex(1)) - fd), 1e-6 * std::abs(fd));
}

TEST(CharPoly, ScaledResidualIsRelative) {
    EXPECT_EQ(scaled_residual(toy, std::nullopt, complex(-0.5, 0.0)), 0.0);
    EXPECT_GT(scaled_residual(toy, ModeIndex(1), complex(3.0, 0.0)), 0.1);
}
