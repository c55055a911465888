#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/prony_model.hpp"

namespace ebm {

/// Named experiment configuration. The ladder presets use h = 1, r_i = 5 i
/// and equal contributions b_i = h r_i / N.
struct Preset {
    std::string name;
    std::size_t n = 0;
    double modulus = 0.0;
    PronyModel model;
};

inline constexpr double preset_moduli[] = {0.5, 1.0, 5.0};
inline constexpr std::size_t preset_sizes[] = {1, 2, 5, 9};
inline constexpr std::size_t figure_sizes[] = {5, 9};

inline std::string ladder_name(std::size_t n, double modulus) {
    return "n" + std::to_string(n) + "-d" + format_double(modulus);
}

inline PronyModel ladder_model(std::size_t n, double modulus, double h = 1.0) {
    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) rates[i] = 5.0 * static_cast<double>(i + 1);
    return equal_contribution_model(std::move(rates), h, modulus);
}

inline Preset ladder_preset(std::size_t n, double modulus) {
    return {ladder_name(n, modulus), n, modulus, ladder_model(n, modulus)};
}

/// Every ladder preset, N in {1, 2, 5, 9} by D in {0.5, 1, 5}.
inline std::vector<Preset> ladder_presets() {
    std::vector<Preset> out;
    for (std::size_t n : preset_sizes)
        for (double d : preset_moduli) out.push_back(ladder_preset(n, d));
    return out;
}

/// The six figure configurations, N in {5, 9} by D in {0.5, 1, 5}.
inline std::vector<Preset> figure_presets() {
    std::vector<Preset> out;
    for (std::size_t n : figure_sizes)
        for (double d : preset_moduli) out.push_back(ladder_preset(n, d));
    return out;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : ladder_presets()) names.push_back(p.name);
    names.emplace_back("toy");
    names.emplace_back("worked");
    return names;
}

/// "toy" is N = 1, D = 2, b = 1, r = 1; "worked" is N = 2, D = 1,
/// b = (2.5, 5), r = (5, 10) (the same model as n2-d1).
inline PronyModel preset_model(std::string_view name) {
    if (name == "toy") return PronyModel::create({1.0}, {1.0}, 2.0);
    if (name == "worked") return PronyModel::create({5.0, 10.0}, {2.5, 5.0}, 1.0);
    for (auto& p : ladder_presets())
        if (p.name == name) return std::move(p.model);
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::config_error, "unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace ebm
