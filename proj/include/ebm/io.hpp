#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebm/error.hpp"
#include "ebm/inverse.hpp"
#include "ebm/numeric.hpp"
#include "ebm/prony_model.hpp"
#include "ebm/rootfinder.hpp"
#include "ebm/spectral_analysis.hpp"

namespace ebm::io {

using json = nlohmann::ordered_json;

// NaN and infinities have no JSON literal; they become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json numbers(std::span<const double> xs) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::config_error, origin + ": " + e.what());
    }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Model configuration
//
//   {"N": 2, "D": 1.0, "r": [5, 10], "b": [2.5, 5]}
//   {"N": 5, "D": 0.5, "r": [5, 10, 15, 20, 25], "h": 1.0,
//    "stretched": {"tau": 1.0, "beta": 0.5}}

struct ModelConfig {
    PronyModel model;
    std::optional<StretchedExponential> stretched;
};

namespace detail {

inline double require_number(const json& doc, const char* key) {
    if (!doc.contains(key)) throw Error(ErrorCode::config_error, std::string("missing field '") + key + "'");
    const auto& v = doc.at(key);
    if (!v.is_number()) throw Error(ErrorCode::config_error, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

inline std::vector<double> require_array(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_array()) throw Error(ErrorCode::config_error, std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number())
            throw Error(ErrorCode::config_error, std::string("field '") + key + "' must hold numbers only");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace detail

inline ModelConfig parse_model_config(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::config_error, "model config must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "N" && key != "D" && key != "r" && key != "b" && key != "h" && key != "stretched")
            throw Error(ErrorCode::config_error, "unknown model config field '" + key + "'");
    const double n_raw = detail::require_number(doc, "N");
    if (n_raw < 1 || n_raw != std::floor(n_raw))
        throw Error(ErrorCode::config_error, "field 'N' must be a positive integer");
    const auto n = static_cast<std::size_t>(n_raw);
    const double d = detail::require_number(doc, "D");
    if (!doc.contains("r")) throw Error(ErrorCode::config_error, "missing field 'r'");
    auto rates = detail::require_array(doc, "r");
    if (rates.size() != n)
        throw Error(ErrorCode::config_error, "field 'r' has " + std::to_string(rates.size()) + " entries, N = " +
                                                 std::to_string(n));
    const bool has_b = doc.contains("b"), has_h = doc.contains("h");
    if (has_b == has_h) throw Error(ErrorCode::config_error, "give exactly one of 'b' or 'h'");

    ModelConfig cfg{has_b ? validate_model(n, rates, detail::require_array(doc, "b"), d)
                          : equal_contribution_model(rates, detail::require_number(doc, "h"), d),
                    std::nullopt};
    if (doc.contains("stretched")) {
        const auto& s = doc.at("stretched");
        if (!s.is_object()) throw Error(ErrorCode::config_error, "field 'stretched' must be an object");
        cfg.stretched = StretchedExponential::create(detail::require_number(s, "tau"),
                                                     detail::require_number(s, "beta"));
    }
    return cfg;
}

inline ModelConfig load_model_config(const std::filesystem::path& path) {
    return parse_model_config(parse_json(read_file(path), path.string()));
}

inline json model_to_json(const PronyModel& model) {
    json j;
    j["N"] = model.size();
    j["D"] = model.modulus();
    j["r"] = numbers(model.rates());
    j["b"] = numbers(model.weights());
    return j;
}

// ---------------------------------------------------------------------------
// Observations: {"k": 3, "roots": [[re, im], ...]}

inline json observation_to_json(const ClusterObservation& obs) {
    json j;
    j["k"] = obs.k.value();
    json roots = json::array();
    for (const auto& z : obs.roots) roots.push_back(json::array({z.real(), z.imag()}));
    j["roots"] = std::move(roots);
    return j;
}

inline ClusterObservation parse_observation(const json& doc) {
    if (!doc.is_object() || !doc.contains("k") || !doc.contains("roots"))
        throw Error(ErrorCode::config_error, "observation needs fields 'k' and 'roots'");
    if (!doc.at("k").is_number_integer())
        throw Error(ErrorCode::config_error, "observation field 'k' must be an integer");
    ClusterObservation obs{ModeIndex(doc.at("k").get<int>()), {}};
    for (const auto& pair : doc.at("roots")) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw Error(ErrorCode::config_error, "each root must be a [re, im] pair of numbers");
        obs.roots.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    check_observation(obs);
    return obs;
}

inline ClusterObservation load_observation(const std::filesystem::path& path) {
    return parse_observation(parse_json(read_file(path), path.string()));
}

// ---------------------------------------------------------------------------
// Spectrum: one row per root; a conjugate pair is a single "complex" row
// carrying q > 0, a real extra pair is two "extra_real" rows.

struct SpectrumRow {
    int k;
    const char* kind;
    std::size_t index;
    double re;
    double im;
    double residual;
};

inline std::vector<SpectrumRow> spectrum_rows(const PronyModel& model, const std::vector<SpectralCluster>& clusters) {
    std::vector<SpectrumRow> rows;
    const std::size_t n = model.size();
    for (const auto& cl : clusters) {
        const int k = cl.k.value();
        for (std::size_t j = 0; j < n; ++j)
            rows.push_back({k, "real", j + 1, cl.real_roots[j], 0.0,
                            scaled_residual(model, cl.k, complex(cl.real_roots[j], 0.0))});
        if (cl.has_complex_pair()) {
            const auto& p = cl.pair();
            rows.push_back({k, "complex", n + 1, p.re, p.im, scaled_residual(model, cl.k, complex(p.re, p.im))});
        } else {
            const auto& rp = std::get<RealPair>(cl.extra);
            rows.push_back({k, "extra_real", n + 1, rp.second, 0.0,
                            scaled_residual(model, cl.k, complex(rp.second, 0.0))});
            rows.push_back({k, "extra_real", n + 2, rp.first, 0.0,
                            scaled_residual(model, cl.k, complex(rp.first, 0.0))});
        }
    }
    return rows;
}

inline std::string spectrum_csv(const PronyModel& model, const std::vector<SpectralCluster>& clusters) {
    std::string out = "k,kind,index,re,im,residual\n";
    for (const auto& r : spectrum_rows(model, clusters))
        out += std::to_string(r.k) + "," + r.kind + "," + std::to_string(r.index) + "," + format_double(r.re) +
               "," + format_double(r.im) + "," + format_double(r.residual) + "\n";
    return out;
}

inline json spectrum_json(const PronyModel& model, const std::vector<SpectralCluster>& clusters) {
    json j;
    j["model"] = model_to_json(model);
    json ks = json::array();
    for (const auto& cl : clusters) {
        json c;
        c["k"] = cl.k.value();
        c["real_roots"] = numbers(cl.real_roots);
        if (cl.has_complex_pair()) {
            c["pair"] = {{"kind", "complex"}, {"re", cl.pair().re}, {"im", cl.pair().im},
                         {"borderline", cl.pair().borderline}};
        } else {
            const auto& rp = std::get<RealPair>(cl.extra);
            c["pair"] = {{"kind", "real"}, {"first", rp.first}, {"second", rp.second}};
        }
        c["max_scaled_residual"] = number(cl.max_scaled_residual);
        c["deflation_residual"] = number(cl.deflation_residual);
        ks.push_back(std::move(c));
    }
    j["clusters"] = std::move(ks);
    return j;
}

// ---------------------------------------------------------------------------
// Limit spectrum

inline std::string limit_csv(const PronyModel& model, const LimitSpectrum& limit) {
    std::string out = "j,root,lower_pole,upper_pole,secular_residual\n";
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double lower = -model.rate(j);
        const double upper = j == 0 ? std::numeric_limits<double>::infinity() : -model.rate(j - 1);
        out += std::to_string(j + 1) + "," + format_double(limit.roots[j]) + "," + format_double(lower) + "," +
               format_double(upper) + "," + format_double(limit.secular_residuals[j]) + "\n";
    }
    return out;
}

inline json limit_json(const PronyModel& model, const LimitSpectrum& limit) {
    json j;
    j["model"] = model_to_json(model);
    j["roots"] = numbers(limit.roots);
    j["secular_residuals"] = numbers(limit.secular_residuals);
    j["upper_bound"] = number(limit.upper_bound);
    return j;
}

// ---------------------------------------------------------------------------
// Convergence: columns k,series,j,value,limit,error,scaled_error.
//   real: value a_j^k, limit a_j, error a_j - a_j^k, scaled k^2 * error
//   p:    value p^k, limit -sum b/(2D), error |p^k - limit|, scaled k^2 * error
//   q:    value q^k, limit (2k-1) sqrt(D), error |q^k - limit|, scaled (2k-1) * error
// p and q rows are written only for k with a complex pair.

inline std::string convergence_csv(const ConvergenceReport& rep) {
    std::string out = "k,series,j,value,limit,error,scaled_error\n";
    std::size_t next_real = 0;
    for (const auto& pr : rep.pair_rows) {
        for (; next_real < rep.real_rows.size() && rep.real_rows[next_real].k == pr.k; ++next_real) {
            const auto& r = rep.real_rows[next_real];
            out += std::to_string(r.k) + ",real," + std::to_string(r.j) + "," + format_double(r.root) + "," +
                   format_double(r.limit) + "," + format_double(r.gap) + "," + format_double(r.scaled_gap) + "\n";
        }
        if (!pr.is_complex) continue;
        const double w = 2.0 * pr.k - 1.0;
        out += std::to_string(pr.k) + ",p,0," + format_double(pr.p) + "," + format_double(rep.p_limit) + "," +
               format_double(pr.p_error) + "," + format_double(pr.p_scaled) + "\n";
        out += std::to_string(pr.k) + ",q,0," + format_double(pr.q) + "," + format_double(w * rep.sqrt_modulus) +
               "," + format_double(pr.q_error) + "," + format_double(pr.q_scaled) + "\n";
    }
    return out;
}

inline json convergence_json(const ConvergenceReport& rep) {
    json j;
    j["limit_roots"] = numbers(rep.limit.roots);
    j["p_limit"] = number(rep.p_limit);
    j["sqrt_D"] = number(rep.sqrt_modulus);
    j["M1"] = number(rep.m1);
    j["M2"] = number(rep.m2);
    j["M3"] = number(rep.m3);
    j["min_gap"] = number(rep.min_gap);
    json real = json::array();
    for (const auto& r : rep.real_rows)
        real.push_back({{"k", r.k}, {"j", r.j}, {"root", number(r.root)}, {"gap", number(r.gap)},
                        {"scaled_gap", number(r.scaled_gap)}});
    j["real"] = std::move(real);
    json pair = json::array();
    for (const auto& p : rep.pair_rows)
        pair.push_back({{"k", p.k}, {"complex", p.is_complex}, {"p", number(p.p)}, {"q", number(p.q)},
                        {"p_error", number(p.p_error)}, {"p_scaled", number(p.p_scaled)},
                        {"q_error", number(p.q_error)}, {"q_scaled", number(p.q_scaled)}});
    j["pair"] = std::move(pair);
    return j;
}

// ---------------------------------------------------------------------------
// k0 certificate and bound report

inline json k0_json(const K0Certificate& c) {
    json j;
    j["N"] = c.n;
    j["B"] = number(c.max_weight);
    j["b_min"] = number(c.min_weight);
    j["r_gap"] = number(c.min_rate_gap);
    j["mu"] = number(c.mu);
    j["R"] = number(c.radius);
    j["delta"] = number(c.delta);
    j["epsilon"] = number(c.epsilon);
    j["m"] = number(c.m);
    j["k0_raw"] = number(c.k0_raw);
    j["k0"] = number(c.k0);
    return j;
}

inline std::string k0_csv(const K0Certificate& c) {
    std::string out = "name,value\n";
    const json doc = k0_json(c);
    for (const auto& [key, value] : doc.items())
        out += key + "," + (value.is_null() ? std::string("nan") : format_double(value.get<double>())) + "\n";
    return out;
}

inline json bound_report_json(const BoundReport& rep) {
    json j;
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json v = json::array();
        for (const auto& x : c.violations)
            v.push_back({{"k", x.k}, {"j", x.j}, {"measured", number(x.measured)}, {"bound", number(x.bound)}});
        checks.push_back({{"name", c.name}, {"applicable", c.applicable}, {"holds", c.holds},
                          {"measured", number(c.measured)}, {"bound", number(c.bound)}, {"slack", number(c.slack)},
                          {"evaluations", c.evaluations}, {"violations", std::move(v)}, {"note", c.note}});
    }
    j["checks"] = std::move(checks);
    j["all_hold"] = rep.all_hold();
    j["first_complex_k"] = rep.first_complex_k;
    j["M1"] = number(rep.m1);
    j["M2"] = number(rep.m2);
    j["M3"] = number(rep.m3);
    j["certificate"] = rep.certificate ? k0_json(*rep.certificate) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Inverse problem

inline json recovery_json(const RecoveredModel& rec) {
    json j;
    j["model"] = model_to_json(rec.model);
    j["D"] = number(rec.modulus);
    const auto& d = rec.diagnostics;
    j["diagnostics"] = {{"lambda2_residual", number(d.lambda2_residual)},
                        {"rate_residuals", numbers(d.rate_residuals)},
                        {"weight_residuals", numbers(d.weight_residuals)},
                        {"D_consistency", number(d.modulus_consistency)},
                        {"reconstruction_error", number(d.reconstruction_error)},
                        {"forward_distance", number(d.forward_distance)}};
    return j;
}

inline json perturbation_json(const PerturbationTable& t) {
    json j;
    j["noise"] = number(t.noise);
    j["seed"] = t.seed;
    j["trials"] = t.trials.size();
    j["failures"] = t.failures;
    j["max_rate_error"] = number(t.max_rate_error);
    j["max_weight_error"] = number(t.max_weight_error);
    j["max_D_error"] = number(t.max_modulus_error);
    json rows = json::array();
    for (const auto& r : t.trials)
        rows.push_back({{"trial", r.trial}, {"recovered", r.recovered}, {"failure", r.failure},
                        {"rate_error", number(r.rate_error)}, {"weight_error", number(r.weight_error)},
                        {"D_error", number(r.modulus_error)}});
    j["rows"] = std::move(rows);
    return j;
}

inline std::string perturbation_csv(const PerturbationTable& t) {
    std::string out = "trial,recovered,failure,rate_error,weight_error,D_error\n";
    for (const auto& r : t.trials)
        out += std::to_string(r.trial) + "," + (r.recovered ? "1" : "0") + "," + r.failure + "," +
               format_double(r.rate_error) + "," + format_double(r.weight_error) + "," +
               format_double(r.modulus_error) + "\n";
    return out;
}

inline json error_json(std::string_view code, const std::string& message) {
    json j;
    j["error"] = {{"code", code}, {"message", message}};
    return j;
}

}  // namespace ebm::io
