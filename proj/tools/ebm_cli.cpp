// Command-line front end for the clustered-spectrum library.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebm/ebm.hpp"
#include "ebm/io.hpp"

namespace fs = std::filesystem;
using ebm::io::json;

namespace {

constexpr double residual_tolerance = 1e-10;

struct ModelSource {
    std::string path;
    std::string preset;
};

struct Output {
    std::string format = "csv";
    std::string path;
};

struct Range {
    int k_min = 1;
    int k_max = 40;
};

void add_model_options(CLI::App* cmd, ModelSource& src) {
    auto* model = cmd->add_option("--model", src.path, "model config (JSON)");
    auto* preset = cmd->add_option("--preset", src.preset, "named preset");
    model->excludes(preset);
    preset->excludes(model);
}

void add_output_options(CLI::App* cmd, Output& out, bool csv_allowed = true) {
    if (csv_allowed)
        cmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", out.path, "output file (default: stdout)");
}

void add_range_options(CLI::App* cmd, Range& range) {
    cmd->add_option("--k-min", range.k_min, "first mode index")->check(CLI::PositiveNumber);
    cmd->add_option("--k-max", range.k_max, "last mode index")->check(CLI::PositiveNumber);
}

ebm::io::ModelConfig load(const ModelSource& src) {
    if (!src.path.empty()) return ebm::io::load_model_config(src.path);
    if (!src.preset.empty()) return {ebm::preset_model(src.preset), std::nullopt};
    throw ebm::Error(ebm::ErrorCode::config_error, "give --model <path> or --preset <name>");
}

void emit(const Output& out, const std::string& content) {
    if (out.path.empty()) std::cout << content << std::flush;
    else ebm::io::write_file(out.path, content);
}

void emit(const Output& out, const json& doc, const std::string& csv) {
    emit(out, out.format == "json" ? doc.dump(2) + "\n" : csv);
}

void check_range(const Range& r) {
    if (r.k_max < r.k_min)
        throw ebm::Error(ebm::ErrorCode::config_error, "k range is empty (--k-max < --k-min)");
}

[[noreturn]] void tolerance_failure(const std::string& what, double value) {
    throw ebm::Error(ebm::ErrorCode::tolerance_exceeded,
                     what + " " + ebm::format_double(value) + " exceeds " + ebm::format_double(residual_tolerance));
}

double worst_residual(const std::vector<ebm::SpectralCluster>& clusters) {
    double worst = 0.0;
    for (const auto& c : clusters) worst = std::max(worst, c.max_scaled_residual);
    return worst;
}

double worst_limit_residual(const ebm::PronyModel& model, const ebm::LimitSpectrum& limit) {
    double worst = 0.0;
    for (double a : limit.roots) worst = std::max(worst, ebm::scaled_residual(model, std::nullopt, {a, 0.0}));
    return worst;
}

int run_spectrum(const ModelSource& src, const Range& range, const Output& out) {
    check_range(range);
    const auto model = load(src).model;
    const auto clusters = ebm::cluster_range(model, range.k_min, range.k_max);
    emit(out, ebm::io::spectrum_json(model, clusters), ebm::io::spectrum_csv(model, clusters));
    if (const double w = worst_residual(clusters); w > residual_tolerance) tolerance_failure("scaled residual", w);
    return 0;
}

int run_limit(const ModelSource& src, const Output& out) {
    const auto model = load(src).model;
    const auto limit = ebm::limit_roots(model);
    emit(out, ebm::io::limit_json(model, limit), ebm::io::limit_csv(model, limit));
    if (const double w = worst_limit_residual(model, limit); w > residual_tolerance)
        tolerance_failure("scaled residual", w);
    return 0;
}

int run_converge(const ModelSource& src, const Range& range, const Output& out) {
    check_range(range);
    const auto model = load(src).model;
    const auto ks = ebm::mode_range(range.k_min, range.k_max);
    const auto sweep = ebm::spectral_sweep(model, ks);
    const auto rep = ebm::convergence_table(model, sweep);
    emit(out, ebm::io::convergence_json(rep), ebm::io::convergence_csv(rep));
    if (const double w = worst_residual(sweep.clusters); w > residual_tolerance)
        tolerance_failure("scaled residual", w);
    return 0;
}

int run_bounds(const ModelSource& src, const Range& range, const Output& out) {
    check_range(range);
    const auto model = load(src).model;
    const auto rep = ebm::verify_bounds(model, ebm::mode_range(range.k_min, range.k_max));
    emit(out, ebm::io::bound_report_json(rep).dump(2) + "\n");
    return 0;
}

int run_k0(const ModelSource& src, const Output& out) {
    const auto cert = ebm::explicit_k0(load(src).model);
    emit(out, ebm::io::k0_json(cert), ebm::io::k0_csv(cert));
    return 0;
}

int run_observe(const ModelSource& src, int k, const Output& out) {
    const auto model = load(src).model;
    const auto cluster = ebm::cluster_roots(model, ebm::ModeIndex(k));
    emit(out, ebm::io::observation_to_json(ebm::observe(cluster)).dump(2) + "\n");
    if (cluster.max_scaled_residual > residual_tolerance)
        tolerance_failure("scaled residual", cluster.max_scaled_residual);
    return 0;
}

int run_invert(const std::string& first, const std::string& second, const Output& out) {
    const auto rec = ebm::recover_model(ebm::io::load_observation(first), ebm::io::load_observation(second));
    std::string csv = "parameter,index,value\n";
    for (std::size_t i = 0; i < rec.model.size(); ++i) {
        csv += "r," + std::to_string(i + 1) + "," + ebm::format_double(rec.model.rate(i)) + "\n";
        csv += "b," + std::to_string(i + 1) + "," + ebm::format_double(rec.model.weight(i)) + "\n";
    }
    csv += "D,0," + ebm::format_double(rec.modulus) + "\n";
    emit(out, ebm::io::recovery_json(rec), csv);
    // Tolerance on re-running the forward problem, relative to the rate scale.
    const double forward = rec.diagnostics.forward_distance / std::max(1.0, rec.model.max_rate());
    if (forward > 1e-8)
        throw ebm::Error(ebm::ErrorCode::tolerance_exceeded,
                         "recovered model reproduces the clusters only to " + ebm::format_double(forward));
    return 0;
}

int run_perturb(const ModelSource& src, int k1, int k2, double noise, std::size_t trials, std::uint64_t seed,
                const Output& out) {
    const auto model = load(src).model;
    const auto table =
        ebm::perturbation_study(model, ebm::ModeIndex(k1), ebm::ModeIndex(k2), noise, trials, seed);
    emit(out, ebm::io::perturbation_json(table), ebm::io::perturbation_csv(table));
    return 0;
}

struct FitArgs {
    std::string mode = "least-squares";
    double t_min = 0.1;
    double t_max = 10.0;
    std::size_t points = 100;
};

int run_fit(const ModelSource& src, const FitArgs& args, const Output& out) {
    if (src.path.empty())
        throw ebm::Error(ebm::ErrorCode::config_error, "fit needs --model with a 'stretched' block");
    const auto cfg = load(src);
    if (!cfg.stretched) throw ebm::Error(ebm::ErrorCode::config_error, "model config has no 'stretched' block");
    if (args.points < 2 || !(args.t_min > 0.0) || !(args.t_max > args.t_min))
        throw ebm::Error(ebm::ErrorCode::config_error, "fit grid needs 0 < t-min < t-max and >= 2 points");
    std::vector<double> grid(args.points);
    for (std::size_t i = 0; i < args.points; ++i)
        grid[i] = args.t_min + (args.t_max - args.t_min) * static_cast<double>(i) / static_cast<double>(args.points - 1);

    ebm::FitOptions opts;
    opts.mode = args.mode == "equal" ? ebm::FitMode::equal_contribution : ebm::FitMode::least_squares;
    opts.rates.assign(cfg.model.rates().begin(), cfg.model.rates().end());
    opts.h = cfg.model.h();
    opts.instantaneous_modulus = cfg.model.modulus();
    const auto fit = ebm::fit_prony(*cfg.stretched, cfg.model.size(), grid, opts);

    json doc = ebm::io::model_to_json(fit.model);
    doc["stretched"] = {{"tau", cfg.stretched->tau}, {"beta", cfg.stretched->beta}};
    json report;
    report["model"] = doc;
    report["h"] = fit.model.h();
    report["residual_sum_squares"] = fit.residual_sum_squares;
    std::string csv = "t,target,fitted\n";
    for (double t : grid)
        csv += ebm::format_double(t) + "," + ebm::format_double((*cfg.stretched)(t)) + "," +
               ebm::format_double(ebm::relaxation_value(fit.model, t)) + "\n";
    emit(out, report, csv);
    return 0;
}

int run_reproduce(const std::string& dir, const Range& range) {
    check_range(range);
    const fs::path root(dir);
    const auto ks = ebm::mode_range(range.k_min, range.k_max);
    json files = json::array();
    double worst = 0.0;

    for (const auto& preset : ebm::figure_presets()) {
        const auto sweep = ebm::spectral_sweep(preset.model, ks);
        worst = std::max(worst, worst_residual(sweep.clusters));
        worst = std::max(worst, worst_limit_residual(preset.model, sweep.limit));

        const std::string spectrum = "spectrum/" + preset.name + ".csv";
        ebm::io::write_file(root / spectrum, ebm::io::spectrum_csv(preset.model, sweep.clusters));
        files.push_back({{"path", spectrum}, {"kind", "spectrum"}, {"preset", preset.name},
                         {"N", preset.n}, {"D", preset.modulus}});

        const std::string limit = "limit/" + preset.name + ".csv";
        ebm::io::write_file(root / limit, ebm::io::limit_csv(preset.model, sweep.limit));
        files.push_back({{"path", limit}, {"kind", "limit"}, {"preset", preset.name},
                         {"N", preset.n}, {"D", preset.modulus}});

        if (preset.n == 5) {
            const std::string conv = "convergence/" + preset.name + ".csv";
            ebm::io::write_file(root / conv,
                                ebm::io::convergence_csv(ebm::convergence_table(preset.model, sweep)));
            files.push_back({{"path", conv}, {"kind", "convergence"}, {"preset", preset.name},
                             {"N", preset.n}, {"D", preset.modulus}});
        }
    }
    json manifest;
    manifest["k_min"] = range.k_min;
    manifest["k_max"] = range.k_max;
    manifest["h"] = 1.0;
    manifest["rates"] = "r_i = 5 i";
    manifest["weights"] = "b_i = h r_i / N";
    manifest["files"] = std::move(files);
    ebm::io::write_file(root / "manifest.json", manifest.dump(2) + "\n");
    if (worst > residual_tolerance) tolerance_failure("scaled residual", worst);
    return 0;
}

void report_error(std::string_view code, const std::string& message) {
    std::cerr << ebm::io::error_json(code, message).dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustered spectra of the extended Burgers model"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    ModelSource src;
    Output out;
    Range range;

    auto* spectrum = app.add_subcommand("spectrum", "all N+2 roots per mode index");
    add_model_options(spectrum, src);
    add_range_options(spectrum, range);
    add_output_options(spectrum, out);

    auto* limit = app.add_subcommand("limit", "roots of the limit polynomial");
    add_model_options(limit, src);
    add_output_options(limit, out);

    auto* converge = app.add_subcommand("converge", "convergence of clusters to the limit spectrum");
    add_model_options(converge, src);
    add_range_options(converge, range);
    add_output_options(converge, out);

    auto* bounds = app.add_subcommand("bounds", "check the interlacing, identity and gap bounds");
    add_model_options(bounds, src);
    add_range_options(bounds, range);
    add_output_options(bounds, out, false);

    auto* k0 = app.add_subcommand("k0", "explicit large-k certificate");
    add_model_options(k0, src);
    add_output_options(k0, out);

    int observe_k = 1;
    auto* observe = app.add_subcommand("observe", "write one cluster as an observation file");
    add_model_options(observe, src);
    observe->add_option("--k", observe_k, "mode index")->check(CLI::PositiveNumber);
    add_output_options(observe, out, false);

    std::string obs_a, obs_b;
    auto* invert = app.add_subcommand("invert", "recover D, r, b from two observed clusters");
    invert->add_option("first", obs_a, "observation file")->required()->check(CLI::ExistingFile);
    invert->add_option("second", obs_b, "observation file")->required()->check(CLI::ExistingFile);
    add_output_options(invert, out);

    int k1 = 1, k2 = 2;
    double noise = 0.0;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    auto* perturb = app.add_subcommand("perturb", "recovery errors under relative noise on the roots");
    add_model_options(perturb, src);
    perturb->add_option("--k1", k1)->check(CLI::PositiveNumber);
    perturb->add_option("--k2", k2)->check(CLI::PositiveNumber);
    perturb->add_option("--noise", noise)->check(CLI::NonNegativeNumber);
    perturb->add_option("--trials", trials);
    perturb->add_option("--seed", seed);
    add_output_options(perturb, out);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Prony fit of the stretched exponential in a model config");
    add_model_options(fit, src);
    fit->add_option("--mode", fit_args.mode)->check(CLI::IsMember({"equal", "least-squares"}));
    fit->add_option("--t-min", fit_args.t_min);
    fit->add_option("--t-max", fit_args.t_max);
    fit->add_option("--points", fit_args.points);
    add_output_options(fit, out);

    std::string figures_dir;
    Range figures_range{1, 100};
    auto* figures = app.add_subcommand("reproduce-figures", "spectrum, limit and convergence data for every figure preset");
    figures->add_option("--out", figures_dir, "output directory")->required();
    add_range_options(figures, figures_range);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return 2;
    }

    try {
        if (*spectrum) return run_spectrum(src, range, out);
        if (*limit) return run_limit(src, out);
        if (*converge) return run_converge(src, range, out);
        if (*bounds) return run_bounds(src, range, out);
        if (*k0) return run_k0(src, out);
        if (*observe) return run_observe(src, observe_k, out);
        if (*invert) return run_invert(obs_a, obs_b, out);
        if (*perturb) return run_perturb(src, k1, k2, noise, trials, seed, out);
        if (*fit) return run_fit(src, fit_args, out);
        if (*figures) return run_reproduce(figures_dir, figures_range);
    } catch (const ebm::Error& e) {
        report_error(ebm::to_string(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 1;
}
