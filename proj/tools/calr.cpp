// calr: sweeps, single evaluations and verification runs for the slab-lens model.
//
// Exit codes: 0 success, 1 verification failure or runtime error,
// 2 configuration or output error, 3 numeric warning in the results.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "calr/calr.hpp"

namespace {

struct Common {
    std::string config_path;
    std::string preset;
    std::string out;
    std::string format;
    unsigned workers = 0;
    double tol = 0.0;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

calr::RunConfig load(const Common& o) {
    calr::RunConfig c;
    try {
        if (!o.config_path.empty() && !o.preset.empty()) throw ConfigError("use either --config or --preset");
        if (!o.config_path.empty()) c = calr::read_run_config(o.config_path);
        if (!o.preset.empty()) c = calr::preset(o.preset);
        if (!o.out.empty()) c.out_path = o.out;
        if (!o.format.empty()) c.format = o.format;
        if (o.workers > 0) c.workers = o.workers;
        if (o.tol > 0.0) c.tol = o.tol;
        calr::validate(c);
    } catch (const calr::InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    return c;
}

// Writes through a temporary buffer so a bad path is reported before anything is lost.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
    if (!f) throw ConfigError("write failed for " + path);
}

void add_common(CLI::App* cmd, Common& o) {
    cmd->add_option("--config", o.config_path, "run configuration file");
    cmd->add_option("--preset", o.preset, "figure preset (fig2, fig3, fig6, fig7)");
    cmd->add_option("--out", o.out, "output path ('-' for stdout)");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--tol", o.tol, "relative tolerance for the dissipation integral");
}

int run_sweep_cmd(const Common& o) {
    const calr::RunConfig c = load(o);
    const auto r = calr::run_sweep(c);
    std::ostringstream data;
    if (c.format == "json") {
        calr::write_sweep_json(data, r);
    } else {
        calr::write_sweep_csv(data, r);
    }
    emit(c.out_path, data.str());
    const std::string summary = calr::summary_json(r).dump(2) + "\n";
    if (c.out_path.empty() || c.out_path == "-") {
        std::cerr << summary;
    } else {
        emit(c.out_path + ".summary.json", summary);
    }
    if (r.warnings > 0) {
        std::cerr << r.warnings << " grid point(s) did not reach the requested tolerance\n";
        return 3;
    }
    return 0;
}

int run_eval_cmd(const Common& o, std::optional<double> beta, std::optional<double> delta) {
    calr::RunConfig c = load(o);
    const auto src = calr::make_source(c);
    const double b = beta.value_or(c.beta.empty() ? 1.0 : c.beta.front());
    const auto grid = calr::delta_grid(c);
    const double d = delta.value_or(grid.empty() ? 1e-8 : grid.back());
    calr::SlabConfig cfg = calr::slab_for(c, *src, b, d);
    try {
        cfg.validate();
    } catch (const calr::InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    const auto E = calr::dissipation(*src, cfg, c.tol);
    nlohmann::ordered_json j;
    j["beta"] = b;
    j["delta"] = d;
    j["a"] = cfg.a;
    j["xi"] = cfg.xi;
    j["lambda"] = cfg.lambda;
    j["E_xi"] = E.value;
    j["error_estimate"] = E.abs_error_estimate + E.tail_bound;
    j["k_max"] = E.k_max_used;
    j["warning"] = E.warning;
    try {
        j["k0"] = calr::k0(cfg);
    } catch (const calr::DeltaTooLarge&) {
        j["k0"] = nullptr;
    }
    const auto th = calr::admissible_delta_thresholds(b, cfg.lambda);
    j["thresholds"] = {{"delta_mu", th.delta_mu},
                       {"delta_0", th.delta_0},
                       {"delta_g", calr::delta_g(b, cfg.lambda)},
                       {"delta_L", calr::delta_L(b, cfg.lambda, cfg.xi / cfg.a)}};
    const auto box = src->support();
    j["regime"] = calr::to_json(calr::classify(*src, cfg, c.d_star.value_or(box.d0)));
    try {
        const auto ch = calr::upper_bound_chain(*src, cfg, calr::ChainMode::full);
        j["chain"] = {{"T1", ch.T1.value}, {"T2", ch.T2.value}, {"T3", ch.T3.value}, {"T4", ch.T4.value}, {"sum", ch.sum}};
    } catch (const calr::NotApplicable& e) {
        j["chain"] = e.what();
    }
    emit(c.out_path, j.dump(2) + "\n");
    return E.warning ? 3 : 0;
}

int run_verify_cmd(const Common& o, const std::string& mutate, std::optional<std::size_t> samples) {
    calr::RunConfig c = load(o);
    if (!mutate.empty()) c.mutate = mutate;
    if (samples) c.lemma_samples = *samples;
    try {
        calr::validate(c);
    } catch (const calr::InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    const auto rep = calr::run_verify(c);
    std::ostringstream text;
    if (c.format == "json") {
        text << calr::to_json(rep).dump(2) << '\n';
    } else {
        calr::write_text(text, rep);
    }
    emit(c.out_path, text.str());
    return rep.passed() ? 0 : 1;
}

int run_presets_cmd(const std::string& name) {
    if (name.empty()) {
        for (const auto& n : calr::preset_names()) std::cout << n << '\n';
        return 0;
    }
    try {
        std::cout << calr::to_string(calr::preset(name));
    } catch (const calr::InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipation sweeps and bound checks for a lossy slab lens"};
    app.require_subcommand(1);

    Common sweep_opt, eval_opt, verify_opt;
    auto* sweep = app.add_subcommand("sweep", "evaluate E_xi over a (beta, delta) grid");
    add_common(sweep, sweep_opt);

    auto* eval = app.add_subcommand("eval", "evaluate a single (beta, delta) point");
    add_common(eval, eval_opt);
    std::optional<double> eval_beta, eval_delta;
    eval->add_option("--beta", eval_beta, "beta (defaults to the first configured value)");
    eval->add_option("--delta", eval_delta, "delta (defaults to the smallest grid value)");

    auto* verify = app.add_subcommand("verify", "run the verification suites");
    add_common(verify, verify_opt);
    std::string mutate;
    std::optional<std::size_t> samples;
    verify->add_option("--mutate", mutate, "none or q_sign (corrupts the closed-form transform)");
    verify->add_option("--samples", samples, "lemma samples per inequality");

    auto* presets = app.add_subcommand("presets", "list presets or print one as a config file");
    std::string preset_name;
    presets->add_option("name", preset_name, "preset to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sweep) return run_sweep_cmd(sweep_opt);
        if (*eval) return run_eval_cmd(eval_opt, eval_beta, eval_delta);
        if (*verify) return run_verify_cmd(verify_opt, mutate, samples);
        if (*presets) return run_presets_cmd(preset_name);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
