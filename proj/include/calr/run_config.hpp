#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "calr/errors.hpp"
#include "calr/grid_io.hpp"
#include "calr/slab.hpp"
#include "calr/source.hpp"

namespace calr {

// Run configuration file: sections in brackets, one "key = value" per line,
// '#' starts a comment. Lists are comma separated.
//
//   [slab]      a_rule (fixed | d1_over_tau | d0_over_tau), a, xi_over_a, lambda
//   [source]    kind (rectangle | circle | grid), x0, y0, d, h, R, Q, grid_file
//   [sweep]     beta, delta_max, delta_min, points_per_decade, delta
//   [bounds]    d_star, Lambda
//   [output]    path, format (csv | json)
//   [numerics]  tol, workers
//   [verify]    lemma_samples, seed, mutate (none | q_sign)

enum class ARule { fixed, d1_over_tau, d0_over_tau };

struct RunConfig {
    ARule a_rule = ARule::fixed;
    double a = 1.0;
    double xi_over_a = 0.25;
    double lambda = 1.0;

    std::string kind = "rectangle";
    double x0 = 6.0, y0 = 6.0;
    double d = 1.0, h = 1.0;
    double R = 1.0;
    double Q = 1.0;
    std::string grid_file;

    std::vector<double> beta = {0.8};
    double delta_max = 1e-4;
    double delta_min = 1e-12;
    int points_per_decade = 25;
    /// Explicit delta list; when set it replaces the log range (it may be empty).
    std::optional<std::vector<double>> delta;

    std::optional<double> d_star;
    std::optional<double> Lambda;

    std::string out_path = "-";
    std::string format = "csv";

    double tol = 1e-8;
    unsigned workers = 1;

    std::size_t lemma_samples = 10000;
    std::uint64_t seed = 20140601;
    std::string mutate = "none";

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw InvalidParameter("config: '" + key + "' expects a number, got '" + v + "'");
    }
    if (used != v.size()) throw InvalidParameter("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x)) throw InvalidParameter("config: '" + key + "' expects an integer");
    return static_cast<long long>(x);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

inline const char* a_rule_name(ARule r) {
    switch (r) {
        case ARule::fixed: return "fixed";
        case ARule::d1_over_tau: return "d1_over_tau";
        case ARule::d0_over_tau: return "d0_over_tau";
    }
    return "fixed";
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
    RunConfig c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidParameter("config line " + std::to_string(lineno) + ": bad section");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string v = detail::trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        using detail::parse_double;
        if (full == "slab.a_rule") {
            if (v == "fixed") c.a_rule = ARule::fixed;
            else if (v == "d1_over_tau") c.a_rule = ARule::d1_over_tau;
            else if (v == "d0_over_tau") c.a_rule = ARule::d0_over_tau;
            else throw InvalidParameter("config: unknown a_rule '" + v + "'");
        } else if (full == "slab.a") c.a = parse_double(full, v);
        else if (full == "slab.xi_over_a") c.xi_over_a = parse_double(full, v);
        else if (full == "slab.lambda") c.lambda = parse_double(full, v);
        else if (full == "source.kind") c.kind = v;
        else if (full == "source.x0") c.x0 = parse_double(full, v);
        else if (full == "source.y0") c.y0 = parse_double(full, v);
        else if (full == "source.d") c.d = parse_double(full, v);
        else if (full == "source.h") c.h = parse_double(full, v);
        else if (full == "source.R") c.R = parse_double(full, v);
        else if (full == "source.Q") c.Q = parse_double(full, v);
        else if (full == "source.grid_file") c.grid_file = v;
        else if (full == "sweep.beta") c.beta = detail::parse_list(full, v);
        else if (full == "sweep.delta_max") c.delta_max = parse_double(full, v);
        else if (full == "sweep.delta_min") c.delta_min = parse_double(full, v);
        else if (full == "sweep.points_per_decade") c.points_per_decade = static_cast<int>(detail::parse_int(full, v));
        else if (full == "sweep.delta") c.delta = detail::parse_list(full, v);
        else if (full == "bounds.d_star") c.d_star = parse_double(full, v);
        else if (full == "bounds.Lambda") c.Lambda = parse_double(full, v);
        else if (full == "output.path") c.out_path = v;
        else if (full == "output.format") c.format = v;
        else if (full == "numerics.tol") c.tol = parse_double(full, v);
        else if (full == "numerics.workers") c.workers = static_cast<unsigned>(detail::parse_int(full, v));
        else if (full == "verify.lemma_samples") c.lemma_samples = static_cast<std::size_t>(detail::parse_int(full, v));
        else if (full == "verify.seed") c.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (full == "verify.mutate") c.mutate = v;
        else throw InvalidParameter("config: unknown key '" + full + "'");
    }
    return c;
}

inline RunConfig parse_run_config(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in);
}

inline RunConfig read_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file " + path);
    return parse_run_config(in);
}

inline std::string to_string(const RunConfig& c) {
    using detail::fmt;
    std::ostringstream o;
    o << "[slab]\n";
    o << "a_rule = " << detail::a_rule_name(c.a_rule) << '\n';
    o << "a = " << fmt(c.a) << '\n';
    o << "xi_over_a = " << fmt(c.xi_over_a) << '\n';
    o << "lambda = " << fmt(c.lambda) << '\n';
    o << "\n[source]\n";
    o << "kind = " << c.kind << '\n';
    o << "x0 = " << fmt(c.x0) << '\n' << "y0 = " << fmt(c.y0) << '\n';
    o << "d = " << fmt(c.d) << '\n' << "h = " << fmt(c.h) << '\n';
    o << "R = " << fmt(c.R) << '\n' << "Q = " << fmt(c.Q) << '\n';
    if (!c.grid_file.empty()) o << "grid_file = " << c.grid_file << '\n';
    o << "\n[sweep]\n";
    o << "beta = " << detail::fmt_list(c.beta) << '\n';
    o << "delta_max = " << fmt(c.delta_max) << '\n';
    o << "delta_min = " << fmt(c.delta_min) << '\n';
    o << "points_per_decade = " << c.points_per_decade << '\n';
    if (c.delta) o << "delta = " << detail::fmt_list(*c.delta) << '\n';
    if (c.d_star || c.Lambda) {
        o << "\n[bounds]\n";
        if (c.d_star) o << "d_star = " << fmt(*c.d_star) << '\n';
        if (c.Lambda) o << "Lambda = " << fmt(*c.Lambda) << '\n';
    }
    o << "\n[output]\n";
    o << "path = " << c.out_path << '\n';
    o << "format = " << c.format << '\n';
    o << "\n[numerics]\n";
    o << "tol = " << fmt(c.tol) << '\n';
    o << "workers = " << c.workers << '\n';
    o << "\n[verify]\n";
    o << "lemma_samples = " << c.lemma_samples << '\n';
    o << "seed = " << c.seed << '\n';
    o << "mutate = " << c.mutate << '\n';
    return o.str();
}

/// Builds the configured source.
inline SourcePtr make_source(const RunConfig& c) {
    if (c.kind == "rectangle") return std::make_shared<RectangleSource>(c.x0, c.y0, c.d, c.h, c.Q);
    if (c.kind == "circle") return std::make_shared<CircleSource>(c.x0, c.y0, c.R, c.Q);
    if (c.kind == "grid") {
        if (c.grid_file.empty()) throw InvalidParameter("config: grid source needs grid_file");
        return read_grid_file(c.grid_file);
    }
    throw InvalidParameter("config: unknown source kind '" + c.kind + "'");
}

/// Slab for one beta; a follows the configured rule (for the figure presets a
/// moves with beta so the source stays at a fixed place relative to tau(beta) a).
inline SlabConfig slab_for(const RunConfig& c, const ChargeDensity& src, double beta, double delta) {
    SlabConfig s;
    const SupportBox b = src.support();
    switch (c.a_rule) {
        case ARule::fixed: s.a = c.a; break;
        case ARule::d1_over_tau: s.a = b.d1 / tau(beta); break;
        case ARule::d0_over_tau: s.a = b.d0 / tau(beta); break;
    }
    s.beta = beta;
    s.lambda = c.lambda;
    s.delta = delta;
    s.xi = c.xi_over_a * s.a;
    return s;
}

/// Delta values in descending order.
inline std::vector<double> delta_grid(const RunConfig& c) {
    if (c.delta) {
        std::vector<double> v = *c.delta;
        std::sort(v.begin(), v.end(), std::greater<>());
        return v;
    }
    std::vector<double> out;
    const double top = std::log10(c.delta_max);
    const double bottom = std::log10(c.delta_min);
    const long n = std::lround((top - bottom) * c.points_per_decade);
    for (long i = 0; i <= n; ++i) out.push_back(std::pow(10.0, top - static_cast<double>(i) / c.points_per_decade));
    return out;
}

/// Checks every parameter before any computation.
inline void validate(const RunConfig& c) {
    if (c.format != "csv" && c.format != "json") throw InvalidParameter("config: format must be csv or json");
    if (c.mutate != "none" && c.mutate != "q_sign") throw InvalidParameter("config: mutate must be none or q_sign");
    if (!(c.tol > 0.0) || !(c.tol < 1.0)) throw InvalidParameter("config: tol must lie in (0, 1)");
    if (c.workers == 0) throw InvalidParameter("config: workers must be at least 1");
    if (!(c.xi_over_a > 0.0) || !(c.xi_over_a <= 1.0)) throw InvalidParameter("config: xi_over_a must lie in (0, 1]");
    if (c.a_rule == ARule::fixed && !(c.a > 0.0)) throw InvalidParameter("config: a must be positive");
    if (!c.delta) {
        if (!(c.delta_min > 0.0) || !(c.delta_max < 1.0) || !(c.delta_min <= c.delta_max)) {
            throw InvalidParameter("config: need 0 < delta_min <= delta_max < 1");
        }
        if (c.points_per_decade < 1) throw InvalidParameter("config: points_per_decade must be positive");
    } else {
        for (double d : *c.delta) {
            if (!(d > 0.0 && d < 1.0)) throw InvalidParameter("config: delta values must lie in (0, 1)");
        }
    }
    const SourcePtr src = make_source(c);
    for (double beta : c.beta) {
        const SlabConfig s = slab_for(c, *src, beta, 0.5);
        s.validate();
        const auto rep = calr::validate(*src, s.a);
        if (!rep.ok()) throw InvalidParameter("config: " + rep.issues.front());
    }
}

// ---------------------------------------------------------------------------
// Figure presets. Q = 1 and xi = a/4 throughout; the source is centred at (6, 6).

inline std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig6", "fig7"}; }

inline RunConfig preset(const std::string& name) {
    RunConfig c;
    c.x0 = 6.0;
    c.y0 = 6.0;
    c.d = c.h = 1.0;
    c.R = 1.0;
    c.Q = 1.0;
    c.xi_over_a = 0.25;
    c.lambda = 1.0;
    c.points_per_decade = 25;
    c.delta_max = 1e-4;
    c.beta = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    if (name == "fig2") {
        c.kind = "rectangle";
        c.a_rule = ARule::d1_over_tau;
        c.delta_min = 1e-16;
    } else if (name == "fig3") {
        c.kind = "circle";
        c.a_rule = ARule::d1_over_tau;
        c.delta_min = 1e-12;
    } else if (name == "fig6") {
        c.kind = "rectangle";
        c.a_rule = ARule::d0_over_tau;
        c.delta_min = 1e-16;
    } else if (name == "fig7") {
        c.kind = "circle";
        c.a_rule = ARule::d0_over_tau;
        c.delta_min = 1e-12;
    } else {
        throw InvalidParameter("unknown preset '" + name + "'");
    }
    return c;
}

}  // namespace calr
