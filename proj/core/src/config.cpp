#include "oifs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include "oifs/errors.hpp"

namespace oifs {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end || v.empty()) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
    return out;
}

int to_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end || v.empty()) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "on" || v == "yes" || v == "1") {
        return true;
    }
    if (v == "false" || v == "off" || v == "no" || v == "0") {
        return false;
    }
    throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split(value, ',')) {
        out.push_back(to_double(key, item));
    }
    return out;
}

ModelKind to_model(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "fe" || v == "FE") {
        return ModelKind::FE;
    }
    if (v == "rom" || v == "ROM" || v == "opinf") {
        return ModelKind::ROM;
    }
    throw ConfigError("key '" + key + "': model must be 'fe' or 'rom', got '" + value + "'");
}

bool is_integer_multiple(double span, double dt) {
    try {
        (void)step_count(0.0, span, dt);
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

}  // namespace

std::vector<double> default_lambda_grid() { return {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}; }

SpaceTimeFunction parse_function(const std::string& selector) {
    const std::string s = trim(selector);
    if (s == "zero") {
        return [](double, double, double) { return 0.0; };
    }
    const auto colon = s.find(':');
    const std::string name = trim(s.substr(0, colon));
    const std::string args = colon == std::string::npos ? std::string{} : s.substr(colon + 1);
    if (name == "const") {
        const double c = to_double(selector, args);
        return [c](double, double, double) { return c; };
    }
    if (name == "affine") {
        const auto coef = to_doubles(selector, args);
        if (coef.size() != 3) {
            throw ConfigError("affine selector needs three coefficients: affine:a,b,c");
        }
        return [a = coef[0], bx = coef[1], cy = coef[2]](double, double x, double y) { return a + bx * x + cy * y; };
    }
    throw ConfigError("unknown function selector '" + selector + "'");
}

std::map<std::string, std::string> read_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    const auto kv = read_key_values(text);

    struct Override {
        std::optional<Rect> rect;
        std::optional<int> nx;
        std::optional<int> ny;
        std::optional<ModelKind> model;
        std::optional<int> r;
        std::optional<double> lambda;
        std::optional<std::string> operators;
    };
    std::map<int, Override> overrides;
    std::optional<std::vector<std::string>> models;
    std::optional<double> h;
    std::optional<double> angle_deg;
    bool b_given = false;
    static const std::regex sub_key(R"(subdomain\.([0-9]+)\.([a-z_]+))");

    for (const auto& [key, value] : kv) {
        std::smatch m;
        if (key == "problem.epsilon") {
            cfg.problem.epsilon = to_double(key, value);
        } else if (key == "problem.sigma") {
            cfg.problem.sigma = to_double(key, value);
        } else if (key == "problem.b") {
            const auto b = to_doubles(key, value);
            if (b.size() != 2) {
                throw ConfigError("problem.b needs two components");
            }
            cfg.problem.b = {b[0], b[1]};
            b_given = true;
        } else if (key == "problem.b_angle") {
            angle_deg = to_double(key, value);
        } else if (key == "problem.forcing") {
            parse_function(value);
            cfg.problem.forcing = value;
        } else if (key == "problem.dirichlet") {
            parse_function(value);
            cfg.problem.dirichlet = value;
        } else if (key == "problem.domain") {
            const auto d = to_doubles(key, value);
            if (d.size() != 4) {
                throw ConfigError("problem.domain needs x0,x1,y0,y1");
            }
            cfg.problem.domain = {d[0], d[1], d[2], d[3]};
        } else if (key == "problem.T") {
            cfg.problem.t_final = to_double(key, value);
        } else if (key == "problem.dt") {
            cfg.problem.dt = to_double(key, value);
        } else if (key == "mesh.h") {
            h = to_double(key, value);
        } else if (key == "mesh.nx") {
            cfg.mesh.nx = to_int(key, value);
        } else if (key == "mesh.ny") {
            cfg.mesh.ny = to_int(key, value);
        } else if (key == "decomposition.layout") {
            cfg.decomposition.layout = value;
        } else if (key == "decomposition.overlap") {
            cfg.decomposition.overlap = to_double(key, value);
        } else if (key == "decomposition.models") {
            models = split(value, ',');
        } else if (key == "training.t_end") {
            cfg.training.t_end = to_double(key, value);
        } else if (key == "training.r") {
            cfg.training.r = to_int(key, value);
        } else if (key == "training.lambda") {
            cfg.training.lambda = to_double(key, value);
        } else if (key == "mono.r") {
            cfg.mono.r = to_int(key, value);
        } else if (key == "mono.lambda") {
            cfg.mono.lambda = to_double(key, value);
        } else if (key == "mono.lambda_search") {
            cfg.mono.lambda_search = to_bool(key, value);
        } else if (key == "mono.lambda_grid") {
            cfg.mono.lambda_grid = to_doubles(key, value);
        } else if (key == "schwarz.tol") {
            cfg.schwarz.tol = to_double(key, value);
        } else if (key == "schwarz.max_iters") {
            cfg.schwarz.max_iters = to_int(key, value);
        } else if (key == "schwarz.steps_per_window") {
            cfg.schwarz.steps_per_window = to_int(key, value);
        } else if (key == "output.dir") {
            cfg.output.dir = value;
        } else if (key == "output.field_times") {
            cfg.output.field_times = value.empty() ? std::vector<double>{} : to_doubles(key, value);
        } else if (std::regex_match(key, m, sub_key)) {
            const int idx = to_int(key, m[1].str());
            const std::string field = m[2].str();
            auto& o = overrides[idx];
            if (field == "rect") {
                const auto d = to_doubles(key, value);
                if (d.size() != 4) {
                    throw ConfigError(key + " needs x0,x1,y0,y1");
                }
                o.rect = Rect{d[0], d[1], d[2], d[3]};
            } else if (field == "nx") {
                o.nx = to_int(key, value);
            } else if (field == "ny") {
                o.ny = to_int(key, value);
            } else if (field == "model") {
                o.model = to_model(key, value);
            } else if (field == "r") {
                o.r = to_int(key, value);
            } else if (field == "lambda") {
                o.lambda = to_double(key, value);
            } else if (field == "operators") {
                o.operators = value;
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    if (angle_deg) {
        if (b_given) {
            throw ConfigError("give either problem.b or problem.b_angle, not both");
        }
        const double a = *angle_deg * std::numbers::pi / 180.0;
        cfg.problem.b = {std::cos(a), std::sin(a)};
    }
    if (h) {
        if (!(*h > 0.0)) {
            throw ConfigError("mesh.h must be > 0");
        }
        cfg.mesh.nx = static_cast<int>(std::lround(cfg.problem.domain.width() / *h));
        cfg.mesh.ny = static_cast<int>(std::lround(cfg.problem.domain.height() / *h));
    }
    if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1) {
        throw ConfigError("mesh cell counts must be >= 1");
    }

    auto& subs = cfg.decomposition.subdomains;
    if (cfg.decomposition.layout == "quadrants") {
        const double hx = cfg.problem.domain.width() / cfg.mesh.nx;
        subs = quadrant_layout(cfg.problem.domain, cfg.decomposition.overlap, hx);
        // Default model assignment: FE in the upper-right quadrant, ROMs elsewhere.
        const std::vector<std::string> default_models{"rom", "rom", "rom", "fe"};
        const auto& names = models ? *models : default_models;
        if (names.size() != subs.size()) {
            throw ConfigError("decomposition.models must list one model per quadrant (4)");
        }
        for (std::size_t i = 0; i < subs.size(); ++i) {
            subs[i].model = to_model("decomposition.models", names[i]);
            subs[i].ny = static_cast<int>(std::lround(subs[i].rect.height() / (cfg.problem.domain.height() / cfg.mesh.ny)));
        }
        for (const auto& [idx, o] : overrides) {
            if (o.rect || o.nx || o.ny) {
                throw ConfigError("subdomain rect/nx/ny need decomposition.layout = explicit");
            }
        }
    } else if (cfg.decomposition.layout == "explicit") {
        if (models) {
            throw ConfigError("decomposition.models applies to the quadrant layout only");
        }
        int expected = 1;
        for (const auto& [idx, o] : overrides) {
            if (idx != expected++) {
                throw ConfigError("explicit subdomains must be numbered 1, 2, ... without gaps");
            }
            if (!o.rect) {
                throw ConfigError("subdomain." + std::to_string(idx) + ".rect is required");
            }
            SubdomainSpec s;
            s.rect = *o.rect;
            const double hx = cfg.problem.domain.width() / cfg.mesh.nx;
            const double hy = cfg.problem.domain.height() / cfg.mesh.ny;
            s.nx = o.nx.value_or(std::max(1, static_cast<int>(std::lround(s.rect.width() / hx))));
            s.ny = o.ny.value_or(std::max(1, static_cast<int>(std::lround(s.rect.height() / hy))));
            subs.push_back(s);
        }
        if (subs.empty()) {
            throw ConfigError("explicit layout needs subdomain.<i>.rect entries");
        }
    } else {
        throw ConfigError("decomposition.layout must be 'quadrants' or 'explicit'");
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
        subs[i].r = cfg.training.r;
        subs[i].lambda = cfg.training.lambda;
    }
    for (const auto& [idx, o] : overrides) {
        if (idx < 1 || static_cast<std::size_t>(idx) > subs.size()) {
            throw ConfigError("subdomain index " + std::to_string(idx) + " out of range");
        }
        auto& s = subs[static_cast<std::size_t>(idx - 1)];
        if (o.model) s.model = *o.model;
        if (o.r) s.r = *o.r;
        if (o.lambda) s.lambda = *o.lambda;
        if (o.operators) s.operator_source = *o.operators;
    }

    validate(cfg);
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate(const RunConfig& cfg) {
    validate(cfg.cdr_params());
    validate(cfg.problem.domain);
    if (!(cfg.problem.dt > 0.0) || !(cfg.problem.t_final > 0.0)) {
        throw ConfigError("problem.dt and problem.T must be > 0");
    }
    if (!is_integer_multiple(cfg.problem.t_final, cfg.problem.dt)) {
        throw ConfigError("problem.dt does not divide problem.T");
    }
    if (!(cfg.training.t_end > 0.0) || cfg.training.t_end > cfg.problem.t_final ||
        !is_integer_multiple(cfg.training.t_end, cfg.problem.dt)) {
        throw ConfigError("training.t_end must lie in (0, T] and be a multiple of dt");
    }
    if (cfg.training.r < 1 || cfg.mono.r < 1) {
        throw ConfigError("ROM dimensions must be >= 1");
    }
    if (!(cfg.training.lambda >= 0.0) || !(cfg.mono.lambda >= 0.0)) {
        throw ConfigError("regularization weights must be >= 0");
    }
    for (double l : cfg.mono.lambda_grid) {
        if (!(l >= 0.0)) {
            throw ConfigError("lambda grid entries must be >= 0");
        }
    }
    for (double t : cfg.output.field_times) {
        if (t < 0.0 || t > cfg.problem.t_final || !is_integer_multiple(t, cfg.problem.dt)) {
            throw ConfigError("output.field_times must be multiples of dt within [0, T]");
        }
    }
    validate(cfg.schwarz_config(false));
}

CdrParams RunConfig::cdr_params() const {
    CdrParams p;
    p.epsilon = problem.epsilon;
    p.sigma = problem.sigma;
    p.b = problem.b;
    p.forcing = parse_function(problem.forcing);
    p.dirichlet = parse_function(problem.dirichlet);
    return p;
}

StructuredMesh RunConfig::global_mesh() const { return StructuredMesh(problem.domain, mesh.nx, mesh.ny); }

SchwarzConfig RunConfig::schwarz_config(bool all_fe, std::optional<double> t_end) const {
    SchwarzConfig sc;
    sc.domain = problem.domain;
    sc.subdomains = decomposition.subdomains;
    if (all_fe) {
        for (auto& s : sc.subdomains) {
            s.model = ModelKind::FE;
        }
    }
    sc.dt = problem.dt;
    sc.t_final = t_end.value_or(problem.t_final);
    sc.tol = schwarz.tol;
    sc.max_iters = schwarz.max_iters;
    sc.steps_per_window = schwarz.steps_per_window;
    return sc;
}

std::vector<double> RunConfig::mono_lambda_grid() const {
    return mono.lambda_grid.empty() ? default_lambda_grid() : mono.lambda_grid;
}

}  // namespace oifs
