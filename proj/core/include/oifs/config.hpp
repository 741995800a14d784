#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oifs/fem.hpp"
#include "oifs/schwarz.hpp"

namespace oifs {

struct ProblemConfig {
    double epsilon = 1e-2;
    double sigma = 1e-3;
    std::array<double, 2> b{0.5, 0.86602540378443865};  // angle 60 degrees
    std::string forcing = "const:1";
    std::string dirichlet = "zero";
    Rect domain{0.0, 1.0, 0.0, 1.0};
    double t_final = 5.0;
    double dt = 5e-3;
};

struct MeshConfig {
    int nx = 50;
    int ny = 50;
};

struct DecompositionConfig {
    std::string layout = "quadrants";  ///< "quadrants" or "explicit"
    double overlap = 0.08;
    /// Ordered subdomains; for "quadrants" derived from overlap and mesh spacing.
    std::vector<SubdomainSpec> subdomains;
};

struct TrainingConfig {
    double t_end = 0.5;
    int r = 10;
    double lambda = 0.0;
};

struct MonoConfig {
    int r = 30;
    double lambda = 1e-1;
    bool lambda_search = true;
    std::vector<double> lambda_grid;  ///< empty: 0 plus decades 1e-6 .. 1
};

struct SchwarzControls {
    double tol = 1e-9;
    int max_iters = 50;
    int steps_per_window = 1;
};

struct OutputConfig {
    std::string dir = "out";
    std::vector<double> field_times;  ///< empty: final time only
};

struct RunConfig {
    ProblemConfig problem;
    MeshConfig mesh;
    DecompositionConfig decomposition;
    TrainingConfig training;
    MonoConfig mono;
    SchwarzControls schwarz;
    OutputConfig output;

    [[nodiscard]] CdrParams cdr_params() const;
    [[nodiscard]] StructuredMesh global_mesh() const;
    /// Coupling setup over [0, t_end] (t_final when omitted); `all_fe` forces FE everywhere.
    [[nodiscard]] SchwarzConfig schwarz_config(bool all_fe, std::optional<double> t_end = std::nullopt) const;
    [[nodiscard]] std::vector<double> mono_lambda_grid() const;
};

/// Default lambda grid for the monolithic ROM: 0 and 1e-6, 1e-5, ..., 1.
std::vector<double> default_lambda_grid();

/// Parses a function selector: "zero", "const:<c>", "affine:<a>,<b>,<c>" (a + b x + c y).
SpaceTimeFunction parse_function(const std::string& selector);

/// Key/value pairs from the flat "section.key = value" format; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::string& text);

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Cross-field checks (positivity, timestep divisibility, decomposition coverage).
void validate(const RunConfig& config);

}  // namespace oifs
