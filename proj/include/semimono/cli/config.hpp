#pragma once

#include "semimono/analysis.hpp"
#include "semimono/monotone.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace semimono::cli {

/// Bad config text: parse failure, unknown key, out-of-range value. The
/// message starts with "<section> block:" and names the offending key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fully resolved experiment configuration. Every field has a value after
/// parsing; defaults are filled in and echoed by to_ini / to_json.
struct ExperimentConfig {
    struct Operator {
        std::size_t nodes = 16;
        double length = 1.0;
        int m = 2;  // resolvent power of the smoothing family
        double x0_scale = 1.0;
        bool operator==(const Operator&) const = default;
    };
    struct Noise {
        std::size_t k_dim = 2;
        double q = 0.5;  // Q = q I
        double rate = 2.0;
        std::string mark = "gaussian";
        double mark_location = 0.0;
        double mark_scale = 0.5;
        std::vector<double> drift{0.2, -0.1};
        double g_scale = 0.5;
        bool operator==(const Noise&) const = default;
    };
    struct Scheme {
        std::string kind = "limit";
        double lambda = 1e-2;
        double horizon = 1.0;
        std::size_t steps = 256;
        double alpha = 0.25;
        double tolerance = 1e-10;
        int max_picard = 25;
        double coupling = 0.1;
        double overflow_guard = 1e12;
        int max_splits = 20;
        double membership_tol = 1e-7;
        bool operator==(const Scheme&) const = default;
    };
    struct Study {
        std::string kind = "solve";
        std::size_t n_paths = 1;
        std::uint64_t seed_base = 1;
        std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
        std::vector<double> deltas{1e-1, 1e-2, 1e-3};
        std::vector<std::size_t> levels{256, 512, 1024};
        std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
        double tolerance_factor = 5.0;
        double kappa = 64.0;
        bool operator==(const Study&) const = default;
    };
    struct Output {
        std::string directory = "semimono-out";
        int verbosity = 1;
        bool operator==(const Output&) const = default;
    };
    struct Runner {
        std::size_t workers = 1;
        bool operator==(const Runner&) const = default;
    };

    Operator op;
    monotone::GraphSpec graph{"identity", {}};
    std::string potential = "identity";
    Noise noise;
    Scheme scheme;
    Study study;
    Output output;
    Runner runner;

    bool operator==(const ExperimentConfig&) const = default;

    analysis::ProblemSetup setup() const;
    noise::SemimartingaleSpec noise_spec() const;
};

/// Sorted names of the accepted study kinds.
std::vector<std::string> study_kinds();

/// Parses INI text (sections operator, graph, potential, noise, scheme,
/// study, output, runner). Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolved config as INI text; parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

}  // namespace semimono::cli
