#pragma once

// Named experiments: configuration records, the builtin catalog, runners
// for the verify/simulate/estimate commands, and report/ensemble IO.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dilastab/montecarlo.hpp"
#include "dilastab/scaling.hpp"

namespace dilastab {

struct ModelSpec {
    std::string family = "two_point";  // or "laplace"
    double intensity = 1.0;
    double jump_param = 1.0;
};

struct KernelSpec {
    std::string name;
    std::map<std::string, double> params;
};

struct LawSpec {
    std::string kind;  // ds | as | fg | conversion-roundtrip | ygamma
    double alpha = 0.0, delta = 0.0;       // ds
    double rho1 = 0.0, rho2 = 0.0;         // as
    std::vector<int> m_list{2, 3, 4};      // as
    std::string fg_pair = "power";         // fg: "power" or "sqrt-log"
    double f_exponent = 0.0, g_exponent = 0.0;
    bool expect_pass = true;
    std::optional<double> tol;             // overrides the experiment tol
    std::optional<double> beta;            // zbeta oracle override
    std::string oracle;                    // per-law oracle override
    std::size_t n_samples = 1000;          // conversion-roundtrip
    std::vector<double> gammas{1.2, 1.5, 1.8};  // ygamma
};

struct McSpec {
    std::vector<double> times{1.0, 2.0, 4.0};
    std::size_t n_paths = 20000;
    std::uint64_t seed = 20240811;
    double U = 50.0;
    int aggregate_m = 1;
    std::vector<ExponentQuery> queries;  // --validate grid; default derived
};

struct ExperimentSpec {
    std::string name = "custom";
    std::string command;           // verify | simulate | estimate
    std::string oracle = "gflp";   // gflp | levy | stable | zbeta | wiener
    ModelSpec model;
    std::optional<KernelSpec> kernel;
    double stable_index = 1.5;
    double sigma = 1.0;
    double hurst = 0.75;  // stable-levy oracle
    double beta = 0.0;
    double zbeta_C = 1.0;
    std::vector<LawSpec> laws;
    std::vector<std::vector<double>> times_grid{{1.0}, {1.0, 2.0}};
    std::vector<double> theta_grid{0.25, 0.5, 1.0, 2.0};
    std::vector<double> T_grid{0.5, 1.0, 2.0, 5.0};
    double tol = 1e-3;
    QuadratureConfig quadrature;
    McSpec mc;
    std::string estimator = "exponent";  // or "variance"
};

std::vector<std::string> builtin_names();
ExperimentSpec builtin_experiment(const std::string& name);

/// Reads a JSON config file, or falls back to the builtin of that name.
/// Throws std::invalid_argument with a usable message on bad configs.
ExperimentSpec load_experiment(const std::string& path_or_name);
ExperimentSpec parse_experiment_json(const std::string& text);

LevyModel make_model(const ModelSpec& spec);

/// Builds the exponent oracle the experiment record selects (or a
/// per-law override by name).
ExponentOracle make_oracle(const ExperimentSpec& spec, const std::string& kind,
                           std::optional<double> beta_override = {});

// Runners return the process exit code: 0 pass, 1 scientific failure,
// 2 usage/config error.  Reports land in out_dir.
int run_verify(const ExperimentSpec& spec, const std::string& out_dir,
               unsigned workers);
int run_simulate(const ExperimentSpec& spec, const std::string& out_dir,
                 unsigned workers, bool validate);
int run_estimate(const ExperimentSpec& spec, const std::string& out_dir,
                 unsigned workers);

// --- IO --------------------------------------------------------------

std::string format_g17(double x);  // 17 significant digits

void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path);
void write_ensemble_meta(const PathEnsemble& ensemble, const std::string& path,
                         bool with_timestamp = true);
void write_reports_json(const std::vector<VerificationReport>& reports,
                        const std::string& experiment, const std::string& path,
                        bool with_timestamp = true);
void write_reports_csv(const std::vector<VerificationReport>& reports,
                       const std::string& path);

}  // namespace dilastab
