#include "dilastab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace dilastab {

namespace {

using nlohmann::json;

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

GeneralizedScalingLaw make_fg_law(const LawSpec& law) {
    if (law.fg_pair == "power")
        return {LawFunction::power(law.f_exponent),
                LawFunction::power(law.g_exponent)};
    if (law.fg_pair == "sqrt-log") {
        // any pair with g(T) f(T)^2 = T; here h(T) = 1 + |log T|
        auto h = [](double T) { return 1.0 + std::abs(std::log(T)); };
        return {LawFunction::custom(
                    [h](double T) { return std::sqrt(T / h(T)); },
                    "sqrt(T/(1+|log T|))"),
                LawFunction::custom(h, "1+|log T|")};
    }
    throw std::invalid_argument("unknown fg pair '" + law.fg_pair + "'");
}

Kernel require_kernel(const ExperimentSpec& spec) {
    if (!spec.kernel)
        throw std::invalid_argument("experiment '" + spec.name +
                                    "' requires a kernel");
    return make_kernel(spec.kernel->name, spec.kernel->params);
}

// conversion-roundtrip pseudo-law: ds->as->ds and as->ds->as on random
// laws with |delta|,|rho2| bounded away from zero
VerificationReport run_roundtrip(const LawSpec& law, double tol) {
    VerificationReport report;
    report.law = "conversion-roundtrip";
    std::ostringstream os;
    os << law.n_samples << " random laws";
    report.grid = os.str();

    std::mt19937_64 rng(12345);
    auto draw = [&rng](double lo, double hi) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < law.n_samples; ++i) {
        ScalingLaw ds{draw(-3.0, 3.0), 0.0};
        do {
            ds.delta = draw(-3.0, 3.0);
        } while (std::abs(ds.delta) < 1e-3);
        const ScalingLaw back = as_to_ds(ds_to_as(ds));
        worst = std::max(worst, std::abs(back.alpha - ds.alpha) /
                                    std::max(std::abs(ds.alpha), 1.0));
        worst = std::max(worst, std::abs(back.delta - ds.delta) /
                                    std::max(std::abs(ds.delta), 1.0));

        AggregateSimilarityLaw as{draw(-3.0, 3.0), 0.0};
        do {
            as.rho2 = draw(-3.0, 3.0);
        } while (std::abs(as.rho2) < 1e-3);
        const AggregateSimilarityLaw back2 = ds_to_as(as_to_ds(as));
        worst = std::max(worst, std::abs(back2.rho1 - as.rho1) /
                                    std::max(std::abs(as.rho1), 1.0));
        worst = std::max(worst, std::abs(back2.rho2 - as.rho2) /
                                    std::max(std::abs(as.rho2), 1.0));
    }
    report.max_rel_err = worst;
    report.tol = tol;
    report.pass = worst <= tol;
    return report;
}

// ygamma pseudo-law: the teletraffic rigidity index rho = 1/(gamma-1)
// must map to ((3-gamma)/2, 1-gamma)
VerificationReport run_ygamma(const LawSpec& law, double tol) {
    VerificationReport report;
    report.law = "ygamma-mapping";
    std::ostringstream os;
    os << law.gammas.size() << " gamma values";
    report.grid = os.str();
    for (double gamma : law.gammas) {
        const double rho = 1.0 / (gamma - 1.0);
        const ScalingLaw got = as_to_ds({rho, rho});
        const ScalingLaw want{(3.0 - gamma) / 2.0, 1.0 - gamma};
        VerificationPoint pt;
        pt.scale = gamma;
        pt.times = {rho};
        pt.lhs = got.alpha;
        pt.rhs = want.alpha;
        pt.rel_err = std::max(
            std::abs(got.alpha - want.alpha) / std::max(std::abs(want.alpha), 1.0),
            std::abs(got.delta - want.delta) / std::max(std::abs(want.delta), 1.0));
        report.points.push_back(pt);
        report.max_rel_err = std::max(report.max_rel_err, pt.rel_err);
    }
    report.tol = tol;
    report.pass = report.max_rel_err <= tol;
    return report;
}

json law_to_json(const VerificationReport& r) {
    json points = json::array();
    for (const auto& p : r.points) {
        json jp{{"T", p.scale},     {"times", p.times}, {"thetas", p.thetas},
                {"lhs", p.lhs},     {"rhs", p.rhs},     {"rel_err", p.rel_err}};
        if (!p.determinate) jp["error"] = p.error;
        points.push_back(jp);
    }
    return json{{"law", r.law},
                {"grid", r.grid},
                {"points", points},
                {"max_rel_err", r.max_rel_err},
                {"tol", r.tol},
                {"pass", r.pass}};
}

}  // namespace

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

LevyModel make_model(const ModelSpec& spec) {
    if (spec.family == "two_point")
        return LevyModel(JumpFamily::TwoPointSymmetric, spec.intensity,
                         spec.jump_param);
    if (spec.family == "laplace")
        return LevyModel(JumpFamily::LaplaceJumps, spec.intensity,
                         spec.jump_param);
    throw std::invalid_argument("unknown model family '" + spec.family + "'");
}

ExponentOracle make_oracle(const ExperimentSpec& spec, const std::string& kind,
                           std::optional<double> beta_override) {
    const QuadratureConfig cfg = spec.quadrature;
    if (kind == "levy") {
        const LevyModel model = make_model(spec.model);
        return [model](const ExponentQuery& q) {
            return model.multi_time_exponent(q.times, q.thetas);
        };
    }
    if (kind == "gflp") {
        const LevyModel model = make_model(spec.model);
        const Kernel kernel = require_kernel(spec);
        return [model, kernel, cfg](const ExponentQuery& q) {
            return gflp_exponent(model, kernel, q, cfg).value;
        };
    }
    if (kind == "stable") {
        const Kernel kernel = require_kernel(spec);
        const double index = spec.stable_index, sigma = spec.sigma;
        return [kernel, index, sigma, cfg](const ExponentQuery& q) {
            return stable_exponent(kernel, index, sigma, q, cfg).value;
        };
    }
    if (kind == "zbeta") {
        const double beta = beta_override.value_or(spec.beta);
        const double C = spec.zbeta_C;
        return [beta, C, cfg](const ExponentQuery& q) {
            return zbeta_exponent(beta, C, q, cfg).value;
        };
    }
    if (kind == "wiener")
        return [](const ExponentQuery& q) { return wiener_exponent(q); };
    if (kind == "stable-levy") {
        const double hurst = spec.hurst, sigma = spec.sigma;
        return [hurst, sigma](const ExponentQuery& q) {
            return stable_levy_exponent(hurst, sigma, q);
        };
    }
    throw std::invalid_argument("unknown oracle '" + kind + "'");
}

// --- builtin catalog ---------------------------------------------------

std::vector<std::string> builtin_names() {
    return {"levy-halves",    "subfractional-ds",
            "logfractional-ds", "sghir-ds",
            "wellbalanced-nonunique", "zbeta-ds",
            "wiener-fg",      "aggsim-roundtrip",
            "ygamma-mapping", "subfractional-mc",
            "sghir-estimate", "zbeta-estimate",
            "levy-estimate"};
}

ExperimentSpec builtin_experiment(const std::string& name) {
    ExperimentSpec s;
    s.name = name;

    auto ds_law = [](double alpha, double delta, bool pass = true) {
        LawSpec l;
        l.kind = "ds";
        l.alpha = alpha;
        l.delta = delta;
        l.expect_pass = pass;
        return l;
    };

    if (name == "levy-halves") {
        s.command = "verify";
        s.oracle = "levy";
        auto l = ds_law(0.5, 1.0);
        l.tol = 1e-12;
        s.laws = {l};
        s.tol = 1e-12;
        return s;
    }
    if (name == "subfractional-ds" || name == "logfractional-ds" ||
        name == "sghir-ds") {
        s.command = "verify";
        s.oracle = "gflp";
        s.T_grid = {0.5, 2.0, 5.0};
        s.theta_grid = {0.5, 1.0, 2.0};
        s.tol = 1e-3;
        if (name == "subfractional-ds") {
            s.kernel = KernelSpec{"sub_fractional", {{"H", 0.7}}};
            s.laws = {ds_law(0.7, 1.0)};
        } else if (name == "logfractional-ds") {
            s.kernel = KernelSpec{"log_fractional", {}};
            s.laws = {ds_law(0.5, 1.0)};
        } else {
            s.kernel = KernelSpec{"sghir", {{"K", 1.0}}};
            s.laws = {ds_law(0.5, -1.0)};
        }
        return s;
    }
    if (name == "wellbalanced-nonunique") {
        s.command = "verify";
        s.oracle = "stable";
        s.kernel = KernelSpec{"well_balanced", {{"H", 0.6}, {"stable_index", 1.5}}};
        s.stable_index = 1.5;
        s.sigma = 1.0;
        s.T_grid = {0.5, 2.0, 5.0};
        s.theta_grid = {0.5, 1.0, 2.0};
        s.tol = 1e-3;
        const double H = 0.6, a = 1.5;
        s.laws = {ds_law(H, 0.0), ds_law(H - 1.0 / a + 0.5, 1.0),
                  ds_law(H, 1.0, /*pass=*/false)};
        return s;
    }
    if (name == "zbeta-ds") {
        s.command = "verify";
        s.oracle = "zbeta";
        s.T_grid = {0.5, 2.0};
        s.theta_grid = {0.5, 1.0};
        s.tol = 1e-2;
        for (double beta : {-0.5, 0.0, 0.5}) {
            auto l = ds_law(1.0 - beta / 2.0, -beta - 1.0);
            l.beta = beta;
            s.laws.push_back(l);
        }
        return s;
    }
    if (name == "wiener-fg") {
        s.command = "verify";
        s.oracle = "wiener";
        s.tol = 1e-12;
        LawSpec power;
        power.kind = "fg";
        power.fg_pair = "power";
        power.f_exponent = 1.0 / 3.0;
        power.g_exponent = 1.0 / 3.0;
        LawSpec custom;
        custom.kind = "fg";
        custom.fg_pair = "sqrt-log";
        LawSpec bad;
        bad.kind = "fg";
        bad.fg_pair = "power";
        bad.f_exponent = 1.0;
        bad.g_exponent = 1.0;
        bad.expect_pass = false;
        s.laws = {power, custom, bad};
        return s;
    }
    if (name == "aggsim-roundtrip") {
        s.command = "verify";
        s.oracle = "gflp";
        s.kernel = KernelSpec{"sub_fractional", {{"H", 0.7}}};
        s.T_grid = {0.5, 2.0};
        s.theta_grid = {0.5, 1.0};
        s.tol = 1e-3;
        LawSpec levy_as;
        levy_as.kind = "as";
        levy_as.rho1 = 0.0;
        levy_as.rho2 = -1.0;
        levy_as.oracle = "levy";
        levy_as.tol = 1e-12;
        LawSpec gflp_as;
        gflp_as.kind = "as";
        const AggregateSimilarityLaw as = ds_to_as({0.7, 1.0});
        gflp_as.rho1 = as.rho1;
        gflp_as.rho2 = as.rho2;
        LawSpec rt;
        rt.kind = "conversion-roundtrip";
        rt.tol = 1e-14;
        s.laws = {levy_as, gflp_as, rt};
        return s;
    }
    if (name == "ygamma-mapping") {
        s.command = "verify";
        LawSpec yg;
        yg.kind = "ygamma";
        yg.tol = 1e-14;
        s.laws = {yg};
        s.tol = 1e-14;
        return s;
    }
    if (name == "subfractional-mc") {
        s.command = "simulate";
        s.kernel = KernelSpec{"sub_fractional", {{"H", 0.75}}};
        return s;
    }
    if (name == "sghir-estimate" || name == "zbeta-estimate" ||
        name == "levy-estimate") {
        s.command = "estimate";
        s.estimator = "exponent";
        if (name == "sghir-estimate") {
            s.oracle = "gflp";
            s.kernel = KernelSpec{"sghir", {{"K", 1.0}}};
        } else if (name == "zbeta-estimate") {
            s.oracle = "zbeta";
            s.beta = 0.0;
            s.quadrature.rel_tol = 1e-6;
        } else {
            s.oracle = "stable-levy";
            s.hurst = 0.75;
        }
        return s;
    }
    throw std::invalid_argument("unknown builtin experiment '" + name + "'");
}

// --- config parsing ----------------------------------------------------

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentSpec parse_experiment_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    ExperimentSpec s;
    try {
        read_if(j, "name", s.name);
        if (!j.contains("command"))
            throw std::invalid_argument("config missing 'command'");
        s.command = j.at("command").get<std::string>();
        read_if(j, "oracle", s.oracle);
        if (j.contains("model")) {
            const json& m = j.at("model");
            read_if(m, "family", s.model.family);
            read_if(m, "intensity", s.model.intensity);
            read_if(m, "jump_param", s.model.jump_param);
        }
        if (j.contains("kernel")) {
            KernelSpec k;
            k.name = j.at("kernel").at("name").get<std::string>();
            if (j.at("kernel").contains("params"))
                k.params = j.at("kernel")
                               .at("params")
                               .get<std::map<std::string, double>>();
            s.kernel = std::move(k);
        }
        read_if(j, "stable_index", s.stable_index);
        read_if(j, "sigma", s.sigma);
        read_if(j, "hurst", s.hurst);
        read_if(j, "beta", s.beta);
        read_if(j, "zbeta_C", s.zbeta_C);
        read_if(j, "tol", s.tol);
        read_if(j, "estimator", s.estimator);
        if (j.contains("grids")) {
            const json& g = j.at("grids");
            read_if(g, "times", s.times_grid);
            read_if(g, "theta", s.theta_grid);
            read_if(g, "T", s.T_grid);
        }
        if (j.contains("quadrature")) {
            const json& q = j.at("quadrature");
            read_if(q, "rel_tol", s.quadrature.rel_tol);
            read_if(q, "abs_tol", s.quadrature.abs_tol);
            read_if(q, "max_subdivisions", s.quadrature.max_subdivisions);
            read_if(q, "truncation_safety", s.quadrature.truncation_safety);
        }
        if (j.contains("mc")) {
            const json& m = j.at("mc");
            read_if(m, "times", s.mc.times);
            read_if(m, "n_paths", s.mc.n_paths);
            read_if(m, "seed", s.mc.seed);
            read_if(m, "U", s.mc.U);
            read_if(m, "aggregate_m", s.mc.aggregate_m);
            if (m.contains("queries")) {
                for (const json& jq : m.at("queries")) {
                    ExponentQuery q;
                    q.times = jq.at("times").get<std::vector<double>>();
                    q.thetas = jq.at("thetas").get<std::vector<double>>();
                    s.mc.queries.push_back(std::move(q));
                }
            }
        }
        if (j.contains("laws")) {
            for (const json& jl : j.at("laws")) {
                LawSpec l;
                l.kind = jl.at("kind").get<std::string>();
                read_if(jl, "alpha", l.alpha);
                read_if(jl, "delta", l.delta);
                read_if(jl, "rho1", l.rho1);
                read_if(jl, "rho2", l.rho2);
                read_if(jl, "m_list", l.m_list);
                read_if(jl, "fg_pair", l.fg_pair);
                read_if(jl, "f_exponent", l.f_exponent);
                read_if(jl, "g_exponent", l.g_exponent);
                read_if(jl, "oracle", l.oracle);
                read_if(jl, "n_samples", l.n_samples);
                read_if(jl, "gammas", l.gammas);
                if (jl.contains("tol")) l.tol = jl.at("tol").get<double>();
                if (jl.contains("beta")) l.beta = jl.at("beta").get<double>();
                if (jl.contains("expect"))
                    l.expect_pass = jl.at("expect").get<std::string>() == "pass";
                s.laws.push_back(std::move(l));
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config field: ") + e.what());
    }
    return s;
}

ExperimentSpec load_experiment(const std::string& path_or_name) {
    std::error_code ec;
    if (std::filesystem::exists(path_or_name, ec)) {
        std::ifstream in(path_or_name);
        if (!in)
            throw std::invalid_argument("cannot read config file '" +
                                        path_or_name + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_experiment_json(buf.str());
    }
    return builtin_experiment(path_or_name);
}

// --- IO ------------------------------------------------------------------

void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    for (std::size_t j = 0; j < ensemble.times.size(); ++j)
        out << (j ? "," : "") << "t=" << format_g17(ensemble.times[j]);
    out << "\n";
    for (std::size_t p = 0; p < ensemble.n_paths; ++p) {
        for (std::size_t j = 0; j < ensemble.times.size(); ++j)
            out << (j ? "," : "") << format_g17(ensemble.at(p, j));
        out << "\n";
    }
}

void write_ensemble_meta(const PathEnsemble& ensemble, const std::string& path,
                         bool with_timestamp) {
    json meta{{"seed", ensemble.seed},
              {"n_paths", ensemble.n_paths},
              {"times", ensemble.times},
              {"truncation_radius", ensemble.truncation_radius},
              {"aggregation_m", ensemble.aggregation_m},
              {"model",
               {{"family", ensemble.model_family},
                {"intensity", ensemble.model_intensity},
                {"jump_param", ensemble.model_jump_param}}},
              {"kernel",
               {{"name", ensemble.kernel_name},
                {"params", ensemble.kernel_params}}},
              {"variance_bias_bound", ensemble.variance_bias_bound}};
    if (with_timestamp) meta["generated_at"] = timestamp_now();
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << meta.dump(2) << "\n";
}

void write_reports_json(const std::vector<VerificationReport>& reports,
                        const std::string& experiment, const std::string& path,
                        bool with_timestamp) {
    json j{{"experiment", experiment}, {"reports", json::array()}};
    bool all = true;
    for (const auto& r : reports) {
        j["reports"].push_back(law_to_json(r));
        all = all && r.pass;
    }
    j["all_pass"] = all;
    if (with_timestamp) j["generated_at"] = timestamp_now();
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

void write_reports_csv(const std::vector<VerificationReport>& reports,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << "law,T,times,thetas,lhs,rhs,rel_err,determinate\n";
    for (const auto& r : reports) {
        for (const auto& p : r.points) {
            out << '"' << r.law << '"' << "," << format_g17(p.scale) << ",\"";
            for (std::size_t i = 0; i < p.times.size(); ++i)
                out << (i ? ";" : "") << format_g17(p.times[i]);
            out << "\",\"";
            for (std::size_t i = 0; i < p.thetas.size(); ++i)
                out << (i ? ";" : "") << format_g17(p.thetas[i]);
            out << "\"," << format_g17(p.lhs) << "," << format_g17(p.rhs) << ","
                << format_g17(p.rel_err) << "," << (p.determinate ? 1 : 0)
                << "\n";
        }
    }
}

// --- runners ---------------------------------------------------------------

namespace {

VerificationReport dispatch_law(const ExperimentSpec& spec, const LawSpec& law) {
    const double tol = law.tol.value_or(spec.tol);
    if (law.kind == "conversion-roundtrip") return run_roundtrip(law, tol);
    if (law.kind == "ygamma") return run_ygamma(law, tol);

    const std::string oracle_kind = law.oracle.empty() ? spec.oracle : law.oracle;
    const ExponentOracle oracle = make_oracle(spec, oracle_kind, law.beta);
    if (law.kind == "ds")
        return verify_dilative_stability(oracle, {law.alpha, law.delta},
                                         spec.times_grid, spec.theta_grid,
                                         spec.T_grid, tol);
    if (law.kind == "as")
        return verify_aggregate_similarity(oracle, {law.rho1, law.rho2},
                                           law.m_list, spec.times_grid,
                                           spec.theta_grid, tol);
    if (law.kind == "fg")
        return verify_fg_dilative(oracle, make_fg_law(law), spec.times_grid,
                                  spec.theta_grid, spec.T_grid, tol);
    throw std::invalid_argument("unknown law kind '" + law.kind + "'");
}

}  // namespace

int run_verify(const ExperimentSpec& spec, const std::string& out_dir,
               unsigned /*workers*/) {
    try {
        if (spec.laws.empty())
            throw std::invalid_argument("verify: no laws configured");
        std::filesystem::create_directories(out_dir);

        std::vector<VerificationReport> reports;
        bool as_expected = true;
        for (const auto& law : spec.laws) {
            VerificationReport r = dispatch_law(spec, law);
            if (r.pass != law.expect_pass) as_expected = false;
            if (!law.expect_pass)
                r.law += " [expected to fail]";
            reports.push_back(std::move(r));
        }
        write_reports_json(reports, spec.name, out_dir + "/report.json");
        write_reports_csv(reports, out_dir + "/report.csv");
        for (const auto& r : reports)
            std::cerr << (r.pass ? "pass " : "FAIL ") << r.law
                      << "  max_rel_err=" << r.max_rel_err << " tol=" << r.tol
                      << "\n";
        return as_expected ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_simulate(const ExperimentSpec& spec, const std::string& out_dir,
                 unsigned workers, bool validate) {
    try {
        const LevyModel model = make_model(spec.model);
        const Kernel kernel = require_kernel(spec);
        std::filesystem::create_directories(out_dir);

        PathEnsemble ensemble;
        if (spec.mc.aggregate_m > 1)
            ensemble = simulate_aggregate(model, kernel, spec.mc.aggregate_m,
                                          spec.mc.times, spec.mc.n_paths,
                                          spec.mc.U, spec.mc.seed, workers);
        else
            ensemble = simulate_gflp(model, kernel, spec.mc.times,
                                     spec.mc.n_paths, spec.mc.U, spec.mc.seed,
                                     workers);
        write_ensemble_csv(ensemble, out_dir + "/ensemble.csv");
        write_ensemble_meta(ensemble, out_dir + "/ensemble.meta.json");

        if (!validate) return 0;

        // cf match on a 6-query grid (or the configured queries) plus the
        // isometry check
        const ExponentOracle oracle = make_oracle(spec, "gflp");
        std::vector<ExponentQuery> queries = spec.mc.queries;
        if (queries.empty()) {
            const double t1 = spec.mc.times.front();
            const double t2 =
                spec.mc.times.size() > 1 ? spec.mc.times[1] : spec.mc.times[0];
            for (double theta : {0.5, 1.0}) {
                queries.push_back({{t1}, {theta}});
                queries.push_back({{t2}, {theta}});
                if (t2 != t1) queries.push_back({{t1, t2}, {theta, theta}});
            }
        }
        const CfMatchReport cf = cf_match_test(ensemble, oracle, queries, 4.0);
        std::cerr << (cf.pass ? "pass" : "FAIL") << " cf-match  max|z|="
                  << cf.max_abs_z << "\n" << cf.bonferroni_note << "\n";

        // per-query validation record: the quadrature exponent with its
        // error estimate next to the empirical CF
        {
            const LevyModel vm = make_model(spec.model);
            const Kernel vk = require_kernel(spec);
            json points = json::array();
            for (const auto& pt : cf.points) {
                const ExponentValue psi =
                    gflp_exponent(vm, vk, pt.query, spec.quadrature);
                points.push_back(
                    {{"query",
                      {{"times", pt.query.times}, {"thetas", pt.query.thetas}}},
                     {"psi",
                      {{"value", psi.value}, {"err_estimate", psi.err_estimate}}},
                     {"empirical_re", pt.empirical.re},
                     {"empirical_im", pt.empirical.im},
                     {"stderr_re", pt.empirical.stderr_re},
                     {"stderr_im", pt.empirical.stderr_im},
                     {"bias_bound", pt.bias_bound},
                     {"z_re", pt.z_re},
                     {"z_im", pt.z_im},
                     {"pass", pt.pass}});
            }
            json v{{"points", points},
                   {"max_abs_z", cf.max_abs_z},
                   {"z_threshold", cf.z_threshold},
                   {"pass", cf.pass},
                   {"note", cf.bonferroni_note}};
            std::ofstream f(out_dir + "/validation.json");
            f << v.dump(2) << "\n";
        }

        bool moments_ok = true;
        const auto rows = ensemble_moments(ensemble);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const double target =
                ensemble.aggregation_m *
                gflp_covariance(model, kernel, rows[j].t, rows[j].t,
                                spec.quadrature)
                    .value;
            const double slack = 3.0 * rows[j].stderr_variance +
                                 ensemble.variance_bias_bound[j];
            const bool ok = std::abs(rows[j].variance - target) <= slack;
            moments_ok = moments_ok && ok;
            std::cerr << (ok ? "pass" : "FAIL") << " isometry t=" << rows[j].t
                      << "  sample=" << rows[j].variance
                      << " oracle=" << target << " slack=" << slack << "\n";
        }
        return (cf.pass && moments_ok) ? 0 : 1;
    } catch (const TruncationBiasError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_estimate(const ExperimentSpec& spec, const std::string& out_dir,
                 unsigned workers) {
    try {
        std::filesystem::create_directories(out_dir);
        json out;
        if (spec.estimator == "exponent") {
            const ExponentOracle oracle = make_oracle(spec, spec.oracle);
            const LawEstimate est = estimate_law_from_exponent(oracle);
            out["alpha_hat"] = est.law.alpha;
            out["delta_hat"] = est.law.delta;
            out["residual"] = est.residual;
            if (est.flat_direction_found)
                out["flat_direction"] = {{"dalpha", est.flat_dalpha},
                                         {"ddelta", est.flat_ddelta}};
            std::cerr << "estimate: alpha=" << est.law.alpha
                      << " delta=" << est.law.delta
                      << " residual=" << est.residual
                      << (est.flat_direction_found ? " (flat direction)" : "")
                      << "\n";
        } else if (spec.estimator == "variance") {
            const LevyModel model = make_model(spec.model);
            const Kernel kernel = require_kernel(spec);
            const PathEnsemble ensemble =
                simulate_gflp(model, kernel, spec.mc.times, spec.mc.n_paths,
                              spec.mc.U, spec.mc.seed, workers);
            std::vector<VarianceSample> samples;
            for (const auto& row : ensemble_moments(ensemble))
                samples.push_back({row.t, row.variance, row.stderr_variance});
            const AlphaEstimate est = estimate_alpha_from_variance(samples);
            out["alpha_hat"] = est.alpha_hat;
            out["stderr"] = est.stderr;
            std::cerr << "estimate: alpha=" << est.alpha_hat << " +- "
                      << est.stderr << "\n";
        } else {
            throw std::invalid_argument("unknown estimator '" + spec.estimator +
                                        "'");
        }
        out["generated_at"] = timestamp_now();
        std::ofstream f(out_dir + "/estimate.json");
        f << out.dump(2) << "\n";
        return 0;
    } catch (const SearchError& e) {
        std::cerr << "estimation failed: " << e.what() << "\n";
        return 1;
    } catch (const TruncationBiasError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dilastab
