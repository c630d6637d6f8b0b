#include <cstdint>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <meboost/commands.hpp>

using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "JSON config file");
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--jobs", c.jobs, "worker threads");
    cmd->add_option("--out", c.out, "output path or prefix");
}

// Config file contents with every flag that was given written over it.
json merged(const Common& c, const json& flags)
{
    json j = c.config.empty() ? json::object() : meboost::read_json_file(c.config);
    if (!j.is_object()) throw meboost::InvalidArgument("config must be a JSON object");
    if (c.seed) j["seed"] = *c.seed;
    if (c.jobs) j["jobs"] = *c.jobs;
    if (c.out) j["output"] = *c.out;
    for (const auto& [key, value] : flags.items()) j[key] = value;
    return j;
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v)
{
    if (v) j[key] = *v;
}

template <class T>
void put(json& j, const char* key, const std::vector<T>& v)
{
    if (!v.empty()) j[key] = v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable selection with error-prone covariates"};
    app.require_subcommand(1);

    Common sim_c, fit_c, path_c, bench_c;

    auto* sim = app.add_subcommand("simulate", "Monte Carlo study over the built-in scenarios");
    add_common(sim, sim_c);
    std::vector<int> sim_scenarios;
    std::vector<std::string> sim_methods, sim_rules;
    std::optional<int> sim_reps, sim_K;
    sim->add_option("--scenarios", sim_scenarios, "scenario ids (1-10)");
    sim->add_option("--replications", sim_reps, "replications per scenario");
    sim->add_option("--methods", sim_methods, "meboost, lasso, cocolasso");
    sim->add_option("--rules", sim_rules, "min_mse_m, min_mse, cv");
    sim->add_option("--K", sim_K, "cross-validation folds");

    auto* fit = app.add_subcommand("fit", "Fit MEBoost and the naive Lasso to a CSV dataset");
    add_common(fit, fit_c);
    std::optional<std::string> fit_data, fit_outcome, fit_family, fit_spec;
    std::vector<double> fit_taus, fit_scales;
    std::optional<int> fit_K, fit_T;
    std::optional<double> fit_test, fit_gamma;
    fit->add_option("--data", fit_data, "CSV file with a header row");
    fit->add_option("--outcome", fit_outcome, "outcome column");
    fit->add_option("--family", fit_family, "linear or poisson");
    fit->add_option("--error-spec", fit_spec, "JSON error specification");
    fit->add_option("--tau-grid", fit_taus, "thresholds");
    fit->add_option("--delta-scale-grid", fit_scales, "multipliers of the assumed error variances");
    fit->add_option("--K", fit_K, "cross-validation folds");
    fit->add_option("--test-fraction", fit_test, "held-out fraction");
    fit->add_option("--gamma", fit_gamma, "step size");
    fit->add_option("--iterations", fit_T, "path iterations");

    auto* path = app.add_subcommand("path", "Write the full MEBoost coefficient path as CSV");
    add_common(path, path_c);
    std::optional<std::string> path_data, path_outcome, path_family, path_spec;
    std::optional<double> path_tau, path_gamma, path_scale;
    std::optional<int> path_T;
    path->add_option("--data", path_data, "CSV file with a header row");
    path->add_option("--outcome", path_outcome, "outcome column");
    path->add_option("--family", path_family, "linear or poisson");
    path->add_option("--error-spec", path_spec, "JSON error specification");
    path->add_option("--tau", path_tau, "threshold");
    path->add_option("--gamma", path_gamma, "step size");
    path->add_option("--iterations,-T", path_T, "path iterations");
    path->add_option("--delta-scale", path_scale, "multiplier of the assumed error variances");

    auto* bench = app.add_subcommand("bench", "Time MEBoost against the CoCoLasso");
    add_common(bench, bench_c);
    std::optional<long long> bench_n, bench_p;
    bench->add_option("--n", bench_n, "observations");
    bench->add_option("--p", bench_p, "covariates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (sim->parsed()) {
            json f = json::object();
            put(f, "scenarios", sim_scenarios);
            put(f, "methods", sim_methods);
            put(f, "rules", sim_rules);
            put(f, "replications", sim_reps);
            put(f, "K", sim_K);
            meboost::cmd_simulate(merged(sim_c, f), std::cout);
        } else if (fit->parsed()) {
            json f = json::object();
            put(f, "data", fit_data);
            put(f, "outcome", fit_outcome);
            put(f, "family", fit_family);
            put(f, "error_spec", fit_spec);
            put(f, "tau_grid", fit_taus);
            put(f, "delta_scale_grid", fit_scales);
            put(f, "K", fit_K);
            put(f, "test_fraction", fit_test);
            put(f, "gamma", fit_gamma);
            put(f, "iterations", fit_T);
            meboost::cmd_fit(merged(fit_c, f), std::cout);
        } else if (path->parsed()) {
            json f = json::object();
            put(f, "data", path_data);
            put(f, "outcome", path_outcome);
            put(f, "family", path_family);
            put(f, "error_spec", path_spec);
            put(f, "tau", path_tau);
            put(f, "gamma", path_gamma);
            put(f, "iterations", path_T);
            put(f, "delta_scale", path_scale);
            meboost::cmd_path(merged(path_c, f), std::cout);
        } else if (bench->parsed()) {
            json f = json::object();
            put(f, "n", bench_n);
            put(f, "p", bench_p);
            json j = merged(bench_c, f);
            j.erase("jobs");
            meboost::cmd_bench(j, std::cout);
        }
    } catch (const meboost::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const meboost::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const meboost::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::bad_alloc&) {
        std::cerr << "numerical failure: out of memory\n";
        return kNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
