#include <meboost/report.hpp>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace meboost {
namespace {

using Row = std::vector<std::string>;

// Pads every column to a common width; the first `left` columns are left-aligned.
std::string align(const std::vector<Row>& rows, std::size_t left, const std::vector<std::size_t>& rules = {})
{
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::find(rules.begin(), rules.end(), i) != rules.end()) out += std::string(total, '-') + '\n';
        std::string line;
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            const auto& cell = rows[i][c];
            const std::string pad(width[c] - cell.size(), ' ');
            line += c < left ? cell + pad : pad + cell;
            if (c + 1 < rows[i].size()) line += "  ";
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + '\n';
    }
    return out;
}

std::vector<double> fields(const FitMetrics& m)
{
    return {m.mse, m.mse_m, m.l1_dist, m.sensitivity, m.specificity};
}

bool any_se(const SimulationResult& result, SelectionRule rule)
{
    for (const auto& s : result.scenarios)
        for (auto method : result.config.methods)
            if (s.summary(method, rule).se) return true;
    return false;
}

nlohmann::json metrics_json(const FitMetrics& m)
{
    return {{"mse", m.mse},
            {"mse_m", m.mse_m},
            {"l1_dist", m.l1_dist},
            {"sensitivity", m.sensitivity},
            {"specificity", m.specificity},
            {"l1_norm", m.l1_norm}};
}

std::string fit_header(const FitColumn& f)
{
    if (f.method == "Lasso") return "Lasso";
    return fmt::format("tau={}", *f.tau);
}

std::string fit_group(const FitColumn& f)
{
    if (f.method == "Lasso") return "Naive";
    return fmt::format("delta x{}", *f.delta_scale);
}

std::string coefficient_cell(double b)
{
    if (b == 0.0) return "-";
    if (std::abs(b) < kDisplayThreshold) return "";
    return fmt::format("{:.2f}", b);
}

} // namespace

CsvTable simulation_table(const SimulationResult& result, SelectionRule rule)
{
    const bool se = any_se(result, rule);
    CsvTable t;
    t.header = {"Scenario", "Method", "MSE", "MSE-M", "L1D", "SENS", "SPEC"};
    if (se) t.header.insert(t.header.end(), {"SE_MSE", "SE_MSE-M", "SE_L1D", "SE_SENS", "SE_SPEC"});
    t.header.insert(t.header.end(), {"Replications", "Failed"});
    for (const auto& s : result.scenarios) {
        for (auto method : result.config.methods) {
            const auto sum = s.summary(method, rule);
            Row row{std::string(scenario_label(s.spec.scenario_id)), std::string(display_name(method))};
            for (double v : fields(sum.mean)) row.push_back(sum.count ? format_double(v) : "NA");
            if (se) {
                if (sum.se) {
                    for (double v : fields(*sum.se)) row.push_back(format_double(v));
                } else {
                    row.insert(row.end(), 5, "NA");
                }
            }
            row.push_back(std::to_string(sum.count));
            row.push_back(std::to_string(s.failures()));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

std::string render_simulation_table(const SimulationResult& result, SelectionRule rule)
{
    std::vector<Row> rows{{"Scenario", "Method", "MSE", "MSE-M", "L1D", "SENS", "SPEC", "Reps"}};
    std::vector<std::size_t> rules{1};
    for (const auto& s : result.scenarios) {
        bool first = true;
        if (rows.size() > 1) rules.push_back(rows.size());
        for (auto method : result.config.methods) {
            const auto sum = s.summary(method, rule);
            Row row{first ? std::string(scenario_label(s.spec.scenario_id)) : "", std::string(display_name(method))};
            first = false;
            const auto mean = fields(sum.mean);
            for (std::size_t k = 0; k < mean.size(); ++k) {
                if (sum.count == 0) {
                    row.emplace_back("NA");
                } else if (sum.se) {
                    row.push_back(fmt::format("{:.2f} ({:.2f})", mean[k], fields(*sum.se)[k]));
                } else {
                    row.push_back(fmt::format("{:.2f}", mean[k]));
                }
            }
            row.push_back(s.failures() ? fmt::format("{} ({} failed)", sum.count, s.failures())
                                       : std::to_string(sum.count));
            rows.push_back(std::move(row));
        }
    }
    return align(rows, 2, rules);
}

std::string render_simulation_text(const SimulationResult& result)
{
    const auto& cfg = result.config;
    std::string out = fmt::format("seed {}, {} replications, K={}\n", cfg.seed, cfg.replications, cfg.K);
    for (auto rule : cfg.rules) {
        switch (rule) {
        case SelectionRule::min_mse_m: out += "\nModels at minimum MSE-M along the L1 grid\n"; break;
        case SelectionRule::min_mse: out += "\nModels at minimum MSE along the L1 grid\n"; break;
        case SelectionRule::cv: out += "\nCross-validated models\n"; break;
        }
        out += render_simulation_table(result, rule);
    }
    for (const auto& s : result.scenarios)
        for (const auto& r : s.replications)
            if (!r.ok)
                out += fmt::format("scenario {} replication {} failed: {}\n", s.spec.scenario_id, r.replication, r.error);
    out += "\nconfig " + nlohmann::json(cfg).dump() + '\n';
    return out;
}

nlohmann::json simulation_json(const SimulationResult& result)
{
    nlohmann::json j;
    j["config"] = result.config;
    j["scenarios"] = nlohmann::json::array();
    for (const auto& s : result.scenarios) {
        nlohmann::json sj;
        sj["scenario_id"] = s.spec.scenario_id;
        sj["label"] = scenario_label(s.spec.scenario_id);
        sj["failed"] = s.failures();
        nlohmann::json methods = nlohmann::json::object();
        for (auto method : result.config.methods) {
            nlohmann::json mj = nlohmann::json::object();
            for (auto rule : result.config.rules) {
                const auto sum = s.summary(method, rule);
                nlohmann::json rj{{"count", sum.count}, {"mean", metrics_json(sum.mean)}};
                rj["se"] = sum.se ? metrics_json(*sum.se) : nlohmann::json(nullptr);
                mj[std::string(to_string(rule))] = rj;
            }
            if (method == SimMethod::meboost) {
                nlohmann::json taus = nlohmann::json::array();
                for (const auto& r : s.replications) {
                    const auto it = r.methods.find(method);
                    taus.push_back(r.ok && it != r.methods.end() && it->second.chosen_tau
                                       ? nlohmann::json(*it->second.chosen_tau)
                                       : nlohmann::json(nullptr));
                }
                mj["chosen_tau"] = taus;
            }
            methods[std::string(to_string(method))] = mj;
        }
        sj["methods"] = methods;
        nlohmann::json failures = nlohmann::json::array();
        std::size_t floored = 0;
        for (const auto& r : s.replications) {
            if (!r.ok) failures.push_back({{"replication", r.replication}, {"seed", r.seed}, {"error", r.error}});
            if (r.variance_floored) ++floored;
        }
        sj["failures"] = failures;
        sj["variance_floored_replications"] = floored;
        j["scenarios"].push_back(sj);
    }
    return j;
}

std::vector<std::size_t> displayed_rows(const FitReport& report)
{
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < report.predictors.size(); ++k) {
        const bool shown = std::any_of(report.fits.begin(), report.fits.end(), [&](const FitColumn& f) {
            return std::abs(f.beta(static_cast<Index>(k))) >= kDisplayThreshold;
        });
        if (shown) rows.push_back(k);
    }
    return rows;
}

std::string render_coefficient_table(const FitReport& report)
{
    std::vector<Row> rows;
    Row group{""}, head{"Variable"};
    for (std::size_t c = 0; c < report.fits.size(); ++c) {
        const auto g = fit_group(report.fits[c]);
        group.push_back(c > 0 && fit_group(report.fits[c - 1]) == g ? "" : g);
        head.push_back(fit_header(report.fits[c]));
    }
    rows.push_back(group);
    rows.push_back(head);
    for (auto k : displayed_rows(report)) {
        Row row{report.predictors[k]};
        for (const auto& f : report.fits) row.push_back(coefficient_cell(f.beta(static_cast<Index>(k))));
        rows.push_back(std::move(row));
    }
    const std::size_t losses = rows.size();
    Row dev{"Deviance"}, mse{"MSE-M"};
    for (const auto& f : report.fits) {
        dev.push_back(f.deviance ? fmt::format("{:.2f}", *f.deviance) : "NA");
        mse.push_back(f.mse_m ? fmt::format("{:.2f}", *f.mse_m) : "NA");
    }
    rows.push_back(dev);
    rows.push_back(mse);
    std::string out = fmt::format("outcome {} ({}), {} training rows, {} test rows, seed {}\n", report.outcome,
                                  to_string(report.family), report.n_train, report.n_test, report.seed);
    out += align(rows, 1, {2, losses});
    bool floored = false;
    for (const auto& f : report.fits) floored = floored || f.variance_floored;
    if (floored) out += "note: the corrected residual variance reached its floor in at least one fit\n";
    return out;
}

CsvTable fit_table(const FitReport& report)
{
    CsvTable t;
    t.header = {"Variable"};
    for (const auto& f : report.fits) {
        t.header.push_back(f.method == "Lasso" ? "Lasso"
                                               : fmt::format("MEBoost delta_scale={} tau={}", *f.delta_scale, *f.tau));
    }
    for (std::size_t k = 0; k < report.coefficient_names.size(); ++k) {
        Row row{report.coefficient_names[k]};
        for (const auto& f : report.fits) row.push_back(format_double(f.beta(static_cast<Index>(k))));
        t.rows.push_back(std::move(row));
    }
    Row dev{"Deviance"}, mse{"MSE-M"}, l1{"L1"};
    for (const auto& f : report.fits) {
        dev.push_back(f.deviance ? format_double(*f.deviance) : "NA");
        mse.push_back(f.mse_m ? format_double(*f.mse_m) : "NA");
        l1.push_back(format_double(f.l1_norm));
    }
    t.rows.push_back(dev);
    t.rows.push_back(mse);
    t.rows.push_back(l1);
    return t;
}

nlohmann::json fit_json(const FitReport& report)
{
    nlohmann::json j;
    j["config"] = report.config;
    j["seed"] = report.seed;
    j["family"] = to_string(report.family);
    j["outcome"] = report.outcome;
    j["n_train"] = report.n_train;
    j["n_test"] = report.n_test;
    j["coefficient_names"] = report.coefficient_names;
    j["fits"] = nlohmann::json::array();
    for (const auto& f : report.fits) {
        nlohmann::json fj;
        fj["method"] = f.method;
        fj["delta_scale"] = f.delta_scale ? nlohmann::json(*f.delta_scale) : nlohmann::json(nullptr);
        fj["tau"] = f.tau ? nlohmann::json(*f.tau) : nlohmann::json(nullptr);
        fj["lambda"] = f.lambda ? nlohmann::json(*f.lambda) : nlohmann::json(nullptr);
        fj["l1_norm"] = f.l1_norm;
        fj["cv_loss"] = f.cv_loss;
        fj["beta"] = std::vector<double>(f.beta.data(), f.beta.data() + f.beta.size());
        fj["raw_intercept"] = f.raw.intercept;
        fj["raw_slopes"] = std::vector<double>(f.raw.slopes.data(), f.raw.slopes.data() + f.raw.slopes.size());
        fj["deviance"] = f.deviance ? nlohmann::json(*f.deviance) : nlohmann::json(nullptr);
        fj["mse_m"] = f.mse_m ? nlohmann::json(*f.mse_m) : nlohmann::json(nullptr);
        fj["variance_floored"] = f.variance_floored;
        j["fits"].push_back(fj);
    }
    return j;
}

CsvTable path_table(const CoefficientPath& path, const std::vector<std::string>& names)
{
    detail::require(static_cast<Index>(names.size()) == path.dim() || path.steps.empty(),
                    "path_table: one name per coefficient required");
    CsvTable t;
    t.header = {"t", "l1", "sigma2"};
    for (const auto& n : names) t.header.push_back("beta_" + n);
    for (const auto& s : path.steps) {
        Row row{std::to_string(s.t), format_double(s.l1), s.sigma2 ? format_double(*s.sigma2) : "NA"};
        for (Index j = 0; j < s.beta.size(); ++j) row.push_back(format_double(s.beta(j)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace meboost
