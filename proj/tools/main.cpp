// hsim command-line front end.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsim/empirical.hpp"
#include "hsim/estimators.hpp"
#include "hsim/inference.hpp"
#include "hsim/io.hpp"
#include "hsim/montecarlo.hpp"
#include "hsim/parallel.hpp"
#include "hsim/procsim.hpp"
#include "hsim/rng.hpp"
#include "hsim/selection.hpp"

namespace {

using hsim::Json;

// Reads `{"flag-name": value, ...}` or `{"<subcommand>": {"flag-name": value, ...}}`;
// sections for other subcommands are ignored.
class JsonConfig : public CLI::Config {
  public:
    explicit JsonConfig(const CLI::App* root) : root_(root) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
        const auto parsed = root_->get_subcommands();
        if (parsed.empty()) return {};
        const std::string section = parsed.front()->get_name();
        std::vector<CLI::ConfigItem> items;
        collect(j, section, items);
        if (j.contains(section) && j.at(section).is_object()) collect(j.at(section), section, items);
        return items;
    }

  private:
    const CLI::App* root_;

    static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

    static void collect(const Json& j, const std::string& section, std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) continue;
            CLI::ConfigItem item;
            item.parents = {section};
            item.name = key;
            if (value.is_array()) {
                for (const auto& e : value) item.inputs.push_back(scalar(e));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json typed(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    try {
        std::size_t used = 0;
        const long long i = std::stoll(s, &used);
        if (used == s.size()) return i;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    return s;
}

bool runtime_option(const std::string& name) {
    return name == "jobs" || name == "out" || name == "csv" || name == "table-out" || name == "band-out";
}

// Effective option values; job count and output paths only when `runtime` is set.
Json effective_config(const CLI::App* sub, bool runtime) {
    Json cfg = Json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (runtime_option(name) != runtime) continue;
        std::vector<std::string> values = opt->results();
        if (values.empty()) {
            const std::string def = opt->get_default_str();
            if (def.empty() || def == "{}" || def == "[]") continue;
            values = {def};
        }
        const bool many = opt->get_expected_max() > 1;
        if (many) {
            Json arr = Json::array();
            for (const auto& v : values) {
                for (const auto& part : CLI::detail::split(v, ',')) arr.push_back(typed(part));
            }
            cfg[name] = arr;
        } else {
            cfg[name] = typed(values.back());
        }
    }
    return cfg;
}

Json provenance(const CLI::App* sub, std::uint64_t seed) {
    return {{"tool", "hsim"},
            {"version", hsim::version()},
            {"rng", std::string(hsim::RandomStream::kAlgorithm)},
            {"subcommand", sub->get_name()},
            {"seed", seed},
            {"config", effective_config(sub, false)}};
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void write_json(const std::string& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

std::string stem(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_sidecar(const std::string& out, const CLI::App* sub, std::uint64_t seed, int jobs,
                   std::chrono::steady_clock::time_point start) {
    Json run = provenance(sub, seed);
    run["runtime"] = effective_config(sub, true);
    run["jobs"] = jobs;
    run["wallclock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(out + ".run.json", run);
}

// "auto" -> truncation rule, "gcv" -> nullopt, otherwise a positive integer.
std::optional<int> parse_k(const std::string& text, long n, const std::string& flag) {
    if (text == "gcv") return std::nullopt;
    if (text == "auto") return hsim::truncation_k(n);
    try {
        std::size_t used = 0;
        const int k = std::stoi(text, &used);
        if (used == text.size() && k >= 1) return k;
    } catch (const std::exception&) {
    }
    throw UsageError(flag + ": expected a positive integer, 'auto' or 'gcv', got '" + text + "'");
}

std::optional<hsim::HRegularSpec> trend_for(hsim::ModelKind kind, const std::string& label) {
    if (kind != hsim::ModelKind::PNLSI) return std::nullopt;
    if (label.empty()) throw UsageError("--trend: required for --model pnlsi");
    try {
        return hsim::make_hregular(label);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--trend: ") + e.what());
    }
}

hsim::ModelKind model_for(const std::string& text) {
    try {
        return hsim::parse_model_kind(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--model: ") + e.what());
    }
}

int resolve_jobs(int jobs) { return jobs > 0 ? jobs : hsim::default_jobs(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hermite-series estimation of single-index models with integrated regressors"};
    app.set_version_flag("--version", hsim::version());
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::uint64_t seed = 1;
    int jobs = 0;
    std::string out;

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a scenario and write t,x1..xd,y CSV");
    std::string scenario = "ex51-part1";
    long n = 0;
    sim->add_option("--scenario", scenario, "Built-in name or scenario JSON file");
    sim->add_option("--n", n, "Sample size (0: scenario value)");
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--out", out, "Output CSV")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "Fit SI / PLSI / PNLSI to a data CSV");
    std::string model = "si", data, k_text = "auto", trend;
    int starts = 0;
    std::vector<double> theta_start;
    est->add_option("--model", model, "si | plsi | pnlsi");
    est->add_option("--data", data, "CSV with header t,x1,...,xd,y")->required();
    est->add_option("--k", k_text, "Truncation order: integer, auto or gcv");
    est->add_option("--starts", starts, "Multi-start count (0: automatic)");
    est->add_option("--theta-start", theta_start, "Extra start direction")->delimiter(',');
    est->add_option("--trend", trend, "H-regular trend for pnlsi: identity | square | cube | zero");
    est->add_option("--seed", seed, "Recorded seed");
    est->add_option("--out", out, "Output JSON")->required();

    // gcv
    auto* gcv = app.add_subcommand("gcv", "Select the truncation order by generalised cross-validation");
    std::vector<int> candidates = hsim::default_gcv_candidates();
    std::string csv_out;
    gcv->add_option("--model", model, "si | plsi | pnlsi");
    gcv->add_option("--data", data, "CSV with header t,x1,...,xd,y")->required();
    gcv->add_option("--candidates", candidates, "Candidate orders")->delimiter(',');
    gcv->add_option("--starts", starts, "Multi-start count (0: automatic)");
    gcv->add_option("--trend", trend, "H-regular trend for pnlsi");
    gcv->add_option("--seed", seed, "Recorded seed");
    gcv->add_option("--out", out, "Output JSON")->required();
    gcv->add_option("--csv", csv_out, "k,sigma2,score CSV (default: <out stem>.csv)");

    // bands
    auto* bands = app.add_subcommand("bands", "Pointwise confidence band for the link function");
    double level = 0.8, lo = 0.0, hi = 0.0;
    int points = 101;
    bands->add_option("--model", model, "si | plsi | pnlsi");
    bands->add_option("--data", data, "CSV with header t,x1,...,xd,y")->required();
    bands->add_option("--k", k_text, "Truncation order: integer, auto or gcv");
    bands->add_option("--starts", starts, "Multi-start count (0: automatic)");
    bands->add_option("--trend", trend, "H-regular trend for pnlsi");
    bands->add_option("--level", level, "Nominal pointwise coverage");
    bands->add_option("--lo", lo, "Grid start (default: smallest fitted index)");
    bands->add_option("--hi", hi, "Grid end (default: largest fitted index)");
    bands->add_option("--points", points, "Grid size")->check(CLI::Range(2, 1000000));
    bands->add_option("--seed", seed, "Recorded seed");
    bands->add_option("--out", out, "Output CSV u,center,lo,hi")->required();

    // montecarlo
    auto* mc = app.add_subcommand("montecarlo", "Monte Carlo bias / s.d. table for a scenario");
    long mc_n = 400;
    int reps = 200, mc_k = 0;
    std::string protocol = "local-truth";
    double local_step = 0.05;
    std::optional<double> band_probe;
    mc->add_option("--scenario", scenario, "Built-in name or scenario JSON file");
    mc->add_option("--n", mc_n, "Sample size");
    mc->add_option("--reps", reps, "Replications")->check(CLI::Range(2, 100000000));
    mc->add_option("--k", mc_k, "Truncation order (0: truncation rule)");
    mc->add_option("--protocol", protocol, "local-truth | global")->check(CLI::IsMember({"local-truth", "global"}));
    mc->add_option("--local-step", local_step, "Initial simplex size for local-truth starts");
    mc->add_option("--starts", starts, "Multi-start count for the global protocol (0: automatic)");
    mc->add_option("--band-probe", band_probe, "Record the band at this index value");
    mc->add_option("--seed", seed, "Base seed");
    mc->add_option("--jobs", jobs, "Worker threads (0: logical cores)");
    mc->add_option("--out", out, "Output .json or .csv")->required();

    // rates
    auto* rates = app.add_subcommand("rates", "Convergence-rate slopes across sample sizes");
    std::vector<long> ns = {200, 400, 800, 1600};
    int bootstrap = 200;
    rates->add_option("--scenario", scenario, "Built-in name or scenario JSON file");
    rates->add_option("--ns", ns, "Sample sizes")->delimiter(',');
    rates->add_option("--reps", reps, "Replications per sample size")->check(CLI::Range(2, 100000000));
    rates->add_option("--protocol", protocol, "local-truth | global")->check(CLI::IsMember({"local-truth", "global"}));
    rates->add_option("--local-step", local_step, "Initial simplex size for local-truth starts");
    rates->add_option("--bootstrap", bootstrap, "Bootstrap resamples for the slope comparison");
    rates->add_option("--seed", seed, "Base seed");
    rates->add_option("--jobs", jobs, "Worker threads (0: logical cores)");
    rates->add_option("--out", out, "Output JSON")->required();

    // empirical
    auto* emp = app.add_subcommand("empirical", "Macro pipeline: detrend, fit, in/out-of-sample MSE, band");
    std::string k_plsi_text = "gcv", k_si_text = "gcv", protocol_path, table_out, band_out;
    int band_points = 81;
    emp->add_option("--data", data, "CSV with header date,C,I,V,r")->required();
    emp->add_option("--k", k_plsi_text, "PLSI truncation order: integer or gcv");
    emp->add_option("--k-si", k_si_text, "SI truncation order: integer or gcv");
    emp->add_option("--protocol", protocol_path, "JSON {start, step, count} for the rolling forecasts");
    emp->add_option("--starts", starts, "Multi-start count (0: automatic)");
    emp->add_option("--level", level, "Band coverage");
    emp->add_option("--points", band_points, "Band grid size")->check(CLI::Range(2, 1000000));
    emp->add_option("--seed", seed, "Recorded seed");
    emp->add_option("--jobs", jobs, "Worker threads (0: logical cores)");
    emp->add_option("--out", out, "Output JSON")->required();
    emp->add_option("--table-out", table_out, "MSE table CSV (default: <out stem>.mse.csv)");
    emp->add_option("--band-out", band_out, "Band CSV (default: <out stem>.band.csv)");

    // fixture
    auto* fix = app.add_subcommand("fixture", "Write a synthetic date,C,I,V,r panel");
    int length = 199;
    std::uint64_t fixture_seed = 20240601;
    fix->add_option("--seed", fixture_seed, "Random seed");
    fix->add_option("--length", length, "Number of quarters")->check(CLI::Range(3, 100000));
    fix->add_option("--out", out, "Output CSV")->required();

    app.config_formatter(std::make_shared<JsonConfig>(&app));
    app.allow_config_extras(false);
    app.set_config("--config", "", "JSON file of flag values, flat or under a subcommand key; flags override it");
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (sim->parsed()) {
            hsim::ScenarioSpec s = hsim::load_scenario(scenario);
            hsim::ProcessConfig cfg = s.process;
            if (n > 0) cfg.n = n;
            cfg.seed = seed;
            const Eigen::MatrixXd x = hsim::gen_integrated(cfg);
            const Eigen::VectorXd y = hsim::gen_response(x, s, seed);
            auto f = open_out(out);
            hsim::write_data_csv(f, x, y);
            write_sidecar(out, sim, seed, 1, start);
        } else if (est->parsed() || gcv->parsed() || bands->parsed()) {
            const hsim::ModelKind kind = model_for(model);
            const auto f = trend_for(kind, trend);
            const hsim::DataSet ds = hsim::read_data_csv(data);
            hsim::FitOptions fopts;
            fopts.starts = starts;
            if (!theta_start.empty()) {
                fopts.theta_start = Eigen::Map<Eigen::VectorXd>(theta_start.data(), theta_start.size());
            }
            CLI::App* sub = est->parsed() ? est : (gcv->parsed() ? gcv : bands);
            Json doc = {{"meta", provenance(sub, seed)}};
            std::optional<hsim::GcvTable> table;
            std::optional<int> k;
            if (gcv->parsed()) {
                hsim::GcvOptions g;
                g.fit = fopts;
                table = hsim::gcv_select(ds.y, ds.x, kind, candidates, g, f);
            } else {
                k = parse_k(k_text, ds.y.size(), "--k");
                if (!k) {
                    hsim::GcvOptions g;
                    g.fit = fopts;
                    table = hsim::gcv_select(ds.y, ds.x, kind, hsim::default_gcv_candidates(), g, f);
                    k = table->chosen;
                }
            }
            if (gcv->parsed()) {
                doc["gcv"] = hsim::to_json(*table);
                write_json(out, doc);
                auto c = open_out(csv_out.empty() ? stem(out) + ".csv" : csv_out);
                hsim::write_gcv_csv(c, *table);
            } else {
                const hsim::FitResult fit = hsim::fit_model(kind, ds.y, ds.x, *k, fopts, f);
                if (est->parsed()) {
                    if (table) doc["gcv"] = hsim::to_json(*table);
                    doc["fit"] = hsim::to_json(fit);
                    write_json(out, doc);
                } else {
                    const Eigen::VectorXd index = ds.x * fit.theta_hat;
                    const bool custom = bands->get_option("--lo")->count() || bands->get_option("--hi")->count();
                    const double a = custom ? lo : index.minCoeff();
                    const double b = custom ? hi : index.maxCoeff();
                    if (!(a < b)) throw UsageError("--lo/--hi: need lo < hi");
                    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(points, a, b);
                    const hsim::BandResult band = hsim::g_band(ds.y, ds.x, fit, grid, level);
                    auto o = open_out(out);
                    hsim::write_band_csv(o, band);
                }
            }
            write_sidecar(out, sub, seed, 1, start);
        } else if (mc->parsed()) {
            const hsim::ScenarioSpec s = hsim::load_scenario(scenario);
            hsim::McOptions o;
            o.n = mc_n;
            o.reps = reps;
            o.k = mc_k;
            o.seed = seed;
            o.jobs = resolve_jobs(jobs);
            o.protocol = hsim::parse_start_protocol(protocol);
            o.local_step = local_step;
            o.fit.starts = starts;
            o.band_probe = band_probe;
            const hsim::McReport report = hsim::run_mc(s, o);
            if (ends_with(out, ".csv")) {
                auto f = open_out(out);
                hsim::write_mc_csv(f, report);
            } else {
                Json doc = {{"meta", provenance(mc, seed)}, {"report", hsim::to_json(report)}};
                write_json(out, doc);
            }
            std::cout << hsim::format_mc_table(report);
            write_sidecar(out, mc, seed, o.jobs, start);
        } else if (rates->parsed()) {
            const hsim::ScenarioSpec s = hsim::load_scenario(scenario);
            hsim::McOptions o;
            o.reps = reps;
            o.seed = seed;
            o.jobs = resolve_jobs(jobs);
            o.protocol = hsim::parse_start_protocol(protocol);
            o.local_step = local_step;
            const hsim::RateStudy study = hsim::rate_study(s, ns, o, bootstrap);
            Json doc = {{"meta", provenance(rates, seed)}, {"rates", hsim::to_json(study)}};
            write_json(out, doc);
            for (const auto& row : study.rows) std::cout << row.estimand << " slope " << row.slope << '\n';
            std::cout << "theta slope shallower than theta_emp slope in " << study.theta_shallower_fraction
                      << " of bootstrap resamples\n";
            write_sidecar(out, rates, seed, o.jobs, start);
        } else if (emp->parsed()) {
            const hsim::MacroPanel panel = hsim::ingest(data);
            hsim::EmpiricalConfig cfg;
            cfg.k_plsi = parse_k(k_plsi_text, panel.size() - 1, "--k");
            cfg.k_si = parse_k(k_si_text, panel.size() - 1, "--k-si");
            if (!protocol_path.empty()) {
                std::ifstream pin(protocol_path);
                if (!pin) throw std::runtime_error("cannot open protocol file '" + protocol_path + "'");
                cfg.protocol = hsim::protocol_from_json(Json::parse(pin));
            }
            cfg.fit.starts = starts;
            cfg.jobs = resolve_jobs(jobs);
            cfg.band_level = level;
            cfg.band_points = band_points;
            const hsim::EmpiricalReport report = hsim::run_empirical(panel, cfg);
            Json doc = {{"meta", provenance(emp, seed)},
                        {"protocol", hsim::to_json(cfg.protocol)},
                        {"empirical", hsim::to_json(report)}};
            write_json(out, doc);
            auto t = open_out(table_out.empty() ? stem(out) + ".mse.csv" : table_out);
            hsim::write_mse_csv(t, report);
            auto b = open_out(band_out.empty() ? stem(out) + ".band.csv" : band_out);
            hsim::write_band_csv(b, report.band);
            write_sidecar(out, emp, seed, cfg.jobs, start);
        } else if (fix->parsed()) {
            const hsim::SyntheticMacro syn = hsim::synthesize_macro(fixture_seed, length);
            auto f = open_out(out);
            hsim::write_panel_csv(f, syn.panel);
            write_sidecar(out, fix, fixture_seed, 1, start);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
