// Command-line front end: Monte Carlo studies, rolling backtests, efficient
// frontiers and single-portfolio risk numbers, with deterministic CSV/JSON
// output files.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bqp/bqp.hpp"

namespace {

using namespace bqp;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoPortfolio = 3;

void require_format(const std::string& format) {
    if (format != "csv" && format != "json")
        throw UsageError("unknown format '" + format + "' (expected csv or json)");
}

Method parse_method(const std::string& name) {
    if (name == "jeffreys" || name == "bayesian-jeffreys") return Method::Jeffreys;
    if (name == "conjugate" || name == "bayesian-conjugate") return Method::Conjugate;
    if (name == "conventional") return Method::Conventional;
    if (name == "population") return Method::Population;
    throw UsageError("unknown method '" + name + "'");
}

std::string method_label(Method m) {
    switch (m) {
        case Method::Jeffreys: return "bayesian-jeffreys";
        case Method::Conjugate: return "bayesian-conjugate";
        case Method::Conventional: return "conventional";
        default: return "population";
    }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> methods;
    methods.reserve(names.size());
    for (const auto& n : names) methods.push_back(parse_method(n));
    return methods;
}

RiskMeasure parse_measure(const std::string& name) {
    if (name == "var") return RiskMeasure::VaR;
    if (name == "cvar") return RiskMeasure::CVaR;
    if (name == "coherent") return RiskMeasure::Coherent;
    throw UsageError("unknown risk measure '" + name + "' (expected var, cvar or coherent)");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write output file: " + path);
    out << text;
}

ReturnSeries load_input(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw UsageError("input file does not exist: " + path);
    return load_returns_csv(path);
}

// Flat key=value experiment manifests. Command-line flags always win; keys
// must match the subcommand's long option names; unknown keys are rejected.
class ConfigFile {
public:
    ConfigFile(const std::string& path, const CLI::App* sub) : sub_(sub) {
        if (path.empty()) return;
        if (!std::filesystem::exists(path))
            throw UsageError("config file does not exist: " + path);
        std::ifstream in(path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw UsageError("config line " + std::to_string(line_no) +
                                 " is not key=value: " + trimmed);
            values_[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
        }
    }

    template <typename T>
    bool apply(const std::string& key, T& target) {
        const bool on_cmdline = sub_->count("--" + key) > 0;
        const auto it = values_.find(key);
        const bool in_file = it != values_.end();
        if (in_file && !on_cmdline) parse_into(key, it->second, target);
        if (in_file) values_.erase(it);
        return on_cmdline || in_file;
    }

    void finish() const {
        if (!values_.empty())
            throw UsageError("unknown config key '" + values_.begin()->first + "'");
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static void parse_into(const std::string& key, const std::string& value,
                           std::string& target) {
        if (value.empty()) throw UsageError("config key '" + key + "' has an empty value");
        target = value;
    }

    static void parse_into(const std::string& key, const std::string& value, bool& target) {
        if (value == "true" || value == "1") {
            target = true;
        } else if (value == "false" || value == "0") {
            target = false;
        } else {
            throw UsageError("config key '" + key + "' expects true/false");
        }
    }

    static void parse_into(const std::string& key, const std::string& value,
                           std::vector<std::string>& target) {
        target.clear();
        std::stringstream ss(value);
        std::string cell;
        while (std::getline(ss, cell, ',')) target.push_back(trim(cell));
        if (target.empty()) throw UsageError("config key '" + key + "' has an empty list");
    }

    template <typename T>
    static void parse_into(const std::string& key, const std::string& value, T& target) {
        std::istringstream ss(value);
        T parsed{};
        if (!(ss >> parsed) || !(ss >> std::ws).eof())
            throw UsageError("config key '" + key + "' has an unparseable value '" + value +
                             "'");
        target = parsed;
    }

    const CLI::App* sub_;
    std::map<std::string, std::string> values_;
};

/// Synthetic market: a seeded scenario plus one simulated n x k window.
struct SyntheticMarket {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd window;
};

SyntheticMarket synthetic_market(int n, int k, std::uint64_t seed) {
    SeededRng rng(seed);
    SyntheticMarket market;
    std::tie(market.mu, market.sigma) = generate_scenario(k, rng);
    Eigen::LLT<Eigen::MatrixXd> llt(market.sigma);
    const Eigen::MatrixXd chol = llt.matrixL();
    market.window.resize(n, k);
    Eigen::VectorXd z(k);
    for (int t = 0; t < n; ++t) {
        for (int i = 0; i < k; ++i) z(i) = rng.normal();
        market.window.row(t) = (market.mu + chol * z).transpose();
    }
    return market;
}

FrontierBasis basis_for(Method m, const Eigen::MatrixXd& window,
                        const std::optional<MeanCov>& truth) {
    switch (m) {
        case Method::Jeffreys:
            return frontier_basis(posterior_params(window, PriorSpec::jeffreys()));
        case Method::Conjugate:
            return frontier_basis(posterior_params(window, empirical_bayes_hyperparams(window)));
        case Method::Conventional:
            return frontier_basis(conventional_estimates(window), Estimator::Conventional);
        default:
            if (!truth)
                throw UsageError("population estimator needs a synthetic scenario "
                                 "(true parameters are unknown on market data)");
            return frontier_basis(*truth, Estimator::Population);
    }
}

RiskSpec spec_for(Method m, RiskMeasure measure, double alpha, double rho) {
    const Estimator est = (m == Method::Jeffreys || m == Method::Conjugate)
                              ? Estimator::Bayesian
                              : (m == Method::Conventional ? Estimator::Conventional
                                                           : Estimator::Population);
    if (measure == RiskMeasure::Coherent) return RiskSpec::coherent(rho, est);
    return RiskSpec::from(measure, alpha, est);
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    int n = 0;
    int k = 0;
    double alpha = 0.0;
    int runs = 2000;
    bool full = false;
    std::uint64_t seed = 1;
    std::vector<std::string> methods = {"jeffreys", "conjugate", "conventional", "population"};
    std::string measure = "var";
    int threads = 0;
    bool existence_only = false;
    std::string out;
    std::string format = "csv";
};

int run_simulate(SimulateArgs& args, const CLI::App* sub) {
    ConfigFile cfg(args.config, sub);
    cfg.apply("n", args.n);
    cfg.apply("k", args.k);
    cfg.apply("alpha", args.alpha);
    const bool runs_given = cfg.apply("runs", args.runs);
    cfg.apply("full", args.full);
    cfg.apply("seed", args.seed);
    cfg.apply("methods", args.methods);
    cfg.apply("measure", args.measure);
    cfg.apply("threads", args.threads);
    cfg.apply("existence-only", args.existence_only);
    cfg.apply("out", args.out);
    cfg.apply("format", args.format);
    cfg.finish();
    require_format(args.format);

    const bool grid = args.n == 0 && args.k == 0 && args.alpha == 0.0;
    if (!grid && (args.n == 0 || args.k == 0 || args.alpha == 0.0))
        throw UsageError("specify all of --n, --k and --alpha, or none of them for the "
                         "default grid");

    std::vector<SimulationConfig> configs;
    SimulationConfig base;
    base.runs = args.full && !runs_given ? 10000 : args.runs;
    base.seed = args.seed;
    base.methods = parse_methods(args.methods);
    base.measure = parse_measure(args.measure);
    base.threads = args.threads;
    if (grid) {
        for (int n : {100, 200}) {
            for (double c : {0.1, 0.3, 0.5, 0.7}) {
                for (double alpha : {0.95, 0.99}) {
                    SimulationConfig cfg = base;
                    cfg.n = n;
                    cfg.k = static_cast<int>(c * n + 0.5);
                    cfg.alpha = alpha;
                    configs.push_back(cfg);
                }
            }
        }
    } else {
        SimulationConfig cfg = base;
        cfg.n = args.n;
        cfg.k = args.k;
        cfg.alpha = args.alpha;
        configs.push_back(cfg);
    }

    std::vector<StudyResult> studies;
    studies.reserve(configs.size());
    for (const auto& cfg : configs) {
        if (args.existence_only) {
            studies.push_back(run_existence_study(cfg));
            continue;
        }
        try {
            studies.push_back(run_performance_study(cfg));
        } catch (const EmptyResultError&) {
            // every run was filtered by the existence conditions: report the
            // failure counts and leave the performance columns absent
            StudyResult empty = run_existence_study(cfg);
            empty.effective_runs = 0;
            studies.push_back(std::move(empty));
        }
    }

    if (args.format == "json") {
        write_text(args.out, studies_to_json(studies).dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_study_csv(os, studies);
        write_text(args.out, os.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

struct BacktestArgs {
    std::string config;
    std::string input;
    int n = 100;
    int k = 10;
    double alpha = 0.95;
    int portfolios = 500;
    std::uint64_t seed = 1;
    std::vector<std::string> methods = {"jeffreys", "conjugate", "conventional"};
    std::string measure = "var";
    int threads = 0;
    std::string out;
    std::string format = "csv";
};

int run_backtest(BacktestArgs& args, const CLI::App* sub) {
    ConfigFile cfg0(args.config, sub);
    cfg0.apply("input", args.input);
    cfg0.apply("n", args.n);
    cfg0.apply("k", args.k);
    cfg0.apply("alpha", args.alpha);
    cfg0.apply("portfolios", args.portfolios);
    cfg0.apply("seed", args.seed);
    cfg0.apply("methods", args.methods);
    cfg0.apply("measure", args.measure);
    cfg0.apply("threads", args.threads);
    cfg0.apply("out", args.out);
    cfg0.apply("format", args.format);
    cfg0.finish();
    require_format(args.format);
    if (args.input.empty()) throw UsageError("backtest needs --input");

    const ReturnSeries series = load_input(args.input);
    BacktestConfig cfg;
    cfg.n = args.n;
    cfg.k = args.k;
    cfg.alpha = args.alpha;
    cfg.portfolio_count = args.portfolios;
    cfg.seed = args.seed;
    cfg.methods = parse_methods(args.methods);
    cfg.measure = parse_measure(args.measure);
    cfg.threads = args.threads;
    const BacktestReport report = rolling_backtest(series, cfg);

    if (args.format == "json") {
        write_text(args.out, backtest_to_json(report).dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_backtest_csv(os, report);
        write_text(args.out, os.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// frontier
// ---------------------------------------------------------------------------

struct FrontierArgs {
    std::string config;
    std::string input;
    bool synthetic = false;
    int n = 0;
    int k = 10;
    std::uint64_t seed = 1;
    double alpha = 0.95;
    std::string measure = "var";
    double rho = 0.0;
    std::vector<std::string> estimators;
    int points = 200;
    std::string out;
    std::string format = "csv";
};

int run_frontier(FrontierArgs& args, const CLI::App* sub) {
    ConfigFile cfg(args.config, sub);
    cfg.apply("input", args.input);
    cfg.apply("synthetic", args.synthetic);
    cfg.apply("n", args.n);
    cfg.apply("k", args.k);
    cfg.apply("seed", args.seed);
    cfg.apply("alpha", args.alpha);
    cfg.apply("measure", args.measure);
    cfg.apply("rho", args.rho);
    cfg.apply("estimators", args.estimators);
    cfg.apply("points", args.points);
    cfg.apply("out", args.out);
    cfg.apply("format", args.format);
    cfg.finish();
    require_format(args.format);
    if (!args.synthetic && args.input.empty())
        throw UsageError("frontier needs --input or --synthetic");
    if (args.synthetic && !args.input.empty())
        throw UsageError("--input and --synthetic are mutually exclusive");

    Eigen::MatrixXd window;
    std::optional<MeanCov> truth;
    if (args.synthetic) {
        const int n = args.n > 0 ? args.n : 100;
        const SyntheticMarket market = synthetic_market(n, args.k, args.seed);
        window = market.window;
        truth = MeanCov{market.mu, market.sigma};
    } else {
        const ReturnSeries series = load_input(args.input);
        const Eigen::Index t_total = series.periods();
        const Eigen::Index n = args.n > 0 ? args.n : t_total;
        if (n > t_total)
            throw UsageError("window --n exceeds the series length");
        window = series.values.bottomRows(n);
    }

    std::vector<std::string> names = args.estimators;
    if (names.empty()) {
        names = {"bayesian-jeffreys", "bayesian-conjugate", "conventional"};
        if (args.synthetic) names.push_back("population");
    }

    const RiskMeasure measure = parse_measure(args.measure);
    std::vector<LabelledFrontier> curves;
    std::vector<double> grid;
    for (const auto& name : names) {
        const Method m = parse_method(name);
        const FrontierBasis basis = basis_for(m, window, truth);
        const RiskSpec spec = spec_for(m, measure, args.alpha, args.rho);
        if (grid.empty()) grid = default_return_grid(basis, args.points);

        LabelledFrontier lf;
        lf.label = method_label(m);
        lf.curve = frontier_mean_q(basis, spec, grid);
        if (gmq_existence(basis, spec).exists) {
            const GmqPortfolio p = gmq_portfolio(basis, spec);
            lf.has_gmq = true;
            lf.gmq_point = {p.ret, p.risk};
        }
        curves.push_back(std::move(lf));
    }

    if (args.format == "json") {
        write_text(args.out, frontiers_to_json(curves).dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_frontier_csv(os, curves);
        write_text(args.out, os.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gmq / risk
// ---------------------------------------------------------------------------

struct GmqArgs {
    std::string config;
    std::string input;
    bool synthetic = false;
    int n = 0;
    int k = 10;
    std::uint64_t seed = 1;
    std::string method = "bayesian-jeffreys";
    double alpha = 0.95;
    std::string measure = "var";
    double rho = 0.0;
    std::string out;
};

int run_gmq(GmqArgs& args, const CLI::App* sub) {
    ConfigFile cfg(args.config, sub);
    cfg.apply("input", args.input);
    cfg.apply("synthetic", args.synthetic);
    cfg.apply("n", args.n);
    cfg.apply("k", args.k);
    cfg.apply("seed", args.seed);
    cfg.apply("method", args.method);
    cfg.apply("alpha", args.alpha);
    cfg.apply("measure", args.measure);
    cfg.apply("rho", args.rho);
    cfg.apply("out", args.out);
    cfg.finish();
    if (!args.synthetic && args.input.empty())
        throw UsageError("gmq needs --input or --synthetic");

    Eigen::MatrixXd window;
    std::optional<MeanCov> truth;
    if (args.synthetic) {
        const int n = args.n > 0 ? args.n : 100;
        const SyntheticMarket market = synthetic_market(n, args.k, args.seed);
        window = market.window;
        truth = MeanCov{market.mu, market.sigma};
    } else {
        const ReturnSeries series = load_input(args.input);
        const Eigen::Index n = args.n > 0 ? args.n : series.periods();
        if (n > series.periods()) throw UsageError("window --n exceeds the series length");
        window = series.values.bottomRows(n);
    }

    const Method m = parse_method(args.method);
    const FrontierBasis basis = basis_for(m, window, truth);
    const RiskSpec spec = spec_for(m, parse_measure(args.measure), args.alpha, args.rho);
    const GmqPortfolio p = gmq_portfolio(basis, spec);

    nlohmann::json j;
    j["method"] = method_label(m);
    j["measure"] = to_string(spec.measure);
    j["alpha"] = args.alpha;
    j["n"] = window.rows();
    j["k"] = window.cols();
    j["weights"] = std::vector<double>(p.weights.data(), p.weights.data() + p.weights.size());
    j["ret"] = p.ret;
    j["variance"] = p.variance;
    j["risk"] = p.risk;
    j["q_alpha"] = p.q_alpha;
    write_text(args.out, j.dump(2) + "\n");
    return 0;
}

struct RiskArgs {
    std::string config;
    std::string input;
    std::string weights;
    std::string weights_file;
    int n = 0;
    std::string method = "bayesian-jeffreys";
    double alpha = 0.95;
    std::string measure = "var";
    double rho = 0.0;
    std::string out;
};

Eigen::VectorXd parse_weights(const RiskArgs& args, Eigen::Index k) {
    std::vector<double> values;
    if (!args.weights.empty()) {
        std::stringstream ss(args.weights);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw UsageError("cannot parse weight '" + cell + "'");
            }
        }
    } else if (!args.weights_file.empty()) {
        std::ifstream in(args.weights_file);
        if (!in) throw UsageError("cannot open weights file: " + args.weights_file);
        double w;
        while (in >> w) values.push_back(w);
    } else {
        throw UsageError("risk needs --weights or --weights-file");
    }
    if (static_cast<Eigen::Index>(values.size()) != k)
        throw UsageError("expected " + std::to_string(k) + " weights, got " +
                         std::to_string(values.size()));
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int run_risk(RiskArgs& args, const CLI::App* sub) {
    ConfigFile cfg(args.config, sub);
    cfg.apply("input", args.input);
    cfg.apply("weights", args.weights);
    cfg.apply("weights-file", args.weights_file);
    cfg.apply("n", args.n);
    cfg.apply("method", args.method);
    cfg.apply("alpha", args.alpha);
    cfg.apply("measure", args.measure);
    cfg.apply("rho", args.rho);
    cfg.apply("out", args.out);
    cfg.finish();
    if (args.input.empty()) throw UsageError("risk needs --input");

    const ReturnSeries series = load_input(args.input);
    const Eigen::Index n = args.n > 0 ? args.n : series.periods();
    if (n > series.periods()) throw UsageError("window --n exceeds the series length");
    const Eigen::MatrixXd window = series.values.bottomRows(n);
    const Eigen::VectorXd w = parse_weights(args, window.cols());

    const Method m = parse_method(args.method);
    if (m == Method::Population)
        throw UsageError("population risk needs known parameters; use a synthetic scenario");
    const RiskSpec spec = spec_for(m, parse_measure(args.measure), args.alpha, args.rho);
    double q;
    if (m == Method::Conventional) {
        q = portfolio_risk(conventional_estimates(window), w, spec);
    } else {
        const PriorSpec prior = m == Method::Jeffreys ? PriorSpec::jeffreys()
                                                      : empirical_bayes_hyperparams(window);
        q = portfolio_risk(posterior_params(window, prior), w, spec);
    }

    nlohmann::json j;
    j["method"] = method_label(m);
    j["measure"] = args.measure;
    j["alpha"] = args.alpha;
    j["n"] = n;
    j["k"] = window.cols();
    j["risk"] = q;
    write_text(args.out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian quantile-based portfolio selection"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Monte Carlo study of GMQ existence and out-of-sample risk prediction");
    simulate->add_option("--config", sim.config, "flat key=value config file");
    simulate->add_option("--n", sim.n, "sample size (omit with --k/--alpha for the full grid)");
    simulate->add_option("--k", sim.k, "portfolio dimension");
    simulate->add_option("--alpha", sim.alpha, "confidence level in (0.5, 1)");
    simulate->add_option("--runs", sim.runs, "simulation runs per configuration");
    simulate->add_flag("--full", sim.full, "use the full 10000-run protocol");
    simulate->add_option("--seed", sim.seed, "master seed")->envname("BQP_SEED");
    simulate->add_option("--methods", sim.methods, "comma-separated method list")
        ->delimiter(',');
    simulate->add_option("--measure", sim.measure, "var or cvar");
    simulate->add_option("--threads", sim.threads, "worker threads (0 = hardware)");
    simulate->add_flag("--existence-only", sim.existence_only,
                       "tally existence failures without the performance pass");
    simulate->add_option("--out", sim.out, "output path (default: stdout)");
    simulate->add_option("--format", sim.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    BacktestArgs bt;
    auto* backtest =
        app.add_subcommand("backtest", "rolling-window backtest over a returns CSV");
    backtest->add_option("--config", bt.config, "flat key=value config file");
    backtest->add_option("--input", bt.input, "returns CSV");
    backtest->add_option("--n", bt.n, "fit window length");
    backtest->add_option("--k", bt.k, "portfolio size");
    backtest->add_option("--alpha", bt.alpha, "confidence level");
    backtest->add_option("--portfolios", bt.portfolios, "number of random portfolios");
    backtest->add_option("--seed", bt.seed, "master seed")->envname("BQP_SEED");
    backtest->add_option("--methods", bt.methods, "comma-separated method list")
        ->delimiter(',');
    backtest->add_option("--measure", bt.measure, "var or cvar");
    backtest->add_option("--threads", bt.threads, "worker threads (0 = hardware)");
    backtest->add_option("--out", bt.out, "output path (default: stdout)");
    backtest->add_option("--format", bt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    FrontierArgs fr;
    auto* frontier = app.add_subcommand(
        "frontier", "mean-quantile efficient frontier tables with GMV/GMQ markers");
    frontier->add_option("--config", fr.config, "flat key=value config file");
    frontier->add_option("--input", fr.input, "returns CSV (fit on the trailing window)");
    frontier->add_flag("--synthetic", fr.synthetic, "generate a seeded scenario instead");
    frontier->add_option("--n", fr.n, "window length (input: default all rows)");
    frontier->add_option("--k", fr.k, "asset count (synthetic mode)");
    frontier->add_option("--seed", fr.seed, "scenario seed")->envname("BQP_SEED");
    frontier->add_option("--alpha", fr.alpha, "confidence level");
    frontier->add_option("--measure", fr.measure, "var, cvar or coherent");
    frontier->add_option("--rho", fr.rho, "coherent risk coefficient rho(tau)");
    frontier->add_option("--estimators", fr.estimators, "comma-separated estimator list")
        ->delimiter(',');
    frontier->add_option("--points", fr.points, "grid points");
    frontier->add_option("--out", fr.out, "output path (default: stdout)");
    frontier->add_option("--format", fr.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    GmqArgs gq;
    auto* gmq = app.add_subcommand("gmq", "global minimum quantile portfolio as JSON");
    gmq->add_option("--config", gq.config, "flat key=value config file");
    gmq->add_option("--input", gq.input, "returns CSV (fit on the trailing window)");
    gmq->add_flag("--synthetic", gq.synthetic, "generate a seeded scenario instead");
    gmq->add_option("--n", gq.n, "window length");
    gmq->add_option("--k", gq.k, "asset count (synthetic mode)");
    gmq->add_option("--seed", gq.seed, "scenario seed")->envname("BQP_SEED");
    gmq->add_option("--method", gq.method, "estimation method");
    gmq->add_option("--alpha", gq.alpha, "confidence level");
    gmq->add_option("--measure", gq.measure, "var, cvar or coherent");
    gmq->add_option("--rho", gq.rho, "coherent risk coefficient rho(tau)");
    gmq->add_option("--out", gq.out, "output path (default: stdout)");

    RiskArgs rk;
    auto* risk = app.add_subcommand("risk", "risk of a given weight vector as JSON");
    risk->add_option("--config", rk.config, "flat key=value config file");
    risk->add_option("--input", rk.input, "returns CSV");
    risk->add_option("--weights", rk.weights, "comma-separated weights summing to 1");
    risk->add_option("--weights-file", rk.weights_file, "file with one weight per line");
    risk->add_option("--n", rk.n, "window length (default all rows)");
    risk->add_option("--method", rk.method, "estimation method");
    risk->add_option("--alpha", rk.alpha, "confidence level");
    risk->add_option("--measure", rk.measure, "var, cvar or coherent");
    risk->add_option("--rho", rk.rho, "coherent risk coefficient rho(tau)");
    risk->add_option("--out", rk.out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim, simulate);
        if (backtest->parsed()) return run_backtest(bt, backtest);
        if (frontier->parsed()) return run_frontier(fr, frontier);
        if (gmq->parsed()) return run_gmq(gq, gmq);
        if (risk->parsed()) return run_risk(rk, risk);
    } catch (const ExistenceError& e) {
        std::cerr << "error: existence: " << e.what() << " q_squared=" << format_double(e.lhs())
                  << " slope_term=" << format_double(e.rhs()) << "\n";
        return kExitNoPortfolio;
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
