#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bqp/io.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = BQP_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args).c_str());
    return rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -1);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "bqp_cli_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config file values apply with command-line precedence", "[cli]") {
    const auto dir = work_dir();
    const auto conf = dir / "study.conf";
    {
        std::ofstream out(conf);
        out << "# desk-scale smoke study\n"
               "n=100\n"
               "k=10\n"
               "alpha=0.95\n"
               "runs=30\n"
               "seed=5\n";
    }
    const auto out_a = dir / "conf_a.csv";
    REQUIRE(run("simulate --config " + conf.string() + " --out " + out_a.string()) == 0);
    const std::string text = slurp(out_a);
    CHECK(text.find(",30\n") != std::string::npos);  // effective_runs from the file

    const auto out_b = dir / "conf_b.csv";
    REQUIRE(run("simulate --config " + conf.string() + " --runs 20 --out " +
                out_b.string()) == 0);
    CHECK(slurp(out_b).find(",20\n") != std::string::npos);  // flag wins

    CHECK(run("simulate --config " + (dir / "missing.conf").string() +
              " 2>/dev/null") == 2);
    const auto bad = dir / "bad.conf";
    std::ofstream(bad) << "no_such_key=1\n";
    CHECK(run("simulate --config " + bad.string() + " 2>/dev/null") == 2);
}

TEST_CASE("simulate emits parseable JSON with all methods", "[cli]") {
    const auto dir = work_dir();
    const auto out = dir / "study.json";
    REQUIRE(run("simulate --n 100 --k 10 --alpha 0.95 --runs 25 --seed 2 --format json --out " +
                out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.contains("configs"));
    REQUIRE(j["configs"].size() == 1);
    const auto& cfg = j["configs"][0];
    CHECK(cfg["n"] == 100);
    CHECK(cfg["effective_runs"] == 25);
    for (const char* m : {"jeffreys", "conjugate", "conventional", "population"})
        CHECK(cfg["methods"].contains(m));
}

TEST_CASE("every numeric in an output file re-parses to the same value", "[cli]") {
    const auto dir = work_dir();
    const auto out = dir / "roundtrip.csv";
    REQUIRE(run("simulate --n 100 --k 10 --alpha 0.95 --runs 25 --seed 2 --out " +
                out.string()) == 0);
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // method name
        while (std::getline(ss, cell, ',')) {
            double value = 0.0;
            REQUIRE(std::sscanf(cell.c_str(), "%lf", &value) == 1);
            if (value == value) REQUIRE(bqp::format_double(value) == cell);
        }
    }
}

TEST_CASE("gmq and frontier work from a returns file", "[cli]") {
    const auto dir = work_dir();
    const auto returns_csv = dir / "returns.csv";
    {
        bqp::SeededRng rng(31);
        auto [mu, sigma] = bqp::generate_scenario(5, rng);
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        const Eigen::MatrixXd chol = llt.matrixL();
        bqp::ReturnSeries series;
        series.values.resize(60, 5);
        Eigen::VectorXd z(5);
        for (int t = 0; t < 60; ++t) {
            for (int i = 0; i < 5; ++i) z(i) = rng.normal();
            series.values.row(t) = (mu + chol * z).transpose();
            char buf[16];
            std::snprintf(buf, sizeof(buf), "2018-%02d-%02d", 1 + t / 28, 1 + t % 28);
            series.dates.emplace_back(buf);
        }
        for (int i = 0; i < 5; ++i) series.assets.push_back("T" + std::to_string(i));
        bqp::save_returns_csv(returns_csv.string(), series);
    }

    const auto gmq_json = dir / "gmq.json";
    REQUIRE(run("gmq --input " + returns_csv.string() + " --n 50 --method bayesian-jeffreys "
                "--out " + gmq_json.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(gmq_json));
    CHECK(j["n"] == 50);
    CHECK(j["k"] == 5);
    REQUIRE(j["weights"].size() == 5);
    double sum = 0.0;
    for (const auto& w : j["weights"]) sum += w.get<double>();
    CHECK(std::fabs(sum - 1.0) < 1e-10);

    const auto frontier_csv = dir / "frontier.csv";
    REQUIRE(run("frontier --input " + returns_csv.string() + " --points 10 --out " +
                frontier_csv.string()) == 0);
    const std::string text = slurp(frontier_csv);
    CHECK(text.rfind("estimator,R,Q\n", 0) == 0);
    CHECK(text.find("bayesian-jeffreys/gmv,") != std::string::npos);
    CHECK(text.find("conventional/gmv,") != std::string::npos);

    // risk of the emitted GMQ weights reproduces the reported risk
    std::string weights;
    for (const auto& w : j["weights"]) {
        if (!weights.empty()) weights += ",";
        weights += bqp::format_double(w.get<double>());
    }
    const auto risk_json = dir / "risk.json";
    REQUIRE(run("risk --input " + returns_csv.string() + " --n 50 --weights " + weights +
                " --out " + risk_json.string()) == 0);
    const auto r = nlohmann::json::parse(slurp(risk_json));
    CHECK(std::fabs(r["risk"].get<double>() - j["risk"].get<double>()) < 1e-9);
}

TEST_CASE("exit codes follow the interface contract", "[cli]") {
    CHECK(run("simulate --definitely-not-a-flag 2>/dev/null") == 2);
    CHECK(run("simulate --n 100 --k 10 --alpha 0.4 --runs 5 2>/dev/null") == 2);
    CHECK(run("backtest 2>/dev/null") == 2);  // missing input
    CHECK(run("gmq --synthetic --n 100 --k 50 --seed 3 --alpha 0.51 2>/dev/null") == 3);
    CHECK(run("2>/dev/null") == 2);  // no subcommand
}
