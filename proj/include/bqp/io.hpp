#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bqp/backtest.hpp"
#include "bqp/errors.hpp"
#include "bqp/optimizer.hpp"
#include "bqp/returns.hpp"
#include "bqp/simulation.hpp"

namespace bqp {

/// Shortest decimal form that parses back to the exact same double.
inline std::string format_double(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == x || (x != x && back != back)) break;
    }
    return buf;
}

namespace detail {

inline double parse_double(std::string_view cell, std::size_t line, std::size_t column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream os;
        os << "unparseable number '" << std::string(cell) << "' at row " << line << ", column "
           << column;
        throw ParseError(os.str(), line);
    }
    return value;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

}  // namespace detail

/// Parses a returns CSV: header `date,<asset>,<asset>,...`, then one row per
/// period with an ISO-8601 date followed by decimal log returns.
inline ReturnSeries load_returns_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open returns file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty returns file: " + path, 1);
    const auto header = detail::split_csv(line);
    if (header.size() < 2)
        throw ParseError("header must contain a date column and at least one asset", 1);

    ReturnSeries series;
    series.assets.reserve(header.size() - 1);
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i].empty()) throw ParseError("empty asset identifier in header", 1);
        series.assets.emplace_back(header[i]);
    }
    const std::size_t k = series.assets.size();

    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != k + 1) {
            std::ostringstream os;
            os << "row " << line_no << " has " << cells.size() << " cells, expected " << k + 1;
            throw ParseError(os.str(), line_no);
        }
        if (cells[0].empty()) throw ParseError("missing date", line_no);
        std::string date(cells[0]);
        if (!series.dates.empty()) {
            if (date == series.dates.back())
                throw ParseError("duplicate date '" + date + "'", line_no);
            if (date < series.dates.back())
                throw ParseError("dates out of order at '" + date + "'", line_no);
        }
        series.dates.push_back(std::move(date));
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].empty()) {
                std::ostringstream os;
                os << "blank cell at row " << line_no << ", column " << i + 1;
                throw ParseError(os.str(), line_no);
            }
            flat.push_back(detail::parse_double(cells[i], line_no, i + 1));
        }
    }
    if (series.dates.empty()) throw ParseError("returns file has no data rows", line_no);

    series.values.resize(static_cast<Eigen::Index>(series.dates.size()),
                         static_cast<Eigen::Index>(k));
    for (Eigen::Index t = 0; t < series.values.rows(); ++t)
        for (Eigen::Index i = 0; i < series.values.cols(); ++i)
            series.values(t, i) = flat[static_cast<std::size_t>(t) * k +
                                       static_cast<std::size_t>(i)];
    series.validate();
    return series;
}

inline void save_returns_csv(std::ostream& out, const ReturnSeries& series) {
    series.validate();
    out << "date";
    for (const auto& a : series.assets) out << ',' << a;
    out << '\n';
    for (Eigen::Index t = 0; t < series.values.rows(); ++t) {
        out << series.dates[static_cast<std::size_t>(t)];
        for (Eigen::Index i = 0; i < series.values.cols(); ++i)
            out << ',' << format_double(series.values(t, i));
        out << '\n';
    }
}

inline void save_returns_csv(const std::string& path, const ReturnSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write returns file: " + path);
    save_returns_csv(out, series);
}

// -------------------------------------------------------------------------
// Study results
// -------------------------------------------------------------------------

inline void write_study_csv(std::ostream& out, const std::vector<StudyResult>& studies) {
    out << "method,alpha,n,k,exceedance,mean_abs_dev,sd_abs_dev,existence_failures,"
           "effective_runs\n";
    for (const auto& s : studies) {
        for (const auto& m : s.methods) {
            out << to_string(m.method) << ',' << format_double(s.config.alpha) << ','
                << s.config.n << ',' << s.config.k << ',' << format_double(m.exceedance) << ','
                << format_double(m.mean_abs_dev) << ',' << format_double(m.sd_abs_dev) << ','
                << m.existence_failures << ',' << s.effective_runs << '\n';
        }
    }
}

inline nlohmann::json study_to_json(const StudyResult& s) {
    nlohmann::json j;
    j["n"] = s.config.n;
    j["k"] = s.config.k;
    j["alpha"] = s.config.alpha;
    j["runs"] = s.config.runs;
    j["seed"] = s.config.seed;
    j["measure"] = to_string(s.config.measure);
    j["effective_runs"] = s.effective_runs;
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& m : s.methods) {
        nlohmann::json mj;
        mj["existence_failures"] = m.existence_failures;
        if (m.exceedance == m.exceedance) {
            mj["exceedance"] = m.exceedance;
            mj["mean_abs_dev"] = m.mean_abs_dev;
            if (m.sd_abs_dev == m.sd_abs_dev) mj["sd_abs_dev"] = m.sd_abs_dev;
        }
        methods[to_string(m.method)] = std::move(mj);
    }
    j["methods"] = std::move(methods);
    return j;
}

inline nlohmann::json studies_to_json(const std::vector<StudyResult>& studies) {
    nlohmann::json j;
    j["configs"] = nlohmann::json::array();
    for (const auto& s : studies) j["configs"].push_back(study_to_json(s));
    return j;
}

// -------------------------------------------------------------------------
// Frontier curves
// -------------------------------------------------------------------------

/// One `estimator,R,Q` row per grid point per curve; the GMV and GMQ markers
/// reuse the schema with `<label>/gmv` and `<label>/gmq` estimator names.
struct LabelledFrontier {
    std::string label;
    FrontierCurve curve;
    bool has_gmq = false;
    FrontierPoint gmq_point;
};

inline void write_frontier_csv(std::ostream& out, const std::vector<LabelledFrontier>& curves) {
    out << "estimator,R,Q\n";
    for (const auto& lf : curves) {
        for (const auto& p : lf.curve.points)
            out << lf.label << ',' << format_double(p.ret) << ',' << format_double(p.value)
                << '\n';
        out << lf.label << "/gmv," << format_double(lf.curve.gmv_point.ret) << ','
            << format_double(lf.curve.gmv_point.value) << '\n';
        if (lf.has_gmq)
            out << lf.label << "/gmq," << format_double(lf.gmq_point.ret) << ','
                << format_double(lf.gmq_point.value) << '\n';
    }
}

inline nlohmann::json frontiers_to_json(const std::vector<LabelledFrontier>& curves) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& lf : curves) {
        nlohmann::json c;
        c["mode"] = lf.curve.mode == FrontierMode::MeanQuantile ? "mean-q" : "mean-variance";
        c["points"] = nlohmann::json::array();
        for (const auto& p : lf.curve.points)
            c["points"].push_back({{"R", p.ret}, {"Q", p.value}});
        c["gmv"] = {{"R", lf.curve.gmv_point.ret}, {"Q", lf.curve.gmv_point.value}};
        if (lf.has_gmq) c["gmq"] = {{"R", lf.gmq_point.ret}, {"Q", lf.gmq_point.value}};
        j[lf.label] = std::move(c);
    }
    return j;
}

// -------------------------------------------------------------------------
// Backtest reports
// -------------------------------------------------------------------------

inline void write_backtest_csv(std::ostream& out, const BacktestReport& report) {
    out << "method,alpha,n,k,exceedance,existence_failures,included_portfolios,"
           "evaluation_dates\n";
    for (const auto& m : report.methods) {
        out << to_string(m.method) << ',' << format_double(report.config.alpha) << ','
            << report.config.n << ',' << report.config.k << ',' << format_double(m.exceedance)
            << ',' << m.existence_failures << ',' << report.included_portfolios << ','
            << report.evaluation_dates << '\n';
    }
}

inline nlohmann::json backtest_to_json(const BacktestReport& report) {
    nlohmann::json j;
    j["n"] = report.config.n;
    j["k"] = report.config.k;
    j["alpha"] = report.config.alpha;
    j["measure"] = to_string(report.config.measure);
    j["seed"] = report.config.seed;
    j["portfolios"] = report.portfolios;
    j["included_portfolios"] = report.included_portfolios;
    j["evaluation_dates"] = report.evaluation_dates;
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& m : report.methods) {
        nlohmann::json mj;
        mj["existence_failures"] = m.existence_failures;
        if (m.exceedance == m.exceedance) mj["exceedance"] = m.exceedance;
        methods[to_string(m.method)] = std::move(mj);
    }
    j["methods"] = std::move(methods);
    return j;
}

}  // namespace bqp
