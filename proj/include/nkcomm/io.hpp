#pragma once

// File formats: model descriptor and table dumps, correlation CSV, sweep
// CSV and summary JSON, Pajek .net/.clu, SVG sweep charts.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "community.hpp"
#include "errors.hpp"
#include "nk_model.hpp"
#include "sweep.hpp"
#include "trait_stats.hpp"

namespace nkcomm {

using json = nlohmann::ordered_json;

template <typename... Args>
std::string format_c(const char* fmt, Args... args)
{
    char buf[64];
    const int len = std::snprintf(buf, sizeof buf, fmt, args...);
    if (len < 0) throw InvariantError("number formatting failed");
    if (static_cast<std::size_t>(len) < sizeof buf) return std::string(buf, static_cast<std::size_t>(len));
    std::string out(static_cast<std::size_t>(len) + 1, '\0');
    std::snprintf(out.data(), out.size(), fmt, args...);
    out.pop_back();
    return out;
}

/// Fixed-point with `decimals` places; values that round to zero print
/// without a sign.
inline std::string fixed(double v, int decimals)
{
    auto s = format_c("%.*f", decimals, v);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

/// Ten significant digits, "%.10g".
inline std::string sig10(double v)
{
    if (v == 0.0) v = 0.0; // drop the sign of -0
    return format_c("%.10g", v);
}

// ---------------------------------------------------------------- model

struct ModelDescriptor {
    std::size_t n = 0;
    std::size_t k = 0;
    EpistasisMode mode = EpistasisMode::Random;
    std::uint64_t seed = 0;
    TableMode table_mode = TableMode::Materialized;

    static ModelDescriptor of(const NkModel& m)
    {
        return {m.n(), m.k(), m.mode(), m.seed(), m.table_mode()};
    }

    NkModel build() const { return NkModel(n, k, mode, seed, table_mode); }
};

inline json to_json(const ModelDescriptor& d)
{
    return json{{"n", d.n},
                {"k", d.k},
                {"mode", std::string(to_string(d.mode))},
                {"seed", d.seed},
                {"table_mode", std::string(to_string(d.table_mode))}};
}

inline ModelDescriptor model_descriptor_from_json(const json& j)
{
    try {
        ModelDescriptor d;
        d.n = j.at("n").get<std::size_t>();
        d.k = j.at("k").get<std::size_t>();
        const auto mode = parse_epistasis_mode(j.at("mode").get<std::string>());
        if (!mode) throw ParseError("model descriptor: mode must be adjacent or random");
        d.mode = *mode;
        d.seed = j.at("seed").get<std::uint64_t>();
        const auto tm = parse_table_mode(j.value("table_mode", std::string("materialized")));
        if (!tm) throw ParseError("model descriptor: table_mode must be materialized or on_the_fly");
        d.table_mode = *tm;
        check_nk(d.n, d.k);
        return d;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model descriptor: ") + e.what());
    }
}

/// {"n", "k", "links": [[1-based gene numbers]], "tables": [[values]]}
inline json tables_to_json(const NkModel& model)
{
    json links = json::array();
    json tables = json::array();
    for (std::size_t i = 0; i < model.n(); ++i) {
        json row = json::array();
        for (auto g : model.epistasis().links(i)) row.push_back(g + 1);
        links.push_back(std::move(row));
        json t = json::array();
        for (std::uint64_t e = 0; e < model.epistasis().table_size(); ++e) t.push_back(model.table_value(i, e));
        tables.push_back(std::move(t));
    }
    return json{{"n", model.n()}, {"k", model.k()}, {"links", links}, {"tables", tables}};
}

// Flat little-endian IEEE-754 doubles, gene-major: entry j of gene i sits at
// index i * 2^(k+1) + j.
inline void write_tables_binary(std::ostream& out, const NkModel& model)
{
    for (std::size_t i = 0; i < model.n(); ++i) {
        for (std::uint64_t e = 0; e < model.epistasis().table_size(); ++e) {
            auto bits = std::bit_cast<std::uint64_t>(model.table_value(i, e));
            char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
            out.write(bytes, 8);
        }
    }
}

// ---------------------------------------------------------------- correlation CSV

/// N lines of N comma-separated values, 10 decimals, no header.
inline void write_correlation_csv(std::ostream& out, const CorrelationMatrix& c)
{
    for (std::size_t i = 0; i < c.n(); ++i) {
        for (std::size_t j = 0; j < c.n(); ++j) {
            if (j) out << ',';
            out << fixed(c(i, j), 10);
        }
        out << '\n';
    }
}

inline double parse_double_field(std::string_view field, std::size_t line)
{
    std::string s(field);
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw ParseError("line " + std::to_string(line) + ": empty field");
    s = s.substr(first, last - first + 1);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool blank(std::string_view s)
{
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

// Reads a square, symmetric matrix with entries in [-1, 1]. Degenerate flags
// are not part of the format and come back false.
inline CorrelationMatrix read_correlation_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        std::vector<double> row;
        for (auto f : split_commas(line)) {
            const double v = parse_double_field(f, lineno);
            if (v < -1.0 - 1e-9 || v > 1.0 + 1e-9)
                throw ParseError("line " + std::to_string(lineno) + ": correlation outside [-1, 1]");
            row.push_back(std::clamp(v, -1.0, 1.0));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                             " columns, found " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("correlation CSV is empty");
    const std::size_t n = rows.size();
    if (rows.front().size() != n)
        throw ParseError("correlation CSV must be square (" + std::to_string(n) + " rows, " +
                         std::to_string(rows.front().size()) + " columns)");
    std::vector<double> rho(n * n);
    std::vector<bool> degenerate(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(rows[i][j] - rows[j][i]) > 1e-9)
                throw ParseError("line " + std::to_string(i + 1) + ": matrix is not symmetric");
            rho[i * n + j] = rows[i][j];
        }
    }
    return CorrelationMatrix(n, std::move(rho), std::move(degenerate));
}

inline json correlation_to_json(const CorrelationMatrix& c)
{
    json rows = json::array();
    for (std::size_t i = 0; i < c.n(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < c.n(); ++j) row.push_back(c(i, j));
        rows.push_back(std::move(row));
    }
    json deg = json::array();
    for (std::size_t i = 0; i < c.n(); ++i) deg.push_back(c.degenerate(i));
    return json{{"n", c.n()}, {"rho", rows}, {"degenerate", deg}};
}

// ---------------------------------------------------------------- Pajek

/// `*Vertices N`, `i "F_i"` lines, `*Edges`, `i j w` lines (1-based, w with
/// 6 decimals). Lines end in '\n'.
inline void write_pajek_net(std::ostream& out, const WeightedGraph& g)
{
    out << "*Vertices " << g.n() << '\n';
    for (std::size_t i = 1; i <= g.n(); ++i) out << i << " \"F_" << i << "\"\n";
    out << "*Edges\n";
    for (const auto& e : g.edges()) out << e.i + 1 << ' ' << e.j + 1 << ' ' << fixed(e.w, 6) << '\n';
}

/// `*Vertices N` followed by one 1-based community id per line.
inline void write_pajek_clu(std::ostream& out, const Partition& p)
{
    out << "*Vertices " << p.assignment.size() << '\n';
    for (auto c : p.assignment) out << c + 1 << '\n';
}

// ---------------------------------------------------------------- sweep CSV

inline constexpr std::string_view kSweepCsvHeader = "mode,k,replicate,seed,nc,q,msc,wall_ms";

/// With `timing == false` the wall_ms column is written as 0 so that reruns
/// are byte-identical.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, bool timing = true)
{
    out << kSweepCsvHeader << '\n';
    for (const auto& r : records) {
        out << to_string(r.mode) << ',' << r.k << ',' << r.replicate << ',' << r.seed << ',' << r.nc << ','
            << sig10(r.q) << ',' << sig10(r.msc) << ',' << (timing ? fixed(r.wall_ms, 3) : std::string("0")) << '\n';
    }
}

inline std::vector<SweepRecord> read_sweep_csv(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!blank(line)) break;
    }
    if (lineno == 0 || blank(line)) throw ParseError("no records");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepCsvHeader)
        throw ParseError("line " + std::to_string(lineno) + ": expected header '" + std::string(kSweepCsvHeader) + "'");

    auto parse_uint = [](std::string_view f, std::size_t ln) {
        std::string s(f);
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("line " + std::to_string(ln) + ": expected unsigned integer, found '" + s + "'");
        try {
            return static_cast<std::uint64_t>(std::stoull(s));
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(ln) + ": integer out of range");
        }
    };

    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        if (line.back() == '\r') line.pop_back();
        const auto f = split_commas(line);
        if (f.size() != 8)
            throw ParseError("line " + std::to_string(lineno) + ": expected 8 fields, found " + std::to_string(f.size()));
        SweepRecord r;
        const auto mode = parse_epistasis_mode(f[0]);
        if (!mode) throw ParseError("line " + std::to_string(lineno) + ": unknown mode '" + std::string(f[0]) + "'");
        r.mode = *mode;
        r.k = parse_uint(f[1], lineno);
        r.replicate = parse_uint(f[2], lineno);
        r.seed = parse_uint(f[3], lineno);
        r.nc = parse_uint(f[4], lineno);
        r.q = parse_double_field(f[5], lineno);
        r.msc = parse_double_field(f[6], lineno);
        r.wall_ms = parse_double_field(f[7], lineno);
        records.push_back(r);
    }
    if (records.empty()) throw ParseError("no records");
    return records;
}

inline json stats_to_json(const SummaryStats& s)
{
    return json{{"median", s.median}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"iqr", s.iqr}};
}

/// {"<mode>": {"<k>": {"count": .., "nc": {...}, "q": {...}, "msc": {...}}}}
inline json summary_to_json(const std::vector<CellSummary>& summary)
{
    json out = json::object();
    for (const auto& s : summary) {
        auto& by_k = out[std::string(to_string(s.mode))];
        by_k[std::to_string(s.k)] = json{{"count", s.count},
                                         {"nc", stats_to_json(s.nc)},
                                         {"q", stats_to_json(s.q)},
                                         {"msc", stats_to_json(s.msc)}};
    }
    return out;
}

// ---------------------------------------------------------------- SVG

enum class Metric { Nc, Q, Msc };

inline std::optional<Metric> parse_metric(std::string_view s) noexcept
{
    if (s == "nc") return Metric::Nc;
    if (s == "q") return Metric::Q;
    if (s == "msc") return Metric::Msc;
    return std::nullopt;
}

inline std::string_view to_string(Metric m) noexcept
{
    switch (m) {
    case Metric::Nc: return "nc";
    case Metric::Q: return "q";
    case Metric::Msc: return "msc";
    }
    return "nc";
}

// Median-vs-k line per mode with an interquartile band. The extreme point of
// each series is marked: the minimum for nc, the maximum for q and msc.
inline void write_sweep_svg(std::ostream& out, const std::vector<SweepRecord>& records, Metric metric)
{
    if (records.empty()) throw ParseError("no records");
    const auto summary = summarize_records(records);
    auto pick = [metric](const CellSummary& s) -> const SummaryStats& {
        switch (metric) {
        case Metric::Nc: return s.nc;
        case Metric::Q: return s.q;
        case Metric::Msc: return s.msc;
        }
        return s.nc;
    };

    struct Point {
        std::size_t k;
        double median, lo, hi;
    };
    std::map<EpistasisMode, std::vector<Point>> series;
    double k_max = 0.0, y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const auto& s : summary) {
        const auto& st = pick(s);
        // band is the interquartile range around the median
        std::vector<double> vals;
        for (const auto& r : records) {
            if (r.mode != s.mode || r.k != s.k) continue;
            vals.push_back(metric == Metric::Nc ? static_cast<double>(r.nc) : metric == Metric::Q ? r.q : r.msc);
        }
        std::sort(vals.begin(), vals.end());
        Point p{s.k, st.median, quantile_sorted(vals, 0.25), quantile_sorted(vals, 0.75)};
        series[s.mode].push_back(p);
        k_max = std::max(k_max, static_cast<double>(s.k));
        y_min = std::min(y_min, p.lo);
        y_max = std::max(y_max, p.hi);
    }
    for (auto& [mode, pts] : series)
        std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.k < b.k; });
    if (metric == Metric::Nc) y_min = std::min(y_min, 0.0);
    if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
    if (k_max == 0.0) k_max = 1.0;

    constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
    auto sx = [&](double k) { return L + (W - L - R) * k / k_max; };
    auto sy = [&](double v) { return H - B - (H - T - B) * (v - y_min) / (y_max - y_min); };
    auto px = [](double v) { return fixed(v, 2); };
    const char* colors[] = {"#1f77b4", "#d62728"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <line class=\"axis\" x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "  <line class=\"axis\" x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int kk = 0; kk <= static_cast<int>(k_max); ++kk)
        out << "  <text x=\"" << px(sx(kk)) << "\" y=\"" << H - B + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
            << kk << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = y_min + (y_max - y_min) * t / 4.0;
        out << "  <text x=\"" << L - 6 << "\" y=\"" << px(sy(v) + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
            << sig10(std::round(v * 1e4) / 1e4) << "</text>\n";
    }
    out << "  <text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"14\" text-anchor=\"middle\">k</text>\n";
    out << "  <text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\">" << to_string(metric) << "</text>\n";

    int idx = 0;
    for (const auto& [mode, pts] : series) {
        const char* color = colors[idx % 2];
        std::string band, line;
        for (const auto& p : pts) band += px(sx(p.k)) + "," + px(sy(p.hi)) + " ";
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) band += px(sx(it->k)) + "," + px(sy(it->lo)) + " ";
        for (const auto& p : pts) line += px(sx(p.k)) + "," + px(sy(p.median)) + " ";
        band.pop_back();
        line.pop_back();
        out << "  <polygon class=\"iqr\" data-mode=\"" << to_string(mode) << "\" points=\"" << band << "\" fill=\""
            << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        out << "  <polyline class=\"median\" data-mode=\"" << to_string(mode) << "\" points=\"" << line
            << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";

        const auto extreme = metric == Metric::Nc
                                 ? std::min_element(pts.begin(), pts.end(),
                                                    [](const Point& a, const Point& b) { return a.median < b.median; })
                                 : std::max_element(pts.begin(), pts.end(),
                                                    [](const Point& a, const Point& b) { return a.median < b.median; });
        out << "  <circle class=\"peak\" data-mode=\"" << to_string(mode) << "\" data-k=\"" << extreme->k << "\" cx=\""
            << px(sx(extreme->k)) << "\" cy=\"" << px(sy(extreme->median)) << "\" r=\"5\" fill=\"" << color << "\"/>\n";
        out << "  <text x=\"" << W - R - 110 << "\" y=\"" << T + 16 * idx << "\" font-size=\"12\" fill=\"" << color << "\">"
            << to_string(mode) << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

} // namespace nkcomm
