#pragma once

// The k x mode x replicate experiment grid.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "community.hpp"
#include "errors.hpp"
#include "mix.hpp"
#include "nk_model.hpp"
#include "trait_stats.hpp"

namespace nkcomm {

struct SweepConfig {
    std::size_t n = 10;
    std::vector<std::size_t> k_values;
    std::vector<EpistasisMode> modes{EpistasisMode::Adjacent, EpistasisMode::Random};
    std::size_t replicates = 20;
    std::uint64_t base_seed = 0;
    WeightMode weight_mode = WeightMode::Abs;
    double threshold = kDefaultEdgeThreshold;
    /// Concurrent cells; 0 means hardware concurrency. Results do not depend on it.
    std::size_t threads = 1;
    std::size_t max_genes = 28;

    /// k = 0..n-1.
    static std::vector<std::size_t> all_k(std::size_t n)
    {
        std::vector<std::size_t> ks(n);
        for (std::size_t k = 0; k < n; ++k) ks[k] = k;
        return ks;
    }

    void validate() const
    {
        if (n < 2) throw ParameterError("n must be >= 2 for a correlation network");
        if (n > kMaxGenes) throw ParameterError("n must be <= 64");
        if (k_values.empty()) throw ParameterError("k_values must not be empty");
        if (!std::is_sorted(k_values.begin(), k_values.end()) ||
            std::adjacent_find(k_values.begin(), k_values.end()) != k_values.end())
            throw ParameterError("k_values must be strictly increasing");
        if (k_values.back() > n - 1) throw ParameterError("k must be <= n-1");
        if (modes.empty()) throw ParameterError("at least one mode is required");
        for (std::size_t a = 0; a < modes.size(); ++a)
            for (std::size_t b = 0; b < a; ++b)
                if (modes[a] == modes[b]) throw ParameterError("modes must not repeat");
        if (replicates < 1) throw ParameterError("replicates must be >= 1");
        if (!(threshold >= 0.0)) throw ParameterError("epsilon must be >= 0");
    }
};

struct SweepRecord {
    EpistasisMode mode = EpistasisMode::Random;
    std::size_t k = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::size_t nc = 0;
    double q = 0.0;
    double msc = 0.0;
    double wall_ms = 0.0;
};

struct CellFailure {
    EpistasisMode mode;
    std::size_t k;
    std::size_t replicate;
    std::string message;
    int exit_code;
};

struct SummaryStats {
    double median = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double iqr = 0.0;
};

struct CellSummary {
    EpistasisMode mode;
    std::size_t k;
    std::size_t count;
    SummaryStats nc;
    SummaryStats q;
    SummaryStats msc;
};

struct SweepResult {
    std::vector<SweepRecord> records;   ///< grid order: mode, k, replicate
    std::vector<CellFailure> failures;
    std::vector<CellSummary> summary;   ///< grid order: mode, k
};

inline std::uint64_t mode_tag(EpistasisMode mode) noexcept
{
    return mode == EpistasisMode::Adjacent ? 1 : 2;
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, EpistasisMode mode, std::uint64_t k,
                                 std::uint64_t replicate) noexcept
{
    return mix64(base_seed ^ mix64((mode_tag(mode) << 48) + (k << 32) + replicate));
}

/// Landscape -> moments -> correlations -> graph -> Louvain for one cell.
/// The replicate field is left at 0.
inline SweepRecord run_cell(std::size_t n, std::size_t k, EpistasisMode mode, std::uint64_t seed,
                            WeightMode weight_mode = WeightMode::Abs,
                            double threshold = kDefaultEdgeThreshold, EnumerationOptions enumeration = {})
{
    const auto start = std::chrono::steady_clock::now();
    const NkModel model(n, k, mode, seed);
    const auto corr = correlation(enumerate_moments(model, enumeration));
    const double msc = mean_squared_correlation(corr);
    const auto partition = louvain(graph_from_correlation(corr, weight_mode, threshold), seed);
    const auto stop = std::chrono::steady_clock::now();

    SweepRecord r;
    r.mode = mode;
    r.k = k;
    r.seed = seed;
    r.nc = partition.nc;
    r.q = partition.q;
    r.msc = msc;
    r.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    if (r.nc < 1 || r.nc > n || !(r.q >= -1.0 && r.q <= 1.0) || !(r.msc >= 0.0 && r.msc <= 1.0))
        throw InvariantError("cell result out of range");
    return r;
}

/// Linear-interpolation quantile of sorted data (p in [0,1]).
inline double quantile_sorted(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) throw InvariantError("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    SummaryStats s;
    s.median = quantile_sorted(values, 0.5);
    s.min = values.front();
    s.max = values.back();
    s.iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    return s;
}

/// Per (mode, k) statistics in the order the pairs first appear in `records`.
inline std::vector<CellSummary> summarize_records(const std::vector<SweepRecord>& records)
{
    std::vector<CellSummary> out;
    std::vector<std::pair<EpistasisMode, std::size_t>> keys;
    for (const auto& r : records)
        if (std::find(keys.begin(), keys.end(), std::pair{r.mode, r.k}) == keys.end()) keys.emplace_back(r.mode, r.k);
    for (auto [mode, k] : keys) {
        std::vector<double> nc, q, msc;
        for (const auto& r : records) {
            if (r.mode != mode || r.k != k) continue;
            nc.push_back(static_cast<double>(r.nc));
            q.push_back(r.q);
            msc.push_back(r.msc);
        }
        out.push_back({mode, k, nc.size(), summarize(nc), summarize(q), summarize(msc)});
    }
    return out;
}

inline SweepResult run_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    struct Cell {
        EpistasisMode mode;
        std::size_t k;
        std::size_t replicate;
    };
    std::vector<Cell> cells;
    for (auto mode : cfg.modes)
        for (auto k : cfg.k_values)
            for (std::size_t r = 0; r < cfg.replicates; ++r) cells.push_back({mode, k, r});

    std::vector<std::optional<SweepRecord>> slots(cells.size());
    std::vector<std::optional<CellFailure>> errors(cells.size());
    EnumerationOptions enumeration;
    enumeration.max_genes = cfg.max_genes;
    enumeration.threads = 1;

    auto run_one = [&](std::size_t idx) {
        const auto& c = cells[idx];
        try {
            auto rec = run_cell(cfg.n, c.k, c.mode, derive_seed(cfg.base_seed, c.mode, c.k, c.replicate),
                                cfg.weight_mode, cfg.threshold, enumeration);
            rec.replicate = c.replicate;
            slots[idx] = rec;
        } catch (const Error& e) {
            errors[idx] = CellFailure{c.mode, c.k, c.replicate, e.what(), e.exit_code()};
        } catch (const std::exception& e) {
            errors[idx] = CellFailure{c.mode, c.k, c.replicate, e.what(), 4};
        }
    };

    std::size_t threads = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::min(threads, cells.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) run_one(i);
            });
    }

    SweepResult result;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (slots[i]) result.records.push_back(*slots[i]);
        if (errors[i]) result.failures.push_back(*errors[i]);
    }
    result.summary = summarize_records(result.records);
    return result;
}

} // namespace nkcomm
