#pragma once

// Moments of the trait functions over the genotype space, and the Pearson
// correlation matrix built from them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "double_double.hpp"
#include "errors.hpp"
#include "mix.hpp"
#include "nk_model.hpp"

namespace nkcomm {

// Streaming sums of F_i and F_i*F_j. Only the upper triangle (with the
// diagonal) of the co-moment matrix is stored, row-major. Sums are kept in
// double-double so that centered moments stay accurate to ~1e-16 relative
// even when the variance is tiny compared with the raw second moment.
class TraitMoments {
public:
    TraitMoments() = default;
    explicit TraitMoments(std::size_t n_traits)
        : n_(n_traits), sum_(n_traits), co_(n_traits * (n_traits + 1) / 2)
    {
    }

    std::size_t n_traits() const noexcept { return n_; }
    std::uint64_t count() const noexcept { return count_; }
    double sum(std::size_t i) const { return sum_.at(i).value(); }

    /// Co-sum for any (i, j); symmetric.
    double co(std::size_t i, std::size_t j) const { return co_exact(i, j).value(); }

    DoubleDouble sum_exact(std::size_t i) const { return sum_.at(i); }

    DoubleDouble co_exact(std::size_t i, std::size_t j) const
    {
        if (i >= n_ || j >= n_) throw ParameterError("trait index out of range");
        return co_[tri(std::min(i, j), std::max(i, j))];
    }

    void accumulate(std::span<const double> traits)
    {
        if (traits.size() != n_) throw ParameterError("trait vector length does not match accumulator");
        ++count_;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double vi = traits[i];
            sum_[i] = dd::add(sum_[i], vi);
            for (std::size_t j = i; j < n_; ++j, ++idx) co_[idx] = dd::add(co_[idx], dd::two_prod(vi, traits[j]));
        }
    }

    /// Adds `other` field by field into this accumulator.
    void merge(const TraitMoments& other)
    {
        if (other.n_ != n_) throw ParameterError("cannot merge accumulators of different dimension");
        count_ += other.count_;
        for (std::size_t i = 0; i < n_; ++i) sum_[i] = dd::add(sum_[i], other.sum_[i]);
        for (std::size_t i = 0; i < co_.size(); ++i) co_[i] = dd::add(co_[i], other.co_[i]);
    }

    friend TraitMoments merge(TraitMoments a, const TraitMoments& b)
    {
        a.merge(b);
        return a;
    }

    friend bool operator==(const TraitMoments&, const TraitMoments&) = default;

private:
    std::size_t tri(std::size_t i, std::size_t j) const noexcept
    {
        // row i starts after rows of length n, n-1, ..., n-i+1
        return i * n_ - (i * (i - 1)) / 2 + (j - i);
    }

    std::size_t n_ = 0;
    std::uint64_t count_ = 0;
    std::vector<DoubleDouble> sum_;
    std::vector<DoubleDouble> co_;
};

struct EnumerationOptions {
    /// Largest n enumerated exhaustively.
    std::size_t max_genes = 28;
    /// Worker threads; 0 means hardware concurrency.
    std::size_t threads = 1;
};

/// Genotypes per enumeration chunk. Models with n <= 12 form a single chunk,
/// so their moments equal a plain sequential loop bit for bit.
inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 12;

inline TraitMoments chunk_moments(const NkModel& model, std::uint64_t first, std::uint64_t last)
{
    TraitMoments acc(model.n());
    std::vector<double> traits(model.n());
    for (std::uint64_t code = first; code < last; ++code) {
        model.trait_values(code, traits);
        acc.accumulate(traits);
    }
    return acc;
}

// Exhaustive moments over all 2^n genotypes. Chunks are merged in ascending
// order, so the result does not depend on the thread count.
inline TraitMoments enumerate_moments(const NkModel& model, const EnumerationOptions& opts = {})
{
    const std::size_t n = model.n();
    if (n > opts.max_genes)
        throw CapacityError("exhaustive enumeration is capped at n <= " + std::to_string(opts.max_genes) +
                            " (got n = " + std::to_string(n) + ")");
    if (n >= 63) throw CapacityError("exhaustive enumeration needs n < 63");

    const std::uint64_t total = std::uint64_t{1} << n;
    const std::uint64_t chunks = (total + kChunkSize - 1) / kChunkSize;
    std::size_t threads = opts.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : opts.threads;
    threads = static_cast<std::size_t>(std::min<std::uint64_t>(threads, chunks));

    auto bounds = [&](std::uint64_t c) {
        return std::pair{c * kChunkSize, std::min(total, (c + 1) * kChunkSize)};
    };

    if (threads <= 1) {
        auto [lo, hi] = bounds(0);
        TraitMoments result = chunk_moments(model, lo, hi);
        for (std::uint64_t c = 1; c < chunks; ++c) {
            auto [a, b] = bounds(c);
            result.merge(chunk_moments(model, a, b));
        }
        return result;
    }

    // Batches of chunks are computed in parallel, then folded in order.
    const std::uint64_t batch = threads * 4;
    std::vector<TraitMoments> parts;
    TraitMoments result;
    bool first = true;
    for (std::uint64_t start = 0; start < chunks; start += batch) {
        const std::uint64_t stop = std::min(chunks, start + batch);
        parts.assign(stop - start, TraitMoments{});
        std::atomic<std::uint64_t> next{start};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t c = next++; c < stop; c = next++) {
                    auto [a, b] = bounds(c);
                    parts[c - start] = chunk_moments(model, a, b);
                }
            });
        }
        pool.clear();
        for (auto& p : parts) {
            if (first) {
                result = std::move(p);
                first = false;
            } else {
                result.merge(p);
            }
        }
    }
    return result;
}

// Approximate moments from `samples` distinct genotypes drawn uniformly
// without replacement. For landscapes above the enumeration cap only.
inline TraitMoments sample_moments(const NkModel& model, std::uint64_t samples, std::uint64_t seed)
{
    const std::size_t n = model.n();
    const bool full_space_fits = n < 64;
    if (full_space_fits && samples > (std::uint64_t{1} << n))
        throw ParameterError("more samples requested than genotypes exist");
    if (samples > (std::uint64_t{1} << 26)) throw CapacityError("sampling capped at 2^26 genotypes");
    const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    TraitMoments acc(n);
    std::vector<double> traits(n);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(samples);
    SplitMixStream stream(seed);
    while (acc.count() < samples) {
        const std::uint64_t code = stream.next() & mask;
        if (!seen.insert(code).second) continue;
        model.trait_values(code, traits);
        acc.accumulate(traits);
    }
    return acc;
}

// Symmetric N x N Pearson correlations. Zero-variance traits are flagged
// degenerate: diagonal 1, off-diagonals 0.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    CorrelationMatrix(std::size_t n, std::vector<double> rho, std::vector<bool> degenerate)
        : n_(n), rho_(std::move(rho)), degenerate_(std::move(degenerate))
    {
        if (rho_.size() != n_ * n_ || degenerate_.size() != n_)
            throw ParameterError("correlation matrix storage does not match its dimension");
    }

    static CorrelationMatrix identity(std::size_t n)
    {
        std::vector<double> rho(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) rho[i * n + i] = 1.0;
        return CorrelationMatrix(n, std::move(rho), std::vector<bool>(n, false));
    }

    std::size_t n() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return rho_.at(i * n_ + j); }
    bool degenerate(std::size_t i) const { return degenerate_.at(i); }
    std::span<const double> values() const noexcept { return rho_; }

    friend bool operator==(const CorrelationMatrix&, const CorrelationMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> rho_;
    std::vector<bool> degenerate_;
};

inline CorrelationMatrix correlation(const TraitMoments& acc)
{
    if (acc.count() < 2) throw InvariantError("correlation needs at least two observations");
    const std::size_t n = acc.n_traits();
    const double count = static_cast<double>(acc.count());
    const double var_floor = 1e-15 * count;

    auto centered = [&](std::size_t i, std::size_t j) {
        const auto mean_part = dd::div(dd::mul(acc.sum_exact(i), acc.sum_exact(j)), count);
        return dd::add(acc.co_exact(i, j), dd::neg(mean_part)).value();
    };

    std::vector<double> var(n);
    std::vector<bool> degenerate(n);
    for (std::size_t i = 0; i < n; ++i) {
        var[i] = centered(i, i);
        degenerate[i] = var[i] <= var_floor;
    }

    std::vector<double> rho(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rho[i * n + i] = 1.0;
        if (degenerate[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (degenerate[j]) continue;
            const double r = std::clamp(centered(i, j) / std::sqrt(var[i] * var[j]), -1.0, 1.0);
            rho[i * n + j] = r;
            rho[j * n + i] = r;
        }
    }
    return CorrelationMatrix(n, std::move(rho), std::move(degenerate));
}

/// Mean of rho_ij^2 over unordered pairs i < j.
inline double mean_squared_correlation(const CorrelationMatrix& c)
{
    const std::size_t n = c.n();
    if (n < 2) throw ParameterError("mean squared correlation needs at least two traits");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) total += c(i, j) * c(i, j);
    return total / static_cast<double>(n * (n - 1) / 2);
}

} // namespace nkcomm
