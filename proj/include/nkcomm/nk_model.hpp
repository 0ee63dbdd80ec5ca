#pragma once

// Binary NK landscapes.
//
// Genes are numbered 0..n-1 throughout this API. Documentation and the
// textual formats (Pajek labels, README) use 1-based numbering, so gene 0
// here is "gene 1" there. The hashing keys below use the 1-based number.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mix.hpp"

namespace nkcomm {

enum class EpistasisMode { Adjacent, Random };
enum class TableMode { Materialized, OnTheFly };

inline std::string_view to_string(EpistasisMode mode) noexcept
{
    return mode == EpistasisMode::Adjacent ? "adjacent" : "random";
}

inline std::string_view to_string(TableMode mode) noexcept
{
    return mode == TableMode::Materialized ? "materialized" : "on_the_fly";
}

inline std::optional<EpistasisMode> parse_epistasis_mode(std::string_view s) noexcept
{
    if (s == "adjacent") return EpistasisMode::Adjacent;
    if (s == "random") return EpistasisMode::Random;
    return std::nullopt;
}

inline std::optional<TableMode> parse_table_mode(std::string_view s) noexcept
{
    if (s == "materialized") return TableMode::Materialized;
    if (s == "on_the_fly") return TableMode::OnTheFly;
    return std::nullopt;
}

/// Largest supported gene count; genotypes are packed into a 64-bit code.
inline constexpr std::size_t kMaxGenes = 64;
/// Largest epistasis degree whose tables (2^(k+1) entries) stay addressable
/// without colliding with the per-gene hash key.
inline constexpr std::size_t kMaxDegree = 39;

// A point of {0,1}^n. The canonical integer code has gene i at bit i.
class Genotype {
public:
    explicit Genotype(std::vector<std::uint8_t> bits) : bits_(std::move(bits))
    {
        if (bits_.size() > kMaxGenes)
            throw ParameterError("genotype longer than 64 genes");
        for (auto b : bits_)
            if (b > 1) throw ParameterError("genotype entries must be 0 or 1");
    }

    static Genotype from_code(std::uint64_t code, std::size_t n)
    {
        if (n > kMaxGenes) throw ParameterError("genotype longer than 64 genes");
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>((code >> i) & 1U);
        return Genotype(std::move(bits));
    }

    std::uint64_t code() const noexcept
    {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i) c |= std::uint64_t{bits_[i]} << i;
        return c;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits_.at(i); }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    Genotype flipped(std::size_t gene) const
    {
        auto bits = bits_;
        bits.at(gene) ^= 1U;
        return Genotype(std::move(bits));
    }

    friend bool operator==(const Genotype&, const Genotype&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

// Which genes feed each trait. links(i)[j] is the (j+1)-th epistatic gene of
// gene i; the order fixes the bit weights in the table index.
class EpistasisMatrix {
public:
    EpistasisMatrix(std::size_t n, std::size_t k, EpistasisMode mode,
                    std::vector<std::vector<std::size_t>> links)
        : n_(n), k_(k), mode_(mode), links_(std::move(links))
    {
        if (links_.size() != n_) throw ParameterError("epistasis matrix needs one link list per gene");
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& row = links_[i];
            if (row.size() != k_) throw ParameterError("every gene needs exactly k links");
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (row[a] >= n_ || row[a] == i)
                    throw ParameterError("epistatic link out of range or self-referential");
                for (std::size_t b = 0; b < a; ++b)
                    if (row[a] == row[b]) throw ParameterError("duplicate epistatic link");
            }
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }
    EpistasisMode mode() const noexcept { return mode_; }
    std::span<const std::size_t> links(std::size_t gene) const { return links_.at(gene); }

    /// Number of entries in each trait table, 2^(k+1).
    std::uint64_t table_size() const noexcept { return std::uint64_t{1} << (k_ + 1); }

    friend bool operator==(const EpistasisMatrix&, const EpistasisMatrix&) = default;

private:
    std::size_t n_;
    std::size_t k_;
    EpistasisMode mode_;
    std::vector<std::vector<std::size_t>> links_;
};

inline void check_nk(std::size_t n, std::size_t k)
{
    if (n < 1) throw ParameterError("n must be >= 1");
    if (n > kMaxGenes) throw ParameterError("n must be <= 64");
    if (k > n - 1) throw ParameterError("k must be <= n-1");
    if (k > kMaxDegree) throw ParameterError("k must be <= 39");
}

namespace detail {

// Stream key for the random-mode draw of gene i. The low 40 bits are all
// ones, which no table entry index (< 2^40) can produce.
constexpr std::uint64_t link_stream_key(std::size_t gene) noexcept
{
    return (std::uint64_t{gene + 1} << 40) + ((std::uint64_t{1} << 40) - 1);
}

constexpr std::uint64_t table_key(std::size_t gene, std::uint64_t entry) noexcept
{
    return (std::uint64_t{gene + 1} << 40) + entry;
}

} // namespace detail

/// Adjacent mode collects ring neighbours by increasing radius, the
/// predecessor before the successor. Random mode takes the first k draws of
/// a partial Fisher-Yates shuffle of the other genes.
inline EpistasisMatrix build_epistasis(std::size_t n, std::size_t k, EpistasisMode mode,
                                       std::uint64_t seed)
{
    check_nk(n, k);
    std::vector<std::vector<std::size_t>> links(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = links[i];
        row.reserve(k);
        if (mode == EpistasisMode::Adjacent) {
            for (std::size_t r = 1; row.size() < k; ++r) {
                const std::size_t before = (i + n - r % n) % n;
                const std::size_t after = (i + r) % n;
                row.push_back(before);
                if (row.size() < k && after != before) row.push_back(after);
            }
        } else {
            std::vector<std::size_t> pool;
            pool.reserve(n - 1);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) pool.push_back(j);
            SplitMixStream stream(seed ^ mix64(detail::link_stream_key(i)));
            for (std::size_t t = 0; t < k; ++t) {
                const auto pick = t + static_cast<std::size_t>(stream.below(pool.size() - t));
                std::swap(pool[t], pool[pick]);
                row.push_back(pool[t]);
            }
        }
    }
    return EpistasisMatrix(n, k, mode, std::move(links));
}

/// Table index of `gene` for genotype code `code`: bit 0 is the gene itself,
/// bit j its j-th epistatic gene.
inline std::uint64_t goedel_index(std::uint64_t code, std::size_t gene, const EpistasisMatrix& e)
{
    std::uint64_t index = (code >> gene) & 1U;
    const auto links = e.links(gene);
    for (std::size_t j = 0; j < links.size(); ++j)
        index |= ((code >> links[j]) & 1U) << (j + 1);
    return index;
}

inline std::uint64_t goedel_index(const Genotype& x, std::size_t gene, const EpistasisMatrix& e)
{
    if (x.size() != e.n()) throw ParameterError("genotype length does not match the model");
    return goedel_index(x.code(), gene, e);
}

/// Hash-derived table entry; identical to what a materialized model stores.
inline double generated_table_value(std::uint64_t seed, std::size_t gene, std::uint64_t entry) noexcept
{
    return unit_from_bits(mix64(seed ^ mix64(detail::table_key(gene, entry))));
}

// An NK landscape. Immutable after construction and safe to share between
// threads.
class NkModel {
public:
    NkModel(std::size_t n, std::size_t k, EpistasisMode mode, std::uint64_t seed,
            TableMode table_mode = TableMode::Materialized)
        : epistasis_(build_epistasis(n, k, mode, seed)), seed_(seed), table_mode_(table_mode)
    {
        if (table_mode_ == TableMode::Materialized) {
            if (k > 24) throw CapacityError("materialized tables limited to k <= 24; use on_the_fly");
            const auto size = epistasis_.table_size();
            tables_.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                tables_[i].resize(size);
                for (std::uint64_t j = 0; j < size; ++j) tables_[i][j] = generated_table_value(seed_, i, j);
            }
        }
    }

    // Explicit tables, for tests and hand-built examples. The seed only
    // matters for the descriptor.
    static NkModel with_tables(EpistasisMatrix epistasis, std::vector<std::vector<double>> tables,
                               std::uint64_t seed = 0)
    {
        if (tables.size() != epistasis.n()) throw ParameterError("need one table per gene");
        for (const auto& t : tables) {
            if (t.size() != epistasis.table_size()) throw ParameterError("table size must be 2^(k+1)");
            for (double v : t)
                if (!(v >= 0.0 && v < 1.0)) throw ParameterError("table values must lie in [0,1)");
        }
        return NkModel(std::move(epistasis), std::move(tables), seed);
    }

    std::size_t n() const noexcept { return epistasis_.n(); }
    std::size_t k() const noexcept { return epistasis_.k(); }
    EpistasisMode mode() const noexcept { return epistasis_.mode(); }
    std::uint64_t seed() const noexcept { return seed_; }
    TableMode table_mode() const noexcept { return table_mode_; }
    const EpistasisMatrix& epistasis() const noexcept { return epistasis_; }

    double table_value(std::size_t gene, std::uint64_t entry) const
    {
        if (gene >= n()) throw ParameterError("gene index out of range");
        if (entry >= epistasis_.table_size()) throw ParameterError("table entry out of range");
        return table_value_unchecked(gene, entry);
    }

    double table_value_unchecked(std::size_t gene, std::uint64_t entry) const noexcept
    {
        if (table_mode_ == TableMode::Materialized) return tables_[gene][entry];
        return generated_table_value(seed_, gene, entry);
    }

    /// Empty for on-the-fly models.
    const std::vector<std::vector<double>>& tables() const noexcept { return tables_; }

    double trait_value(std::size_t gene, std::uint64_t code) const noexcept
    {
        return table_value_unchecked(gene, goedel_index(code, gene, epistasis_));
    }

    double trait_value(std::size_t gene, const Genotype& x) const
    {
        if (gene >= n()) throw ParameterError("gene index out of range");
        return table_value_unchecked(gene, goedel_index(x, gene, epistasis_));
    }

    /// Writes the n trait values of genotype `code` into `out`.
    void trait_values(std::uint64_t code, std::span<double> out) const noexcept
    {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = trait_value(i, code);
    }

    double fitness(const Genotype& x) const
    {
        if (x.size() != n()) throw ParameterError("genotype length does not match the model");
        const auto code = x.code();
        double total = 0.0;
        for (std::size_t i = 0; i < n(); ++i) total += trait_value(i, code);
        return total;
    }

private:
    NkModel(EpistasisMatrix epistasis, std::vector<std::vector<double>> tables, std::uint64_t seed)
        : epistasis_(std::move(epistasis)), seed_(seed), table_mode_(TableMode::Materialized),
          tables_(std::move(tables))
    {
    }

    EpistasisMatrix epistasis_;
    std::uint64_t seed_;
    TableMode table_mode_;
    std::vector<std::vector<double>> tables_;
};

} // namespace nkcomm
