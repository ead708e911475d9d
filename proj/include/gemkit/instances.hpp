#ifndef GEMKIT_INSTANCES_HPP
#define GEMKIT_INSTANCES_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gemkit/chain.hpp"
#include "gemkit/hypergraph.hpp"
#include "gemkit/io.hpp"

namespace gemkit {

/// splitmix64 stream.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept;
    double uniform() noexcept;                         // [0, 1) with 53 bits
    std::uint64_t below(std::uint64_t bound) noexcept;  // uniform on {0..bound-1}, unbiased

private:
    std::uint64_t state_;
};

struct GenSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
};

/**
 * Random n x n instance: species S1..Sn, reactions R1..Rn. For each
 * reaction in order the stream yields, in this order: the input size
 * s- ~ U{1..min(d, n-1)}, the output size s+ ~ U{1..min(d, n-s-)}, s- + s+
 * steps of a partial Fisher-Yates shuffle of the species (inputs first,
 * both sides stored in species order) and kappa = max(U[0,1), 1e-6).
 * Multiplicities are 1. Throws std::invalid_argument unless n >= 2 and
 * 1 <= d <= n.
 */
Hypergraph generate(const GenSpec& spec);

/// The "meta" block written next to a generated instance: {n, d, seed}.
Json generation_meta(const GenSpec& spec);

struct IoTables {
    std::vector<std::string> commodity_names;
    std::vector<std::string> industry_names;
    std::vector<std::vector<double>> use;   // commodity x industry
    std::vector<std::vector<double>> make;  // industry x commodity
    std::vector<std::string> special_categories;
    std::map<std::string, std::string> labels;

    /// Throws std::invalid_argument on ragged or mismatched matrices,
    /// duplicate names, negative entries or unknown special categories.
    void validate() const;
};

/// Use CSV (header: corner, industries; rows: commodity, values), Make CSV
/// (header: corner, commodities; rows: industry, values) and a sidecar JSON
/// with "special_categories" and optional "labels". Make rows and columns
/// are matched to the Use names by label.
IoTables read_io_tables(const std::filesystem::path& use_csv, const std::filesystem::path& make_csv,
                        const std::filesystem::path& sidecar_json);

struct Ingestion {
    Hypergraph hypergraph;
    std::vector<std::string> warnings;  // one per dropped arc
};

/**
 * Commodities outside the special categories become nodes (Use row order).
 * Industry j becomes an arc with source {c : use[c][j] / sum_c use[c][j] >
 * threshold} and target {c : make[j][c] / sum_c make[j][c] > threshold}
 * over non-special c (the sums run over all commodities, special ones
 * included). Special category k becomes an arc whose source holds the
 * primary product (largest non-special make entry, first on ties) of every
 * industry with make-share of k above the threshold, and whose target holds
 * the primary product of every industry with use-share of k above the
 * threshold. All kappa are 1; arcs with an empty side are dropped with a
 * warning.
 */
Ingestion ingest_io(const IoTables& tables, double threshold = 0.05);

enum class SectorLabel { SelfAmplifying, Food, Waste, NegativeNet, Unused };

std::string_view to_string(SectorLabel label) noexcept;

/**
 * Labels after the last period: SELF_AMPLIFYING for members of the final
 * core; among other nodes incident to a final active arc (or a reverse arc
 * carrying flow), FOOD if only consumed, WASTE if only produced,
 * NEGATIVE_NET if both with negative net production; UNUSED otherwise.
 * An empty chain labels everything UNUSED.
 */
std::vector<SectorLabel> classify_sectors(const Hypergraph& h, const ChainSolution& sol);

}  // namespace gemkit

#endif  // GEMKIT_INSTANCES_HPP
