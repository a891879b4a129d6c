#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "synde/codebook.hpp"
#include "synde/matrix.hpp"

namespace synde {

struct ChannelParams {
    double mean_dwell = 10.0;
    int stride = 1;
    double noise_eps = 0.0;
    double blank_mass = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(mean_dwell >= 1.0))
            throw std::invalid_argument("mean_dwell must be at least 1");
        if (stride < 1)
            throw std::invalid_argument("stride must be at least 1");
        if (!(noise_eps >= 0.0 && noise_eps < 1.0))
            throw std::invalid_argument("noise_eps must lie in [0, 1)");
        if (!(blank_mass >= 0.0 && noise_eps + blank_mass < 1.0))
            throw std::invalid_argument("blank_mass must be non-negative with noise_eps + blank_mass < 1");
    }
};

struct ReadScenario {
    QuaternaryWord left_primer;
    QuaternaryWord right_primer;
    QuaternaryWord payload;
    QuaternaryWord left_flank;
    QuaternaryWord right_flank;
    QuaternaryWord truth;
    std::size_t primer_index = 0;  // truth index of the first left-primer base
};

struct SimulatedRead {
    ProbabilityMatrix matrix;
    Alignment alignment;
    std::size_t embed_position = 0;  // first column of the left primer
};

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Geometric on {1, 2, ...} with the given mean, by inversion.
inline std::size_t draw_dwell(std::mt19937_64& rng, double mean) {
    if (mean <= 1.0)
        return 1;
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    return 1 + static_cast<std::size_t>(std::floor(std::log(u) / std::log1p(-1.0 / mean)));
}

inline ReadScenario compose_read(const QuaternaryWord& payload, const QuaternaryWord& left_primer,
                                 const QuaternaryWord& right_primer, std::pair<std::size_t, std::size_t> flanks,
                                 std::mt19937_64& rng) {
    if (left_primer.empty() || right_primer.empty())
        throw std::invalid_argument("primers must be nonempty");
    ReadScenario s;
    s.left_primer = left_primer;
    s.right_primer = right_primer;
    s.payload = payload;
    s.left_flank.resize(flanks.first);
    for (auto& x : s.left_flank)
        x = static_cast<Symbol>(rng() >> 62);
    s.right_flank.resize(flanks.second);
    for (auto& x : s.right_flank)
        x = static_cast<Symbol>(rng() >> 62);
    s.primer_index = s.left_flank.size();
    for (const auto* part : {&s.left_flank, &s.left_primer, &s.payload, &s.right_primer, &s.right_flank})
        s.truth.insert(s.truth.end(), part->begin(), part->end());
    return s;
}

namespace detail {

/// Writes a column that puts `keep` on row `hot`, `extra` on row `extra_row`
/// (ignored when equal to hot), and 1-keep-extra over the remaining rows
/// with flat-Dirichlet weights.
inline void fill_column(double* col, std::size_t q, std::size_t hot, double keep, std::size_t extra_row,
                        double extra, std::mt19937_64& rng) {
    const double spread = 1.0 - keep - extra;
    double total = 0.0;
    for (std::size_t r = 0; r < q; ++r) {
        col[r] = 0.0;
        if (r == hot)
            continue;
        if (spread > 0.0) {
            col[r] = -std::log(1.0 - uniform01(rng));
            total += col[r];
        }
    }
    for (std::size_t r = 0; r < q; ++r)
        if (r != hot)
            col[r] = total > 0.0 ? spread * col[r] / total : 0.0;
    col[hot] = keep;
    if (extra_row != hot)
        col[extra_row] += extra;
    else
        col[hot] += extra;
}

/// Column count for a dwell of `d` raw samples starting at raw offset `raw`.
inline std::size_t strided_columns(std::size_t raw, std::size_t d, int stride) {
    const auto s = static_cast<std::size_t>(stride);
    return std::max<std::size_t>(1, (raw + d) / s - raw / s);
}

}  // namespace detail

/// CTC5 channel: each base dwells geometrically (in raw samples, downsampled
/// by the stride) and is followed by one blank-favoring column. The
/// alignment span of a base includes its trailing blank column.
inline SimulatedRead simulate_ctc_matrix(const ReadScenario& scn, const ChannelParams& p) {
    p.validate();
    std::mt19937_64 rng(p.seed);
    std::vector<std::size_t> cols(scn.truth.size());
    std::size_t raw = 0, total = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::size_t d = draw_dwell(rng, p.mean_dwell);
        cols[i] = detail::strided_columns(raw, d, p.stride);
        raw += d;
        total += cols[i] + 1;
    }
    SimulatedRead out{ProbabilityMatrix(MatrixKind::CTC5, 0, total), {}, 0};
    std::size_t c = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::size_t row = 1 + scn.truth[i];
        const std::size_t start = c;
        for (std::size_t j = 0; j < cols[i]; ++j, ++c)
            detail::fill_column(out.matrix.column(c), 5, row, 1.0 - p.noise_eps - p.blank_mass, 0, p.blank_mass, rng);
        detail::fill_column(out.matrix.column(c), 5, 0, 1.0 - p.noise_eps, 0, 0.0, rng);
        ++c;
        out.alignment.push_back({i, start, c - 1});
    }
    if (scn.primer_index < out.alignment.size())
        out.embed_position = out.alignment[scn.primer_index].col_start;
    return out;
}

/// Row of the k-mer starting at truth[i].
inline std::size_t kmer_row(std::span<const Symbol> truth, std::size_t i, int k) {
    std::size_t row = 0;
    for (int j = 0; j < k; ++j)
        row = (row << 2) | truth[i + static_cast<std::size_t>(j)];
    return row;
}

/// k-mer channel: every k-mer of the truth dwells geometrically; columns
/// favor its row with noise spread over all other k-mers.
inline SimulatedRead simulate_kmer_matrix(const ReadScenario& scn, const ChannelParams& p, int k) {
    p.validate();
    if (k < 1)
        throw std::invalid_argument("k must be at least 1");
    const auto uk = static_cast<std::size_t>(k);
    if (scn.truth.size() < uk)
        throw std::invalid_argument("truth shorter than k");
    std::mt19937_64 rng(p.seed);
    const std::size_t n = scn.truth.size() - uk + 1;
    std::vector<std::size_t> cols(n);
    std::size_t raw = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = draw_dwell(rng, p.mean_dwell);
        cols[i] = detail::strided_columns(raw, d, p.stride);
        raw += d;
        total += cols[i];
    }
    SimulatedRead out{ProbabilityMatrix(MatrixKind::KMER, k, total), {}, 0};
    const std::size_t q = out.matrix.q();
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = kmer_row(scn.truth, i, k);
        const std::size_t start = c;
        for (std::size_t j = 0; j < cols[i]; ++j, ++c)
            detail::fill_column(out.matrix.column(c), q, row, 1.0 - p.noise_eps, row, 0.0, rng);
        out.alignment.push_back({i, start, c - 1});
    }
    if (scn.primer_index < out.alignment.size())
        out.embed_position = out.alignment[scn.primer_index].col_start;
    return out;
}

}  // namespace synde
