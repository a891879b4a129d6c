#pragma once

#include <random>
#include <string>
#include <vector>

#include "synde/synde.hpp"

namespace testsupport {

inline std::string config_path(const std::string& name) { return std::string(SYNDE_CONFIG_DIR) + "/" + name; }

inline const std::vector<std::string>& shipped_configs() {
    static const std::vector<std::string> names = {
        "eq1.code",    "CCM10-7.code", "CCM10-6.code", "CCM10-5.code", "CCM9-5.code", "CCM10-4.code",
        "CCM9-14.code", "CC6-5.code",  "CC8-5.code",   "CC11-5.code",  "CC6-3.code",  "CC8-3.code",
        "CC11-3.code", "CC9-NM.code",  "NU3.code",     "NU6.code",     "NU9.code"};
    return names;
}

/// The 8x10 example parity-check matrix, written out by hand.
inline const std::vector<std::string>& eq1_rows() {
    static const std::vector<std::string> rows = {"1100000000", "0111000000", "1111110000", "0101011100",
                                                  "0000111100", "0011010100", "0000000011", "0000001101"};
    return rows;
}

/// Direct product over GF(2) of a word with the transposed string matrix.
inline std::vector<int> string_syndrome(const std::vector<std::string>& rows, const std::string& word) {
    std::vector<int> s;
    for (const auto& r : rows) {
        int acc = 0;
        for (std::size_t i = 0; i < r.size(); ++i)
            acc ^= (r[i] == '1') & (word[i] == '1');
        s.push_back(acc);
    }
    return s;
}

inline bool string_is_codeword(const std::vector<std::string>& rows, const std::string& word) {
    for (int v : string_syndrome(rows, word))
        if (v)
            return false;
    return true;
}

/// Rank over GF(2) by elimination on character rows.
inline std::size_t reference_rank(std::vector<std::string> rows) {
    std::size_t rank = 0;
    const std::size_t n = rows.empty() ? 0 : rows[0].size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][col] != '1')
            ++piv;
        if (piv == rows.size())
            continue;
        std::swap(rows[piv], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r][col] == '1')
                for (std::size_t j = 0; j < n; ++j)
                    rows[r][j] = rows[r][j] == rows[rank][j] ? '0' : '1';
        ++rank;
    }
    return rank;
}

inline std::string bits_string(std::uint64_t v, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
        if ((v >> (n - 1 - i)) & 1u)
            s[i] = '1';
    return s;
}

inline synde::BitVector random_bits(std::size_t n, std::mt19937_64& rng) {
    synde::BitVector v(n);
    for (std::size_t i = 0; i < n; ++i)
        v.set(i, rng() & 1u);
    return v;
}

/// Reference splitmix64 generator, written from its published constants.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Label-uniform CTC5 matrix: every column 1/5 on each row.
inline synde::ProbabilityMatrix uniform_ctc(std::size_t t) {
    synde::ProbabilityMatrix p(synde::MatrixKind::CTC5, 0, t);
    for (std::size_t c = 0; c < t; ++c)
        for (std::size_t r = 0; r < 5; ++r)
            p.at(r, c) = 0.2;
    return p;
}

/// Random column-stochastic matrix with strictly positive entries.
inline synde::ProbabilityMatrix random_matrix(synde::MatrixKind kind, int k, std::size_t t, std::mt19937_64& rng) {
    synde::ProbabilityMatrix p(kind, k, t);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (std::size_t c = 0; c < t; ++c) {
        double sum = 0;
        for (std::size_t r = 0; r < p.q(); ++r)
            sum += (p.at(r, c) = u(rng));
        for (std::size_t r = 0; r < p.q(); ++r)
            p.at(r, c) /= sum;
    }
    return p;
}

/// Noiseless read of primer + payload + primer, no flanks.
inline synde::SimulatedRead noiseless_read(const synde::QuaternaryWord& payload, std::uint64_t seed,
                                           int stride = 1) {
    std::mt19937_64 rng(seed);
    const auto scn = synde::compose_read(payload, synde::default_left_primer(), synde::default_right_primer(),
                                         {0, 0}, rng);
    synde::ChannelParams ch;
    ch.stride = stride;
    ch.seed = seed;
    return synde::simulate_ctc_matrix(scn, ch);
}

}  // namespace testsupport
