#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "synde/codebook.hpp"

namespace synde {

enum class Alphabet { Binary, Quaternary };

class NotACodewordError : public std::invalid_argument {
public:
    NotACodewordError(std::size_t level, const std::string& msg)
        : std::invalid_argument(msg), level_(level) {}
    std::size_t level() const noexcept { return level_; }

private:
    std::size_t level_;
};

/// Outgoing edge; `to` indexes the next level's state list.
struct TrellisEdge {
    Symbol symbol;
    std::uint32_t to;
};

/// Leveled syndrome graph. States at each level are stored as packed ids
/// in ascending order; section t holds the edges from level t to t+1 in
/// CSR form keyed by the index of the source state.
///
/// Packing: row r of an active syndrome maps to bit (base - r) of the id,
/// where base is the last row index when H has at most 32 rows and
/// otherwise the largest row index active at that level.
struct SyndromeTrellis {
    Alphabet alphabet = Alphabet::Binary;
    std::size_t row_count = 0;
    std::vector<std::vector<std::uint32_t>> states;
    std::vector<std::vector<std::uint32_t>> edge_begin;
    std::vector<std::vector<TrellisEdge>> edges;
    std::vector<bool> constant_section;
    std::vector<int> pack_base;

    std::size_t n_levels() const noexcept { return states.size(); }
    std::size_t n_sections() const noexcept { return edges.size(); }

    std::span<const TrellisEdge> out_edges(std::size_t section, std::size_t from_index) const {
        const auto& b = edge_begin[section];
        return {edges[section].data() + b[from_index], edges[section].data() + b[from_index + 1]};
    }

    std::size_t index_of(std::size_t level, std::uint32_t id) const {
        const auto& s = states[level];
        auto it = std::lower_bound(s.begin(), s.end(), id);
        if (it == s.end() || *it != id)
            throw std::out_of_range("state " + std::to_string(id) + " not at level " + std::to_string(level));
        return static_cast<std::size_t>(it - s.begin());
    }

    /// Full syndrome vector for a packed id at a level.
    BitVector unpack(std::size_t level, std::uint32_t id) const {
        BitVector v(row_count);
        for (int p = 0; p < 32; ++p)
            if ((id >> p) & 1u)
                v.set(static_cast<std::size_t>(pack_base[level] - p));
        return v;
    }

    std::size_t max_states() const {
        std::size_t m = 0;
        for (const auto& s : states)
            m = std::max(m, s.size());
        return m;
    }
};

namespace detail {

inline void finalize_level_edges(SyndromeTrellis& t, std::size_t section,
                                 std::vector<std::vector<TrellisEdge>>& per_state) {
    auto& begin = t.edge_begin[section];
    auto& out = t.edges[section];
    begin.assign(per_state.size() + 1, 0);
    out.clear();
    for (std::size_t i = 0; i < per_state.size(); ++i) {
        auto& e = per_state[i];
        std::sort(e.begin(), e.end(), [](const TrellisEdge& a, const TrellisEdge& b) { return a.symbol < b.symbol; });
        out.insert(out.end(), e.begin(), e.end());
        begin[i + 1] = static_cast<std::uint32_t>(out.size());
    }
}

}  // namespace detail

inline SyndromeTrellis build_binary_trellis(const ParityCheckMatrix& h) {
    const std::size_t m = h.rows.size();
    const std::size_t n = h.n_cols;
    std::vector<std::size_t> first(m, n), last(m, 0);
    std::vector<bool> nonzero(m, false);
    for (std::size_t r = 0; r < m; ++r) {
        if (auto f = h.rows[r].first_set()) {
            first[r] = *f;
            last[r] = *h.rows[r].last_set();
            nonzero[r] = true;
        }
    }
    std::vector<BitVector> cols;
    std::vector<BitVector> completes(n, BitVector(m));
    for (std::size_t j = 0; j < n; ++j)
        cols.push_back(h.column(j));
    for (std::size_t r = 0; r < m; ++r)
        if (nonzero[r])
            completes[last[r]].set(r);

    // forward pass over full syndromes
    struct RawEdge {
        std::uint32_t from;
        Symbol bit;
        std::uint32_t to;
    };
    std::vector<std::vector<BitVector>> level_states(n + 1);
    std::vector<std::vector<RawEdge>> raw(n);
    level_states[0].push_back(BitVector(m));
    for (std::size_t j = 0; j < n; ++j) {
        std::unordered_map<BitVector, std::uint32_t, BitVectorHash> index;
        auto& next = level_states[j + 1];
        for (std::uint32_t i = 0; i < level_states[j].size(); ++i) {
            for (Symbol x = 0; x < 2; ++x) {
                BitVector v = level_states[j][i];
                if (x)
                    v ^= cols[j];
                bool dead = false;
                for (std::size_t w = 0; w < v.words().size() && !dead; ++w)
                    dead = (v.words()[w] & completes[j].words()[w]) != 0;
                if (dead)
                    continue;
                auto [it, fresh] = index.try_emplace(v, static_cast<std::uint32_t>(next.size()));
                if (fresh)
                    next.push_back(std::move(v));
                raw[j].push_back({i, x, it->second});
            }
        }
    }

    // backward trim
    std::vector<std::vector<bool>> alive(n + 1);
    for (std::size_t t = 0; t <= n; ++t)
        alive[t].assign(level_states[t].size(), false);
    for (std::size_t i = 0; i < level_states[n].size(); ++i)
        alive[n][i] = level_states[n][i].none();
    for (std::size_t j = n; j-- > 0;)
        for (const auto& e : raw[j])
            if (alive[j + 1][e.to])
                alive[j][e.from] = true;

    SyndromeTrellis t;
    t.alphabet = Alphabet::Binary;
    t.row_count = m;
    t.states.resize(n + 1);
    t.pack_base.assign(n + 1, static_cast<int>(m) - 1);
    t.edge_begin.resize(n);
    t.edges.resize(n);
    t.constant_section.assign(n, false);

    std::vector<std::vector<std::uint32_t>> remap(n + 1);
    for (std::size_t lvl = 0; lvl <= n; ++lvl) {
        int lo = static_cast<int>(m), hi = -1;
        for (std::size_t r = 0; r < m; ++r) {
            if (nonzero[r] && first[r] + 1 <= lvl && last[r] >= lvl) {
                lo = std::min(lo, static_cast<int>(r));
                hi = std::max(hi, static_cast<int>(r));
            }
        }
        if (m > 32 && hi >= 0) {
            if (hi - lo >= 32)
                throw ConfigError("active syndrome rows at level " + std::to_string(lvl) +
                                  " span more than 32 row indices");
            t.pack_base[lvl] = hi;
        }
        const int base = t.pack_base[lvl];
        std::vector<std::pair<std::uint32_t, std::uint32_t>> ids;  // (packed, old index)
        for (std::uint32_t i = 0; i < level_states[lvl].size(); ++i) {
            if (!alive[lvl][i])
                continue;
            std::uint32_t id = 0;
            const auto& s = level_states[lvl][i];
            for (std::size_t r = 0; r < m; ++r)
                if (s.test(r))
                    id |= std::uint32_t{1} << (base - static_cast<int>(r));
            ids.emplace_back(id, i);
        }
        std::sort(ids.begin(), ids.end());
        remap[lvl].assign(level_states[lvl].size(), UINT32_MAX);
        for (std::uint32_t k = 0; k < ids.size(); ++k) {
            t.states[lvl].push_back(ids[k].first);
            remap[lvl][ids[k].second] = k;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::vector<TrellisEdge>> per_state(t.states[j].size());
        for (const auto& e : raw[j]) {
            const auto from = remap[j][e.from];
            const auto to = remap[j + 1][e.to];
            if (from != UINT32_MAX && to != UINT32_MAX)
                per_state[from].push_back({e.bit, to});
        }
        detail::finalize_level_edges(t, j, per_state);
    }
    return t;
}

/// Merges pairs of binary sections; the first bit of a pair is the high bit
/// of the quaternary symbol.
inline SyndromeTrellis to_quaternary(const SyndromeTrellis& bin) {
    if (bin.alphabet != Alphabet::Binary)
        throw std::invalid_argument("to_quaternary expects a binary trellis");
    if (bin.n_sections() % 2 != 0)
        throw std::invalid_argument("binary trellis length must be even");
    const std::size_t n = bin.n_sections() / 2;
    SyndromeTrellis q;
    q.alphabet = Alphabet::Quaternary;
    q.row_count = bin.row_count;
    q.states.resize(n + 1);
    q.pack_base.resize(n + 1);
    q.edge_begin.resize(n);
    q.edges.resize(n);
    q.constant_section.assign(n, false);
    for (std::size_t lvl = 0; lvl <= n; ++lvl) {
        q.states[lvl] = bin.states[2 * lvl];
        q.pack_base[lvl] = bin.pack_base[2 * lvl];
    }
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<std::vector<TrellisEdge>> per_state(q.states[t].size());
        for (std::size_t u = 0; u < q.states[t].size(); ++u)
            for (const auto& e1 : bin.out_edges(2 * t, u))
                for (const auto& e2 : bin.out_edges(2 * t + 1, e1.to))
                    per_state[u].push_back({static_cast<Symbol>(2 * e1.symbol + e2.symbol), e2.to});
        detail::finalize_level_edges(q, t, per_state);
    }
    return q;
}

/// Inserts constant sections after every `period` payload sections. The
/// per-position marker list is split evenly over the marker blocks.
inline SyndromeTrellis augment_with_markers(const SyndromeTrellis& q, std::size_t period,
                                            std::span<const Symbol> marker_symbols) {
    if (period == 0)
        throw std::invalid_argument("marker period must be positive");
    const std::size_t payload = q.n_sections();
    const std::size_t blocks = marker_count(payload, period);
    if (blocks == 0)
        return q;
    if (marker_symbols.empty() || marker_symbols.size() % blocks != 0)
        throw std::invalid_argument("marker symbol list does not match the number of marker blocks");
    const std::size_t mlen = marker_symbols.size() / blocks;

    SyndromeTrellis a;
    a.alphabet = q.alphabet;
    a.row_count = q.row_count;
    auto push_level = [&](std::size_t src_level) {
        a.states.push_back(q.states[src_level]);
        a.pack_base.push_back(q.pack_base[src_level]);
    };
    push_level(0);
    std::size_t marker_pos = 0;
    for (std::size_t t = 0; t < payload; ++t) {
        if (t > 0 && t % period == 0) {
            for (std::size_t k = 0; k < mlen; ++k) {
                const std::size_t n_states = q.states[t].size();
                std::vector<std::uint32_t> begin(n_states + 1);
                std::vector<TrellisEdge> e(n_states);
                for (std::uint32_t i = 0; i < n_states; ++i) {
                    begin[i + 1] = i + 1;
                    e[i] = {marker_symbols[marker_pos], i};
                }
                ++marker_pos;
                a.edge_begin.push_back(std::move(begin));
                a.edges.push_back(std::move(e));
                a.constant_section.push_back(true);
                push_level(t);
            }
        }
        a.edge_begin.push_back(q.edge_begin[t]);
        a.edges.push_back(q.edges[t]);
        a.constant_section.push_back(q.constant_section[t]);
        push_level(t + 1);
    }
    return a;
}

/// Marker-augmented quaternary trellis for a code, labels before offset.
inline SyndromeTrellis build_code_trellis(const Codebook& code) {
    SyndromeTrellis q = to_quaternary(build_binary_trellis(code.h));
    const auto& spec = code.spec;
    if (spec.marker_period == 0)
        return q;
    const std::size_t blocks = marker_count(q.n_sections(), spec.marker_period);
    QuaternaryWord markers;
    for (std::size_t i = 0; i < blocks; ++i)
        markers.insert(markers.end(), spec.marker.begin(), spec.marker.end());
    return augment_with_markers(q, spec.marker_period, markers);
}

/// State ids visited by a label sequence starting from the zero state.
inline std::vector<std::uint32_t> path_for_codeword(const SyndromeTrellis& t, std::span<const Symbol> word) {
    if (word.size() != t.n_sections())
        throw NotACodewordError(0, "word length " + std::to_string(word.size()) +
                                       " does not match trellis length " + std::to_string(t.n_sections()));
    std::vector<std::uint32_t> path{t.states[0].at(0)};
    std::size_t idx = 0;
    for (std::size_t s = 0; s < word.size(); ++s) {
        bool found = false;
        for (const auto& e : t.out_edges(s, idx)) {
            if (e.symbol == word[s]) {
                idx = e.to;
                found = true;
                break;
            }
        }
        if (!found)
            throw NotACodewordError(s, "no edge for symbol at level " + std::to_string(s) + ": not a codeword");
        path.push_back(t.states[s + 1][idx]);
    }
    return path;
}

inline std::vector<std::uint32_t> path_for_codeword(const SyndromeTrellis& t, const BitVector& bits) {
    if (t.alphabet == Alphabet::Quaternary)
        return path_for_codeword(t, bits_to_bases(bits));
    QuaternaryWord w(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        w[i] = bits.test(i) ? 1 : 0;
    return path_for_codeword(t, w);
}

/// Storage of one periodic section: 32-bit ids plus 4 adjacency bits per
/// state, summed over c binary (or ceil(c/2) quaternary) sections. The
/// worst window along the terminated trellis is reported; marker sections
/// are skipped.
inline std::size_t storage_bits(const SyndromeTrellis& t, const CodeSpec& spec) {
    const std::size_t window = t.alphabet == Alphabet::Binary ? static_cast<std::size_t>(spec.c)
                                                              : static_cast<std::size_t>(spec.c + 1) / 2;
    std::vector<std::size_t> cost;
    for (std::size_t s = 0; s < t.n_sections(); ++s)
        if (!t.constant_section[s])
            cost.push_back(t.states[s].size() * 36);
    std::size_t best = 0, run = 0;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        run += cost[i];
        if (i >= window)
            run -= cost[i - window];
        best = std::max(best, run);
    }
    return best;
}

inline std::size_t storage_bound(const CodeSpec& spec) {
    return (std::size_t{1} << (spec.c - spec.b + spec.nu)) * static_cast<std::size_t>(spec.c) * 36;
}

/// One line per edge: `level from_state symbol to_state`.
inline void write_trellis_dump(std::ostream& out, const SyndromeTrellis& t) {
    for (std::size_t s = 0; s < t.n_sections(); ++s)
        for (std::size_t u = 0; u < t.states[s].size(); ++u)
            for (const auto& e : t.out_edges(s, u)) {
                out << s << ' ' << t.states[s][u] << ' ';
                if (t.alphabet == Alphabet::Binary)
                    out << static_cast<int>(e.symbol);
                else
                    out << base_to_char(e.symbol);
                out << ' ' << t.states[s + 1][e.to] << '\n';
            }
}

}  // namespace synde
