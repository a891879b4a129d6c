#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "synde/gf2.hpp"

namespace synde {

using Symbol = std::uint8_t;  // A=0, C=1, G=2, T=3
using QuaternaryWord = std::vector<Symbol>;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Symbol base_from_char(char ch) {
    switch (ch) {
        case 'A': case 'a': return 0;
        case 'C': case 'c': return 1;
        case 'G': case 'g': return 2;
        case 'T': case 't': return 3;
        default: throw std::invalid_argument(std::string("not a DNA base: ") + ch);
    }
}

inline char base_to_char(Symbol s) { return "ACGT"[s & 3]; }

inline QuaternaryWord from_dna(std::string_view dna) {
    QuaternaryWord w;
    w.reserve(dna.size());
    for (char ch : dna)
        w.push_back(base_from_char(ch));
    return w;
}

inline std::string to_dna(std::span<const Symbol> w) {
    std::string s;
    s.reserve(w.size());
    for (Symbol x : w)
        s.push_back(base_to_char(x));
    return s;
}

/// One row of the parity-check description, placed at column `offset`.
struct RowTemplate {
    std::size_t offset = 0;
    BitVector bits;
};

struct CodeSpec {
    int c = 0;
    int b = 0;
    int nu = 0;
    std::size_t n_bits = 0;
    std::vector<RowTemplate> template_rows;
    std::vector<RowTemplate> head_rows;
    std::vector<RowTemplate> tail_rows;
    std::size_t marker_period = 0;  // 0 disables markers
    QuaternaryWord marker{0};
    std::uint64_t scrambler_seed = 0;
    std::string identifier;
    bool reconstructed = false;

    void validate() const {
        if (c <= 0 || b < 0 || b >= c)
            throw ConfigError("code '" + identifier + "': need 0 <= b < c");
        if (nu < 0)
            throw ConfigError("code '" + identifier + "': nu must be non-negative");
        if (c - b + nu > 32)
            throw ConfigError("code '" + identifier + "': c-b+nu exceeds 32-bit state ids");
        if (n_bits == 0 || n_bits % 2 != 0)
            throw ConfigError("code '" + identifier + "': n_bits must be positive and even");
        if (marker_period > 0 && marker.empty())
            throw ConfigError("code '" + identifier + "': marker period set without marker symbols");
        std::size_t template_len = 0;
        for (const auto& r : template_rows) {
            if (r.bits.empty())
                throw ConfigError("code '" + identifier + "': empty template row");
            if (template_len != 0 && r.bits.size() != template_len)
                throw ConfigError("code '" + identifier + "': template rows differ in length");
            template_len = r.bits.size();
            if (r.offset + r.bits.size() > n_bits)
                throw ConfigError("code '" + identifier + "': template row longer than n_bits");
        }
        for (const auto* rows : {&head_rows, &tail_rows})
            for (const auto& r : *rows)
                if (r.bits.empty() || r.offset + r.bits.size() > n_bits)
                    throw ConfigError("code '" + identifier + "': boundary row exceeds n_bits");
    }

    std::size_t codeword_symbols() const noexcept { return n_bits / 2; }

    std::size_t payload_symbols() const noexcept {
        const std::size_t len = codeword_symbols();
        if (marker_period == 0 || len == 0)
            return len;
        return len + ((len - 1) / marker_period) * marker.size();
    }
};

struct ParityCheckMatrix {
    std::vector<BitVector> rows;
    std::size_t n_cols = 0;

    /// Column i as a vector over the rows.
    BitVector column(std::size_t i) const {
        BitVector col(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (rows[r].test(i))
                col.set(r);
        return col;
    }

    std::size_t rank() const { return gf2_rank(rows, n_cols); }
    std::size_t kernel_dimension() const { return n_cols - rank(); }
};

inline ParityCheckMatrix build_parity_check(const CodeSpec& spec) {
    spec.validate();
    ParityCheckMatrix h;
    h.n_cols = spec.n_bits;
    auto place = [&](const RowTemplate& t, std::size_t shift) {
        BitVector row(spec.n_bits);
        for (std::size_t i = 0; i < t.bits.size(); ++i)
            if (t.bits.test(i))
                row.set(t.offset + shift + i);
        h.rows.push_back(std::move(row));
    };
    for (const auto& r : spec.head_rows)
        place(r, 0);
    const auto step = static_cast<std::size_t>(spec.c);
    for (std::size_t shift = 0;; shift += step) {
        bool placed = false;
        for (const auto& r : spec.template_rows) {
            if (r.offset + shift + r.bits.size() <= spec.n_bits) {
                place(r, shift);
                placed = true;
            }
        }
        if (!placed)
            break;
    }
    for (const auto& r : spec.tail_rows)
        place(r, 0);
    return h;
}

inline BitVector syndrome(const BitVector& word, const ParityCheckMatrix& h) {
    if (word.size() != h.n_cols)
        throw std::invalid_argument("word length does not match parity-check width");
    BitVector s(h.rows.size());
    for (std::size_t r = 0; r < h.rows.size(); ++r)
        if (h.rows[r].dot(word))
            s.set(r);
    return s;
}

inline bool is_codeword(const BitVector& word, const ParityCheckMatrix& h) {
    return syndrome(word, h).none();
}

/// Kernel basis of H^T. Basis row i is the unique codeword that is 1 at
/// info_positions[i] and 0 at every other information position, so
/// encoding is systematic on info_positions.
struct GeneratorBasis {
    std::vector<BitVector> rows;
    std::vector<std::size_t> info_positions;
    std::size_t n_cols = 0;
    std::size_t dimension() const noexcept { return rows.size(); }
};

inline GeneratorBasis derive_generator(const ParityCheckMatrix& h) {
    const EchelonForm e = reduced_echelon(h.rows, h.n_cols);
    GeneratorBasis g;
    g.n_cols = h.n_cols;
    std::vector<bool> is_pivot(h.n_cols, false);
    for (auto p : e.pivot_cols)
        is_pivot[p] = true;
    for (std::size_t f = 0; f < h.n_cols; ++f) {
        if (is_pivot[f])
            continue;
        BitVector v(h.n_cols);
        v.set(f);
        for (std::size_t r = 0; r < e.rows.size(); ++r)
            if (e.rows[r].test(f))
                v.set(e.pivot_cols[r]);
        g.rows.push_back(std::move(v));
        g.info_positions.push_back(f);
    }
    return g;
}

inline BitVector encode(const BitVector& message, const GeneratorBasis& g) {
    if (message.size() != g.dimension())
        throw std::invalid_argument("message length " + std::to_string(message.size()) +
                                    " does not match code dimension " + std::to_string(g.dimension()));
    BitVector cw(g.n_cols);
    for (std::size_t i = 0; i < message.size(); ++i)
        if (message.test(i))
            cw ^= g.rows[i];
    return cw;
}

/// Inverse of encode for codewords: reads the information positions.
inline BitVector extract_message(const BitVector& codeword, const GeneratorBasis& g) {
    if (codeword.size() != g.n_cols)
        throw std::invalid_argument("codeword length mismatch");
    BitVector m(g.dimension());
    for (std::size_t i = 0; i < g.info_positions.size(); ++i)
        if (codeword.test(g.info_positions[i]))
            m.set(i);
    return m;
}

inline QuaternaryWord bits_to_bases(const BitVector& bits) {
    if (bits.size() % 2 != 0)
        throw std::invalid_argument("bit string length must be even");
    QuaternaryWord w(bits.size() / 2);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = static_cast<Symbol>((bits.test(2 * i) ? 2 : 0) | (bits.test(2 * i + 1) ? 1 : 0));
    return w;
}

inline BitVector bases_to_bits(std::span<const Symbol> w) {
    BitVector bits(2 * w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > 3)
            throw std::invalid_argument("quaternary symbol out of range");
        bits.set(2 * i, (w[i] >> 1) & 1);
        bits.set(2 * i + 1, w[i] & 1);
    }
    return bits;
}

/// Scrambler: splitmix64 (state += 0x9E3779B97F4A7C15, then the standard
/// xor-shift-multiply finalizer); each position takes the top two bits.
class OffsetStream {
public:
    explicit OffsetStream(std::uint64_t seed) : state_(seed) {}
    Symbol next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return static_cast<Symbol>(z >> 62);
    }

private:
    std::uint64_t state_;
};

inline QuaternaryWord offset_sequence(std::uint64_t seed, std::size_t n) {
    OffsetStream s(seed);
    QuaternaryWord out(n);
    for (auto& x : out)
        x = s.next();
    return out;
}

inline QuaternaryWord apply_offset(std::span<const Symbol> w, std::span<const Symbol> offsets) {
    if (offsets.size() < w.size())
        throw std::invalid_argument("offset stream shorter than word");
    QuaternaryWord out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = static_cast<Symbol>((w[i] + offsets[i]) & 3);
    return out;
}

inline QuaternaryWord remove_offset(std::span<const Symbol> w, std::span<const Symbol> offsets) {
    if (offsets.size() < w.size())
        throw std::invalid_argument("offset stream shorter than word");
    QuaternaryWord out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = static_cast<Symbol>((w[i] + 4 - offsets[i]) & 3);
    return out;
}

inline QuaternaryWord apply_offset(std::span<const Symbol> w, std::uint64_t seed) {
    return apply_offset(w, offset_sequence(seed, w.size()));
}

inline QuaternaryWord remove_offset(std::span<const Symbol> w, std::uint64_t seed) {
    return remove_offset(w, offset_sequence(seed, w.size()));
}

/// Number of marker blocks placed inside a word of `len` symbols.
inline std::size_t marker_count(std::size_t len, std::size_t period) {
    return len == 0 ? 0 : (len - 1) / period;
}

inline QuaternaryWord insert_markers(std::span<const Symbol> w, std::size_t period,
                                     std::span<const Symbol> marker) {
    if (period == 0)
        throw std::invalid_argument("marker period must be positive");
    QuaternaryWord out;
    out.reserve(w.size() + marker_count(w.size(), period) * marker.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0 && i % period == 0)
            out.insert(out.end(), marker.begin(), marker.end());
        out.push_back(w[i]);
    }
    return out;
}

inline QuaternaryWord insert_markers(std::span<const Symbol> w, std::size_t period, Symbol marker) {
    const Symbol m[1] = {marker};
    return insert_markers(w, period, m);
}

/// Removes marker positions; the marker content itself is not checked.
inline QuaternaryWord strip_markers(std::span<const Symbol> w, std::size_t period,
                                    std::size_t marker_len = 1) {
    if (period == 0)
        throw std::invalid_argument("marker period must be positive");
    QuaternaryWord out;
    out.reserve(w.size());
    const std::size_t block = period + marker_len;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (i % block < period)
            out.push_back(w[i]);
    return out;
}

/// Everything derived from a CodeSpec that encoding and decoding need.
struct Codebook {
    CodeSpec spec;
    ParityCheckMatrix h;
    GeneratorBasis g;

    explicit Codebook(CodeSpec s) : spec(std::move(s)), h(build_parity_check(spec)), g(derive_generator(h)) {}

    std::size_t message_bits() const noexcept { return g.dimension(); }

    double rate() const {
        return static_cast<double>(message_bits()) / (2.0 * static_cast<double>(spec.payload_symbols()));
    }

    QuaternaryWord offsets() const { return offset_sequence(spec.scrambler_seed, spec.payload_symbols()); }

    /// message -> codeword -> bases -> markers -> offset
    QuaternaryWord transmit(const BitVector& message) const {
        QuaternaryWord w = bits_to_bases(encode(message, g));
        if (spec.marker_period > 0)
            w = insert_markers(w, spec.marker_period, spec.marker);
        return apply_offset(w, offsets());
    }

    /// Undoes transmit up to the codeword; throws if the length is wrong.
    BitVector receive_codeword(std::span<const Symbol> payload) const {
        if (payload.size() != spec.payload_symbols())
            throw std::invalid_argument("payload length does not match code");
        QuaternaryWord w = remove_offset(payload, offsets());
        if (spec.marker_period > 0)
            w = strip_markers(w, spec.marker_period, spec.marker.size());
        return bases_to_bits(w);
    }
};

/// Hex rendering of a bit string, MSB first within each nibble; the last
/// nibble is zero-padded on its low side.
inline std::string bits_to_hex(const BitVector& bits) {
    std::string s;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned v = 0;
        for (std::size_t j = 0; j < 4; ++j)
            v = (v << 1) | ((i + j < bits.size() && bits.test(i + j)) ? 1u : 0u);
        s.push_back("0123456789abcdef"[v]);
    }
    return s;
}

inline BitVector hex_to_bits(std::string_view hex, std::size_t n_bits) {
    if (hex.size() != (n_bits + 3) / 4)
        throw std::invalid_argument("hex message must have " + std::to_string((n_bits + 3) / 4) + " digits");
    BitVector bits(n_bits);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const char ch = hex[i];
        unsigned v;
        if (ch >= '0' && ch <= '9')
            v = static_cast<unsigned>(ch - '0');
        else if (ch >= 'a' && ch <= 'f')
            v = static_cast<unsigned>(ch - 'a' + 10);
        else if (ch >= 'A' && ch <= 'F')
            v = static_cast<unsigned>(ch - 'A' + 10);
        else
            throw std::invalid_argument("invalid hex digit");
        for (std::size_t j = 0; j < 4; ++j) {
            const bool bit = (v >> (3 - j)) & 1u;
            if (4 * i + j < n_bits)
                bits.set(4 * i + j, bit);
            else if (bit)
                throw std::invalid_argument("hex message has bits beyond message length");
        }
    }
    return bits;
}

}  // namespace synde
