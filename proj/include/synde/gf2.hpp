#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace synde {

/// Dense GF(2) vector packed into 64-bit words; bit i lives in word i/64.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    /// Parses a string of '0'/'1' characters.
    static BitVector from_string(std::string_view s) {
        BitVector v(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                v.set(i);
            else if (s[i] != '0')
                throw std::invalid_argument("bit string may only contain 0 and 1");
        }
        return v;
    }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v = true) {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= m;
        else
            words_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    BitVector& operator^=(const BitVector& o) {
        if (o.size_ != size_)
            throw std::invalid_argument("BitVector size mismatch");
        for (std::size_t w = 0; w < words_.size(); ++w)
            words_[w] ^= o.words_[w];
        return *this;
    }
    friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

    bool any() const noexcept {
        return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
    }
    bool none() const noexcept { return !any(); }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_)
            n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    /// Inner product over GF(2).
    bool dot(const BitVector& o) const {
        if (o.size_ != size_)
            throw std::invalid_argument("BitVector size mismatch");
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w)
            acc ^= words_[w] & o.words_[w];
        return std::popcount(acc) & 1;
    }

    std::optional<std::size_t> first_set() const noexcept {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w])
                return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
        return std::nullopt;
    }
    std::optional<std::size_t> last_set() const noexcept {
        for (std::size_t w = words_.size(); w-- > 0;)
            if (words_[w])
                return w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(words_[w]));
        return std::nullopt;
    }

    std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t i = 0; i < size_; ++i)
            if (test(i))
                s[i] = '1';
        return s;
    }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    friend bool operator==(const BitVector&, const BitVector&) = default;
    friend auto operator<=>(const BitVector& a, const BitVector& b) {
        if (auto c = a.size_ <=> b.size_; c != 0)
            return c;
        return a.words_ <=> b.words_;
    }

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

struct BitVectorHash {
    std::size_t operator()(const BitVector& v) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ull ^ v.size();
        for (auto w : v.words()) {
            h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
};

/// Reduced row echelon form over GF(2). Pivots are chosen leftmost first;
/// `pivot_cols[r]` is the pivot column of output row r.
struct EchelonForm {
    std::vector<BitVector> rows;
    std::vector<std::size_t> pivot_cols;
    std::size_t rank() const noexcept { return pivot_cols.size(); }
};

inline EchelonForm reduced_echelon(std::vector<BitVector> rows, std::size_t n_cols) {
    EchelonForm out;
    std::size_t r = 0;
    for (std::size_t col = 0; col < n_cols && r < rows.size(); ++col) {
        std::size_t pivot = r;
        while (pivot < rows.size() && !rows[pivot].test(col))
            ++pivot;
        if (pivot == rows.size())
            continue;
        std::swap(rows[r], rows[pivot]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != r && rows[i].test(col))
                rows[i] ^= rows[r];
        out.pivot_cols.push_back(col);
        ++r;
    }
    rows.resize(r);
    out.rows = std::move(rows);
    return out;
}

inline std::size_t gf2_rank(const std::vector<BitVector>& rows, std::size_t n_cols) {
    return reduced_echelon(rows, n_cols).rank();
}

}  // namespace synde
