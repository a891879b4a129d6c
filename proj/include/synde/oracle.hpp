#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "synde/codebook.hpp"
#include "synde/logmath.hpp"
#include "synde/matrix.hpp"

namespace synde {

inline constexpr std::size_t kEnumerationLimit = 20;
inline constexpr double kUniqueMargin = 1e-6;

struct OracleVerdict {
    QuaternaryWord best_word;  // transmitted payload (markers in, offset on)
    BitVector best_codeword;
    double best_logprob = kNegInf;
    double margin = 0.0;
    bool unique = false;
};

/// All codewords, in Gray-code order of the message.
inline std::vector<BitVector> enumerate_codewords(const ParityCheckMatrix& h) {
    const GeneratorBasis g = derive_generator(h);
    if (g.dimension() > kEnumerationLimit)
        throw std::length_error("kernel dimension " + std::to_string(g.dimension()) + " exceeds enumeration limit");
    std::vector<BitVector> out;
    BitVector cw(h.n_cols);
    out.push_back(cw);
    const std::uint64_t count = std::uint64_t{1} << g.dimension();
    for (std::uint64_t i = 1; i < count; ++i) {
        cw ^= g.rows[static_cast<std::size_t>(std::countr_zero(i))];
        out.push_back(cw);
    }
    return out;
}

/// log P(seq | p) summed over all CTC alignments (leading, trailing and
/// separating blanks allowed; repeats need a blank between them).
inline double ctc_forward_logprob(const ProbabilityMatrix& p, std::span<const Symbol> seq) {
    if (p.kind() != MatrixKind::CTC5)
        throw std::invalid_argument("CTC forward needs a CTC5 matrix");
    const std::size_t t = p.t();
    if (t == 0)
        return seq.empty() ? 0.0 : kNegInf;
    const std::size_t s = 2 * seq.size() + 1;
    auto label = [&](std::size_t i) -> std::size_t { return i % 2 == 0 ? 0 : 1 + seq[i / 2]; };
    const std::vector<double> lp = p.log_values();
    std::vector<double> a(s, kNegInf), b(s, kNegInf);
    a[0] = lp[0];
    if (s > 1)
        a[1] = lp[label(1)];
    for (std::size_t c = 1; c < t; ++c) {
        const double* col = lp.data() + c * 5;
        for (std::size_t i = 0; i < s; ++i) {
            double v = a[i];
            if (i >= 1)
                v = log_add(v, a[i - 1]);
            if (i >= 2 && i % 2 == 1 && label(i) != label(i - 2))
                v = log_add(v, a[i - 2]);
            b[i] = v == kNegInf ? kNegInf : v + col[label(i)];
        }
        a.swap(b);
    }
    return s > 1 ? log_add(a[s - 1], a[s - 2]) : a[0];
}

/// Scores every codeword wrapped in its primers and returns the argmax.
inline OracleVerdict ml_decode_bruteforce(const ProbabilityMatrix& p, const Codebook& code,
                                          std::span<const Symbol> left_primer, std::span<const Symbol> right_primer) {
    OracleVerdict v;
    double second = kNegInf;
    QuaternaryWord seq(left_primer.begin(), left_primer.end());
    const std::size_t head = seq.size();
    for (const BitVector& cw : enumerate_codewords(code.h)) {
        QuaternaryWord w = bits_to_bases(cw);
        if (code.spec.marker_period > 0)
            w = insert_markers(w, code.spec.marker_period, code.spec.marker);
        w = apply_offset(w, code.offsets());
        seq.resize(head);
        seq.insert(seq.end(), w.begin(), w.end());
        seq.insert(seq.end(), right_primer.begin(), right_primer.end());
        const double score = ctc_forward_logprob(p, seq);
        if (v.best_word.empty() || score > v.best_logprob) {
            second = v.best_word.empty() ? kNegInf : v.best_logprob;
            v.best_logprob = score;
            v.best_word = std::move(w);
            v.best_codeword = cw;
        } else if (score > second) {
            second = score;
        }
    }
    v.margin = v.best_logprob - second;
    if (v.best_logprob == kNegInf)
        v.margin = 0.0;
    v.unique = v.margin > kUniqueMargin;
    return v;
}

}  // namespace synde
