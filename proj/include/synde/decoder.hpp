#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "synde/codebook.hpp"
#include "synde/logmath.hpp"
#include "synde/matrix.hpp"
#include "synde/primerseek.hpp"
#include "synde/trellis.hpp"

namespace synde {

enum class MergeRule { LogSumExp, Max };

/// What makes two beams "identical" for merging. SyndromeState follows the
/// trellis node (prefix of the more probable member survives); Prefix only
/// merges beams spelling the same payload.
enum class MergeKey { SyndromeState, Prefix };

struct DecodeOptions {
    std::size_t beams = 512;
    MergeRule merge = MergeRule::LogSumExp;
    MergeKey key = MergeKey::Prefix;
};

struct DecodeResult {
    QuaternaryWord payload_symbols;  // as transmitted: markers in, offset on
    BitVector message_bits;
    double score = kNegInf;  // logprob / columns consumed
    double logprob = kNegInf;
    bool accepted = false;
    bool failed = true;
    std::uint64_t beam_extensions = 0;
    std::size_t columns_processed = 0;
    std::size_t end_column = 0;
    std::optional<std::size_t> seek_position;
    std::uint64_t seek_extensions = 0;
};

namespace detail {

struct DecoderBeam {
    double lp;
    std::uint32_t pos;    // sequence symbols emitted so far
    std::uint32_t state;  // trellis state index at payload level pos - left_len (0 outside)
    std::uint32_t ctx;    // last base (CTC) or current k-mer
    std::uint32_t node;   // payload prefix in the arena; 0 = empty
    std::uint8_t pend;    // payload symbol to append to node, 4 = none
    bool blank;
};

struct PrefixArena {
    struct Node {
        std::uint32_t parent;
        Symbol sym;
    };
    std::vector<Node> nodes{{0, 0}};
    std::vector<std::uint32_t> table;  // open addressing on (parent, sym) for canonical prefixes
    std::size_t used = 0;

    std::uint32_t append(std::uint32_t parent, Symbol sym) {
        nodes.push_back({parent, sym});
        return static_cast<std::uint32_t>(nodes.size() - 1);
    }

    std::uint32_t canonical(std::uint32_t parent, Symbol sym) {
        if (table.empty() || 2 * (used + 1) > table.size())
            rehash(std::max<std::size_t>(1024, table.size() * 2));
        std::size_t mask = table.size() - 1;
        std::size_t h = hash(parent, sym) & mask;
        while (table[h] != 0) {
            const Node& n = nodes[table[h]];
            if (n.parent == parent && n.sym == sym)
                return table[h];
            h = (h + 1) & mask;
        }
        const auto id = append(parent, sym);
        table[h] = id;
        ++used;
        return id;
    }

    QuaternaryWord spell(std::uint32_t node) const {
        QuaternaryWord w;
        while (node != 0) {
            w.push_back(nodes[node].sym);
            node = nodes[node].parent;
        }
        std::reverse(w.begin(), w.end());
        return w;
    }

private:
    static std::size_t hash(std::uint32_t parent, Symbol sym) {
        std::uint64_t z = (std::uint64_t{parent} << 2 | sym) * 0x9E3779B97F4A7C15ull;
        return static_cast<std::size_t>(z ^ (z >> 29));
    }
    void rehash(std::size_t size) {
        std::vector<std::uint32_t> fresh(size, 0);
        for (auto id : table) {
            if (id == 0)
                continue;
            std::size_t h = hash(nodes[id].parent, nodes[id].sym) & (size - 1);
            while (fresh[h] != 0)
                h = (h + 1) & (size - 1);
            fresh[h] = id;
        }
        table.swap(fresh);
    }
};

/// Hash set over candidate beams for one column; stores candidate indices.
class MergeTable {
public:
    void reset(std::size_t expected) {
        std::size_t size = 64;
        while (size < 2 * expected)
            size <<= 1;
        if (slots_.size() != size)
            slots_.assign(size, UINT32_MAX);
        else
            std::fill(slots_.begin(), slots_.end(), UINT32_MAX);
    }

    /// Returns the index already holding an equal key, or inserts `idx`.
    template <class Eq>
    std::uint32_t find_or_insert(std::uint64_t h, std::uint32_t idx, Eq&& eq) {
        const std::size_t mask = slots_.size() - 1;
        std::size_t s = h & mask;
        while (slots_[s] != UINT32_MAX) {
            if (eq(slots_[s]))
                return slots_[s];
            s = (s + 1) & mask;
        }
        slots_[s] = idx;
        return idx;
    }

private:
    std::vector<std::uint32_t> slots_;
};

}  // namespace detail

/// Trellis-constrained beam search from the left primer, through the
/// payload trellis, to the end of the right primer. `offsets` relabels
/// payload level t by adding offsets[t] mod 4.
inline DecodeResult decode(const ProbabilityMatrix& p, const SyndromeTrellis& trellis,
                           std::span<const Symbol> left_primer, std::span<const Symbol> right_primer,
                           std::span<const Symbol> offsets, const DecodeOptions& opt = {}) {
    using detail::DecoderBeam;
    if (trellis.alphabet != Alphabet::Quaternary)
        throw std::invalid_argument("decode expects a quaternary trellis");
    if (left_primer.empty() || right_primer.empty())
        throw std::invalid_argument("primers must be nonempty");
    if (opt.beams < 1)
        throw std::invalid_argument("beam width must be at least 1");
    const std::size_t n_payload = trellis.n_sections();
    if (offsets.size() < n_payload)
        throw std::invalid_argument("offset stream shorter than payload");

    const bool ctc = p.kind() == MatrixKind::CTC5;
    const int k = ctc ? 1 : p.k();
    const auto uk = static_cast<std::uint32_t>(k);
    const std::uint32_t kmask = ctc ? 3u : static_cast<std::uint32_t>((std::uint64_t{1} << (2 * k)) - 1);
    const auto n_left = static_cast<std::uint32_t>(left_primer.size());
    const auto n_mid = static_cast<std::uint32_t>(n_payload);
    const auto total = n_left + n_mid + static_cast<std::uint32_t>(right_primer.size());
    if (!ctc && left_primer.size() < uk)
        throw std::invalid_argument("left primer shorter than k");

    DecodeResult res;
    if (p.t() == 0)
        return res;
    const std::size_t q = p.q();
    const std::vector<double> lp = p.log_values();
    auto emit = [&](std::uint32_t row, std::size_t col) { return lp[col * q + row]; };

    detail::PrefixArena arena;
    detail::MergeTable table;
    std::vector<DecoderBeam> live, cand;
    std::uint64_t extensions = 1;

    {
        std::uint32_t ctx = 0;
        for (std::uint32_t i = 0; i < uk; ++i)
            ctx = (ctx << 2) | left_primer[i];
        const double v = emit(ctc ? 1 + ctx : ctx, 0);
        if (v != kNegInf)
            live.push_back({v, uk, 0, ctx, 0, 4, false});
    }

    // Terminal beams ending at different columns are ranked with the columns
    // after them scored by a label-uniform background, log(1/q) each.
    const double background = -std::log(static_cast<double>(q));
    double best_rank = kNegInf;
    std::uint32_t best_node = 0;
    std::size_t best_col = 0;
    double best_lp = kNegInf;
    auto note_terminals = [&](std::size_t col) {
        for (const auto& b : live) {
            if (b.pos != total)
                continue;
            const double rank = b.lp + static_cast<double>(p.t() - 1 - col) * background;
            if (rank > best_rank) {
                best_rank = rank;
                best_node = b.node;
                best_col = col;
                best_lp = b.lp;
            }
        }
    };
    note_terminals(0);

    const bool by_prefix = opt.key == MergeKey::Prefix;
    std::size_t col = 1;
    for (; col < p.t() && !live.empty(); ++col) {
        cand.clear();
        table.reset(live.size() * 6);
        auto add = [&](const DecoderBeam& parent, double v, std::uint32_t pos, std::uint32_t state, std::uint32_t ctx,
                       std::uint8_t pend, bool blank) {
            ++extensions;
            if (v == kNegInf)
                return;
            const DecoderBeam c{parent.lp + v, pos, state, ctx, parent.node, pend, blank};
            std::uint64_t h = (std::uint64_t{pos} * 0x9E3779B97F4A7C15ull) ^ (std::uint64_t{state} * 0xC2B2AE3D27D4EB4Full) ^
                              (std::uint64_t{ctx} * 0x165667B19E3779F9ull) ^ (blank ? 0x27D4EB2F165667C5ull : 0);
            if (by_prefix)
                h ^= (std::uint64_t{c.node} << 3 | pend) * 0xFF51AFD7ED558CCDull;
            h ^= h >> 32;
            const auto idx = static_cast<std::uint32_t>(cand.size());
            const auto hit = table.find_or_insert(h, idx, [&](std::uint32_t o) {
                const auto& e = cand[o];
                return e.pos == c.pos && e.state == c.state && e.ctx == c.ctx && e.blank == c.blank &&
                       (!by_prefix || (e.node == c.node && e.pend == c.pend));
            });
            if (hit == idx) {
                cand.push_back(c);
                return;
            }
            auto& e = cand[hit];
            const double merged = opt.merge == MergeRule::LogSumExp ? log_add(e.lp, c.lp) : std::max(e.lp, c.lp);
            if (c.lp > e.lp) {
                e.node = c.node;
                e.pend = c.pend;
            }
            e.lp = merged;
        };
        for (const auto& b : live) {
            // dwell
            if (ctc) {
                if (!b.blank)
                    add(b, emit(1 + b.ctx, col), b.pos, b.state, b.ctx, 4, false);
                add(b, emit(0, col), b.pos, b.state, b.ctx, 4, true);
            } else {
                add(b, emit(b.ctx, col), b.pos, b.state, b.ctx, 4, false);
            }
            if (b.pos == total)
                continue;
            auto extend = [&](Symbol y, std::uint32_t next_state, std::uint8_t pend) {
                if (ctc) {
                    if (y == b.ctx && !b.blank) {
                        ++extensions;
                        return;
                    }
                    add(b, emit(1u + y, col), b.pos + 1, next_state, y, pend, false);
                } else {
                    const std::uint32_t nctx = ((b.ctx << 2) | y) & kmask;
                    add(b, emit(nctx, col), b.pos + 1, next_state, nctx, pend, false);
                }
            };
            if (b.pos < n_left) {
                extend(left_primer[b.pos], 0, 4);
            } else if (b.pos < n_left + n_mid) {
                const std::uint32_t level = b.pos - n_left;
                const Symbol off = offsets[level];
                for (const auto& e : trellis.out_edges(level, b.state)) {
                    const auto y = static_cast<Symbol>((e.symbol + off) & 3);
                    extend(y, b.pos + 1 == n_left + n_mid ? 0 : e.to, y);
                }
            } else {
                extend(right_primer[b.pos - n_left - n_mid], 0, 4);
            }
        }
        if (cand.size() > opt.beams) {
            auto better = [](const DecoderBeam& a, const DecoderBeam& b) {
                if (a.lp != b.lp)
                    return a.lp > b.lp;
                if (a.pos != b.pos)
                    return a.pos > b.pos;
                if (a.state != b.state)
                    return a.state < b.state;
                if (a.ctx != b.ctx)
                    return a.ctx < b.ctx;
                if (a.blank != b.blank)
                    return a.blank < b.blank;
                if (a.node != b.node)
                    return a.node < b.node;
                return a.pend < b.pend;
            };
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(opt.beams), cand.end(), better);
            cand.resize(opt.beams);
        }
        live.swap(cand);
        for (auto& b : live) {
            if (b.pend != 4) {
                b.node = by_prefix ? arena.canonical(b.node, b.pend) : arena.append(b.node, b.pend);
                b.pend = 4;
            }
        }
        note_terminals(col);
    }

    res.beam_extensions = extensions;
    res.columns_processed = col;
    if (best_rank == kNegInf)
        return res;
    res.failed = false;
    res.score = best_lp / static_cast<double>(best_col + 1);
    res.logprob = best_lp;
    res.end_column = best_col;
    res.payload_symbols = arena.spell(best_node);
    return res;
}

inline DecodeResult decode(const ProbabilityMatrix& p, const SyndromeTrellis& trellis,
                           std::span<const Symbol> left_primer, std::span<const Symbol> right_primer,
                           std::size_t w, std::uint64_t offset_seed) {
    DecodeOptions opt;
    opt.beams = w;
    return decode(p, trellis, left_primer, right_primer, offset_sequence(offset_seed, trellis.n_sections()), opt);
}

inline DecodeResult& accept(DecodeResult& r, double threshold) {
    r.accepted = !r.failed && r.score >= threshold;
    return r;
}

/// A code with its decoding trellis, built once and shared read-only.
struct CodeContext {
    Codebook code;
    SyndromeTrellis trellis;
    QuaternaryWord offsets;

    explicit CodeContext(CodeSpec spec)
        : code(std::move(spec)), trellis(build_code_trellis(code)), offsets(code.offsets()) {}
};

/// Decode plus message recovery through the code.
inline DecodeResult decode(const ProbabilityMatrix& p, const CodeContext& cc, std::span<const Symbol> left_primer,
                           std::span<const Symbol> right_primer, const DecodeOptions& opt = {}) {
    DecodeResult r = decode(p, cc.trellis, left_primer, right_primer, cc.offsets, opt);
    if (r.failed)
        return r;
    const BitVector cw = cc.code.receive_codeword(r.payload_symbols);
    if (!is_codeword(cw, cc.code.h))
        throw std::logic_error("decoder produced a non-codeword");
    r.message_bits = extract_message(cw, cc.code.g);
    return r;
}

/// seek -> crop -> decode -> accept. Without seek parameters the matrix is
/// decoded as given.
inline DecodeResult decode_pipeline(const ProbabilityMatrix& p, const CodeContext& cc,
                                    std::span<const Symbol> left_primer, std::span<const Symbol> right_primer,
                                    const std::optional<SeekParams>& seek_params, const DecodeOptions& opt,
                                    double threshold) {
    DecodeResult r;
    std::size_t pos = 0;
    std::uint64_t seek_ext = 0;
    if (seek_params) {
        const SeekResult s = seek(p, left_primer, *seek_params);
        seek_ext = s.beam_extensions;
        if (!s.position) {
            r.seek_extensions = seek_ext;
            return r;
        }
        pos = *s.position;
    }
    r = pos == 0 ? decode(p, cc, left_primer, right_primer, opt)
                 : decode(crop_matrix(p, pos), cc, left_primer, right_primer, opt);
    r.seek_position = pos;
    r.seek_extensions = seek_ext;
    accept(r, threshold);
    return r;
}

}  // namespace synde
