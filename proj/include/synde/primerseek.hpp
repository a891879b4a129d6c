#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "synde/channelsim.hpp"
#include "synde/codebook.hpp"
#include "synde/logmath.hpp"
#include "synde/matrix.hpp"

namespace synde {

struct SeekBeam {
    double logp = kNegInf;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::uint32_t len = 1;
    bool blank = false;
};

struct SeekParams {
    std::size_t w = 8;        // beams per bucket; 0 means unbounded
    std::size_t s = 6;        // subsampling factor
    std::size_t d = 10;       // extra subsampling depth
    std::size_t d_max = 1000; // maximum end - start
    std::size_t delta = 50;   // bucket shift and candidate separation
    double tau = 0.98;
    bool full_window = false;
    bool prune_below_best = true;

    static SeekParams ctc_defaults() { return {}; }
    static SeekParams kmer_defaults() {
        SeekParams p;
        p.w = 512;
        p.s = 1;
        p.tau = 1.0;
        return p;
    }

    void validate() const {
        if (s < 1 || d_max < 1 || delta < 1)
            throw std::invalid_argument("seek parameters s, d_max and delta must be positive");
        if (!(tau > 0.0 && tau <= 1.0))
            throw std::invalid_argument("tau must lie in (0, 1]");
    }
};

struct SeekResult {
    std::optional<std::size_t> position;
    double score = kNegInf;
    std::uint64_t beam_extensions = 0;
};

/// Diagnostics of one bucketed search.
struct BucketSearchOutcome {
    std::optional<std::size_t> position;
    double score = kNegInf;
    std::map<std::int64_t, double> phi;  // log Φ per start column
    std::size_t max_bucket_size = 0;
    std::size_t min_start_separation = SIZE_MAX;
};

/// Matrix rows visited by a target: bases map to rows 1..4 in CTC5 mode,
/// consecutive k-mers in KMER mode.
inline std::vector<std::uint32_t> target_rows(std::span<const Symbol> seq, MatrixKind kind, int k) {
    std::vector<std::uint32_t> rows;
    if (kind == MatrixKind::CTC5) {
        for (Symbol x : seq)
            rows.push_back(1u + x);
    } else {
        if (seq.size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("target shorter than k");
        for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= seq.size(); ++i)
            rows.push_back(static_cast<std::uint32_t>(kmer_row(seq, i, k)));
    }
    return rows;
}

/// Shared propagation rules over a fixed matrix and target.
class SeekContext {
public:
    SeekContext(const ProbabilityMatrix& p, std::vector<std::uint32_t> target)
        : t_(static_cast<std::int64_t>(p.t())), q_(p.q()), ctc_(p.kind() == MatrixKind::CTC5),
          lp_(p.log_values()), target_(std::move(target)) {
        if (target_.empty())
            throw std::invalid_argument("target must be nonempty");
        for (auto r : target_)
            if (r >= q_)
                throw std::invalid_argument("target row outside matrix");
    }

    std::int64_t columns() const noexcept { return t_; }
    std::uint32_t target_length() const noexcept { return static_cast<std::uint32_t>(target_.size()); }
    double lp(std::uint32_t row, std::int64_t col) const { return lp_[static_cast<std::size_t>(col) * q_ + row]; }
    std::uint64_t extensions() const noexcept { return extensions_; }
    void count(std::uint64_t n) { extensions_ += n; }

    std::uint32_t unit(std::uint32_t i) const { return target_[i]; }

    /// Appends dwell and extend children of `b` at column end+1.
    void children(const SeekBeam& b, std::size_t d_max, std::vector<SeekBeam>& out) {
        const std::int64_t col = b.end + 1;
        if (col >= t_ || static_cast<std::size_t>(col - b.start) > d_max)
            return;
        auto push = [&](std::uint32_t row, std::uint32_t len, bool blank) {
            ++extensions_;
            const double v = lp(row, col);
            if (v != kNegInf)
                out.push_back({b.logp + v, b.start, col, len, blank});
        };
        const std::uint32_t cur = target_[b.len - 1];
        const bool can_extend = b.len < target_.size();
        if (ctc_) {
            if (!b.blank)
                push(cur, b.len, false);
            push(0, b.len, true);
            if (can_extend && (target_[b.len] != cur || b.blank))
                push(target_[b.len], b.len + 1, false);
        } else {
            push(cur, b.len, false);
            if (can_extend)
                push(target_[b.len], b.len + 1, false);
        }
    }

private:
    std::int64_t t_;
    std::size_t q_;
    bool ctc_;
    std::vector<double> lp_;
    std::vector<std::uint32_t> target_;
    std::uint64_t extensions_ = 0;
};

namespace detail {

inline bool beam_order(const SeekBeam& a, const SeekBeam& b) {
    if (a.logp != b.logp)
        return a.logp > b.logp;
    if (a.start != b.start)
        return a.start < b.start;
    return a.end < b.end;
}

/// Sums beams that agree on (key_pos, len, blank); the survivor keeps the
/// start/end of the more probable member.
template <class KeyPos>
std::vector<SeekBeam> merge_beams(std::vector<SeekBeam> v, KeyPos key_pos) {
    std::sort(v.begin(), v.end(), [&](const SeekBeam& a, const SeekBeam& b) {
        const auto ka = key_pos(a), kb = key_pos(b);
        if (ka != kb)
            return ka < kb;
        if (a.len != b.len)
            return a.len < b.len;
        if (a.blank != b.blank)
            return a.blank < b.blank;
        return beam_order(a, b);
    });
    std::vector<SeekBeam> out;
    for (const auto& b : v) {
        if (!out.empty() && key_pos(out.back()) == key_pos(b) && out.back().len == b.len &&
            out.back().blank == b.blank) {
            out.back().logp = log_add(out.back().logp, b.logp);  // first member is the more probable one
        } else {
            out.push_back(b);
        }
    }
    return out;
}

inline void keep_top(std::vector<SeekBeam>& v, std::size_t w) {
    std::sort(v.begin(), v.end(), beam_order);
    if (w > 0 && v.size() > w)
        v.resize(w);
}

inline double total_logp(const std::vector<SeekBeam>& v) {
    double t = kNegInf;
    for (const auto& b : v)
        t = log_add(t, b.logp);
    return t;
}

}  // namespace detail

/// Staggered propagation of start-residue buckets so that every surviving
/// beam ends on a column congruent to d modulo s.
inline std::vector<SeekBeam> subsampling_filter(const std::vector<SeekBeam>& beams, SeekContext& ctx,
                                                std::size_t s, std::size_t d, std::size_t w,
                                                std::size_t d_max = SIZE_MAX) {
    if (beams.empty())
        return {};
    std::vector<std::vector<SeekBeam>> buckets(s);
    for (const auto& b : beams)
        buckets[static_cast<std::size_t>(b.start) % s].push_back(b);
    std::vector<SeekBeam> all;
    std::vector<SeekBeam> kids;
    for (std::size_t i = 0; i < s; ++i) {
        auto& bucket = buckets[i];
        const std::size_t steps = s - i + d;
        for (std::size_t step = 0; step < steps && !bucket.empty(); ++step) {
            kids.clear();
            for (const auto& b : bucket)
                ctx.children(b, d_max, kids);
            bucket = detail::merge_beams(kids, [](const SeekBeam& b) { return b.start; });
            detail::keep_top(bucket, w);
        }
        all.insert(all.end(), bucket.begin(), bucket.end());
    }
    auto merged = detail::merge_beams(std::move(all), [](const SeekBeam& b) { return b.end; });
    detail::keep_top(merged, w);
    return merged;
}

/// Keeps the smallest most-probable prefix holding at least tau of the mass.
inline std::vector<SeekBeam> tau_prune(std::vector<SeekBeam> beams, double tau) {
    std::sort(beams.begin(), beams.end(), detail::beam_order);
    if (tau >= 1.0 || beams.empty())
        return beams;
    const double goal = detail::total_logp(beams) + std::log(tau);
    double acc = kNegInf;
    std::size_t keep = 0;
    while (keep < beams.size()) {
        acc = log_add(acc, beams[keep].logp);
        ++keep;
        if (acc >= goal)
            break;
    }
    beams.resize(std::max<std::size_t>(keep, 1));
    return beams;
}

/// Best-first search over start-residue buckets; completed beams keep
/// dwelling and accumulate into Φ at their start column. With pruning on,
/// a beam is only propagated while it is at least as probable as the best
/// single completed beam seen so far.
inline BucketSearchOutcome primer_beam_search(const std::vector<SeekBeam>& beams, SeekContext& ctx,
                                              std::size_t w, std::size_t d_max, std::size_t delta,
                                              bool prune_below_best = true) {
    BucketSearchOutcome out;
    const std::uint32_t full = ctx.target_length();
    std::vector<std::vector<SeekBeam>> buckets(delta);
    for (const auto& b : beams)
        buckets[static_cast<std::size_t>(b.start) % delta].push_back(b);
    std::vector<double> phi(delta, kNegInf);
    std::vector<std::int64_t> first_start(delta, INT64_MAX);
    double best = kNegInf;  // most probable single completed beam
    auto note_bucket = [&](std::size_t j) {
        auto& bucket = buckets[j];
        phi[j] = detail::total_logp(bucket);
        out.max_bucket_size = std::max(out.max_bucket_size, bucket.size());
        std::vector<std::int64_t> starts;
        for (const auto& b : bucket) {
            starts.push_back(b.start);
            if (b.len == full) {
                auto [it, fresh] = out.phi.try_emplace(b.start, b.logp);
                if (!fresh)
                    it->second = log_add(it->second, b.logp);
                best = std::max(best, b.logp);
            }
        }
        std::sort(starts.begin(), starts.end());
        first_start[j] = starts.empty() ? INT64_MAX : starts.front();
        starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
        for (std::size_t i = 1; i < starts.size(); ++i)
            out.min_start_separation =
                std::min(out.min_start_separation, static_cast<std::size_t>(starts[i] - starts[i - 1]));
    };
    for (std::size_t j = 0; j < delta; ++j) {
        if (!buckets[j].empty()) {
            detail::keep_top(buckets[j], w);
            note_bucket(j);
        }
    }
    std::vector<SeekBeam> kids;
    while (true) {
        std::size_t pick = delta;
        for (std::size_t j = 0; j < delta; ++j)
            if (!buckets[j].empty() &&
                (pick == delta || phi[j] > phi[pick] || (phi[j] == phi[pick] && first_start[j] < first_start[pick])))
                pick = j;
        if (pick == delta)
            break;
        kids.clear();
        for (const auto& b : buckets[pick])
            if (!prune_below_best || b.logp >= best)
                ctx.children(b, d_max, kids);
        if (kids.empty()) {
            buckets[pick].clear();
            phi[pick] = kNegInf;
            continue;
        }
        buckets[pick] = detail::merge_beams(kids, [](const SeekBeam& b) { return b.start; });
        detail::keep_top(buckets[pick], w);
        note_bucket(pick);
    }
    for (const auto& [start, v] : out.phi) {
        if (v > out.score) {  // map order gives the lower start on ties
            out.score = v;
            out.position = static_cast<std::size_t>(start);
        }
    }
    return out;
}

/// Driver: scans candidate starts in blocks of A = min(W*delta*s, window).
inline SeekResult seek(const ProbabilityMatrix& p, std::span<const std::uint32_t> target, const SeekParams& params) {
    params.validate();
    SeekResult res;
    if (p.t() == 0)
        return res;
    SeekContext ctx(p, std::vector<std::uint32_t>(target.begin(), target.end()));
    const std::size_t window = params.full_window ? p.t() : (p.t() + 1) / 2;
    std::size_t block = window;
    if (params.w > 0)
        block = std::min(window, params.w * params.delta * params.s);
    for (std::size_t t0 = 0; t0 < window; t0 += block) {
        const std::size_t t1 = std::min(window, t0 + block);
        std::vector<SeekBeam> beams;
        for (std::size_t i = t0; i < t1; ++i) {
            const auto col = static_cast<std::int64_t>(i);
            const double v = ctx.lp(ctx.unit(0), col);
            if (v != kNegInf)
                beams.push_back({v, col, col, 1, false});
        }
        ctx.count(t1 - t0);
        if (params.s > 1) {
            const std::size_t w_sub = std::max<std::size_t>(1, beams.size() / params.s);
            beams = subsampling_filter(beams, ctx, params.s, params.d, w_sub, params.d_max);
        }
        beams = tau_prune(std::move(beams), params.tau);
        if (beams.empty())
            continue;
        const auto found = primer_beam_search(beams, ctx, params.w, params.d_max, params.delta, params.prune_below_best);
        if (found.position && found.score > res.score) {
            res.score = found.score;
            res.position = found.position;
        }
    }
    res.beam_extensions = ctx.extensions();
    return res;
}

inline SeekResult seek(const ProbabilityMatrix& p, std::span<const Symbol> primer, const SeekParams& params) {
    const auto rows = target_rows(primer, p.kind(), p.k());
    return seek(p, std::span<const std::uint32_t>(rows), params);
}

}  // namespace synde
