#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "synde/channelsim.hpp"
#include "synde/decoder.hpp"
#include "synde/oracle.hpp"
#include "synde/primerseek.hpp"

namespace synde {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline const QuaternaryWord& default_left_primer() {
    static const QuaternaryWord p = from_dna("CTACACGACGCTCTTCCGATCTGCA");
    return p;
}

inline const QuaternaryWord& default_right_primer() {
    static const QuaternaryWord p = from_dna("AGATCGGAAGAGCACACGTCTGAAC");
    return p;
}

struct BatchParams {
    ChannelParams channel;  // its seed is replaced per read
    MatrixKind kind = MatrixKind::CTC5;
    int k = 2;
    QuaternaryWord left_primer = default_left_primer();
    QuaternaryWord right_primer = default_right_primer();
    std::size_t flank_min = 0;
    std::size_t flank_max = 0;
    std::optional<SeekParams> seek;  // unset: crop at the true primer start
    DecodeOptions decode;
    bool run_decoder = true;
    bool run_oracle = false;
    std::size_t n_reads = 1;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct SyntheticRead {
    BitVector message;
    ReadScenario scenario;
    SimulatedRead sim;
};

/// Read `id` of a batch: random message, flanks and channel realization all
/// derive from (seed, id).
inline SyntheticRead make_read(const CodeContext& cc, const BatchParams& bp, std::size_t id) {
    std::mt19937_64 rng(mix_seed(bp.seed, id));
    SyntheticRead r;
    r.message = BitVector(cc.code.message_bits());
    for (std::size_t i = 0; i < r.message.size(); ++i)
        r.message.set(i, rng() >> 63);
    const QuaternaryWord payload = cc.code.transmit(r.message);
    auto flank = [&] {
        if (bp.flank_max <= bp.flank_min)
            return bp.flank_min;
        return bp.flank_min + static_cast<std::size_t>(rng() % (bp.flank_max - bp.flank_min + 1));
    };
    const std::size_t lf = flank();
    const std::size_t rf = flank();
    r.scenario = compose_read(payload, bp.left_primer, bp.right_primer, {lf, rf}, rng);
    ChannelParams ch = bp.channel;
    ch.seed = rng();
    r.sim = bp.kind == MatrixKind::CTC5 ? simulate_ctc_matrix(r.scenario, ch)
                                        : simulate_kmer_matrix(r.scenario, ch, bp.k);
    return r;
}

struct ReadResult {
    std::size_t read_id = 0;
    BitVector true_message;
    BitVector decoded_message;
    bool failed = true;
    double score = kNegInf;
    bool correct = false;
    std::optional<std::size_t> seek_position;
    std::size_t truth_position = 0;
    std::uint64_t beam_extensions = 0;
    std::uint64_t seek_extensions = 0;
    std::size_t columns = 0;
    std::size_t matrix_columns = 0;
    std::optional<OracleVerdict> oracle;
};

inline ReadResult run_read(const CodeContext& cc, const BatchParams& bp, std::size_t id) {
    const SyntheticRead sr = make_read(cc, bp, id);
    ReadResult out;
    out.read_id = id;
    out.true_message = sr.message;
    out.truth_position = sr.sim.embed_position;
    out.matrix_columns = sr.sim.matrix.t();
    if (bp.run_decoder) {
        DecodeResult d;
        if (bp.seek) {
            d = decode_pipeline(sr.sim.matrix, cc, bp.left_primer, bp.right_primer, bp.seek, bp.decode, kNegInf);
        } else {
            const ProbabilityMatrix m = sr.sim.embed_position == 0 ? sr.sim.matrix
                                                                   : crop_matrix(sr.sim.matrix, sr.sim.embed_position);
            d = decode(m, cc, bp.left_primer, bp.right_primer, bp.decode);
            d.seek_position = sr.sim.embed_position;
        }
        out.failed = d.failed;
        out.score = d.score;
        out.decoded_message = d.message_bits;
        out.correct = !d.failed && d.message_bits == sr.message;
        out.seek_position = d.seek_position;
        out.beam_extensions = d.beam_extensions;
        out.seek_extensions = d.seek_extensions;
        out.columns = d.columns_processed;
    }
    if (bp.run_oracle) {
        const ProbabilityMatrix m = sr.sim.embed_position == 0 ? sr.sim.matrix
                                                               : crop_matrix(sr.sim.matrix, sr.sim.embed_position);
        out.oracle = ml_decode_bruteforce(m, cc.code, bp.left_primer, bp.right_primer);
    }
    return out;
}

/// Runs reads 0..n-1 over a worker pool; results come back ordered by id.
template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn&& fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            if (failed)
                return;
            try {
                out[i] = fn(i);
            } catch (...) {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

inline std::vector<ReadResult> run_batch(const CodeContext& cc, const BatchParams& bp) {
    if (bp.n_reads < 1)
        throw std::invalid_argument("n_reads must be at least 1");
    return parallel_map(bp.n_reads, bp.threads, [&](std::size_t id) { return run_read(cc, bp, id); });
}

struct CurvePoint {
    double threshold;
    double discard_fraction;
    double fer;
    std::size_t n_remaining;
    std::size_t n_errors;
};

struct EvalCurve {
    std::vector<CurvePoint> points;
};

/// Minimal view of a decoded read for curve computation.
struct ScoredOutcome {
    bool failed;
    double score;
    bool correct;
};

inline EvalCurve fer_vs_discard(const std::vector<ScoredOutcome>& results, const std::vector<double>& thresholds) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw std::invalid_argument("thresholds must be ascending");
    EvalCurve curve;
    const double n = static_cast<double>(results.size());
    for (double thr : thresholds) {
        std::size_t kept = 0, errors = 0;
        for (const auto& r : results) {
            if (r.failed || r.score < thr)
                continue;
            ++kept;
            errors += r.correct ? 0 : 1;
        }
        const double discard = results.empty() ? 0.0 : 1.0 - static_cast<double>(kept) / n;
        const double fer = kept == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(kept);
        curve.points.push_back({thr, discard, fer, kept, errors});
    }
    return curve;
}

inline std::vector<ScoredOutcome> outcomes(const std::vector<ReadResult>& results) {
    std::vector<ScoredOutcome> v;
    v.reserve(results.size());
    for (const auto& r : results)
        v.push_back({r.failed, r.score, r.correct});
    return v;
}

/// Thresholds at the i/n quantiles (i = 0..n-1) of the finite scores.
inline std::vector<double> quantile_thresholds(const std::vector<ScoredOutcome>& results, std::size_t n_points) {
    std::vector<double> scores;
    for (const auto& r : results)
        if (!r.failed && std::isfinite(r.score))
            scores.push_back(r.score);
    std::sort(scores.begin(), scores.end());
    std::vector<double> thr;
    if (scores.empty() || n_points == 0)
        return thr;
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t idx = i * (scores.size() - 1) / std::max<std::size_t>(1, n_points - 1);
        thr.push_back(scores[idx]);
    }
    return thr;
}

inline bool discard_monotone(const EvalCurve& c) {
    for (std::size_t i = 1; i < c.points.size(); ++i)
        if (c.points[i].discard_fraction < c.points[i - 1].discard_fraction)
            return false;
    return true;
}

/// P(X >= k) for X ~ Binomial(n, p).
inline double binomial_upper_tail(std::size_t k, std::size_t n, double p) {
    if (k == 0)
        return 1.0;
    if (k > n || p <= 0.0)
        return 0.0;
    if (p >= 1.0)
        return 1.0;
    double total = 0.0;
    for (std::size_t i = k; i <= n; ++i) {
        const double lg = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                          std::lgamma(static_cast<double>(n - i) + 1);
        total += std::exp(lg + static_cast<double>(i) * std::log(p) + static_cast<double>(n - i) * std::log1p(-p));
    }
    return std::min(1.0, total);
}

/// Adjacent sweep points where FER rises by more than a one-sided binomial
/// test at level alpha allows (null: FER stays at the previous point's value).
inline std::size_t fer_increase_violations(const EvalCurve& c, double alpha) {
    std::size_t bad = 0;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const auto& a = c.points[i - 1];
        const auto& b = c.points[i];
        if (b.n_remaining == 0 || b.fer <= a.fer)
            continue;
        if (binomial_upper_tail(b.n_errors, b.n_remaining, a.fer) < alpha)
            ++bad;
    }
    return bad;
}

using PositionEstimate = std::optional<std::int64_t>;

/// (delta, fraction of pairs further apart than delta); missing estimates
/// count as disagreements.
inline std::vector<std::pair<double, double>> agreement_curve(const std::vector<PositionEstimate>& a,
                                                              const std::vector<PositionEstimate>& b,
                                                              const std::vector<double>& deltas) {
    if (a.size() != b.size())
        throw std::invalid_argument("estimate lists differ in length");
    std::vector<std::pair<double, double>> out;
    for (double delta : deltas) {
        std::size_t apart = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!a[i] || !b[i] || static_cast<double>(std::llabs(*a[i] - *b[i])) > delta)
                ++apart;
        out.emplace_back(delta, a.empty() ? 0.0 : static_cast<double>(apart) / static_cast<double>(a.size()));
    }
    return out;
}

inline bool agreement_non_increasing(const std::vector<std::pair<double, double>>& curve) {
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].first >= curve[i - 1].first && curve[i].second > curve[i - 1].second)
            return false;
    return true;
}

struct ComplexityReport {
    std::string code_id;
    std::size_t w = 0;
    double mean_beam_complexity = 0.0;
    std::size_t payload_len = 0;
    int nu = 0;
};

struct ComplexityGroup {
    std::string code_id;
    std::size_t w = 0;
    std::size_t payload_len = 0;
    int nu = 0;
    std::vector<ReadResult> results;
};

/// Beam extensions per processed matrix column, pooled over each group.
inline std::vector<ComplexityReport> complexity_report(const std::vector<ComplexityGroup>& groups) {
    std::vector<ComplexityReport> out;
    for (const auto& g : groups) {
        double ext = 0.0, cols = 0.0;
        for (const auto& r : g.results) {
            ext += static_cast<double>(r.beam_extensions);
            cols += static_cast<double>(r.columns);
        }
        out.push_back({g.code_id, g.w, cols > 0 ? ext / cols : 0.0, g.payload_len, g.nu});
    }
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace synde
