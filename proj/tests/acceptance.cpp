#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace synde;
using namespace testsupport;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool run(int id, const char* name, double limit_s, const std::function<Verdict()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = fn();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = v.pass && secs < limit_s;
    std::printf("%s criterion %d (%s): %s [%.2f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", id, name, v.detail.c_str(),
                secs, limit_s);
    std::fflush(stdout);
    return ok;
}

CodeContext context(const std::string& name) { return CodeContext(load_code_config(config_path(name))); }

std::vector<std::string> rows_of(const ParityCheckMatrix& h) {
    std::vector<std::string> out;
    for (const auto& r : h.rows)
        out.push_back(r.to_string());
    return out;
}

void collect_labels(const SyndromeTrellis& t, std::size_t level, std::size_t idx, std::string& cur,
                    std::set<std::string>& out) {
    if (level == t.n_sections()) {
        out.insert(cur);
        return;
    }
    for (const auto& e : t.out_edges(level, idx)) {
        cur.push_back(e.symbol ? '1' : '0');
        collect_labels(t, level + 1, e.to, cur, out);
        cur.pop_back();
    }
}

// 1
Verdict example_fixture() {
    const Codebook code(load_code_config(config_path("eq1.code")));
    const bool h_ok = rows_of(code.h) == eq1_rows();
    const BitVector cw = BitVector::from_string("0011111100");
    const std::string dna = to_dna(bits_to_bases(cw));
    const auto bin = path_for_codeword(build_binary_trellis(code.h), cw);
    const auto quat = path_for_codeword(to_quaternary(build_binary_trellis(code.h)), cw);
    const std::vector<std::uint32_t> bin_ref = {0, 0, 0, 100, 16, 56, 4, 29, 0, 0, 0};
    const std::vector<std::uint32_t> quat_ref = {0, 0, 16, 4, 0, 0};
    const bool ok = h_ok && dna == "ATTTA" && bin == bin_ref && quat == quat_ref;
    return {ok, fmt("H exact=%d, codeword->%s, binary path %s, quaternary path %s", h_ok, dna.c_str(),
                    bin == bin_ref ? "match" : "MISMATCH", quat == quat_ref ? "match" : "MISMATCH")};
}

// 2
Verdict trellis_duality() {
    const Codebook code(load_code_config(config_path("eq1.code")));
    const SyndromeTrellis t = build_binary_trellis(code.h);
    std::set<std::string> labels;
    std::string cur;
    collect_labels(t, 0, 0, cur, labels);
    std::set<std::string> kernel;
    for (std::uint64_t v = 0; v < 1024; ++v) {
        const std::string w = bits_string(v, 10);
        if (string_is_codeword(eq1_rows(), w))
            kernel.insert(w);
    }
    return {labels == kernel, fmt("%zu path labels, %zu kernel words of 1024", labels.size(), kernel.size())};
}

// 3
Verdict state_bound() {
    std::size_t worst_ratio_num = 0, worst_ratio_den = 1;
    bool ok = true;
    std::string bad;
    for (const auto& name : shipped_configs()) {
        const Codebook code(load_code_config(config_path(name)));
        const SyndromeTrellis bin = build_binary_trellis(code.h);
        const SyndromeTrellis q = build_code_trellis(code);
        const std::size_t bound = std::size_t{1} << (code.spec.c - code.spec.b + code.spec.nu);
        const std::size_t states = std::max(bin.max_states(), q.max_states());
        const std::size_t storage = std::max(storage_bits(bin, code.spec), storage_bits(q, code.spec));
        if (states > bound || storage > storage_bound(code.spec)) {
            ok = false;
            bad += " " + name;
        }
        if (states * worst_ratio_den > worst_ratio_num * bound) {
            worst_ratio_num = states;
            worst_ratio_den = bound;
        }
    }
    return {ok, fmt("%zu codes, max states/bound = %zu/%zu%s", shipped_configs().size(), worst_ratio_num,
                    worst_ratio_den, bad.empty() ? "" : (" violations:" + bad).c_str())};
}

// 4
Verdict noiseless_identity() {
    const CodeContext cc = context("CCM10-6.code");
    std::string detail;
    bool ok = true;
    for (MatrixKind kind : {MatrixKind::CTC5, MatrixKind::KMER}) {
        BatchParams bp;
        bp.kind = kind;
        bp.k = 2;
        bp.n_reads = 100;
        bp.seed = 4;
        bp.flank_min = 20;
        bp.flank_max = 120;
        SeekParams sp = kind == MatrixKind::CTC5 ? SeekParams::ctc_defaults() : SeekParams::kmer_defaults();
        sp.s = 1;
        sp.tau = 1.0;
        bp.seek = sp;
        std::size_t pos_ok = 0, msg_ok = 0;
        const auto res = run_batch(cc, bp);
        for (const auto& r : res) {
            if (r.seek_position &&
                std::llabs(static_cast<long long>(*r.seek_position) - static_cast<long long>(r.truth_position)) <= 1)
                ++pos_ok;
            msg_ok += r.correct ? 1 : 0;
        }
        const double fer = fer_vs_discard(outcomes(res), {kNegInf}).points[0].fer;
        ok = ok && pos_ok == res.size() && msg_ok == res.size() && fer == 0.0;
        detail += fmt("%s: position within 1 column %zu/%zu, messages %zu/%zu, FER %.3f; ",
                      kind == MatrixKind::CTC5 ? "CTC5" : "KMER k=2", pos_ok, res.size(), msg_ok, res.size(), fer);
    }
    return {ok, detail};
}

// 5
Verdict oracle_equivalence() {
    const CodeContext cc = context("eq1.code");
    BatchParams bp;
    bp.n_reads = 200;
    bp.seed = 5;
    bp.channel.noise_eps = 0.5;
    bp.channel.stride = 2;
    std::vector<std::optional<OracleVerdict>> verdicts;
    std::vector<double> agreement;
    std::size_t unique = 0;
    for (std::size_t w : {8u, 64u, 512u}) {
        bp.decode.beams = w;
        bp.run_oracle = verdicts.empty();
        const auto res = run_batch(cc, bp);
        if (verdicts.empty())
            for (const auto& r : res)
                verdicts.push_back(r.oracle);
        std::size_t agree = 0;
        unique = 0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            if (!verdicts[i]->unique)
                continue;
            ++unique;
            const BitVector oracle_msg = extract_message(verdicts[i]->best_codeword, cc.code.g);
            agree += (!res[i].failed && res[i].decoded_message == oracle_msg) ? 1 : 0;
        }
        agreement.push_back(unique ? static_cast<double>(agree) / static_cast<double>(unique) : 0.0);
    }
    const bool monotone = agreement[0] <= agreement[1] && agreement[1] <= agreement[2];
    const bool ok = unique > 0 && agreement[2] >= 0.99 && monotone;
    return {ok, fmt("agreement on %zu unique-argmax reads: w=8 %.3f, w=64 %.3f, w=512 %.3f (need >= 0.99, non-decreasing)",
                    unique, agreement[0], agreement[1], agreement[2])};
}

// 6
Verdict threshold_monotonicity() {
    constexpr double kAlpha = 0.01;
    struct Batch {
        const char* code;
        double eps;
        std::size_t beams;
    };
    bool ok = true;
    std::string detail;
    for (const Batch& b : {Batch{"CCM10-6.code", 0.22, 64}, Batch{"eq1.code", 0.5, 64}}) {
        const CodeContext cc = context(b.code);
        BatchParams bp;
        bp.n_reads = 500;
        bp.seed = 6;
        bp.channel.noise_eps = b.eps;
        bp.channel.stride = 2;
        bp.decode.beams = b.beams;
        const auto oc = outcomes(run_batch(cc, bp));
        const EvalCurve c = fer_vs_discard(oc, quantile_thresholds(oc, 20));
        const std::size_t bad = fer_increase_violations(c, kAlpha);
        const bool good = bad == 0 && discard_monotone(c) && c.points.size() == 20;
        ok = ok && good;
        detail += fmt("%s eps=%.2f: FER %.3f -> %.3f over 20 thresholds, %zu significant rises; ", cc.code.spec.identifier.c_str(),
                      b.eps, c.points.front().fer, c.points.back().fer, bad);
    }
    return {ok, detail};
}

// 7
Verdict complexity_scaling() {
    constexpr std::size_t kBeams = 64;
    auto batch = [&](const CodeContext& cc) {
        BatchParams bp;
        bp.n_reads = 40;
        bp.seed = 7;
        bp.channel.noise_eps = 0.2;
        bp.channel.stride = 2;
        bp.decode.beams = kBeams;
        return run_batch(cc, bp);
    };
    std::vector<double> per_column;
    std::string detail;
    for (const char* name : {"NU3.code", "NU6.code", "NU9.code"}) {
        const CodeContext cc = context(name);
        const auto rep = complexity_report({{cc.code.spec.identifier, kBeams, cc.code.transmit(BitVector(cc.code.message_bits())).size(),
                                             cc.code.spec.nu, batch(cc)}});
        per_column.push_back(rep[0].mean_beam_complexity);
        detail += fmt("%s %.1f ext/col; ", cc.code.spec.identifier.c_str(), rep[0].mean_beam_complexity);
    }
    const double lo = *std::min_element(per_column.begin(), per_column.end());
    const double hi = *std::max_element(per_column.begin(), per_column.end());
    std::vector<double> xs, ys;
    for (std::size_t m : {60u, 120u, 240u}) {
        const std::size_t n_bits = 2 * m;
        CodeSpec spec = zero_tail_spec(4, 3, 6, random_template(4, 6, n_bits, 70 + m), n_bits);
        spec.identifier = "M" + std::to_string(m);
        spec.scrambler_seed = 77;
        const CodeContext cc(spec);
        double ext = 0.0;
        const auto res = batch(cc);
        for (const auto& r : res)
            ext += static_cast<double>(r.beam_extensions);
        xs.push_back(static_cast<double>(m));
        ys.push_back(ext / static_cast<double>(res.size()));
    }
    const LinearFit fit = fit_line(xs, ys);
    const bool ok = hi <= 1.1 * lo && fit.r2 >= 0.99;
    detail += fmt("max/min %.3f (need <= 1.1); extensions per read vs M: %.0f, %.0f, %.0f, R^2 %.4f (need >= 0.99)",
                  hi / lo, ys[0], ys[1], ys[2], fit.r2);
    return {ok, detail};
}

// 8
Verdict subsampling_tradeoff() {
    const CodeContext cc = context("CCM10-6.code");
    BatchParams bp;
    bp.n_reads = 500;
    bp.seed = 8;
    bp.channel.noise_eps = 0.05;
    bp.flank_min = 50;
    bp.flank_max = 300;
    SeekParams fast = SeekParams::ctc_defaults();  // W=8, s=6, tau=0.98
    SeekParams full = SeekParams::ctc_defaults();
    full.s = 1;
    full.tau = 1.0;
    const auto pairs = parallel_map(bp.n_reads, 1, [&](std::size_t id) {
        const SyntheticRead r = make_read(cc, bp, id);
        return std::pair{seek(r.sim.matrix, bp.left_primer, fast), seek(r.sim.matrix, bp.left_primer, full)};
    });
    std::vector<PositionEstimate> a, b;
    std::uint64_t ext_fast = 0, ext_full = 0;
    for (const auto& [f, s] : pairs) {
        a.push_back(f.position ? PositionEstimate(static_cast<std::int64_t>(*f.position)) : std::nullopt);
        b.push_back(s.position ? PositionEstimate(static_cast<std::int64_t>(*s.position)) : std::nullopt);
        ext_fast += f.beam_extensions;
        ext_full += s.beam_extensions;
    }
    const auto curve = agreement_curve(a, b, {0.0, 10.0, 25.0, 50.0, 100.0});
    const double within = 1.0 - curve[3].second;
    const double ratio = static_cast<double>(ext_full) / static_cast<double>(std::max<std::uint64_t>(ext_fast, 1));
    const bool ok = within >= 0.95 && ratio >= 3.0 && agreement_non_increasing(curve);
    return {ok, fmt("agreement within 50 columns %.3f (need >= 0.95); extensions s=1 / s=6 = %.2f (need >= 3)", within,
                    ratio)};
}

// 9
Verdict marker_benefit() {
    auto fer_of = [](const char* name, std::size_t& errors, double& discard) {
        const CodeContext cc = context(name);
        BatchParams bp;
        bp.n_reads = 300;
        bp.seed = 9;
        bp.channel.noise_eps = 0.22;
        bp.channel.stride = 2;
        bp.decode.beams = 64;
        const auto c = fer_vs_discard(outcomes(run_batch(cc, bp)), {kNegInf});
        errors = c.points[0].n_errors;
        discard = c.points[0].discard_fraction;
        return c.points[0].fer;
    };
    std::size_t em = 0, en = 0;
    double dm = 0, dn = 0;
    const double with = fer_of("CCM9-14.code", em, dm);
    const double without = fer_of("CC9-NM.code", en, dn);
    return {with <= without, fmt("FER with markers %.3f (%zu errors, discard %.3f) vs without %.3f (%zu errors, discard %.3f)",
                                 with, em, dm, without, en, dn)};
}

// 10
Verdict codebook_properties() {
    constexpr int kInstances = 10000;
    const Codebook code(load_code_config(config_path("CCM10-6.code")));
    const std::vector<std::string> rows = rows_of(code.h);
    std::mt19937_64 rng(10);
    std::size_t fails = 0;
    for (int i = 0; i < kInstances; ++i) {
        const BitVector a = random_bits(code.message_bits(), rng);
        const BitVector b = random_bits(code.message_bits(), rng);
        const BitVector ca = encode(a, code.g), cb = encode(b, code.g);
        fails += encode(a ^ b, code.g) == (ca ^ cb) ? 0 : 1;
        fails += string_is_codeword(rows, ca.to_string()) ? 0 : 1;
        fails += extract_message(ca, code.g) == a ? 0 : 1;
        const QuaternaryWord bases = bits_to_bases(ca);
        fails += bases_to_bits(bases) == ca ? 0 : 1;
        const std::uint64_t seed = rng();
        fails += remove_offset(apply_offset(bases, seed), seed) == bases ? 0 : 1;
        const std::size_t period = 1 + rng() % 20;
        const QuaternaryWord marker = {static_cast<Symbol>(rng() % 4)};
        fails += strip_markers(insert_markers(bases, period, marker), period) == bases ? 0 : 1;
        fails += extract_message(code.receive_codeword(code.transmit(a)), code.g) == a ? 0 : 1;
    }
    return {fails == 0, fmt("%d instances x 7 properties (linearity, parity, systematic recovery, base map, offset, "
                            "markers, transmit/receive): %zu failures",
                            kInstances, fails)};
}

}  // namespace

int main() {
    int failed = 0;
    failed += !run(1, "example code fixture", 1, example_fixture);
    failed += !run(2, "trellis duality", 1, trellis_duality);
    failed += !run(3, "state bound", 10, state_bound);
    failed += !run(4, "noiseless identity", 30, noiseless_identity);
    failed += !run(5, "oracle equivalence", 300, oracle_equivalence);
    failed += !run(6, "threshold monotonicity", 300, threshold_monotonicity);
    failed += !run(7, "complexity independence from nu", 300, complexity_scaling);
    failed += !run(8, "subsampling trade-off", 300, subsampling_tradeoff);
    failed += !run(9, "marker benefit", 300, marker_benefit);
    failed += !run(10, "codebook property suites", 30, codebook_properties);
    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
