#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "synde/synde.hpp"

namespace fs = std::filesystem;
using namespace synde;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out_dir;
};

/// TSV sink: stdout, or <out-dir>/<name>.tsv when --out-dir is given.
class Sink {
public:
    Sink(const Globals& g, const std::string& name) {
        if (!g.out_dir.empty()) {
            fs::create_directories(g.out_dir);
            file_ = std::make_unique<std::ofstream>(fs::path(g.out_dir) / (name + ".tsv"));
            if (!*file_)
                throw std::runtime_error("cannot write " + (fs::path(g.out_dir) / (name + ".tsv")).string());
        }
    }
    std::ostream& out() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string fmt(double v) {
    if (v == kNegInf)
        return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string read_id_of(const std::string& path) { return fs::path(path).stem().string(); }

QuaternaryWord primer_or_default(const std::string& dna, QuaternaryWord fallback) {
    return dna.empty() ? fallback : from_dna(dna);
}

struct SeekFlags {
    std::string mode = "ctc";
    int k = 2;
    std::optional<std::size_t> beams, subsample;
    std::optional<double> tau;
    std::size_t delta = 50;
    std::size_t dmax = 1000;
    std::string window = "first-half";

    void add(CLI::App* app) {
        app->add_option("--mode", mode, "matrix kind")->check(CLI::IsMember({"ctc", "kmer"}));
        app->add_option("--k", k, "k-mer length for kmer mode")->check(CLI::Range(1, 8));
        app->add_option("--seek-beams", beams, "PrimerSeeker beams per bucket");
        app->add_option("--subsample", subsample, "subsampling factor s");
        app->add_option("--tau", tau, "concentration threshold");
        app->add_option("--delta", delta, "bucket shift");
        app->add_option("--dmax", dmax, "maximum primer span in columns");
        app->add_option("--window", window, "candidate start window")->check(CLI::IsMember({"first-half", "full"}));
    }

    SeekParams params() const {
        SeekParams p = mode == "kmer" ? SeekParams::kmer_defaults() : SeekParams::ctc_defaults();
        if (beams)
            p.w = *beams;
        if (subsample)
            p.s = *subsample;
        if (tau)
            p.tau = *tau;
        p.delta = delta;
        p.d_max = dmax;
        p.full_window = window == "full";
        p.validate();
        return p;
    }

    void check_matrix(const ProbabilityMatrix& m, const std::string& path) const {
        const MatrixKind want = mode == "kmer" ? MatrixKind::KMER : MatrixKind::CTC5;
        if (m.kind() != want || (want == MatrixKind::KMER && m.k() != k))
            throw std::runtime_error(path + ": matrix kind does not match --mode/--k");
    }
};

struct ChannelFlags {
    std::string mode = "ctc";
    int k = 2;
    double noise = 0.0;
    double blank_mass = 0.0;
    double dwell = 10.0;
    int stride = 1;
    std::size_t flank_min = 0;
    std::size_t flank_max = 0;

    void add(CLI::App* app) {
        app->add_option("--mode", mode, "matrix kind")->check(CLI::IsMember({"ctc", "kmer"}));
        app->add_option("--k", k, "k-mer length for kmer mode")->check(CLI::Range(1, 8));
        app->add_option("--noise", noise, "probability mass moved off the true row")->check(CLI::Range(0.0, 1.0));
        app->add_option("--blank-mass", blank_mass, "blank mass inside base columns")->check(CLI::Range(0.0, 1.0));
        app->add_option("--dwell", dwell, "mean dwell in raw samples")->check(CLI::PositiveNumber);
        app->add_option("--stride", stride, "raw samples per matrix column")->check(CLI::PositiveNumber);
        app->add_option("--flank-min", flank_min, "minimum random flank length");
        app->add_option("--flank-max", flank_max, "maximum random flank length");
    }

    void apply(BatchParams& bp) const {
        bp.kind = mode == "kmer" ? MatrixKind::KMER : MatrixKind::CTC5;
        bp.k = k;
        bp.channel.noise_eps = noise;
        bp.channel.blank_mass = blank_mass;
        bp.channel.mean_dwell = dwell;
        bp.channel.stride = stride;
        bp.channel.validate();
        bp.flank_min = flank_min;
        bp.flank_max = std::max(flank_min, flank_max);
    }
};

DecodeOptions decode_options(std::size_t beams, const std::string& merge, const std::string& key) {
    DecodeOptions o;
    o.beams = beams;
    o.merge = merge == "max" ? MergeRule::Max : MergeRule::LogSumExp;
    o.key = key == "state" ? MergeKey::SyndromeState : MergeKey::Prefix;
    return o;
}

void add_decoder_flags(CLI::App* app, std::size_t& beams, std::string& merge, std::string& key) {
    app->add_option("--beams", beams, "beams kept per column")->check(CLI::PositiveNumber);
    app->add_option("--merge", merge, "merge rule for identical beams")->check(CLI::IsMember({"lse", "max"}));
    app->add_option("--merge-key", key, "beam identity")->check(CLI::IsMember({"prefix", "state"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trellis-constrained decoding of DNA storage reads"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "base seed");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "write PMAT/ALN files for a seeded batch of reads");
    std::string sim_code;
    std::size_t sim_n = 10;
    ChannelFlags sim_ch;
    std::string sim_lp, sim_rp;
    sim->add_option("--code", sim_code, "code config")->required()->check(CLI::ExistingFile);
    sim->add_option("--n", sim_n, "number of reads")->check(CLI::PositiveNumber);
    sim->add_option("--left-primer", sim_lp, "left primer DNA");
    sim->add_option("--right-primer", sim_rp, "right primer DNA");
    sim_ch.add(sim);

    // seek
    auto* sk = app.add_subcommand("seek", "locate a target sequence in probability matrices");
    std::vector<std::string> sk_mats;
    std::string sk_target;
    SeekFlags sk_flags;
    std::size_t sk_beams = 0;
    sk->add_option("--matrix", sk_mats, "PMAT files")->required()->check(CLI::ExistingFile);
    sk->add_option("--target", sk_target, "target DNA")->required();
    sk->add_option("--beams", sk_beams, "beams per bucket (default: per mode)");
    sk_flags.add(sk);

    // decode / oracle share flags
    struct DecodeCmd {
        std::vector<std::string> mats;
        std::string code, lp, rp;
        std::size_t beams = 512;
        double threshold = kNegInf;
        bool seek = false;
        std::string merge = "lse", key = "prefix";
        SeekFlags sf;
    };
    DecodeCmd dc, oc;
    auto add_decode_cmd = [&](CLI::App* c, DecodeCmd& d) {
        c->add_option("--matrix", d.mats, "PMAT files")->required()->check(CLI::ExistingFile);
        c->add_option("--code", d.code, "code config")->required()->check(CLI::ExistingFile);
        c->add_option("--left-primer", d.lp, "left primer DNA");
        c->add_option("--right-primer", d.rp, "right primer DNA");
        c->add_option("--threshold", d.threshold, "acceptance threshold on the normalized score");
        c->add_flag("--seek", d.seek, "locate the left primer first and crop there");
        add_decoder_flags(c, d.beams, d.merge, d.key);
        d.sf.add(c);
    };
    auto* dec = app.add_subcommand("decode", "decode matrices with the trellis-constrained beam search");
    add_decode_cmd(dec, dc);
    auto* orc = app.add_subcommand("oracle", "brute-force maximum-likelihood decoding (small codes)");
    add_decode_cmd(orc, oc);

    // eval
    auto* ev = app.add_subcommand("eval", "FER versus discarded reads over a threshold sweep");
    std::string ev_code, ev_decoded, ev_truth;
    std::size_t ev_n = 500, ev_points = 20, ev_beams = 512;
    std::string ev_merge = "lse", ev_key = "prefix";
    double ev_alpha = 0.01;
    bool ev_seek = false;
    ChannelFlags ev_ch;
    ev->add_option("--code", ev_code, "code config (simulated batch)")->check(CLI::ExistingFile);
    ev->add_option("--decoded", ev_decoded, "decode TSV to evaluate instead of simulating")->check(CLI::ExistingFile);
    ev->add_option("--truth", ev_truth, "truth TSV written by simulate")->check(CLI::ExistingFile);
    ev->add_option("--n", ev_n, "reads in the simulated batch")->check(CLI::PositiveNumber);
    ev->add_option("--points", ev_points, "thresholds in the sweep")->check(CLI::PositiveNumber);
    ev->add_option("--alpha", ev_alpha, "level of the per-pair FER increase test");
    ev->add_flag("--seek", ev_seek, "run PrimerSeeker instead of cropping at the true primer");
    add_decoder_flags(ev, ev_beams, ev_merge, ev_key);
    ev_ch.add(ev);

    // bench
    auto* bn = app.add_subcommand("bench", "mean beam extensions per matrix column");
    std::vector<std::string> bn_codes;
    std::vector<std::size_t> bn_beams{512};
    std::size_t bn_n = 20;
    std::string bn_merge = "lse", bn_key = "prefix";
    ChannelFlags bn_ch;
    bn->add_option("--code", bn_codes, "code configs")->required()->check(CLI::ExistingFile);
    bn->add_option("--beams", bn_beams, "beam widths");
    bn->add_option("--n", bn_n, "reads per code and width")->check(CLI::PositiveNumber);
    bn->add_option("--merge", bn_merge, "merge rule")->check(CLI::IsMember({"lse", "max"}));
    bn->add_option("--merge-key", bn_key, "beam identity")->check(CLI::IsMember({"prefix", "state"}));
    bn_ch.add(bn);

    // encode
    auto* en = app.add_subcommand("encode", "message hex to transmitted DNA payload");
    std::string en_code, en_msg;
    en->add_option("--code", en_code, "code config")->required()->check(CLI::ExistingFile);
    en->add_option("--message", en_msg, "message as hex, MSB first")->required();

    // trellis dump
    auto* tr = app.add_subcommand("trellis", "dump the decoding trellis as `level from_state symbol to_state`");
    std::string tr_code;
    bool tr_binary = false;
    tr->add_option("--code", tr_code, "code config")->required()->check(CLI::ExistingFile);
    tr->add_flag("--binary", tr_binary, "binary trellis instead of the quaternary decoding trellis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const CodeContext cc(load_code_config(sim_code));
            BatchParams bp;
            sim_ch.apply(bp);
            bp.left_primer = primer_or_default(sim_lp, default_left_primer());
            bp.right_primer = primer_or_default(sim_rp, default_right_primer());
            bp.seed = g.seed;
            const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
            fs::create_directories(dir);
            const auto reads = parallel_map(sim_n, g.threads, [&](std::size_t id) { return make_read(cc, bp, id); });
            std::ofstream truth(dir / "truth.tsv");
            truth << "read_id\tposition\tmessage_hex\tpayload\n";
            for (std::size_t id = 0; id < reads.size(); ++id) {
                char name[32];
                std::snprintf(name, sizeof name, "read_%04zu", id);
                std::ofstream pm(dir / (std::string(name) + ".pmat"));
                write_pmat(pm, reads[id].sim.matrix);
                std::ofstream al(dir / (std::string(name) + ".aln"));
                write_aln(al, reads[id].sim.alignment);
                truth << name << '\t' << reads[id].sim.embed_position << '\t' << bits_to_hex(reads[id].message) << '\t'
                      << to_dna(reads[id].scenario.payload) << '\n';
            }
            return 0;
        }

        if (*sk) {
            SeekParams sp = sk_flags.params();
            if (sk_beams)
                sp.w = sk_beams;
            const QuaternaryWord target = from_dna(sk_target);
            const auto rows = parallel_map(sk_mats.size(), g.threads, [&](std::size_t i) {
                const ProbabilityMatrix m = load_pmat(sk_mats[i]);
                sk_flags.check_matrix(m, sk_mats[i]);
                return seek(m, target, sp);
            });
            Sink sink(g, "seek");
            sink.out() << "read_id\tposition\tscore\n";
            for (std::size_t i = 0; i < rows.size(); ++i)
                sink.out() << read_id_of(sk_mats[i]) << '\t'
                           << (rows[i].position ? std::to_string(*rows[i].position) : std::string("NA")) << '\t'
                           << fmt(rows[i].score) << '\n';
            return 0;
        }

        if (*dec) {
            const CodeContext cc(load_code_config(dc.code));
            const QuaternaryWord lp = primer_or_default(dc.lp, default_left_primer());
            const QuaternaryWord rp = primer_or_default(dc.rp, default_right_primer());
            const DecodeOptions opt = decode_options(dc.beams, dc.merge, dc.key);
            std::optional<SeekParams> sp;
            if (dc.seek)
                sp = dc.sf.params();
            const auto rows = parallel_map(dc.mats.size(), g.threads, [&](std::size_t i) {
                const ProbabilityMatrix m = load_pmat(dc.mats[i]);
                return decode_pipeline(m, cc, lp, rp, sp, opt, dc.threshold);
            });
            Sink sink(g, "decode");
            sink.out() << "read_id\tposition\tmessage_hex\tscore\taccepted\tbeam_extensions\n";
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& r = rows[i];
                sink.out() << read_id_of(dc.mats[i]) << '\t'
                           << (r.seek_position ? std::to_string(*r.seek_position) : std::string("NA")) << '\t'
                           << (r.failed ? std::string("NA") : bits_to_hex(r.message_bits)) << '\t' << fmt(r.score)
                           << '\t' << (r.accepted ? 1 : 0) << '\t' << r.beam_extensions + r.seek_extensions << '\n';
            }
            return 0;
        }

        if (*orc) {
            const CodeContext cc(load_code_config(oc.code));
            const QuaternaryWord lp = primer_or_default(oc.lp, default_left_primer());
            const QuaternaryWord rp = primer_or_default(oc.rp, default_right_primer());
            struct Row {
                std::optional<std::size_t> pos;
                std::optional<OracleVerdict> v;
                double score = kNegInf;
                std::uint64_t evaluated = 0;
            };
            const auto rows = parallel_map(oc.mats.size(), g.threads, [&](std::size_t i) {
                ProbabilityMatrix m = load_pmat(oc.mats[i]);
                Row row;
                std::size_t pos = 0;
                if (oc.seek) {
                    const SeekResult s = seek(m, lp, oc.sf.params());
                    if (!s.position)
                        return row;
                    pos = *s.position;
                    if (pos > 0)
                        m = crop_matrix(m, pos);
                }
                row.pos = pos;
                row.v = ml_decode_bruteforce(m, cc.code, lp, rp);
                row.evaluated = std::uint64_t{1} << cc.code.message_bits();
                if (row.v->best_logprob != kNegInf)
                    row.score = row.v->best_logprob / static_cast<double>(m.t());
                return row;
            });
            Sink sink(g, "oracle");
            sink.out() << "read_id\tposition\tmessage_hex\tscore\taccepted\tbeam_extensions\tmargin\tunique\n";
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& r = rows[i];
                const bool ok = r.v && r.v->best_logprob != kNegInf;
                sink.out() << read_id_of(oc.mats[i]) << '\t' << (r.pos ? std::to_string(*r.pos) : std::string("NA"))
                           << '\t' << (ok ? bits_to_hex(extract_message(r.v->best_codeword, cc.code.g)) : "NA")
                           << '\t' << fmt(r.score) << '\t' << (ok && r.score >= oc.threshold ? 1 : 0) << '\t'
                           << r.evaluated << '\t' << (r.v ? fmt(r.v->margin) : std::string("NA")) << '\t'
                           << (r.v && r.v->unique ? 1 : 0) << '\n';
            }
            return 0;
        }

        if (*ev) {
            std::vector<ScoredOutcome> outs;
            if (!ev_decoded.empty() || !ev_truth.empty()) {
                if (ev_decoded.empty() || ev_truth.empty())
                    throw std::runtime_error("--decoded and --truth go together");
                std::map<std::string, std::string> truth;
                std::ifstream tin(ev_truth);
                std::string line;
                std::getline(tin, line);
                while (std::getline(tin, line)) {
                    std::istringstream ls(line);
                    std::string id, pos, hex;
                    if (ls >> id >> pos >> hex)
                        truth[id] = hex;
                }
                std::ifstream din(ev_decoded);
                std::getline(din, line);
                while (std::getline(din, line)) {
                    std::istringstream ls(line);
                    std::string id, pos, hex, score;
                    if (!(ls >> id >> pos >> hex >> score))
                        continue;
                    const auto it = truth.find(id);
                    if (it == truth.end())
                        throw std::runtime_error("read " + id + " missing from truth file");
                    const bool failed = hex == "NA";
                    outs.push_back({failed, failed ? kNegInf : std::stod(score), !failed && hex == it->second});
                }
            } else {
                if (ev_code.empty())
                    throw std::runtime_error("eval needs --code or --decoded/--truth");
                const CodeContext cc(load_code_config(ev_code));
                BatchParams bp;
                ev_ch.apply(bp);
                bp.decode = decode_options(ev_beams, ev_merge, ev_key);
                if (ev_seek)
                    bp.seek = bp.kind == MatrixKind::KMER ? SeekParams::kmer_defaults() : SeekParams::ctc_defaults();
                bp.n_reads = ev_n;
                bp.seed = g.seed;
                bp.threads = g.threads;
                outs = outcomes(run_batch(cc, bp));
            }
            const EvalCurve curve = fer_vs_discard(outs, quantile_thresholds(outs, ev_points));
            Sink sink(g, "eval");
            sink.out() << "threshold\tdiscard_pct\tfer\tn\n";
            for (const auto& p : curve.points)
                sink.out() << fmt(p.threshold) << '\t' << fmt(100.0 * p.discard_fraction) << '\t' << fmt(p.fer) << '\t'
                           << p.n_remaining << '\n';
            if (!discard_monotone(curve)) {
                std::cerr << "error: discard fraction decreases along the sweep\n";
                return 3;
            }
            const std::size_t bad = fer_increase_violations(curve, ev_alpha);
            if (bad > 0)
                std::cerr << "warning: " << bad << " significant FER increase(s) along the sweep\n";
            return 0;
        }

        if (*bn) {
            Sink sink(g, "bench");
            sink.out() << "code_id\tw\tnu\tpayload_len\tmean_beam_complexity\treads\tseconds_per_read\n";
            for (const auto& path : bn_codes) {
                const CodeContext cc(load_code_config(path));
                for (std::size_t w : bn_beams) {
                    BatchParams bp;
                    bn_ch.apply(bp);
                    bp.decode = decode_options(w, bn_merge, bn_key);
                    bp.n_reads = bn_n;
                    bp.seed = g.seed;
                    bp.threads = g.threads;
                    const auto t0 = std::chrono::steady_clock::now();
                    ComplexityGroup grp{cc.code.spec.identifier, w, cc.code.spec.payload_symbols(), cc.code.spec.nu,
                                        run_batch(cc, bp)};
                    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    const auto rep = complexity_report({grp}).front();
                    sink.out() << rep.code_id << '\t' << rep.w << '\t' << rep.nu << '\t' << rep.payload_len << '\t'
                               << fmt(rep.mean_beam_complexity) << '\t' << bn_n << '\t'
                               << fmt(secs / static_cast<double>(bn_n)) << '\n';
                }
            }
            return 0;
        }

        if (*en) {
            const Codebook code(load_code_config(en_code));
            std::cout << to_dna(code.transmit(hex_to_bits(en_msg, code.message_bits()))) << '\n';
            return 0;
        }

        if (*tr) {
            const Codebook code(load_code_config(tr_code));
            Sink sink(g, "trellis");
            write_trellis_dump(sink.out(), tr_binary ? build_binary_trellis(code.h) : build_code_trellis(code));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
