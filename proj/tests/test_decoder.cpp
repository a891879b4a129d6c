#include <gtest/gtest.h>

#include "support.hpp"

using namespace synde;
using namespace testsupport;

namespace {

const CodeContext& eq1_context() {
    static const CodeContext cc(load_code_config(config_path("eq1.code")));
    return cc;
}

BitVector message_from_index(std::size_t v, std::size_t n) {
    BitVector m(n);
    for (std::size_t i = 0; i < n; ++i)
        m.set(i, (v >> i) & 1u);
    return m;
}

SimulatedRead noisy_read(const CodeContext& cc, const BitVector& msg, double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto scn =
        compose_read(cc.code.transmit(msg), default_left_primer(), default_right_primer(), {0, 0}, rng);
    ChannelParams ch;
    ch.noise_eps = eps;
    ch.stride = 2;
    ch.seed = seed;
    return simulate_ctc_matrix(scn, ch);
}

}  // namespace

TEST(Decoder, EveryExampleCodewordNoiseless) {
    const CodeContext& cc = eq1_context();
    ASSERT_EQ(cc.code.message_bits(), 2u);
    for (std::size_t v = 0; v < 4; ++v) {
        const BitVector msg = message_from_index(v, 2);
        for (int stride = 1; stride <= 3; ++stride) {
            const SimulatedRead r = noiseless_read(cc.code.transmit(msg), v * 10 + stride, stride);
            const DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer());
            ASSERT_FALSE(d.failed);
            EXPECT_EQ(d.message_bits, msg) << v;
            EXPECT_EQ(d.payload_symbols, cc.code.transmit(msg));
            EXPECT_TRUE(std::isfinite(d.score));
        }
    }
}

TEST(Decoder, FigureFiveScenarioRecoversGreenPath) {
    // primer CAT, payload ATTTA without offset, short right primer
    const SyndromeTrellis q = to_quaternary(build_binary_trellis(eq1_context().code.h));
    ReadScenario s;
    s.truth = from_dna("CAT" "ATTTA" "GC");
    ChannelParams ch;
    ch.noise_eps = 0.05;
    ch.seed = 4;
    const SimulatedRead r = simulate_ctc_matrix(s, ch);
    const QuaternaryWord zero(5, 0);
    const DecodeResult d = decode(r.matrix, q, from_dna("CAT"), from_dna("GC"), zero);
    ASSERT_FALSE(d.failed);
    EXPECT_EQ(to_dna(d.payload_symbols), "ATTTA");
}

TEST(Decoder, ShippedCodesNoiseless) {
    for (const char* name : {"CCM10-6.code", "CC6-5.code", "NU3.code", "CCM9-14.code"}) {
        const CodeContext cc(load_code_config(config_path(name)));
        std::mt19937_64 rng(7);
        for (int i = 0; i < 3; ++i) {
            const BitVector msg = random_bits(cc.code.message_bits(), rng);
            const SimulatedRead r = noiseless_read(cc.code.transmit(msg), 100 + i, 2);
            const DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer());
            ASSERT_FALSE(d.failed) << name;
            EXPECT_EQ(d.message_bits, msg) << name;
        }
    }
}

TEST(Decoder, KmerNoiseless) {
    const CodeContext cc(load_code_config(config_path("CCM10-6.code")));
    std::mt19937_64 rng(8);
    // k = 1 cannot tell a dwell from a homopolymer repeat, so noiseless ties are expected there
    for (int k : {2, 3}) {
        const BitVector msg = random_bits(cc.code.message_bits(), rng);
        const auto scn = compose_read(cc.code.transmit(msg), default_left_primer(), default_right_primer(), {0, 0}, rng);
        ChannelParams ch;
        ch.seed = static_cast<std::uint64_t>(k);
        const SimulatedRead r = simulate_kmer_matrix(scn, ch, k);
        const DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer());
        ASSERT_FALSE(d.failed) << k;
        EXPECT_EQ(d.message_bits, msg) << k;
    }
}

TEST(Decoder, OutputsAreCodewordsUnderNoise) {
    for (const char* name : {"eq1.code", "CCM10-6.code", "CC8-3.code", "NU6.code", "CC9-NM.code"}) {
        const CodeContext cc(load_code_config(config_path(name)));
        std::mt19937_64 rng(9);
        for (int i = 0; i < 4; ++i) {
            const BitVector msg = random_bits(cc.code.message_bits(), rng);
            for (double eps : {0.2, 0.5}) {
                const SimulatedRead r = noisy_read(cc, msg, eps, 50 + i);
                DecodeOptions opt;
                opt.beams = 16;
                const DecodeResult d =
                    decode(r.matrix, cc.trellis, default_left_primer(), default_right_primer(), cc.offsets, opt);
                if (d.failed)
                    continue;
                EXPECT_TRUE(is_codeword(cc.code.receive_codeword(d.payload_symbols), cc.code.h)) << name;
            }
        }
    }
}

TEST(Decoder, MaxMergeAndStateKeyAlsoDecodeNoiseless) {
    const CodeContext cc(load_code_config(config_path("CCM10-6.code")));
    std::mt19937_64 rng(10);
    const BitVector msg = random_bits(cc.code.message_bits(), rng);
    const SimulatedRead r = noisy_read(cc, msg, 0.1, 3);
    for (MergeRule rule : {MergeRule::LogSumExp, MergeRule::Max})
        for (MergeKey key : {MergeKey::Prefix, MergeKey::SyndromeState}) {
            DecodeOptions opt;
            opt.beams = 64;
            opt.merge = rule;
            opt.key = key;
            const DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer(), opt);
            ASSERT_FALSE(d.failed);
            EXPECT_EQ(d.message_bits, msg);
        }
}

TEST(Decoder, ExtensionCountOnTwoColumns) {
    // column 0 seeds the single beam; column 1 gives blank and repeat dwells
    // plus one extension attempt per outgoing trellis edge
    const SyndromeTrellis q = to_quaternary(build_binary_trellis(eq1_context().code.h));
    const QuaternaryWord zero(5, 0);
    const DecodeResult d = decode(uniform_ctc(2), q, from_dna("A"), from_dna("C"), zero);
    EXPECT_EQ(d.beam_extensions, 1u + 2u + q.out_edges(0, 0).size());
    EXPECT_EQ(q.out_edges(0, 0).size(), 2u);
    EXPECT_TRUE(d.failed);
}

TEST(Decoder, WiderBeamsCostMore) {
    const CodeContext& cc = eq1_context();
    const SimulatedRead r = noisy_read(cc, message_from_index(2, 2), 0.4, 5);
    std::uint64_t prev = 0;
    for (std::size_t w : {1u, 8u, 64u}) {
        DecodeOptions opt;
        opt.beams = w;
        const DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer(), opt);
        EXPECT_GE(d.beam_extensions, prev);
        prev = d.beam_extensions;
    }
}

TEST(Decoder, FailureIsRejectedNotThrown) {
    const CodeContext& cc = eq1_context();
    DecodeResult d = decode(uniform_ctc(5), cc, default_left_primer(), default_right_primer());
    EXPECT_TRUE(d.failed);
    EXPECT_EQ(d.score, kNegInf);
    accept(d, kNegInf);
    EXPECT_FALSE(d.accepted);
    const ProbabilityMatrix empty(MatrixKind::CTC5, 0, 0);
    EXPECT_TRUE(decode(empty, cc, default_left_primer(), default_right_primer()).failed);
}

TEST(Decoder, RejectsBadArguments) {
    const CodeContext& cc = eq1_context();
    const ProbabilityMatrix p = uniform_ctc(10);
    EXPECT_THROW(decode(p, cc, QuaternaryWord{}, default_right_primer()), std::invalid_argument);
    DecodeOptions opt;
    opt.beams = 0;
    EXPECT_THROW(decode(p, cc, default_left_primer(), default_right_primer(), opt), std::invalid_argument);
    EXPECT_THROW(decode(p, build_binary_trellis(eq1_context().code.h), default_left_primer(), default_right_primer(),
                        QuaternaryWord(10, 0)),
                 std::invalid_argument);
    EXPECT_THROW(decode(p, cc.trellis, default_left_primer(), default_right_primer(), QuaternaryWord(2, 0)),
                 std::invalid_argument);
}

TEST(Accept, ThresholdSemantics) {
    const CodeContext& cc = eq1_context();
    const SimulatedRead r = noisy_read(cc, message_from_index(1, 2), 0.2, 6);
    DecodeResult d = decode(r.matrix, cc, default_left_primer(), default_right_primer());
    ASSERT_FALSE(d.failed);
    EXPECT_TRUE(accept(d, kNegInf).accepted);
    EXPECT_FALSE(accept(d, std::numeric_limits<double>::infinity()).accepted);
    EXPECT_TRUE(accept(d, d.score).accepted);
    EXPECT_FALSE(accept(d, std::nextafter(d.score, 0.0)).accepted);
    const bool once = accept(d, -0.5).accepted;
    EXPECT_EQ(accept(d, -0.5).accepted, once);
}

TEST(Pipeline, CropIdentityWithoutFlanks) {
    const CodeContext& cc = eq1_context();
    const SimulatedRead r = noisy_read(cc, message_from_index(3, 2), 0.1, 7);
    ASSERT_EQ(r.embed_position, 0u);
    DecodeOptions opt;
    const DecodeResult a = decode_pipeline(r.matrix, cc, default_left_primer(), default_right_primer(), std::nullopt,
                                           opt, kNegInf);
    const DecodeResult b = decode(r.matrix, cc, default_left_primer(), default_right_primer(), opt);
    EXPECT_EQ(a.message_bits, b.message_bits);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.beam_extensions, b.beam_extensions);
    EXPECT_TRUE(a.accepted);
}

TEST(Pipeline, SeekThenDecodeWithFlanks) {
    const CodeContext cc(load_code_config(config_path("CCM10-6.code")));
    std::mt19937_64 rng(12);
    const BitVector msg = random_bits(cc.code.message_bits(), rng);
    const auto scn = compose_read(cc.code.transmit(msg), default_left_primer(), default_right_primer(), {80, 80}, rng);
    ChannelParams ch;
    ch.seed = 12;
    const SimulatedRead r = simulate_ctc_matrix(scn, ch);
    SeekParams sp;
    sp.s = 1;
    sp.tau = 1.0;
    const DecodeResult d =
        decode_pipeline(r.matrix, cc, default_left_primer(), default_right_primer(), sp, DecodeOptions{}, -1.0);
    ASSERT_TRUE(d.seek_position);
    EXPECT_LE(std::llabs(static_cast<long long>(*d.seek_position) - static_cast<long long>(r.embed_position)), 1);
    EXPECT_EQ(d.message_bits, msg);
    EXPECT_TRUE(d.accepted);
    EXPECT_GT(d.seek_extensions, 0u);
}

TEST(Pipeline, SeekFailureIsRejected) {
    const CodeContext& cc = eq1_context();
    ProbabilityMatrix p(MatrixKind::CTC5, 0, 40);
    for (std::size_t c = 0; c < p.t(); ++c)
        p.at(1, c) = 1.0;  // all A: the primer cannot be found
    const DecodeResult d =
        decode_pipeline(p, cc, default_left_primer(), default_right_primer(), SeekParams{}, DecodeOptions{}, kNegInf);
    EXPECT_TRUE(d.failed);
    EXPECT_FALSE(d.accepted);
    EXPECT_FALSE(d.seek_position);
}

TEST(Crop, DropsLeadingColumns) {
    std::mt19937_64 rng(13);
    const ProbabilityMatrix p = random_matrix(MatrixKind::CTC5, 0, 10, rng);
    const ProbabilityMatrix c = crop_matrix(p, 3);
    ASSERT_EQ(c.t(), 7u);
    for (std::size_t col = 0; col < 7; ++col)
        for (std::size_t r = 0; r < 5; ++r)
            EXPECT_EQ(c.at(r, col), p.at(r, col + 3));
    EXPECT_EQ(crop_matrix(p, 0), p);
    EXPECT_THROW(crop_matrix(p, 10), std::out_of_range);
}
