#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace synde;
using namespace testsupport;

namespace {

const char* kMinimal = R"(# comment
identifier = T
c = 4
b = 2
nu = 3
n_bits = 10
scrambler_seed = 0x2A
head_row.0 = 0:1100
head_row.1 = 0:0111
template_row.0 = 0:11111100
template_row.1 = 0:01010111
template_row.2 = 0:00001111
template_row.3 = 0:00110101
tail_row.0 = 4:000011
tail_row.1 = 4:001101
)";

CodeSpec parse(const std::string& text) { return parse_code_config(text, false); }

}  // namespace

TEST(CodeConfig, ParsesKeysAndDefaults) {
    const CodeSpec s = parse(kMinimal);
    EXPECT_EQ(s.identifier, "T");
    EXPECT_EQ(s.c, 4);
    EXPECT_EQ(s.b, 2);
    EXPECT_EQ(s.nu, 3);
    EXPECT_EQ(s.n_bits, 10u);
    EXPECT_EQ(s.scrambler_seed, 42u);
    EXPECT_EQ(s.marker_period, 0u);
    EXPECT_EQ(s.marker, QuaternaryWord{0});
    EXPECT_EQ(s.head_rows.size(), 2u);
    EXPECT_EQ(s.template_rows.size(), 4u);
    EXPECT_EQ(s.tail_rows.size(), 2u);
    EXPECT_FALSE(s.reconstructed);
    const ParityCheckMatrix h = build_parity_check(s);
    std::vector<std::string> rows;
    for (const auto& r : h.rows)
        rows.push_back(r.to_string());
    EXPECT_EQ(rows, eq1_rows());
}

TEST(CodeConfig, MultiSymbolMarker) {
    const CodeSpec s = parse(std::string(kMinimal) + "marker_period = 2\nmarker_symbol = GT\n");
    EXPECT_EQ(s.marker, from_dna("GT"));
    EXPECT_EQ(s.payload_symbols(), 5u + 2u * 2u);
}

TEST(CodeConfig, Errors) {
    EXPECT_THROW(parse(std::string(kMinimal) + "bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "no equals sign\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "head_row.0 = 0:1\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "tail_row.7 = 0:10x\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "tail_row.7 = 9:111\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "marker_symbol = Z\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "n_bits = 11\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "b = 4\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "nu = 31\n"), ConfigError);
    EXPECT_THROW(parse(std::string(kMinimal) + "c = x\n"), ConfigError);
    EXPECT_THROW(load_code_config("/nonexistent/file.code"), ConfigError);
}

TEST(CodeConfig, WriteParseRoundTripForShippedCodes) {
    for (const auto& name : shipped_configs()) {
        const CodeSpec a = load_code_config(config_path(name));
        std::ostringstream out;
        write_code_config(out, a);
        const CodeSpec b = parse(out.str());
        EXPECT_EQ(b.identifier, a.identifier) << name;
        EXPECT_EQ(b.marker, a.marker) << name;
        EXPECT_EQ(b.scrambler_seed, a.scrambler_seed) << name;
        EXPECT_EQ(b.reconstructed, a.reconstructed) << name;
        const ParityCheckMatrix ha = build_parity_check(a), hb = build_parity_check(b);
        EXPECT_EQ(ha.rows, hb.rows) << name;
    }
}

TEST(CodeConfig, TableCodesAreFlaggedReconstructed) {
    for (const auto& name : shipped_configs())
        if (name != "eq1.code")
            EXPECT_TRUE(load_code_config(config_path(name)).reconstructed) << name;
}

TEST(ZeroTail, RowStructure) {
    // c=3, nu=2: template of 9 bits slid by 3 over 12 columns
    const BitVector tmpl = BitVector::from_string("101110011");
    const CodeSpec s = zero_tail_spec(3, 2, 2, tmpl, 12);
    const ParityCheckMatrix h = build_parity_check(s);
    const std::vector<std::string> expected = {
        // head rows: template suffixes
        "011000000000",
        "110011000000",
        // full shifts
        "101110011000",
        "000101110011",
        // tail rows: clipped prefixes
        "000000101110",
        "000000000101",
    };
    std::vector<std::string> got;
    for (const auto& r : h.rows)
        got.push_back(r.to_string());
    EXPECT_EQ(got, expected);
    EXPECT_EQ(h.rows.size(), 12u / 3u + 2u);
    EXPECT_THROW(zero_tail_spec(3, 1, 2, tmpl, 12), ConfigError);
    EXPECT_THROW(zero_tail_spec(3, 2, 3, tmpl, 12), ConfigError);
}

TEST(ZeroTail, ShorteningHitsMessageLength) {
    const BitVector tmpl = random_template(4, 3, 40, 99);
    CodeSpec s = zero_tail_spec(4, 3, 3, tmpl, 40);
    const std::size_t natural = Codebook(s).message_bits();
    shorten_to(s, natural - 5);
    const Codebook code(s);
    EXPECT_EQ(code.message_bits(), natural - 5);
    EXPECT_THROW(shorten_to(s, natural + 1), ConfigError);
}
