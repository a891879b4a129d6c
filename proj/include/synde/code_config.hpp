#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "synde/codebook.hpp"

namespace synde {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::uint64_t parse_u64(std::string_view v, const std::string& key) {
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        v.remove_prefix(2);
        base = 16;
    }
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("bad integer for '" + key + "': " + std::string(v));
    return out;
}

inline RowTemplate parse_row(std::string_view v, const std::string& key) {
    const auto colon = v.find(':');
    if (colon == std::string_view::npos)
        throw ConfigError("row '" + key + "' must look like <offset>:<bits>");
    RowTemplate r;
    r.offset = static_cast<std::size_t>(parse_u64(trim(v.substr(0, colon)), key));
    try {
        r.bits = BitVector::from_string(trim(v.substr(colon + 1)));
    } catch (const std::invalid_argument&) {
        throw ConfigError("row '" + key + "' has non-binary characters");
    }
    return r;
}

}  // namespace detail

/// Parses the `key = value` code description. Lines starting with '#' are comments.
inline CodeSpec parse_code_config(std::istream& in) {
    CodeSpec spec;
    spec.marker.clear();
    std::map<std::size_t, RowTemplate> tmpl, head, tail;
    bool have_marker = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string_view val = detail::trim(body.substr(eq + 1));
        auto indexed = [&](std::string_view prefix, std::map<std::size_t, RowTemplate>& dst) {
            if (key.rfind(prefix, 0) != 0)
                return false;
            const auto idx = static_cast<std::size_t>(detail::parse_u64(std::string_view(key).substr(prefix.size()), key));
            if (!dst.emplace(idx, detail::parse_row(val, key)).second)
                throw ConfigError("duplicate key '" + key + "'");
            return true;
        };
        if (key == "c")
            spec.c = static_cast<int>(detail::parse_u64(val, key));
        else if (key == "b")
            spec.b = static_cast<int>(detail::parse_u64(val, key));
        else if (key == "nu")
            spec.nu = static_cast<int>(detail::parse_u64(val, key));
        else if (key == "n_bits")
            spec.n_bits = static_cast<std::size_t>(detail::parse_u64(val, key));
        else if (key == "marker_period")
            spec.marker_period = static_cast<std::size_t>(detail::parse_u64(val, key));
        else if (key == "marker_symbol") {
            try {
                spec.marker = from_dna(val);
            } catch (const std::invalid_argument&) {
                throw ConfigError("marker_symbol must be a DNA string");
            }
            have_marker = true;
        } else if (key == "scrambler_seed")
            spec.scrambler_seed = detail::parse_u64(val, key);
        else if (key == "identifier")
            spec.identifier = std::string(val);
        else if (key == "reconstructed")
            spec.reconstructed = (val == "true" || val == "1");
        else if (!indexed("template_row.", tmpl) && !indexed("head_row.", head) && !indexed("tail_row.", tail))
            throw ConfigError("unknown key '" + key + "'");
    }
    if (!have_marker)
        spec.marker = {0};
    for (auto& [i, r] : head)
        spec.head_rows.push_back(std::move(r));
    for (auto& [i, r] : tmpl)
        spec.template_rows.push_back(std::move(r));
    for (auto& [i, r] : tail)
        spec.tail_rows.push_back(std::move(r));
    spec.validate();
    return spec;
}

inline CodeSpec parse_code_config(const std::string& text_or_path, bool is_path) {
    if (!is_path) {
        std::istringstream in(text_or_path);
        return parse_code_config(in);
    }
    std::ifstream in(text_or_path);
    if (!in)
        throw ConfigError("cannot open code config " + text_or_path);
    return parse_code_config(in);
}

inline CodeSpec load_code_config(const std::string& path) { return parse_code_config(path, true); }

inline void write_code_config(std::ostream& out, const CodeSpec& spec) {
    out << "identifier = " << spec.identifier << '\n'
        << "c = " << spec.c << '\n'
        << "b = " << spec.b << '\n'
        << "nu = " << spec.nu << '\n'
        << "n_bits = " << spec.n_bits << '\n'
        << "marker_period = " << spec.marker_period << '\n'
        << "marker_symbol = " << to_dna(spec.marker) << '\n'
        << "scrambler_seed = " << spec.scrambler_seed << '\n';
    if (spec.reconstructed)
        out << "reconstructed = true\n";
    auto rows = [&](const char* name, const std::vector<RowTemplate>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            out << name << '.' << i << " = " << v[i].offset << ':' << v[i].bits.to_string() << '\n';
    };
    rows("head_row", spec.head_rows);
    rows("template_row", spec.template_rows);
    rows("tail_row", spec.tail_rows);
}

/// Zero-tail terminated code with c-b = 1: one template row of c*(nu+1)
/// bits slid in steps of c, plus the truncated head and tail rows.
inline CodeSpec zero_tail_spec(int c, int b, int nu, const BitVector& tmpl, std::size_t n_bits) {
    const auto uc = static_cast<std::size_t>(c);
    const auto un = static_cast<std::size_t>(nu);
    if (c - b != 1)
        throw ConfigError("zero-tail construction expects c - b = 1");
    if (tmpl.size() != uc * (un + 1))
        throw ConfigError("template must have c*(nu+1) bits");
    CodeSpec s;
    s.c = c;
    s.b = b;
    s.nu = nu;
    s.n_bits = n_bits;
    auto slice = [&](std::size_t from, std::size_t to) {
        BitVector v(to - from);
        for (std::size_t i = from; i < to; ++i)
            v.set(i - from, tmpl.test(i));
        return v;
    };
    for (std::size_t k = 0; k < un; ++k) {
        const std::size_t cut = (un - k) * uc;
        s.head_rows.push_back({0, slice(cut, std::min(tmpl.size(), cut + n_bits))});
    }
    s.template_rows.push_back({0, tmpl});
    const std::size_t blocks = (n_bits + uc - 1) / uc;
    for (std::size_t k = un; k < blocks + un; ++k) {
        const std::size_t off = (k - un) * uc;
        if (off + tmpl.size() <= n_bits)
            continue;
        s.tail_rows.push_back({off, slice(0, n_bits - off)});
    }
    return s;
}

/// Random template with nonzero first and last blocks; every candidate is
/// checked for full row rank at the requested length.
inline BitVector random_template(int c, int nu, std::size_t n_bits, std::uint64_t seed) {
    const auto uc = static_cast<std::size_t>(c);
    const auto len = uc * static_cast<std::size_t>(nu + 1);
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        BitVector t(len);
        for (std::size_t i = 0; i < len; ++i)
            t.set(i, rng() >> 63);
        bool first = false, last = false;
        for (std::size_t i = 0; i < uc; ++i) {
            first |= t.test(i);
            last |= t.test(len - uc + i);
        }
        if (!first || !last)
            continue;
        const CodeSpec s = zero_tail_spec(c, c - 1, nu, t, n_bits);
        const ParityCheckMatrix h = build_parity_check(s);
        if (h.rank() == h.rows.size())
            return t;
    }
    throw ConfigError("no full-rank template found");
}

/// Adds unit rows (zeroing information positions) until the kernel has
/// `message_bits` dimensions. Chosen positions are spread evenly over the
/// information set; rows go first so they never enter a state window.
inline void shorten_to(CodeSpec& spec, std::size_t message_bits) {
    const ParityCheckMatrix h = build_parity_check(spec);
    const GeneratorBasis g = derive_generator(h);
    if (message_bits > g.dimension())
        throw ConfigError("cannot lengthen a code by shortening");
    const std::size_t drop = g.dimension() - message_bits;
    std::vector<RowTemplate> units;
    for (std::size_t j = 0; j < drop; ++j) {
        const std::size_t pos = g.info_positions[(2 * j + 1) * g.dimension() / (2 * drop)];
        BitVector one(1);
        one.set(0);
        units.push_back({pos, one});
    }
    spec.head_rows.insert(spec.head_rows.begin(), units.begin(), units.end());
}

}  // namespace synde
