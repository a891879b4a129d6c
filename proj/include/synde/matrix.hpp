#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "synde/logmath.hpp"

namespace synde {

enum class MatrixKind { CTC5, KMER };

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Column-stochastic Q x T matrix stored column-major. CTC5 rows are
/// blank,A,C,G,T; KMER rows are k-mers in lexicographic order (A<C<G<T).
class ProbabilityMatrix {
public:
    ProbabilityMatrix() = default;
    ProbabilityMatrix(MatrixKind kind, int k, std::size_t t)
        : kind_(kind), k_(kind == MatrixKind::CTC5 ? 0 : k), q_(rows_for(kind, k)), t_(t), data_(q_ * t, 0.0) {}

    static std::size_t rows_for(MatrixKind kind, int k) {
        if (kind == MatrixKind::CTC5)
            return 5;
        if (k < 1 || k > 12)
            throw std::invalid_argument("k-mer size must be in [1, 12]");
        return std::size_t{1} << (2 * k);
    }

    MatrixKind kind() const noexcept { return kind_; }
    int k() const noexcept { return k_; }
    std::size_t q() const noexcept { return q_; }
    std::size_t t() const noexcept { return t_; }

    double& at(std::size_t row, std::size_t col) { return data_[col * q_ + row]; }
    double at(std::size_t row, std::size_t col) const { return data_[col * q_ + row]; }
    const double* column(std::size_t col) const { return data_.data() + col * q_; }
    double* column(std::size_t col) { return data_.data() + col * q_; }

    /// Element-wise natural log, same layout.
    std::vector<double> log_values() const {
        std::vector<double> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i)
            out[i] = safe_log(data_[i]);
        return out;
    }

    /// Largest deviation of a column sum from 1 and whether any entry is negative.
    double max_column_error() const {
        double worst = 0.0;
        for (std::size_t c = 0; c < t_; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < q_; ++r) {
                if (at(r, c) < 0.0)
                    return INFINITY;
                s += at(r, c);
            }
            worst = std::max(worst, std::abs(s - 1.0));
        }
        return worst;
    }

    ProbabilityMatrix slice(std::size_t from, std::size_t to) const {
        ProbabilityMatrix m(kind_, k_, to - from);
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(from * q_),
                  data_.begin() + static_cast<std::ptrdiff_t>(to * q_), m.data_.begin());
        return m;
    }

    friend bool operator==(const ProbabilityMatrix&, const ProbabilityMatrix&) = default;

private:
    MatrixKind kind_ = MatrixKind::CTC5;
    int k_ = 0;
    std::size_t q_ = 5;
    std::size_t t_ = 0;
    std::vector<double> data_;
};

inline ProbabilityMatrix crop_matrix(const ProbabilityMatrix& p, std::size_t primer_pos) {
    if (primer_pos >= p.t())
        throw std::out_of_range("crop position " + std::to_string(primer_pos) + " outside matrix of " +
                                std::to_string(p.t()) + " columns");
    return p.slice(primer_pos, p.t());
}

/// Inclusive column span of one truth unit (base or k-mer).
struct AlignmentSpan {
    std::size_t truth_index;
    std::size_t col_start;
    std::size_t col_end;
    friend bool operator==(const AlignmentSpan&, const AlignmentSpan&) = default;
};

using Alignment = std::vector<AlignmentSpan>;

/// Column-sum slack accepted when reading matrices written with fewer digits.
inline constexpr double kPmatSumTolerance = 1e-6;

inline void write_pmat(std::ostream& out, const ProbabilityMatrix& p) {
    out << "PMAT v1 kind=" << (p.kind() == MatrixKind::CTC5 ? "CTC5" : "KMER") << " k=" << p.k()
        << " q=" << p.q() << " t=" << p.t() << '\n';
    char buf[32];
    for (std::size_t c = 0; c < p.t(); ++c) {
        for (std::size_t r = 0; r < p.q(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g", p.at(r, c));
            if (r)
                out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

inline ProbabilityMatrix read_pmat(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw FormatError("empty PMAT stream");
    std::istringstream hs(header);
    std::string magic, version, kind_f, k_f, q_f, t_f;
    hs >> magic >> version >> kind_f >> k_f >> q_f >> t_f;
    if (magic != "PMAT" || version != "v1")
        throw FormatError("not a PMAT v1 header: " + header);
    auto field = [&](const std::string& f, const std::string& name) {
        if (f.rfind(name + "=", 0) != 0)
            throw FormatError("PMAT header missing " + name);
        return f.substr(name.size() + 1);
    };
    const std::string kind_s = field(kind_f, "kind");
    MatrixKind kind;
    if (kind_s == "CTC5")
        kind = MatrixKind::CTC5;
    else if (kind_s == "KMER")
        kind = MatrixKind::KMER;
    else
        throw FormatError("unknown matrix kind " + kind_s);
    auto number = [&](const std::string& f, const std::string& name) {
        const std::string v = field(f, name);
        std::size_t used = 0;
        unsigned long x = 0;
        try {
            x = std::stoul(v, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != v.size())
            throw FormatError("PMAT header field " + name + " is not a number: " + v);
        return static_cast<std::size_t>(x);
    };
    const auto k = static_cast<int>(number(k_f, "k"));
    const std::size_t q = number(q_f, "q");
    const std::size_t t = number(t_f, "t");
    if (kind == MatrixKind::KMER && (k < 1 || k > 12))
        throw FormatError("PMAT k-mer size out of range");
    ProbabilityMatrix p(kind, k, t);
    if (p.q() != q)
        throw FormatError("PMAT row count does not match kind/k");
    for (std::size_t c = 0; c < t; ++c)
        for (std::size_t r = 0; r < q; ++r)
            if (!(in >> p.at(r, c)))
                throw FormatError("PMAT truncated at column " + std::to_string(c));
    if (!(in >> std::ws).eof())
        throw FormatError("PMAT has data after " + std::to_string(t) + " columns");
    if (!(p.max_column_error() <= kPmatSumTolerance))
        throw FormatError("PMAT columns must be non-negative and sum to 1");
    return p;
}

inline void write_aln(std::ostream& out, const Alignment& a) {
    out << "ALN v1\n";
    for (const auto& s : a)
        out << s.truth_index << ' ' << s.col_start << ' ' << s.col_end << '\n';
}

inline Alignment read_aln(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("ALN v1", 0) != 0)
        throw FormatError("not an ALN v1 stream");
    Alignment a;
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        AlignmentSpan s{};
        if (!(ls >> s.truth_index >> s.col_start >> s.col_end) || !(ls >> std::ws).eof())
            throw FormatError("malformed ALN line: " + line);
        a.push_back(s);
    }
    return a;
}

inline ProbabilityMatrix load_pmat(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open " + path);
    return read_pmat(in);
}

}  // namespace synde
