// SPDX-License-Identifier: Apache-2.0
//
// Multichannel time-series container, CSV ingestion, normalization and
// channel partitioning.

#pragma once

#include "megc/common.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace megc {

/// A finite record of n channels by T samples.  Immutable by convention:
/// every transformation returns a new series.
struct MultivariateSeries {
    std::vector<std::string> labels;
    Eigen::MatrixXd data;  // T x n, one column per channel
    double sample_interval = 1.0;

    Eigen::Index samples() const { return data.rows(); }
    Eigen::Index channels() const { return data.cols(); }

    void validate() const {
        if (data.rows() < 2) throw UsageError("series: T >= 2 violated");
        if (data.cols() < 1) throw UsageError("series: n >= 1 violated");
        if (static_cast<Eigen::Index>(labels.size()) != data.cols())
            throw UsageError("series: label count does not match channel count");
        if (sample_interval <= 0.0) throw UsageError("series: sample_interval must be positive");
        if (!data.allFinite()) throw UsageError("series: non-finite value in data");
        std::set<std::string> seen;
        for (const auto& l : labels)
            if (!seen.insert(l).second) throw UsageError("series: duplicate label '" + l + "'");
    }
};

/// Disjoint (x; y; z) split of channel indices.  z may be empty.
struct Partition {
    std::vector<int> x, y, z;

    int nx() const { return static_cast<int>(x.size()); }
    int ny() const { return static_cast<int>(y.size()); }
    int nz() const { return static_cast<int>(z.size()); }

    void validate(Eigen::Index n_channels) const {
        if (x.empty() || y.empty()) throw UsageError("partition: x and y must be nonempty");
        std::set<int> seen;
        auto check = [&](const std::vector<int>& idx, const char* name) {
            for (int i : idx) {
                if (i < 0 || i >= n_channels)
                    throw UsageError(std::string("partition: index out of range in ") + name);
                if (!seen.insert(i).second) throw UsageError("partition: overlapping partition");
            }
        };
        check(x, "x");
        check(y, "y");
        check(z, "z");
    }
};

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    if (b == e) return false;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

/// Read a series from CSV: mandatory header of channel names, then one row
/// of finite reals per sample.  Errors carry the offending row/column.
inline MultivariateSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path.string() + "': empty file");
    MultivariateSeries s;
    s.labels = detail::split_csv_line(line);
    for (auto& l : s.labels) {
        while (!l.empty() && (l.back() == ' ' || l.back() == '\t')) l.pop_back();
        while (!l.empty() && (l.front() == ' ' || l.front() == '\t')) l.erase(l.begin());
        if (l.empty()) throw IoError("'" + path.string() + "': empty channel name in header");
    }
    const std::size_t n = s.labels.size();
    {
        std::set<std::string> seen;
        for (const auto& l : s.labels)
            if (!seen.insert(l).second)
                throw IoError("'" + path.string() + "': duplicate label '" + l + "'");
    }

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto toks = detail::split_csv_line(line);
        if (toks.size() != n)
            throw IoError("'" + path.string() + "': row " + std::to_string(lineno) + " has " +
                          std::to_string(toks.size()) + " cells, expected " + std::to_string(n));
        for (std::size_t c = 0; c < n; ++c) {
            double v;
            if (!detail::parse_double(toks[c], v) || !std::isfinite(v))
                throw IoError("'" + path.string() + "': non-numeric cell at row " +
                              std::to_string(lineno) + ", column " + s.labels[c]);
            values.push_back(v);
        }
        ++rows;
    }
    if (rows < 2) throw UsageError("'" + path.string() + "': T >= 2 violated");
    s.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < n; ++c)
            s.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * n + c];
    s.validate();
    return s;
}

inline void save_csv(const MultivariateSeries& s, const std::filesystem::path& path) {
    s.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (Eigen::Index c = 0; c < s.channels(); ++c)
        out << (c ? "," : "") << s.labels[static_cast<std::size_t>(c)];
    out << "\n";
    char buf[64];
    for (Eigen::Index r = 0; r < s.samples(); ++r) {
        for (Eigen::Index c = 0; c < s.channels(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.data(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Remove each channel's sample mean and rescale to unit (T-1) standard
/// deviation.  Idempotent up to roundoff.
inline MultivariateSeries standardize(const MultivariateSeries& s) {
    s.validate();
    MultivariateSeries out = s;
    const double T = static_cast<double>(s.samples());
    for (Eigen::Index c = 0; c < s.channels(); ++c) {
        const double mean = s.data.col(c).mean();
        Eigen::VectorXd centered = s.data.col(c).array() - mean;
        const double sd = std::sqrt(centered.squaredNorm() / (T - 1.0));
        if (sd <= 0.0)
            throw NumericError("standardize: constant channel '" +
                               s.labels[static_cast<std::size_t>(c)] + "'");
        out.data.col(c) = centered / sd;
    }
    return out;
}

/// Column-slice a series into the (x; y; z) sub-series of a partition.
inline std::array<MultivariateSeries, 3> split(const MultivariateSeries& s, const Partition& p) {
    s.validate();
    p.validate(s.channels());
    auto take = [&](const std::vector<int>& idx) {
        MultivariateSeries sub;
        sub.sample_interval = s.sample_interval;
        sub.data.resize(s.samples(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            sub.data.col(static_cast<Eigen::Index>(k)) = s.data.col(idx[k]);
            sub.labels.push_back(s.labels[static_cast<std::size_t>(idx[k])]);
        }
        return sub;
    };
    return {take(p.x), take(p.y), take(p.z)};
}

}  // namespace megc
