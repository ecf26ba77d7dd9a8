// SPDX-License-Identifier: Apache-2.0
//
// Simulation network construction: graph topologies, compound-symmetry
// innovation covariances, and spectral-radius-scaled VAR(1) models.
// Adjacency convention: entry (i, j) = 1 means a directed edge from node j
// to node i; self-loops sit on the diagonal.

#pragma once

#include "megc/common.hpp"
#include "megc/var.hpp"

#include <filesystem>
#include <fstream>

namespace megc {

struct NetworkSpec {
    Eigen::MatrixXd adjacency;    // square 0/1
    double lambda_max = 0.85;     // spectral radius of the scaled transition
    Eigen::MatrixXd innovation;   // covariance of the driving noise

    Eigen::Index nodes() const { return adjacency.rows(); }

    void validate() const {
        if (adjacency.rows() != adjacency.cols() || adjacency.rows() < 1)
            throw UsageError("network: adjacency must be square and nonempty");
        for (Eigen::Index r = 0; r < adjacency.rows(); ++r)
            for (Eigen::Index c = 0; c < adjacency.cols(); ++c)
                if (adjacency(r, c) != 0.0 && adjacency(r, c) != 1.0)
                    throw UsageError("network: adjacency entries must be 0 or 1");
        if (lambda_max <= 0.0 || lambda_max >= 1.0)
            throw UsageError("network: lambda_max must lie in (0,1)");
        if (innovation.rows() != adjacency.rows() || innovation.cols() != adjacency.cols())
            throw UsageError("network: innovation covariance shape mismatch");
        require_spd(innovation, "network: innovation covariance");
    }
};

/// Covariance with `diag` on the diagonal and `offdiag` everywhere else.
/// Eigenvalues are diag - offdiag (n-1 times) and diag + (n-1) offdiag.
inline Eigen::MatrixXd compound_symmetry(int n, double diag, double offdiag) {
    if (n < 1) throw UsageError("compound_symmetry: n must be >= 1");
    if (!(diag > offdiag) || offdiag < 0.0)
        throw UsageError("compound_symmetry: requires diag > offdiag >= 0");
    if (diag + (n - 1) * offdiag <= 0.0)
        throw NumericError("compound_symmetry: matrix not positive definite");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, offdiag);
    m.diagonal().setConstant(diag);
    return m;
}

/// Directed ring: edge i -> (i+1 mod n) for every node.
inline Eigen::MatrixXd ring(int n, bool self_loops = true) {
    if (n < 3) throw UsageError("ring: n must be >= 3");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) a((i + 1) % n, i) = 1.0;
    if (self_loops) a.diagonal().setOnes();
    return a;
}

/// Star: node 0 is the center and feeds every boundary node.
inline Eigen::MatrixXd star(int n, bool self_loops = true) {
    if (n < 2) throw UsageError("star: n must be >= 2");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k, 0) = 1.0;
    if (self_loops) a.diagonal().setOnes();
    return a;
}

/// Stable VAR(1) with transition a * adjacency scaled to the requested
/// spectral radius and the given innovation covariance.
inline VarModel build_model(const NetworkSpec& spec) {
    spec.validate();
    VarModel m = scale_to_radius(spec.adjacency, spec.lambda_max);
    m.omega = spec.innovation;
    m.validate();
    return m;
}

/// Ground-truth edge set for ROC evaluation: the off-diagonal nonzero
/// pattern of the adjacency.
inline Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> truth_edges(
    const Eigen::MatrixXd& adjacency) {
    const Eigen::Index n = adjacency.rows();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) t(i, j) = (i != j) && adjacency(i, j) != 0.0;
    return t;
}

/// Adjacency CSV: row i lists the 0/1 in-edges of target node i.
inline Eigen::MatrixXd load_adjacency_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<double> row;
        for (const auto& tok : detail::split_csv_line(line)) {
            double v;
            if (!detail::parse_double(tok, v) || (v != 0.0 && v != 1.0))
                throw IoError("'" + path.string() + "': row " + std::to_string(lineno) +
                              " has a non-0/1 cell");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("'" + path.string() + "': empty adjacency");
    const std::size_t n = rows.size();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n)
            throw IoError("'" + path.string() + "': adjacency not square at row " +
                          std::to_string(r + 1));
        for (std::size_t c = 0; c < n; ++c)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return a;
}

}  // namespace megc
