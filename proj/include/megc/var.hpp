// SPDX-License-Identifier: Apache-2.0
//
// VAR(p) estimation, order selection, simulation and scaling.
//
// Sign convention throughout: the stored coefficient matrices G_1..G_p are
// those of the whitening polynomial G(L) = I + sum_k G_k L^k with
// G(L) u_t = e_t, i.e. the recursion reads u_t = sum_k (-G_k) u_{t-k} + e_t.

#pragma once

#include "megc/common.hpp"
#include "megc/series.hpp"

#include <json.hpp>

#include <random>
#include <string>
#include <vector>

namespace megc {

struct VarModel {
    std::vector<Eigen::MatrixXd> coeffs;  // G_1..G_p
    Eigen::MatrixXd omega;                // innovation covariance

    int order() const { return static_cast<int>(coeffs.size()); }
    Eigen::Index channels() const { return omega.rows(); }

    /// Transition matrix A_k = -G_k of u_t = sum_k A_k u_{t-k} + e_t.
    Eigen::MatrixXd transition(int k) const { return -coeffs.at(static_cast<std::size_t>(k)); }

    /// np x np companion matrix of the recursion.
    Eigen::MatrixXd companion() const {
        const Eigen::Index n = channels();
        const int p = order();
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n * p, n * p);
        for (int k = 0; k < p; ++k) comp.block(0, k * n, n, n) = -coeffs[static_cast<std::size_t>(k)];
        if (p > 1) comp.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
        return comp;
    }

    void validate() const {
        if (coeffs.empty()) throw UsageError("var: order must be >= 1");
        const Eigen::Index n = channels();
        if (n < 1) throw UsageError("var: empty innovation covariance");
        for (const auto& g : coeffs)
            if (g.rows() != n || g.cols() != n)
                throw UsageError("var: coefficient matrix shape mismatch");
        require_spd(omega, "var: omega");
        if (spectral_radius_of(companion()) >= 1.0)
            throw NumericError("var: model unstable (companion spectral radius >= 1)");
    }
};

inline double spectral_radius(const VarModel& m) { return spectral_radius_of(m.companion()); }

/// Ordinary least squares fit of u_t on u_{t-1}..u_{t-p}; no intercept, the
/// input is assumed demeaned.  Omega is the residual covariance over T-p
/// effective samples.
inline VarModel fit_var(const MultivariateSeries& s, int p) {
    s.validate();
    if (p < 1) throw UsageError("fit_var: order must be >= 1");
    const Eigen::Index T = s.samples();
    const Eigen::Index n = s.channels();
    if (T <= n * p + 1) throw UsageError("fit_var: insufficient samples (T <= n*p + 1)");

    const Eigen::Index rows = T - p;
    Eigen::MatrixXd X(rows, n * p);
    Eigen::MatrixXd Y = s.data.bottomRows(rows);
    for (int k = 0; k < p; ++k)
        X.block(0, k * n, rows, n) = s.data.block(p - 1 - k, 0, rows, n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) throw NumericError("fit_var: rank-deficient regressor matrix");
    Eigen::MatrixXd beta = qr.solve(Y);  // (np) x n, stacked A_1..A_p transposed

    VarModel m;
    m.coeffs.reserve(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k)
        m.coeffs.push_back(-beta.block(k * n, 0, n, n).transpose());
    Eigen::MatrixXd resid = Y - X * beta;
    m.omega = resid.transpose() * resid / static_cast<double>(rows);
    m.omega = 0.5 * (m.omega + m.omega.transpose().eval());
    return m;
}

enum class OrderCriterion { aic, bic };

inline OrderCriterion parse_criterion(const std::string& s) {
    if (s == "aic") return OrderCriterion::aic;
    if (s == "bic") return OrderCriterion::bic;
    throw UsageError("unknown order criterion '" + s + "' (expected aic or bic)");
}

/// argmin over p in [1, p_max] of the information criterion
///   AIC = T ln det Omega_p + 2 p n^2,   BIC = T ln det Omega_p + ln(T) p n^2,
/// ties broken toward smaller p.
inline int select_order(const MultivariateSeries& s, int p_max, OrderCriterion crit) {
    if (p_max < 1) throw UsageError("select_order: p_max must be >= 1");
    const double T = static_cast<double>(s.samples());
    const double n2 = static_cast<double>(s.channels() * s.channels());
    int best_p = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= p_max; ++p) {
        VarModel m = fit_var(s, p);
        const double penalty = (crit == OrderCriterion::aic ? 2.0 : std::log(T)) * p * n2;
        const double score = T * log_det_spd(m.omega, "select_order") + penalty;
        if (score < best) {
            best = score;
            best_p = p;
        }
    }
    return best_p;
}

/// Draw a trajectory from a stable VAR: Gaussian innovations through the
/// Cholesky factor of omega, zero initial state, burn-in discarded.
/// Deterministic for a given seed.
inline MultivariateSeries simulate_var(const VarModel& m, Eigen::Index T, Eigen::Index burn_in,
                                       std::uint64_t seed,
                                       std::vector<std::string> labels = {}) {
    m.validate();
    if (T < 1) throw UsageError("simulate_var: T must be >= 1");
    if (burn_in < 0) throw UsageError("simulate_var: burn_in must be >= 0");
    const Eigen::Index n = m.channels();
    const int p = m.order();

    Eigen::LLT<Eigen::MatrixXd> llt(m.omega);
    if (llt.info() != Eigen::Success)
        throw NumericError("simulate_var: omega has no Cholesky factor");
    const Eigen::MatrixXd chol = llt.matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Eigen::Index total = T + burn_in;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(total, n);
    Eigen::VectorXd eps(n);
    for (Eigen::Index t = 0; t < total; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) eps(i) = normal(rng);
        Eigen::VectorXd row = chol * eps;
        for (int k = 0; k < p; ++k) {
            if (t - 1 - k < 0) break;
            row.noalias() -= m.coeffs[static_cast<std::size_t>(k)] * u.row(t - 1 - k).transpose();
        }
        u.row(t) = row.transpose();
    }

    MultivariateSeries out;
    out.data = u.bottomRows(T);
    if (labels.empty())
        for (Eigen::Index c = 0; c < n; ++c) out.labels.push_back("ch" + std::to_string(c + 1));
    else
        out.labels = std::move(labels);
    if (static_cast<Eigen::Index>(out.labels.size()) != n)
        throw UsageError("simulate_var: label count mismatch");
    return out;
}

/// VAR(1) whose transition matrix is the 0/1 adjacency rescaled so its
/// spectral radius equals lambda_max.  Omega defaults to identity; network
/// construction overwrites it.
inline VarModel scale_to_radius(const Eigen::MatrixXd& adjacency, double lambda_max) {
    if (adjacency.rows() != adjacency.cols())
        throw UsageError("scale_to_radius: adjacency not square");
    if (lambda_max <= 0.0 || lambda_max >= 1.0)
        throw UsageError("scale_to_radius: lambda_max must lie in (0,1)");
    if (adjacency.cwiseAbs().maxCoeff() == 0.0)
        throw UsageError("scale_to_radius: adjacency has no edges");
    const double rho = spectral_radius_of(adjacency);
    if (rho <= 1e-12)
        throw NumericError("scale_to_radius: cannot scale nilpotent adjacency (spectral radius 0)");
    VarModel m;
    m.coeffs.push_back(-(lambda_max / rho) * adjacency);
    m.omega = Eigen::MatrixXd::Identity(adjacency.rows(), adjacency.cols());
    return m;
}

// --- JSON serialization: {"p": int, "coeffs": [[[...]]], "omega": [[...]]} ---

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw IoError("json matrix: expected nonempty array");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw IoError("json matrix: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

inline nlohmann::json to_json(const VarModel& m) {
    nlohmann::json j;
    j["p"] = m.order();
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& g : m.coeffs) coeffs.push_back(matrix_to_json(g));
    j["coeffs"] = std::move(coeffs);
    j["omega"] = matrix_to_json(m.omega);
    return j;
}

inline VarModel var_from_json(const nlohmann::json& j) {
    VarModel m;
    const int p = j.at("p").get<int>();
    for (const auto& g : j.at("coeffs")) m.coeffs.push_back(matrix_from_json(g));
    if (p != m.order()) throw IoError("var json: order does not match coefficient count");
    m.omega = matrix_from_json(j.at("omega"));
    return m;
}

}  // namespace megc
