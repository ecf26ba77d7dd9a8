// SPDX-License-Identifier: Apache-2.0
//
// Innovation-form state-space representations and the spectral machinery
// built on them: PSD evaluation, Riccati-based spectral factorization,
// consistent sub-process extraction, entropy rates.

#pragma once

#include "megc/common.hpp"
#include "megc/var.hpp"

#include <complex>
#include <filesystem>
#include <fstream>
#include <utility>
#include <vector>

namespace megc {

/// Innovation form: xi_{t+1} = A xi_t + B e_t, u_t = C xi_t + e_t, with
/// cov(e) = omega.  The transfer function from e to u is
/// H(L) = I + C (I - A L)^{-1} B L and is minimum phase (A - B C stable).
struct StateSpaceModel {
    Eigen::MatrixXd A;      // m x m
    Eigen::MatrixXd B;      // m x n
    Eigen::MatrixXd C;      // n x m
    Eigen::MatrixXd omega;  // n x n

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index channels() const { return C.rows(); }

    void validate() const {
        const Eigen::Index m = state_dim();
        const Eigen::Index n = channels();
        if (A.cols() != m || B.rows() != m || C.cols() != m)
            throw UsageError("state space: shape mismatch");
        if (B.cols() != n || omega.rows() != n || omega.cols() != n)
            throw UsageError("state space: output dimension mismatch");
        require_spd(omega, "state space: omega");
        if (spectral_radius_of(A) >= 1.0) throw NumericError("state space: A unstable");
        if (spectral_radius_of(A - B * C) >= 1.0)
            throw NumericError("state space: A - BC unstable (not minimum phase)");
    }
};

/// A general transfer-function realization D + C (I - A L)^{-1} B L, used
/// both as DARE input (with a driving-noise covariance) and for inverse
/// representations.
struct Realization {
    Eigen::MatrixXd A, B, C, D;
};

struct RawStateSpace {
    Eigen::MatrixXd A, B, C, D;
    Eigen::MatrixXd noise_cov;
};

/// Sampled matrix-valued function of frequency on an ascending grid in [0, pi].
struct SpectralCurve {
    Eigen::VectorXd thetas;
    std::vector<Eigen::MatrixXcd> values;
};

inline Eigen::VectorXd uniform_grid(int points) {
    if (points < 2) throw UsageError("grid must have at least 2 points");
    Eigen::VectorXd g(points);
    for (int k = 0; k < points; ++k)
        g(k) = kPi * static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
}

/// Trapezoid average of scalar samples over their theta span.
inline double trapezoid_average(const Eigen::VectorXd& thetas, const Eigen::VectorXd& values) {
    if (thetas.size() != values.size() || thetas.size() < 2)
        throw UsageError("trapezoid_average: need matching grids with >= 2 points");
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < thetas.size(); ++i)
        acc += 0.5 * (values(i) + values(i + 1)) * (thetas(i + 1) - thetas(i));
    const double span = thetas(thetas.size() - 1) - thetas(0);
    if (span <= 0.0) throw UsageError("trapezoid_average: grid not ascending");
    return acc / span;
}

/// Companion embedding of a stable VAR(p): state (u_{t-1}; ...; u_{t-p}),
/// H(L) = G(L)^{-1} with state dimension n*p.
inline StateSpaceModel var_to_ss(const VarModel& m) {
    m.validate();
    const Eigen::Index n = m.channels();
    const int p = m.order();
    StateSpaceModel ss;
    ss.A = m.companion();
    ss.B = Eigen::MatrixXd::Zero(n * p, n);
    ss.B.topRows(n).setIdentity();
    ss.C.resize(n, n * p);
    for (int k = 0; k < p; ++k) ss.C.middleCols(k * n, n) = -m.coeffs[static_cast<std::size_t>(k)];
    ss.omega = m.omega;
    return ss;
}

inline Realization transfer_of(const StateSpaceModel& ss) {
    return {ss.A, ss.B, ss.C, Eigen::MatrixXd::Identity(ss.channels(), ss.channels())};
}

/// Realization of G(L) = H(L)^{-1}, valid when A - BC is stable.
inline Realization inverse_representation(const StateSpaceModel& ss) {
    Eigen::MatrixXd Ag = ss.A - ss.B * ss.C;
    if (spectral_radius_of(Ag) >= 1.0)
        throw NumericError("inverse_representation: minimum-phase violation (rho(A-BC) >= 1)");
    return {std::move(Ag), ss.B, -ss.C, Eigen::MatrixXd::Identity(ss.channels(), ss.channels())};
}

/// Evaluates D + C (I - A z)^{-1} B z at z = e^{i theta}.  The state matrix
/// is reduced to complex Schur form once so each grid point costs a single
/// triangular solve.
class TransferEvaluator {
  public:
    explicit TransferEvaluator(const Realization& r) : D_(r.D.cast<std::complex<double>>()) {
        const Eigen::Index m = r.A.rows();
        if (r.A.cols() != m || r.B.rows() != m || r.C.cols() != m)
            throw UsageError("TransferEvaluator: shape mismatch");
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(r.A.cast<std::complex<double>>());
        if (schur.info() != Eigen::Success)
            throw NumericError("TransferEvaluator: Schur decomposition failed");
        T_ = schur.matrixT();
        Bt_ = schur.matrixU().adjoint() * r.B.cast<std::complex<double>>();
        Ct_ = r.C.cast<std::complex<double>>() * schur.matrixU();
    }

    Eigen::MatrixXcd eval(double theta) const {
        const std::complex<double> z(std::cos(theta), std::sin(theta));
        const Eigen::Index m = T_.rows();
        Eigen::MatrixXcd lhs = -z * T_;
        lhs.diagonal().array() += 1.0;
        Eigen::MatrixXcd x = lhs.triangularView<Eigen::Upper>().solve(Bt_);
        return D_ + z * (Ct_ * x);
    }

    std::vector<Eigen::MatrixXcd> eval_grid(const Eigen::VectorXd& thetas) const {
        std::vector<Eigen::MatrixXcd> out;
        out.reserve(static_cast<std::size_t>(thetas.size()));
        for (Eigen::Index i = 0; i < thetas.size(); ++i) out.push_back(eval(thetas(i)));
        return out;
    }

  private:
    Eigen::MatrixXcd T_, Bt_, Ct_, D_;
};

/// S(theta) = H(e^{i theta}) Omega H(e^{i theta})^*, symmetrized to be
/// exactly Hermitian.
inline SpectralCurve psd_eval(const StateSpaceModel& ss, const Eigen::VectorXd& thetas) {
    for (Eigen::Index i = 0; i < thetas.size(); ++i)
        if (thetas(i) < -kPi - 1e-12 || thetas(i) > kPi + 1e-12)
            throw UsageError("psd_eval: theta outside [-pi, pi]");
    TransferEvaluator h(transfer_of(ss));
    const Eigen::MatrixXcd omega_c = ss.omega.cast<std::complex<double>>();
    SpectralCurve curve;
    curve.thetas = thetas;
    curve.values.reserve(static_cast<std::size_t>(thetas.size()));
    for (Eigen::Index i = 0; i < thetas.size(); ++i) {
        Eigen::MatrixXcd hv = h.eval(thetas(i));
        Eigen::MatrixXcd s = hv * omega_c * hv.adjoint();
        curve.values.push_back(0.5 * (s + s.adjoint().eval()));
    }
    return curve;
}

struct DareSolution {
    Eigen::MatrixXd P;      // state prediction-error covariance
    Eigen::MatrixXd K;      // steady-state gain
    Eigen::MatrixXd sigma;  // innovation covariance
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline Eigen::MatrixXd dare_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                 const Eigen::MatrixXd& BQB, const Eigen::MatrixXd& BQD,
                                 const Eigen::MatrixXd& DQD, const Eigen::MatrixXd& P,
                                 Eigen::MatrixXd* gain = nullptr,
                                 Eigen::MatrixXd* innovation = nullptr) {
    const Eigen::MatrixXd AP = A * P;
    const Eigen::MatrixXd PCt = P * C.transpose();
    Eigen::MatrixXd S = C * PCt + DQD;
    S = 0.5 * (S + S.transpose().eval());
    const Eigen::MatrixXd APC = A * PCt + BQD;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericError("solve_dare: singular innovation covariance");
    const Eigen::MatrixXd K = ldlt.solve(APC.transpose()).transpose();
    if (gain) *gain = K;
    if (innovation) *innovation = S;
    Eigen::MatrixXd next = AP * A.transpose() + BQB - K * APC.transpose();
    return 0.5 * (next + next.transpose().eval());
}

}  // namespace detail

/// Stabilizing solution of
///   P = A P A' + B Q B' - (A P C' + B Q D')(C P C' + D Q D')^{-1}(.)'
/// by fixed-point iteration from P_0 = B Q B'.  Converges when the relative
/// Frobenius change drops below 1e-12 (budget 20000 iterations); the result
/// must satisfy rho(A - K C) < 1 and a residual below 1e-9.
inline DareSolution solve_dare(const RawStateSpace& raw) {
    const Eigen::Index m = raw.A.rows();
    const Eigen::Index q = raw.B.cols();
    const Eigen::Index r = raw.C.rows();
    if (raw.A.cols() != m || raw.B.rows() != m || raw.C.cols() != m || raw.D.rows() != r ||
        raw.D.cols() != q || raw.noise_cov.rows() != q || raw.noise_cov.cols() != q)
        throw UsageError("solve_dare: shape mismatch");
    if (spectral_radius_of(raw.A) >= 1.0) throw NumericError("solve_dare: A unstable");

    const Eigen::MatrixXd BQ = raw.B * raw.noise_cov;
    const Eigen::MatrixXd BQB = BQ * raw.B.transpose();
    const Eigen::MatrixXd BQD = BQ * raw.D.transpose();
    const Eigen::MatrixXd DQD = raw.D * raw.noise_cov * raw.D.transpose();

    constexpr int kMaxIterations = 20000;
    constexpr double kRelTol = 1e-12;

    DareSolution sol;
    Eigen::MatrixXd P = BQB;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        Eigen::MatrixXd next = detail::dare_step(raw.A, raw.C, BQB, BQD, DQD, P);
        const double change = (next - P).norm();
        P = std::move(next);
        if (change <= kRelTol * std::max(1.0, P.norm())) break;
    }
    if (it >= kMaxIterations)
        throw NumericError("solve_dare: no convergence within iteration budget");

    Eigen::MatrixXd residual_mat =
        detail::dare_step(raw.A, raw.C, BQB, BQD, DQD, P, &sol.K, &sol.sigma) - P;
    sol.P = std::move(P);
    sol.iterations = it + 1;
    sol.residual = residual_mat.norm();
    if (sol.residual >= 1e-9)
        throw NumericError("solve_dare: residual " + std::to_string(sol.residual) +
                           " exceeds 1e-9");
    if (spectral_radius_of(raw.A - sol.K * raw.C) >= 1.0)
        throw NumericError("solve_dare: closed loop A - KC not stable");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.sigma, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e12)
        throw NumericError("solve_dare: innovation covariance singular or near singular");
    return sol;
}

/// Innovation-form model of the sub-process u[idx], obtained by restricting
/// the output rows of the joint model and re-factorizing with the DARE.
/// The state space (and A) is that of the joint model; only the gain and
/// innovation covariance change.
inline StateSpaceModel subprocess_model(const StateSpaceModel& ss, const std::vector<int>& idx) {
    if (idx.empty()) throw UsageError("subprocess_model: empty index set");
    const Eigen::Index n = ss.channels();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int i : idx) {
        if (i < 0 || i >= n) throw UsageError("subprocess_model: index out of range");
        if (used[static_cast<std::size_t>(i)]) throw UsageError("subprocess_model: duplicate index");
        used[static_cast<std::size_t>(i)] = true;
    }
    const Eigen::Index r = static_cast<Eigen::Index>(idx.size());

    RawStateSpace raw;
    raw.A = ss.A;
    raw.B = ss.B;
    raw.C.resize(r, ss.state_dim());
    raw.D = Eigen::MatrixXd::Zero(r, n);
    for (Eigen::Index k = 0; k < r; ++k) {
        raw.C.row(k) = ss.C.row(idx[static_cast<std::size_t>(k)]);
        raw.D(k, idx[static_cast<std::size_t>(k)]) = 1.0;
    }
    raw.noise_cov = ss.omega;

    DareSolution sol = solve_dare(raw);
    StateSpaceModel sub;
    sub.A = ss.A;
    sub.B = std::move(sol.K);
    sub.C = std::move(raw.C);
    sub.omega = std::move(sol.sigma);
    return sub;
}

/// Exact output reordering (a relabeling, no factorization): idx must be a
/// permutation of all channels.
inline StateSpaceModel reorder_outputs(const StateSpaceModel& ss, const std::vector<int>& idx) {
    const Eigen::Index n = ss.channels();
    if (static_cast<Eigen::Index>(idx.size()) != n)
        throw UsageError("reorder_outputs: index set must cover all channels");
    StateSpaceModel out;
    out.A = ss.A;
    out.B.resize(ss.state_dim(), n);
    out.C.resize(n, ss.state_dim());
    out.omega.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.B.col(k) = ss.B.col(idx[static_cast<std::size_t>(k)]);
        out.C.row(k) = ss.C.row(idx[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            out.omega(a, b) = ss.omega(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    return out;
}

/// Differential entropy rate of a Gaussian process with one-step prediction
/// error covariance sigma: h = n/2 (1 + ln 2 pi) + 1/2 ln det sigma.
inline double entropy_rate(const Eigen::MatrixXd& sigma) {
    require_spd(sigma, "entropy_rate: sigma");
    const double n = static_cast<double>(sigma.rows());
    return 0.5 * n * (1.0 + std::log(2.0 * kPi)) + 0.5 * log_det_spd(sigma, "entropy_rate");
}

/// CSV serialization of a sampled curve: column 1 is theta; a scalar curve
/// contributes one value column, a matrix curve the row-major flattened
/// re/im parts of each entry.
inline void save_curve_csv(const SpectralCurve& curve, const std::filesystem::path& path) {
    if (curve.values.empty() || curve.values.size() != static_cast<std::size_t>(curve.thetas.size()))
        throw UsageError("save_curve_csv: malformed curve");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    const Eigen::Index r = curve.values.front().rows();
    const Eigen::Index c = curve.values.front().cols();
    out << "theta";
    if (r == 1 && c == 1) {
        out << ",value";
    } else {
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                out << ",re_" << i << "_" << j << ",im_" << i << "_" << j;
    }
    out << "\n";
    char buf[64];
    for (Eigen::Index k = 0; k < curve.thetas.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", curve.thetas(k));
        out << buf;
        const auto& v = curve.values[static_cast<std::size_t>(k)];
        if (v.rows() != r || v.cols() != c) throw UsageError("save_curve_csv: ragged curve");
        if (r == 1 && c == 1) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::real(v(0, 0)));
            out << "," << buf;
        } else {
            for (Eigen::Index i = 0; i < r; ++i)
                for (Eigen::Index j = 0; j < c; ++j) {
                    std::snprintf(buf, sizeof(buf), "%.17g", std::real(v(i, j)));
                    out << "," << buf;
                    std::snprintf(buf, sizeof(buf), "%.17g", std::imag(v(i, j)));
                    out << "," << buf;
                }
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// (1/pi) * integral over [0, pi] of ln det S(theta), trapezoid rule on the
/// curve's grid.  By the Kolmogorov-Szego identity this equals ln det of the
/// innovation covariance of the process with PSD S.
inline double geometric_mean_logdet(const SpectralCurve& curve) {
    const Eigen::Index n = curve.thetas.size();
    if (static_cast<Eigen::Index>(curve.values.size()) != n || n < 2)
        throw UsageError("geometric_mean_logdet: malformed curve");
    Eigen::VectorXd ld(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ld(i) = log_det_hermitian(curve.values[static_cast<std::size_t>(i)],
                                  "geometric_mean_logdet");
    return trapezoid_average(curve.thetas, ld);
}

}  // namespace megc
