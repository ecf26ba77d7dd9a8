// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace megc {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs, unknown options, malformed requests.  CLI exit code 1.
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure: non-convergence, loss of definiteness, instability.
/// CLI exit code 2.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Filesystem / parsing trouble.  CLI exit code 3.
class IoError : public Error {
  public:
    using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

// Guard value used when a computed determinant lands in (-1e-10, 0]:
// we treat it as "numerically zero but nonnegative" instead of failing.
inline constexpr double kDetGuard = 1e-300;
inline constexpr double kDetNegativeTol = -1e-10;

inline double guarded_log(double det, const char* what) {
    if (det < kDetNegativeTol)
        throw NumericError(std::string(what) + ": determinant " + std::to_string(det) +
                           " is negative beyond tolerance");
    if (det <= 0.0) return std::log(kDetGuard);
    return std::log(det);
}

/// ln det of a real symmetric positive-definite matrix, Cholesky first,
/// LU determinant as the fallback when the matrix is not numerically PD.
inline double log_det_spd(const Eigen::MatrixXd& m, const char* what = "log_det_spd") {
    if (m.rows() != m.cols()) throw UsageError(std::string(what) + ": matrix not square");
    if (m.size() == 1) return guarded_log(m(0, 0), what);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(llt.matrixL()(i, i));
        return 2.0 * s;
    }
    return guarded_log(Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant(), what);
}

/// ln det of a complex Hermitian (nonnegative) matrix via pivoted LU.
/// The determinant of a Hermitian matrix is real; a noticeable imaginary
/// part means the input was not Hermitian.
inline double log_det_hermitian(const Eigen::MatrixXcd& m,
                                const char* what = "log_det_hermitian") {
    if (m.rows() != m.cols()) throw UsageError(std::string(what) + ": matrix not square");
    std::complex<double> det;
    if (m.size() == 1) {
        det = m(0, 0);
    } else {
        det = Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
    }
    const double scale = std::max(1.0, std::abs(det.real()));
    if (std::abs(det.imag()) > 1e-8 * scale)
        throw NumericError(std::string(what) + ": determinant has imaginary part " +
                           std::to_string(det.imag()));
    return guarded_log(det.real(), what);
}

inline double spectral_radius_of(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() != m.cols()) throw UsageError("spectral_radius_of: matrix not square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-10) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Smallest eigenvalue of a symmetric matrix; used for PD checks.
inline double min_eigenvalue_sym(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline void require_spd(const Eigen::MatrixXd& m, const char* what, double sym_tol = 1e-10) {
    if (!is_symmetric(m, sym_tol))
        throw NumericError(std::string(what) + ": matrix not symmetric");
    if (min_eigenvalue_sym(m) <= 0.0)
        throw NumericError(std::string(what) + ": matrix not positive definite");
}

/// splitmix64; used to derive independent per-draw generator seeds from
/// (seed, stream, index) so parallel schedules cannot change results.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0xbf58476d1ce4e5b9ULL * (c + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

/// Run fn(i) for i in [0, count) on up to n_threads workers.  Exceptions are
/// captured and the first one rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, unsigned n_threads, Fn&& fn) {
    if (count == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    n_threads = std::max(1u, std::min({n_threads, hw, static_cast<unsigned>(count)}));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace megc
