// SPDX-License-Identifier: Apache-2.0
//
// Time- and frequency-domain causality measures for stationary Gaussian
// processes: Granger causality, its conditional variants obtained by
// minimum-entropy filtering (standard, separate and joint entropy
// minimization), transfer entropy, directed-information rate, and the
// instantaneous feedback / linear dependence measures.
//
// Every measure is computed from a single joint innovation-form model;
// sub-process models are always obtained by DARE factorization of that
// joint model, never refit.

#pragma once

#include "megc/common.hpp"
#include "megc/series.hpp"
#include "megc/state_space.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace megc {

enum class MeasureKind {
    gcm,
    cgcm_std,
    cgcm_sent,
    cgcm_jent,
    te,
    di_rate,
    inst_feedback,
    lin_dependence,
    cond_inst_feedback,
    cond_lin_dependence,
    fgcm_geweke,
    fgcm_ent,
    fcgcm_std_geweke,
    fcgcm_std_ent,
    fcgcm_sent,
    fcgcm_jent,
    f_inst_feedback,
    f_lin_dependence,
};

inline const std::vector<std::pair<MeasureKind, const char*>>& measure_kind_names() {
    static const std::vector<std::pair<MeasureKind, const char*>> names = {
        {MeasureKind::gcm, "GCM"},
        {MeasureKind::cgcm_std, "cGCM-Std"},
        {MeasureKind::cgcm_sent, "cGCM-SEnt"},
        {MeasureKind::cgcm_jent, "cGCM-JEnt"},
        {MeasureKind::te, "TE"},
        {MeasureKind::di_rate, "DI-rate"},
        {MeasureKind::inst_feedback, "InstFeedback"},
        {MeasureKind::lin_dependence, "LinDependence"},
        {MeasureKind::cond_inst_feedback, "cond-InstFeedback"},
        {MeasureKind::cond_lin_dependence, "cond-LinDependence"},
        {MeasureKind::fgcm_geweke, "fGCM-Geweke"},
        {MeasureKind::fgcm_ent, "fGCM-Ent"},
        {MeasureKind::fcgcm_std_geweke, "fcGCM-Std-Geweke"},
        {MeasureKind::fcgcm_std_ent, "fcGCM-Std-Ent"},
        {MeasureKind::fcgcm_sent, "fcGCM-SEnt"},
        {MeasureKind::fcgcm_jent, "fcGCM-JEnt"},
        {MeasureKind::f_inst_feedback, "f-InstFeedback"},
        {MeasureKind::f_lin_dependence, "f-LinDependence"},
    };
    return names;
}

inline std::string to_string(MeasureKind k) {
    for (const auto& [kind, name] : measure_kind_names())
        if (kind == k) return name;
    throw UsageError("unknown measure kind");
}

inline MeasureKind parse_measure_kind(const std::string& s) {
    for (const auto& [kind, name] : measure_kind_names())
        if (s == name) return kind;
    std::string valid;
    for (const auto& [kind, name] : measure_kind_names()) {
        if (!valid.empty()) valid += ", ";
        valid += name;
    }
    throw UsageError("unknown measure kind '" + s + "' (valid: " + valid + ")");
}

inline bool is_frequency_kind(MeasureKind k) {
    switch (k) {
        case MeasureKind::fgcm_geweke:
        case MeasureKind::fgcm_ent:
        case MeasureKind::fcgcm_std_geweke:
        case MeasureKind::fcgcm_std_ent:
        case MeasureKind::fcgcm_sent:
        case MeasureKind::fcgcm_jent:
        case MeasureKind::f_inst_feedback:
        case MeasureKind::f_lin_dependence:
            return true;
        default:
            return false;
    }
}

inline bool is_conditional_kind(MeasureKind k) {
    switch (k) {
        case MeasureKind::cgcm_std:
        case MeasureKind::cgcm_sent:
        case MeasureKind::cgcm_jent:
        case MeasureKind::cond_inst_feedback:
        case MeasureKind::cond_lin_dependence:
        case MeasureKind::fcgcm_std_geweke:
        case MeasureKind::fcgcm_std_ent:
        case MeasureKind::fcgcm_sent:
        case MeasureKind::fcgcm_jent:
            return true;
        default:
            return false;
    }
}

struct MeasureValue {
    MeasureKind kind;
    double value = 0.0;
    std::vector<int> source, target, conditioning;
};

/// Scalar-valued frequency curve with its trapezoid mean over the grid.
struct FrequencyMeasure {
    MeasureKind kind;
    Eigen::VectorXd thetas;
    Eigen::VectorXd values;
    double mean_value = 0.0;
    std::vector<int> source, target, conditioning;
};

/// Average of the piecewise-linear interpolant of (thetas, values) over
/// the band [lo, hi].
inline double band_average(const Eigen::VectorXd& thetas, const Eigen::VectorXd& values,
                           double lo, double hi) {
    if (thetas.size() != values.size() || thetas.size() < 2)
        throw UsageError("band_average: malformed curve");
    if (!(lo < hi)) throw UsageError("band_average: empty band");
    const double a = std::max(lo, thetas(0));
    const double b = std::min(hi, thetas(thetas.size() - 1));
    if (!(a < b)) throw UsageError("band_average: band does not overlap the grid");
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < thetas.size(); ++i) {
        const double t0 = thetas(i), t1 = thetas(i + 1);
        const double s0 = std::max(t0, a), s1 = std::min(t1, b);
        if (s0 >= s1) continue;
        auto interp = [&](double t) {
            return values(i) + (values(i + 1) - values(i)) * (t - t0) / (t1 - t0);
        };
        acc += 0.5 * (interp(s0) + interp(s1)) * (s1 - s0);
    }
    return acc / (b - a);
}

inline double band_average(const FrequencyMeasure& fm, double lo, double hi) {
    return band_average(fm.thetas, fm.values, lo, hi);
}

namespace detail {

inline double log_abs_det(const Eigen::MatrixXcd& m) {
    if (m.size() == 1) return std::log(std::abs(m(0, 0)));
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
    return s;
}

/// Joint model with outputs arranged as [x..., y..., z...].  When the
/// partition does not cover all channels of the input model the arranged
/// model is the DARE-factorized sub-process; when it covers all channels it
/// is an exact relabeling.
struct Arranged {
    StateSpaceModel ss;
    int nx = 0, ny = 0, nz = 0;

    int n() const { return nx + ny + nz; }
    Eigen::MatrixXd omega_block(int r0, int len) const { return ss.omega.block(r0, r0, len, len); }
};

inline Arranged arrange(const StateSpaceModel& joint, const Partition& p) {
    p.validate(joint.channels());
    std::vector<int> idx;
    idx.insert(idx.end(), p.x.begin(), p.x.end());
    idx.insert(idx.end(), p.y.begin(), p.y.end());
    idx.insert(idx.end(), p.z.begin(), p.z.end());
    Arranged a;
    a.nx = p.nx();
    a.ny = p.ny();
    a.nz = p.nz();
    if (static_cast<Eigen::Index>(idx.size()) == joint.channels())
        a.ss = reorder_outputs(joint, idx);
    else
        a.ss = subprocess_model(joint, idx);
    return a;
}

inline std::vector<int> range_indices(int r0, int len) {
    std::vector<int> v(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) v[static_cast<std::size_t>(i)] = r0 + i;
    return v;
}

/// ln |det G_rr(e^{i theta})| on the grid, where G = H^{-1} is the inverse
/// representation of ss and rr is the diagonal block [r0, r0+len).  Throws
/// when the block lacks a stable inverse (the minimum-entropy filter
/// precondition).
inline Eigen::VectorXd log_abs_det_g_block(const StateSpaceModel& ss, int r0, int len,
                                           const Eigen::VectorXd& grid) {
    Realization g = inverse_representation(ss);
    Realization block{g.A, g.B.middleCols(r0, len), g.C.middleRows(r0, len),
                      Eigen::MatrixXd::Identity(len, len)};
    if (spectral_radius_of(block.A - block.B * block.C) >= 1.0)
        throw NumericError("ME filter: diagonal block has no stable inverse");
    TransferEvaluator ev(block);
    Eigen::VectorXd out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) out(i) = log_abs_det(ev.eval(grid(i)));
    return out;
}

/// ln det of the [r0, r0+len) diagonal block of the PSD of ss, on the grid.
inline Eigen::VectorXd log_det_psd_block(const StateSpaceModel& ss, int r0, int len,
                                         const Eigen::VectorXd& grid) {
    const Eigen::Index n = ss.channels();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(len, n);
    d.middleCols(r0, len).setIdentity();
    Realization rows{ss.A, ss.B, ss.C.middleRows(r0, len), d};
    TransferEvaluator ev(rows);
    const Eigen::MatrixXcd omega_c = ss.omega.cast<std::complex<double>>();
    Eigen::VectorXd out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd h = ev.eval(grid(i));
        Eigen::MatrixXcd s = h * omega_c * h.adjoint();
        out(i) = log_det_hermitian(0.5 * (s + s.adjoint().eval()), "log_det_psd_block");
    }
    return out;
}

inline FrequencyMeasure make_frequency_measure(MeasureKind kind, const Partition& p,
                                               const Eigen::VectorXd& grid,
                                               Eigen::VectorXd values) {
    FrequencyMeasure fm;
    fm.kind = kind;
    fm.thetas = grid;
    fm.values = std::move(values);
    fm.mean_value = trapezoid_average(fm.thetas, fm.values);
    fm.source = p.y;
    fm.target = p.x;
    fm.conditioning = p.z;
    return fm;
}

inline MeasureValue make_measure(MeasureKind kind, const Partition& p, double value) {
    MeasureValue mv;
    mv.kind = kind;
    mv.value = value;
    mv.source = p.y;
    mv.target = p.x;
    mv.conditioning = p.z;
    return mv;
}

/// Augmented realization whose outputs are the x innovations of the (x,z)
/// sub-model stacked with the y innovations of the (y,z) sub-model, driven
/// by the joint innovation process.  The separate-entropy conditional
/// measure is the Granger causality between those two innovation processes.
///
/// The direct cascade has 3m states (joint filter plus two sub-model
/// filters), but the outputs only read the differences d~ = xi - xi~ and
/// d^ = xi - xi^, and since B_a C = B~ C~ those differences evolve
/// autonomously:  d~' = (A - B~C~) d~ + (B - B_a) e.  The joint state is
/// unobservable, so the exact realization below has 2m states.
inline RawStateSpace augmented_raw(const Arranged& m, const StateSpaceModel& sub_xz,
                                   const StateSpaceModel& sub_yz) {
    const Eigen::Index ms = m.ss.state_dim();
    const int nx = m.nx, ny = m.ny, nz = m.nz;
    const int n = m.n();

    Eigen::MatrixXd b_a = Eigen::MatrixXd::Zero(ms, n);
    b_a.middleCols(0, nx) = sub_xz.B.middleCols(0, nx);
    if (nz > 0) b_a.middleCols(nx + ny, nz) = sub_xz.B.middleCols(nx, nz);
    Eigen::MatrixXd b_b = Eigen::MatrixXd::Zero(ms, n);
    b_b.middleCols(nx, ny) = sub_yz.B.middleCols(0, ny);
    if (nz > 0) b_b.middleCols(nx + ny, nz) = sub_yz.B.middleCols(ny, nz);

    RawStateSpace raw;
    raw.A = Eigen::MatrixXd::Zero(2 * ms, 2 * ms);
    raw.A.block(0, 0, ms, ms) = m.ss.A - sub_xz.B * sub_xz.C;
    raw.A.block(ms, ms, ms, ms) = m.ss.A - sub_yz.B * sub_yz.C;

    raw.B.resize(2 * ms, n);
    raw.B.topRows(ms) = m.ss.B - b_a;
    raw.B.bottomRows(ms) = m.ss.B - b_b;

    raw.C = Eigen::MatrixXd::Zero(nx + ny, 2 * ms);
    raw.C.block(0, 0, nx, ms) = m.ss.C.middleRows(0, nx);
    raw.C.block(nx, ms, ny, ms) = m.ss.C.middleRows(nx, ny);

    raw.D = Eigen::MatrixXd::Zero(nx + ny, n);
    raw.D.block(0, 0, nx, nx).setIdentity();
    raw.D.block(nx, nx, ny, ny).setIdentity();

    raw.noise_cov = m.ss.omega;
    return raw;
}

/// Realization of the joint-entropy residual ((x;y) after the joint ME
/// filter on z): the inverse of the (x,y) diagonal block of G(L).
inline Realization jent_reduced(const Arranged& m) {
    const int nx = m.nx, ny = m.ny, nz = m.nz;
    Eigen::MatrixXd a_r = m.ss.A;
    if (nz > 0)
        a_r -= m.ss.B.middleCols(nx + ny, nz) * m.ss.C.middleRows(nx + ny, nz);
    if (spectral_radius_of(a_r) >= 1.0)
        throw NumericError("cgcm_jent: rho(A - Bz Cz) >= 1, reduced system unstable");
    return {std::move(a_r), m.ss.B.middleCols(0, nx + ny), m.ss.C.middleRows(0, nx + ny),
            Eigen::MatrixXd::Identity(nx + ny, nx + ny)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pairwise (unconditional) measures
// ---------------------------------------------------------------------------

/// Granger causality from y to x: ln det Sigma_xx - ln det Omega_xx, with
/// Sigma_xx the innovation covariance of the x process alone and Omega_xx
/// the x block of the (x,y) joint innovation covariance.
inline MeasureValue gcm_time(const StateSpaceModel& joint, const Partition& p) {
    if (!p.z.empty()) throw UsageError("gcm_time: z must be empty");
    detail::Arranged m = detail::arrange(joint, p);
    StateSpaceModel marg = subprocess_model(m.ss, detail::range_indices(0, m.nx));
    const double v = log_det_spd(marg.omega, "gcm_time") -
                     log_det_spd(m.omega_block(0, m.nx), "gcm_time");
    return detail::make_measure(MeasureKind::gcm, p, v);
}

/// Minimum-entropy frequency decomposition of the GCM:
/// f(theta) = ln det S_x - ln det S_{x||y}.  May be negative at some
/// frequencies; its mean over [0, pi] equals the time-domain GCM.
inline FrequencyMeasure fgcm_ent(const StateSpaceModel& joint, const Partition& p,
                                 const Eigen::VectorXd& grid) {
    if (!p.z.empty()) throw UsageError("fgcm_ent: z must be empty");
    detail::Arranged m = detail::arrange(joint, p);
    const double ld_omega_xx = log_det_spd(m.omega_block(0, m.nx), "fgcm_ent");
    Eigen::VectorXd sx = detail::log_det_psd_block(m.ss, 0, m.nx, grid);
    Eigen::VectorXd gxx = detail::log_abs_det_g_block(m.ss, 0, m.nx, grid);
    Eigen::VectorXd f = sx.array() - ld_omega_xx + 2.0 * gxx.array();
    return detail::make_frequency_measure(MeasureKind::fgcm_ent, p, grid, std::move(f));
}

/// Geweke's frequency-domain GCM; pointwise nonnegative with the same mean.
inline FrequencyMeasure fgcm_geweke(const StateSpaceModel& joint, const Partition& p,
                                    const Eigen::VectorXd& grid) {
    if (!p.z.empty()) throw UsageError("fgcm_geweke: z must be empty");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny;
    const Eigen::MatrixXd oxx = m.omega_block(0, nx);
    const Eigen::MatrixXd oyy = m.omega_block(nx, ny);
    const Eigen::MatrixXd oyx = m.ss.omega.block(nx, 0, ny, nx);
    Eigen::MatrixXd partial = oyy - oyx * Eigen::LDLT<Eigen::MatrixXd>(oxx).solve(oyx.transpose());
    const Eigen::MatrixXcd partial_c = partial.cast<std::complex<double>>();
    const Eigen::MatrixXcd omega_c = m.ss.omega.cast<std::complex<double>>();

    TransferEvaluator h(transfer_of(m.ss));
    Eigen::VectorXd f(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd hv = h.eval(grid(i));
        const Eigen::MatrixXcd hx = hv.topRows(nx);
        Eigen::MatrixXcd s_x = hx * omega_c * hx.adjoint();
        s_x = 0.5 * (s_x + s_x.adjoint().eval());
        const Eigen::MatrixXcd hxy = hv.block(0, nx, nx, ny);
        Eigen::MatrixXcd rem = s_x - hxy * partial_c * hxy.adjoint();
        rem = 0.5 * (rem + rem.adjoint().eval());
        f(i) = log_det_hermitian(s_x, "fgcm_geweke") - log_det_hermitian(rem, "fgcm_geweke");
    }
    return detail::make_frequency_measure(MeasureKind::fgcm_geweke, p, grid, std::move(f));
}

// ---------------------------------------------------------------------------
// Conditional measures
// ---------------------------------------------------------------------------

/// Geweke's conditional GCM: ln det Omega~_xx - ln det Omega_xx, the
/// entropy-rate drop of the x residual when y's past joins the predictor.
inline MeasureValue cgcm_std_time(const StateSpaceModel& joint, const Partition& p) {
    if (p.z.empty()) throw UsageError("cgcm_std_time: z must be nonempty");
    detail::Arranged m = detail::arrange(joint, p);
    std::vector<int> xz = detail::range_indices(0, m.nx);
    for (int i = 0; i < m.nz; ++i) xz.push_back(m.nx + m.ny + i);
    StateSpaceModel sub_xz = subprocess_model(m.ss, xz);
    const double v = log_det_spd(sub_xz.omega.block(0, 0, m.nx, m.nx), "cgcm_std_time") -
                     log_det_spd(m.omega_block(0, m.nx), "cgcm_std_time");
    return detail::make_measure(MeasureKind::cgcm_std, p, v);
}

/// f(theta) = ln det S_{x||z} - ln det S_{x||yz}; mean equals cgcm_std_time.
inline FrequencyMeasure fcgcm_std_ent(const StateSpaceModel& joint, const Partition& p,
                                      const Eigen::VectorXd& grid) {
    if (p.z.empty()) throw UsageError("fcgcm_std_ent: z must be nonempty");
    detail::Arranged m = detail::arrange(joint, p);
    std::vector<int> xz = detail::range_indices(0, m.nx);
    for (int i = 0; i < m.nz; ++i) xz.push_back(m.nx + m.ny + i);
    StateSpaceModel sub_xz = subprocess_model(m.ss, xz);

    const double ld_tilde = log_det_spd(sub_xz.omega.block(0, 0, m.nx, m.nx), "fcgcm_std_ent");
    const double ld_joint = log_det_spd(m.omega_block(0, m.nx), "fcgcm_std_ent");
    Eigen::VectorXd g_tilde = detail::log_abs_det_g_block(sub_xz, 0, m.nx, grid);
    Eigen::VectorXd g_joint = detail::log_abs_det_g_block(m.ss, 0, m.nx, grid);
    Eigen::VectorXd f =
        (ld_tilde - 2.0 * g_tilde.array()) - (ld_joint - 2.0 * g_joint.array());
    return detail::make_frequency_measure(MeasureKind::fcgcm_std_ent, p, grid, std::move(f));
}

/// Geweke's original frequency-domain conditional GCM, computed by
/// composing the (x,z) sub-model whitening blocks with the joint H(L).
inline FrequencyMeasure fcgcm_std_geweke(const StateSpaceModel& joint, const Partition& p,
                                         const Eigen::VectorXd& grid) {
    if (p.z.empty()) throw UsageError("fcgcm_std_geweke: z must be nonempty");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny, nz = m.nz, n = m.n();
    std::vector<int> xz = detail::range_indices(0, nx);
    for (int i = 0; i < nz; ++i) xz.push_back(nx + ny + i);
    StateSpaceModel sub_xz = subprocess_model(m.ss, xz);

    const Eigen::MatrixXd omega_tilde_xx = sub_xz.omega.block(0, 0, nx, nx);
    const double ld_tilde = log_det_spd(omega_tilde_xx, "fcgcm_std_geweke");
    const Eigen::MatrixXcd omega_tilde_c = omega_tilde_xx.cast<std::complex<double>>();

    // Omega_{yz|x}: covariance of the (y,z) joint innovations given the x
    // innovation, from the joint model.
    const Eigen::MatrixXd o_rest = m.ss.omega.block(nx, nx, ny + nz, ny + nz);
    const Eigen::MatrixXd o_rx = m.ss.omega.block(nx, 0, ny + nz, nx);
    const Eigen::MatrixXd oxx = m.omega_block(0, nx);
    Eigen::MatrixXd o_cond =
        o_rest - o_rx * Eigen::LDLT<Eigen::MatrixXd>(oxx).solve(o_rx.transpose());
    const Eigen::MatrixXcd o_cond_c = o_cond.cast<std::complex<double>>();

    TransferEvaluator h_eval(transfer_of(m.ss));
    TransferEvaluator g_tilde_eval(inverse_representation(sub_xz));
    Eigen::VectorXd f(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd hv = h_eval.eval(grid(i));
        const Eigen::MatrixXcd gv = g_tilde_eval.eval(grid(i));
        // x rows of P(L) = [G~_xx  0  G~_xz] * H(L), columns y and z.
        Eigen::MatrixXcd p_rest = gv.block(0, 0, nx, nx) * hv.block(0, nx, nx, ny + nz);
        if (nz > 0)
            p_rest += gv.block(0, nx, nx, nz) * hv.block(nx + ny, nx, nz, ny + nz);
        Eigen::MatrixXcd rem = omega_tilde_c - p_rest * o_cond_c * p_rest.adjoint();
        rem = 0.5 * (rem + rem.adjoint().eval());
        f(i) = ld_tilde - log_det_hermitian(rem, "fcgcm_std_geweke");
    }
    return detail::make_frequency_measure(MeasureKind::fcgcm_std_geweke, p, grid, std::move(f));
}

/// Separate-entropy conditional GCM: both x and y are first ME-filtered on
/// z, then the causality between the two filtered processes is measured.
/// Computed through the augmented realization of the sub-model innovations.
inline std::pair<MeasureValue, FrequencyMeasure> cgcm_sent(const StateSpaceModel& joint,
                                                           const Partition& p,
                                                           const Eigen::VectorXd& grid) {
    if (p.z.empty()) throw UsageError("cgcm_sent: z must be nonempty");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny, nz = m.nz;
    std::vector<int> xz = detail::range_indices(0, nx);
    for (int i = 0; i < nz; ++i) xz.push_back(nx + ny + i);
    std::vector<int> yz = detail::range_indices(nx, ny);
    for (int i = 0; i < nz; ++i) yz.push_back(nx + ny + i);
    StateSpaceModel sub_xz = subprocess_model(m.ss, xz);
    StateSpaceModel sub_yz = subprocess_model(m.ss, yz);

    RawStateSpace raw = detail::augmented_raw(m, sub_xz, sub_yz);
    DareSolution sol = solve_dare(raw);

    // The (x,z) innovation is a white process, so its one-step prediction
    // variance is its covariance block.
    const double ld_tilde = log_det_spd(sub_xz.omega.block(0, 0, nx, nx), "cgcm_sent");
    const double ld_aug = log_det_spd(sol.sigma.block(0, 0, nx, nx), "cgcm_sent");
    const double value = ld_tilde - ld_aug;

    StateSpaceModel aug;
    aug.A = std::move(raw.A);
    aug.B = std::move(sol.K);
    aug.C = std::move(raw.C);
    aug.omega = std::move(sol.sigma);
    Eigen::VectorXd g_aug = detail::log_abs_det_g_block(aug, 0, nx, grid);
    Eigen::VectorXd f = value + 2.0 * g_aug.array();

    return {detail::make_measure(MeasureKind::cgcm_sent, p, value),
            detail::make_frequency_measure(MeasureKind::fcgcm_sent, p, grid, std::move(f))};
}

/// Joint-entropy conditional GCM: the (x,y) pair is jointly ME-filtered on
/// z (the inverse of the (x,y) block of G), then y's contribution to x is
/// measured inside that reduced process.
inline std::pair<MeasureValue, FrequencyMeasure> cgcm_jent(const StateSpaceModel& joint,
                                                           const Partition& p,
                                                           const Eigen::VectorXd& grid) {
    if (p.z.empty()) throw UsageError("cgcm_jent: z must be nonempty");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny;
    Realization red = detail::jent_reduced(m);
    const Eigen::MatrixXd q_r = m.ss.omega.block(0, 0, nx + ny, nx + ny);

    RawStateSpace raw;
    raw.A = red.A;
    raw.B = red.B;
    raw.C = red.C.topRows(nx);
    raw.D = Eigen::MatrixXd::Zero(nx, nx + ny);
    raw.D.leftCols(nx).setIdentity();
    raw.noise_cov = q_r;
    DareSolution sol = solve_dare(raw);

    const double ld_omega_xx = log_det_spd(m.omega_block(0, nx), "cgcm_jent");
    const double value = log_det_spd(sol.sigma, "cgcm_jent") - ld_omega_xx;

    // S_{x^JEnt||z} on the grid, from the x rows of the reduced realization.
    Realization rows{red.A, red.B, red.C.topRows(nx), raw.D};
    TransferEvaluator ev(rows);
    const Eigen::MatrixXcd q_c = q_r.cast<std::complex<double>>();
    Eigen::VectorXd s_red(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd t = ev.eval(grid(i));
        Eigen::MatrixXcd s = t * q_c * t.adjoint();
        s = 0.5 * (s + s.adjoint().eval());
        s_red(i) = log_det_hermitian(s, "cgcm_jent");
    }
    Eigen::VectorXd g_joint = detail::log_abs_det_g_block(m.ss, 0, nx, grid);
    Eigen::VectorXd f = s_red.array() - (ld_omega_xx - 2.0 * g_joint.array());

    return {detail::make_measure(MeasureKind::cgcm_jent, p, value),
            detail::make_frequency_measure(MeasureKind::fcgcm_jent, p, grid, std::move(f))};
}

// ---------------------------------------------------------------------------
// Information-theoretic forms
// ---------------------------------------------------------------------------

/// Transfer entropy from y to x (conditional on z when z is nonempty):
/// the entropy-rate difference of the two prediction residuals, which for
/// Gaussian processes is exactly half the corresponding GCM.
inline MeasureValue transfer_entropy(const StateSpaceModel& joint, const Partition& p) {
    detail::Arranged m = detail::arrange(joint, p);
    StateSpaceModel reduced;
    if (p.z.empty()) {
        reduced = subprocess_model(m.ss, detail::range_indices(0, m.nx));
    } else {
        std::vector<int> xz = detail::range_indices(0, m.nx);
        for (int i = 0; i < m.nz; ++i) xz.push_back(m.nx + m.ny + i);
        reduced = subprocess_model(m.ss, xz);
    }
    const double h_without = entropy_rate(reduced.omega.block(0, 0, m.nx, m.nx));
    const double h_with = entropy_rate(m.omega_block(0, m.nx));
    MeasureValue mv = detail::make_measure(MeasureKind::te, p, h_without - h_with);
    return mv;
}

/// Directed-information rate from y to x, which also includes the
/// instantaneous coupling: 1/2 ln det Sigma_xx / det(Omega_xx|y).
inline MeasureValue directed_info_rate(const StateSpaceModel& joint, const Partition& p) {
    if (!p.z.empty()) throw UsageError("directed_info_rate: z must be empty");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny;
    StateSpaceModel marg = subprocess_model(m.ss, detail::range_indices(0, nx));
    const Eigen::MatrixXd oxx = m.omega_block(0, nx);
    const Eigen::MatrixXd oyy = m.omega_block(nx, ny);
    const Eigen::MatrixXd oxy = m.ss.omega.block(0, nx, nx, ny);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(oyy);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericError("directed_info_rate: singular Omega_yy");
    Eigen::MatrixXd cond = oxx - oxy * ldlt.solve(oxy.transpose());
    const double v = 0.5 * (log_det_spd(marg.omega, "directed_info_rate") -
                            log_det_spd(cond, "directed_info_rate"));
    return detail::make_measure(MeasureKind::di_rate, p, v);
}

// ---------------------------------------------------------------------------
// Instantaneous feedback and linear dependence
// ---------------------------------------------------------------------------

enum class CondVariant { standard, separate, joint };

inline CondVariant parse_variant(const std::string& s) {
    if (s == "Std" || s == "std") return CondVariant::standard;
    if (s == "SEnt" || s == "sent") return CondVariant::separate;
    if (s == "JEnt" || s == "jent") return CondVariant::joint;
    throw UsageError("unknown variant '" + s + "' (expected Std, SEnt or JEnt)");
}

struct FeedbackDependence {
    MeasureValue feedback;      // F_{x.y} or F_{x.y|z}
    MeasureValue dependence;    // F_{x,y} or F_{x,y|z}
    FrequencyMeasure f_feedback;
    FrequencyMeasure f_dependence;
};

/// Geweke's instantaneous-feedback and linear-dependence measures with
/// their minimum-entropy frequency versions.  Conditional variants follow
/// the Std / SEnt / JEnt substitutions of the residual processes; the
/// decomposition F_{x,y|z} = F_{y->x|z} + F_{x->y|z} + F_{x.y|z} holds per
/// variant.
inline FeedbackDependence feedback_dependence(const StateSpaceModel& joint, const Partition& p,
                                              CondVariant variant, bool conditional,
                                              const Eigen::VectorXd& grid) {
    if (conditional && p.z.empty())
        throw UsageError("feedback_dependence: conditional requires nonempty z");
    if (!conditional && !p.z.empty())
        throw UsageError("feedback_dependence: unconditional requires empty z");
    detail::Arranged m = detail::arrange(joint, p);
    const int nx = m.nx, ny = m.ny;

    FeedbackDependence out;
    if (!conditional) {
        StateSpaceModel marg_x = subprocess_model(m.ss, detail::range_indices(0, nx));
        StateSpaceModel marg_y = subprocess_model(m.ss, detail::range_indices(nx, ny));
        const double ld_oxx = log_det_spd(m.omega_block(0, nx), "feedback_dependence");
        const double ld_oyy = log_det_spd(m.omega_block(nx, ny), "feedback_dependence");
        const double ld_o = log_det_spd(m.ss.omega, "feedback_dependence");
        const double fb = ld_oxx + ld_oyy - ld_o;
        const double dep = log_det_spd(marg_x.omega, "feedback_dependence") +
                           log_det_spd(marg_y.omega, "feedback_dependence") - ld_o;

        Eigen::VectorXd sxy(grid.size());
        {
            SpectralCurve psd = psd_eval(m.ss, grid);
            for (Eigen::Index i = 0; i < grid.size(); ++i)
                sxy(i) = log_det_hermitian(psd.values[static_cast<std::size_t>(i)],
                                           "feedback_dependence");
        }
        Eigen::VectorXd gx = detail::log_abs_det_g_block(m.ss, 0, nx, grid);
        Eigen::VectorXd gy = detail::log_abs_det_g_block(m.ss, nx, ny, grid);
        Eigen::VectorXd sx = detail::log_det_psd_block(m.ss, 0, nx, grid);
        Eigen::VectorXd sy = detail::log_det_psd_block(m.ss, nx, ny, grid);
        Eigen::VectorXd f_fb =
            (ld_oxx - 2.0 * gx.array()) + (ld_oyy - 2.0 * gy.array()) - sxy.array();
        Eigen::VectorXd f_dep = sx.array() + sy.array() - sxy.array();

        out.feedback = detail::make_measure(MeasureKind::inst_feedback, p, fb);
        out.dependence = detail::make_measure(MeasureKind::lin_dependence, p, dep);
        out.f_feedback =
            detail::make_frequency_measure(MeasureKind::f_inst_feedback, p, grid, std::move(f_fb));
        out.f_dependence = detail::make_frequency_measure(MeasureKind::f_lin_dependence, p, grid,
                                                          std::move(f_dep));
        return out;
    }

    const int nz = m.nz;
    std::vector<int> xz = detail::range_indices(0, nx);
    for (int i = 0; i < nz; ++i) xz.push_back(nx + ny + i);
    std::vector<int> yz = detail::range_indices(nx, ny);
    for (int i = 0; i < nz; ++i) yz.push_back(nx + ny + i);

    const double ld_oxx = log_det_spd(m.omega_block(0, nx), "feedback_dependence");
    const double ld_oyy = log_det_spd(m.omega_block(nx, ny), "feedback_dependence");
    const double ld_oxy = log_det_spd(m.ss.omega.block(0, 0, nx + ny, nx + ny),
                                      "feedback_dependence");

    // Residual spectrum of the jointly filtered (x;y) pair, common to all
    // variants.
    Realization red = detail::jent_reduced(m);
    const Eigen::MatrixXd q_r = m.ss.omega.block(0, 0, nx + ny, nx + ny);
    TransferEvaluator red_ev(red);
    const Eigen::MatrixXcd q_c = q_r.cast<std::complex<double>>();
    Eigen::VectorXd s_xy_given_z(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::MatrixXcd t = red_ev.eval(grid(i));
        Eigen::MatrixXcd s = t * q_c * t.adjoint();
        s = 0.5 * (s + s.adjoint().eval());
        s_xy_given_z(i) = log_det_hermitian(s, "feedback_dependence");
    }

    double fb = 0.0, dep = 0.0;
    Eigen::VectorXd f_fb, f_dep;
    if (variant == CondVariant::standard || variant == CondVariant::joint) {
        // F_{x.y|z}: residuals x||yz and y||xz have innovation covariance
        // Omega_xx and Omega_yy (the joint-entropy substitution leaves them
        // unchanged).
        Eigen::VectorXd gx = detail::log_abs_det_g_block(m.ss, 0, nx, grid);
        Eigen::VectorXd gy = detail::log_abs_det_g_block(m.ss, nx, ny, grid);
        fb = ld_oxx + ld_oyy - ld_oxy;
        f_fb = (ld_oxx - 2.0 * gx.array()) + (ld_oyy - 2.0 * gy.array()) - s_xy_given_z.array();
    } else {
        // Separate-entropy substitution: the two directed SEnt residuals.
        Partition swapped;
        swapped.x = p.y;
        swapped.y = p.x;
        swapped.z = p.z;
        auto [mv_xy, fm_xy] = cgcm_sent(joint, p, grid);        // y -> x | z
        auto [mv_yx, fm_yx] = cgcm_sent(joint, swapped, grid);  // x -> y | z
        // ln det S_{x^SEnt||yz} = ln det S_{x||z} - f^SEnt_{y->x|z}
        StateSpaceModel sub_xz = subprocess_model(m.ss, xz);
        StateSpaceModel sub_yz = subprocess_model(m.ss, yz);
        const double ld_txx = log_det_spd(sub_xz.omega.block(0, 0, nx, nx), "feedback_dependence");
        const double ld_cyy = log_det_spd(sub_yz.omega.block(0, 0, ny, ny), "feedback_dependence");
        Eigen::VectorXd g_txx = detail::log_abs_det_g_block(sub_xz, 0, nx, grid);
        Eigen::VectorXd g_cyy = detail::log_abs_det_g_block(sub_yz, 0, ny, grid);
        Eigen::VectorXd s_x_given_z = ld_txx - 2.0 * g_txx.array();
        Eigen::VectorXd s_y_given_z = ld_cyy - 2.0 * g_cyy.array();
        fb = (ld_txx - mv_xy.value) + (ld_cyy - mv_yx.value) - ld_oxy;
        f_fb = (s_x_given_z - fm_xy.values).array() + (s_y_given_z - fm_yx.values).array() -
               s_xy_given_z.array();
    }

    if (variant == CondVariant::joint) {
        // Marginal innovation variances of the jointly filtered pair.
        auto jent_sigma = [&](int r0, int len) {
            RawStateSpace raw;
            raw.A = red.A;
            raw.B = red.B;
            raw.C = red.C.middleRows(r0, len);
            raw.D = Eigen::MatrixXd::Zero(len, nx + ny);
            raw.D.middleCols(r0, len).setIdentity();
            raw.noise_cov = q_r;
            return solve_dare(raw).sigma;
        };
        const double ld_sx = log_det_spd(jent_sigma(0, nx), "feedback_dependence");
        const double ld_sy = log_det_spd(jent_sigma(nx, ny), "feedback_dependence");
        dep = ld_sx + ld_sy - ld_oxy;
        auto block_psd = [&](int r0, int len) {
            Realization rows{red.A, red.B, red.C.middleRows(r0, len),
                             Eigen::MatrixXd::Zero(len, nx + ny)};
            rows.D.middleCols(r0, len).setIdentity();
            TransferEvaluator ev(rows);
            Eigen::VectorXd out_curve(grid.size());
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
                const Eigen::MatrixXcd t = ev.eval(grid(i));
                Eigen::MatrixXcd s = t * q_c * t.adjoint();
                s = 0.5 * (s + s.adjoint().eval());
                out_curve(i) = log_det_hermitian(s, "feedback_dependence");
            }
            return out_curve;
        };
        f_dep = block_psd(0, nx) + block_psd(nx, ny) - s_xy_given_z;
    } else {
        // Std and SEnt share the first-stage residuals x||z and y||z.
        StateSpaceModel sub_xz = subprocess_model(m.ss, xz);
        StateSpaceModel sub_yz = subprocess_model(m.ss, yz);
        const double ld_txx = log_det_spd(sub_xz.omega.block(0, 0, nx, nx), "feedback_dependence");
        const double ld_cyy = log_det_spd(sub_yz.omega.block(0, 0, ny, ny), "feedback_dependence");
        dep = ld_txx + ld_cyy - ld_oxy;
        Eigen::VectorXd g_txx = detail::log_abs_det_g_block(sub_xz, 0, nx, grid);
        Eigen::VectorXd g_cyy = detail::log_abs_det_g_block(sub_yz, 0, ny, grid);
        f_dep = (ld_txx - 2.0 * g_txx.array()) + (ld_cyy - 2.0 * g_cyy.array()) -
                s_xy_given_z.array();
    }

    out.feedback = detail::make_measure(MeasureKind::cond_inst_feedback, p, fb);
    out.dependence = detail::make_measure(MeasureKind::cond_lin_dependence, p, dep);
    out.f_feedback = detail::make_frequency_measure(MeasureKind::f_inst_feedback, p, grid,
                                                    std::move(f_fb));
    out.f_dependence = detail::make_frequency_measure(MeasureKind::f_lin_dependence, p, grid,
                                                      std::move(f_dep));
    return out;
}

}  // namespace megc
