// SPDX-License-Identifier: Apache-2.0
//
// All-ordered-pairs measure matrices from a single joint model.  The engine
// shares every reusable factorization across pairs: per-channel marginals,
// leave-one-out sub-models, and the joint transfer-function grids.  Entry
// (i, j) of a result is the measure from channel j to channel i; conditional
// measures condition on all remaining channels.

#pragma once

#include "megc/causality.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace megc {

struct AllPairsOptions {
    Eigen::VectorXd grid;      // defaults to uniform_grid(512) when empty
    double band_lo = 0.0;      // averaging band for frequency measures
    double band_hi = 0.5 * kPi;
    unsigned threads = 1;
    bool with_curves = false;  // keep per-pair curves (frequency kinds only)
};

struct AllPairsResult {
    MeasureKind kind;
    Eigen::MatrixXd values;  // n x n, diagonal zero, (i,j) = j -> i
    Eigen::VectorXd thetas;
    std::map<std::pair<int, int>, Eigen::VectorXd> curves;  // key (target, source)
    std::vector<std::string> errors;
    double band_lo = 0.0, band_hi = 0.0;
};

namespace detail {

struct EngineContext {
    const StateSpaceModel* joint = nullptr;
    Eigen::VectorXd grid;
    bool need_freq = false;
    bool need_marginals = false;
    bool need_without = false;
    bool need_g_joint = false;
    bool need_h_joint = false;
    bool need_geweke_cond = false;

    std::vector<std::optional<StateSpaceModel>> marginal;
    std::vector<std::string> marginal_err;
    std::vector<std::optional<StateSpaceModel>> without;
    std::vector<std::string> without_err;
    std::vector<Eigen::MatrixXd> without_kc;               // B*C of without[k]
    std::vector<std::vector<Eigen::MatrixXcd>> g_without;  // G~ grid per excluded channel
    Eigen::MatrixXd a_bc;                                  // A - B C of the joint
    std::vector<Eigen::MatrixXcd> g_joint;
    std::vector<Eigen::MatrixXcd> h_joint;
    std::vector<Eigen::MatrixXd> o_cond;                   // per target: Omega_{rest|i}

    const StateSpaceModel& joint_model() const { return *joint; }

    const StateSpaceModel& get_without(int k) const {
        const auto& slot = without[static_cast<std::size_t>(k)];
        if (!slot)
            throw NumericError("sub-model excluding channel " + std::to_string(k) + ": " +
                               without_err[static_cast<std::size_t>(k)]);
        return *slot;
    }

    const StateSpaceModel& get_marginal(int i) const {
        const auto& slot = marginal[static_cast<std::size_t>(i)];
        if (!slot)
            throw NumericError("marginal model of channel " + std::to_string(i) + ": " +
                               marginal_err[static_cast<std::size_t>(i)]);
        return *slot;
    }
};

inline bool kind_needs_marginals(MeasureKind k) {
    switch (k) {
        case MeasureKind::gcm:
        case MeasureKind::te:
        case MeasureKind::di_rate:
        case MeasureKind::lin_dependence:
            return true;
        default:
            return false;
    }
}

inline bool kind_needs_sent(MeasureKind k) {
    return k == MeasureKind::cgcm_sent || k == MeasureKind::fcgcm_sent;
}

inline void prepare_context(EngineContext& ctx, const std::vector<MeasureKind>& kinds,
                            const std::vector<int>& sources) {
    const StateSpaceModel& joint = ctx.joint_model();
    const int n = static_cast<int>(joint.channels());

    bool sent = false, cond_dep = false;
    for (MeasureKind k : kinds) {
        ctx.need_freq |= is_frequency_kind(k);
        ctx.need_marginals |= kind_needs_marginals(k);
        ctx.need_without |= is_conditional_kind(k);
        ctx.need_g_joint |= (k == MeasureKind::fcgcm_std_ent || k == MeasureKind::fcgcm_jent);
        ctx.need_h_joint |= (k == MeasureKind::fcgcm_std_geweke);
        ctx.need_geweke_cond |= (k == MeasureKind::fcgcm_std_geweke);
        sent |= kind_needs_sent(k);
        cond_dep |= (k == MeasureKind::cond_lin_dependence);
    }
    bool need_g_without =
        std::any_of(kinds.begin(), kinds.end(), [](MeasureKind k) {
            return k == MeasureKind::fcgcm_std_ent || k == MeasureKind::fcgcm_std_geweke;
        });

    // Leave-one-out sub-models: pair (i <- j) uses without[j] as its (x,z)
    // model; the separate-entropy variant and cond-LinDependence also need
    // without[i] as the (y,z) model.
    std::set<int> excl;
    if (ctx.need_without) {
        if (sources.empty() || sent || cond_dep) {
            for (int k = 0; k < n; ++k) excl.insert(k);
        } else {
            for (int j : sources) excl.insert(j);
        }
    }
    std::set<int> grid_excl;  // exclusions whose G~ grid is needed (sources only)
    if (need_g_without) {
        if (sources.empty())
            for (int k = 0; k < n; ++k) grid_excl.insert(k);
        else
            for (int j : sources) grid_excl.insert(j);
    }

    if (ctx.need_marginals) {
        ctx.marginal.resize(static_cast<std::size_t>(n));
        ctx.marginal_err.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            try {
                ctx.marginal[static_cast<std::size_t>(i)] = subprocess_model(joint, {i});
            } catch (const Error& e) {
                ctx.marginal_err[static_cast<std::size_t>(i)] = e.what();
            }
        }
    }

    if (ctx.need_without) {
        ctx.without.resize(static_cast<std::size_t>(n));
        ctx.without_err.resize(static_cast<std::size_t>(n));
        ctx.without_kc.resize(static_cast<std::size_t>(n));
        ctx.g_without.resize(static_cast<std::size_t>(n));
        for (int k : excl) {
            std::vector<int> idx;
            for (int c = 0; c < n; ++c)
                if (c != k) idx.push_back(c);
            try {
                StateSpaceModel sub = subprocess_model(joint, idx);
                ctx.without_kc[static_cast<std::size_t>(k)] = sub.B * sub.C;
                if (grid_excl.count(k)) {
                    TransferEvaluator ev(inverse_representation(sub));
                    ctx.g_without[static_cast<std::size_t>(k)] = ev.eval_grid(ctx.grid);
                }
                ctx.without[static_cast<std::size_t>(k)] = std::move(sub);
            } catch (const Error& e) {
                ctx.without_err[static_cast<std::size_t>(k)] = e.what();
            }
        }
    }

    ctx.a_bc = joint.A - joint.B * joint.C;
    if (ctx.need_g_joint) {
        TransferEvaluator ev(inverse_representation(joint));
        ctx.g_joint = ev.eval_grid(ctx.grid);
    }
    if (ctx.need_h_joint) {
        TransferEvaluator ev(transfer_of(joint));
        ctx.h_joint = ev.eval_grid(ctx.grid);
    }
    if (ctx.need_geweke_cond) {
        ctx.o_cond.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd o_rr(n - 1, n - 1);
            Eigen::VectorXd o_ri(n - 1);
            for (int a = 0; a < n - 1; ++a) {
                const int ca = a + (a >= i ? 1 : 0);
                o_ri(a) = joint.omega(ca, i);
                for (int b = 0; b < n - 1; ++b) {
                    const int cb = b + (b >= i ? 1 : 0);
                    o_rr(a, b) = joint.omega(ca, cb);
                }
            }
            ctx.o_cond[static_cast<std::size_t>(i)] =
                o_rr - o_ri * o_ri.transpose() / joint.omega(i, i);
        }
    }
}

/// Position of channel c among all channels with channel k removed.
inline int pos_without(int c, int k) { return c - (c > k ? 1 : 0); }

/// Minimum-phase requirement for a scalar diagonal entry of the inverse of
/// an innovation model: rho(A - sum_{l != pos} B_l C_l) < 1.
inline void require_scalar_block_minphase(const StateSpaceModel& ss, const Eigen::MatrixXd& bc,
                                          int pos, const char* what) {
    Eigen::MatrixXd a = ss.A - bc + ss.B.col(pos) * ss.C.row(pos);
    if (spectral_radius_of(a) >= 1.0)
        throw NumericError(std::string(what) +
                           ": ME filter diagonal block has no stable inverse");
}

/// Per-unordered-pair worker; caches everything both directions can share.
class PairWorker {
  public:
    PairWorker(const EngineContext& ctx, int a, int b) : ctx_(ctx), a_(a), b_(b) {}

    double compute(MeasureKind kind, int tgt, int src, double band_lo, double band_hi,
                   Eigen::VectorXd* curve_out) {
        switch (kind) {
            case MeasureKind::gcm:
                return gcm(tgt, src);
            case MeasureKind::te:
                return 0.5 * gcm(tgt, src);
            case MeasureKind::di_rate:
                return di_rate(tgt, src);
            case MeasureKind::inst_feedback:
                return inst_feedback();
            case MeasureKind::lin_dependence:
                return lin_dependence();
            case MeasureKind::cond_inst_feedback:
                return cond_inst_feedback();
            case MeasureKind::cond_lin_dependence:
                return cond_lin_dependence();
            case MeasureKind::cgcm_std:
                return cgcm_std(tgt, src);
            case MeasureKind::cgcm_sent:
                return sent(tgt, src, nullptr);
            case MeasureKind::cgcm_jent:
                return jent(tgt, src, nullptr);
            default:
                break;
        }
        Eigen::VectorXd curve = frequency_curve(kind, tgt, src);
        const double v = band_average(ctx_.grid, curve, band_lo, band_hi);
        if (curve_out) *curve_out = std::move(curve);
        return v;
    }

  private:
    const EngineContext& ctx_;
    const int a_, b_;
    std::optional<StateSpaceModel> pair_model_;
    std::optional<Eigen::MatrixXd> pair_bc_;
    std::vector<Eigen::MatrixXcd> pair_h_grid_, pair_g_grid_;
    std::optional<Eigen::MatrixXd> a_reduced_;
    std::vector<Eigen::MatrixXcd> reduced_t_grid_;
    // per-direction caches so the time- and frequency-domain variants of the
    // same measure share one factorization (index 0: tgt == a_, 1: tgt == b_)
    struct SentCache {
        double value = 0.0;
        RawStateSpace raw;
        DareSolution sol;
    };
    std::optional<SentCache> sent_cache_[2];
    std::optional<DareSolution> jent_cache_[2];

    const StateSpaceModel& joint() const { return ctx_.joint_model(); }
    int pos_in_pair(int c) const { return c == a_ ? 0 : 1; }

    const StateSpaceModel& pair_model() {
        if (!pair_model_) pair_model_ = subprocess_model(joint(), {a_, b_});
        return *pair_model_;
    }
    const Eigen::MatrixXd& pair_bc() {
        if (!pair_bc_) pair_bc_ = pair_model().B * pair_model().C;
        return *pair_bc_;
    }
    const std::vector<Eigen::MatrixXcd>& pair_h_grid() {
        if (pair_h_grid_.empty())
            pair_h_grid_ = TransferEvaluator(transfer_of(pair_model())).eval_grid(ctx_.grid);
        return pair_h_grid_;
    }
    const std::vector<Eigen::MatrixXcd>& pair_g_grid() {
        if (pair_g_grid_.empty())
            pair_g_grid_ =
                TransferEvaluator(inverse_representation(pair_model())).eval_grid(ctx_.grid);
        return pair_g_grid_;
    }
    const Eigen::MatrixXd& a_reduced() {
        if (!a_reduced_) {
            Eigen::MatrixXd ar = ctx_.a_bc + joint().B.col(a_) * joint().C.row(a_) +
                                 joint().B.col(b_) * joint().C.row(b_);
            if (spectral_radius_of(ar) >= 1.0)
                throw NumericError("cgcm_jent: reduced system unstable");
            a_reduced_ = std::move(ar);
        }
        return *a_reduced_;
    }
    Eigen::MatrixXd reduced_q() const {
        Eigen::MatrixXd q(2, 2);
        q << joint().omega(a_, a_), joint().omega(a_, b_), joint().omega(b_, a_),
            joint().omega(b_, b_);
        return q;
    }
    Eigen::MatrixXd reduced_b() const {
        Eigen::MatrixXd bm(joint().state_dim(), 2);
        bm.col(0) = joint().B.col(a_);
        bm.col(1) = joint().B.col(b_);
        return bm;
    }
    const std::vector<Eigen::MatrixXcd>& reduced_t_grid() {
        if (reduced_t_grid_.empty()) {
            Eigen::MatrixXd c(2, joint().state_dim());
            c.row(0) = joint().C.row(a_);
            c.row(1) = joint().C.row(b_);
            Realization rows{a_reduced(), reduced_b(), std::move(c),
                             Eigen::MatrixXd::Identity(2, 2)};
            reduced_t_grid_ = TransferEvaluator(rows).eval_grid(ctx_.grid);
        }
        return reduced_t_grid_;
    }

    double gcm(int tgt, int src) {
        const double sigma = ctx_.get_marginal(tgt).omega(0, 0);
        const double oxx = pair_model().omega(pos_in_pair(tgt), pos_in_pair(tgt));
        return guarded_log(sigma, "gcm") - guarded_log(oxx, "gcm");
    }

    double di_rate(int tgt, int src) {
        const double sigma = ctx_.get_marginal(tgt).omega(0, 0);
        const auto& om = pair_model().omega;
        const int px = pos_in_pair(tgt), py = pos_in_pair(src);
        const double cond = om(px, px) - om(px, py) * om(py, px) / om(py, py);
        return 0.5 * (guarded_log(sigma, "di_rate") - guarded_log(cond, "di_rate"));
    }

    double inst_feedback() {
        const auto& om = pair_model().omega;
        return guarded_log(om(0, 0), "inst_feedback") + guarded_log(om(1, 1), "inst_feedback") -
               log_det_spd(om, "inst_feedback");
    }

    double lin_dependence() {
        const double sa = ctx_.get_marginal(a_).omega(0, 0);
        const double sb = ctx_.get_marginal(b_).omega(0, 0);
        return guarded_log(sa, "lin_dependence") + guarded_log(sb, "lin_dependence") -
               log_det_spd(pair_model().omega, "lin_dependence");
    }

    double cond_inst_feedback() const {
        return guarded_log(joint().omega(a_, a_), "cond_inst_feedback") +
               guarded_log(joint().omega(b_, b_), "cond_inst_feedback") -
               log_det_spd(reduced_q(), "cond_inst_feedback");
    }

    double cond_lin_dependence() const {
        const auto& wa = ctx_.get_without(b_);  // (a | rest without b)
        const auto& wb = ctx_.get_without(a_);
        const double ta = wa.omega(pos_without(a_, b_), pos_without(a_, b_));
        const double tb = wb.omega(pos_without(b_, a_), pos_without(b_, a_));
        return guarded_log(ta, "cond_lin_dependence") + guarded_log(tb, "cond_lin_dependence") -
               log_det_spd(reduced_q(), "cond_lin_dependence");
    }

    double cgcm_std(int tgt, int src) const {
        const auto& wo = ctx_.get_without(src);
        const int p = pos_without(tgt, src);
        return guarded_log(wo.omega(p, p), "cgcm_std") -
               guarded_log(joint().omega(tgt, tgt), "cgcm_std");
    }

    double sent(int tgt, int src, Eigen::VectorXd* curve) {
        auto& cache = sent_cache_[tgt == a_ ? 0 : 1];
        if (cache) {
            if (curve) sent_curve(*cache, curve);
            return cache->value;
        }
        const auto& wo_src = ctx_.get_without(src);  // (x, z) model
        const auto& wo_tgt = ctx_.get_without(tgt);  // (y, z) model
        const Eigen::Index m = joint().state_dim();
        const int n = static_cast<int>(joint().channels());

        auto scatter = [&](const StateSpaceModel& sub, int excluded) {
            Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(m, n);
            for (int c = 0; c < n; ++c)
                if (c != excluded) bm.col(c) = sub.B.col(pos_without(c, excluded));
            return bm;
        };
        const Eigen::MatrixXd b_a = scatter(wo_src, src);
        const Eigen::MatrixXd b_b = scatter(wo_tgt, tgt);

        // Reduced 2m-state augmented realization: the outputs only read the
        // filter-state differences, which evolve autonomously (see
        // detail::augmented_raw).
        RawStateSpace raw;
        raw.A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        raw.A.block(0, 0, m, m) = joint().A - ctx_.without_kc[static_cast<std::size_t>(src)];
        raw.A.block(m, m, m, m) = joint().A - ctx_.without_kc[static_cast<std::size_t>(tgt)];
        raw.B.resize(2 * m, n);
        raw.B.topRows(m) = joint().B - b_a;
        raw.B.bottomRows(m) = joint().B - b_b;
        raw.C = Eigen::MatrixXd::Zero(2, 2 * m);
        raw.C.block(0, 0, 1, m) = joint().C.row(tgt);
        raw.C.block(1, m, 1, m) = joint().C.row(src);
        raw.D = Eigen::MatrixXd::Zero(2, n);
        raw.D(0, tgt) = 1.0;
        raw.D(1, src) = 1.0;
        raw.noise_cov = joint().omega;

        DareSolution sol = solve_dare(raw);
        const int p = pos_without(tgt, src);
        const double value =
            guarded_log(wo_src.omega(p, p), "cgcm_sent") - guarded_log(sol.sigma(0, 0), "cgcm_sent");
        cache = SentCache{value, std::move(raw), std::move(sol)};
        if (curve) sent_curve(*cache, curve);
        return cache->value;
    }

    void sent_curve(const SentCache& c, Eigen::VectorXd* curve) const {
        if (spectral_radius_of(c.raw.A - c.sol.K.col(1) * c.raw.C.row(1)) >= 1.0)
            throw NumericError("fcgcm_sent: ME filter diagonal block has no stable inverse");
        Realization gxx{c.raw.A - c.sol.K * c.raw.C, c.sol.K.col(0), -c.raw.C.row(0),
                        Eigen::MatrixXd::Identity(1, 1)};
        TransferEvaluator ev(gxx);
        curve->resize(ctx_.grid.size());
        for (Eigen::Index i = 0; i < ctx_.grid.size(); ++i)
            (*curve)(i) = c.value + 2.0 * std::log(std::abs(ev.eval(ctx_.grid(i))(0, 0)));
    }

    double jent(int tgt, int src, Eigen::VectorXd* curve) {
        auto& cache = jent_cache_[tgt == a_ ? 0 : 1];
        if (!cache) {
            RawStateSpace raw;
            raw.A = a_reduced();
            raw.B = reduced_b();
            raw.C = joint().C.row(tgt);
            raw.D = Eigen::MatrixXd::Zero(1, 2);
            raw.D(0, pos_in_pair(tgt)) = 1.0;
            raw.noise_cov = reduced_q();
            cache = solve_dare(raw);
        }
        const DareSolution& sol = *cache;
        const double ld_oxx = guarded_log(joint().omega(tgt, tgt), "cgcm_jent");
        const double value = guarded_log(sol.sigma(0, 0), "cgcm_jent") - ld_oxx;
        if (!curve) return value;

        require_scalar_block_minphase(joint(), joint().B * joint().C, tgt, "fcgcm_jent");
        const auto& tg = reduced_t_grid();
        const Eigen::MatrixXcd q_c = reduced_q().cast<std::complex<double>>();
        const int px = pos_in_pair(tgt);
        curve->resize(ctx_.grid.size());
        for (Eigen::Index i = 0; i < ctx_.grid.size(); ++i) {
            const Eigen::RowVectorXcd row = tg[static_cast<std::size_t>(i)].row(px);
            const double s_red = std::log(std::real((row * q_c * row.adjoint())(0, 0)));
            const double g_ii =
                std::log(std::abs(ctx_.g_joint[static_cast<std::size_t>(i)](tgt, tgt)));
            (*curve)(i) = s_red - ld_oxx + 2.0 * g_ii;
        }
        return value;
    }

    Eigen::VectorXd frequency_curve(MeasureKind kind, int tgt, int src) {
        const Eigen::Index ng = ctx_.grid.size();
        Eigen::VectorXd f(ng);
        switch (kind) {
            case MeasureKind::fgcm_ent: {
                const auto& h = pair_h_grid();
                const auto& g = pair_g_grid();
                const int px = pos_in_pair(tgt);
                require_scalar_block_minphase(pair_model(), pair_bc(), px, "fgcm_ent");
                const double ld_oxx = guarded_log(pair_model().omega(px, px), "fgcm_ent");
                const Eigen::MatrixXcd om = pair_model().omega.cast<std::complex<double>>();
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const Eigen::RowVectorXcd hx = h[static_cast<std::size_t>(i)].row(px);
                    const double sx = std::log(std::real((hx * om * hx.adjoint())(0, 0)));
                    f(i) = sx - ld_oxx +
                           2.0 * std::log(std::abs(g[static_cast<std::size_t>(i)](px, px)));
                }
                return f;
            }
            case MeasureKind::fgcm_geweke: {
                const auto& h = pair_h_grid();
                const auto& om = pair_model().omega;
                const int px = pos_in_pair(tgt), py = pos_in_pair(src);
                const double partial = om(py, py) - om(py, px) * om(px, py) / om(px, px);
                const Eigen::MatrixXcd om_c = om.cast<std::complex<double>>();
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const Eigen::RowVectorXcd hx = h[static_cast<std::size_t>(i)].row(px);
                    const double sx = std::real((hx * om_c * hx.adjoint())(0, 0));
                    const double hxy2 = std::norm(h[static_cast<std::size_t>(i)](px, py));
                    f(i) = guarded_log(sx, "fgcm_geweke") -
                           guarded_log(sx - hxy2 * partial, "fgcm_geweke");
                }
                return f;
            }
            case MeasureKind::f_inst_feedback: {
                const auto& h = pair_h_grid();
                const auto& g = pair_g_grid();
                require_scalar_block_minphase(pair_model(), pair_bc(), 0, "f_inst_feedback");
                require_scalar_block_minphase(pair_model(), pair_bc(), 1, "f_inst_feedback");
                const auto& om = pair_model().omega;
                const Eigen::MatrixXcd om_c = om.cast<std::complex<double>>();
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const Eigen::MatrixXcd& hv = h[static_cast<std::size_t>(i)];
                    Eigen::MatrixXcd s = hv * om_c * hv.adjoint();
                    const double ld_s = log_det_hermitian(0.5 * (s + s.adjoint().eval()),
                                                          "f_inst_feedback");
                    const auto& gv = g[static_cast<std::size_t>(i)];
                    f(i) = (guarded_log(om(0, 0), "f_inst_feedback") -
                            2.0 * std::log(std::abs(gv(0, 0)))) +
                           (guarded_log(om(1, 1), "f_inst_feedback") -
                            2.0 * std::log(std::abs(gv(1, 1)))) -
                           ld_s;
                }
                return f;
            }
            case MeasureKind::f_lin_dependence: {
                const auto& h = pair_h_grid();
                const Eigen::MatrixXcd om_c = pair_model().omega.cast<std::complex<double>>();
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const Eigen::MatrixXcd& hv = h[static_cast<std::size_t>(i)];
                    Eigen::MatrixXcd s = hv * om_c * hv.adjoint();
                    s = 0.5 * (s + s.adjoint().eval());
                    f(i) = std::log(std::real(s(0, 0))) + std::log(std::real(s(1, 1))) -
                           log_det_hermitian(s, "f_lin_dependence");
                }
                return f;
            }
            case MeasureKind::fcgcm_std_ent: {
                const auto& wo = ctx_.get_without(src);
                const int p = pos_without(tgt, src);
                require_scalar_block_minphase(wo, ctx_.without_kc[static_cast<std::size_t>(src)],
                                              p, "fcgcm_std_ent");
                require_scalar_block_minphase(joint(), joint().B * joint().C, tgt,
                                              "fcgcm_std_ent");
                const auto& gw = ctx_.g_without[static_cast<std::size_t>(src)];
                if (gw.empty()) throw NumericError("fcgcm_std_ent: missing G~ grid");
                const double ld_t = guarded_log(wo.omega(p, p), "fcgcm_std_ent");
                const double ld_o = guarded_log(joint().omega(tgt, tgt), "fcgcm_std_ent");
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const double g_t = std::log(std::abs(gw[static_cast<std::size_t>(i)](p, p)));
                    const double g_o =
                        std::log(std::abs(ctx_.g_joint[static_cast<std::size_t>(i)](tgt, tgt)));
                    f(i) = (ld_t - 2.0 * g_t) - (ld_o - 2.0 * g_o);
                }
                return f;
            }
            case MeasureKind::fcgcm_std_geweke: {
                const auto& wo = ctx_.get_without(src);
                const int p = pos_without(tgt, src);
                const auto& gw = ctx_.g_without[static_cast<std::size_t>(src)];
                if (gw.empty()) throw NumericError("fcgcm_std_geweke: missing G~ grid");
                const int n = static_cast<int>(joint().channels());
                const double q = wo.omega(p, p);
                const Eigen::MatrixXcd oc =
                    ctx_.o_cond[static_cast<std::size_t>(tgt)].cast<std::complex<double>>();
                Eigen::RowVectorXcd prow(n - 1);
                for (Eigen::Index i = 0; i < ng; ++i) {
                    const Eigen::MatrixXcd& gv = gw[static_cast<std::size_t>(i)];
                    const Eigen::MatrixXcd& hv = ctx_.h_joint[static_cast<std::size_t>(i)];
                    // x row of P = [G~ row for target] x [H rows != src],
                    // columns != tgt.
                    for (int c = 0; c < n - 1; ++c) {
                        const int col = c + (c >= tgt ? 1 : 0);
                        std::complex<double> acc = 0.0;
                        for (int k = 0; k < n - 1; ++k) {
                            const int row = k + (k >= src ? 1 : 0);
                            acc += gv(p, k) * hv(row, col);
                        }
                        prow(c) = acc;
                    }
                    const double sub = std::real((prow * oc * prow.adjoint())(0, 0));
                    f(i) = guarded_log(q, "fcgcm_std_geweke") -
                           guarded_log(q - sub, "fcgcm_std_geweke");
                }
                return f;
            }
            case MeasureKind::fcgcm_sent: {
                Eigen::VectorXd curve;
                sent(tgt, src, &curve);
                return curve;
            }
            case MeasureKind::fcgcm_jent: {
                Eigen::VectorXd curve;
                jent(tgt, src, &curve);
                return curve;
            }
            default:
                throw UsageError("frequency_curve: not a frequency kind");
        }
    }
};

}  // namespace detail

/// Compute measure matrices for several kinds at once from one joint model.
/// `sources` / `targets`, when nonempty, restrict computation to ordered
/// pairs whose source (target) lies in the set; the permutation engine uses
/// this to evaluate one column at a time.  A failing pair leaves NaN in its
/// slot and an error string; other pairs proceed.
inline std::map<MeasureKind, AllPairsResult> compute_pairwise_measures(
    const StateSpaceModel& joint, const std::vector<MeasureKind>& kinds,
    const AllPairsOptions& opt, const std::vector<int>& sources = {},
    const std::vector<int>& targets = {}) {
    joint.validate();
    const int n = static_cast<int>(joint.channels());
    if (n < 2) throw UsageError("all_pairs: need at least 2 channels");
    if (kinds.empty()) throw UsageError("all_pairs: no measure kinds requested");
    if (opt.band_lo < 0.0 || opt.band_hi > kPi + 1e-12 || !(opt.band_lo < opt.band_hi))
        throw UsageError("all_pairs: band must satisfy 0 <= lo < hi <= pi");

    detail::EngineContext ctx;
    ctx.joint = &joint;
    ctx.grid = opt.grid.size() ? opt.grid : uniform_grid(512);
    detail::prepare_context(ctx, kinds, sources);

    std::map<MeasureKind, AllPairsResult> out;
    for (MeasureKind k : kinds) {
        AllPairsResult r;
        r.kind = k;
        r.values = Eigen::MatrixXd::Zero(n, n);
        r.band_lo = opt.band_lo;
        r.band_hi = opt.band_hi;
        if (is_frequency_kind(k)) r.thetas = ctx.grid;
        out.emplace(k, std::move(r));
    }

    std::set<int> source_set(sources.begin(), sources.end());
    std::set<int> target_set(targets.begin(), targets.end());
    auto wanted = [&](int tgt, int src) {
        return (source_set.empty() || source_set.count(src) > 0) &&
               (target_set.empty() || target_set.count(tgt) > 0);
    };
    std::vector<std::pair<int, int>> unordered;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (wanted(i, j) || wanted(j, i)) unordered.emplace_back(i, j);

    struct TaskOut {
        std::map<MeasureKind, std::map<std::pair<int, int>, std::pair<double, Eigen::VectorXd>>>
            values;
        std::map<MeasureKind, std::vector<std::string>> errors;
    };
    std::vector<TaskOut> task_out(unordered.size());

    parallel_for(unordered.size(), opt.threads, [&](std::size_t task) {
        const auto [i, j] = unordered[task];
        detail::PairWorker worker(ctx, i, j);
        for (MeasureKind kind : kinds) {
            for (auto [tgt, src] : {std::pair{i, j}, std::pair{j, i}}) {
                if (!wanted(tgt, src)) continue;
                try {
                    Eigen::VectorXd curve;
                    const double v = worker.compute(
                        kind, tgt, src, opt.band_lo, opt.band_hi,
                        opt.with_curves && is_frequency_kind(kind) ? &curve : nullptr);
                    task_out[task].values[kind][{tgt, src}] = {v, std::move(curve)};
                } catch (const Error& e) {
                    task_out[task].values[kind][{tgt, src}] = {
                        std::numeric_limits<double>::quiet_NaN(), {}};
                    task_out[task].errors[kind].push_back(std::to_string(tgt) + "<-" +
                                                          std::to_string(src) + ": " + e.what());
                }
            }
        }
    });

    for (std::size_t t = 0; t < unordered.size(); ++t) {
        for (auto& [kind, pairs] : task_out[t].values) {
            AllPairsResult& r = out.at(kind);
            for (auto& [pr, vc] : pairs) {
                r.values(pr.first, pr.second) = vc.first;
                if (vc.second.size()) r.curves[pr] = std::move(vc.second);
            }
        }
        for (auto& [kind, msgs] : task_out[t].errors)
            for (auto& msg : msgs) out.at(kind).errors.push_back(msg);
    }
    return out;
}

/// n x n matrix of one measure kind; frequency kinds are band-averaged over
/// [band_lo, band_hi].
inline AllPairsResult all_pairs(const StateSpaceModel& joint, MeasureKind kind,
                                const AllPairsOptions& opt = {}) {
    auto m = compute_pairwise_measures(joint, {kind}, opt);
    return std::move(m.at(kind));
}

}  // namespace megc
