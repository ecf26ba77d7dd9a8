// SPDX-License-Identifier: Apache-2.0
//
// Permutation-based statistical inference for the causality measures:
// null distributions by permuting the source channel's time order, p-values,
// multiple-comparison corrections, and ROC evaluation.

#pragma once

#include "megc/all_pairs.hpp"
#include "megc/causality.hpp"
#include "megc/series.hpp"
#include "megc/var.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace megc {

/// The add-one estimator never produces a zero p-value; the plain estimator
/// can, which a Bonferroni threshold below 1/(n_perm+1) requires.
enum class PValueEstimator { addone, plain };

inline PValueEstimator parse_pvalue_estimator(const std::string& s) {
    if (s == "addone") return PValueEstimator::addone;
    if (s == "plain") return PValueEstimator::plain;
    throw UsageError("unknown p-value estimator '" + s + "' (expected addone or plain)");
}

struct NullDistribution {
    std::vector<double> samples;  // sorted ascending, NaN draws dropped
    int n_perm = 0;               // requested number of permutations
    int dropped = 0;              // draws that failed and stayed invalid
    std::pair<int, int> pair{0, 0};  // (target, source)
    MeasureKind kind = MeasureKind::gcm;
};

inline double p_value(const NullDistribution& null, double observed,
                      PValueEstimator estimator = PValueEstimator::addone) {
    std::size_t ge = 0;
    for (double s : null.samples)
        if (s >= observed) ++ge;
    const double n = static_cast<double>(null.samples.size());
    if (estimator == PValueEstimator::addone)
        return (1.0 + static_cast<double>(ge)) / (n + 1.0);
    if (n == 0.0) throw NumericError("p_value: no valid null samples");
    return static_cast<double>(ge) / n;
}

enum class Correction { bonferroni, bh, none };

inline Correction parse_correction(const std::string& s) {
    if (s == "bonferroni") return Correction::bonferroni;
    if (s == "bh") return Correction::bh;
    if (s == "none") return Correction::none;
    throw UsageError("unknown correction '" + s + "' (expected bonferroni, bh or none)");
}

inline std::string to_string(Correction c) {
    switch (c) {
        case Correction::bonferroni: return "bonferroni";
        case Correction::bh: return "bh";
        case Correction::none: return "none";
    }
    throw UsageError("unknown correction");
}

struct DecisionMatrix {
    Eigen::MatrixXd p_values;  // diagonal ignored (reported as 1)
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> decisions;
    Correction method = Correction::none;
    double alpha = 0.05;
};

/// Reject off-diagonal hypotheses: Bonferroni at alpha / (n(n-1)),
/// Benjamini-Hochberg step-up at level alpha, or uncorrected.
inline DecisionMatrix correct(const Eigen::MatrixXd& p_values, Correction method, double alpha) {
    if (p_values.rows() != p_values.cols()) throw UsageError("correct: matrix not square");
    if (alpha <= 0.0 || alpha >= 1.0) throw UsageError("correct: alpha must lie in (0,1)");
    const Eigen::Index n = p_values.rows();
    const int m_comparisons = static_cast<int>(n * (n - 1));

    DecisionMatrix dm;
    dm.p_values = p_values;
    dm.decisions.setConstant(n, n, false);
    dm.method = method;
    dm.alpha = alpha;

    if (method == Correction::bh) {
        std::vector<double> ps;
        ps.reserve(static_cast<std::size_t>(m_comparisons));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) ps.push_back(p_values(i, j));
        std::sort(ps.begin(), ps.end());
        double threshold = -1.0;
        for (std::size_t k = ps.size(); k >= 1; --k) {
            if (ps[k - 1] <= static_cast<double>(k) * alpha / m_comparisons) {
                threshold = ps[k - 1];
                break;
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j && threshold >= 0.0) dm.decisions(i, j) = p_values(i, j) <= threshold;
        return dm;
    }

    const double cutoff = method == Correction::bonferroni ? alpha / m_comparisons : alpha;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) dm.decisions(i, j) = p_values(i, j) < cutoff;
    return dm;
}

// ---------------------------------------------------------------------------
// ROC evaluation
// ---------------------------------------------------------------------------

struct RocPoint {
    double fpr = 0.0, tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // monotone staircase from (0,0) to (1,1)
    double auc = 0.0;
};

/// Threshold sweep over scores.  `higher_is_positive` says whether a larger
/// score is stronger evidence for a connection (false for p-values).
inline RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<bool>& truth,
                                bool higher_is_positive) {
    if (scores.size() != truth.size() || scores.empty())
        throw UsageError("roc: scores and truth must have equal nonzero length");
    std::size_t positives = 0;
    for (bool t : truth) positives += t ? 1 : 0;
    const std::size_t negatives = truth.size() - positives;
    if (positives == 0 || negatives == 0)
        throw UsageError("roc: truth must contain both positives and negatives");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return higher_is_positive ? scores[l] > scores[r] : scores[l] < scores[r];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        // advance through ties as one threshold step
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (truth[order[j]]) ++tp;
            else ++fp;
            ++j;
        }
        i = j;
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k)
        auc += 0.5 * (curve.points[k].tpr + curve.points[k - 1].tpr) *
               (curve.points[k].fpr - curve.points[k - 1].fpr);
    curve.auc = auc;
    return curve;
}

/// TPR of the ROC polyline at a given FPR (linear interpolation).
inline double tpr_at_fpr(const RocCurve& curve, double fpr) {
    const auto& pts = curve.points;
    if (pts.empty()) throw UsageError("tpr_at_fpr: empty curve");
    if (fpr <= pts.front().fpr) return pts.front().tpr;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        if (fpr <= pts[k].fpr) {
            const double span = pts[k].fpr - pts[k - 1].fpr;
            if (span <= 0.0) return pts[k].tpr;
            const double w = (fpr - pts[k - 1].fpr) / span;
            return pts[k - 1].tpr + w * (pts[k].tpr - pts[k - 1].tpr);
        }
    }
    return pts.back().tpr;
}

/// Pool off-diagonal entries of per-trial score matrices against a truth
/// adjacency (shared across trials) and sweep.
inline RocCurve roc_pooled(const std::vector<Eigen::MatrixXd>& score_matrices,
                           const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& truth,
                           bool higher_is_positive) {
    if (score_matrices.empty()) throw UsageError("roc: empty trial set");
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& m : score_matrices) {
        if (m.rows() != truth.rows() || m.cols() != truth.cols())
            throw UsageError("roc: score matrix shape does not match truth");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (i == j) continue;
                if (std::isnan(m(i, j))) continue;
                scores.push_back(m(i, j));
                labels.push_back(truth(i, j));
            }
    }
    return roc_from_scores(scores, labels, higher_is_positive);
}

/// Pooled (FPR, TPR) of decision matrices against a truth adjacency.
inline std::pair<double, double> operating_point(
    const std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>>& decisions,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& truth) {
    if (decisions.empty()) throw UsageError("operating_point: empty trial set");
    long tp = 0, fp = 0, pos = 0, neg = 0;
    for (const auto& d : decisions) {
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index j = 0; j < d.cols(); ++j) {
                if (i == j) continue;
                if (truth(i, j)) {
                    ++pos;
                    tp += d(i, j) ? 1 : 0;
                } else {
                    ++neg;
                    fp += d(i, j) ? 1 : 0;
                }
            }
    }
    if (pos == 0 || neg == 0) throw UsageError("operating_point: degenerate truth");
    return {static_cast<double>(fp) / static_cast<double>(neg),
            static_cast<double>(tp) / static_cast<double>(pos)};
}

// ---------------------------------------------------------------------------
// Permutation engine
// ---------------------------------------------------------------------------

struct PermTestOptions {
    int order = 1;                   // VAR order used on every refit
    int n_perm = 1000;
    std::uint64_t seed = 0;
    Eigen::VectorXd grid;            // frequency kinds only; empty = 512
    double band_lo = 0.0;
    double band_hi = 0.5 * kPi;
    bool permute_target = false;     // permute the target instead of the source
    PValueEstimator estimator = PValueEstimator::addone;
    unsigned threads = 1;
    int max_retries = 10;
};

namespace detail {

/// Series with channel c's time order shuffled by the given generator.
inline MultivariateSeries permute_channel(const MultivariateSeries& s, int c,
                                          std::mt19937_64& rng) {
    MultivariateSeries out = s;
    std::vector<double> col(static_cast<std::size_t>(s.samples()));
    for (Eigen::Index t = 0; t < s.samples(); ++t) col[static_cast<std::size_t>(t)] = s.data(t, c);
    std::shuffle(col.begin(), col.end(), rng);
    for (Eigen::Index t = 0; t < s.samples(); ++t) out.data(t, c) = col[static_cast<std::size_t>(t)];
    return out;
}

/// One permutation draw: shuffle channel `c`, refit, return the joint model.
/// Fit failures are retried with fresh permutations (deterministically
/// derived), up to max_retries.
inline StateSpaceModel permuted_model(const MultivariateSeries& s, int c, int order,
                                      std::uint64_t seed, int draw, int max_retries,
                                      int* retries_used = nullptr) {
    for (int retry = 0; retry <= max_retries; ++retry) {
        std::uint64_t draw_seed = mix_seed(seed, static_cast<std::uint64_t>(c),
                                           static_cast<std::uint64_t>(draw));
        if (retry > 0) draw_seed = mix_seed(draw_seed, 0x7e7261ULL, static_cast<std::uint64_t>(retry));
        std::mt19937_64 rng(draw_seed);
        MultivariateSeries perm = permute_channel(s, c, rng);
        try {
            VarModel m = fit_var(perm, order);
            StateSpaceModel ss = var_to_ss(m);
            if (retries_used) *retries_used = retry;
            return ss;
        } catch (const Error&) {
            if (retry == max_retries) throw;
        }
    }
    throw NumericError("permutation draw failed");  // unreachable
}

}  // namespace detail

/// Null distribution for one ordered pair (target <- source) under the
/// source-permutation null (or target permutation when configured).
/// Deterministic in (seed, permuted channel, draw index), which makes the
/// samples identical to the batched permutation_test ones.
inline NullDistribution permutation_null(const MultivariateSeries& s, std::pair<int, int> pair,
                                         int n_perm, MeasureKind kind,
                                         const PermTestOptions& opt) {
    s.validate();
    const auto [target, source] = pair;
    if (target == source) throw UsageError("permutation_null: target equals source");
    if (n_perm < 1) throw UsageError("permutation_null: n_perm must be >= 1");
    const int permuted = opt.permute_target ? target : source;

    AllPairsOptions ap;
    ap.grid = opt.grid;
    ap.band_lo = opt.band_lo;
    ap.band_hi = opt.band_hi;

    NullDistribution null;
    null.n_perm = n_perm;
    null.pair = pair;
    null.kind = kind;
    for (int d = 0; d < n_perm; ++d) {
        StateSpaceModel ss =
            detail::permuted_model(s, permuted, opt.order, opt.seed, d, opt.max_retries);
        auto res = compute_pairwise_measures(ss, {kind}, ap, {source}, {target});
        const double v = res.at(kind).values(target, source);
        if (std::isnan(v)) {
            ++null.dropped;
        } else {
            null.samples.push_back(v);
        }
    }
    std::sort(null.samples.begin(), null.samples.end());
    return null;
}

struct PermTestResult {
    std::map<MeasureKind, Eigen::MatrixXd> observed;
    std::map<MeasureKind, Eigen::MatrixXd> p_values;  // diagonal fixed at 1
    std::map<MeasureKind, Eigen::MatrixXd> null_exceed;  // count of null >= observed
    int order = 0;
    int n_perm = 0;
    long dropped_draws = 0;
    std::vector<std::string> errors;
};

/// Full permutation test: observed measure matrices plus per-ordered-pair
/// p-values.  Draw d for pair (i <- j) permutes channel j (the source), so
/// one refit serves all targets of that source.  Parallel draws derive their
/// generators from (seed, channel, draw) and results do not depend on the
/// schedule.
inline PermTestResult permutation_test(const MultivariateSeries& s,
                                       const std::vector<MeasureKind>& kinds,
                                       const PermTestOptions& opt) {
    s.validate();
    if (opt.n_perm < 1) throw UsageError("permutation_test: n_perm must be >= 1");
    const int n = static_cast<int>(s.channels());

    AllPairsOptions ap;
    ap.grid = opt.grid;
    ap.band_lo = opt.band_lo;
    ap.band_hi = opt.band_hi;

    PermTestResult result;
    result.order = opt.order;
    result.n_perm = opt.n_perm;

    VarModel base = fit_var(s, opt.order);
    StateSpaceModel base_ss = var_to_ss(base);
    {
        auto obs = compute_pairwise_measures(base_ss, kinds, ap);
        for (auto& [kind, r] : obs) {
            result.observed[kind] = std::move(r.values);
            for (auto& e : r.errors) result.errors.push_back("observed " + to_string(kind) + " " + e);
        }
    }

    // nulls[kind][channel](target, draw)
    std::map<MeasureKind, std::vector<Eigen::MatrixXd>> nulls;
    for (MeasureKind k : kinds)
        nulls[k].assign(static_cast<std::size_t>(n),
                        Eigen::MatrixXd::Constant(n, opt.n_perm,
                                                  std::numeric_limits<double>::quiet_NaN()));

    const std::size_t total = static_cast<std::size_t>(n) * static_cast<std::size_t>(opt.n_perm);
    std::atomic<long> dropped{0};
    parallel_for(total, opt.threads, [&](std::size_t task) {
        const int c = static_cast<int>(task / static_cast<std::size_t>(opt.n_perm));
        const int d = static_cast<int>(task % static_cast<std::size_t>(opt.n_perm));
        StateSpaceModel ss;
        try {
            ss = detail::permuted_model(s, c, opt.order, opt.seed, d, opt.max_retries);
        } catch (const Error&) {
            dropped += 1;
            return;
        }
        std::vector<int> filter{c};
        auto res = opt.permute_target
                       ? compute_pairwise_measures(ss, kinds, ap, {}, filter)
                       : compute_pairwise_measures(ss, kinds, ap, filter);
        for (auto& [kind, r] : res) {
            auto& slot = nulls.at(kind)[static_cast<std::size_t>(c)];
            for (int other = 0; other < n; ++other) {
                if (other == c) continue;
                slot(other, d) = opt.permute_target ? r.values(c, other) : r.values(other, c);
            }
        }
    });
    result.dropped_draws = dropped.load();

    for (MeasureKind k : kinds) {
        Eigen::MatrixXd pv = Eigen::MatrixXd::Ones(n, n);
        Eigen::MatrixXd exceed = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const int permuted = opt.permute_target ? i : j;
                const auto& slot = nulls.at(k)[static_cast<std::size_t>(permuted)];
                const int row = opt.permute_target ? j : i;
                const double obs = result.observed.at(k)(i, j);
                long valid = 0, ge = 0;
                for (int d = 0; d < opt.n_perm; ++d) {
                    const double v = slot(row, d);
                    if (std::isnan(v)) continue;
                    ++valid;
                    if (v >= obs) ++ge;
                }
                exceed(i, j) = static_cast<double>(ge);
                if (std::isnan(obs) || valid == 0) {
                    pv(i, j) = 1.0;
                } else if (opt.estimator == PValueEstimator::addone) {
                    pv(i, j) = (1.0 + static_cast<double>(ge)) / (static_cast<double>(valid) + 1.0);
                } else {
                    pv(i, j) = static_cast<double>(ge) / static_cast<double>(valid);
                }
            }
        }
        result.p_values[k] = std::move(pv);
        result.null_exceed[k] = std::move(exceed);
    }
    return result;
}

}  // namespace megc
