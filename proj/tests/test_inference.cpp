// SPDX-License-Identifier: Apache-2.0

#include <megc/inference.hpp>
#include <megc/networks.hpp>

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace megc;

namespace {

NullDistribution make_null(std::vector<double> samples) {
    NullDistribution d;
    std::sort(samples.begin(), samples.end());
    d.n_perm = static_cast<int>(samples.size());
    d.samples = std::move(samples);
    return d;
}

}  // namespace

TEST_CASE("p_value rank arithmetic") {
    std::vector<double> samples(999);
    for (int i = 0; i < 999; ++i) samples[static_cast<std::size_t>(i)] = i;
    auto null = make_null(samples);
    CHECK(p_value(null, 2000.0) == Catch::Approx(1.0 / 1000.0));
    CHECK(p_value(null, -5.0) == Catch::Approx(1.0));
    CHECK(p_value(null, 499.0) == Catch::Approx(0.5).margin(0.01));
    SECTION("monotone nonincreasing in the observed value") {
        double prev = 2.0;
        for (double obs : {-1.0, 10.0, 500.0, 990.0, 5000.0}) {
            const double p = p_value(null, obs);
            CHECK(p <= prev);
            CHECK(p > 0.0);
            CHECK(p <= 1.0);
            prev = p;
        }
    }
    SECTION("plain estimator can reach zero") {
        CHECK(p_value(null, 2000.0, PValueEstimator::plain) == 0.0);
    }
}

TEST_CASE("correct") {
    SECTION("all ones rejects nothing under any method") {
        Eigen::MatrixXd p = Eigen::MatrixXd::Ones(4, 4);
        for (auto m : {Correction::bonferroni, Correction::bh, Correction::none})
            CHECK_FALSE(correct(p, m, 0.05).decisions.any());
    }
    SECTION("bonferroni threshold arithmetic (0.001 vs 0.05/72)") {
        Eigen::MatrixXd p = Eigen::MatrixXd::Ones(9, 9);
        p(0, 1) = 0.001;
        auto dm = correct(p, Correction::bonferroni, 0.05);
        CHECK_FALSE(dm.decisions(0, 1));
        p(0, 1) = 0.0005;  // below 0.05/72 ~ 6.94e-4
        CHECK(correct(p, Correction::bonferroni, 0.05).decisions(0, 1));
    }
    SECTION("BH rejections contain the Bonferroni ones") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::MatrixXd p(5, 5);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) p(i, j) = std::pow(unif(rng), 3.0);
            auto bonf = correct(p, Correction::bonferroni, 0.05);
            auto bh = correct(p, Correction::bh, 0.05);
            auto none = correct(p, Correction::none, 0.05);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    if (bonf.decisions(i, j)) CHECK(bh.decisions(i, j));
                    if (bonf.decisions(i, j)) CHECK(none.decisions(i, j));
                    if (i == j) CHECK_FALSE(bh.decisions(i, j));
                }
        }
    }
}

TEST_CASE("roc") {
    SECTION("perfect scores pass through (0,1)") {
        std::vector<double> scores{9, 8, 7, 1, 0.5, 0.2};
        std::vector<bool> truth{true, true, true, false, false, false};
        auto curve = roc_from_scores(scores, truth, true);
        bool has01 = false;
        for (auto& pt : curve.points) has01 |= (pt.fpr == 0.0 && pt.tpr == 1.0);
        CHECK(has01);
        CHECK(curve.auc == Catch::Approx(1.0));
    }
    SECTION("random scores give AUC near one half") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> scores(1000);
        std::vector<bool> truth(1000);
        for (int i = 0; i < 1000; ++i) {
            scores[static_cast<std::size_t>(i)] = unif(rng);
            truth[static_cast<std::size_t>(i)] = unif(rng) < 0.5;
        }
        CHECK(roc_from_scores(scores, truth, true).auc == Catch::Approx(0.5).margin(0.05));
    }
    SECTION("inverted scores give the complementary area") {
        std::vector<double> scores{9, 8, 7, 1, 0.5, 0.2};
        std::vector<bool> truth{false, false, false, true, true, true};
        CHECK(roc_from_scores(scores, truth, true).auc == Catch::Approx(0.0));
    }
    SECTION("staircase is monotone and tpr_at_fpr interpolates") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> scores(200);
        std::vector<bool> truth(200);
        for (int i = 0; i < 200; ++i) {
            truth[static_cast<std::size_t>(i)] = unif(rng) < 0.4;
            scores[static_cast<std::size_t>(i)] =
                unif(rng) + (truth[static_cast<std::size_t>(i)] ? 0.3 : 0.0);
        }
        auto curve = roc_from_scores(scores, truth, true);
        for (std::size_t k = 1; k < curve.points.size(); ++k) {
            CHECK(curve.points[k].fpr >= curve.points[k - 1].fpr);
            CHECK(curve.points[k].tpr >= curve.points[k - 1].tpr);
        }
        CHECK(tpr_at_fpr(curve, 0.0) >= 0.0);
        CHECK(tpr_at_fpr(curve, 1.0) == Catch::Approx(1.0));
    }
    SECTION("degenerate truth rejected") {
        CHECK_THROWS_AS(roc_from_scores({1.0, 2.0}, {true, true}, true), UsageError);
    }
}

TEST_CASE("permutation_null determinism") {
    VarModel m;
    Eigen::MatrixXd a(2, 2);
    a << 0.4, 0.3, 0.0, 0.5;
    m.coeffs.push_back(-a);
    m.omega = Eigen::MatrixXd::Identity(2, 2);
    auto s = simulate_var(m, 200, 100, 7);

    PermTestOptions opt;
    opt.order = 1;
    opt.seed = 99;
    auto n1 = permutation_null(s, {0, 1}, 1, MeasureKind::gcm, opt);
    auto n2 = permutation_null(s, {0, 1}, 1, MeasureKind::gcm, opt);
    REQUIRE(n1.samples.size() == 1);
    CHECK(n1.samples[0] == n2.samples[0]);
}

TEST_CASE("permutation null of GCM on white noise is centered near zero") {
    VarModel m;
    m.coeffs.push_back(Eigen::MatrixXd::Zero(2, 2));
    m.omega = Eigen::MatrixXd::Identity(2, 2);
    auto s = simulate_var(m, 2000, 100, 15);
    PermTestOptions opt;
    opt.order = 1;
    opt.seed = 31;
    const int n_perm = 10;
    auto null = permutation_null(s, {0, 1}, n_perm, MeasureKind::gcm, opt);
    REQUIRE(null.samples.size() == static_cast<std::size_t>(n_perm));
    double mean = 0.0;
    for (double v : null.samples) mean += v;
    mean /= n_perm;
    double sd = 0.0;
    for (double v : null.samples) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / (n_perm - 1));
    CHECK(mean < 3.0 * sd / std::sqrt(static_cast<double>(n_perm)));
}

TEST_CASE("batched permutation_test matches the single-pair null") {
    megc_test::RandomModelOptions o;
    o.n = 3;
    o.p = 1;
    o.target_radius = 0.7;
    auto s = simulate_var(megc_test::random_var(3, o), 300, 100, 5);

    PermTestOptions opt;
    opt.order = 1;
    opt.n_perm = 20;
    opt.seed = 123;
    auto batched = permutation_test(s, {MeasureKind::gcm}, opt);

    auto null = permutation_null(s, {0, 1}, 20, MeasureKind::gcm, opt);
    const double obs = batched.observed.at(MeasureKind::gcm)(0, 1);
    CHECK(batched.p_values.at(MeasureKind::gcm)(0, 1) ==
          Catch::Approx(p_value(null, obs)).margin(0.0));

    SECTION("thread count does not change the result") {
        PermTestOptions opt4 = opt;
        opt4.threads = 4;
        auto batched4 = permutation_test(s, {MeasureKind::gcm}, opt4);
        CHECK((batched4.p_values.at(MeasureKind::gcm) - batched.p_values.at(MeasureKind::gcm))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SECTION("permute-target mode uses the target channel's null") {
        PermTestOptions optt = opt;
        optt.permute_target = true;
        auto bt = permutation_test(s, {MeasureKind::gcm}, optt);
        auto nullt = permutation_null(s, {0, 1}, 20, MeasureKind::gcm, optt);
        CHECK(bt.p_values.at(MeasureKind::gcm)(0, 1) ==
              Catch::Approx(p_value(nullt, bt.observed.at(MeasureKind::gcm)(0, 1))).margin(0.0));
    }
}

TEST_CASE("coupled pair exceeds the null 95th percentile in most trials") {
    NetworkSpec spec{ring(9, true), 0.85, compound_symmetry(9, 2.0, 1.0)};
    auto model = build_model(spec);

    const int trials = 100;
    const int n_perm = 1000;
    std::atomic<int> hits{0};
    parallel_for(trials, 2, [&](std::size_t t) {
        auto s = simulate_var(model, 120, 1000, 5000 + t);
        PermTestOptions opt;
        opt.order = 1;
        opt.seed = 9000 + t;
        // edge 0 -> 1 is a true ring connection
        auto null = permutation_null(s, {1, 0}, n_perm, MeasureKind::gcm, opt);
        auto fit = fit_var(s, 1);
        const double observed =
            gcm_time(var_to_ss(fit), Partition{{1}, {0}, {}}).value;
        const std::size_t idx = static_cast<std::size_t>(0.95 * null.samples.size());
        if (observed > null.samples[idx]) hits += 1;
    });
    CHECK(hits.load() >= 80);
}

TEST_CASE("bonferroni FPR on null-only data stays near the nominal level") {
    VarModel m;
    m.coeffs.push_back(Eigen::MatrixXd::Zero(3, 3));
    m.omega = Eigen::MatrixXd::Identity(3, 3);
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> decisions;
    for (int t = 0; t < 20; ++t) {
        auto s = simulate_var(m, 200, 50, 700 + t);
        PermTestOptions opt;
        opt.order = 1;
        opt.n_perm = 60;
        opt.seed = 40 + t;
        auto res = permutation_test(s, {MeasureKind::gcm}, opt);
        decisions.push_back(
            correct(res.p_values.at(MeasureKind::gcm), Correction::bonferroni, 0.05).decisions);
    }
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> truth(3, 3);
    truth.setConstant(false);
    truth(0, 1) = true;  // nominal positive slot so rates are defined
    auto [fpr, tpr] = operating_point(decisions, truth);
    const double binom_sd = std::sqrt(0.05 * 0.95 / (20.0 * 5.0));
    CHECK(fpr <= 0.05 + 3.0 * binom_sd);
}
