// SPDX-License-Identifier: Apache-2.0

#include <megc/networks.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace megc;

TEST_CASE("compound_symmetry") {
    SECTION("eigenvalues of the n=9 paper covariance") {
        auto m = compound_symmetry(9, 2.0, 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        for (int i = 0; i < 8; ++i) CHECK(es.eigenvalues()(i) == Catch::Approx(1.0).margin(1e-12));
        CHECK(es.eigenvalues()(8) == Catch::Approx(10.0).margin(1e-12));
    }
    SECTION("zero off-diagonal gives a scaled identity") {
        CHECK((compound_symmetry(4, 2.0, 0.0) - 2.0 * Eigen::MatrixXd::Identity(4, 4))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SECTION("singular boundary rejected") {
        CHECK_THROWS_AS(compound_symmetry(2, 1.0, 1.0), UsageError);
    }
}

TEST_CASE("ring topology") {
    SECTION("n=3 without self-loops is a permutation matrix") {
        auto a = ring(3, false);
        CHECK(a.sum() == 3.0);
        CHECK((a * a.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("n=9 with self-loops has 18 edges") {
        CHECK(ring(9, true).sum() == 18.0);
    }
    SECTION("every node has in-degree 1 plus self") {
        auto a = ring(5, true);
        for (int i = 0; i < 5; ++i) CHECK(a.row(i).sum() == 2.0);
        CHECK_THROWS_AS(ring(2, false), UsageError);
    }
}

TEST_CASE("star topology") {
    auto a = star(5, false);
    SECTION("four edges out of the center") {
        CHECK(a.sum() == 4.0);
        CHECK(a.col(0).sum() == 4.0);
    }
    SECTION("boundary in-degree one, center zero") {
        for (int k = 1; k < 5; ++k) CHECK(a.row(k).sum() == 1.0);
        CHECK(a.row(0).sum() == 0.0);
        auto with_self = star(5, true);
        CHECK(with_self.row(0).sum() == 1.0);
        CHECK_THROWS_AS(star(1, false), UsageError);
    }
}

TEST_CASE("build_model") {
    SECTION("ring at 0.85 hits the radius exactly") {
        NetworkSpec spec{ring(9, true), 0.85, compound_symmetry(9, 2.0, 1.0)};
        auto m = build_model(spec);
        CHECK(spectral_radius(m) == Catch::Approx(0.85).margin(1e-10));
        CHECK((m.omega - spec.innovation).cwiseAbs().maxCoeff() == 0.0);
        CHECK_NOTHROW(m.validate());
    }
    SECTION("all topology/lambda combinations satisfy the model invariants") {
        for (double lambda : {0.6, 0.85}) {
            for (int topo = 0; topo < 2; ++topo) {
                NetworkSpec spec{topo == 0 ? ring(9, true) : star(9, true), lambda,
                                 compound_symmetry(9, 2.0, 1.0)};
                CHECK_NOTHROW(build_model(spec).validate());
            }
        }
    }
    SECTION("truth edges are the off-diagonal adjacency pattern") {
        auto t = truth_edges(ring(4, true));
        int count = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) count += t(i, j) ? 1 : 0;
        CHECK(count == 4);
        CHECK_FALSE(t(0, 0));
    }
}

TEST_CASE("adjacency CSV loading") {
    auto dir = std::filesystem::temp_directory_path() / "megc_test";
    std::filesystem::create_directories(dir);
    auto p = dir / "adj.csv";
    {
        std::ofstream out(p);
        out << "1,0,1\n0,1,0\n1,1,1\n";
    }
    auto a = load_adjacency_csv(p);
    CHECK(a.rows() == 3);
    CHECK(a(0, 2) == 1.0);
    CHECK(a(1, 0) == 0.0);
    {
        std::ofstream out(p);
        out << "1,2\n0,1\n";
    }
    CHECK_THROWS_AS(load_adjacency_csv(p), IoError);
}
