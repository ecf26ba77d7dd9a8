// SPDX-License-Identifier: Apache-2.0

#include <megc/series.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

using namespace megc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "megc_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("load_csv parses header and rows") {
    auto p = temp_file("basic.csv");
    write_file(p, "a,b\n1,2\n3,4\n");
    auto s = load_csv(p);
    REQUIRE(s.samples() == 2);
    REQUIRE(s.channels() == 2);
    REQUIRE(s.labels == std::vector<std::string>{"a", "b"});
    CHECK(s.data(0, 0) == 1.0);
    CHECK(s.data(1, 1) == 4.0);
}

TEST_CASE("load_csv rejects degenerate inputs") {
    SECTION("header only") {
        auto p = temp_file("empty.csv");
        write_file(p, "a,b\n");
        CHECK_THROWS_WITH(load_csv(p), Catch::Matchers::ContainsSubstring("T >= 2"));
    }
    SECTION("non-numeric cell names row and column") {
        auto p = temp_file("badcell.csv");
        write_file(p, "a,b\n1,x\n3,4\n");
        CHECK_THROWS_WITH(load_csv(p), Catch::Matchers::ContainsSubstring("row 2") &&
                                           Catch::Matchers::ContainsSubstring("column b"));
    }
    SECTION("ragged row") {
        auto p = temp_file("ragged.csv");
        write_file(p, "a,b\n1,2\n3\n");
        CHECK_THROWS_AS(load_csv(p), IoError);
    }
    SECTION("duplicate labels") {
        auto p = temp_file("dup.csv");
        write_file(p, "a,a\n1,2\n3,4\n");
        CHECK_THROWS_AS(load_csv(p), IoError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv")), IoError);
    }
}

TEST_CASE("save then load round-trips values") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 3.0);
    MultivariateSeries s;
    s.labels = {"u", "v", "w"};
    s.data.resize(40, 3);
    for (Eigen::Index r = 0; r < 40; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) s.data(r, c) = normal(rng);
    auto p = temp_file("roundtrip.csv");
    save_csv(s, p);
    auto back = load_csv(p);
    REQUIRE(back.labels == s.labels);
    CHECK((back.data - s.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize centers and scales") {
    MultivariateSeries s;
    s.labels = {"a"};
    s.data.resize(3, 1);
    s.data << 1, 2, 3;
    auto out = standardize(s);
    CHECK(std::abs(out.data.col(0).mean()) < 1e-14);
    const double sd = std::sqrt((out.data.col(0).array() - out.data.col(0).mean()).square().sum() / 2.0);
    CHECK(sd == Catch::Approx(1.0).margin(1e-12));

    SECTION("idempotent") {
        auto twice = standardize(out);
        CHECK((twice.data - out.data).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("standardize rejects constant channel by name") {
    MultivariateSeries s;
    s.labels = {"a", "flat"};
    s.data.resize(3, 2);
    s.data << 1, 5, 2, 5, 3, 5;
    CHECK_THROWS_WITH(standardize(s), Catch::Matchers::ContainsSubstring("flat"));
}

TEST_CASE("split slices channels by partition") {
    MultivariateSeries s;
    s.labels = {"a", "b", "c"};
    s.data.resize(2, 3);
    s.data << 1, 2, 3, 4, 5, 6;

    SECTION("three singletons") {
        auto [x, y, z] = split(s, Partition{{0}, {1}, {2}});
        CHECK(x.labels == std::vector<std::string>{"a"});
        CHECK(y.data(1, 0) == 5.0);
        CHECK(z.channels() == 1);
    }
    SECTION("empty z") {
        auto [x, y, z] = split(s, Partition{{0, 1}, {2}, {}});
        CHECK(x.channels() == 2);
        CHECK(y.channels() == 1);
        CHECK(z.channels() == 0);
    }
    SECTION("overlap rejected") {
        CHECK_THROWS_WITH(split(s, Partition{{0}, {0}, {}}),
                          Catch::Matchers::ContainsSubstring("overlapping partition"));
    }
    SECTION("out of range rejected") {
        CHECK_THROWS_AS(split(s, Partition{{0}, {7}, {}}), UsageError);
    }
}
