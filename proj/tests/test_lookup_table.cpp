#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "chshsim/lookup_table.hpp"

using namespace chshsim;

TEST_CASE("zero flip probability gives a constant table") {
    Rng rng(1);
    LookupTable t(8, 0.0, rng);
    for (TableIndex k = 2; k <= 8; ++k) CHECK(t.at(k) == t.at(1));
    CHECK(t.adjacency_flip_fraction() == 0.0);
}

TEST_CASE("unit flip probability gives strict alternation") {
    Rng rng(2);
    LookupTable t(8, 1.0, rng);
    for (TableIndex k = 2; k <= 8; ++k) CHECK(t.at(k) != t.at(k - 1));
    CHECK(t.adjacency_flip_fraction() == 1.0);
}

TEST_CASE("flip count matches p_t within 4 sigma") {
    Rng rng(3);
    const std::uint32_t L = 10000;
    const double p = 0.9;
    LookupTable t(L, p, rng);
    std::size_t flips = 0;
    for (TableIndex k = 2; k <= L; ++k) flips += t.at(k) != t.at(k - 1);
    double mean = p * (L - 1);
    double sigma = std::sqrt(p * (1 - p) * (L - 1));
    CHECK(std::abs(double(flips) - mean) < 4 * sigma);
    double f = t.adjacency_flip_fraction();
    CHECK(f > 0.88);
    CHECK(f < 0.92);
}

TEST_CASE("flip fraction converges at L = 1e5") {
    Rng rng(4);
    const std::uint32_t L = 100000;
    const double p = 0.3;
    LookupTable t(L, p, rng);
    double sigma = std::sqrt(p * (1 - p) / (L - 1));
    CHECK(std::abs(t.adjacency_flip_fraction() - p) < 4 * sigma);
}

TEST_CASE("construction is a pure function of (L, p_t, seed)") {
    Rng a(77), b(77);
    LookupTable ta(1000, 0.9, a), tb(1000, 0.9, b);
    CHECK(ta.to_bit_string() == tb.to_bit_string());
}

TEST_CASE("invalid construction parameters are rejected") {
    Rng rng(5);
    CHECK_THROWS_AS(LookupTable(2, 0.5, rng), std::invalid_argument);
    CHECK_THROWS_AS(LookupTable(10, -0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(LookupTable(10, 1.1, rng), std::invalid_argument);
}

TEST_CASE("advance_index increments and wraps to 2") {
    CHECK(advance_index(5, 10000) == 6);
    CHECK(advance_index(9999, 10000) == 10000);
    CHECK(advance_index(10000, 10000) == 2);
}

TEST_CASE("advance_index cycles over [2, L] exactly") {
    const std::uint32_t L = 17;
    std::set<TableIndex> seen;
    TableIndex k = 2;
    for (std::uint32_t i = 0; i < L - 1; ++i) {
        seen.insert(k);
        CHECK(k >= 2);
        CHECK(k <= L);
        k = advance_index(k, L);
    }
    CHECK(k == 2);
    CHECK(seen.size() == L - 1);
}
