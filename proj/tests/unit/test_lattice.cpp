#include <doctest.h>

#include <cmath>
#include <set>

#include "esr/lattice.hpp"
#include "esr/random.hpp"

using namespace esr;
using V = std::vector<double>;
using K = std::vector<LatticeIndex>;

TEST_CASE("quantize examples") {
    CHECK(quantize({0.5, 2, 10}, V{0.7, 1.2}).indices == K{1, 2});
    CHECK(quantize({0.3, 3, 10}, V{0, 0, 0}).indices == K{0, 0, 0});
    CHECK(quantize({0.25, 2, 10}, V{0.75, 0.5}).indices == K{3, 2});
    CHECK(lattice_value(LatticePoint{{1, 2}}, 0.5) == V{0.5, 1.0});
}

TEST_CASE("quantize snaps sums that drift below a multiple") {
    const double x = 0.1 + 0.2;  // 0.30000000000000004
    CHECK(floor_index(0.1 * 3, 0.1) == 3);
    CHECK(floor_index(x, 0.1) == 3);
    CHECK(floor_index(0.7 + 0.1, 0.1) == 8);
}

TEST_CASE("quantize rejects components beyond the cap") {
    CHECK_THROWS_AS(quantize({0.5, 1, 2.0}, V{2.6}), LatticeError);
    CHECK_NOTHROW(quantize({0.5, 1, 2.0}, V{2.0}));
}

TEST_CASE("quantize properties") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double alpha = 0.01 + 0.99 * rng.uniform();
        const std::size_t d = 1 + rng.below(4);
        const LatticeSpec spec{alpha, d, 20};
        V r(d);
        for (auto& x : r) x = 10 * rng.uniform();
        const LatticePoint q = quantize(spec, r);
        const V qv = lattice_value(q, alpha);
        CHECK(quantize(spec, qv) == q);
        double err = 0;
        for (std::size_t k = 0; k < d; ++k) {
            CHECK(qv[k] <= r[k] + 1e-9);
            err += r[k] - qv[k];
        }
        CHECK(err < alpha * static_cast<double>(d));
    }
}

TEST_CASE("layer extent and enumeration") {
    CHECK(layer_extent(1, 3, 1) == 2);
    CHECK(layer_extent(0.5, 2, 0) == 4);
    CHECK(layer_extent(0.4, 3, 3) == 0);
    CHECK_THROWS_AS(layer_extent(0.5, 3, 4), std::out_of_range);

    CHECK(enumerate_layer({1, 2, 10}, 1, 3).size() == 9);
    CHECK(enumerate_layer({0.5, 2, 10}, 5, 5).size() == 1);
    std::vector<V> pts;
    for (const auto& p : enumerate_layer({0.5, 1, 10}, 0, 2)) pts.push_back(lattice_value(p, 0.5));
    CHECK(pts == std::vector<V>{{0}, {0.5}, {1.0}, {1.5}, {2.0}});
}

TEST_CASE("enumeration count formula on random tuples") {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const double alpha = 0.05 + 0.95 * rng.uniform();
        const std::size_t d = 1 + rng.below(3);
        const int T = 1 + static_cast<int>(rng.below(6));
        const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(T) + 1));
        const auto side = static_cast<std::size_t>(std::ceil((T - t) / alpha - 1e-9)) + 1;
        std::size_t expect = 1;
        for (std::size_t k = 0; k < d; ++k) expect *= side;
        const auto range = enumerate_layer({alpha, d, double(T)}, t, T);
        std::size_t n = 0;
        std::set<K> seen;
        for (const auto& p : range) {
            ++n;
            seen.insert(p.indices);
        }
        CHECK(n == expect);
        CHECK(seen.size() == expect);
    }
}

TEST_CASE("enumeration order is lexicographic and matches flat_index") {
    const LayerGeometry g(3, 2);
    std::size_t flat = 0;
    K prev;
    const LayerRange range(g, 0, g.size());
    for (auto it = range.begin(); it != range.end(); ++it, ++flat) {
        CHECK(it.flat() == flat);
        CHECK(g.flat_index(it->indices) == flat);
        K back(3);
        g.unflatten(flat, back);
        CHECK(back == it->indices);
        if (!prev.empty()) CHECK(prev < it->indices);
        prev = it->indices;
    }
    CHECK(flat == 27);
}

TEST_CASE("split covers the range exactly once") {
    const LayerGeometry g(2, 9);
    const LayerRange all(g, 0, g.size());
    for (std::size_t parts : {1u, 3u, 7u, 100u}) {
        std::size_t total = 0, next = 0;
        for (std::size_t p = 0; p < parts; ++p) {
            const auto r = all.split(p, parts);
            if (r.size() == 0) continue;
            CHECK(r.begin().flat() == next);
            next += r.size();
            total += r.size();
        }
        CHECK(total == g.size());
    }
}
