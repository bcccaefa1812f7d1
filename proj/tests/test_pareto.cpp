#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qtune/pareto.hpp"
#include "qtune/rng.hpp"

using namespace qtune;
using namespace testing_oracles;

namespace {

Solution sol(ObjectiveVector obj, std::string tag = "") {
    Solution s;
    s.objectives = std::move(obj);
    s.theta_c.space_id = std::move(tag);
    return s;
}

std::vector<Solution> sols(const std::vector<ObjectiveVector>& objs) {
    std::vector<Solution> out;
    for (const auto& o : objs) out.push_back(sol(o));
    return out;
}

}  // namespace

TEST_CASE("dominance definition") {
    CHECK(dominates({1, 2}, {2, 2}));
    CHECK_FALSE(dominates({1, 2}, {1, 2}));
    CHECK_FALSE(dominates({1, 3}, {3, 1}));
    CHECK_FALSE(dominates({3, 1}, {1, 3}));
    CHECK_THROWS_AS(dominates({1, 2}, {1, 2, 3}), ContractViolation);
}

TEST_CASE("dominance antisymmetry on random vectors") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        ObjectiveVector a{rng.next_double(), rng.next_double()};
        ObjectiveVector b{rng.next_double(), rng.next_double()};
        CHECK_FALSE((dominates(a, b) && dominates(b, a)));
    }
}

TEST_CASE("pareto_filter worked example") {
    auto set = pareto_filter(sols({{47, 35}, {57, 25}, {50, 30}, {60, 20}, {55, 40}}));
    REQUIRE(set.size() == 4);
    CHECK(set.entries[0].objectives == ObjectiveVector{47, 35});
    CHECK(set.entries[1].objectives == ObjectiveVector{50, 30});
    CHECK(set.entries[2].objectives == ObjectiveVector{57, 25});
    CHECK(set.entries[3].objectives == ObjectiveVector{60, 20});
}

TEST_CASE("pareto_filter edge cases") {
    CHECK(pareto_filter({}).empty());
    auto single = pareto_filter(sols({{5, 5}}));
    REQUIRE(single.size() == 1);
    CHECK(single.entries[0].objectives == ObjectiveVector{5, 5});

    // Duplicate objectives deduplicate keeping the first input entry.
    auto dup = pareto_filter({sol({1, 1}, "first"), sol({1, 1}, "second")});
    REQUIRE(dup.size() == 1);
    CHECK(dup.entries[0].theta_c.space_id == "first");
}

TEST_CASE("pareto_filter equals pairwise oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.next_index(200);
        const std::size_t k = trial % 3 == 0 ? 3 : 2;  // exercise the general-k path too
        std::vector<ObjectiveVector> pts;
        for (std::size_t i = 0; i < n; ++i) {
            ObjectiveVector p(k);
            // Coarse grid so duplicates and ties actually occur.
            for (auto& x : p) x = static_cast<double>(rng.next_index(12));
            pts.push_back(std::move(p));
        }
        auto got = objectives_of(pareto_filter(sols(pts)));
        auto want = naive_front(pts);
        CHECK(got == want);
    }
}

TEST_CASE("pareto_filter idempotence and canonical order") {
    Rng rng(37);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<ObjectiveVector> pts;
        for (int i = 0; i < 80; ++i) pts.push_back({rng.next_double(), rng.next_double()});
        auto once = pareto_filter(sols(pts));
        auto twice = pareto_filter(once.entries);
        CHECK(objectives_of(once) == objectives_of(twice));
        for (std::size_t i = 1; i < once.size(); ++i) {
            CHECK(once.entries[i - 1].objectives[0] < once.entries[i].objectives[0]);
            CHECK(once.entries[i - 1].objectives[1] > once.entries[i].objectives[1]);
        }
    }
}

TEST_CASE("hypervolume examples") {
    CHECK(hypervolume(pareto_filter(sols({{0.5, 0.5}})), {1, 1}) == Catch::Approx(0.25));
    CHECK(hypervolume(ParetoSet{}, {1, 1}) == 0.0);
    CHECK(hypervolume(pareto_filter(sols({{0.2, 0.4}, {0.6, 0.1}})), {1, 1}) ==
          Catch::Approx(0.60).epsilon(1e-12));
}

TEST_CASE("hypervolume clips points beyond the reference") {
    auto set = pareto_filter(sols({{0.5, 1.4}, {0.7, 0.2}}));
    REQUIRE(set.size() == 2);
    CHECK(hypervolume(set, {1, 1}) == Catch::Approx(0.3 * 0.8).epsilon(1e-12));
    CHECK_THROWS_AS(hypervolume(set, {std::numeric_limits<double>::infinity(), 1}),
                    ContractViolation);
    CHECK_THROWS_AS(hypervolume(set, {1, 1, 1}), ContractViolation);
}

TEST_CASE("hypervolume monotone in set inclusion") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ObjectiveVector> a, b;
        for (int i = 0; i < 30; ++i) {
            ObjectiveVector p{rng.next_double(), rng.next_double()};
            b.push_back(p);
            if (i % 2 == 0) a.push_back(p);
        }
        ObjectiveVector ref{1.1, 1.1};
        CHECK(hypervolume(pareto_filter(sols(a)), ref) <=
              hypervolume(pareto_filter(sols(b)), ref) + 1e-15);
    }
}

TEST_CASE("hypervolume matches Monte Carlo") {
    Rng rng(53);
    for (int trial = 0; trial < 3; ++trial) {
        auto front = random_front(rng, 40);
        ObjectiveVector ref{1.1, 1.1};
        double exact = hypervolume(pareto_filter(sols(front)), ref);
        double estimate = mc_hypervolume(front, ref, 1000000, 1000 + trial);
        CHECK(std::fabs(exact - estimate) / exact < 0.01);
    }
}

TEST_CASE("utopia and nadir") {
    auto [u1, n1] = utopia_nadir(pareto_filter(sols({{10, 100}, {40, 10}})));
    CHECK(u1 == ObjectiveVector{10, 10});
    CHECK(n1 == ObjectiveVector{40, 100});

    auto [u2, n2] = utopia_nadir(pareto_filter(sols({{5, 5}})));
    CHECK(u2 == ObjectiveVector{5, 5});
    CHECK(n2 == ObjectiveVector{5, 5});

    auto [u3, n3] = utopia_nadir(pareto_filter(sols({{1, 9}, {2, 8}, {3, 7}})));
    CHECK(u3 == ObjectiveVector{1, 7});
    CHECK(n3 == ObjectiveVector{3, 9});

    CHECK_THROWS_WITH(utopia_nadir(ParetoSet{}), "empty Pareto set");
}

TEST_CASE("normalize") {
    auto n1 = normalize(pareto_filter(sols({{10, 100}, {40, 10}})));
    CHECK(n1 == std::vector<ObjectiveVector>{{0, 1}, {1, 0}});

    auto n2 = normalize(pareto_filter(sols({{5, 5}})));
    CHECK(n2 == std::vector<ObjectiveVector>{{0, 0}});  // zero range maps to 0

    auto n3 = normalize(pareto_filter(sols({{10, 100}, {20, 50}, {40, 10}})));
    REQUIRE(n3.size() == 3);
    CHECK(n3[0] == ObjectiveVector{0, 1});
    CHECK(n3[1][0] == 1.0 / 3.0);
    CHECK(n3[1][1] == 4.0 / 9.0);
    CHECK(n3[2] == ObjectiveVector{1, 0});
}
