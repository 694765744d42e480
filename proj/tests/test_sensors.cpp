#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "specstab/sensors.hpp"

using namespace specstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("partitions validate their cut lines") {
    const rectangle unit;
    CHECK_THROWS_AS(make_partition(unit, {0.0}, {}), config_error);
    CHECK_THROWS_AS(make_partition(unit, {1.0}, {}), config_error);
    CHECK_THROWS_AS(make_partition(unit, {0.5, 0.5}, {}), config_error);
    CHECK_THROWS_AS(make_partition(unit, {}, {-0.1}), config_error);

    const sensor_partition p = make_partition(unit, {0.25, 0.5}, {0.5});
    CHECK(p.m1() == 2);
    CHECK(p.m2() == 1);
    REQUIRE(p.subdomains.size() == 6);
    REQUIRE(p.first_eigenvalues.size() == 6);
    for (std::size_t c = 0; c < 6; ++c) {
        const rectangle& cell = p.subdomains[c];
        CHECK_THAT(p.first_eigenvalues[c], WithinRel(eigenvalue(cell, 1, 1), 1e-15));
    }
    // min over cells: the widest strip (0.5, 1.0) x (0, 0.5) has the
    // smallest ground eigenvalue pi^2 (4 + 4)
    CHECK_THAT(p.min_first_eigenvalue, WithinRel(8.0 * pi * pi, 1e-14));
}

TEST_CASE("unsorted cut lines are accepted and sorted") {
    const rectangle unit;
    const sensor_partition p = make_partition(unit, {0.75, 0.25, 0.5}, {});
    REQUIRE(p.vertical_lines.size() == 3);
    CHECK(p.vertical_lines[0] == 0.25);
    CHECK(p.vertical_lines[2] == 0.75);
}

TEST_CASE("equidistant partitions hit the closed-form eigenvalue") {
    const rectangle unit;
    const sensor_partition p = equidistant_partition(3, 0, unit);
    CHECK(p.m1() == 3);
    CHECK(p.m2() == 0);
    CHECK_THAT(p.min_first_eigenvalue, WithinRel(17.0 * pi * pi, 1e-14));
}

TEST_CASE("partition check compares against the Lipschitz constant") {
    const rectangle unit;
    const double lipschitz = 100.0;

    const sensor_partition single = make_partition(unit, {0.5}, {});
    const partition_check c1 = check_partition(single, lipschitz);
    CHECK_FALSE(c1.satisfied);
    CHECK_THAT(c1.margin, WithinAbs(5.0 * pi * pi - 100.0, 1e-12));

    const sensor_partition triple = make_partition(unit, {0.25, 0.5, 0.75}, {});
    const partition_check c3 = check_partition(triple, lipschitz);
    CHECK(c3.satisfied);
    CHECK_THAT(c3.margin, WithinAbs(17.0 * pi * pi - 100.0, 1e-12));
    CHECK(c3.envelope_rate == c3.margin);

    CHECK_THAT(observer_decay_envelope(triple, lipschitz, 2.0, 0.01),
               WithinRel(2.0 * std::exp(-(17.0 * pi * pi - 100.0) * 0.01), 1e-13));
    CHECK_THROWS_AS(observer_decay_envelope(single, lipschitz, 1.0, 0.1), envelope_invalid);
}

TEST_CASE("volume thresholds match their closed forms") {
    CHECK_THAT(volume_threshold(2, 100.0), WithinRel(pi / 50.0, 1e-13));
    CHECK_THAT(volume_threshold(1, pi * pi), WithinRel(1.0 / std::sqrt(3.0), 1e-13));
    CHECK_THROWS_AS(volume_threshold(0, 1.0), config_error);
    CHECK_THROWS_AS(volume_threshold(2, 0.0), config_error);
}

TEST_CASE("cells below the volume threshold guarantee a positive margin") {
    const rectangle unit;
    const double lipschitz = 100.0;
    const double threshold = volume_threshold(2, lipschitz);

    // equidistant family: all cells share one volume, comfortably checkable
    for (int m1 = 4; m1 <= 8; ++m1) {
        const sensor_partition p = equidistant_partition(m1, m1, unit);
        const double vol = 1.0 / double((m1 + 1) * (m1 + 1));
        REQUIRE(vol < threshold);
        CHECK(check_partition(p, lipschitz).margin > 0.0);
    }

    // random partitions: whenever every cell is below the threshold the
    // margin must be positive; larger cells make no claim
    std::mt19937_64 rng(99);
    int non_vacuous = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const sensor_partition p = random_partition(9, 9, unit, rng);
        double max_vol = 0;
        for (const rectangle& cell : p.subdomains) max_vol = std::max(max_vol, cell.area());
        if (max_vol < threshold) {
            ++non_vacuous;
            CHECK(check_partition(p, lipschitz).margin > 0.0);
        }
    }
    INFO("non-vacuous trials: " << non_vacuous);
    CHECK(non_vacuous > 0);
}

TEST_CASE("random partitions are seed-deterministic and never beat equidistant") {
    const rectangle unit;
    std::mt19937_64 a(42), b(42);
    const sensor_partition pa = random_partition(3, 0, unit, a);
    const sensor_partition pb = random_partition(3, 0, unit, b);
    REQUIRE(pa.vertical_lines.size() == pb.vertical_lines.size());
    for (std::size_t i = 0; i < pa.vertical_lines.size(); ++i)
        CHECK(pa.vertical_lines[i] == pb.vertical_lines[i]);

    const sensor_partition equi = equidistant_partition(3, 0, unit);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const sensor_partition p = random_partition(3, 0, unit, rng);
        CHECK(p.min_first_eigenvalue <= equi.min_first_eigenvalue * (1 + 1e-12));
    }
}

TEST_CASE("the minimal line search returns the frozen answer at L = 100") {
    const rectangle unit;
    const minimal_lines_result r = minimal_sensor_lines(100.0, unit);
    CHECK(r.m_total == 3);
    CHECK(r.m1 == 3);
    CHECK(r.m2 == 0);
    CHECK_THAT(r.rhs, WithinRel(17.0 * pi * pi, 1e-14));
    CHECK(r.partition.min_first_eigenvalue > 100.0);

    // tiny Lipschitz constants need no lines at all
    const minimal_lines_result none = minimal_sensor_lines(1.0, unit);
    CHECK(none.m_total == 0);
}
