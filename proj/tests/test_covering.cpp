// Covering geometry tests. Scales, centers, cube volumes, neighbor sets and
// admissibility verdicts are checked against values computed independently
// from the defining formulas.

#include <catch2/catch_amalgamated.hpp>

#include "alphamod/covering.hpp"

using namespace alphamod;
using Catch::Approx;

TEST_CASE("scale function") {
    REQUIRE(r_of_k(0.0, IntVec(7)) == 1.0);
    REQUIRE(r_of_k(0.5, IntVec(2)) == Approx(std::sqrt(5.0)).epsilon(1e-15));
    REQUIRE(r_of_k(0.5, IntVec(0)) == 1.0);
    // alpha = 2/3: exponent 2, r_k = 1 + k^2
    REQUIRE(r_of_k(2.0 / 3.0, IntVec(3)) == Approx(10.0).epsilon(1e-14));
    // 2d
    REQUIRE(r_of_k(0.5, IntVec(1, 2)) == Approx(std::sqrt(6.0)).epsilon(1e-15));
    REQUIRE_THROWS_AS(r_of_k(1.0, IntVec(1)), invalid_parameter);
    REQUIRE_THROWS_AS(r_of_k(-0.1, IntVec(1)), invalid_parameter);

    // monotone in |k| and in alpha (for |k| >= 1)
    for (int k = 0; k < 8; ++k)
        REQUIRE(r_of_k(0.5, IntVec(k)) < r_of_k(0.5, IntVec(k + 1)));
    REQUIRE(r_of_k(1.0 / 3.0, IntVec(5)) < r_of_k(0.5, IntVec(5)));
}

TEST_CASE("patch geometry") {
    Point xi = xi_of_k(0.5, IntVec(2));
    REQUIRE(xi[0] == Approx(2.0 * std::sqrt(5.0)).epsilon(1e-15));

    CoveringParams cov = CoveringParams::make(0.5, 1, 8, 1.0);
    FreqPatch p = cov.patch(IntVec(2));
    REQUIRE(p.scale == Approx(std::sqrt(5.0)));
    REQUIRE(p.radius == Approx(std::sqrt(5.0)));
    REQUIRE(p.contains(Point(2.0 * std::sqrt(5.0))));
    REQUIRE_FALSE(p.contains(Point(2.0 * std::sqrt(5.0) + p.radius)));
    REQUIRE(p.volume() == Approx(2.0 * std::sqrt(5.0)));
}

TEST_CASE("parameter defaults and validation") {
    CoveringParams c1d = CoveringParams::make(0.0, 1, 4);
    REQUIRE(c1d.c1 == Approx(1.0));
    REQUIRE(c1d.a == Approx(2.25));
    CoveringParams c2d = CoveringParams::make(0.0, 2, 4);
    REQUIRE(c2d.c1 == Approx(std::sqrt(2.0)));
    REQUIRE(c2d.a == Approx(2.0 * std::sqrt(2.0) + 0.25));
    // a must exceed the floor strictly
    REQUIRE_THROWS_AS(CoveringParams::make(0.0, 1, 4, 1.0, 2.0),
                      invalid_parameter);
    REQUIRE_NOTHROW(CoveringParams::make(0.0, 1, 4, 1.0, pi));
}

TEST_CASE("time cubes tile and carry the stated volume") {
    // alpha = 0, a = pi: unit cubes anchored at integers
    CoveringParams cov = CoveringParams::make(0.0, 1, 4, 1.0, pi);
    TimeCube q = cov.cube(IntVec(0), IntVec(3));
    REQUIRE(q.anchor[0] == Approx(3.0));
    REQUIRE(q.side == Approx(1.0));
    REQUIRE(q.volume() == Approx(1.0));
    REQUIRE(q.sample_point()[0] == Approx(3.0));
    REQUIRE(q.contains(Point(3.0)));
    REQUIRE(q.contains(Point(3.999)));
    REQUIRE_FALSE(q.contains(Point(4.0)));

    // alpha = 1/2, default a = 2.25: side (pi/a)/sqrt(5) at k = 2
    CoveringParams cov5 = CoveringParams::make(0.5, 1, 8, 1.0);
    TimeCube q5 = cov5.cube(IntVec(2), IntVec(0));
    REQUIRE(q5.side == Approx((pi / 2.25) / std::sqrt(5.0)).epsilon(1e-14));
    REQUIRE(q5.volume() == Approx((pi / 2.25) / std::sqrt(5.0)).epsilon(1e-14));

    // partition property: random points land in exactly one cube
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Point x(rng.uniform(-20.0, 20.0));
        IntVec l = cov5.locate_cube(IntVec(2), x);
        REQUIRE(cov5.cube(IntVec(2), l).contains(x));
        for (int d : {-1, 1}) {
            IntVec lo = l;
            lo[0] += d;
            REQUIRE_FALSE(cov5.cube(IntVec(2), lo).contains(x));
        }
    }

    // 2d partition
    CoveringParams cov2 = CoveringParams::make(0.5, 2, 4);
    for (int trial = 0; trial < 100; ++trial) {
        Point x(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
        IntVec l = cov2.locate_cube(IntVec(1, -2), x);
        REQUIRE(cov2.cube(IntVec(1, -2), l).contains(x));
    }
}

TEST_CASE("neighbor sets") {
    CoveringParams cov = CoveringParams::make(0.0, 1, 16, 1.0, pi);
    auto nb = patch_neighbors(cov, IntVec(5));
    REQUIRE(nb.size() == 3);
    REQUIRE(nb[0] == IntVec(4));
    REQUIRE(nb[1] == IntVec(5));
    REQUIRE(nb[2] == IntVec(6));

    CoveringParams tight = CoveringParams::make(0.0, 1, 16, 0.4, pi);
    auto nb2 = patch_neighbors(tight, IntVec(5));
    REQUIRE(nb2.size() == 1);
    REQUIRE(nb2[0] == IntVec(5));
}

TEST_CASE("admissibility verdicts") {
    // canonical alpha = 0 family covers with pointwise overlap 2
    CoveringParams cov = CoveringParams::make(0.0, 1, 16, 1.0, pi);
    AdmissibilityReport rep = check_admissible(cov, 13.0);
    REQUIRE(rep.covers_domain);
    REQUIRE(rep.admissible);
    REQUIRE(rep.max_overlap <= 3);  // 2n+1
    REQUIRE(rep.scale_ratio_max == Approx(1.0));
    REQUIRE(rep.eccentricity == Approx(1.0));
    // |B_k| = 2 for every k; <xi_k>^0 = 1
    REQUIRE(rep.size_ratio_min == Approx(2.0));
    REQUIRE(rep.size_ratio_max == Approx(2.0));

    // shrunken radii leave gaps
    CoveringParams thin = CoveringParams::make(0.0, 1, 16, 0.4, pi);
    REQUIRE_FALSE(check_admissible(thin, 13.0).covers_domain);

    // alpha = 1/2 with c1 = 1 covers; comparable scales on intersections
    CoveringParams half = CoveringParams::make(0.5, 1, 16, 1.0);
    AdmissibilityReport rh = check_admissible(half, 100.0, 4001);
    REQUIRE(rh.covers_domain);
    REQUIRE(rh.scale_ratio_max <= 4.0);

    // alpha = 2/3 with c1 = 1 has interior gaps (first one near xi = 4.5);
    // widening to c1 = 1.7 restores coverage
    CoveringParams thin23 = CoveringParams::make(2.0 / 3.0, 1, 8, 1.0);
    REQUIRE_FALSE(check_admissible(thin23, 20.0, 8001).covers_domain);
    CoveringParams wide23 = CoveringParams::make(2.0 / 3.0, 1, 8, 1.7);
    REQUIRE(check_admissible(wide23, 20.0, 8001).covers_domain);

    // 2d lattice at alpha = 0 with c1 = sqrt(2): a disk of radius sqrt(2)
    // holds up to 7 lattice points, so the pointwise overlap tops out there
    CoveringParams two = CoveringParams::make(0.0, 2, 4);
    AdmissibilityReport r2 = check_admissible(two, 3.5, 301);
    REQUIRE(r2.covers_domain);
    REQUIRE(r2.max_overlap <= 7);
}

TEST_CASE("quantized scales stay within the quantum and keep r >= 1") {
    double quantum = 1.0 / 72.0;
    CoveringParams cov =
        CoveringParams::make(0.5, 1, 16, 1.0).with_scale_quantum(quantum);
    for (const IntVec& k : cov.all_k()) {
        double exact = r_of_k(cov.alpha, k);
        double quant = cov.scale(k);
        REQUIRE(std::abs(quant - exact) <= 0.5 * quantum + 1e-12);
        REQUIRE(quant >= 1.0 - 1e-12);
        double steps = quant / quantum;
        REQUIRE(std::abs(steps - std::round(steps)) <= 1e-9);
    }
    REQUIRE(cov.scale(IntVec(0)) == Approx(1.0));
}
