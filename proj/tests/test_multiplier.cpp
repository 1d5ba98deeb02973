// Fourier multipliers: registry symbols and their closed-form derivatives,
// class supremum estimates, spectral application, the frame-discretized
// operator matrix, and the bracket-power norm-equivalence experiment.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "alphamod/multiplier.hpp"

using namespace alphamod;

namespace {

Point pt1(double x) {
    Point p = Point::zero(1);
    p[0] = x;
    return p;
}

Point pt2(double x, double y) {
    Point p = Point::zero(2);
    p[0] = x;
    p[1] = y;
    return p;
}

// three adjacent spectral nodes near xi0; the signal is exactly
// band-limited and single-patch when xi0 sits deep inside one band
VectorSignal three_node_signal(const Grid& g, double xi0) {
    SpectralSignal sh = SpectralSignal::zeros(g, 1);
    long mid = std::lround(xi0 / g.freq_spacing()) + g.points / 2;
    sh.comp[0][static_cast<size_t>(mid - 1)] = cd(0.4, -0.1);
    sh.comp[0][static_cast<size_t>(mid)] = cd(1.0, 0.3);
    sh.comp[0][static_cast<size_t>(mid + 1)] = cd(-0.2, 0.5);
    return inverse_ft(sh);
}

}  // namespace

TEST_CASE("symbol registry and derivative contracts") {
    Symbol c = Symbol::from_registry(1, "constant", 2.5);
    REQUIRE(c.value(pt1(3.0)) == cd(2.5, 0.0));
    REQUIRE(c.order == 0.0);

    Symbol br = Symbol::from_registry(2, "bracket_power", 1.5);
    REQUIRE(br.order == 1.5);
    Symbol sc = Symbol::from_registry(1, "smooth_compact", 4.0);
    REQUIRE(sc.order == 0.0);

    REQUIRE_THROWS_AS(Symbol::from_registry(1, "unknown", 1.0), registry_error);
    REQUIRE_THROWS_AS(Symbol::bracket_power(1, std::nan("")), invalid_parameter);
    REQUIRE_THROWS_AS(Symbol::smooth_compact(1, 0.0), invalid_parameter);
    REQUIRE_THROWS_AS(Symbol::smooth_compact(1, -2.0), invalid_parameter);
    REQUIRE_THROWS_AS(Symbol::constant(3, cd(1, 0)), invalid_parameter);

    // derivative order beyond the stored closed forms
    REQUIRE_THROWS_AS(br.derivative(pt2(1, 1), IntVec(2, 2)), domain_error);
    REQUIRE_THROWS_AS(br.derivative(pt2(1, 1), IntVec(4, 0)), domain_error);
    REQUIRE_THROWS_AS(br.derivative(pt1(1.0), IntVec(1)), structural_error);
    REQUIRE_THROWS_AS(br.derivative(pt2(1, 1), IntVec(-1, 0)),
                      invalid_parameter);
}

TEST_CASE("bracket power derivatives match closed forms") {
    double b = 1.7;
    Symbol m = Symbol::bracket_power(1, b);
    for (double x : {0.0, 0.5, -2.0, 7.0}) {
        double br = std::sqrt(1.0 + x * x);
        double d1 = b * x * std::pow(br, b - 2.0);
        double d2 = b * std::pow(br, b - 2.0) +
                    b * (b - 2.0) * x * x * std::pow(br, b - 4.0);
        double d3 = 3.0 * b * (b - 2.0) * x * std::pow(br, b - 4.0) +
                    b * (b - 2.0) * (b - 4.0) * x * x * x * std::pow(br, b - 6.0);
        REQUIRE(m.derivative(pt1(x), IntVec(0)).real() ==
                Catch::Approx(std::pow(br, b)).epsilon(1e-14));
        REQUIRE(m.derivative(pt1(x), IntVec(1)).real() ==
                Catch::Approx(d1).margin(1e-13));
        REQUIRE(m.derivative(pt1(x), IntVec(2)).real() ==
                Catch::Approx(d2).epsilon(1e-13));
        REQUIRE(m.derivative(pt1(x), IntVec(3)).real() ==
                Catch::Approx(d3).margin(1e-12));
    }

    // mixed partials in two dimensions against central differences
    Symbol m2 = Symbol::bracket_power(2, -0.8);
    double h = 1e-4;
    Point at = pt2(0.9, -1.4);
    double fd11 = (m2.value(pt2(at[0] + h, at[1] + h)).real() -
                   m2.value(pt2(at[0] + h, at[1] - h)).real() -
                   m2.value(pt2(at[0] - h, at[1] + h)).real() +
                   m2.value(pt2(at[0] - h, at[1] - h)).real()) /
                  (4.0 * h * h);
    REQUIRE(m2.derivative(at, IntVec(1, 1)).real() ==
            Catch::Approx(fd11).epsilon(1e-6));
    double fd21 = (m2.derivative(pt2(at[0], at[1] + h), IntVec(2, 0)).real() -
                   m2.derivative(pt2(at[0], at[1] - h), IntVec(2, 0)).real()) /
                  (2.0 * h);
    REQUIRE(m2.derivative(at, IntVec(2, 1)).real() ==
            Catch::Approx(fd21).epsilon(1e-6));
}

TEST_CASE("smooth compact symbols vanish outside their ball") {
    double R = 4.0;
    Symbol m = Symbol::smooth_compact(1, R);
    REQUIRE(m.value(pt1(0.0)).real() == 1.0);
    REQUIRE(m.value(pt1(R)).real() == 0.0);
    REQUIRE(m.value(pt1(1.2 * R)).real() == 0.0);
    for (int o = 1; o <= 3; ++o) {
        REQUIRE(m.derivative(pt1(R), IntVec(o)).real() == 0.0);
        REQUIRE(m.derivative(pt1(-1.5 * R), IntVec(o)).real() == 0.0);
    }

    // strictly decreasing along the radius
    double prev = 1.0;
    for (double x : {0.5, 1.5, 2.5, 3.5}) {
        double v = m.value(pt1(x)).real();
        REQUIRE(v < prev);
        REQUIRE(v > 0.0);
        prev = v;
    }

    // first derivative against a central difference on the slope
    double h = 1e-5, x0 = 0.7 * R;
    double fd = (m.value(pt1(x0 + h)).real() - m.value(pt1(x0 - h)).real()) /
                (2.0 * h);
    REQUIRE(m.derivative(pt1(x0), IntVec(1)).real() ==
            Catch::Approx(fd).epsilon(1e-7));
}

TEST_CASE("class check pins constants and flags growth") {
    Grid g = Grid::make(1, 16.0 * pi, 2048);

    SECTION("constant symbol") {
        SymbolClassReport rep =
            symbol_class_check(Symbol::constant(1, cd(1, 0)), g, 0.5, 3);
        REQUIRE(rep.all_finite);
        REQUIRE(rep.sup_by_order[0] == 1.0);
        REQUIRE(rep.sup_by_order[1] == 0.0);
        REQUIRE(rep.sup_by_order[2] == 0.0);
        REQUIRE(rep.sup_by_order[3] == 0.0);
        for (bool s : rep.stable) REQUIRE(s);
    }

    SECTION("bracket power passes to order three") {
        double b = 1.3, alpha = 0.5;
        SymbolClassReport rep =
            symbol_class_check(Symbol::bracket_power(1, b), g, alpha, 3);
        REQUIRE(rep.all_finite);
        REQUIRE(rep.sup_by_order[0] == Catch::Approx(1.0).margin(1e-12));
        // order one: sup_x |b| x <x>^{alpha-2} attained at x = sqrt(2)
        double analytic = b * std::sqrt(2.0) * std::pow(3.0, 0.5 * (alpha - 2.0));
        REQUIRE(rep.sup_by_order[1] <= analytic * (1.0 + 1e-9));
        REQUIRE(rep.sup_by_order[1] >= 0.99 * analytic);
        REQUIRE(rep.sup_by_order[2] > 0.0);
        REQUIRE(rep.sup_by_order[3] > 0.0);
        for (bool s : rep.stable) REQUIRE(s);
    }

    SECTION("misdeclared growth is flagged as unstable") {
        Symbol lying = Symbol::bracket_power(1, 1.0);
        lying.order = 0.0;  // claims boundedness it does not have
        SymbolClassReport rep = symbol_class_check(lying, g, 0.5, 1);
        REQUIRE_FALSE(rep.stable[0]);
    }

    SECTION("smooth compact support keeps every order stable") {
        SymbolClassReport rep =
            symbol_class_check(Symbol::smooth_compact(1, 5.0), g, 1.0 / 3.0, 3);
        REQUIRE(rep.all_finite);
        REQUIRE(rep.sup_by_order[0] == 1.0);
        for (size_t o = 1; o < rep.sup_by_order.size(); ++o)
            REQUIRE(rep.sup_by_order[o] > 0.0);
        for (bool s : rep.stable) REQUIRE(s);
    }

    SECTION("contract violations") {
        Symbol br = Symbol::bracket_power(1, 1.0);
        REQUIRE_THROWS_AS(symbol_class_check(br, g, 0.5, 4), domain_error);
        REQUIRE_THROWS_AS(symbol_class_check(br, g, 1.0, 2), invalid_parameter);
        REQUIRE_THROWS_AS(symbol_class_check(br, g, 0.5, -1), invalid_parameter);
        Grid g2 = Grid::make(2, 4.0 * pi, 64);
        REQUIRE_THROWS_AS(symbol_class_check(br, g2, 0.5, 2), structural_error);
    }
}

TEST_CASE("application is spectral multiplication") {
    Grid g = Grid::make(1, 16.0 * pi, 1024);

    SECTION("unit symbols act as the identity") {
        VectorSignal f =
            sample_closed_form(g, "chirp", {{"rate", 0.6}, {"sigma", 2.0}});
        double fmax = 0.0;
        for (size_t i = 0; i < g.size(); ++i)
            fmax = std::max(fmax, std::abs(f.comp[0][i]));
        for (const Symbol& m :
             {Symbol::constant(1, cd(1, 0)), Symbol::bracket_power(1, 0.0)}) {
            VectorSignal out = apply_multiplier(m, f);
            double err = 0.0;
            for (size_t i = 0; i < g.size(); ++i)
                err = std::max(err, std::abs(out.comp[0][i] - f.comp[0][i]));
            REQUIRE(err <= 1e-13 * fmax);
        }
    }

    SECTION("bracket square equals one minus the Laplacian") {
        VectorSignal f = sample_closed_form(g, "gaussian", {{"sigma", 1.0}});
        VectorSignal out = apply_multiplier(Symbol::bracket_power(1, 2.0), f);

        // closed form: (2 - x^2) exp(-x^2/2)
        double err = 0.0;
        for (size_t i = 0; i < g.size(); ++i) {
            double x = g.x(i)[0];
            double want = (2.0 - x * x) * std::exp(-0.5 * x * x);
            err = std::max(err, std::abs(out.comp[0][i] - want));
        }
        REQUIRE(err <= 1e-10);

        // two-path spectral assembly: f + F^{-1}(|xi|^2 f^)
        SpectralSignal fh = forward_ft(f);
        for (size_t i = 0; i < g.size(); ++i)
            fh.comp[0][i] *= g.xi(i).norm_sq();
        VectorSignal lap = inverse_ft(fh);
        double err2 = 0.0;
        for (size_t i = 0; i < g.size(); ++i)
            err2 = std::max(err2, std::abs(out.comp[0][i] - f.comp[0][i] -
                                           lap.comp[0][i]));
        REQUIRE(err2 <= 1e-12);
    }

    SECTION("composition of bracket powers") {
        VectorSignal f = sample_closed_form(g, "modulated_gaussian",
                                            {{"sigma", 1.5}, {"xi0_0", 3.0}});
        VectorSignal once = apply_multiplier(Symbol::bracket_power(1, 3.0), f);
        VectorSignal twice = apply_multiplier(
            Symbol::bracket_power(1, 2.0),
            apply_multiplier(Symbol::bracket_power(1, 1.0), f));
        double scale = 0.0, err = 0.0;
        for (size_t i = 0; i < g.size(); ++i) {
            scale = std::max(scale, std::abs(once.comp[0][i]));
            err = std::max(err, std::abs(once.comp[0][i] - twice.comp[0][i]));
        }
        REQUIRE(err <= 1e-11 * scale);
    }

    SECTION("channels are treated coordinate-wise") {
        VectorSignal f1 = sample_closed_form(g, "gaussian", {{"sigma", 1.0}});
        VectorSignal f2 = sample_closed_form(g, "chirp", {{"sigma", 1.0}});
        VectorSignal both = VectorSignal::zeros(g, 2);
        both.comp[0] = f1.comp[0];
        both.comp[1] = f2.comp[0];
        Symbol m = Symbol::bracket_power(1, 1.2);
        VectorSignal o = apply_multiplier(m, both);
        VectorSignal o1 = apply_multiplier(m, f1);
        VectorSignal o2 = apply_multiplier(m, f2);
        for (size_t i = 0; i < g.size(); i += 97) {
            REQUIRE(o.comp[0][i] == o1.comp[0][i]);
            REQUIRE(o.comp[1][i] == o2.comp[0][i]);
        }
        Grid g2 = Grid::make(2, 4.0 * pi, 32);
        VectorSignal f2d = sample_closed_form(g2, "gaussian", {{"sigma", 1.0}});
        REQUIRE_THROWS_AS(apply_multiplier(m, f2d), structural_error);
    }
}

TEST_CASE("multiplier matrices reduce to the frame gram for unit symbols") {
    Grid g = Grid::make(1, 16.0 * pi, 2048);
    CoveringParams cov = CoveringParams::make(0.5, 1, 6);
    cov = cov.with_scale_quantum(pi / (2.0 * cov.a * g.halfwidth));
    FrameSystem sys(cov, WindowProfile::bump, g);
    AdParams par = AdParams::make(2.0, 1.0, 5.0, 1.0, 0.0, 2.0, 1.0, 1);

    MultiplierGramReport unit =
        multiplier_gram(sys, Symbol::constant(1, cd(1, 0)), par, 3, 4);
    REQUIRE(unit.matrix.entries.size() == size_t(63 * 63));
    REQUIRE(unit.fit.fitted_constant > 0.0);
    REQUIRE(std::isfinite(unit.fit.fitted_constant));
    REQUIRE(unit.matrix.fitted_constant == unit.fit.fitted_constant);

    // entries are plain atom pairings
    double dxi = g.freq_spacing();
    for (auto probe : {std::pair<KL, KL>{KL{IntVec(1), IntVec(0)},
                                         KL{IntVec(2), IntVec(1)}},
                       {KL{IntVec(0), IntVec(-2)}, KL{IntVec(0), IntVec(3)}},
                       {KL{IntVec(-3), IntVec(4)}, KL{IntVec(-2), IntVec(0)}}}) {
        FrameAtom ra = sys.atom(probe.first.k, probe.first.l);
        FrameAtom ca = sys.atom(probe.second.k, probe.second.l);
        cd want(0.0, 0.0);
        for (size_t nd : sys.band_nodes(probe.first.k))
            want += std::conj(ra.spectrum.comp[0][nd]) * ca.spectrum.comp[0][nd];
        want *= dxi;
        REQUIRE(std::abs(unit.matrix.entries.at(probe) - want) <=
                1e-15 * (1.0 + std::abs(want)));
    }

    // bracket power with b = 0 is the same operator
    MultiplierGramReport unit2 =
        multiplier_gram(sys, Symbol::bracket_power(1, 0.0), par, 3, 4);
    for (const auto& e : unit.matrix.entries)
        REQUIRE(unit2.matrix.entries.at(e.first) == e.second);

    // exhaustively: disjoint window supports give vanishing entries
    size_t disjoint = 0;
    for (const auto& e : unit.matrix.entries) {
        const KL& r = e.first.first;
        const KL& c = e.first.second;
        double sep = (cov.center(r.k) - cov.center(c.k)).norm();
        double reach = 1.5 * cov.c1 * (cov.scale(r.k) + cov.scale(c.k));
        if (sep > reach + 1e-9) {
            ++disjoint;
            REQUIRE(std::abs(e.second) <= 1e-12);
        }
    }
    REQUIRE(disjoint > 0);

    // growing symbols: the discretized operator still fits its envelope
    MultiplierGramReport grown =
        multiplier_gram(sys, Symbol::bracket_power(1, 1.0), par, 3, 4);
    REQUIRE(std::isfinite(grown.fit.fitted_constant));
    REQUIRE(grown.fit.fitted_constant > 0.0);

    REQUIRE_THROWS_AS(
        multiplier_gram(sys, Symbol::constant(2, cd(1, 0)), par, 2, 2),
        structural_error);
    REQUIRE_THROWS_AS(
        multiplier_gram(sys, Symbol::constant(1, cd(1, 0)), par, 9, 2),
        invalid_parameter);
}

TEST_CASE("in-band multiplier entries decay cubically in the shift") {
    // Deep shift window: a long period (many nodes per band) keeps the
    // discrete phases alias-free out to shift 96, and an interior row
    // (|k| < kmax) keeps the window smooth at its support edge.  The tail
    // of a bump window decays faster than any power, but within a finite
    // shift window the fitted log-log exponent is what is observable.
    Grid g = Grid::make(1, 48.0 * pi, 1024);
    CoveringParams cov = CoveringParams::make(0.5, 1, 2);
    cov = cov.with_scale_quantum(pi / (2.0 * cov.a * g.halfwidth));
    FrameSystem sys(cov, WindowProfile::bump, g);
    AdParams par = AdParams::make(2.0, 1.0, 5.0, 1.0, 0.0, 2.0, 1.0, 1);

    MultiplierGramReport band =
        multiplier_gram(sys, Symbol::bracket_power(1, 1.0), par, 1, 96);
    REQUIRE(std::isfinite(band.fit.fitted_constant));

    std::vector<double> xs, ys;
    for (int mm = 1; mm <= 96; ++mm) {
        cd v = band.matrix.entries.at(
            {KL{IntVec(1), IntVec(0)}, KL{IntVec(1), IntVec(mm)}});
        if (std::abs(v) < 1e-280) continue;
        xs.push_back(std::log(1.0 + mm));
        ys.push_back(std::log(std::abs(v)));
    }
    REQUIRE(xs.size() >= 48);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double nn = double(xs.size());
    double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    REQUIRE(-slope >= 3.0);
}

TEST_CASE("bessel experiment brackets the norm equivalence") {
    Grid g = Grid::make(1, 16.0 * pi, 1024);
    CoveringParams cov = CoveringParams::make(0.5, 1, 6);
    BapuSystem sys(cov, WindowProfile::bump);
    MatrixWeight W = MatrixWeight::constant(1, Matrix::Identity(1, 1));
    SmoothnessParams sp = SmoothnessParams::make(0.5, 0.0, 2.0, 2.0);

    std::vector<VectorSignal> corpus;
    for (int t = 0; t < 4; ++t) {
        Rng rng(Rng::sub_seed(3100, static_cast<uint64_t>(t)));
        SpectralSignal sh = SpectralSignal::zeros(g, 1);
        for (size_t i = 0; i < g.size(); ++i)
            if (std::abs(g.xi(i)[0]) < 25.0) sh.comp[0][i] = rng.complex_normal();
        corpus.push_back(inverse_ft(sh));
    }

    SECTION("identity power gives unit ratios") {
        BesselReport rep = bessel_equivalence_experiment(sys, W, sp, 0.0, corpus);
        REQUIRE(rep.lo == Catch::Approx(1.0).margin(1e-13));
        REQUIRE(rep.hi == Catch::Approx(1.0).margin(1e-13));
    }

    SECTION("single-patch signals admit a two-path check") {
        double b = 0.8;
        VectorSignal f = three_node_signal(g, cov.center(IntVec(2))[0]);
        BesselReport rep = bessel_equivalence_experiment(
            sys, W, SmoothnessParams::make(0.5, 0.3, 2.0, 2.0), b, {f});
        double r2 = cov.scale(IntVec(2));
        VectorSignal bf = apply_multiplier(Symbol::bracket_power(1, b), f);
        double direct = std::pow(r2, 0.3) * lp_w_norm(W, 2.0, bf) /
                        (std::pow(r2, 0.3 + b) * lp_w_norm(W, 2.0, f));
        REQUIRE(rep.lo == Catch::Approx(direct).epsilon(1e-10));
        REQUIRE(rep.hi == Catch::Approx(direct).epsilon(1e-10));
    }

    SECTION("bracket ratios stay in a stable band under refinement") {
        BesselReport coarse =
            bessel_equivalence_experiment(sys, W, sp, 1.0, corpus);
        REQUIRE(coarse.lo > 0.1);
        REQUIRE(coarse.hi < 10.0);
        REQUIRE(coarse.hi / coarse.lo < 10.0);

        // same spectra, twice the resolution
        Grid fine = Grid::make(1, 16.0 * pi, 2048);
        long shift = (fine.points - g.points) / 2;
        std::vector<VectorSignal> refined;
        for (const VectorSignal& f : corpus) {
            SpectralSignal sh = forward_ft(f);
            SpectralSignal up = SpectralSignal::zeros(fine, 1);
            for (long i = 0; i < g.points; ++i)
                up.comp[0][static_cast<size_t>(i + shift)] = sh.comp[0][static_cast<size_t>(i)];
            refined.push_back(inverse_ft(up));
        }
        BesselReport finer =
            bessel_equivalence_experiment(sys, W, sp, 1.0, refined);
        REQUIRE(finer.lo == Catch::Approx(coarse.lo).epsilon(0.10));
        REQUIRE(finer.hi == Catch::Approx(coarse.hi).epsilon(0.10));
    }

    SECTION("contract violations") {
        REQUIRE_THROWS_AS(bessel_equivalence_experiment(sys, W, sp, 1.0, {}),
                          invalid_parameter);
        std::vector<VectorSignal> zero{VectorSignal::zeros(g, 1)};
        REQUIRE_THROWS_AS(bessel_equivalence_experiment(sys, W, sp, 1.0, zero),
                          invalid_parameter);
    }
}
