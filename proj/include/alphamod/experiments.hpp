// Experiment driver: builds domain objects from a parsed configuration,
// dispatches the experiment id to one module harness, and collects the
// results into a Report.  Every random draw is seeded from the config
// seed through sub-seeds, maps iterate in sorted order, and nothing
// wall-clock dependent enters the report payload, so a fixed config and
// seed reproduce the output files byte for byte.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "alphamod/almostdiag.hpp"
#include "alphamod/bapu.hpp"
#include "alphamod/config.hpp"
#include "alphamod/core.hpp"
#include "alphamod/covering.hpp"
#include "alphamod/frame.hpp"
#include "alphamod/grid.hpp"
#include "alphamod/multiplier.hpp"
#include "alphamod/norms.hpp"
#include "alphamod/report.hpp"
#include "alphamod/weights.hpp"

namespace alphamod {

inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "covering-check", "bapu-check",    "frame-tightness",
        "norm-equivalence", "ap-diagnostics", "doubling",
        "reducing",       "ad-membership", "ad-boundedness",
        "sampling-ineq",  "conv-probe",    "multiplier",
        "bessel",         "embedding-decay"};
    return ids;
}

namespace detail {

inline Grid grid_from(const ExperimentConfig& cfg) {
    int dim = static_cast<int>(cfg.integer("grid", "dim", 1));
    double T = cfg.has("grid", "halfwidth_over_pi")
                   ? cfg.num("grid", "halfwidth_over_pi", 16.0) * pi
                   : cfg.num("grid", "halfwidth", 16.0 * pi);
    int points = static_cast<int>(cfg.integer("grid", "points", 1024));
    return Grid::make(dim, T, points);
}

inline CoveringParams covering_from(const ExperimentConfig& cfg) {
    int dim = static_cast<int>(cfg.integer("grid", "dim", 1));
    return CoveringParams::make(cfg.num("covering", "alpha", 0.5), dim,
                                static_cast<int>(cfg.integer("covering", "kmax", 6)),
                                cfg.num("covering", "c1", -1.0),
                                cfg.num("covering", "a", -1.0));
}

inline CoveringParams quantized_covering(const ExperimentConfig& cfg,
                                         const Grid& g) {
    CoveringParams cov = covering_from(cfg);
    return cov.with_scale_quantum(pi / (2.0 * cov.a * g.halfwidth));
}

inline WindowProfile profile_from(const ExperimentConfig& cfg) {
    return window_profile_from_name(cfg.str("bapu", "profile", "bump"));
}

inline MatrixWeight weight_from(const ExperimentConfig& cfg) {
    int dim = static_cast<int>(cfg.integer("grid", "dim", 1));
    std::string gen = cfg.str("weight", "generator", "identity");
    double eps = cfg.num("weight", "eps", 0.0);
    bool br = cfg.flag("weight", "bracket", false);
    if (gen == "identity") {
        int N = static_cast<int>(cfg.integer("weight", "size", 1));
        if (N < 1 || N > 4)
            throw config_error(cfg.where("weight", "size") +
                               ": size must be in 1..4");
        return MatrixWeight::constant(dim, Matrix::Identity(N, N));
    }
    if (gen == "constant_diagonal") {
        std::vector<double> vals = cfg.num_list("weight", "values", {1.0});
        Matrix W0 = Matrix::Zero(static_cast<int>(vals.size()),
                                 static_cast<int>(vals.size()));
        for (size_t i = 0; i < vals.size(); ++i)
            W0(static_cast<int>(i), static_cast<int>(i)) = vals[i];
        return MatrixWeight::constant(dim, W0);
    }
    if (gen == "scalar_power")
        return MatrixWeight::scalar_power(dim, cfg.num("weight", "gamma", 0.5),
                                          eps, br);
    if (gen == "diagonal_power")
        return MatrixWeight::diagonal_power(
            dim, cfg.num_list("weight", "gammas", {0.5, 0.0}), eps, br);
    if (gen == "rotated_power")
        return MatrixWeight::rotated_power(
            dim, cfg.num("weight", "angle", 0.3),
            cfg.num_list("weight", "gammas", {0.5, 0.0}), eps, br);
    throw config_error(cfg.where("weight", "generator") +
                       ": unknown weight generator '" + gen + "'");
}

inline SmoothnessParams smoothness_from(const ExperimentConfig& cfg) {
    return SmoothnessParams::make(cfg.num("covering", "alpha", 0.5),
                                  cfg.num("smoothness", "s", 0.0),
                                  cfg.num("smoothness", "p", 2.0),
                                  cfg.num("smoothness", "q", 2.0));
}

inline AdParams ad_params_from(const ExperimentConfig& cfg) {
    return AdParams::make(cfg.num("almostdiag", "J", 2.0),
                          cfg.num("almostdiag", "delta", 1.0),
                          cfg.num("almostdiag", "M", 5.0),
                          cfg.num("almostdiag", "beta", 1.0),
                          cfg.num("smoothness", "s", 0.0),
                          cfg.num("smoothness", "p", 2.0),
                          cfg.num("smoothness", "q", 2.0),
                          static_cast<int>(cfg.integer("grid", "dim", 1)));
}

inline Symbol symbol_from(const ExperimentConfig& cfg) {
    int dim = static_cast<int>(cfg.integer("grid", "dim", 1));
    return Symbol::from_registry(dim, cfg.str("symbol", "name", "bracket_power"),
                                 cfg.num("symbol", "parameter", 1.0));
}

inline VectorSignal signal_from(const ExperimentConfig& cfg, const Grid& g,
                                int channels) {
    SignalParams params;
    auto it = cfg.sections.find("signal");
    if (it != cfg.sections.end())
        for (const auto& [key, val] : it->second)
            if (key != "name") params[key] = cfg.num("signal", key, 0.0);
    params["components"] = static_cast<double>(channels);
    std::string name = cfg.str("signal", "name", "gaussian");
    if (name == "gaussian" && params.find("sigma") == params.end())
        params["sigma"] = 1.0;
    return sample_closed_form(g, name, params);
}

inline double tol(const ExperimentConfig& cfg, const std::string& key,
                  double dflt) {
    return cfg.num("tolerances", key, dflt);
}

inline IntVec axis_index(int dim, int k) {
    return dim == 1 ? IntVec(k) : IntVec(k, 0);
}

inline SpectralSignal random_band_spectrum(const Grid& g, double radius,
                                           size_t channels, uint64_t seed) {
    SpectralSignal sh = SpectralSignal::zeros(g, channels);
    Rng rng(seed);
    for (size_t i = 0; i < g.size(); ++i) {
        if (g.xi(i).norm() >= radius) continue;
        for (size_t c = 0; c < channels; ++c) sh.comp[c][i] = rng.complex_normal();
    }
    return sh;
}

inline CoeffSeq random_sequence(const CoveringParams& cov, int lmax,
                                int channels, uint64_t seed) {
    CoeffSeq c;
    c.dim = cov.dim;
    c.channels = channels;
    Rng rng(seed);
    std::vector<IntVec> ls;
    if (cov.dim == 1) {
        for (int l = -lmax; l <= lmax; ++l) ls.push_back(IntVec(l));
    } else {
        for (int l0 = -lmax; l0 <= lmax; ++l0)
            for (int l1 = -lmax; l1 <= lmax; ++l1) ls.push_back(IntVec(l0, l1));
    }
    for (const IntVec& k : cov.all_k())
        for (const IntVec& l : ls) {
            std::vector<cd> v(static_cast<size_t>(channels));
            for (cd& z : v) z = rng.complex_normal();
            c.entries[KL{k, l}] = v;
        }
    return c;
}

// ---------------------------------------------------------------------------
// Harnesses, one per experiment id.
// ---------------------------------------------------------------------------

inline Report run_covering_check(const ExperimentConfig& cfg) {
    Report rep;
    CoveringParams cov = covering_from(cfg);
    double domain =
        cfg.num("covering", "domain_radius", 0.9 * coverage_radius(cov));
    int samples = static_cast<int>(cfg.integer("experiment", "samples_per_axis",
                                               cov.dim == 1 ? 2001 : 301));
    AdmissibilityReport ad = check_admissible(cov, domain, samples);
    rep.add_scalar("domain_radius", domain);
    rep.add_scalar("max_overlap", ad.max_overlap);
    rep.add_scalar("max_neighbor_count", ad.max_neighbor_count);
    rep.add_scalar("size_ratio_min", ad.size_ratio_min);
    rep.add_scalar("size_ratio_max", ad.size_ratio_max);
    rep.add_scalar("eccentricity", ad.eccentricity);
    rep.add_scalar("scale_ratio_max", ad.scale_ratio_max);
    rep.add_check("covers_domain", ad.covers_domain);
    rep.add_check("admissible", ad.admissible);
    rep.add_check("scale_ratio",
                  ad.scale_ratio_max <= tol(cfg, "max_scale_ratio", 4.0));
    double n0 = tol(cfg, "max_overlap", 0.0);
    if (n0 > 0.0) rep.add_check("overlap_count", ad.max_overlap <= n0);

    Table& t = rep.add_table(
        "patches", cov.dim == 1
                       ? std::vector<std::string>{"k", "center", "radius",
                                                  "cube_side"}
                       : std::vector<std::string>{"k0", "k1", "center0",
                                                  "center1", "radius",
                                                  "cube_side"});
    for (const IntVec& k : cov.all_k()) {
        FreqPatch p = cov.patch(k);
        std::vector<std::string> row;
        for (int d = 0; d < cov.dim; ++d) row.push_back(std::to_string(k[d]));
        for (int d = 0; d < cov.dim; ++d)
            row.push_back(format_sig17(p.center[d]));
        row.push_back(format_sig17(p.radius));
        row.push_back(format_sig17(cov.cube_side(k)));
        t.add_row(std::move(row));
    }
    return rep;
}

inline Report run_bapu_check(const ExperimentConfig& cfg) {
    Report rep;
    CoveringParams cov = covering_from(cfg);
    BapuSystem sys(cov, profile_from(cfg));
    double domain =
        cfg.num("covering", "domain_radius", 0.9 * coverage_radius(cov));
    int samples = static_cast<int>(cfg.integer("experiment", "samples", 10000));
    PartitionDefect d = check_partition(sys, domain, samples, cfg.seed);
    rep.add_scalar("psi_defect", d.psi_defect);
    rep.add_scalar("theta_defect", d.theta_defect);
    double gate = tol(cfg, "partition_defect", 1e-12);
    rep.add_check("psi_partition", d.psi_defect <= gate);
    rep.add_check("theta_partition", d.theta_defect <= gate);

    // a radial profile of the two sums for plotting
    Table& t = rep.add_table("ray", {"radius", "psi_sum", "theta_sq_sum"});
    for (int i = 0; i <= 32; ++i) {
        double r = domain * static_cast<double>(i) / 32.0;
        Point xi = Point::zero(cov.dim);
        xi[0] = r;
        CompensatedSum s1, s2;
        for (const IntVec& k : sys.indices()) {
            double ph = sys.phi(k, xi);
            double th = sys.theta(k, xi);
            s1.add(ph);
            s2.add(th * th);
        }
        t.add_row({format_sig17(r), format_sig17(s1.value()),
                   format_sig17(s2.value())});
    }
    return rep;
}

inline Report run_frame_tightness(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = quantized_covering(cfg, g);
    FrameSystem sys(cov, profile_from(cfg), g);
    int count = static_cast<int>(cfg.integer("experiment", "signals", 20));
    size_t channels =
        static_cast<size_t>(cfg.integer("experiment", "channels", 1));
    double band = 0.95 * std::min(g.guard_radius(), coverage_radius(cov));

    Table& t = rep.add_table("signals", {"signal", "residual", "parseval"});
    double worst_res = 0.0, worst_par = 0.0;
    for (int i = 0; i < count; ++i) {
        VectorSignal f = inverse_ft(random_band_spectrum(
            g, band, channels, Rng::sub_seed(cfg.seed, static_cast<uint64_t>(i))));
        TightnessReport r = tight_frame_residual(sys, f);
        worst_res = std::max(worst_res, r.residual);
        worst_par = std::max(worst_par, r.parseval_defect);
        t.add_row({std::to_string(i), format_sig17(r.residual),
                   format_sig17(r.parseval_defect)});
    }
    rep.add_scalar("max_residual", worst_res);
    rep.add_scalar("max_parseval_defect", worst_par);
    rep.add_check("reconstruction", worst_res <= tol(cfg, "residual", 1e-8));
    rep.add_check("parseval", worst_par <= tol(cfg, "parseval", 1e-8));
    return rep;
}

inline Report run_norm_equivalence(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = covering_from(cfg);
    MatrixWeight W = weight_from(cfg);
    SmoothnessParams sp = smoothness_from(cfg);
    int lmax = static_cast<int>(cfg.integer("experiment", "lmax", 4));
    int trials = static_cast<int>(cfg.integer("experiment", "trials", 50));
    ReducingMethod method =
        sp.p == 2.0 ? ReducingMethod::exact_p2 : ReducingMethod::ellipsoid_fit;

    // discrete vs reducing norm bracket, repeated on the doubled lattice
    auto bracket = [&](int lm, uint64_t salt, Table& table,
                       const char* tag) -> std::pair<double, double> {
        ReducingFamily fam = build_reducing_family(W, sp.p, cov, lm, method);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int tr = 0; tr < trials; ++tr) {
            CoeffSeq c = random_sequence(
                cov, lm, W.N, Rng::sub_seed(cfg.seed, salt + static_cast<uint64_t>(tr)));
            double dn = m_discrete_norm(cov, g, W, sp, c).value;
            double rn = m_reducing_norm(fam, cov, sp, c).value;
            if (rn == 0.0) continue;
            double ratio = dn / rn;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            table.add_row({tag, std::to_string(tr), format_sig17(ratio)});
        }
        return {lo, hi};
    };
    Table& seq_table = rep.add_table("sequence_ratios", {"lattice", "trial",
                                                         "discrete_over_reducing"});
    auto [lo1, hi1] = bracket(lmax, 100, seq_table, "base");
    auto [lo2, hi2] = bracket(2 * lmax, 5000, seq_table, "doubled");
    double width1 = hi1 / lo1, width2 = hi2 / lo2;
    rep.add_scalar("bracket_lo", lo1);
    rep.add_scalar("bracket_hi", hi1);
    rep.add_scalar("bracket_width", width1);
    rep.add_scalar("bracket_width_doubled", width2);
    rep.add_check("bracket_stable",
                  std::abs(width2 / width1 - 1.0) <=
                      tol(cfg, "bracket_drift", 0.10));

    // scalarization identity: |A_Q s| fed through the scalar norm must
    // reproduce the reducing norm
    {
        ReducingFamily fam = build_reducing_family(W, sp.p, cov, lmax, method);
        CoeffSeq c = random_sequence(cov, lmax, W.N, Rng::sub_seed(cfg.seed, 7));
        ScalarSeq t;
        Vector v(W.N);
        for (const auto& e : c.entries) {
            for (int ch = 0; ch < W.N; ++ch) v(ch) = e.second[static_cast<size_t>(ch)];
            t[e.first] = (fam.at(e.first) * v).norm();
        }
        double a = scalar_m_norm(cov, sp, t).value;
        double b = m_reducing_norm(fam, cov, sp, c).value;
        double defect = std::abs(a - b) / std::max(a, b);
        rep.add_scalar("connection_defect", defect);
        rep.add_check("connection_identity",
                      defect <= tol(cfg, "connection", 1e-14));
    }

    // continuous norm: BAPU independence and psi-vs-theta window brackets
    int signals = static_cast<int>(cfg.integer("experiment", "signals", 20));
    BapuSystem bump(cov, WindowProfile::bump);
    BapuSystem poly(cov, WindowProfile::poly);
    double band = 0.9 * std::min(g.guard_radius(), coverage_radius(cov));
    Table& sig_table =
        rep.add_table("signal_ratios", {"signal", "poly_over_bump",
                                        "theta_over_psi"});
    double blo = std::numeric_limits<double>::infinity(), bhi = 0.0;
    double wlo = blo, whi = 0.0;
    for (int i = 0; i < signals; ++i) {
        VectorSignal f = inverse_ft(random_band_spectrum(
            g, band, static_cast<size_t>(W.N),
            Rng::sub_seed(cfg.seed, 300 + static_cast<uint64_t>(i))));
        double nb = m_continuous_norm(bump, W, sp, f, ContWindow::psi).value;
        double np = m_continuous_norm(poly, W, sp, f, ContWindow::psi).value;
        double nt = m_continuous_norm(bump, W, sp, f, ContWindow::theta).value;
        if (nb == 0.0) continue;
        blo = std::min(blo, np / nb);
        bhi = std::max(bhi, np / nb);
        wlo = std::min(wlo, nt / nb);
        whi = std::max(whi, nt / nb);
        sig_table.add_row({std::to_string(i), format_sig17(np / nb),
                           format_sig17(nt / nb)});
    }
    rep.add_scalar("bapu_ratio_lo", blo);
    rep.add_scalar("bapu_ratio_hi", bhi);
    rep.add_scalar("window_ratio_lo", wlo);
    rep.add_scalar("window_ratio_hi", whi);
    rep.add_check("bapu_independent",
                  bhi / blo <= tol(cfg, "bapu_ratio_spread", 4.0));
    rep.add_check("window_equivalent",
                  whi / wlo <= tol(cfg, "window_ratio_spread", 4.0));
    return rep;
}

inline Report run_ap_diagnostics(const ExperimentConfig& cfg) {
    Report rep;
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    double R = cfg.num("experiment", "cube_radius", 8.0);
    int base_nodes =
        static_cast<int>(cfg.integer("experiment", "base_nodes", 0));
    std::string expect = cfg.str("experiment", "expect", "finite");

    Table& t =
        rep.add_table("extensions", {"radius", "estimate", "divergent"});
    std::vector<double> values;
    bool any_divergent = false;
    for (double r : {R, 2.0 * R, 4.0 * R}) {
        std::vector<CubeSpec> cubes = default_cube_family(W.dim, r);
        WeightClassReport w =
            p > 1.0 ? ap_constant_estimate(W, p, cubes, base_nodes)
                    : a1_constant_estimate(W, cubes, base_nodes);
        values.push_back(w.value);
        any_divergent = any_divergent || w.divergent;
        t.add_row({format_sig17(r), format_sig17(w.value),
                   w.divergent ? "true" : "false"});
    }
    double vmin = *std::min_element(values.begin(), values.end());
    double vmax = *std::max_element(values.begin(), values.end());
    rep.add_scalar("estimate", values.back());
    rep.add_scalar("extension_spread", vmax / vmin - 1.0);
    if (expect == "divergent") {
        rep.add_check("flagged_divergent", any_divergent);
    } else {
        rep.add_check("finite", !any_divergent);
        rep.add_check("scale_stable", vmax / vmin - 1.0 <=
                                          tol(cfg, "stability", 0.05));
        double want = tol(cfg, "expected_constant", 0.0);
        if (want > 0.0)
            rep.add_check("matches_expected",
                          std::abs(values.back() - want) <=
                              tol(cfg, "constant_tolerance", 1e-10) * want);
    }
    return rep;
}

inline Report run_doubling(const ExperimentConfig& cfg) {
    Report rep;
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    DoublingPlan plan =
        default_doubling_plan(W.dim, W.N, Rng::sub_seed(cfg.seed, 9));
    plan.nodes_per_axis =
        static_cast<int>(cfg.integer("experiment", "nodes_per_axis", 0));
    DoublingReport d = doubling_exponent_estimate(W, p, plan);
    rep.add_scalar("beta", d.beta);
    rep.add_scalar("doubling_constant", d.c);
    rep.add_scalar("direction_spread", d.y_spread);
    rep.add_check("finite", std::isfinite(d.beta));
    if (cfg.has("tolerances", "expected_beta"))
        rep.add_check("matches_expected",
                      std::abs(d.beta - tol(cfg, "expected_beta", 0.0)) <=
                          tol(cfg, "beta_tolerance", 0.05));
    Table& t = rep.add_table("summary", {"beta", "constant", "spread"});
    t.add_row({format_sig17(d.beta), format_sig17(d.c),
               format_sig17(d.y_spread)});
    return rep;
}

inline Report run_reducing(const ExperimentConfig& cfg) {
    Report rep;
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    CoveringParams cov = covering_from(cfg);
    int lmax = static_cast<int>(cfg.integer("experiment", "lmax", 3));
    ReducingOptions opt;
    opt.seed = Rng::sub_seed(cfg.seed, 17);

    Table& t = rep.add_table("cubes", {"k", "l", "kappa", "agreement"});
    double worst = 1.0, worst_kappa = 1.0;
    std::vector<int> krows = {0};
    if (cov.kmax >= 2) krows.push_back(2);
    for (int kv : krows) {
        IntVec k = axis_index(cov.dim, kv);
        for (int lv = -lmax; lv <= lmax; ++lv) {
            IntVec l = axis_index(cov.dim, lv);
            TimeCube cube = cov.cube(k, l);
            ReducingResult fit =
                reducing_operator(W, p, cube, ReducingMethod::ellipsoid_fit, opt);
            worst_kappa = std::max(worst_kappa, fit.kappa);
            double agree = 1.0;
            if (p == 2.0) {
                ReducingResult exact =
                    reducing_operator(W, p, cube, ReducingMethod::exact_p2, opt);
                Rng rng(Rng::sub_seed(cfg.seed, 1000 + static_cast<uint64_t>(
                                                            lv + 100 * kv)));
                double hi = 0.0, lo = std::numeric_limits<double>::infinity();
                for (int d = 0; d < 32; ++d) {
                    Vector y(W.N);
                    for (int i = 0; i < W.N; ++i) y(i) = rng.complex_normal();
                    double ny = y.norm();
                    if (ny == 0.0) continue;
                    double rv = (fit.A * y).norm() / (exact.A * y).norm();
                    hi = std::max(hi, rv);
                    lo = std::min(lo, rv);
                }
                agree = std::max(hi, 1.0 / lo);
                worst = std::max(worst, agree);
            }
            t.add_row({std::to_string(kv), std::to_string(lv),
                       format_sig17(fit.kappa), format_sig17(agree)});
        }
    }
    rep.add_scalar("max_kappa", worst_kappa);
    rep.add_scalar("max_agreement_factor", worst);
    rep.add_check("kappa_finite", std::isfinite(worst_kappa));
    if (p == 2.0)
        rep.add_check("matches_exact",
                      worst <= tol(cfg, "ellipsoid_factor", 1.5));
    return rep;
}

inline Report run_ad_membership(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    AdParams par = ad_params_from(cfg);
    CoveringParams cov = covering_from(cfg);
    int wk = static_cast<int>(
        cfg.integer("experiment", "window_kmax", std::min(4, cov.kmax)));
    int wl = static_cast<int>(cfg.integer("experiment", "window_lrad", 4));

    DecayMatrix omega = omega_matrix(par, cov, wk, wl);
    AdMembership self = ad_membership_scalar(omega, par, cov);
    rep.add_scalar("omega_self_constant", self.fitted_constant);
    rep.add_check("omega_self_unit",
                  std::abs(self.fitted_constant - 1.0) <=
                      tol(cfg, "self_tolerance", 1e-12));

    // frame Gram on an interior window
    CoveringParams covq = quantized_covering(cfg, g);
    FrameSystem sys(covq, profile_from(cfg), g);
    int gk = std::min(wk, covq.kmax - 1);
    if (gk < 0) gk = 0;
    MultiplierGramReport gram = multiplier_gram(
        sys, Symbol::constant(covq.dim, cd(1.0, 0.0)), par, gk, wl);
    AdMembership sym = ad_membership_scalar(gram.matrix, par, covq, true);
    rep.add_scalar("gram_symmetric_constant", sym.fitted_constant);
    rep.add_scalar("gram_weighted_constant", gram.fit.fitted_constant);
    rep.add_check("gram_symmetric_finite",
                  std::isfinite(sym.fitted_constant) &&
                      sym.fitted_constant > 0.0);
    rep.add_check("gram_weighted_finite",
                  std::isfinite(gram.fit.fitted_constant) &&
                      gram.fit.fitted_constant > 0.0);

    Table& t = rep.add_table("membership", {"bound", "fitted_constant"});
    t.add_row({"omega_self", format_sig17(self.fitted_constant)});
    t.add_row({"gram_symmetric", format_sig17(sym.fitted_constant)});
    t.add_row({"gram_weighted", format_sig17(gram.fit.fitted_constant)});
    return rep;
}

inline Report run_ad_boundedness(const ExperimentConfig& cfg) {
    Report rep;
    AdParams par = ad_params_from(cfg);
    CoveringParams cov = covering_from(cfg);
    SmoothnessParams sp = smoothness_from(cfg);
    int wk = static_cast<int>(
        cfg.integer("experiment", "window_kmax", std::min(4, cov.kmax)));
    int wl = static_cast<int>(cfg.integer("experiment", "window_lrad", 6));
    int trials = static_cast<int>(cfg.integer("experiment", "trials", 40));

    DecayMatrix narrow = omega_matrix(par, cov, wk, wl);
    DecayMatrix wide = omega_matrix(par, cov, wk, 2 * wl);
    ProbeReport pn =
        boundedness_probe(narrow, cov, sp, trials, cfg.seed, 12, wk, wl);
    ProbeReport pw =
        boundedness_probe(wide, cov, sp, trials, cfg.seed, 12, wk, wl);
    double drift = pw.max_ratio / pn.max_ratio - 1.0;
    rep.add_scalar("narrow_max_ratio", pn.max_ratio);
    rep.add_scalar("wide_max_ratio", pw.max_ratio);
    rep.add_scalar("window_drift", drift);
    rep.add_check("bounded", std::isfinite(pn.max_ratio) && pn.max_ratio > 0.0);
    rep.add_check("window_stable", drift <= tol(cfg, "drift", 0.10));
    Table& t = rep.add_table("probes", {"window_lrad", "max_ratio"});
    t.add_row({std::to_string(wl), format_sig17(pn.max_ratio)});
    t.add_row({std::to_string(2 * wl), format_sig17(pw.max_ratio)});
    return rep;
}

inline Report run_sampling_ineq(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = covering_from(cfg);
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    int kp = static_cast<int>(
        cfg.integer("experiment", "k_probe_max", std::min(8, cov.kmax)));
    int per_k = static_cast<int>(cfg.integer("experiment", "signals_per_k", 6));
    Grid g2 = Grid::make(g.dim, g.halfwidth, 2 * g.points);

    auto fitted = [&](const Grid& grid, std::vector<double>& per_band) {
        double c = 0.0;
        for (int kv = 0; kv <= kp; ++kv) {
            IntVec k = axis_index(cov.dim, kv);
            double band_max = 0.0;
            for (int tr = 0; tr < per_k; ++tr) {
                Rng rng(Rng::sub_seed(cfg.seed,
                                      static_cast<uint64_t>(kv) * 1000u +
                                          static_cast<uint64_t>(tr)));
                VectorSignal probe = band_limited_probe(
                    grid, cov, k, rng, static_cast<size_t>(W.N));
                SamplingReport s = sampling_inequality_check(cov, W, p, k, probe);
                band_max = std::max(band_max, s.ratio);
            }
            per_band.push_back(band_max);
            c = std::max(c, band_max);
        }
        return c;
    };
    std::vector<double> base_band, fine_band;
    double c1 = fitted(g, base_band);
    double c2 = fitted(g2, fine_band);
    double drift = std::abs(c2 / c1 - 1.0);
    rep.add_scalar("fitted_c", c1);
    rep.add_scalar("fitted_c_refined", c2);
    rep.add_scalar("refinement_drift", drift);
    rep.add_check("uniform", std::isfinite(c1) && c1 > 0.0);
    rep.add_check("refinement_stable",
                  drift <= tol(cfg, "refinement_drift", 0.10));
    Table& t =
        rep.add_table("per_band", {"k", "max_ratio", "max_ratio_refined"});
    for (int kv = 0; kv <= kp; ++kv)
        t.add_row({std::to_string(kv),
                   format_sig17(base_band[static_cast<size_t>(kv)]),
                   format_sig17(fine_band[static_cast<size_t>(kv)])});
    return rep;
}

inline Report run_conv_probe(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    VectorSignal f = signal_from(cfg, g, W.N);

    double dmin = cfg.num("experiment", "delta_min", 1e2);
    double dmax = cfg.num("experiment", "delta_max", 1e6);
    int count = static_cast<int>(cfg.integer("experiment", "delta_count", 5));
    if (count < 2 || !(dmin > 0.0) || !(dmax > dmin))
        throw config_error(cfg.origin +
                           ": conv-probe needs 0 < delta_min < delta_max and "
                           "delta_count >= 2");
    std::vector<double> deltas;
    for (int i = 0; i < count; ++i)
        deltas.push_back(dmin * std::pow(dmax / dmin,
                                         static_cast<double>(i) / (count - 1)));
    ConvProbeReport r = convolution_bound_probe(W, p, f, deltas);
    double lo = *std::min_element(r.ratios.begin(), r.ratios.end());
    rep.add_scalar("max_ratio", r.max_ratio);
    rep.add_scalar("min_ratio", lo);
    rep.add_check("bounded", std::isfinite(r.max_ratio));
    rep.add_check("delta_stable",
                  lo > 0.0 && r.max_ratio / lo <= tol(cfg, "delta_spread", 1.2));
    double cap = tol(cfg, "max_ratio", 0.0);
    if (cap > 0.0) rep.add_check("mass_bound", r.max_ratio <= cap);
    Table& t = rep.add_table("ratios", {"delta", "ratio"});
    for (size_t i = 0; i < r.deltas.size(); ++i)
        t.add_row({format_sig17(r.deltas[i]), format_sig17(r.ratios[i])});
    return rep;
}

inline Report run_multiplier(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = quantized_covering(cfg, g);
    FrameSystem sys(cov, profile_from(cfg), g);
    Symbol m = symbol_from(cfg);
    AdParams par = ad_params_from(cfg);

    // identity path: the constant symbol must return the signal unchanged
    VectorSignal f = sample_closed_form(g, "chirp", {{"rate", 0.4},
                                                     {"sigma", 2.0}});
    VectorSignal idf = apply_multiplier(Symbol::constant(cov.dim, cd(1.0, 0.0)), f);
    double fmax = 0.0, ierr = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        fmax = std::max(fmax, std::abs(f.comp[0][i]));
        ierr = std::max(ierr, std::abs(idf.comp[0][i] - f.comp[0][i]));
    }
    rep.add_scalar("identity_defect", ierr / fmax);
    rep.add_check("identity", ierr <= tol(cfg, "identity", 1e-13) * fmax);

    // symbol class condition to the available derivative orders
    SymbolClassReport cls =
        symbol_class_check(m, g, cov.alpha, std::min(3, m.max_order));
    Table& ct = rep.add_table("class", {"order", "sup", "stable"});
    bool stable = cls.all_finite;
    for (size_t o = 0; o < cls.sup_by_order.size(); ++o) {
        stable = stable && cls.stable[o];
        ct.add_row({std::to_string(o), format_sig17(cls.sup_by_order[o]),
                    cls.stable[o] ? "true" : "false"});
    }
    rep.add_scalar("class_sup_order0", cls.sup_by_order[0]);
    rep.add_check("class_finite", cls.all_finite);
    rep.add_check("class_stable", stable);

    // frame discretization: envelope fit and off-neighbor vanishing
    int wk = static_cast<int>(cfg.integer(
        "experiment", "window_kmax", std::min(3, cov.kmax - 1)));
    int wl = static_cast<int>(cfg.integer("experiment", "window_lrad", 4));
    MultiplierGramReport gram = multiplier_gram(sys, m, par, wk, wl);
    double worst_disjoint = 0.0;
    long disjoint = 0;
    for (const auto& e : gram.matrix.entries) {
        const IntVec& rk = e.first.first.k;
        const IntVec& ck = e.first.second.k;
        double sep = (cov.center(rk) - cov.center(ck)).norm();
        double reach = 1.5 * cov.c1 * (cov.scale(rk) + cov.scale(ck));
        if (sep > reach + 1e-9) {
            ++disjoint;
            worst_disjoint = std::max(worst_disjoint, std::abs(e.second));
        }
    }
    rep.add_scalar("gram_constant", gram.fit.fitted_constant);
    rep.add_scalar("disjoint_pairs", static_cast<double>(disjoint));
    rep.add_scalar("worst_disjoint_entry", worst_disjoint);
    rep.add_check("gram_finite", std::isfinite(gram.fit.fitted_constant));
    if (disjoint > 0)
        rep.add_check("disjoint_vanish",
                      worst_disjoint <= tol(cfg, "disjoint", 1e-12));
    return rep;
}

inline Report run_bessel(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = covering_from(cfg);
    BapuSystem sys(cov, profile_from(cfg));
    MatrixWeight W = weight_from(cfg);
    SmoothnessParams sp = smoothness_from(cfg);
    double b = cfg.num("smoothness", "b", 1.0);
    int count = static_cast<int>(cfg.integer("experiment", "signals", 8));
    double band = 0.8 * std::min(g.guard_radius(), coverage_radius(cov));

    std::vector<SpectralSignal> spectra;
    std::vector<VectorSignal> corpus;
    for (int i = 0; i < count; ++i) {
        spectra.push_back(random_band_spectrum(
            g, band, static_cast<size_t>(W.N),
            Rng::sub_seed(cfg.seed, static_cast<uint64_t>(i))));
        corpus.push_back(inverse_ft(spectra.back()));
    }
    BesselReport coarse = bessel_equivalence_experiment(sys, W, sp, b, corpus);

    // identical spectra on the doubled grid
    Grid g2 = Grid::make(g.dim, g.halfwidth, 2 * g.points);
    std::vector<VectorSignal> refined;
    for (const SpectralSignal& sh : spectra) {
        SpectralSignal up = SpectralSignal::zeros(g2, sh.comp.size());
        long shift = (g2.points - g.points) / 2;
        if (g.dim == 1) {
            for (long i = 0; i < g.points; ++i)
                for (size_t c = 0; c < sh.comp.size(); ++c)
                    up.comp[c][static_cast<size_t>(i + shift)] =
                        sh.comp[c][static_cast<size_t>(i)];
        } else {
            for (long i = 0; i < g.points; ++i)
                for (long j = 0; j < g.points; ++j)
                    for (size_t c = 0; c < sh.comp.size(); ++c)
                        up.comp[c][static_cast<size_t>((i + shift) * g2.points +
                                                       (j + shift))] =
                            sh.comp[c][static_cast<size_t>(i * g.points + j)];
        }
        refined.push_back(inverse_ft(up));
    }
    BesselReport fine = bessel_equivalence_experiment(sys, W, sp, b, refined);

    rep.add_scalar("ratio_lo", coarse.lo);
    rep.add_scalar("ratio_hi", coarse.hi);
    rep.add_scalar("ratio_lo_refined", fine.lo);
    rep.add_scalar("ratio_hi_refined", fine.hi);
    if (b == 0.0) {
        double gate = tol(cfg, "identity", 1e-13);
        rep.add_check("identity_ratios",
                      std::abs(coarse.lo - 1.0) <= gate &&
                          std::abs(coarse.hi - 1.0) <= gate);
    }
    rep.add_check("bracketed",
                  coarse.hi / coarse.lo <= tol(cfg, "bracket", 10.0));
    double drift = std::max(std::abs(fine.lo / coarse.lo - 1.0),
                            std::abs(fine.hi / coarse.hi - 1.0));
    rep.add_scalar("refinement_drift", drift);
    rep.add_check("refinement_stable",
                  drift <= tol(cfg, "refinement_drift", 0.10));
    Table& t = rep.add_table("ratios", {"signal", "ratio", "ratio_refined"});
    for (size_t i = 0; i < coarse.ratios.size(); ++i)
        t.add_row({std::to_string(i), format_sig17(coarse.ratios[i]),
                   format_sig17(fine.ratios[i])});
    return rep;
}

inline Report run_embedding_decay(const ExperimentConfig& cfg) {
    Report rep;
    Grid g = grid_from(cfg);
    CoveringParams cov = covering_from(cfg);
    BapuSystem sys(cov, profile_from(cfg));
    MatrixWeight W = weight_from(cfg);
    double p = cfg.num("smoothness", "p", 2.0);
    double L = cfg.num("experiment", "L", 4.0);
    double min_norm = cfg.num("experiment", "min_norm", 4.0);

    SignalParams params{{"sigma", cfg.num("signal", "sigma", 0.1)}};
    params["components"] = static_cast<double>(W.N);
    VectorSignal f =
        sample_closed_form(g, cfg.str("signal", "name", "gaussian"), params);
    DecayFit fit = embedding_decay_check(sys, W, p, f, L, min_norm);
    rep.add_scalar("fitted_exponent", fit.fitted_exponent);
    rep.add_scalar("fitted_constant", fit.fitted_constant);
    rep.add_scalar("target_exponent", fit.target_exponent);
    rep.add_scalar("bands_used", static_cast<double>(fit.points));
    rep.add_check("decay_reaches_target",
                  fit.fitted_exponent >=
                      fit.target_exponent *
                          (1.0 - tol(cfg, "exponent_tolerance", 0.10)));
    Table& t = rep.add_table(
        "fit", {"fitted_exponent", "fitted_constant", "target", "bands"});
    t.add_row({format_sig17(fit.fitted_exponent),
               format_sig17(fit.fitted_constant),
               format_sig17(fit.target_exponent), std::to_string(fit.points)});
    return rep;
}

}  // namespace detail

/// Cross-field sanity diagnostics, computed without running the experiment.
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    const std::string& id = cfg.id;
    if (id.empty()) {
        out.push_back("missing experiment id ([experiment] id = ...)");
        return out;
    }
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        out.push_back("unknown experiment id '" + id + "'");
        return out;
    }

    auto attempt = [&](const char* what, auto&& fn) {
        try {
            fn();
            return true;
        } catch (const std::exception& e) {
            out.push_back(std::string(what) + ": " + e.what());
            return false;
        }
    };

    bool needs_grid = id != "covering-check" && id != "bapu-check" &&
                      id != "ap-diagnostics" && id != "doubling" &&
                      id != "reducing";
    bool needs_cov = id != "ap-diagnostics" && id != "doubling" &&
                     id != "conv-probe";
    bool grid_ok = !needs_grid || attempt("grid", [&] { detail::grid_from(cfg); });
    bool cov_ok = !needs_cov ||
                  attempt("covering", [&] { detail::covering_from(cfg); });
    if (id != "covering-check")
        attempt("bapu", [&] { detail::profile_from(cfg); });
    attempt("weight", [&] { detail::weight_from(cfg); });
    attempt("smoothness", [&] { detail::smoothness_from(cfg); });
    if (id == "ad-membership" || id == "ad-boundedness" || id == "multiplier")
        attempt("almostdiag", [&] { detail::ad_params_from(cfg); });
    if (id == "multiplier")
        attempt("symbol", [&] { detail::symbol_from(cfg); });

    if (!grid_ok || !cov_ok || !needs_grid || !needs_cov) return out;

    Grid g = detail::grid_from(cfg);
    CoveringParams cov = detail::covering_from(cfg);
    double guard = g.guard_radius();
    IntVec outer = detail::axis_index(cov.dim, cov.kmax);
    bool frame_based =
        id == "frame-tightness" || id == "ad-membership" || id == "multiplier";
    bool spectral = frame_based || id == "norm-equivalence" ||
                    id == "sampling-ineq" || id == "bessel" ||
                    id == "embedding-decay";
    if (spectral) {
        // frame experiments need the full period box on the grid; the
        // others only the window support
        double margin = frame_based ? cov.a : cov.c1;
        double corner = 0.0;
        Point c0 = cov.center(outer);
        for (int d = 0; d < cov.dim; ++d) {
            double e = std::abs(c0[d]) + margin * cov.scale(outer);
            corner += e * e;
        }
        if (std::sqrt(corner) > guard)
            out.push_back(frame_based
                              ? "band exceeds guard band: outermost patch "
                                "needs a larger grid or smaller kmax"
                              : "window support exceeds guard band: outermost "
                                "patch needs a larger grid or smaller kmax");
    }

    if (id == "norm-equivalence" || id == "sampling-ineq") {
        if (cov.cube_side(outer) < 2.0 * g.spacing())
            out.push_back(
                "quadrature under-resolved: cube side at the outermost patch "
                "is below two grid spacings");
    }
    return out;
}

/// Dispatch one experiment; the report echoes the configuration, carries
/// named scalars/checks/tables, and the aggregate pass flag.
inline Report run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    Report rep;
    if (cfg.id == "covering-check") rep = detail::run_covering_check(cfg);
    else if (cfg.id == "bapu-check") rep = detail::run_bapu_check(cfg);
    else if (cfg.id == "frame-tightness") rep = detail::run_frame_tightness(cfg);
    else if (cfg.id == "norm-equivalence") rep = detail::run_norm_equivalence(cfg);
    else if (cfg.id == "ap-diagnostics") rep = detail::run_ap_diagnostics(cfg);
    else if (cfg.id == "doubling") rep = detail::run_doubling(cfg);
    else if (cfg.id == "reducing") rep = detail::run_reducing(cfg);
    else if (cfg.id == "ad-membership") rep = detail::run_ad_membership(cfg);
    else if (cfg.id == "ad-boundedness") rep = detail::run_ad_boundedness(cfg);
    else if (cfg.id == "sampling-ineq") rep = detail::run_sampling_ineq(cfg);
    else if (cfg.id == "conv-probe") rep = detail::run_conv_probe(cfg);
    else if (cfg.id == "multiplier") rep = detail::run_multiplier(cfg);
    else if (cfg.id == "bessel") rep = detail::run_bessel(cfg);
    else if (cfg.id == "embedding-decay") rep = detail::run_embedding_decay(cfg);
    else
        throw config_error("unknown experiment id '" + cfg.id + "'");

    rep.experiment = cfg.id;
    rep.inputs.emplace_back("experiment.id", cfg.id);
    rep.inputs.emplace_back("experiment.seed", std::to_string(cfg.seed));
    for (const auto& [sec, keys] : cfg.sections)
        for (const auto& [key, val] : keys) {
            if (sec == "experiment" && (key == "id" || key == "seed")) continue;
            rep.inputs.emplace_back(sec + "." + key, val);
        }
    rep.runtime_seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    return rep;
}

}  // namespace alphamod
