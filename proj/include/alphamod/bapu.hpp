#pragma once

// Window systems subordinate to an alpha-covering.
//
// A radial profile phi (== 1 on [0,1], supported in [0,1.5)) is scaled to
// each patch, phi_k(xi) = phi(|xi - xi_k| / (c1 r_k)), and renormalised over
// the truncated index set either additively,
//   psi_k = phi_k / sum_l phi_l        (partition of unity),
// or quadratically,
//   theta_k = phi_k / sqrt(sum_l phi_l^2)   (square partition, frame window).
//
// Both renormalisations are exact by construction wherever the denominator is
// healthy. A denominator below 1e-14 at a point inside supp phi_k means the
// truncated family fails to cover that point (kmax or c1 too small) and
// raises coverage_violation. Outside supp phi_k the window is identically
// zero and no denominator is consulted.

#include <string>
#include <vector>

#include "covering.hpp"
#include "grid.hpp"

namespace alphamod {

enum class WindowProfile { bump, poly };

inline WindowProfile window_profile_from_name(const std::string& name) {
    if (name == "bump") return WindowProfile::bump;
    if (name == "poly") return WindowProfile::poly;
    throw registry_error("unknown window profile '" + name + "'");
}

inline const char* window_profile_name(WindowProfile p) {
    return p == WindowProfile::bump ? "bump" : "poly";
}

/// Radial profile on rho >= 0: 1 on [0,1], smooth descent on (1,1.5), 0 after.
/// "bump" uses the Gevrey bump exp(1 - 1/(1-u^2)); "poly" the quintic
/// smoothstep descent (C^2 at the seams).
inline double profile_eval(WindowProfile p, double rho) {
    if (rho <= 1.0) return 1.0;
    if (rho >= 1.5) return 0.0;
    double u = (rho - 1.0) / 0.5;
    switch (p) {
        case WindowProfile::bump:
            return std::exp(1.0 - 1.0 / (1.0 - u * u));
        case WindowProfile::poly:
            return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    }
    return 0.0;
}

class BapuSystem {
  public:
    BapuSystem(const CoveringParams& cov, WindowProfile profile)
        : cov_(cov), profile_(profile), ks_(cov.all_k()) {}

    const CoveringParams& covering() const { return cov_; }
    WindowProfile profile() const { return profile_; }
    const std::vector<IntVec>& indices() const { return ks_; }

    /// Unnormalised window phi_k; support is the open ball of radius
    /// 1.5 c1 r_k around xi_k.
    double phi(const IntVec& k, const Point& xi) const {
        cov_.check_index(k);
        double rad = cov_.radius(k);
        double rho = (xi - cov_.center(k)).norm() / rad;
        return profile_eval(profile_, rho);
    }

    double support_radius(const IntVec& k) const {
        return 1.5 * cov_.radius(k);
    }

    /// Partition-of-unity window.
    double psi(const IntVec& k, const Point& xi) const {
        double top = phi(k, xi);
        if (top == 0.0) return 0.0;
        double den = denominator(xi);
        if (den < 1e-14)
            throw coverage_violation(
                "psi: renormalisation denominator vanished (extend kmax or c1)");
        return top / den;
    }

    /// Square partition window used by the tight frame.
    double theta(const IntVec& k, const Point& xi) const {
        double top = phi(k, xi);
        if (top == 0.0) return 0.0;
        double den2 = sq_denominator(xi);
        if (den2 < 1e-28)
            throw coverage_violation(
                "theta: renormalisation denominator vanished (extend kmax or c1)");
        return top / std::sqrt(den2);
    }

    double denominator(const Point& xi) const {
        CompensatedSum acc;
        for (const IntVec& j : ks_) acc.add(phi(j, xi));
        return acc.value();
    }
    double sq_denominator(const Point& xi) const {
        CompensatedSum acc;
        for (const IntVec& j : ks_) {
            double v = phi(j, xi);
            acc.add(v * v);
        }
        return acc.value();
    }

  private:
    CoveringParams cov_;
    WindowProfile profile_;
    std::vector<IntVec> ks_;
};

/// Largest radius R such that sampling rays from the origin (axes, and the
/// diagonal for dim 2) stay inside the union of the c1-balls up to R. Used by
/// harnesses to pick sampling domains that the truncated family genuinely
/// covers.
inline double coverage_radius(const CoveringParams& cov, double step = 1e-3) {
    std::vector<Point> dirs;
    if (cov.dim == 1) {
        dirs = {Point(1.0), Point(-1.0)};
    } else {
        double s = 1.0 / std::sqrt(2.0);
        dirs = {Point(1.0, 0.0), Point(-1.0, 0.0), Point(0.0, 1.0),
                Point(0.0, -1.0), Point(s, s), Point(-s, -s)};
    }
    std::vector<FreqPatch> patches;
    for (const IntVec& k : cov.all_k()) patches.push_back(cov.patch(k));
    double best = std::numeric_limits<double>::infinity();
    for (const Point& d : dirs) {
        double r = 0.0;
        for (;; r += step) {
            Point xi = d * r;
            bool covered = false;
            for (const FreqPatch& p : patches)
                if (p.contains(xi)) {
                    covered = true;
                    break;
                }
            if (!covered) break;
        }
        best = std::min(best, r - step);
    }
    if (!(best > 0.0))
        throw coverage_violation("coverage_radius: family covers no neighborhood");
    return best;
}

/// Worst partition defects max |sum psi - 1| and max |sum theta^2 - 1| over
/// `samples` uniform points in |xi|_inf <= domain_radius.
struct PartitionDefect {
    double psi_defect = 0.0;
    double theta_defect = 0.0;
};

inline PartitionDefect check_partition(const BapuSystem& sys, double domain_radius,
                                       int samples, uint64_t seed) {
    PartitionDefect out;
    Rng rng(seed);
    const CoveringParams& cov = sys.covering();
    const std::vector<IntVec>& ks = sys.indices();
    std::vector<double> phis(ks.size());
    for (int t = 0; t < samples; ++t) {
        Point xi = Point::zero(cov.dim);
        do {
            for (int i = 0; i < cov.dim; ++i)
                xi[i] = rng.uniform(-domain_radius, domain_radius);
        } while (xi.norm() > domain_radius);
        CompensatedSum d1, d2;
        for (size_t j = 0; j < ks.size(); ++j) {
            phis[j] = sys.phi(ks[j], xi);
            d1.add(phis[j]);
            d2.add(phis[j] * phis[j]);
        }
        double den = d1.value(), den2 = d2.value();
        if (den < 1e-14)
            throw coverage_violation(
                "check_partition: sampled point not covered by the family");
        CompensatedSum sp, st;
        for (double v : phis) {
            sp.add(v / den);
            st.add(v * v / den2);
        }
        out.psi_defect = std::max(out.psi_defect, std::abs(sp.value() - 1.0));
        out.theta_defect = std::max(out.theta_defect, std::abs(st.value() - 1.0));
    }
    return out;
}

/// Fit the decay envelope of the window's inverse transform:
///   C = max over |x| <= T/2 of |F^-1(w_k)(x)| (1 + r_k |x|)^(n+1) / r_k^n.
/// The fit window stays inside half the box so the periodic wrap of the tail
/// does not pollute the constant. kind selects psi (default) or theta.
inline double check_bapu_decay(const BapuSystem& sys, const Grid& grid,
                               const IntVec& k, bool use_theta = false) {
    const CoveringParams& cov = sys.covering();
    if (grid.dim != cov.dim)
        throw structural_error("check_bapu_decay: grid/covering dim mismatch");
    double band_edge = cov.center(k).norm() + sys.support_radius(k);
    if (band_edge > grid.guard_radius())
        throw resolution_error(
            "check_bapu_decay: window support exceeds the guard band");
    SpectralSignal w = SpectralSignal::zeros(grid, 1);
    for (size_t i = 0; i < grid.size(); ++i) {
        Point xi = grid.xi(i);
        if (sys.phi(k, xi) == 0.0) continue;
        w.comp[0][i] = use_theta ? sys.theta(k, xi) : sys.psi(k, xi);
    }
    VectorSignal ker = inverse_ft(w);
    double r = cov.scale(k);
    double rn = std::pow(r, grid.dim);
    double C = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        Point x = grid.x(i);
        if (x.inf_norm() > 0.5 * grid.halfwidth) continue;
        double envelope = rn * std::pow(1.0 + r * x.norm(), -(grid.dim + 1.0));
        C = std::max(C, std::abs(ker.comp[0][i]) / envelope);
    }
    return C;
}

}  // namespace alphamod
