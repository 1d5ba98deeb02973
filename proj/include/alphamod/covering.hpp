#pragma once

// Frequency-side alpha-covering geometry and the dual time-side cube
// partition.
//
// For alpha in [0,1) and k in Z^n the scale, center and patch are
//   r_k  = <k>^(alpha/(1-alpha)),   xi_k = k * r_k,
//   B_k  = open ball (xi_k, c1 * r_k),
// and for each k the cubes
//   Q(k,l) = (pi/a) r_k^-1 l + [0, (pi/a) r_k^-1)^n,   l in Z^n,
// tile R^n. The anchor x_{k,l} = (pi/a) r_k^-1 l is the sampling point the
// frame's coefficient identity evaluates at.
//
// A covering may carry a positive scale quantum rho; scales are then rounded
// to multiples of rho. The frame module uses this to make every band width
// commensurate with the sampling grid (relative perturbation <= rho/2); all
// geometry derived from the covering stays mutually consistent because it is
// computed from scale(k), never from r_of_k directly.

#include <algorithm>
#include <vector>

#include "core.hpp"

namespace alphamod {

/// Exact scale r_k = <k>^(alpha/(1-alpha)).
inline double r_of_k(double alpha, const IntVec& k) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw invalid_parameter("r_of_k: alpha must lie in [0,1)");
    if (alpha == 0.0) return 1.0;
    return std::pow(bracket(k), alpha / (1.0 - alpha));
}

/// Patch center xi_k = k * r_k.
inline Point xi_of_k(double alpha, const IntVec& k) {
    return k.to_point() * r_of_k(alpha, k);
}

struct FreqPatch {
    IntVec k;
    double scale = 1.0;   ///< r_k (possibly quantized)
    Point center;         ///< xi_k
    double radius = 1.0;  ///< c1 * r_k

    bool contains(const Point& xi) const {
        return (xi - center).norm() < radius;
    }
    bool intersects(const FreqPatch& o) const {
        return (center - o.center).norm() < radius + o.radius;
    }
    /// Lebesgue volume of the open ball.
    double volume() const {
        return center.dim == 1 ? 2.0 * radius : pi * radius * radius;
    }
};

struct TimeCube {
    IntVec k;
    IntVec l;
    double side = 1.0;
    Point anchor;

    double volume() const {
        return anchor.dim == 1 ? side : side * side;
    }
    /// x_{k,l}: the anchor corner, used as the sampling point.
    Point sample_point() const { return anchor; }
    /// Half-open membership test; the cubes of fixed k tile R^n.
    bool contains(const Point& x) const {
        for (int i = 0; i < anchor.dim; ++i)
            if (x[i] < anchor[i] || x[i] >= anchor[i] + side) return false;
        return true;
    }
};

struct CoveringParams {
    double alpha = 0.0;
    int dim = 1;
    double c1 = 1.0;          ///< patch radius factor
    double a = 0.0;           ///< band cube halfwidth factor, a > max(2 c1, pi sqrt(n)/2)
    int kmax = 0;             ///< truncation |k|_inf <= kmax
    double scale_quantum = 0; ///< 0 = exact scales

    /// c1 < 0 or a < 0 select the defaults c1 = sqrt(n) and
    /// a = max(2 c1, pi sqrt(n)/2) + 0.25.
    static CoveringParams make(double alpha, int dim, int kmax, double c1 = -1.0,
                               double a = -1.0) {
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw invalid_parameter("CoveringParams: alpha must lie in [0,1)");
        if (dim != 1 && dim != 2)
            throw invalid_parameter("CoveringParams: dim must be 1 or 2");
        if (kmax < 0) throw invalid_parameter("CoveringParams: kmax >= 0");
        double sq = std::sqrt(static_cast<double>(dim));
        if (c1 < 0.0) c1 = sq;
        if (!(c1 > 0.0)) throw invalid_parameter("CoveringParams: c1 > 0");
        double floor_a = std::max(2.0 * c1, pi * sq / 2.0);
        if (a < 0.0) a = floor_a + 0.25;
        if (!(a > floor_a))
            throw invalid_parameter(
                "CoveringParams: a must exceed max(2 c1, pi sqrt(n)/2)");
        return CoveringParams{alpha, dim, c1, a, kmax, 0.0};
    }

    CoveringParams with_scale_quantum(double q) const {
        if (!(q > 0.0))
            throw invalid_parameter("with_scale_quantum: quantum must be positive");
        CoveringParams p = *this;
        p.scale_quantum = q;
        return p;
    }

    /// r_k, rounded to the scale quantum when one is set.
    double scale(const IntVec& k) const {
        double r = r_of_k(alpha, k);
        if (scale_quantum <= 0.0) return r;
        double q = scale_quantum;
        double rq = std::max(1.0, std::round(r / q)) * q;
        return rq;
    }

    Point center(const IntVec& k) const { return k.to_point() * scale(k); }
    double radius(const IntVec& k) const { return c1 * scale(k); }

    FreqPatch patch(const IntVec& k) const {
        check_index(k);
        return FreqPatch{k, scale(k), center(k), radius(k)};
    }

    double cube_side(const IntVec& k) const { return (pi / a) / scale(k); }

    TimeCube cube(const IntVec& k, const IntVec& l) const {
        check_index(k);
        if (l.dim != dim) throw structural_error("cube: l dimension mismatch");
        double side = cube_side(k);
        Point anchor = l.to_point() * side;
        return TimeCube{k, l, side, anchor};
    }

    /// The unique l with x in Q(k,l).
    IntVec locate_cube(const IntVec& k, const Point& x) const {
        double side = cube_side(k);
        IntVec l = IntVec::zero(dim);
        for (int i = 0; i < dim; ++i)
            l[i] = static_cast<int>(std::floor(x[i] / side));
        return l;
    }

    /// All |k|_inf <= kmax in row-major order (deterministic).
    std::vector<IntVec> all_k() const {
        std::vector<IntVec> ks;
        if (dim == 1) {
            for (int k0 = -kmax; k0 <= kmax; ++k0) ks.push_back(IntVec(k0));
        } else {
            for (int k0 = -kmax; k0 <= kmax; ++k0)
                for (int k1 = -kmax; k1 <= kmax; ++k1)
                    ks.push_back(IntVec(k0, k1));
        }
        return ks;
    }

    void check_index(const IntVec& k) const {
        if (k.dim != dim)
            throw structural_error("covering: index dimension mismatch");
    }
};

/// Indices j (|j|_inf <= kmax) whose patch meets patch k, k included; sorted.
inline std::vector<IntVec> patch_neighbors(const CoveringParams& cov,
                                           const IntVec& k) {
    cov.check_index(k);
    FreqPatch pk = cov.patch(k);
    std::vector<IntVec> out;
    for (const IntVec& j : cov.all_k())
        if (pk.intersects(cov.patch(j))) out.push_back(j);
    std::sort(out.begin(), out.end());
    return out;
}

struct AdmissibilityReport {
    bool covers_domain = false;
    int max_overlap = 0;           ///< pointwise overlap count over samples
    int max_neighbor_count = 0;    ///< largest pairwise-intersection star
    double size_ratio_min = 0.0;   ///< |B_k| / <xi_k>^(alpha n), min over k
    double size_ratio_max = 0.0;
    double eccentricity = 1.0;     ///< R/r over patches; balls give exactly 1
    double scale_ratio_max = 0.0;  ///< max r_k/r_j over intersecting pairs
    bool admissible = false;
};

/// Sample-based admissibility check of the truncated family over the box
/// |xi|_inf <= domain_radius. Coverage uses open-ball membership; overlap is
/// the max sample multiplicity; the scale ratio scans all intersecting pairs.
inline AdmissibilityReport check_admissible(const CoveringParams& cov,
                                            double domain_radius,
                                            int samples_per_axis = 2001) {
    if (!(domain_radius > 0.0))
        throw invalid_parameter("check_admissible: domain_radius > 0");
    if (samples_per_axis < 9)
        throw invalid_parameter("check_admissible: too few samples");
    AdmissibilityReport rep;
    std::vector<FreqPatch> patches;
    for (const IntVec& k : cov.all_k()) patches.push_back(cov.patch(k));

    // size index |B_k| / <xi_k>^(alpha n)
    rep.size_ratio_min = std::numeric_limits<double>::infinity();
    rep.size_ratio_max = 0.0;
    for (const FreqPatch& p : patches) {
        double denom = std::pow(bracket(p.center), cov.alpha * cov.dim);
        double ratio = p.volume() / denom;
        rep.size_ratio_min = std::min(rep.size_ratio_min, ratio);
        rep.size_ratio_max = std::max(rep.size_ratio_max, ratio);
    }

    // pairwise intersections: neighbor star size and scale comparability
    rep.scale_ratio_max = 1.0;
    for (size_t i = 0; i < patches.size(); ++i) {
        int star = 0;
        for (size_t j = 0; j < patches.size(); ++j) {
            if (!patches[i].intersects(patches[j])) continue;
            ++star;
            double ratio = patches[i].scale / patches[j].scale;
            rep.scale_ratio_max =
                std::max(rep.scale_ratio_max, std::max(ratio, 1.0 / ratio));
        }
        rep.max_neighbor_count = std::max(rep.max_neighbor_count, star);
    }

    // dense sampling for coverage and pointwise overlap
    rep.covers_domain = true;
    const int S = samples_per_axis;
    const double step = 2.0 * domain_radius / (S - 1);
    auto scan_point = [&](const Point& xi) {
        int count = 0;
        for (const FreqPatch& p : patches) {
            if (std::abs(xi[0] - p.center[0]) >= p.radius) continue;
            if (p.contains(xi)) ++count;
        }
        if (count == 0) rep.covers_domain = false;
        rep.max_overlap = std::max(rep.max_overlap, count);
    };
    if (cov.dim == 1) {
        for (int i = 0; i < S; ++i)
            scan_point(Point(-domain_radius + i * step));
    } else {
        for (int i0 = 0; i0 < S; ++i0)
            for (int i1 = 0; i1 < S; ++i1)
                scan_point(Point(-domain_radius + i0 * step,
                                 -domain_radius + i1 * step));
    }

    rep.admissible = rep.covers_domain && rep.max_overlap > 0 &&
                     rep.size_ratio_min > 0.0 &&
                     std::isfinite(rep.size_ratio_max);
    return rep;
}

}  // namespace alphamod
