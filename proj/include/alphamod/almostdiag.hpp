// Almost-diagonal matrix calculus on the (patch, cube) index lattice.
// Matrices are sparse complex arrays over a truncated window; membership
// in the almost-diagonal classes is measured by fitting the smallest C
// with |a| <= C * bound, for three interchangeable bounds: the omega
// envelope (scale ratio, frequency separation, anchor separation), its
// symmetric sufficient form, and the weighted form that absorbs a
// doubling exponent.  Application to coefficient sequences, empirical
// boundedness probes, and the tail-summation inequality for doubling
// weights round out the toolbox.
//
// Validation follows the class definitions exactly: the omega class asks
// J >= n/min(1,q) while the symmetric and weighted classes ask for the
// strict inequality, and the symmetric forms need M > max(2J, |s|+n/2).

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alphamod/core.hpp"
#include "alphamod/covering.hpp"
#include "alphamod/frame.hpp"
#include "alphamod/norms.hpp"
#include "alphamod/weights.hpp"

namespace alphamod {

/// Parameters of the almost-diagonal classes.  K is derived: the larger
/// of beta/p and (beta-n)/p.
struct AdParams {
    double J = 2.0;
    double delta = 1.0;
    double M = 5.0;
    double beta = 1.0;
    double s = 0.0;
    double p = 2.0;
    double q = 1.0;
    int n = 1;

    double K() const { return std::max(beta / p, (beta - n) / p); }

    static AdParams make(double J, double delta, double M, double beta,
                         double s, double p, double q, int n) {
        if (!(J > 0.0)) throw invalid_parameter("AdParams: J must be positive");
        if (!(delta > 0.0))
            throw invalid_parameter("AdParams: delta must be positive");
        if (!(M >= 0.0)) throw invalid_parameter("AdParams: M must be >= 0");
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw invalid_parameter("AdParams: beta must be finite and >= 0");
        if (!std::isfinite(s)) throw invalid_parameter("AdParams: s not finite");
        if (!(p >= 1.0)) throw invalid_parameter("AdParams: p must be >= 1");
        if (!(q > 0.0)) throw invalid_parameter("AdParams: q must be positive");
        if (n != 1 && n != 2) throw invalid_parameter("AdParams: n must be 1 or 2");
        return AdParams{J, delta, M, beta, s, p, q, n};
    }
};

/// Sparse matrix over the truncated lattice window |j|_inf <= kmax,
/// |l|_inf <= lrad (rows and columns alike).  Keys are (row, column)
/// pairs of (patch, cube) indices; absent keys are zeros.
struct DecayMatrix {
    int dim = 1;
    int kmax = 0;
    int lrad = 0;
    std::map<std::pair<KL, KL>, cd> entries;
    double fitted_constant = 0.0;

    bool in_window(const KL& i) const {
        return i.k.dim == dim && i.l.dim == dim && i.k.inf_norm() <= kmax &&
               i.l.inf_norm() <= lrad;
    }
};

namespace detail {

inline void require_ad_dims(const AdParams& par, const CoveringParams& cov) {
    if (par.n != cov.dim)
        throw structural_error("almost-diagonal: params/covering dim mismatch");
}

inline double min_q_floor(const AdParams& par) {
    double mq = std::min(1.0, par.q);
    return static_cast<double>(par.n) / mq;
}

// Shared geometry of an index pair: scale ratio, anchor distance scaled
// by the smaller r, frequency distance scaled by the larger r.
struct PairGeometry {
    double rj, rk;
    double space;  // min(r_j, r_k) |x_{k,m} - x_{j,l}|
    double freq;   // max(r_j, r_k)^{-1} |xi_k - xi_j|
};

inline PairGeometry pair_geometry(const CoveringParams& cov, const KL& jl,
                                  const KL& km) {
    PairGeometry geo;
    geo.rj = cov.scale(jl.k);
    geo.rk = cov.scale(km.k);
    Point xj = cov.cube(jl.k, jl.l).anchor;
    Point xk = cov.cube(km.k, km.l).anchor;
    geo.space = std::min(geo.rj, geo.rk) * (xk - xj).norm();
    geo.freq = (cov.center(km.k) - cov.center(jl.k)).norm() /
               std::max(geo.rj, geo.rk);
    return geo;
}

}  // namespace detail

/// Envelope weight of the base class:
///   omega^s(J) = (r_k/r_j)^{s+n/2} min((r_j/r_k)^{J+d/2}, (r_k/r_j)^{d/2})
///                c^d_{jk}(J) (1 + min(r_j,r_k)|x_{k,m}-x_{j,l}|)^{-J-d},
///   c^d_{jk}(J) = min((r_j/r_k)^{J+d}, (r_k/r_j)^{d})
///                 (1 + max(r_j,r_k)^{-1}|xi_k-xi_j|)^{-J-d}.
inline double omega_weight(const AdParams& par, const CoveringParams& cov,
                           const KL& jl, const KL& km) {
    detail::require_ad_dims(par, cov);
    detail::PairGeometry g = detail::pair_geometry(cov, jl, km);
    double ratio = g.rk / g.rj;
    double Jd = par.J + par.delta;
    double head = std::pow(ratio, par.s + 0.5 * par.n) *
                  std::min(std::pow(1.0 / ratio, par.J + 0.5 * par.delta),
                           std::pow(ratio, 0.5 * par.delta));
    double cjk = std::min(std::pow(1.0 / ratio, Jd), std::pow(ratio, par.delta)) *
                 std::pow(1.0 + g.freq, -Jd);
    return head * cjk * std::pow(1.0 + g.space, -Jd);
}

/// Symmetric sufficient bound for the scalar class:
///   min((r_j/r_k)^M, (r_k/r_j)^M) (1+min(r)|dx|)^{-J} (1+max(r)^{-1}|dxi|)^{-J}.
inline double symmetric_bound(const AdParams& par, const CoveringParams& cov,
                              const KL& jl, const KL& km) {
    detail::require_ad_dims(par, cov);
    detail::PairGeometry g = detail::pair_geometry(cov, jl, km);
    // min and max first, so the value is bitwise exchange invariant
    double scale = std::pow(std::min(g.rj, g.rk) / std::max(g.rj, g.rk), par.M);
    return scale * std::pow(1.0 + g.space, -par.J) *
           std::pow(1.0 + g.freq, -par.J);
}

/// Weighted-class bound: the symmetric form with the scale exponent
/// raised to M + K and the spatial decay deepened to J + beta/p.
inline double weighted_bound(const AdParams& par, const CoveringParams& cov,
                             const KL& jl, const KL& km) {
    detail::require_ad_dims(par, cov);
    detail::PairGeometry g = detail::pair_geometry(cov, jl, km);
    double MK = par.M + par.K();
    double scale = std::pow(std::min(g.rj, g.rk) / std::max(g.rj, g.rk), MK);
    return scale * std::pow(1.0 + g.space, -par.J - par.beta / par.p) *
           std::pow(1.0 + g.freq, -par.J);
}

/// Dense omega-envelope matrix on the window; its own fitted constant is
/// 1 by construction.
inline DecayMatrix omega_matrix(const AdParams& par, const CoveringParams& cov,
                                int kmax, int lrad) {
    detail::require_ad_dims(par, cov);
    if (kmax < 0 || lrad < 0)
        throw invalid_parameter("omega_matrix: window bounds must be >= 0");
    std::vector<KL> idx;
    auto push_all = [&](int kk, int ll) {
        idx.push_back(KL{IntVec(kk), IntVec(ll)});
    };
    if (cov.dim == 1) {
        for (int kk = -kmax; kk <= kmax; ++kk)
            for (int ll = -lrad; ll <= lrad; ++ll) push_all(kk, ll);
    } else {
        for (int k0 = -kmax; k0 <= kmax; ++k0)
            for (int k1 = -kmax; k1 <= kmax; ++k1)
                for (int l0 = -lrad; l0 <= lrad; ++l0)
                    for (int l1 = -lrad; l1 <= lrad; ++l1)
                        idx.push_back(KL{IntVec(k0, k1), IntVec(l0, l1)});
    }
    if (idx.size() * idx.size() > 4000000)
        throw invalid_parameter("omega_matrix: window too large for desk scale");
    DecayMatrix A;
    A.dim = cov.dim;
    A.kmax = kmax;
    A.lrad = lrad;
    A.fitted_constant = 1.0;
    for (const KL& row : idx)
        for (const KL& col : idx)
            A.entries[{row, col}] = omega_weight(par, cov, row, col);
    return A;
}

/// Identity matrix on the window.
inline DecayMatrix identity_matrix(int dim, int kmax, int lrad) {
    DecayMatrix A;
    A.dim = dim;
    A.kmax = kmax;
    A.lrad = lrad;
    A.fitted_constant = 1.0;
    if (dim == 1) {
        for (int kk = -kmax; kk <= kmax; ++kk)
            for (int ll = -lrad; ll <= lrad; ++ll) {
                KL i{IntVec(kk), IntVec(ll)};
                A.entries[{i, i}] = cd(1.0, 0.0);
            }
    } else {
        for (int k0 = -kmax; k0 <= kmax; ++k0)
            for (int k1 = -kmax; k1 <= kmax; ++k1)
                for (int l0 = -lrad; l0 <= lrad; ++l0)
                    for (int l1 = -lrad; l1 <= lrad; ++l1) {
                        KL i{IntVec(k0, k1), IntVec(l0, l1)};
                        A.entries[{i, i}] = cd(1.0, 0.0);
                    }
    }
    return A;
}

/// Sparse product AB over matching windows.
inline DecayMatrix multiply(const DecayMatrix& A, const DecayMatrix& B) {
    if (A.dim != B.dim)
        throw structural_error("multiply: dimension mismatch");
    DecayMatrix C;
    C.dim = A.dim;
    C.kmax = std::max(A.kmax, B.kmax);
    C.lrad = std::max(A.lrad, B.lrad);
    // smallest possible column key, so lower_bound lands on a row start
    KL col_min;
    col_min.k = IntVec::zero(B.dim);
    col_min.l = IntVec::zero(B.dim);
    for (int d = 0; d < 2; ++d) {
        col_min.k[d] = std::numeric_limits<int>::min();
        col_min.l[d] = std::numeric_limits<int>::min();
    }
    for (const auto& ea : A.entries) {
        const KL& row = ea.first.first;
        const KL& mid = ea.first.second;
        auto lo = B.entries.lower_bound({mid, col_min});
        for (auto it = lo; it != B.entries.end() && it->first.first == mid;
             ++it) {
            C.entries[{row, it->first.second}] += ea.second * it->second;
        }
    }
    return C;
}

/// Outcome of a membership fit: the smallest C with |a| <= C * bound over
/// the window, with the entry that attains it.
struct AdMembership {
    double fitted_constant = 0.0;
    std::pair<KL, KL> worst;
    size_t entries = 0;
};

namespace detail {

template <class BoundFn>
AdMembership fit_against(const DecayMatrix& A, BoundFn&& bound) {
    AdMembership rep;
    for (const auto& e : A.entries) {
        double b = bound(e.first.first, e.first.second);
        double ratio = std::abs(e.second) / b;
        ++rep.entries;
        if (ratio > rep.fitted_constant) {
            rep.fitted_constant = ratio;
            rep.worst = e.first;
        }
    }
    return rep;
}

}  // namespace detail

/// Fit against the base omega envelope (J >= n/min(1,q)) or, with
/// `symmetric`, against the symmetric sufficient bound (strict J, and
/// M > max(2J, |s|+n/2)).
inline AdMembership ad_membership_scalar(const DecayMatrix& A,
                                         const AdParams& par,
                                         const CoveringParams& cov,
                                         bool symmetric = false) {
    detail::require_ad_dims(par, cov);
    if (A.dim != cov.dim)
        throw structural_error("ad_membership_scalar: matrix dim mismatch");
    double floor = detail::min_q_floor(par);
    if (symmetric) {
        if (!(par.J > floor))
            throw invalid_parameter(
                "ad_membership_scalar: symmetric bound needs J > n/min(1,q)");
        if (!(par.M > std::max(2.0 * par.J, std::abs(par.s) + 0.5 * par.n)))
            throw invalid_parameter(
                "ad_membership_scalar: need M > max(2J, |s|+n/2)");
        return detail::fit_against(A, [&](const KL& r, const KL& c) {
            return symmetric_bound(par, cov, r, c);
        });
    }
    if (!(par.J >= floor))
        throw invalid_parameter(
            "ad_membership_scalar: omega class needs J >= n/min(1,q)");
    return detail::fit_against(A, [&](const KL& r, const KL& c) {
        return omega_weight(par, cov, r, c);
    });
}

/// Fit against the weighted bound (strict J, M > max(2J, |s|+n/2),
/// doubling exponent beta > 0).
inline AdMembership ad_membership_weighted(const DecayMatrix& A,
                                           const AdParams& par,
                                           const CoveringParams& cov) {
    detail::require_ad_dims(par, cov);
    if (A.dim != cov.dim)
        throw structural_error("ad_membership_weighted: matrix dim mismatch");
    if (!(par.beta > 0.0))
        throw invalid_parameter("ad_membership_weighted: beta must be > 0");
    if (!(par.J > detail::min_q_floor(par)))
        throw invalid_parameter(
            "ad_membership_weighted: needs J > n/min(1,q)");
    if (!(par.M > std::max(2.0 * par.J, std::abs(par.s) + 0.5 * par.n)))
        throw invalid_parameter(
            "ad_membership_weighted: need M > max(2J, |s|+n/2)");
    return detail::fit_against(A, [&](const KL& r, const KL& c) {
        return weighted_bound(par, cov, r, c);
    });
}

/// Sparse matrix-vector product t_{(j,l)} = sum a_{(j,l)(k,m)} s_{(k,m)},
/// componentwise over channels.  Every support index of c must lie in the
/// matrix window.
inline CoeffSeq ad_apply(const DecayMatrix& A, const CoeffSeq& c) {
    if (A.dim != c.dim)
        throw structural_error("ad_apply: dimension mismatch");
    for (const auto& e : c.entries)
        if (!A.in_window(e.first))
            throw window_error(
                "ad_apply: sequence support escapes the matrix window");
    CoeffSeq out;
    out.dim = c.dim;
    out.channels = c.channels;
    std::map<KL, std::vector<CompensatedSum>> acc;  // 2 sums (re,im)/channel
    for (const auto& ea : A.entries) {
        auto hit = c.entries.find(ea.first.second);
        if (hit == c.entries.end()) continue;
        auto& sums = acc[ea.first.first];
        if (sums.empty())
            sums.resize(2 * static_cast<size_t>(c.channels));
        for (int ch = 0; ch < c.channels; ++ch) {
            cd v = ea.second * hit->second[static_cast<size_t>(ch)];
            sums[2 * static_cast<size_t>(ch)].add(v.real());
            sums[2 * static_cast<size_t>(ch) + 1].add(v.imag());
        }
    }
    for (const auto& row : acc) {
        std::vector<cd> vals(static_cast<size_t>(c.channels));
        for (int ch = 0; ch < c.channels; ++ch)
            vals[static_cast<size_t>(ch)] =
                cd(row.second[2 * static_cast<size_t>(ch)].value(),
                   row.second[2 * static_cast<size_t>(ch) + 1].value());
        out.entries[row.first] = vals;
    }
    return out;
}

/// Largest observed operator-norm ratio over random finite sequences.
struct ProbeReport {
    double max_ratio = 0.0;
    size_t trials = 0;
};

/// Scalar-space probe: random single-channel sequences supported in the
/// window, measured in the scalar sequence norm.  Draw bounds default to
/// the matrix window; passing smaller ones keeps the input sequences
/// fixed while the operator window grows.
inline ProbeReport boundedness_probe(const DecayMatrix& A,
                                     const CoveringParams& cov,
                                     const SmoothnessParams& sp, int trials,
                                     uint64_t seed, int entries_per_trial = 12,
                                     int draw_kmax = -1, int draw_lrad = -1) {
    if (A.dim != cov.dim)
        throw structural_error("boundedness_probe: dim mismatch");
    int dk = draw_kmax < 0 ? A.kmax : std::min(draw_kmax, A.kmax);
    int dl = draw_lrad < 0 ? A.lrad : std::min(draw_lrad, A.lrad);
    ProbeReport rep;
    for (int t = 0; t < trials; ++t) {
        Rng rng(Rng::sub_seed(seed, static_cast<uint64_t>(t)));
        CoeffSeq c;
        c.dim = cov.dim;
        c.channels = 1;
        for (int e = 0; e < entries_per_trial; ++e) {
            KL i;
            i.k = IntVec::zero(cov.dim);
            i.l = IntVec::zero(cov.dim);
            for (int d = 0; d < cov.dim; ++d) {
                i.k[d] = rng.uniform_int(-dk, dk);
                i.l[d] = rng.uniform_int(-dl, dl);
            }
            c.entries[i] = {rng.complex_normal()};
        }
        ScalarSeq tin, tout;
        for (const auto& e : c.entries) tin[e.first] = std::abs(e.second[0]);
        CoeffSeq image = ad_apply(A, c);
        for (const auto& e : image.entries)
            tout[e.first] = std::abs(e.second[0]);
        double denom = scalar_m_norm(cov, sp, tin).value;
        if (denom == 0.0) continue;
        double ratio = scalar_m_norm(cov, sp, tout).value / denom;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        ++rep.trials;
    }
    return rep;
}

/// Weighted-space probe: multi-channel sequences measured through a
/// family of reducing operators.
inline ProbeReport boundedness_probe_weighted(
    const DecayMatrix& A, const ReducingFamily& family,
    const CoveringParams& cov, const SmoothnessParams& sp, int channels,
    int trials, uint64_t seed, int entries_per_trial = 12,
    int draw_kmax = -1, int draw_lrad = -1) {
    if (A.dim != cov.dim)
        throw structural_error("boundedness_probe_weighted: dim mismatch");
    int dk = draw_kmax < 0 ? A.kmax : std::min(draw_kmax, A.kmax);
    int dl = draw_lrad < 0 ? A.lrad : std::min(draw_lrad, A.lrad);
    ProbeReport rep;
    for (int t = 0; t < trials; ++t) {
        Rng rng(Rng::sub_seed(seed, static_cast<uint64_t>(t)));
        CoeffSeq c;
        c.dim = cov.dim;
        c.channels = channels;
        for (int e = 0; e < entries_per_trial; ++e) {
            KL i;
            i.k = IntVec::zero(cov.dim);
            i.l = IntVec::zero(cov.dim);
            for (int d = 0; d < cov.dim; ++d) {
                i.k[d] = rng.uniform_int(-dk, dk);
                i.l[d] = rng.uniform_int(-dl, dl);
            }
            std::vector<cd> v(static_cast<size_t>(channels));
            for (auto& z : v) z = rng.complex_normal();
            c.entries[i] = v;
        }
        double denom = m_reducing_norm(family, cov, sp, c).value;
        if (denom == 0.0) continue;
        double ratio =
            m_reducing_norm(family, cov, sp, ad_apply(A, c)).value / denom;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        ++rep.trials;
    }
    return rep;
}

/// Tail-summation comparison for a scalar doubling weight:
///   lhs  = int w(x) (1 + r_j |x - x_{j,l}|)^{-L} dx,
///   rhs  = int_{Q(j,l)} w(x) dx,
/// returning lhs/rhs.  The left integral runs over the centered box of
/// the given halfwidth by midpoint quadrature; mass beyond the box is
/// estimated by continuing the outermost dyadic shell with the doubling
/// growth 2^beta against the kernel decay 2^{-L}.
struct LeSqReport {
    double ratio = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double tail = 0.0;
};

inline LeSqReport le_sq_check(const MatrixWeight& w, double beta,
                              const CoveringParams& cov, const KL& jl,
                              double L, double box_halfwidth = 16.0 * pi,
                              int nodes_per_axis = 4096) {
    if (w.N != 1)
        throw structural_error("le_sq_check: scalar weight required (N = 1)");
    if (w.dim != cov.dim)
        throw structural_error("le_sq_check: weight/covering dim mismatch");
    if (!(beta > 0.0))
        throw invalid_parameter("le_sq_check: beta must be positive");
    if (!(L > beta))
        throw invalid_parameter("le_sq_check: hypothesis L > beta violated");
    if (nodes_per_axis < 8)
        throw invalid_parameter("le_sq_check: too few quadrature nodes");

    double rj = cov.scale(jl.k);
    TimeCube cube = cov.cube(jl.k, jl.l);
    Point x0 = cube.anchor;
    auto wval = [&](const Point& x) { return w(x)(0, 0).real(); };

    // left integral over the centered box, outer shell kept separately
    double B = box_halfwidth;
    CompensatedSum inner, outer;
    double step = 2.0 * B / nodes_per_axis;
    double cell = std::pow(step, cov.dim);
    long total = 1;
    for (int d = 0; d < cov.dim; ++d) total *= nodes_per_axis;
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        Point x = Point::zero(cov.dim);
        double sup = 0.0;
        for (int d = cov.dim - 1; d >= 0; --d) {
            long ix = rem % nodes_per_axis;
            rem /= nodes_per_axis;
            double off = -B + (static_cast<double>(ix) + 0.5) * step;
            x[d] = x0[d] + off;
            sup = std::max(sup, std::abs(off));
        }
        double val =
            wval(x) * std::pow(1.0 + rj * (x - x0).norm(), -L) * cell;
        if (sup >= 0.5 * B)
            outer.add(val);
        else
            inner.add(val);
    }
    double eta = std::pow(2.0, beta - L);
    LeSqReport rep;
    rep.tail = outer.value() * eta / (1.0 - eta);
    rep.lhs = inner.value() + outer.value() + rep.tail;

    int cube_nodes = std::max(64, nodes_per_axis / 8);
    rep.rhs = detail::cube_midpoint_integral(cube.anchor, cube.side, cov.dim,
                                             cube_nodes, wval);
    if (rep.rhs <= 0.0)
        throw quadrature_error("le_sq_check: cube integral not positive");
    rep.ratio = rep.lhs / rep.rhs;
    return rep;
}

}  // namespace alphamod
