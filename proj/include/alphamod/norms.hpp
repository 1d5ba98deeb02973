// Weighted smoothness norms over an alpha-covering: the continuous form
// (band-pass pieces measured in L^p(W), aggregated in l^q with scale
// weights r_k^s), its discrete counterpart on coefficient sequences
// (cube-averaged matrix weight), the reduced scalar form driven by a
// family of reducing operators, and the diagnostic probes that tie them
// together (sampling inequality, Schwartz seminorms, band decay fits).
//
// Aggregation order is fixed once and for all: patch indices are reduced
// in increasing Euclidean length, lexicographic on ties, so every report
// is bit-reproducible regardless of container iteration quirks.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alphamod/bapu.hpp"
#include "alphamod/covering.hpp"
#include "alphamod/core.hpp"
#include "alphamod/frame.hpp"
#include "alphamod/grid.hpp"
#include "alphamod/weights.hpp"

namespace alphamod {

/// Identifies one member of the two-parameter family of smoothness
/// spaces: covering anisotropy alpha, smoothness s, integrability p,
/// summability q.  q may be infinity (sup over patches).
struct SmoothnessParams {
    double alpha = 0.0;
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;

    static SmoothnessParams make(double alpha, double s, double p, double q) {
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw invalid_parameter("SmoothnessParams: alpha must lie in [0,1)");
        if (!std::isfinite(s))
            throw invalid_parameter("SmoothnessParams: s must be finite");
        if (!(p >= 1.0) || !std::isfinite(p))
            throw invalid_parameter("SmoothnessParams: p must satisfy p >= 1");
        if (!(q > 0.0))
            throw invalid_parameter("SmoothnessParams: q must be positive");
        return SmoothnessParams{alpha, s, p, q};
    }
};

/// Which normalised window family drives a band decomposition.
enum class ContWindow { psi, theta };

inline const char* cont_window_name(ContWindow w) {
    return w == ContWindow::psi ? "psi" : "theta";
}

/// Outcome of a norm evaluation.  contributions holds one pair per patch
/// index, already scaled by r_k^s, listed in the reduction order used to
/// aggregate them; value is their l^q length (sup when q = infinity).
struct NormReport {
    double value = 0.0;
    std::vector<std::pair<IntVec, double>> contributions;
    std::string kind;
    std::string window;
};

/// Nonnegative scalar sequence indexed by (patch, cube).
using ScalarSeq = std::map<KL, double>;

namespace detail {

// Deterministic reduction order: increasing |k|, lexicographic on ties.
inline void sort_reduction_order(std::vector<IntVec>& ks) {
    std::sort(ks.begin(), ks.end(), [](const IntVec& a, const IntVec& b) {
        double na = a.norm_sq(), nb = b.norm_sq();
        if (na != nb) return na < nb;
        return a < b;
    });
}

inline double lq_reduce(const std::vector<std::pair<IntVec, double>>& contribs,
                        double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (const auto& c : contribs) m = std::max(m, c.second);
        return m;
    }
    CompensatedSum acc;
    for (const auto& c : contribs) acc.add(std::pow(c.second, q));
    return std::pow(acc.value(), 1.0 / q);
}

// Multiply the spectrum by psi_k or theta_k.  Window values below 1e-13
// are treated as zero; this sidesteps denominator underflow on the outer
// flank of the covering while perturbing the mask by less than 1e-13.
inline SpectralSignal window_bandpass(const BapuSystem& sys,
                                      const SpectralSignal& fh, const IntVec& k,
                                      ContWindow window) {
    const Grid& g = fh.grid;
    SpectralSignal out = SpectralSignal::zeros(g, fh.channels());
    for (size_t i = 0; i < g.size(); ++i) {
        Point xi = g.xi(i);
        if (sys.phi(k, xi) < 1e-13) continue;
        double w = window == ContWindow::psi ? sys.psi(k, xi) : sys.theta(k, xi);
        if (w == 0.0) continue;
        for (int c = 0; c < fh.channels(); ++c)
            out.comp[c][i] = w * fh.comp[c][i];
    }
    return out;
}

inline int cube_nodes_per_axis(double side, double grid_spacing) {
    return std::max(8, static_cast<int>(std::ceil(4.0 * side / grid_spacing)));
}

// Midpoint rule over the cube [anchor, anchor + side]^dim with m nodes
// per axis; integrand maps a point to a nonnegative value.
template <class F>
double cube_midpoint_integral(const Point& anchor, double side, int dim, int m,
                              F&& integrand) {
    double step = side / m;
    double cell = std::pow(step, dim);
    long total = 1;
    for (int d = 0; d < dim; ++d) total *= m;
    CompensatedSum acc;
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        Point t = Point::zero(dim);
        for (int d = dim - 1; d >= 0; --d) {
            long idx = rem % m;
            rem /= m;
            t[d] = anchor[d] + (static_cast<double>(idx) + 0.5) * step;
        }
        acc.add(integrand(t) * cell);
    }
    return acc.value();
}

// Iterator range of all entries sharing patch index k (maps are KL-keyed,
// k-major).
template <class M>
std::pair<typename M::const_iterator, typename M::const_iterator> kl_range(
    const M& map, const IntVec& k, int dim) {
    IntVec lo = IntVec::zero(dim);
    IntVec hi = IntVec::zero(dim);
    for (int i = 0; i < dim; ++i) {
        lo[i] = std::numeric_limits<int>::min();
        hi[i] = std::numeric_limits<int>::max();
    }
    return {map.lower_bound(KL{k, lo}), map.upper_bound(KL{k, hi})};
}

inline void require_alpha_match(const SmoothnessParams& sp,
                                const CoveringParams& cov) {
    if (std::abs(sp.alpha - cov.alpha) > 1e-12)
        throw invalid_parameter(
            "smoothness alpha does not match the covering alpha");
}

}  // namespace detail

/// Continuous-side norm: || { r_k^s || w_k(D) f ||_{L^p(W)} } ||_{l^q}
/// with w the normalised (psi) or square-normalised (theta) windows.
inline NormReport m_continuous_norm(const BapuSystem& sys, const MatrixWeight& W,
                                    const SmoothnessParams& sp,
                                    const VectorSignal& f, ContWindow window) {
    const CoveringParams& cov = sys.covering();
    if (f.grid.dim != cov.dim)
        throw structural_error("m_continuous_norm: grid/covering dim mismatch");
    if (static_cast<int>(f.channels()) != W.N)
        throw structural_error("m_continuous_norm: channel count != weight size");
    detail::require_alpha_match(sp, cov);

    SpectralSignal fh = forward_ft(f);
    std::vector<IntVec> ks = sys.indices();
    detail::sort_reduction_order(ks);

    NormReport rep;
    rep.kind = std::string("continuous-") + cont_window_name(window);
    rep.window = window_profile_name(sys.profile());
    rep.contributions.reserve(ks.size());
    for (const IntVec& k : ks) {
        SpectralSignal piece = detail::window_bandpass(sys, fh, k, window);
        double band = lp_w_norm(W, sp.p, inverse_ft(piece));
        rep.contributions.emplace_back(k, std::pow(cov.scale(k), sp.s) * band);
    }
    rep.value = detail::lq_reduce(rep.contributions, sp.q);
    return rep;
}

/// Discrete norm on coefficient sequences:
///   inner_k = sum_l |Q|^{-p/2} int_Q || W^{1/p}(t) s_{k,l} ||^p dt,
///   value   = || { r_k^s inner_k^{1/p} } ||_{l^q}.
/// Cube integrals use the midpoint rule with max(8, ceil(4 side/h)) nodes
/// per axis, h the grid spacing, so results are reproducible for a fixed
/// grid.  Cubes narrower than two grid spacings are rejected.
inline NormReport m_discrete_norm(const CoveringParams& cov, const Grid& grid,
                                  const MatrixWeight& W,
                                  const SmoothnessParams& sp,
                                  const CoeffSeq& c) {
    if (c.dim != cov.dim || grid.dim != cov.dim)
        throw structural_error("m_discrete_norm: dim mismatch");
    if (c.channels != W.N)
        throw structural_error("m_discrete_norm: channel count != weight size");
    if (W.dim != cov.dim)
        throw structural_error("m_discrete_norm: weight dim mismatch");
    detail::require_alpha_match(sp, cov);

    // Group the (k,l) entries by patch; the map is already k-major.
    std::vector<IntVec> ks;
    for (const auto& e : c.entries)
        if (ks.empty() || !(ks.back() == e.first.k)) ks.push_back(e.first.k);
    detail::sort_reduction_order(ks);

    NormReport rep;
    rep.kind = "discrete";
    rep.contributions.reserve(ks.size());
    Vector v(W.N);
    for (const IntVec& k : ks) {
        double side = cov.cube_side(k);
        if (side < 2.0 * grid.spacing())
            throw quadrature_error(
                "m_discrete_norm: cube side below twice the grid spacing");
        int m = detail::cube_nodes_per_axis(side, grid.spacing());
        double qvol = std::pow(side, cov.dim);
        double qfac = std::pow(qvol, -sp.p / 2.0);
        CompensatedSum inner;
        auto [lo, hi] = detail::kl_range(c.entries, k, cov.dim);
        for (auto it = lo; it != hi; ++it) {
            for (int ch = 0; ch < W.N; ++ch) v(ch) = it->second[size_t(ch)];
            if (v.norm() == 0.0) continue;
            TimeCube cube = cov.cube(k, it->first.l);
            double integral = detail::cube_midpoint_integral(
                cube.anchor, side, cov.dim, m, [&](const Point& t) {
                    return std::pow((W.root(t, sp.p) * v).norm(), sp.p);
                });
            inner.add(qfac * integral);
        }
        rep.contributions.emplace_back(
            k, std::pow(cov.scale(k), sp.s) *
                   std::pow(inner.value(), 1.0 / sp.p));
    }
    rep.value = detail::lq_reduce(rep.contributions, sp.q);
    return rep;
}

/// Scalar sequence norm: || { r_k^s ( sum_l |Q(k,l)|^{1-p/2} t_{k,l}^p )^{1/p} } ||_{l^q}.
inline NormReport scalar_m_norm(const CoveringParams& cov,
                                const SmoothnessParams& sp, const ScalarSeq& t) {
    detail::require_alpha_match(sp, cov);
    std::vector<IntVec> ks;
    for (const auto& e : t) {
        if (e.first.k.dim != cov.dim)
            throw structural_error("scalar_m_norm: index dim mismatch");
        if (!(e.second >= 0.0))
            throw invalid_parameter("scalar_m_norm: entries must be >= 0");
        if (ks.empty() || !(ks.back() == e.first.k)) ks.push_back(e.first.k);
    }
    detail::sort_reduction_order(ks);

    NormReport rep;
    rep.kind = "scalar";
    rep.contributions.reserve(ks.size());
    for (const IntVec& k : ks) {
        double qvol = std::pow(cov.cube_side(k), cov.dim);
        double qfac = std::pow(qvol, 1.0 - sp.p / 2.0);
        CompensatedSum inner;
        auto [lo, hi] = detail::kl_range(t, k, cov.dim);
        for (auto it = lo; it != hi; ++it)
            inner.add(qfac * std::pow(it->second, sp.p));
        rep.contributions.emplace_back(
            k, std::pow(cov.scale(k), sp.s) *
                   std::pow(inner.value(), 1.0 / sp.p));
    }
    rep.value = detail::lq_reduce(rep.contributions, sp.q);
    return rep;
}

/// Reduced norm: apply the cube's reducing operator to each coefficient
/// vector and take the scalar norm of the resulting lengths,
///   t_{k,l} = | A_{Q(k,l)} s_{k,l} |.
/// Every entry must have a matching operator in the family.
inline NormReport m_reducing_norm(const ReducingFamily& family,
                                  const CoveringParams& cov,
                                  const SmoothnessParams& sp,
                                  const CoeffSeq& c) {
    if (c.dim != cov.dim)
        throw structural_error("m_reducing_norm: dim mismatch");
    ScalarSeq t;
    Vector v(c.channels);
    for (const auto& e : c.entries) {
        auto it = family.find(e.first);
        if (it == family.end())
            throw structural_error(
                "m_reducing_norm: no reducing operator for a cube in the "
                "sequence");
        if (it->second.rows() != c.channels || it->second.cols() != c.channels)
            throw structural_error(
                "m_reducing_norm: reducing operator size != channel count");
        for (int ch = 0; ch < c.channels; ++ch) v(ch) = e.second[size_t(ch)];
        t[e.first] = (it->second * v).norm();
    }
    NormReport rep = scalar_m_norm(cov, sp, t);
    rep.kind = "reducing";
    return rep;
}

/// Outcome of the sampling/integral comparison for one patch.  lhs and
/// rhs are p-th powers; ratio = lhs / rhs (0 when the probe vanishes).
struct SamplingReport {
    double ratio = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Compares the cube-sampled weighted sum against the true weighted
/// integral for a band-limited probe g:
///   lhs = sum_l int_{Q(k,l)} | W^{1/p}(x) g(x_{k,l}) |^p dx,
///   rhs = || g ||_{L^p(W)}^p,
/// the sum running over all cubes anchored inside the grid's box.  For g
/// with spectrum in the k-th patch the ratio admits a uniform upper
/// bound; this probe measures it.
inline SamplingReport sampling_inequality_check(const CoveringParams& cov,
                                                const MatrixWeight& W, double p,
                                                const IntVec& k,
                                                const VectorSignal& g) {
    const Grid& grid = g.grid;
    if (grid.dim != cov.dim)
        throw structural_error("sampling_inequality_check: dim mismatch");
    if (static_cast<int>(g.channels()) != W.N)
        throw structural_error(
            "sampling_inequality_check: channel count != weight size");
    if (!(p >= 1.0))
        throw invalid_parameter("sampling_inequality_check: p >= 1 required");
    cov.check_index(k);

    double rhs = std::pow(lp_w_norm(W, p, g), p);
    SamplingReport rep;
    rep.rhs = rhs;
    if (rhs == 0.0) return rep;

    SpectralSignal gh = forward_ft(g);
    double side = cov.cube_side(k);
    if (side < 2.0 * grid.spacing())
        throw quadrature_error(
            "sampling_inequality_check: cube side below twice the grid "
            "spacing");
    int m = detail::cube_nodes_per_axis(side, grid.spacing());
    double T = grid.halfwidth;
    // Anchors l*side in [-T, T) per axis.
    int lmin = static_cast<int>(std::ceil(-T / side - 1e-9));
    int lmax = static_cast<int>(std::ceil(T / side - 1e-9)) - 1;

    Vector v(W.N);
    CompensatedSum lhs;
    IntVec l = IntVec::zero(cov.dim);
    auto visit = [&](const IntVec& idx) {
        TimeCube cube = cov.cube(k, idx);
        for (int ch = 0; ch < W.N; ++ch)
            v(ch) = trig_interpolate(gh, size_t(ch), cube.anchor);
        if (v.norm() == 0.0) return;
        lhs.add(detail::cube_midpoint_integral(
            cube.anchor, side, cov.dim, m, [&](const Point& x) {
                return std::pow((W.root(x, p) * v).norm(), p);
            }));
    };
    if (cov.dim == 1) {
        for (int i = lmin; i <= lmax; ++i) {
            l[0] = i;
            visit(l);
        }
    } else {
        for (int i = lmin; i <= lmax; ++i)
            for (int j = lmin; j <= lmax; ++j) {
                l[0] = i;
                l[1] = j;
                visit(l);
            }
    }
    rep.lhs = lhs.value();
    rep.ratio = rep.lhs / rhs;
    return rep;
}

/// Random trigonometric probe with spectrum inside the open ball of the
/// k-th patch.  Complex Gaussian amplitudes at every grid node strictly
/// interior to the patch.
inline VectorSignal band_limited_probe(const Grid& grid,
                                       const CoveringParams& cov,
                                       const IntVec& k, Rng& rng,
                                       size_t channels = 1) {
    if (grid.dim != cov.dim)
        throw structural_error("band_limited_probe: dim mismatch");
    FreqPatch patch = cov.patch(k);
    SpectralSignal sh = SpectralSignal::zeros(grid, channels);
    bool hit = false;
    for (size_t i = 0; i < grid.size(); ++i) {
        if ((grid.xi(i) - patch.center).norm() >=
            patch.radius * (1.0 - 1e-9))
            continue;
        hit = true;
        for (size_t c = 0; c < channels; ++c)
            sh.comp[c][i] = rng.complex_normal();
    }
    if (!hit)
        throw resolution_error(
            "band_limited_probe: patch contains no grid frequencies");
    return inverse_ft(sh);
}

/// Schwartz-type seminorm p_d(f) = max_{|b| <= d} sup_x (1+|x|)^d |D^b f(x)|,
/// derivatives taken spectrally, the sup over grid nodes and components.
/// Orders that would amplify spectral roundoff past ~1e-3 are rejected.
inline double schwartz_seminorm(const VectorSignal& f, int d) {
    if (d < 0) throw invalid_parameter("schwartz_seminorm: d >= 0 required");
    double ximax = std::max(f.grid.xi_max(), 10.0);
    if (static_cast<double>(d) * std::log10(ximax) > 13.0)
        throw resolution_error(
            "schwartz_seminorm: derivative order exceeds the grid's "
            "resolving power");
    SpectralSignal fh = forward_ft(f);
    const Grid& g = f.grid;

    static const cd ipow[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
    double best = 0.0;
    auto eval_order = [&](int b0, int b1) {
        SpectralSignal dh = SpectralSignal::zeros(g, fh.channels());
        cd rot = ipow[(b0 + b1) % 4];
        for (size_t i = 0; i < g.size(); ++i) {
            Point xi = g.xi(i);
            double amp = 1.0;
            for (int t = 0; t < b0; ++t) amp *= xi[0];
            for (int t = 0; t < b1; ++t) amp *= xi[1];
            cd fac = rot * amp;
            for (int c = 0; c < fh.channels(); ++c)
                dh.comp[c][i] = fac * fh.comp[c][i];
        }
        VectorSignal df = inverse_ft(dh);
        for (size_t i = 0; i < g.size(); ++i) {
            double wx = std::pow(1.0 + g.x(i).norm(), d);
            for (int c = 0; c < df.channels(); ++c)
                best = std::max(best, wx * std::abs(df.comp[c][i]));
        }
    };
    if (g.dim == 1) {
        for (int b = 0; b <= d; ++b) eval_order(b, 0);
    } else {
        for (int b0 = 0; b0 <= d; ++b0)
            for (int b1 = 0; b0 + b1 <= d; ++b1) eval_order(b0, b1);
    }
    return best;
}

/// Least-squares fit of band norms against the model c <k>^{-e}.
struct DecayFit {
    double fitted_constant = 0.0;
    double fitted_exponent = 0.0;
    double target_exponent = 0.0;
    size_t points = 0;
};

/// Fits || theta_k(D) f ||_{L^p(W)} ~ c <k>^{-L/(1-alpha)} over patches
/// with |k| >= min_norm, in log-log coordinates.  Values below 1e-280
/// are dropped (their logs are dominated by roundoff, not decay).
inline DecayFit embedding_decay_check(const BapuSystem& sys,
                                      const MatrixWeight& W, double p,
                                      const VectorSignal& f, double L,
                                      double min_norm = 2.0) {
    const CoveringParams& cov = sys.covering();
    if (f.grid.dim != cov.dim)
        throw structural_error("embedding_decay_check: dim mismatch");
    if (!(L >= 0.0))
        throw invalid_parameter("embedding_decay_check: L >= 0 required");

    SpectralSignal fh = forward_ft(f);
    std::vector<double> xs, ys;
    for (const IntVec& k : sys.indices()) {
        if (k.norm() < min_norm) continue;
        SpectralSignal piece =
            detail::window_bandpass(sys, fh, k, ContWindow::theta);
        double y = lp_w_norm(W, p, inverse_ft(piece));
        if (y <= 1e-280) continue;
        xs.push_back(0.5 * std::log1p(k.norm_sq()));
        ys.push_back(std::log(y));
    }
    if (xs.size() < 2)
        throw fit_error(
            "embedding_decay_check: fewer than two usable band norms");

    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0)
        throw fit_error("embedding_decay_check: degenerate abscissae");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;

    DecayFit fit;
    fit.fitted_exponent = -slope;
    fit.fitted_constant = std::exp(intercept);
    fit.target_exponent = L / (1.0 - cov.alpha);
    fit.points = xs.size();
    return fit;
}

}  // namespace alphamod
