#pragma once
// Band-limited tight frame aligned with an alpha-covering.
//
// Each covering patch k carries a critically sampled family of modulated
// atoms phi_{k,l} supported on the band S_k = xi_k + [-a r_k, a r_k]^n:
//
//   phi_hat_{k,l}(xi) = (2 a r_k)^{-n/2} theta_k(xi)
//                       exp(-i (pi/a) l . (xi / r_k - k)).
//
// With the covering scales quantized to the grid quantum pi/(2aT), every
// band holds exactly L_k = 2 a T r_k / pi frequency nodes per axis, so the
// translation sum over any window of L_k consecutive l per axis telescopes
// into an exact geometric sum and the frame operator is the identity on
// signals whose spectrum stays inside the covered region. Analysis and
// synthesis then reduce to one L_k-point DFT per band; the transform is
// exact up to rounding rather than up to a truncation error.
//
// The normalization (2 a r_k)^{-n/2} is the one that makes the frame tight
// with constant exactly one. It also gives the coefficient identity
//
//   <f, phi_{k,l}> = e^{-i (pi/a) l.k} |Q(k,l)|^{1/2} (theta_k(D) f)(x_{k,l})
//
// with no leftover constant, where x_{k,l} is the anchor of the time cube
// Q(k,l). coefficient_by_sampling evaluates the right-hand side through
// trigonometric interpolation, independently of the DFT path in analyze,
// and frame_normalization_probe reports the measured frame constant next
// to what the alternative normalization (2 pi)^{-n/2} would produce.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "alphamod/bapu.hpp"
#include "alphamod/core.hpp"
#include "alphamod/covering.hpp"
#include "alphamod/grid.hpp"

namespace alphamod {

namespace detail {

/// In-place DFT of a dense lattice buffer of edge length L (row-major,
/// first axis slowest for dim 2). sign follows the FFTW convention.
inline void lattice_dft(int dim, int L, std::vector<cd>& data, int sign) {
    size_t want = dim == 1 ? static_cast<size_t>(L)
                           : static_cast<size_t>(L) * static_cast<size_t>(L);
    if (data.size() != want)
        throw structural_error("lattice_dft: buffer does not match lattice");
    int dims[2] = {L, L};
    fftw_complex* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = fftw_plan_dft(dim, dims, p, p, sign, FFTW_ESTIMATE);
    if (!plan) throw structural_error("lattice_dft: FFTW plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

/// Distance between two points on the torus [-T, T)^n.
inline double torus_distance(const Point& x, const Point& y, double halfwidth) {
    double period = 2.0 * halfwidth;
    double d2 = 0.0;
    for (int i = 0; i < x.dim; ++i) {
        double w = std::fmod(std::abs(x[i] - y[i]), period);
        w = std::min(w, period - w);
        d2 += w * w;
    }
    return std::sqrt(d2);
}

}  // namespace detail

/// One frame atom, realized on a grid.
struct FrameAtom {
    IntVec k;
    IntVec l;
    double scale = 0.0;        ///< r_k after quantization
    Point band_center;         ///< xi_k = r_k k
    double band_radius = 0.0;  ///< a r_k; band is the inf-norm ball around xi_k
    Point center;              ///< x_{k,l} = (pi/a) r_k^{-1} l
    SpectralSignal spectrum;   ///< single channel, supported on the band nodes
    VectorSignal time;         ///< inverse transform of spectrum
};

/// Finitely supported coefficient map (k,l) -> C^N. The map is ordered
/// k-major then l-minor, so iteration, accumulation, and serialization are
/// deterministic.
struct CoeffSeq {
    int dim = 1;
    int channels = 1;
    std::map<KL, std::vector<cd>> entries;

    /// Total coefficient energy, summed over components in map order.
    double sq_norm() const {
        CompensatedSum s;
        for (const auto& e : entries)
            for (const cd& z : e.second) s.add(std::norm(z));
        return s.value();
    }
};

class FrameSystem {
  public:
    /// The covering must carry scale_quantum = pi / (2 a T) for the given
    /// grid; every band then spans a whole number of frequency nodes.
    /// Throws resolution_error when a band pokes past the guard radius.
    FrameSystem(const CoveringParams& cov, WindowProfile profile,
                const Grid& grid)
        : grid_(grid), bapu_(cov, profile) {
        const CoveringParams& c = bapu_.covering();
        if (c.dim != grid_.dim)
            throw structural_error(
                "FrameSystem: covering and grid dimension differ");
        double q = pi / (2.0 * c.a * grid_.halfwidth);
        if (c.scale_quantum <= 0.0 || std::abs(c.scale_quantum - q) > 1e-12 * q)
            throw structural_error(
                "FrameSystem: covering scales must be quantized to pi/(2aT) "
                "so each band holds a whole number of grid nodes");
        double guard = grid_.guard_radius();
        for (const IntVec& k : c.all_k()) {
            Band b;
            b.k = k;
            b.scale = c.scale(k);
            b.center = c.center(k);
            b.L = static_cast<int>(std::llround(b.scale / q));
            if (b.L < 1 || std::abs(b.L * q - b.scale) > 1e-9 * b.scale)
                throw structural_error(
                    "FrameSystem: patch scale is not a multiple of the quantum");
            double corner = 0.0;
            for (int i = 0; i < c.dim; ++i) {
                double e = std::abs(b.center[i]) + c.a * b.scale;
                corner += e * e;
            }
            if (std::sqrt(corner) > guard)
                throw resolution_error(
                    "FrameSystem: band exceeds the guard radius; enlarge the "
                    "grid or reduce kmax");
            collect_nodes(b);
            b.norm_const = std::pow(2.0 * c.a * b.scale, -0.5 * c.dim);
            kpos_[k] = bands_.size();
            bands_.push_back(std::move(b));
        }
    }

    const Grid& grid() const { return grid_; }
    const BapuSystem& windows() const { return bapu_; }
    const CoveringParams& covering() const { return bapu_.covering(); }

    /// Nodes per axis in the band of patch k (the sampling period in l).
    int period(const IntVec& k) const { return band(k).L; }

    /// Frequency nodes the atoms of patch k live on.
    const std::vector<size_t>& band_nodes(const IntVec& k) const {
        return band(k).nodes;
    }

    /// First translation index of the canonical window. Any L_k consecutive
    /// integers per axis generate the same frame; the window is centred so
    /// the anchors tile the domain box.
    IntVec ell_origin(const IntVec& k) const {
        const Band& b = band(k);
        IntVec o = IntVec::zero(covering().dim);
        for (int i = 0; i < o.dim; ++i) o[i] = -(b.L / 2);
        return o;
    }

    /// The canonical translation window, l-minor lexicographic.
    std::vector<IntVec> ell_window(const IntVec& k) const {
        const Band& b = band(k);
        IntVec o = ell_origin(k);
        std::vector<IntVec> out;
        if (covering().dim == 1) {
            out.reserve(static_cast<size_t>(b.L));
            for (int i = 0; i < b.L; ++i) out.push_back(IntVec(o[0] + i));
        } else {
            out.reserve(static_cast<size_t>(b.L) * static_cast<size_t>(b.L));
            for (int i = 0; i < b.L; ++i)
                for (int j = 0; j < b.L; ++j)
                    out.push_back(IntVec(o[0] + i, o[1] + j));
        }
        return out;
    }

    /// x_{k,l}: anchor of the time cube Q(k,l).
    Point sample_point(const IntVec& k, const IntVec& l) const {
        if (l.dim != covering().dim)
            throw structural_error("sample_point: index dimension mismatch");
        return l.to_point() * covering().cube_side(k);
    }

    /// Realizes one atom. l may be any integer vector; indices a full
    /// period apart reproduce the same grid atom up to a unimodular phase.
    FrameAtom atom(const IntVec& k, const IntVec& l) const {
        const Band& b = band(k);
        if (l.dim != covering().dim)
            throw structural_error("atom: index dimension mismatch");
        FrameAtom A;
        A.k = k;
        A.l = l;
        A.scale = b.scale;
        A.band_center = b.center;
        A.band_radius = covering().a * b.scale;
        A.center = sample_point(k, l);
        A.spectrum = SpectralSignal::zeros(grid_, 1);
        double pia = pi / covering().a;
        for (size_t j = 0; j < b.nodes.size(); ++j) {
            Point xi = grid_.xi(b.nodes[j]);
            double ph = 0.0;
            for (int i = 0; i < covering().dim; ++i)
                ph -= pia * l[i] * (xi[i] / b.scale - k[i]);
            A.spectrum.comp[0][b.nodes[j]] =
                b.norm_const * b.theta[j] * std::polar(1.0, ph);
        }
        A.time = inverse_ft(A.spectrum);
        return A;
    }

    /// theta_k(D) f: the band-pass piece of f seen by patch k.
    VectorSignal bandpass(const VectorSignal& f, const IntVec& k) const {
        require_same_grid(f.grid);
        return inverse_ft(masked_spectrum(forward_ft(f), k));
    }

    /// All frame coefficients of f over the canonical windows. Per band the
    /// coefficients are one backward DFT of the windowed spectrum, which
    /// realizes the sampling identity at every anchor simultaneously.
    CoeffSeq analyze(const VectorSignal& f) const {
        require_same_grid(f.grid);
        if (f.channels() < 1)
            throw structural_error("analyze: signal has no components");
        SpectralSignal fh = forward_ft(f);
        CoeffSeq out;
        out.dim = covering().dim;
        out.channels = f.channels();
        int dim = covering().dim;
        double dxin = std::pow(grid_.freq_spacing(), dim);
        double pia = pi / covering().a;
        for (const Band& b : bands_) {
            size_t Ln = lattice_size(b);
            std::vector<std::vector<cd>> S(
                static_cast<size_t>(f.channels()));
            for (int ch = 0; ch < f.channels(); ++ch) {
                std::vector<cd>& G = S[static_cast<size_t>(ch)];
                G.assign(Ln, cd(0.0, 0.0));
                for (size_t j = 0; j < b.nodes.size(); ++j)
                    G[b.tflat[j]] +=
                        fh.comp[static_cast<size_t>(ch)][b.nodes[j]] *
                        b.theta[j];
                detail::lattice_dft(dim, b.L, G, FFTW_BACKWARD);
            }
            double amp = dxin * b.norm_const;
            for (const IntVec& l : ell_window(b.k)) {
                size_t ti = fold_index(b, l);
                double kl = 0.0;
                for (int i = 0; i < dim; ++i)
                    kl += static_cast<double>(b.k[i]) * l[i];
                cd ph = std::polar(amp, -pia * kl);
                std::vector<cd> vals(static_cast<size_t>(f.channels()));
                for (int ch = 0; ch < f.channels(); ++ch)
                    vals[static_cast<size_t>(ch)] =
                        ph * S[static_cast<size_t>(ch)][ti];
                out.entries.emplace(KL{b.k, l}, std::move(vals));
            }
        }
        return out;
    }

    /// Sum of coeff * atom, accumulated band by band in k-major order.
    /// Translation indices outside the canonical window fold onto their
    /// representative with the exact phase the periodized atom carries.
    VectorSignal synthesize(const CoeffSeq& coeffs) const {
        int dim = covering().dim;
        if (coeffs.dim != dim)
            throw structural_error("synthesize: coefficient dimension mismatch");
        if (coeffs.channels < 1)
            throw structural_error("synthesize: no components");
        for (const auto& e : coeffs.entries) {
            if (kpos_.find(e.first.k) == kpos_.end())
                throw structural_error(
                    "synthesize: coefficient addresses an unknown patch");
            if (e.first.l.dim != dim)
                throw structural_error(
                    "synthesize: translation index dimension mismatch");
            if (static_cast<int>(e.second.size()) != coeffs.channels)
                throw structural_error("synthesize: ragged coefficient entry");
        }
        SpectralSignal acc = SpectralSignal::zeros(grid_, coeffs.channels);
        double pia = pi / covering().a;
        IntVec lo = IntVec::zero(dim);
        IntVec hi = IntVec::zero(dim);
        for (int i = 0; i < dim; ++i) {
            lo[i] = std::numeric_limits<int>::min();
            hi[i] = std::numeric_limits<int>::max();
        }
        for (const Band& b : bands_) {
            auto first = coeffs.entries.lower_bound(KL{b.k, lo});
            auto last = coeffs.entries.upper_bound(KL{b.k, hi});
            if (first == last) continue;
            size_t Ln = lattice_size(b);
            std::vector<std::vector<cd>> A(
                static_cast<size_t>(coeffs.channels),
                std::vector<cd>(Ln, cd(0.0, 0.0)));
            for (auto it = first; it != last; ++it) {
                const IntVec& l = it->first.l;
                size_t ti = fold_index(b, l);
                double kl = 0.0;
                for (int i = 0; i < dim; ++i)
                    kl += static_cast<double>(b.k[i]) * l[i];
                cd ph = std::polar(1.0, pia * kl);
                for (int ch = 0; ch < coeffs.channels; ++ch)
                    A[static_cast<size_t>(ch)][ti] +=
                        ph * it->second[static_cast<size_t>(ch)];
            }
            for (int ch = 0; ch < coeffs.channels; ++ch) {
                std::vector<cd>& H = A[static_cast<size_t>(ch)];
                detail::lattice_dft(dim, b.L, H, FFTW_FORWARD);
                for (size_t j = 0; j < b.nodes.size(); ++j)
                    acc.comp[static_cast<size_t>(ch)][b.nodes[j]] +=
                        b.norm_const * b.theta[j] * H[b.tflat[j]];
            }
        }
        return inverse_ft(acc);
    }

    /// One coefficient through the sampling identity: band-pass f, read the
    /// result at the cube anchor by exact trigonometric interpolation, and
    /// scale by e^{-i(pi/a) l.k} |Q(k,l)|^{1/2}. Independent of the DFT path
    /// in analyze; the two must agree to rounding. Throws domain_error when
    /// the anchor lies outside the domain box.
    std::vector<cd> coefficient_by_sampling(const VectorSignal& f,
                                            const IntVec& k,
                                            const IntVec& l) const {
        require_same_grid(f.grid);
        const Band& b = band(k);
        Point x = sample_point(k, l);
        for (int i = 0; i < covering().dim; ++i)
            if (x[i] < -grid_.halfwidth || x[i] >= grid_.halfwidth)
                throw domain_error(
                    "coefficient_by_sampling: anchor outside the domain box");
        SpectralSignal masked = masked_spectrum(forward_ft(f), k);
        double pia = pi / covering().a;
        double kl = 0.0;
        for (int i = 0; i < covering().dim; ++i)
            kl += static_cast<double>(b.k[i]) * l[i];
        double side = covering().cube_side(k);
        cd amp = std::polar(std::pow(side, 0.5 * covering().dim), -pia * kl);
        std::vector<cd> out(static_cast<size_t>(f.channels()));
        for (int ch = 0; ch < f.channels(); ++ch)
            out[static_cast<size_t>(ch)] = amp * trig_interpolate(masked, ch, x);
        return out;
    }

  private:
    struct Band {
        IntVec k;
        int L = 1;
        double scale = 0.0;
        Point center;
        double norm_const = 0.0;
        std::vector<size_t> nodes;   ///< grid indices carrying the window
        std::vector<double> theta;   ///< theta_k at those nodes
        std::vector<size_t> tflat;   ///< node offset folded mod L, row-major
    };

    const Band& band(const IntVec& k) const {
        covering().check_index(k);
        auto it = kpos_.find(k);
        if (it == kpos_.end())
            throw invalid_parameter("FrameSystem: patch index outside covering");
        return bands_[it->second];
    }

    size_t lattice_size(const Band& b) const {
        return covering().dim == 1
                   ? static_cast<size_t>(b.L)
                   : static_cast<size_t>(b.L) * static_cast<size_t>(b.L);
    }

    static size_t fold(int v, int L) {
        int m = v % L;
        if (m < 0) m += L;
        return static_cast<size_t>(m);
    }

    size_t fold_index(const Band& b, const IntVec& l) const {
        size_t t = fold(l[0], b.L);
        if (covering().dim == 2)
            t = t * static_cast<size_t>(b.L) + fold(l[1], b.L);
        return t;
    }

    void require_same_grid(const Grid& g) const {
        if (g != grid_)
            throw structural_error("FrameSystem: signal lives on a different grid");
    }

    SpectralSignal masked_spectrum(const SpectralSignal& fh,
                                   const IntVec& k) const {
        const Band& b = band(k);
        SpectralSignal masked = SpectralSignal::zeros(grid_, fh.channels());
        for (int ch = 0; ch < fh.channels(); ++ch)
            for (size_t j = 0; j < b.nodes.size(); ++j)
                masked.comp[static_cast<size_t>(ch)][b.nodes[j]] =
                    fh.comp[static_cast<size_t>(ch)][b.nodes[j]] * b.theta[j];
        return masked;
    }

    // Window values below 1e-13 are dropped from the band: they sit at the
    // extreme tail of the profile, where the normalized window is not
    // numerically meaningful, and they contribute O(1e-26) to the frame
    // operator. Keeping them would poison theta at nodes no other patch
    // reaches.
    void collect_nodes(Band& b) {
        const CoveringParams& c = bapu_.covering();
        int M = grid_.points;
        double dxi = grid_.freq_spacing();
        double R = bapu_.support_radius(b.k);
        int lo[2] = {0, 0};
        int hi[2] = {-1, -1};
        for (int i = 0; i < c.dim; ++i) {
            lo[i] = std::max(
                0, static_cast<int>(std::ceil((b.center[i] - R) / dxi - 1e-9)) +
                       M / 2);
            hi[i] = std::min(
                M - 1,
                static_cast<int>(std::floor((b.center[i] + R) / dxi + 1e-9)) +
                    M / 2);
        }
        int tmin[2] = {M, M};
        int tmax[2] = {-M, -M};
        auto visit = [&](int i0, int i1, size_t idx) {
            Point xi = grid_.xi(idx);
            if (bapu_.phi(b.k, xi) < 1e-13) return;
            double th = bapu_.theta(b.k, xi);
            if (th <= 0.0) return;
            b.nodes.push_back(idx);
            b.theta.push_back(th);
            int tau[2] = {i0 - M / 2, i1 - M / 2};
            size_t t = fold(tau[0], b.L);
            if (c.dim == 2) t = t * static_cast<size_t>(b.L) + fold(tau[1], b.L);
            b.tflat.push_back(t);
            for (int i = 0; i < c.dim; ++i) {
                tmin[i] = std::min(tmin[i], tau[i]);
                tmax[i] = std::max(tmax[i], tau[i]);
            }
        };
        if (c.dim == 1) {
            for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
                visit(i0, 0, static_cast<size_t>(i0));
        } else {
            for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
                for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
                    visit(i0, i1,
                          static_cast<size_t>(i0) * static_cast<size_t>(M) +
                              static_cast<size_t>(i1));
        }
        // Distinct nodes must fold to distinct lattice slots, or the band
        // would alias under the period-L sampling.
        for (int i = 0; i < c.dim; ++i)
            if (!b.nodes.empty() && tmax[i] - tmin[i] >= b.L)
                throw structural_error(
                    "FrameSystem: band nodes span more than one sampling period");
    }

    Grid grid_;
    BapuSystem bapu_;
    std::vector<Band> bands_;
    std::map<IntVec, size_t> kpos_;
};

/// Round-trip and energy diagnostics of the frame on one signal.
struct TightnessReport {
    double residual = 0.0;         ///< |synthesize(analyze(f)) - f|_2 / |f|_2
    double parseval_defect = 0.0;  ///< |sum |c|^2 - |f|^2| / |f|^2
};

inline TightnessReport tight_frame_residual(const FrameSystem& sys,
                                            const VectorSignal& f) {
    TightnessReport rep;
    double nf = l2_norm(f);
    if (nf == 0.0) return rep;
    CoeffSeq c = sys.analyze(f);
    VectorSignal g = sys.synthesize(c);
    const Grid& grid = sys.grid();
    double hn = std::pow(grid.spacing(), grid.dim);
    CompensatedSum err;
    for (int ch = 0; ch < f.channels(); ++ch)
        for (size_t j = 0; j < grid.size(); ++j)
            err.add(std::norm(g.comp[static_cast<size_t>(ch)][j] -
                              f.comp[static_cast<size_t>(ch)][j]) *
                    hn);
    rep.residual = std::sqrt(std::max(0.0, err.value())) / nf;
    rep.parseval_defect = std::abs(c.sq_norm() - nf * nf) / (nf * nf);
    return rep;
}

/// Measured frame constant of the system on a probe signal, next to the
/// constant the alternative atom normalization (2 pi)^{-n/2} would give
/// (every coefficient would scale by (a/pi)^{n/2}).
struct NormalizationReport {
    double frame_constant = 0.0;
    double alternative_constant = 0.0;
};

inline NormalizationReport frame_normalization_probe(const FrameSystem& sys,
                                                     const VectorSignal& f) {
    double nf = l2_norm(f);
    if (nf == 0.0)
        throw invalid_parameter("frame_normalization_probe: zero probe signal");
    CoeffSeq c = sys.analyze(f);
    NormalizationReport rep;
    rep.frame_constant = c.sq_norm() / (nf * nf);
    rep.alternative_constant =
        rep.frame_constant *
        std::pow(sys.covering().a / pi, sys.covering().dim);
    return rep;
}

/// Smallest C with |phi(x)| <= C r^{n/2} (1 + r d(x))^{-N} over the grid,
/// d = torus distance to the atom centre.
///
/// Interior patches (those whose support is fully overlapped by neighbours)
/// share this constant uniformly. The outermost patches of a truncated
/// covering do not: beyond the last neighbour the normalized window equals
/// one all the way to its support edge and stops there with a unit jump, so
/// their time decay degrades to O(1/d) and the fitted constant grows with N.
inline double atom_time_envelope(const FrameSystem& sys, const IntVec& k,
                                 const IntVec& l, double N) {
    if (N < 0.0) throw invalid_parameter("atom_time_envelope: negative order");
    FrameAtom A = sys.atom(k, l);
    const Grid& g = sys.grid();
    double best = 0.0;
    for (size_t j = 0; j < g.size(); ++j) {
        double d = detail::torus_distance(g.x(j), A.center, g.halfwidth);
        double v = std::abs(A.time.comp[0][j]) *
                   std::pow(1.0 + A.scale * d, N) /
                   std::pow(A.scale, 0.5 * g.dim);
        best = std::max(best, v);
    }
    return best;
}

/// Smallest C with |phi_hat(xi)| <= C r^{-n/2} (1 + |xi - xi_k| / r)^{-L}
/// over the band nodes.
inline double atom_spectral_envelope(const FrameSystem& sys, const IntVec& k,
                                     const IntVec& l, double L) {
    if (L < 0.0)
        throw invalid_parameter("atom_spectral_envelope: negative order");
    FrameAtom A = sys.atom(k, l);
    const Grid& g = sys.grid();
    double best = 0.0;
    for (size_t idx : sys.band_nodes(k)) {
        double d = (g.xi(idx) - A.band_center).norm() / A.scale;
        double v = std::abs(A.spectrum.comp[0][idx]) * std::pow(1.0 + d, L) *
                   std::pow(A.scale, 0.5 * g.dim);
        best = std::max(best, v);
    }
    return best;
}

/// Exponents of the cross-Gram decay envelope
///   min(r/r')^scale_pow * (1 + |xi - xi'| / max(r, r'))^{-freq_pow}
///                       * (1 + min(r, r') d(x, x'))^{-space_pow}.
struct GramEnvelope {
    double scale_pow = 2.0;
    double freq_pow = 4.0;
    double space_pow = 3.0;
};

struct GramReport {
    size_t pairs = 0;             ///< pairs evaluated
    double fitted_constant = 0.0; ///< max |<a,b>| / envelope
    double max_disjoint = 0.0;    ///< largest |<a,b>| over disjoint-band pairs
    size_t disjoint_pairs = 0;
    KL worst_row{};               ///< pair attaining fitted_constant
    KL worst_col{};
};

/// Inner products between atoms of A and (optionally shifted) atoms of B,
/// fitted against the decay envelope. shift_factor s displaces each B atom
/// by s / r_j along every axis, turning it into a molecule at the same
/// time-frequency address; the envelope tracks the displaced centre.
inline GramReport cross_gram(const FrameSystem& A, const std::vector<KL>& rows,
                             const FrameSystem& B, const std::vector<KL>& cols,
                             const GramEnvelope& env,
                             double shift_factor = 0.0) {
    if (A.grid() != B.grid())
        throw structural_error("cross_gram: systems live on different grids");
    if (rows.empty() || cols.empty())
        throw invalid_parameter("cross_gram: empty index window");
    const Grid& g = A.grid();
    double dxin = std::pow(g.freq_spacing(), g.dim);

    struct Col {
        FrameAtom atom;
        Point center;
        double support = 0.0;
    };
    std::vector<Col> cache;
    cache.reserve(cols.size());
    double cb = 1.5 * B.covering().c1;
    for (const KL& kl : cols) {
        Col c;
        c.atom = B.atom(kl.k, kl.l);
        double s = shift_factor / c.atom.scale;
        if (s != 0.0) {
            for (size_t idx : B.band_nodes(kl.k)) {
                Point xi = g.xi(idx);
                double ph = 0.0;
                for (int i = 0; i < g.dim; ++i) ph -= xi[i] * s;
                c.atom.spectrum.comp[0][idx] *= std::polar(1.0, ph);
            }
        }
        c.center = c.atom.center;
        for (int i = 0; i < g.dim; ++i) c.center[i] += s;
        c.support = cb * c.atom.scale;
        cache.push_back(std::move(c));
    }

    GramReport rep;
    double ca = 1.5 * A.covering().c1;
    for (const KL& ra : rows) {
        FrameAtom a = A.atom(ra.k, ra.l);
        double sa = ca * a.scale;
        const std::vector<size_t>& nodes = A.band_nodes(ra.k);
        for (size_t cj = 0; cj < cache.size(); ++cj) {
            const Col& col = cache[cj];
            CompensatedSum re, im;
            for (size_t idx : nodes) {
                cd v = a.spectrum.comp[0][idx] *
                       std::conj(col.atom.spectrum.comp[0][idx]);
                re.add(v.real());
                im.add(v.imag());
            }
            double mag = std::abs(cd(re.value(), im.value())) * dxin;
            ++rep.pairs;
            bool disjoint =
                (a.band_center - col.atom.band_center).norm() > sa + col.support;
            if (disjoint) {
                ++rep.disjoint_pairs;
                rep.max_disjoint = std::max(rep.max_disjoint, mag);
            }
            double rmin = std::min(a.scale, col.atom.scale);
            double rmax = std::max(a.scale, col.atom.scale);
            double dxi = (a.band_center - col.atom.band_center).norm();
            double dx = detail::torus_distance(a.center, col.center,
                                               g.halfwidth);
            double bound = std::pow(rmin / rmax, env.scale_pow) *
                           std::pow(1.0 + dxi / rmax, -env.freq_pow) *
                           std::pow(1.0 + rmin * dx, -env.space_pow);
            double c = mag / bound;
            if (c > rep.fitted_constant) {
                rep.fitted_constant = c;
                rep.worst_row = ra;
                rep.worst_col = cols[cj];
            }
        }
    }
    return rep;
}

}  // namespace alphamod
