#pragma once

// Periodic sampling grid and the unitary Fourier transform convention used by
// the whole library:
//
//   (F f)(xi)      = (2 pi)^(-n/2) Integral f(x) exp(-i x.xi) dx
//   (F^-1 g)(x)    = (2 pi)^(-n/2) Integral g(xi) exp(+i x.xi) dxi
//
// discretised on the box [-T, T)^n with M points per axis (M even):
//   h  = 2T/M,  x_j  = -T + j h
//   dxi = pi/T, xi_m = m dxi for m in [-M/2, M/2)
//
// With these choices h*dxi = 2 pi / M, the rectangle-rule transform is exactly
// unitary between the weighted node norms, and F (resp. F^-1) reduces to a
// phase-adjusted DFT executed by FFTW.

#include <fftw3.h>

#include <map>
#include <string>

#include "core.hpp"

namespace alphamod {

struct Grid {
    int dim = 1;             ///< ambient dimension n, 1 or 2
    double halfwidth = 0.0;  ///< T: box is [-T, T)^n
    int points = 0;          ///< M: nodes per axis, even

    static Grid make(int dim, double halfwidth, int points) {
        if (dim != 1 && dim != 2)
            throw invalid_parameter("Grid: dim must be 1 or 2");
        if (!(halfwidth > 0.0))
            throw invalid_parameter("Grid: halfwidth must be positive");
        if (points < 4 || points % 2 != 0)
            throw invalid_parameter("Grid: points must be even and >= 4");
        return Grid{dim, halfwidth, points};
    }

    double spacing() const { return 2.0 * halfwidth / points; }       // h
    double freq_spacing() const { return pi / halfwidth; }            // dxi
    double xi_max() const { return pi / spacing(); }                  // Nyquist
    double guard_radius() const { return 0.9 * xi_max(); }
    size_t size() const {
        size_t m = static_cast<size_t>(points);
        return dim == 1 ? m : m * m;
    }

    double x_axis(int j) const { return -halfwidth + j * spacing(); }
    double xi_axis(int i) const { return (i - points / 2) * freq_spacing(); }

    Point x(size_t idx) const {
        if (dim == 1) return Point(x_axis(static_cast<int>(idx)));
        int j0 = static_cast<int>(idx) / points;
        int j1 = static_cast<int>(idx) % points;
        return Point(x_axis(j0), x_axis(j1));
    }
    Point xi(size_t idx) const {
        if (dim == 1) return Point(xi_axis(static_cast<int>(idx)));
        int i0 = static_cast<int>(idx) / points;
        int i1 = static_cast<int>(idx) % points;
        return Point(xi_axis(i0), xi_axis(i1));
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && halfwidth == o.halfwidth && points == o.points;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// C^N-valued samples on the nodes of a grid, component-major storage.
struct VectorSignal {
    Grid grid;
    std::vector<std::vector<cd>> comp;

    static VectorSignal zeros(const Grid& g, int n_comp) {
        if (n_comp < 1) throw invalid_parameter("VectorSignal: N >= 1 required");
        VectorSignal f;
        f.grid = g;
        f.comp.assign(static_cast<size_t>(n_comp), std::vector<cd>(g.size()));
        return f;
    }
    int channels() const { return static_cast<int>(comp.size()); }
    void check_consistent() const {
        for (const auto& c : comp)
            if (c.size() != grid.size())
                throw structural_error("VectorSignal: component/grid size mismatch");
    }
};

/// Frequency-side companion of VectorSignal; node i holds the value at
/// xi = (i - M/2) * dxi per axis (row-major for dim 2).
struct SpectralSignal {
    Grid grid;
    std::vector<std::vector<cd>> comp;

    static SpectralSignal zeros(const Grid& g, int n_comp) {
        if (n_comp < 1) throw invalid_parameter("SpectralSignal: N >= 1 required");
        SpectralSignal f;
        f.grid = g;
        f.comp.assign(static_cast<size_t>(n_comp), std::vector<cd>(g.size()));
        return f;
    }
    int channels() const { return static_cast<int>(comp.size()); }
};

namespace detail {

/// In-place unnormalised DFT over all axes. sign = FFTW_FORWARD or
/// FFTW_BACKWARD. Plans use FFTW_ESTIMATE: deterministic and cheap at the
/// sizes this library targets.
inline void dft(const Grid& g, std::vector<cd>& data, int sign) {
    if (data.size() != g.size())
        throw structural_error("dft: buffer does not match grid");
    int dims[2] = {g.points, g.points};
    fftw_complex* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = fftw_plan_dft(g.dim, dims, p, p, sign, FFTW_ESTIMATE);
    if (!plan) throw structural_error("dft: FFTW plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

/// Map shifted frequency index i (0..M-1 per axis) to the DFT bin of
/// m = i - M/2, plus the parity of m for the phase factor (-1)^m.
inline void shift_info(int M, int i, int& bin, int& parity) {
    int m = i - M / 2;
    bin = (m % M + M) % M;
    parity = m & 1;
}

}  // namespace detail

/// Forward transform of every component. Exact (to rounding) on grid
/// band-limited data; unitary against l2_norm below.
inline SpectralSignal forward_ft(const VectorSignal& f) {
    f.check_consistent();
    const Grid& g = f.grid;
    const int M = g.points;
    const double scale =
        std::pow(2.0 * pi, -0.5 * g.dim) * std::pow(g.spacing(), g.dim);
    SpectralSignal out = SpectralSignal::zeros(g, f.channels());
    std::vector<cd> buf(g.size());
    for (int c = 0; c < f.channels(); ++c) {
        buf = f.comp[static_cast<size_t>(c)];
        detail::dft(g, buf, FFTW_FORWARD);
        auto& dst = out.comp[static_cast<size_t>(c)];
        if (g.dim == 1) {
            for (int i = 0; i < M; ++i) {
                int bin, par;
                detail::shift_info(M, i, bin, par);
                dst[static_cast<size_t>(i)] =
                    (par ? -scale : scale) * buf[static_cast<size_t>(bin)];
            }
        } else {
            for (int i0 = 0; i0 < M; ++i0) {
                int b0, p0;
                detail::shift_info(M, i0, b0, p0);
                for (int i1 = 0; i1 < M; ++i1) {
                    int b1, p1;
                    detail::shift_info(M, i1, b1, p1);
                    double s = ((p0 + p1) & 1) ? -scale : scale;
                    dst[static_cast<size_t>(i0 * M + i1)] =
                        s * buf[static_cast<size_t>(b0 * M + b1)];
                }
            }
        }
    }
    return out;
}

/// Inverse transform; inverse_ft(forward_ft(f)) == f to rounding.
inline VectorSignal inverse_ft(const SpectralSignal& fh) {
    const Grid& g = fh.grid;
    const int M = g.points;
    const double scale =
        std::pow(2.0 * pi, -0.5 * g.dim) * std::pow(g.freq_spacing(), g.dim);
    VectorSignal out = VectorSignal::zeros(g, fh.channels());
    std::vector<cd> buf(g.size());
    for (int c = 0; c < fh.channels(); ++c) {
        const auto& src = fh.comp[static_cast<size_t>(c)];
        std::fill(buf.begin(), buf.end(), cd(0.0, 0.0));
        if (g.dim == 1) {
            for (int i = 0; i < M; ++i) {
                int bin, par;
                detail::shift_info(M, i, bin, par);
                buf[static_cast<size_t>(bin)] =
                    (par ? -1.0 : 1.0) * src[static_cast<size_t>(i)];
            }
        } else {
            for (int i0 = 0; i0 < M; ++i0) {
                int b0, p0;
                detail::shift_info(M, i0, b0, p0);
                for (int i1 = 0; i1 < M; ++i1) {
                    int b1, p1;
                    detail::shift_info(M, i1, b1, p1);
                    double s = ((p0 + p1) & 1) ? -1.0 : 1.0;
                    buf[static_cast<size_t>(b0 * M + b1)] =
                        s * src[static_cast<size_t>(i0 * M + i1)];
                }
            }
        }
        detail::dft(g, buf, FFTW_BACKWARD);
        auto& dst = out.comp[static_cast<size_t>(c)];
        for (size_t i = 0; i < dst.size(); ++i) dst[i] = scale * buf[i];
    }
    return out;
}

/// Evaluate the band-limited interpolant of one spectral component at an
/// arbitrary point: (2 pi)^(-n/2) dxi^n sum_m g(xi_m) exp(i x.xi_m).
/// Agrees with inverse_ft at grid nodes.
inline cd trig_interpolate(const SpectralSignal& fh, int c, const Point& x) {
    const Grid& g = fh.grid;
    if (c < 0 || c >= fh.channels())
        throw structural_error("trig_interpolate: component out of range");
    const auto& src = fh.comp[static_cast<size_t>(c)];
    const double scale =
        std::pow(2.0 * pi, -0.5 * g.dim) * std::pow(g.freq_spacing(), g.dim);
    cd acc(0.0, 0.0);
    for (size_t i = 0; i < src.size(); ++i) {
        if (src[i] == cd(0.0, 0.0)) continue;
        Point xi = g.xi(i);
        double ph = x.dot(xi);
        acc += src[i] * cd(std::cos(ph), std::sin(ph));
    }
    return scale * acc;
}

/// Grid L2 norm: sqrt(h^n sum |f|^2) over all components.
inline double l2_norm(const VectorSignal& f) {
    const double w = std::pow(f.grid.spacing(), f.grid.dim);
    CompensatedSum acc;
    for (const auto& c : f.comp)
        for (const cd& z : c) acc.add(std::norm(z));
    return std::sqrt(w * acc.value());
}

inline double l2_norm(const SpectralSignal& f) {
    const double w = std::pow(f.grid.freq_spacing(), f.grid.dim);
    CompensatedSum acc;
    for (const auto& c : f.comp)
        for (const cd& z : c) acc.add(std::norm(z));
    return std::sqrt(w * acc.value());
}

// ---------------------------------------------------------------------------
// Closed-form signal registry. Every entry is deterministic; "white_noise"
// derives one independent stream per component from the seed parameter.
// Components of the smooth entries are scaled copies (amplitude 1/(1+c)) so
// multi-channel signals are non-degenerate.
// ---------------------------------------------------------------------------

using SignalParams = std::map<std::string, double>;

inline VectorSignal sample_closed_form(const Grid& g, const std::string& name,
                                       const SignalParams& params = {}) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    const int n_comp = static_cast<int>(get("components", 1.0));
    if (n_comp < 1)
        throw invalid_parameter("sample_closed_form: components >= 1");
    VectorSignal f = VectorSignal::zeros(g, n_comp);

    auto fill = [&](const std::function<cd(const Point&)>& fn) {
        for (int c = 0; c < n_comp; ++c) {
            double amp = 1.0 / (1.0 + c);
            auto& dst = f.comp[static_cast<size_t>(c)];
            for (size_t i = 0; i < dst.size(); ++i) dst[i] = amp * fn(g.x(i));
        }
    };

    if (name == "zero") {
        // already zero
    } else if (name == "gaussian") {
        double sigma = get("sigma", 1.0);
        Point c0 = Point::zero(g.dim);
        c0[0] = get("center0", 0.0);
        if (g.dim == 2) c0[1] = get("center1", 0.0);
        if (!(sigma > 0.0))
            throw invalid_parameter("gaussian: sigma must be positive");
        fill([&](const Point& x) {
            return cd(std::exp(-(x - c0).norm_sq() / (2.0 * sigma * sigma)), 0.0);
        });
    } else if (name == "modulated_gaussian") {
        double sigma = get("sigma", 1.0);
        Point xi0 = Point::zero(g.dim);
        xi0[0] = get("xi0_0", 0.0);
        if (g.dim == 2) xi0[1] = get("xi0_1", 0.0);
        fill([&](const Point& x) {
            double env = std::exp(-x.norm_sq() / (2.0 * sigma * sigma));
            double ph = x.dot(xi0);
            return cd(env * std::cos(ph), env * std::sin(ph));
        });
    } else if (name == "bump") {
        double radius = get("radius", 1.0);
        if (!(radius > 0.0))
            throw invalid_parameter("bump: radius must be positive");
        fill([&](const Point& x) {
            double u2 = x.norm_sq() / (radius * radius);
            if (u2 >= 1.0) return cd(0.0, 0.0);
            return cd(std::exp(1.0 - 1.0 / (1.0 - u2)), 0.0);
        });
    } else if (name == "chirp") {
        double rate = get("rate", 0.1);
        double sigma = get("sigma", 2.0);
        fill([&](const Point& x) {
            double env = std::exp(-x.norm_sq() / (2.0 * sigma * sigma));
            double ph = rate * x.norm_sq();
            return cd(env * std::cos(ph), env * std::sin(ph));
        });
    } else if (name == "white_noise") {
        uint64_t seed = static_cast<uint64_t>(get("seed", 1.0));
        for (int c = 0; c < n_comp; ++c) {
            Rng rng(Rng::sub_seed(seed, static_cast<uint64_t>(c)));
            auto& dst = f.comp[static_cast<size_t>(c)];
            for (size_t i = 0; i < dst.size(); ++i)
                dst[i] = rng.complex_normal();
        }
    } else {
        throw registry_error("sample_closed_form: unknown signal '" + name + "'");
    }
    return f;
}

}  // namespace alphamod
