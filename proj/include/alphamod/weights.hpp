#pragma once

// Matrix weights W : R^n -> C^{NxN} (Hermitian, positive definite a.e.) and
// their diagnostics:
//   * the weighted L^p norm ||f||^p = int ||W^{1/p}(x) f(x)||^p dx,
//   * Muckenhoupt-type constants for p > 1 and p = 1,
//   * doubling exponents of the scalarised measures ||W^{1/p}(t) y||^p,
//   * reducing operators (SPD proxies for the cube-averaged norm) and the
//     strong-doubling comparison of a reducing family,
//   * a convolution boundedness probe against the L^1-normalised dilations
//     of the kernel g(x) = (1+|x|)^{-n-1}.
//
// All suprema are taken over finite sampled families, so every reported
// constant is a lower bound of the true one. Integrals use the midpoint rule;
// its nodes sit strictly inside the cells, which keeps power-law weights with
// a singularity on a cell boundary finite at every node. Divergence of a
// constant is flagged by monotone growth across three quadrature refinement
// levels (m, 2m, 4m nodes per axis).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <gsl/gsl_sf_expint.h>

#include "covering.hpp"
#include "grid.hpp"

namespace alphamod {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Largest singular value. Closed forms for N <= 2, solver above.
inline double spectral_norm(const Matrix& A) {
    const int N = static_cast<int>(A.rows());
    if (N == 1) return std::abs(A(0, 0));
    if (N == 2) {
        // eigenvalues of A^*A from trace and determinant
        double f = A.squaredNorm();
        double d = std::norm(A.determinant());
        double disc = std::max(0.0, f * f - 4.0 * d);
        return std::sqrt(0.5 * (f + std::sqrt(disc)));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.adjoint() * A);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// H^s for Hermitian positive definite H via spectral calculus.
inline Matrix hermitian_power(const Matrix& H, double s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    if (es.info() != Eigen::Success)
        throw quadrature_error("hermitian_power: eigensolver failed");
    Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() <= 0.0)
        throw quadrature_error("hermitian_power: matrix not positive definite");
    Eigen::VectorXd pw(lam.size());
    for (int i = 0; i < lam.size(); ++i) pw(i) = std::pow(lam(i), s);
    return es.eigenvectors() * pw.asDiagonal() *
           es.eigenvectors().adjoint();
}

class MatrixWeight {
  public:
    int N = 1;
    int dim = 1;
    std::string description;

    MatrixWeight() = default;
    MatrixWeight(int N_, int dim_, std::string desc,
                 std::function<Matrix(const Point&)> f)
        : N(N_), dim(dim_), description(std::move(desc)), fn_(std::move(f)) {
        validate();
    }

    Matrix operator()(const Point& x) const { return fn_(x); }
    /// W^{1/p}(x)
    Matrix root(const Point& x, double p) const {
        return hermitian_power(fn_(x), 1.0 / p);
    }
    /// W^{-1/p}(x)
    Matrix inv_root(const Point& x, double p) const {
        return hermitian_power(fn_(x), -1.0 / p);
    }

    /// The weight W^{-p'/p} whose L^{p'} space is dual to L^p(W).
    MatrixWeight dual(double p) const {
        if (p <= 1.0) throw invalid_parameter("dual weight needs p > 1");
        double q = p / (p - 1.0);
        MatrixWeight out;
        out.N = N;
        out.dim = dim;
        out.description = description + " dual(p=" + std::to_string(p) + ")";
        auto base = fn_;
        double expo = -q / p;
        out.fn_ = [base, expo](const Point& x) {
            return hermitian_power(base(x), expo);
        };
        return out;
    }

    static MatrixWeight constant(int dim, const Matrix& W0) {
        Matrix C = W0;
        return MatrixWeight(static_cast<int>(C.rows()), dim, "constant",
                            [C](const Point&) { return C; });
    }

    /// diag(s(x)^{g_i}) with s(x) = |x| + eps, or s(x) = (1+|x|^2)^{1/2} when
    /// bracket is set (then eps is ignored).
    static MatrixWeight diagonal_power(int dim, const std::vector<double>& gammas,
                                       double eps = 0.0, bool bracket = false) {
        if (gammas.empty()) throw invalid_parameter("diagonal_power: no exponents");
        if (eps < 0.0) throw invalid_parameter("diagonal_power: eps < 0");
        int N = static_cast<int>(gammas.size());
        std::string d = bracket ? "bracket_power" : "abs_power";
        return MatrixWeight(N, dim, d, [gammas, eps, bracket, N](const Point& x) {
            double s = bracket ? std::sqrt(1.0 + x.norm_sq()) : x.norm() + eps;
            Matrix W = Matrix::Zero(N, N);
            for (int i = 0; i < N; ++i) W(i, i) = std::pow(s, gammas[i]);
            return W;
        });
    }

    /// R diag(s^{g_i}) R^T with R the rotation by `angle` in the (0,1)
    /// coordinate plane. Couples the channels so the weight is genuinely
    /// non-diagonal away from angle = 0.
    static MatrixWeight rotated_power(int dim, double angle,
                                      const std::vector<double>& gammas,
                                      double eps = 0.0, bool bracket = false) {
        int N = static_cast<int>(gammas.size());
        if (N < 2) throw invalid_parameter("rotated_power needs N >= 2");
        Matrix R = Matrix::Identity(N, N);
        R(0, 0) = std::cos(angle);
        R(0, 1) = -std::sin(angle);
        R(1, 0) = std::sin(angle);
        R(1, 1) = std::cos(angle);
        MatrixWeight base = diagonal_power(dim, gammas, eps, bracket);
        return MatrixWeight(N, dim, "rotated_power", [base, R](const Point& x) {
            Matrix D = base(x);
            return Matrix(R * D * R.adjoint());
        });
    }

    /// Scalar (N=1) power weight s(x)^gamma.
    static MatrixWeight scalar_power(int dim, double gamma, double eps = 0.0,
                                     bool bracket = false) {
        return diagonal_power(dim, {gamma}, eps, bracket);
    }

  private:
    std::function<Matrix(const Point&)> fn_;

    void validate() const {
        if (dim != 1 && dim != 2)
            throw invalid_parameter("MatrixWeight: dim must be 1 or 2");
        if (N < 1) throw invalid_parameter("MatrixWeight: N must be positive");
        // spot-check Hermitian positive definiteness off the coordinate axes
        for (double t : {0.37, -1.21, 2.83}) {
            Point x = dim == 1 ? Point(t) : Point(t, 0.59 * t);
            Matrix W = fn_(x);
            if (W.rows() != N || W.cols() != N)
                throw invalid_parameter("MatrixWeight: evaluator size mismatch");
            if ((W - W.adjoint()).norm() > 1e-12 * (1.0 + W.norm()))
                throw invalid_parameter("MatrixWeight: evaluator not Hermitian");
            Eigen::SelfAdjointEigenSolver<Matrix> es(W);
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw invalid_parameter("MatrixWeight: not positive definite");
        }
    }
};

/// || f ||_{L^p(W)} on the grid carrying f, by the Riemann sum with cell
/// volume h^n.
inline double lp_w_norm(const MatrixWeight& W, double p, const VectorSignal& f) {
    if (static_cast<int>(f.channels()) != W.N)
        throw structural_error("lp_w_norm: channel count != weight size");
    if (f.grid.dim != W.dim)
        throw structural_error("lp_w_norm: grid/weight dim mismatch");
    if (p < 1.0) throw invalid_parameter("lp_w_norm: p < 1");
    double cell = std::pow(f.grid.spacing(), f.grid.dim);
    CompensatedSum acc;
    Vector v(W.N);
    for (size_t i = 0; i < f.grid.size(); ++i) {
        Matrix Rt = W.root(f.grid.x(i), p);
        for (int c = 0; c < W.N; ++c) v(c) = f.comp[c][i];
        acc.add(std::pow((Rt * v).norm(), p) * cell);
    }
    return std::pow(acc.value(), 1.0 / p);
}

// ---------------------------------------------------------------------------
// cube quadrature

struct CubeSpec {
    Point center;
    double halfwidth = 1.0;
};

/// Midpoint nodes of the cube center + halfwidth[-1,1]^n, m per axis.
inline std::vector<Point> midpoint_nodes(const Point& center, double halfwidth,
                                         int m, int dim) {
    if (m < 1) throw invalid_parameter("midpoint_nodes: m < 1");
    double h = 2.0 * halfwidth / m;
    std::vector<Point> out;
    if (dim == 1) {
        out.reserve(m);
        for (int i = 0; i < m; ++i)
            out.push_back(Point(center[0] - halfwidth + (i + 0.5) * h));
    } else {
        out.reserve(static_cast<size_t>(m) * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                out.push_back(Point(center[0] - halfwidth + (i + 0.5) * h,
                                    center[1] - halfwidth + (j + 0.5) * h));
    }
    return out;
}

/// Origin-centred dyadic cubes plus a few shifted ones inside the box
/// |x| <= R. Deterministic; used as the default supremum family.
inline std::vector<CubeSpec> default_cube_family(int dim, double R) {
    if (R <= 0.0) throw invalid_parameter("default_cube_family: R <= 0");
    std::vector<CubeSpec> out;
    for (int j = 0; j < 4; ++j)
        out.push_back({Point::zero(dim), R * std::pow(2.0, -j)});
    std::vector<double> shifts = {0.5 * R, -0.31 * R, 0.17 * R};
    for (double s : shifts) {
        Point c = dim == 1 ? Point(s) : Point(s, -0.6 * s);
        out.push_back({c, 0.25 * R});
    }
    return out;
}

struct WeightClassReport {
    double p = 2.0;
    double value = 0.0;                  // supremum at the finest level
    std::array<double, 3> levels{};     // estimates at m, 2m, 4m nodes/axis
    bool divergent = false;
    int cubes = 0;
    int base_nodes = 0;
};

namespace detail {

inline bool monotone_growth(const std::array<double, 3>& v) {
    return v[1] > v[0] && v[2] > v[1] && v[2] > 1.05 * v[0];
}

}  // namespace detail

/// Muckenhoupt-type constant for p > 1:
///   sup_Q (1/|Q|) int_Q [ (1/|Q|) int_Q ||W^{1/p}(x) W^{-1/p}(t)||^{p'} dt ]^{p/p'} dx
/// sampled over the given cube family. Lower bound of the true constant.
inline WeightClassReport ap_constant_estimate(const MatrixWeight& W, double p,
                                              const std::vector<CubeSpec>& cubes,
                                              int base_nodes = 0) {
    if (p <= 1.0) throw invalid_parameter("ap_constant_estimate: needs p > 1");
    if (cubes.empty()) throw invalid_parameter("ap_constant_estimate: no cubes");
    if (base_nodes <= 0) base_nodes = W.dim == 1 ? 64 : 8;
    double pp = p / (p - 1.0);
    WeightClassReport rep;
    rep.p = p;
    rep.cubes = static_cast<int>(cubes.size());
    rep.base_nodes = base_nodes;
    for (int lev = 0; lev < 3; ++lev) {
        int m = base_nodes << lev;
        double sup = 0.0;
        for (const CubeSpec& q : cubes) {
            std::vector<Point> nodes = midpoint_nodes(q.center, q.halfwidth, m, W.dim);
            const size_t M = nodes.size();
            std::vector<Matrix> rt(M), irt(M);
            for (size_t i = 0; i < M; ++i) {
                rt[i] = W.root(nodes[i], p);
                irt[i] = W.inv_root(nodes[i], p);
            }
            CompensatedSum outer;
            for (size_t ix = 0; ix < M; ++ix) {
                CompensatedSum inner;
                for (size_t it = 0; it < M; ++it)
                    inner.add(std::pow(spectral_norm(rt[ix] * irt[it]), pp));
                outer.add(std::pow(inner.value() / M, p / pp));
            }
            sup = std::max(sup, outer.value() / M);
        }
        rep.levels[lev] = sup;
    }
    rep.value = rep.levels[2];
    rep.divergent = detail::monotone_growth(rep.levels);
    return rep;
}

/// Endpoint constant:
///   sup_Q max_{y in Q} (1/|Q|) int_Q ||W(t) W^{-1}(y)|| dt,
/// with the essential supremum in y replaced by the node maximum.
inline WeightClassReport a1_constant_estimate(const MatrixWeight& W,
                                              const std::vector<CubeSpec>& cubes,
                                              int base_nodes = 0) {
    if (cubes.empty()) throw invalid_parameter("a1_constant_estimate: no cubes");
    if (base_nodes <= 0) base_nodes = W.dim == 1 ? 64 : 8;
    WeightClassReport rep;
    rep.p = 1.0;
    rep.cubes = static_cast<int>(cubes.size());
    rep.base_nodes = base_nodes;
    for (int lev = 0; lev < 3; ++lev) {
        int m = base_nodes << lev;
        double sup = 0.0;
        for (const CubeSpec& q : cubes) {
            std::vector<Point> nodes = midpoint_nodes(q.center, q.halfwidth, m, W.dim);
            const size_t M = nodes.size();
            std::vector<Matrix> Wt(M), Winv(M);
            for (size_t i = 0; i < M; ++i) {
                Wt[i] = W(nodes[i]);
                Winv[i] = hermitian_power(Wt[i], -1.0);
            }
            for (size_t iy = 0; iy < M; ++iy) {
                CompensatedSum avg;
                for (size_t it = 0; it < M; ++it)
                    avg.add(spectral_norm(Wt[it] * Winv[iy]));
                sup = std::max(sup, avg.value() / M);
            }
        }
        rep.levels[lev] = sup;
    }
    rep.value = rep.levels[2];
    rep.divergent = detail::monotone_growth(rep.levels);
    return rep;
}

// ---------------------------------------------------------------------------
// doubling

struct DoublingPlan {
    std::vector<Point> centers;
    std::vector<double> radii;
    std::vector<Vector> directions;  // unit vectors in C^N
    int nodes_per_axis = 0;          // 0 -> 256 (dim 1) / 32 (dim 2)
};

inline DoublingPlan default_doubling_plan(int dim, int N, uint64_t seed = 77) {
    DoublingPlan plan;
    if (dim == 1) {
        plan.centers = {Point(0.0), Point(1.3), Point(-0.7), Point(2.9)};
    } else {
        plan.centers = {Point(0.0, 0.0), Point(1.3, -0.4), Point(-0.7, 0.9),
                        Point(2.1, 1.7)};
    }
    plan.radii = {0.5, 1.0, 2.0, 4.0};
    for (int i = 0; i < N; ++i) {
        Vector e = Vector::Zero(N);
        e(i) = 1.0;
        plan.directions.push_back(e);
    }
    Rng rng(seed);
    for (int t = 0; t < 4; ++t) {
        Vector v(N);
        for (int i = 0; i < N; ++i) v(i) = rng.complex_normal();
        double nn = v.norm();
        if (nn > 0) plan.directions.push_back(v / nn);
    }
    return plan;
}

struct DoublingReport {
    double beta = 0.0;     // log2 of the worst observed doubling ratio
    double c = 1.0;        // 2^beta
    double y_spread = 0.0;  // max over directions minus min, in beta units
};

/// Doubling exponent of the measures w_y(t) = ||W^{1/p}(t) y||^p:
/// beta = log2 max over (center, radius, y) of
///   int_{R[x,2r]} w_y / int_{R[x,r]} w_y.
/// Reported as a lower bound; spread over y is diagnostic for whether the
/// exponent looks direction-independent.
inline DoublingReport doubling_exponent_estimate(const MatrixWeight& W, double p,
                                                 const DoublingPlan& plan) {
    if (p <= 0.0) throw invalid_parameter("doubling: p <= 0");
    if (plan.centers.empty() || plan.radii.empty() || plan.directions.empty())
        throw invalid_parameter("doubling: empty plan");
    int m = plan.nodes_per_axis > 0 ? plan.nodes_per_axis : (W.dim == 1 ? 256 : 32);
    if (m % 2 != 0) ++m;  // even counts keep cell boundaries on the center
    auto mass = [&](const Point& x, double r, const Vector& y) {
        std::vector<Point> nodes = midpoint_nodes(x, r, m, W.dim);
        double cell = std::pow(2.0 * r / m, W.dim);
        CompensatedSum acc;
        for (const Point& t : nodes)
            acc.add(std::pow((W.root(t, p) * y).norm(), p) * cell);
        return acc.value();
    };
    double beta_min = std::numeric_limits<double>::infinity();
    double beta_max = 0.0;
    for (const Vector& y : plan.directions) {
        double worst = 0.0;
        for (const Point& x : plan.centers)
            for (double r : plan.radii) {
                double lo = mass(x, r, y);
                double hi = mass(x, 2.0 * r, y);
                if (lo <= 0.0)
                    throw domain_error("doubling: degenerate weight (zero mass)");
                worst = std::max(worst, hi / lo);
            }
        double b = std::log2(worst);
        beta_min = std::min(beta_min, b);
        beta_max = std::max(beta_max, b);
    }
    DoublingReport rep;
    rep.beta = beta_max;
    rep.c = std::pow(2.0, beta_max);
    rep.y_spread = beta_max - beta_min;
    return rep;
}

// ---------------------------------------------------------------------------
// reducing operators

enum class ReducingMethod { exact_p2, ellipsoid_fit };

struct ReducingOptions {
    int nodes_per_axis = 0;  // 0 -> 4096 (dim 1) / 64 (dim 2)
    int directions = 0;      // 0 -> 2 N^2 + 8
    double kappa_tol = 10.0;
    uint64_t seed = 1234;
};

struct ReducingResult {
    Matrix A;            // SPD, |A x| ~ rho_{p,Q}(x)
    double kappa = 1.0;  // fitted equivalence factor (1 for exact_p2)
    int directions_used = 0;
};

namespace detail {

/// rho_{p,Q}(y)^p = (1/|Q|) int_Q ||W^{1/p}(t) y||^p dt on precomputed roots.
inline double rho_pow_p(const std::vector<Matrix>& roots, const Vector& y,
                        double p) {
    CompensatedSum acc;
    for (const Matrix& R : roots) acc.add(std::pow((R * y).norm(), p));
    return acc.value() / static_cast<double>(roots.size());
}

inline std::vector<Vector> fit_directions(int N, int D, uint64_t seed) {
    std::vector<Vector> u;
    for (int i = 0; i < N; ++i) {
        Vector e = Vector::Zero(N);
        e(i) = 1.0;
        u.push_back(e);
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            Vector a = Vector::Zero(N), b = Vector::Zero(N);
            a(i) = a(j) = 1.0 / std::sqrt(2.0);
            b(i) = 1.0 / std::sqrt(2.0);
            b(j) = cd(0.0, 1.0 / std::sqrt(2.0));
            u.push_back(a);
            u.push_back(b);
        }
    Rng rng(seed);
    while (static_cast<int>(u.size()) < D) {
        Vector v(N);
        for (int i = 0; i < N; ++i) v(i) = rng.complex_normal();
        double nn = v.norm();
        if (nn > 0) u.push_back(v / nn);
    }
    return u;
}

/// Least-squares Hermitian G with u^*Gu ~ targets on the directions.
inline Matrix fit_hermitian_form(const std::vector<Vector>& dirs,
                                 const std::vector<double>& targets, int N) {
    int P = N * N;  // N real diagonal + N(N-1)/2 complex off-diagonal entries
    int D = static_cast<int>(dirs.size());
    Eigen::MatrixXd M(D, P);
    Eigen::VectorXd b(D);
    for (int d = 0; d < D; ++d) {
        const Vector& u = dirs[d];
        int col = 0;
        for (int i = 0; i < N; ++i) M(d, col++) = std::norm(u(i));
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                cd prod = std::conj(u(i)) * u(j);
                M(d, col++) = 2.0 * prod.real();
                M(d, col++) = -2.0 * prod.imag();
            }
        b(d) = targets[d];
    }
    Eigen::VectorXd g = M.colPivHouseholderQr().solve(b);
    Matrix G = Matrix::Zero(N, N);
    int col = 0;
    for (int i = 0; i < N; ++i) G(i, i) = g(col++);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            double re = g(col++), im = g(col++);
            G(i, j) = cd(re, im);
            G(j, i) = cd(re, -im);
        }
    return G;
}

}  // namespace detail

/// SPD matrix A_Q with |A_Q y| comparable to the cube-averaged norm
/// rho_{p,Q}(y). exact_p2 (p = 2 only) returns the exact square root of the
/// cube average of W; ellipsoid_fit works for any p >= 1 by least-squares
/// fitting a Hermitian form to rho^2 on a direction set.
inline ReducingResult reducing_operator(const MatrixWeight& W, double p,
                                        const TimeCube& Q, ReducingMethod method,
                                        const ReducingOptions& opt = {}) {
    if (p < 1.0) throw invalid_parameter("reducing_operator: p < 1");
    int m = opt.nodes_per_axis > 0 ? opt.nodes_per_axis : (W.dim == 1 ? 4096 : 64);
    if (m < 8) throw invalid_parameter("reducing_operator: needs >= 8 nodes/axis");
    double hw = 0.5 * Q.side;
    Point center = Q.anchor;
    for (int i = 0; i < W.dim; ++i) center[i] += hw;
    std::vector<Point> nodes = midpoint_nodes(center, hw, m, W.dim);

    ReducingResult res;
    if (method == ReducingMethod::exact_p2) {
        if (p != 2.0)
            throw invalid_parameter("reducing_operator: exact_p2 needs p = 2");
        Matrix avg = Matrix::Zero(W.N, W.N);
        for (const Point& t : nodes) avg += W(t);
        avg /= static_cast<double>(nodes.size());
        res.A = hermitian_power(avg, 0.5);
        res.kappa = 1.0;
        res.directions_used = 0;
        return res;
    }

    std::vector<Matrix> roots(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) roots[i] = W.root(nodes[i], p);
    int D = opt.directions > 0 ? opt.directions : 2 * W.N * W.N + 8;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<Vector> dirs = detail::fit_directions(W.N, D, opt.seed);
        std::vector<double> targets(dirs.size());
        for (size_t i = 0; i < dirs.size(); ++i)
            targets[i] = std::pow(detail::rho_pow_p(roots, dirs[i], p), 2.0 / p);
        Matrix G = detail::fit_hermitian_form(dirs, targets, W.N);
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        if (es.eigenvalues().minCoeff() > 0.0) {
            double kappa = 1.0;
            for (size_t i = 0; i < dirs.size(); ++i) {
                double q = (dirs[i].adjoint() * G * dirs[i]).real()(0, 0);
                if (q <= 0.0 || targets[i] <= 0.0) {
                    kappa = std::numeric_limits<double>::infinity();
                    break;
                }
                double ratio = std::max(q / targets[i], targets[i] / q);
                kappa = std::max(kappa, std::sqrt(ratio));
            }
            if (kappa <= opt.kappa_tol) {
                res.A = hermitian_power(G, 0.5);
                res.kappa = kappa;
                res.directions_used = static_cast<int>(dirs.size());
                return res;
            }
        }
        D *= 2;  // densify and retry once
    }
    throw fit_error("reducing_operator: ellipsoid fit failed to converge");
}

using ReducingFamily = std::map<KL, Matrix>;

/// Reducing operators for every lattice cube Q(k,l), k over the covering's
/// index set, l in [-lmax, lmax]^n.
inline ReducingFamily build_reducing_family(const MatrixWeight& W, double p,
                                            const CoveringParams& cov, int lmax,
                                            ReducingMethod method,
                                            const ReducingOptions& opt = {}) {
    if (W.dim != cov.dim)
        throw structural_error("build_reducing_family: dim mismatch");
    ReducingFamily fam;
    std::vector<IntVec> ls;
    if (cov.dim == 1) {
        for (int l = -lmax; l <= lmax; ++l) ls.push_back(IntVec(l));
    } else {
        for (int l0 = -lmax; l0 <= lmax; ++l0)
            for (int l1 = -lmax; l1 <= lmax; ++l1) ls.push_back(IntVec(l0, l1));
    }
    for (const IntVec& k : cov.all_k())
        for (const IntVec& l : ls)
            fam[KL{k, l}] = reducing_operator(W, p, cov.cube(k, l), method, opt).A;
    return fam;
}

struct StrongDoublingReport {
    double c = 0.0;  // max over pairs of ||A_Q A_P^{-1}|| / envelope(Q, P)
    KL worst_q, worst_p;
    size_t pairs = 0;
};

/// Compares ||A_Q A_P^{-1}|| against the doubling envelope
///   max{ (r_j/r_k)^{n/p}, (r_k/r_j)^{(beta-n)/p} }
///     * (1 + min{r_j,r_k} |x_Q - x_P|)^{beta/p}
/// for Q = Q(j,l), P = Q(k,m). Returns the fitted constant (max ratio).
inline StrongDoublingReport strong_doubling_check(const ReducingFamily& fam,
                                                  const CoveringParams& cov,
                                                  double beta, double p,
                                                  size_t max_pairs = 200000,
                                                  uint64_t seed = 5) {
    if (fam.empty()) throw invalid_parameter("strong_doubling_check: empty family");
    std::vector<const std::pair<const KL, Matrix>*> items;
    items.reserve(fam.size());
    for (const auto& kv : fam) items.push_back(&kv);
    const double n = cov.dim;
    StrongDoublingReport rep;
    auto eval_pair = [&](size_t a, size_t b) {
        const KL& q = items[a]->first;
        const KL& pp = items[b]->first;
        double rj = cov.scale(q.k), rk = cov.scale(pp.k);
        Point xq = cov.cube(q.k, q.l).sample_point();
        Point xp = cov.cube(pp.k, pp.l).sample_point();
        Matrix M = items[a]->second * hermitian_power(items[b]->second, -1.0);
        double lhs = spectral_norm(M);
        double env = std::max(std::pow(rj / rk, n / p),
                              std::pow(rk / rj, (beta - n) / p)) *
                     std::pow(1.0 + std::min(rj, rk) * (xq - xp).norm(), beta / p);
        double ratio = lhs / env;
        if (ratio > rep.c) {
            rep.c = ratio;
            rep.worst_q = q;
            rep.worst_p = pp;
        }
        ++rep.pairs;
    };
    size_t total = items.size() * items.size();
    if (total <= max_pairs) {
        for (size_t a = 0; a < items.size(); ++a)
            for (size_t b = 0; b < items.size(); ++b) eval_pair(a, b);
    } else {
        Rng rng(seed);
        for (size_t t = 0; t < max_pairs; ++t)
            eval_pair(static_cast<size_t>(
                          rng.uniform_int(0, static_cast<int>(items.size()) - 1)),
                      static_cast<size_t>(rng.uniform_int(
                          0, static_cast<int>(items.size()) - 1)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// convolution probe

namespace detail {

/// int_0^inf cos(w x) / (1+x)^2 dx for w >= 0, from the sine/cosine
/// integrals; asymptotic series past the cancellation regime.
inline double cosine_kernel_integral(double w) {
    if (w == 0.0) return 1.0;
    if (w > 1e6) {
        double w2 = w * w;
        return 2.0 / w2 - 24.0 / (w2 * w2);
    }
    double si = gsl_sf_Si(w);
    double ci = gsl_sf_Ci(w);
    return 1.0 - w * (std::cos(w) * (0.5 * pi - si) + std::sin(w) * ci);
}

/// Radial profile of the dim-2 transform: int_0^inf (1+r)^{-3} J0(w r) r dr.
/// Integrates between consecutive Bessel-zero panels with Gauss-Legendre
/// nodes and averages the alternating partial sums; absolute accuracy ~1e-7,
/// far below the tolerances of the probes that consume it.
inline double bessel_kernel_integral(double w) {
    if (w <= 0.0) return 0.5;  // int r (1+r)^{-3} dr over (0, inf)
    // 12-point Gauss-Legendre nodes/weights on [-1, 1]
    static const double gx[12] = {
        -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
        -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
        0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
        0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    static const double gw[12] = {
        0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
        0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
        0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
        0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    auto integrand = [w](double v) {
        double s = w + v;
        return w * std::cyl_bessel_j(0.0, v) * v / (s * s * s);
    };
    auto panel = [&](double lo, double hi) {
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += gw[i] * integrand(mid + half * gx[i]);
        return s * half;
    };
    const double j1 = 2.404825557695773;
    // head panel [0, j1], subdivided geometrically near 0 where the rational
    // factor peaks at scale w
    double head = 0.0;
    double lo = 0.0, step = std::min(w, j1);
    while (lo < j1) {
        double hi = std::min(j1, lo + step);
        head += panel(lo, hi);
        lo = hi;
        step *= 2.0;
    }
    // alternating half-period panels; average consecutive partial sums
    double sum = head;
    double prev1 = sum, prev2 = sum;
    double term = 0.0;
    for (int s = 0; s < 4000; ++s) {
        double a = j1 + s * pi, b = a + pi;
        term = panel(a, b);
        prev2 = prev1;
        prev1 = sum;
        sum += term;
        if (std::abs(term) < 1e-6) break;  // averaging recovers the tail
    }
    // two-level averaging knocks out most of the alternating tail
    return 0.5 * (0.5 * (sum + prev1) + 0.5 * (prev1 + prev2));
}

/// (2 pi)^{n/2} ghat(omega) for g(x) = (1+|x|)^{-n-1}: the transfer factor of
/// convolution with g in the unitary transform convention.
inline double kernel_multiplier(int dim, double omega) {
    omega = std::abs(omega);
    if (dim == 1) return 2.0 * cosine_kernel_integral(omega);
    return 2.0 * pi * bessel_kernel_integral(omega);
}

class KernelMultiplierTable {
  public:
    KernelMultiplierTable(int dim, double omega_max) : dim_(dim) {
        if (dim == 1) return;  // closed form, no table
        double cap = std::max(1.0, omega_max);
        for (double w = 0.0; w <= 1.0 + 1e-12; w += 0.005) grid_.push_back(w);
        for (double w = grid_.back() * 1.02; w < cap * 1.02; w *= 1.02)
            grid_.push_back(w);
        vals_.resize(grid_.size());
        for (size_t i = 0; i < grid_.size(); ++i)
            vals_[i] = kernel_multiplier(2, grid_[i]);
    }
    double eval(double w) const {
        w = std::abs(w);
        if (dim_ == 1) return kernel_multiplier(1, w);
        if (w >= grid_.back()) return vals_.back();
        size_t hi = static_cast<size_t>(
            std::lower_bound(grid_.begin(), grid_.end(), w) - grid_.begin());
        if (hi == 0) return vals_[0];
        double t = (w - grid_[hi - 1]) / (grid_[hi] - grid_[hi - 1]);
        return (1.0 - t) * vals_[hi - 1] + t * vals_[hi];
    }

  private:
    int dim_;
    std::vector<double> grid_, vals_;
};

}  // namespace detail

struct ConvProbeReport {
    std::vector<double> deltas;
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

/// Norm ratios ||g_d * f|| / ||f|| in L^p(W) for the L^1-normalised dilations
/// g_d(x) = d^n g(d x) of g(x) = (1+|x|)^{-n-1}. The convolution acts
/// spectrally: multiply the transform of f by the continuous transfer factor
/// of g_d at each grid frequency, so the probe stays faithful even when d is
/// far from the grid scales. Zero input reports zero ratios.
inline ConvProbeReport convolution_bound_probe(const MatrixWeight& W, double p,
                                               const VectorSignal& f,
                                               const std::vector<double>& deltas) {
    if (deltas.empty()) throw invalid_parameter("convolution_bound_probe: no deltas");
    ConvProbeReport rep;
    rep.deltas = deltas;
    double base = lp_w_norm(W, p, f);
    if (base == 0.0) {
        rep.ratios.assign(deltas.size(), 0.0);
        return rep;
    }
    double dmin = *std::min_element(deltas.begin(), deltas.end());
    if (dmin <= 0.0) throw invalid_parameter("convolution_bound_probe: delta <= 0");
    const Grid& g = f.grid;
    double omega_max = g.xi_max() * std::sqrt(static_cast<double>(g.dim)) / dmin;
    detail::KernelMultiplierTable table(g.dim, omega_max);
    SpectralSignal fh = forward_ft(f);
    for (double d : deltas) {
        SpectralSignal gh = fh;
        for (size_t i = 0; i < g.size(); ++i) {
            double mval = table.eval(g.xi(i).norm() / d);
            for (int c = 0; c < gh.channels(); ++c) gh.comp[c][i] *= mval;
        }
        VectorSignal conv = inverse_ft(gh);
        rep.ratios.push_back(lp_w_norm(W, p, conv) / base);
    }
    rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    return rep;
}

}  // namespace alphamod
