#pragma once

// Shared plumbing for the alphamod library: error taxonomy, small integer and
// real vectors for dimensions 1 and 2, compensated accumulation, and the
// deterministic RNG wrapper used by every sampling harness.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphamod {

using cd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Error taxonomy. Each condition the library treats as a contract violation
// gets its own type so callers and tests can discriminate.
// ---------------------------------------------------------------------------

struct invalid_parameter : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct registry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct coverage_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct window_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small vectors. dim is 1 or 2 everywhere in this library; component 1 is
// kept at zero when dim == 1 so arithmetic needs no branching.
// ---------------------------------------------------------------------------

struct Point {
    std::array<double, 2> v{0.0, 0.0};
    int dim = 1;

    Point() = default;
    explicit Point(double x) : v{x, 0.0}, dim(1) {}
    Point(double x, double y) : v{x, y}, dim(2) {}
    static Point zero(int d) {
        Point p;
        p.dim = d;
        return p;
    }

    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }

    double norm_sq() const { return v[0] * v[0] + v[1] * v[1]; }
    double norm() const { return std::sqrt(norm_sq()); }
    double inf_norm() const { return std::max(std::abs(v[0]), std::abs(v[1])); }

    Point operator+(const Point& o) const {
        Point p = *this;
        p.v[0] += o.v[0];
        p.v[1] += o.v[1];
        return p;
    }
    Point operator-(const Point& o) const {
        Point p = *this;
        p.v[0] -= o.v[0];
        p.v[1] -= o.v[1];
        return p;
    }
    Point operator*(double s) const {
        Point p = *this;
        p.v[0] *= s;
        p.v[1] *= s;
        return p;
    }
    double dot(const Point& o) const { return v[0] * o.v[0] + v[1] * o.v[1]; }
};

/// Integer multi-index (frequency index k or translation index l).
struct IntVec {
    std::array<int, 2> v{0, 0};
    int dim = 1;

    IntVec() = default;
    explicit IntVec(int x) : v{x, 0}, dim(1) {}
    IntVec(int x, int y) : v{x, y}, dim(2) {}
    static IntVec zero(int d) {
        IntVec k;
        k.dim = d;
        return k;
    }

    int operator[](int i) const { return v[static_cast<size_t>(i)]; }
    int& operator[](int i) { return v[static_cast<size_t>(i)]; }

    double norm_sq() const {
        return double(v[0]) * v[0] + double(v[1]) * v[1];
    }
    double norm() const { return std::sqrt(norm_sq()); }
    int inf_norm() const { return std::max(std::abs(v[0]), std::abs(v[1])); }

    bool operator==(const IntVec& o) const {
        return dim == o.dim && v == o.v;
    }
    bool operator!=(const IntVec& o) const { return !(*this == o); }
    // Lexicographic; used for deterministic map ordering.
    bool operator<(const IntVec& o) const {
        if (v[0] != o.v[0]) return v[0] < o.v[0];
        return v[1] < o.v[1];
    }

    Point to_point() const {
        Point p;
        p.dim = dim;
        p.v[0] = v[0];
        p.v[1] = v[1];
        return p;
    }
};

/// Japanese bracket <k> = (1 + |k|^2)^(1/2).
inline double bracket(const IntVec& k) { return std::sqrt(1.0 + k.norm_sq()); }
inline double bracket(const Point& x) { return std::sqrt(1.0 + x.norm_sq()); }
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

/// (k, l) lattice address of a time-frequency atom or cube.
struct KL {
    IntVec k;
    IntVec l;
    bool operator==(const KL& o) const { return k == o.k && l == o.l; }
    bool operator<(const KL& o) const {
        if (!(k == o.k)) return k < o.k;
        return l < o.l;
    }
};

struct KLHash {
    size_t operator()(const KL& a) const {
        // FNV-style mix over the four coordinates.
        uint64_t h = 1469598103934665603ull;
        for (int c : {a.k.v[0], a.k.v[1], a.l.v[0], a.l.v[1]}) {
            h ^= static_cast<uint64_t>(static_cast<uint32_t>(c));
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

// ---------------------------------------------------------------------------
// Compensated (Neumaier) accumulation. All norm reductions route through this
// so results are reproducible and accurate independent of summation length.
// ---------------------------------------------------------------------------

class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sum of f(i) for i in [0, count), compensated, fixed order.
template <class F>
double compensated_sum(size_t count, F&& f) {
    CompensatedSum acc;
    for (size_t i = 0; i < count; ++i) acc.add(f(i));
    return acc.value();
}

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 seeded explicitly; all harnesses derive their
// streams from a config seed so reruns are bit-identical.
// ---------------------------------------------------------------------------

class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(eng_);
    }
    double normal() {
        std::normal_distribution<double> d(0.0, 1.0);
        return d(eng_);
    }
    cd complex_normal() {
        double re = normal();
        double im = normal();
        return cd(re, im);
    }
    int uniform_int(int a, int b) {  // inclusive bounds
        std::uniform_int_distribution<int> d(a, b);
        return d(eng_);
    }
    /// Derived stream: stable sub-seed for component/trial indices.
    static uint64_t sub_seed(uint64_t seed, uint64_t salt) {
        uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace alphamod
