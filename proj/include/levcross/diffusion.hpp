#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace levcross {

enum class BoundaryKind { open, absorbing };

enum class Dir { up, down };

inline const char* to_string(Dir d) { return d == Dir::up ? "up" : "down"; }

// One-dimensional diffusion with generator (a(x)/2) d^2/dx^2 + b(x) d/dx on
// an interval whose finite endpoints are either open or absorbing.
// Immutable after construction; all operations on it are pure.
struct DiffusionSpec {
    std::function<double(double)> a;
    std::function<double(double)> b;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    BoundaryKind lo_boundary = BoundaryKind::open;
    BoundaryKind hi_boundary = BoundaryKind::open;

    // Validates a > 0 and b finite by sampling interior probe points;
    // violations raise error(errc::validation).
    static DiffusionSpec make(std::function<double(double)> a,
                              std::function<double(double)> b,
                              double lo, double hi,
                              BoundaryKind lo_boundary, BoundaryKind hi_boundary);

    bool lo_infinite() const { return std::isinf(lo); }
    bool hi_infinite() const { return std::isinf(hi); }
    bool contains_interior(double x) const { return x > lo && x < hi; }
};

// Strictly increasing interior levels x_0 < ... < x_{N-1}, N >= 1.
struct LevelSet {
    std::vector<double> levels;

    static LevelSet make(std::vector<double> levels, const DiffusionSpec& spec);

    int size() const { return static_cast<int>(levels.size()); }
    double operator[](int i) const { return levels[static_cast<size_t>(i)]; }
};

// Index of the inter-level region containing x. Regions are left-open and
// right-closed: region 0 is (-inf, x_0], region k is (x_{k-1}, x_k], region
// N is (x_{N-1}, inf); a point exactly on a level belongs to the lower
// region. Total on the state interval.
int region_of(const LevelSet& levels, double x);

// Scale function normalized to s(x0) = 0, s'(x0) = 1; strictly increasing.
double scale_function(const DiffusionSpec& spec, double x0, double x);

// P^{x_i}(hit the adjacent level in direction dir in finite time), computed
// from scale-function limits toward the far boundary. Exactly 1.0 when the
// scale function is unbounded toward that boundary.
double hitting_probability(const DiffusionSpec& spec, const LevelSet& levels, int i, Dir dir);

}  // namespace levcross
