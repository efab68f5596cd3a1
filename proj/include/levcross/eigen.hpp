#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levcross/diffusion.hpp"

namespace levcross {

enum class Direction { increasing, decreasing };

enum class EigenBoundary { vanish_at_left, vanish_at_right, natural_at_infinite };

// A monotone positive solution of (a/2) phi'' + b phi' = lambda phi on a
// subinterval, normalized to phi(eval_point) = 1. The trajectory holds the
// accepted integrator nodes; values() re-integrates locally from the nearest
// node, so queried values carry integrator accuracy rather than
// interpolation error.
struct EigenSolution {
    double lambda = 0.0;
    Direction direction = Direction::decreasing;
    double xl = 0.0, xr = 0.0;  // requested subinterval (may be +-inf)
    double eval_point = 0.0;

    std::vector<double> xs, phi, dphi;  // ascending x, normalized

    std::pair<double, double> values(double x) const;  // (phi, phi')
    double log_derivative(double x) const;

    std::function<void(double, const double*, double*)> rhs;  // ODE right side
};

// Integrates the eigenequation from the vanishing endpoint (phi = 0,
// |phi'| = 1, sign set by the declared monotonicity). natural_at_infinite
// imposes phi = 0 at a truncation point pushed toward the open or infinite
// endpoint until the log-derivative at eval_point is stable to 1e-9
// relative (and phi at `probe`, when given, is stable too).
EigenSolution solve_eigen(const DiffusionSpec& spec, double lambda, double xl, double xr,
                          Direction dir, EigenBoundary bc, double eval_point,
                          std::optional<double> probe = std::nullopt);

// lambda -> 0+ limit by iterated Aitken extrapolation over a halving
// sequence starting at lambda0; converged when successive extrapolants
// differ by < rtol relative.
double limit_at_zero(const std::function<double(double)>& f, const char* where,
                     double lambda0 = 1e-3, double rtol = 1e-7);

enum class PsiCase {
    plus,
    minus,
    tilde_plus,
    tilde_minus,
    pair_up,
    pair_down,
    zero_plus,
    zero_minus,
    one_plus,
    one_minus,
};

const char* to_string(PsiCase c);
PsiCase psi_case_from_string(const std::string& s);

// Samples of one Laplace exponent over a lambda grid, with its lambda -> 0
// limit. Bernstein shape (nonnegative, nondecreasing, concave) is a test
// invariant, not enforced here.
struct ExponentTable {
    int level_index = 0;
    PsiCase tag = PsiCase::plus;
    std::vector<double> lambda;
    std::vector<double> psi;
    double psi_at_zero = 0.0;
};

// Caches the lambda-independent limits (psi(0) values, hitting transforms
// extrapolated to 0, scale-function hitting probabilities) per level/side.
// Thread-safe for concurrent const use; values are deterministic.
class PsiEngine {
public:
    PsiEngine(const DiffusionSpec& spec, const LevelSet& levels);

    const DiffusionSpec& spec() const { return *spec_; }
    const LevelSet& levels() const { return *levels_; }
    int n_levels() const { return levels_->size(); }

    double side(int i, Dir d, double lambda) const;
    double tilde(int i, Dir d, double lambda) const;
    double pair(int i, Dir d, double lambda) const;
    double transform(int i, Dir d, double lambda) const;

    double side_zero(int i, Dir d) const;
    double tilde_zero(int i, Dir d) const;
    double pair_zero(int i, Dir d) const;
    // lambda -> 0 limit of the hitting transform: P(H < infinity) via the
    // eigenfunction route (independent of the scale-function route).
    double transform_zero(int i, Dir d) const;
    double hitting_prob(int i, Dir d) const;  // scale-function route

    double one(int i, Dir d, double lambda) const;
    double zero(int i, Dir d, double lambda) const;

    double value(PsiCase c, int i, double lambda) const;
    double value_at_zero(PsiCase c, int i) const;

    // Which (i, dir) combinations are meaningful for a given case.
    bool case_valid(PsiCase c, int i) const;

private:
    const DiffusionSpec* spec_;
    const LevelSet* levels_;

    double cached(int slot, int i, Dir d, const std::function<double()>& compute) const;

    mutable std::mutex mu_;
    mutable std::map<std::tuple<int, int, int>, double> cache_;
};

// Convenience single-shot wrappers matching the engine methods.
double psi_side(const DiffusionSpec&, const LevelSet&, int i, Dir side, double lambda);
double psi_tilde(const DiffusionSpec&, const LevelSet&, int i, Dir side, double lambda);
double psi_pair(const DiffusionSpec&, const LevelSet&, int i, Dir dir, double lambda);
double psi_pair_zero(const DiffusionSpec&, const LevelSet&, int i, Dir dir);
double hitting_transform(const DiffusionSpec&, const LevelSet&, int i, Dir dir, double lambda);
double psi_one(const DiffusionSpec&, const LevelSet&, int i, Dir dir, double lambda);
double psi_zero(const DiffusionSpec&, const LevelSet&, int i, Dir dir, double lambda);

std::vector<double> log_spaced(double lo, double hi, int n);

ExponentTable build_exponent_table(const PsiEngine& eng, int i, PsiCase c,
                                   const std::vector<double>& lambdas);

}  // namespace levcross
