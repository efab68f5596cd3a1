#include "levcross/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levcross/errors.hpp"
#include "levcross/ode.hpp"

namespace levcross {

namespace {

constexpr const char* kWhere = "eigen.solve_eigen";

std::function<void(double, const double*, double*)> make_rhs(const DiffusionSpec& spec,
                                                             double lambda) {
    auto a = spec.a;
    auto b = spec.b;
    return [a, b, lambda](double x, const double* y, double* dy) {
        dy[0] = y[1];
        dy[1] = 2.0 * (lambda * y[0] - b(x) * y[1]) / a(x);
    };
}

// Magnitude of the decaying characteristic root of (a/2)m^2 + b m = lambda
// at a reference point; sets the starting truncation distance.
double decay_rate_hint(const DiffusionSpec& spec, double x, double lambda, Direction dir) {
    double a = spec.a(x);
    double b = spec.b(x);
    double disc = std::sqrt(b * b + 2.0 * a * lambda);
    // decreasing solutions decay to the right with rate |(-b - disc)/a|;
    // increasing solutions decay to the left with rate (-b + disc)/a.
    double m = (dir == Direction::decreasing) ? (b + disc) / a : (disc - b) / a;
    return std::max(std::fabs(m), 1e-8);
}

struct RawSolve {
    ode::Trajectory tr;  // integration order: vanish point -> terminus
    double start;        // vanish/truncation point
};

RawSolve integrate_from_vanish(const EigenSolution& sol, double vanish_at, double terminus,
                               Direction dir) {
    double dphi0 = (dir == Direction::increasing) ? 1.0 : -1.0;
    ode::Options opt;
    opt.rel_tol = 1e-10;
    opt.rescale_guard = true;
    opt.store = true;
    RawSolve rs;
    rs.start = vanish_at;
    rs.tr = ode::integrate(sol.rhs, vanish_at, terminus, 0.0, dphi0, opt, kWhere);
    return rs;
}

// Normalizes to phi(terminus) = 1 and stores ascending in x.
void finish_solution(EigenSolution& sol, const RawSolve& rs) {
    const auto& pts = rs.tr.pts;
    const auto& last = pts.back();
    if (last.y0 == 0.0 || !std::isfinite(last.y0))
        raise(errc::numerical, kWhere, "eigenfunction vanished or overflowed at the terminus");
    const int j_eval = last.scale_count;
    const double inv = 1.0 / last.y0;
    sol.xs.resize(pts.size());
    sol.phi.resize(pts.size());
    sol.dphi.resize(pts.size());
    for (size_t k = 0; k < pts.size(); ++k) {
        double f = inv * std::pow(1e-100, static_cast<double>(j_eval - pts[k].scale_count));
        sol.xs[k] = pts[k].x;
        sol.phi[k] = pts[k].y0 * f;
        sol.dphi[k] = pts[k].y1 * f;
    }
    if (sol.xs.size() > 1 && sol.xs.front() > sol.xs.back()) {
        std::reverse(sol.xs.begin(), sol.xs.end());
        std::reverse(sol.phi.begin(), sol.phi.end());
        std::reverse(sol.dphi.begin(), sol.dphi.end());
    }
}

}  // namespace

std::pair<double, double> EigenSolution::values(double x) const {
    if (xs.empty()) raise(errc::numerical, kWhere, "empty solution");
    if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12)
        raise(errc::out_of_support, "eigen.EigenSolution.values",
              "query outside the stored solution range");
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    size_t k = static_cast<size_t>(it - xs.begin());
    if (k == xs.size()) k = xs.size() - 1;
    if (k > 0 && (k == xs.size() || std::fabs(xs[k - 1] - x) < std::fabs(xs[k] - x))) --k;
    if (xs[k] == x) return {phi[k], dphi[k]};
    ode::Options opt;
    opt.rel_tol = 1e-12;
    opt.store = false;
    auto tr = ode::integrate(rhs, xs[k], x, phi[k], dphi[k], opt, "eigen.EigenSolution.values");
    return {tr.pts.back().y0, tr.pts.back().y1};
}

double EigenSolution::log_derivative(double x) const {
    auto [f, df] = values(x);
    if (f == 0.0)
        raise(errc::numerical, "eigen.EigenSolution.log_derivative",
              "phi underflowed to zero at the query point");
    return df / f;
}

EigenSolution solve_eigen(const DiffusionSpec& spec, double lambda, double xl, double xr,
                          Direction dir, EigenBoundary bc, double eval_point,
                          std::optional<double> probe) {
    if (!(lambda > 0.0)) raise(errc::validation, kWhere, "lambda must be > 0");
    if (!(xl < xr)) raise(errc::validation, kWhere, "empty subinterval");
    if (xl < spec.lo - 1e-12 || xr > spec.hi + 1e-12)
        raise(errc::validation, kWhere, "subinterval leaves the state interval");

    EigenSolution sol;
    sol.lambda = lambda;
    sol.direction = dir;
    sol.xl = xl;
    sol.xr = xr;
    sol.eval_point = eval_point;
    sol.rhs = make_rhs(spec, lambda);

    if (bc == EigenBoundary::vanish_at_left || bc == EigenBoundary::vanish_at_right) {
        // positive solutions vanish at the left end iff they increase
        if ((bc == EigenBoundary::vanish_at_left) != (dir == Direction::increasing))
            raise(errc::validation, kWhere,
                  "monotonicity inconsistent with the vanishing endpoint");
        double vanish = (bc == EigenBoundary::vanish_at_left) ? xl : xr;
        double terminus = (bc == EigenBoundary::vanish_at_left) ? xr : xl;
        if (!std::isfinite(vanish) || !std::isfinite(terminus))
            raise(errc::validation, kWhere, "Dirichlet boundary requires finite endpoints");
        auto rs = integrate_from_vanish(sol, vanish, terminus, dir);
        finish_solution(sol, rs);
        return sol;
    }

    // Truncated limit toward the open or infinite endpoint on the vanishing
    // side (left for increasing solutions, right for decreasing ones).
    const bool vanish_left = (dir == Direction::increasing);
    const double far_end = vanish_left ? xl : xr;
    const double terminus = vanish_left ? xr : xl;
    if (!std::isfinite(terminus))
        raise(errc::validation, kWhere, "the non-vanishing endpoint must be finite");

    double rate = decay_rate_hint(spec, terminus, lambda, dir);
    double dist = std::max(10.0 / rate, 1.0);
    // the trajectory must reach past the probe point
    if (probe) dist = std::max(dist, 1.25 * std::fabs(terminus - *probe));

    double prev_logd = 0.0;
    double prev_probe = 0.0;
    bool have_prev = false;

    for (int round = 0; round < 64; ++round) {
        double trunc;
        if (std::isinf(far_end)) {
            trunc = vanish_left ? terminus - dist : terminus + dist;
        } else {
            // finite open endpoint: halve the remaining gap toward it,
            // starting beyond the probe when one is requested
            double inner = probe ? *probe : terminus;
            trunc = far_end + (inner - far_end) * std::pow(0.5, round + 1);
        }
        EigenSolution cur = sol;
        auto rs = integrate_from_vanish(cur, trunc, terminus, dir);
        finish_solution(cur, rs);
        double logd = cur.dphi.empty() ? 0.0 : cur.log_derivative(eval_point);
        double pv = 0.0;
        if (probe) pv = cur.values(*probe).first;

        if (have_prev) {
            bool ok = std::fabs(logd - prev_logd) < 1e-9 * std::max(std::fabs(logd), 1e-12);
            if (ok && probe)
                ok = std::fabs(pv - prev_probe) < 1e-9 * std::max(std::fabs(pv), 1e-12);
            if (ok) return cur;
        }
        prev_logd = logd;
        prev_probe = pv;
        have_prev = true;
        dist *= 2.0;
    }
    raise(errc::numerical, kWhere,
          "truncation toward the open endpoint did not converge (lambda=" +
              std::to_string(lambda) + ")");
}

double limit_at_zero(const std::function<double(double)>& f, const char* where,
                     double lambda0, double rtol) {
    // Iterated Aitken acceleration over f(lambda0 / 2^k). Each pass removes
    // one power-law error term (lambda^p behaves geometrically under
    // halving), which covers the sqrt(lambda) + lambda mixtures that appear
    // in these exponents.
    constexpr int kMaxEvals = 28;
    constexpr int kMaxDepth = 3;
    std::vector<std::vector<double>> t(kMaxDepth + 1);
    double prev_best = std::numeric_limits<double>::quiet_NaN();

    for (int k = 0; k < kMaxEvals; ++k) {
        double v = f(lambda0 * std::pow(0.5, k));
        t[0].push_back(v);
        for (int j = 1; j <= kMaxDepth; ++j) {
            size_t m = t[j - 1].size();
            if (m < 3) break;
            double s0 = t[j - 1][m - 3], s1 = t[j - 1][m - 2], s2 = t[j - 1][m - 1];
            double denom = s2 - 2.0 * s1 + s0;
            double acc;
            double d2 = s2 - s1;
            if (std::fabs(denom) < 1e-14 * (std::fabs(s2) + std::fabs(s1) + std::fabs(s0)) ||
                denom == 0.0) {
                acc = s2;  // already flat at this depth
            } else {
                acc = s2 - d2 * d2 / denom;
            }
            t[j].push_back(acc);
        }
        // deepest column that has at least one entry
        double best = v;
        for (int j = kMaxDepth; j >= 1; --j) {
            if (!t[j].empty()) {
                best = t[j].back();
                break;
            }
        }
        if (k >= 3 && std::isfinite(prev_best) &&
            std::fabs(best - prev_best) < rtol * std::max(1.0, std::fabs(best)))
            return best;
        // plateau in the raw values: nothing left to extrapolate
        if (k >= 1 && std::fabs(t[0][k] - t[0][k - 1]) <
                          1e-13 * std::max(1.0, std::fabs(t[0][k])))
            return best;
        prev_best = best;
    }
    raise(errc::numerical, where, "lambda -> 0 extrapolation did not converge");
}

const char* to_string(PsiCase c) {
    switch (c) {
        case PsiCase::plus: return "plus";
        case PsiCase::minus: return "minus";
        case PsiCase::tilde_plus: return "tilde_plus";
        case PsiCase::tilde_minus: return "tilde_minus";
        case PsiCase::pair_up: return "pair_up";
        case PsiCase::pair_down: return "pair_down";
        case PsiCase::zero_plus: return "zero_plus";
        case PsiCase::zero_minus: return "zero_minus";
        case PsiCase::one_plus: return "one_plus";
        case PsiCase::one_minus: return "one_minus";
    }
    return "?";
}

PsiCase psi_case_from_string(const std::string& s) {
    for (PsiCase c : {PsiCase::plus, PsiCase::minus, PsiCase::tilde_plus, PsiCase::tilde_minus,
                      PsiCase::pair_up, PsiCase::pair_down, PsiCase::zero_plus,
                      PsiCase::zero_minus, PsiCase::one_plus, PsiCase::one_minus}) {
        if (s == to_string(c)) return c;
    }
    raise(errc::validation, "eigen.psi_case_from_string", "unknown case tag '" + s + "'");
}

PsiEngine::PsiEngine(const DiffusionSpec& spec, const LevelSet& levels)
    : spec_(&spec), levels_(&levels) {}

double PsiEngine::cached(int slot, int i, Dir d, const std::function<double()>& compute) const {
    auto key = std::make_tuple(slot, i, static_cast<int>(d));
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    double v = compute();
    std::lock_guard<std::mutex> lk(mu_);
    cache_.emplace(key, v);
    return v;
}

double PsiEngine::side(int i, Dir d, double lambda) const {
    const auto& L = *levels_;
    const int n = L.size();
    if (d == Dir::up) {
        if (i < 0 || i + 1 >= n)
            raise(errc::validation, "eigen.psi_side", "no level above index " + std::to_string(i));
        auto sol = solve_eigen(*spec_, lambda, L[i], L[i + 1], Direction::decreasing,
                               EigenBoundary::vanish_at_right, L[i]);
        return -0.5 * sol.log_derivative(L[i]);
    }
    if (i - 1 < 0 || i >= n)
        raise(errc::validation, "eigen.psi_side", "no level below index " + std::to_string(i));
    auto sol = solve_eigen(*spec_, lambda, L[i - 1], L[i], Direction::increasing,
                           EigenBoundary::vanish_at_left, L[i]);
    return +0.5 * sol.log_derivative(L[i]);
}

double PsiEngine::tilde(int i, Dir d, double lambda) const {
    const auto& L = *levels_;
    if (i < 0 || i >= L.size())
        raise(errc::validation, "eigen.psi_tilde", "level index out of range");
    if (d == Dir::up) {
        bool dirichlet = !spec_->hi_infinite() && spec_->hi_boundary == BoundaryKind::absorbing;
        auto sol = solve_eigen(*spec_, lambda, L[i], spec_->hi, Direction::decreasing,
                               dirichlet ? EigenBoundary::vanish_at_right
                                         : EigenBoundary::natural_at_infinite,
                               L[i]);
        return -0.5 * sol.log_derivative(L[i]);
    }
    bool dirichlet = !spec_->lo_infinite() && spec_->lo_boundary == BoundaryKind::absorbing;
    auto sol = solve_eigen(*spec_, lambda, spec_->lo, L[i], Direction::increasing,
                           dirichlet ? EigenBoundary::vanish_at_left
                                     : EigenBoundary::natural_at_infinite,
                           L[i]);
    return +0.5 * sol.log_derivative(L[i]);
}

double PsiEngine::pair(int i, Dir d, double lambda) const {
    if (lambda == 0.0) return pair_zero(i, d);
    if (d == Dir::up) return side(i, Dir::up, lambda) + tilde(i, Dir::down, lambda);
    return side(i, Dir::down, lambda) + tilde(i, Dir::up, lambda);
}

double PsiEngine::transform(int i, Dir d, double lambda) const {
    const auto& L = *levels_;
    const int n = L.size();
    if (d == Dir::up) {
        if (i + 1 >= n)
            raise(errc::validation, "eigen.hitting_transform", "no level above index " + std::to_string(i));
        bool dirichlet = !spec_->lo_infinite() && spec_->lo_boundary == BoundaryKind::absorbing;
        auto sol = solve_eigen(*spec_, lambda, spec_->lo, L[i + 1], Direction::increasing,
                               dirichlet ? EigenBoundary::vanish_at_left
                                         : EigenBoundary::natural_at_infinite,
                               L[i + 1], L[i]);
        return sol.values(L[i]).first;
    }
    if (i - 1 < 0)
        raise(errc::validation, "eigen.hitting_transform", "no level below index " + std::to_string(i));
    bool dirichlet = !spec_->hi_infinite() && spec_->hi_boundary == BoundaryKind::absorbing;
    auto sol = solve_eigen(*spec_, lambda, L[i - 1], spec_->hi, Direction::decreasing,
                           dirichlet ? EigenBoundary::vanish_at_right
                                     : EigenBoundary::natural_at_infinite,
                           L[i - 1], L[i]);
    return sol.values(L[i]).first;
}

double PsiEngine::side_zero(int i, Dir d) const {
    return cached(0, i, d, [&] {
        return limit_at_zero([&](double l) { return side(i, d, l); }, "eigen.psi_side");
    });
}

double PsiEngine::tilde_zero(int i, Dir d) const {
    return cached(1, i, d, [&] {
        return limit_at_zero([&](double l) { return tilde(i, d, l); }, "eigen.psi_tilde");
    });
}

double PsiEngine::pair_zero(int i, Dir d) const {
    return cached(2, i, d, [&] {
        if (d == Dir::up) return side_zero(i, Dir::up) + tilde_zero(i, Dir::down);
        return side_zero(i, Dir::down) + tilde_zero(i, Dir::up);
    });
}

double PsiEngine::transform_zero(int i, Dir d) const {
    return cached(3, i, d, [&] {
        return limit_at_zero([&](double l) { return transform(i, d, l); },
                             "eigen.hitting_transform");
    });
}

double PsiEngine::hitting_prob(int i, Dir d) const {
    return cached(4, i, d, [&] { return hitting_probability(*spec_, *levels_, i, d); });
}

double PsiEngine::one(int i, Dir d, double lambda) const {
    double p = transform_zero(i, d);
    double v = p * pair_zero(i, d) - transform(i, d, lambda) * pair(i, d, lambda);
    if (v < -1e-9)
        raise(errc::consistency, "eigen.psi_one",
              "negative exponent " + std::to_string(v) + " beyond tolerance at lambda=" +
                  std::to_string(lambda));
    return std::max(v, 0.0);
}

double PsiEngine::zero(int i, Dir d, double lambda) const {
    const int n = levels_->size();
    const bool extreme = (d == Dir::up) ? (i == n - 1) : (i == 0);
    if (extreme) return tilde(i, d, lambda);
    double v = side(i, d, lambda) - side_zero(i, d);
    if (v < -1e-9)
        raise(errc::consistency, "eigen.psi_zero",
              "negative exponent " + std::to_string(v) + " beyond tolerance at lambda=" +
                  std::to_string(lambda));
    return std::max(v, 0.0);
}

double PsiEngine::value(PsiCase c, int i, double lambda) const {
    switch (c) {
        case PsiCase::plus: return side(i, Dir::up, lambda);
        case PsiCase::minus: return side(i, Dir::down, lambda);
        case PsiCase::tilde_plus: return tilde(i, Dir::up, lambda);
        case PsiCase::tilde_minus: return tilde(i, Dir::down, lambda);
        case PsiCase::pair_up: return pair(i, Dir::up, lambda);
        case PsiCase::pair_down: return pair(i, Dir::down, lambda);
        case PsiCase::zero_plus: return zero(i, Dir::up, lambda);
        case PsiCase::zero_minus: return zero(i, Dir::down, lambda);
        case PsiCase::one_plus: return one(i, Dir::up, lambda);
        case PsiCase::one_minus: return one(i, Dir::down, lambda);
    }
    return 0.0;
}

double PsiEngine::value_at_zero(PsiCase c, int i) const {
    const int n = levels_->size();
    switch (c) {
        case PsiCase::plus: return side_zero(i, Dir::up);
        case PsiCase::minus: return side_zero(i, Dir::down);
        case PsiCase::tilde_plus: return tilde_zero(i, Dir::up);
        case PsiCase::tilde_minus: return tilde_zero(i, Dir::down);
        case PsiCase::pair_up: return pair_zero(i, Dir::up);
        case PsiCase::pair_down: return pair_zero(i, Dir::down);
        case PsiCase::zero_plus: return (i == n - 1) ? tilde_zero(i, Dir::up) : 0.0;
        case PsiCase::zero_minus: return (i == 0) ? tilde_zero(i, Dir::down) : 0.0;
        case PsiCase::one_plus: return 0.0;
        case PsiCase::one_minus: return 0.0;
    }
    return 0.0;
}

bool PsiEngine::case_valid(PsiCase c, int i) const {
    const int n = levels_->size();
    if (i < 0 || i >= n) return false;
    switch (c) {
        case PsiCase::plus:
        case PsiCase::pair_up:
        case PsiCase::one_plus: return i + 1 < n;
        case PsiCase::minus:
        case PsiCase::pair_down:
        case PsiCase::one_minus: return i >= 1;
        default: return true;
    }
}

double psi_side(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).side(i, d, lambda);
}
double psi_tilde(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).tilde(i, d, lambda);
}
double psi_pair(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).pair(i, d, lambda);
}
double psi_pair_zero(const DiffusionSpec& s, const LevelSet& l, int i, Dir d) {
    return PsiEngine(s, l).pair_zero(i, d);
}
double hitting_transform(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).transform(i, d, lambda);
}
double psi_one(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).one(i, d, lambda);
}
double psi_zero(const DiffusionSpec& s, const LevelSet& l, int i, Dir d, double lambda) {
    return PsiEngine(s, l).zero(i, d, lambda);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        raise(errc::validation, "eigen.log_spaced", "need 0 < lo < hi and n >= 2");
    std::vector<double> v(static_cast<size_t>(n));
    double llo = std::log(lo), lhi = std::log(hi);
    for (int k = 0; k < n; ++k)
        v[static_cast<size_t>(k)] = std::exp(llo + (lhi - llo) * k / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

ExponentTable build_exponent_table(const PsiEngine& eng, int i, PsiCase c,
                                   const std::vector<double>& lambdas) {
    ExponentTable t;
    t.level_index = i;
    t.tag = c;
    t.lambda = lambdas;
    t.psi.resize(lambdas.size());
    for (size_t k = 0; k < lambdas.size(); ++k) t.psi[k] = eng.value(c, i, lambdas[k]);
    t.psi_at_zero = eng.value_at_zero(c, i);
    return t;
}

}  // namespace levcross
