#include "levcross/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "levcross/errors.hpp"
#include "levcross/ode.hpp"

namespace levcross {

namespace {

// Probe points for coefficient validation: interior samples on a bounded
// window (finite endpoints approached but not touched).
std::vector<double> probe_points(double lo, double hi) {
    double wl = std::isinf(lo) ? -50.0 : lo;
    double wh = std::isinf(hi) ? 50.0 : hi;
    if (std::isinf(lo) && !std::isinf(hi)) wl = hi - 100.0;
    if (std::isinf(hi) && !std::isinf(lo)) wh = lo + 100.0;
    std::vector<double> pts;
    const int n = 33;
    for (int k = 1; k < n; ++k) {
        double t = static_cast<double>(k) / n;
        pts.push_back(wl + (wh - wl) * t);
    }
    return pts;
}

}  // namespace

DiffusionSpec DiffusionSpec::make(std::function<double(double)> a,
                                  std::function<double(double)> b,
                                  double lo, double hi,
                                  BoundaryKind lo_boundary, BoundaryKind hi_boundary) {
    if (!(lo < hi))
        raise(errc::validation, "diffusion_model.DiffusionSpec", "interval lo must be < hi");
    if (std::isinf(lo) && lo_boundary == BoundaryKind::absorbing)
        raise(errc::validation, "diffusion_model.DiffusionSpec",
              "infinite endpoint cannot be absorbing");
    if (std::isinf(hi) && hi_boundary == BoundaryKind::absorbing)
        raise(errc::validation, "diffusion_model.DiffusionSpec",
              "infinite endpoint cannot be absorbing");
    for (double x : probe_points(lo, hi)) {
        double av = a(x);
        if (!(av > 0.0) || !std::isfinite(av))
            raise(errc::validation, "diffusion_model.DiffusionSpec",
                  "a(x) must be strictly positive and finite; a(" + std::to_string(x) +
                      ") = " + std::to_string(av));
        double bv = b(x);
        if (!std::isfinite(bv))
            raise(errc::validation, "diffusion_model.DiffusionSpec",
                  "b(x) must be finite; b(" + std::to_string(x) + ") = " + std::to_string(bv));
    }
    DiffusionSpec s;
    s.a = std::move(a);
    s.b = std::move(b);
    s.lo = lo;
    s.hi = hi;
    s.lo_boundary = lo_boundary;
    s.hi_boundary = hi_boundary;
    return s;
}

LevelSet LevelSet::make(std::vector<double> levels, const DiffusionSpec& spec) {
    if (levels.empty())
        raise(errc::validation, "diffusion_model.LevelSet", "need at least one level");
    for (size_t k = 0; k < levels.size(); ++k) {
        if (!spec.contains_interior(levels[k]))
            raise(errc::validation, "diffusion_model.LevelSet",
                  "level " + std::to_string(levels[k]) + " is not strictly inside the state interval");
        if (k > 0 && !(levels[k - 1] < levels[k]))
            raise(errc::validation, "diffusion_model.LevelSet",
                  "levels must be strictly increasing");
    }
    LevelSet ls;
    ls.levels = std::move(levels);
    return ls;
}

int region_of(const LevelSet& levels, double x) {
    // R_k = (x_{k-1}, x_k]; first level with x <= x_k.
    const auto& v = levels.levels;
    auto it = std::lower_bound(v.begin(), v.end(), x);
    return static_cast<int>(it - v.begin());
}

namespace {

// Integrates ds = exp(-g), dg = 2 b / a from x0 to x. The visitor-style cap
// lets hitting_probability detect unbounded scale without overflowing.
struct ScaleResult {
    double value;
    bool capped;
};

ScaleResult scale_capped(const DiffusionSpec& spec, double x0, double x, double cap) {
    if (x == x0) return {0.0, false};
    auto f = [&spec](double xx, const double y[2], double dy[2]) {
        double g = y[1];
        // exp(-g) can overflow for strongly inward drift far out; saturate so
        // the state stays finite until the cap check fires.
        double e = (g < -700.0) ? std::exp(700.0) : std::exp(-g);
        dy[0] = e;
        dy[1] = 2.0 * spec.b(xx) / spec.a(xx);
    };
    ode::Options opt;
    opt.rel_tol = 1e-11;
    opt.store = false;
    // Chunked so runaway scale growth is caught at the cap instead of
    // overflowing mid-integration.
    const int chunks = 64;
    double s = 0.0, g = 0.0;
    for (int c = 0; c < chunks; ++c) {
        double xa = x0 + (x - x0) * c / chunks;
        double xb = x0 + (x - x0) * (c + 1) / chunks;
        auto tr = ode::integrate(f, xa, xb, s, g, opt, "diffusion_model.scale_function");
        s = tr.pts.back().y0;
        g = tr.pts.back().y1;
        if (!std::isfinite(s))
            raise(errc::numerical, "diffusion_model.scale_function",
                  "scale integral did not stay finite");
        if (std::fabs(s) > cap) return {s, true};
    }
    return {s, false};
}

}  // namespace

double scale_function(const DiffusionSpec& spec, double x0, double x) {
    auto r = scale_capped(spec, x0, x, std::numeric_limits<double>::infinity());
    return r.value;
}

double hitting_probability(const DiffusionSpec& spec, const LevelSet& levels, int i, Dir dir) {
    const int n = levels.size();
    if (i < 0 || i >= n)
        raise(errc::validation, "diffusion_model.hitting_probability", "level index out of range");
    if (dir == Dir::up && i + 1 >= n)
        raise(errc::validation, "diffusion_model.hitting_probability",
              "no level above index " + std::to_string(i));
    if (dir == Dir::down && i - 1 < 0)
        raise(errc::validation, "diffusion_model.hitting_probability",
              "no level below index " + std::to_string(i));

    const double xi = levels[i];
    const double target = (dir == Dir::up) ? levels[i + 1] : levels[i - 1];
    const double s_target = scale_function(spec, xi, target);
    const double gap = std::fabs(s_target);
    const double unbounded_cap = 1e8 * std::max(gap, 1.0);

    // Far boundary: below x_i when aiming up, above when aiming down.
    const double far = (dir == Dir::up) ? spec.lo : spec.hi;
    const BoundaryKind far_kind = (dir == Dir::up) ? spec.lo_boundary : spec.hi_boundary;

    auto two_barrier = [&](double s_far) {
        // P(hit target before far barrier) with s(x_i) = 0.
        double p = (0.0 - s_far) / (s_target - s_far);
        return std::clamp(p, 0.0, 1.0);
    };

    if (!std::isinf(far) && far_kind == BoundaryKind::absorbing) {
        auto r = scale_capped(spec, xi, far, unbounded_cap);
        if (r.capped) return 1.0;
        return two_barrier(r.value);
    }

    // Open or infinite far endpoint: truncation sequence toward it, doubling
    // the distance (infinite case) or halving the remaining gap (finite open
    // case), stopping on relative change < 1e-8.
    double prev = -1.0;
    double step = std::max(1.0, std::fabs(target - xi));
    for (int k = 0; k < 200; ++k) {
        double ell;
        if (std::isinf(far)) {
            ell = (dir == Dir::up) ? xi - step : xi + step;
            step *= 2.0;
        } else {
            // Finite open endpoint: halve the remaining gap each round.
            ell = far + (xi - far) * std::pow(0.5, k + 1);
        }
        auto r = scale_capped(spec, xi, ell, unbounded_cap);
        if (r.capped) return 1.0;
        double p = two_barrier(r.value);
        if (prev >= 0.0 && std::fabs(p - prev) < 1e-8 * std::max(p, 1e-12)) return p;
        prev = p;
    }
    raise(errc::numerical, "diffusion_model.hitting_probability",
          "truncation sequence toward the far boundary did not converge");
}

}  // namespace levcross
