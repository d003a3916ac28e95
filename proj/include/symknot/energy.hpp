#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "symknot/closed_curve.hpp"
#include "symknot/errors.hpp"
#include "symknot/parallel.hpp"

namespace symknot {

// Exponent and quadrature controls for the repulsive energy.
//
// alpha may be 2 only for circle_energy_oracle (literature cross-checks);
// the discrete energy, its gradient, and the optimizer require alpha in (2,3).
struct EnergyParams {
    double alpha = 2.5;
    std::size_t neighbor_exclusion = 1;
    std::size_t oracle_quad_points = 4096;

    EnergyParams() = default;
    EnergyParams(double a, std::size_t exclusion = 1, std::size_t quad_points = 4096)
        : alpha(a), neighbor_exclusion(exclusion), oracle_quad_points(quad_points) {
        if (!(alpha >= 2.0 && alpha < 3.0)) {
            throw validation_error("EnergyParams: alpha must lie in [2,3), got " + std::to_string(alpha));
        }
        if (neighbor_exclusion < 1) {
            throw validation_error("EnergyParams: neighbor_exclusion must be >= 1");
        }
        if (oracle_quad_points < 16) {
            throw validation_error("EnergyParams: oracle_quad_points must be >= 16");
        }
    }

    void require_strict_alpha() const {
        if (!(alpha > 2.0 && alpha < 3.0)) {
            throw validation_error("alpha = 2 is admitted only by the circle oracle; "
                                   "energies and gradients require alpha in (2,3)");
        }
    }
};

struct GradientField {
    std::vector<Vec3> d_scaled;  // dS/dx_i
    std::vector<Vec3> d_energy;  // dE/dx_i
    double scaled_value = 0.0;   // S_alpha
    double energy_value = 0.0;   // E_alpha
    double length = 0.0;         // L
};

namespace detail {

// Derived per-curve quantities for the energy quadrature.
//
// The discrete sum treats the samples as a quadrature of the underlying
// smooth curve, not as a polygon in its own right (a polygon with corners has
// infinite energy for alpha >= 2). Two curvature-based corrections make the
// quadrature converge at a useful rate:
//   * arc lengths between samples use edge lengths inflated by the circular
//     sagitta defect, ell * (1 + kappa^2 ell^2 / 24), which estimates the
//     smooth arc a chord of length ell subtends;
//   * the excluded near-diagonal window |w| < (exclusion + 1/2) h contributes
//     its leading Taylor mass alpha*kappa^2/24 * |w|^(2-alpha) per unit
//     length, accumulated in closed form per vertex.
// Both corrections are exactly scale- and isometry-covariant, keep every
// term nonnegative (corrected arc >= polyline arc >= chord), and are
// differentiated exactly in energy_gradient.
struct QuadTables {
    std::size_t n = 0;
    std::vector<double> ell;      // plain edge lengths
    std::vector<double> theta;    // turning angle at each vertex
    std::vector<double> w;        // vertex weights (ell_{i-1}+ell_i)/2
    std::vector<double> kv;       // vertex curvature theta/w
    std::vector<double> ke;       // edge curvature, endpoint average
    std::vector<double> ell_c;    // sagitta-corrected edge lengths
    std::vector<double> cum_c;    // cumulative corrected lengths, n+1 entries
    double length_c = 0.0;        // corrected total
    double length = 0.0;          // polyline total
};

inline QuadTables build_quad_tables(const ClosedCurve& curve) {
    QuadTables t;
    const std::size_t n = curve.size();
    t.n = n;
    t.ell.resize(n);
    t.theta.resize(n);
    t.w.resize(n);
    t.kv.resize(n);
    t.ke.resize(n);
    t.ell_c.resize(n);
    t.cum_c.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) t.ell[i] = curve.edge_length(i);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 a = curve.edge((i + n - 1) % n);
        const Vec3 b = curve.edge(i);
        t.theta[i] = std::atan2(a.cross(b).norm(), a.dot(b));
        t.w[i] = 0.5 * (t.ell[(i + n - 1) % n] + t.ell[i]);
        t.kv[i] = t.theta[i] / t.w[i];
    }
    t.cum_c[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        t.ke[k] = 0.5 * (t.kv[k] + t.kv[(k + 1) % n]);
        const double l = t.ell[k];
        t.ell_c[k] = l * (1.0 + t.ke[k] * t.ke[k] * l * l / 24.0);
        t.cum_c[k + 1] = t.cum_c[k] + t.ell_c[k];
    }
    t.length_c = t.cum_c[n];
    t.length = curve.length();
    return t;
}

// Corrected arc length walking forward from sample i over sep edges.
inline double arc_forward_c(const QuadTables& t, std::size_t i, std::size_t sep) {
    const std::size_t j = i + sep;
    if (j <= t.n) return t.cum_c[j] - t.cum_c[i];
    return t.length_c - t.cum_c[i] + t.cum_c[j - t.n];
}

inline double near_field_constant(double alpha, std::size_t exclusion) {
    const double cut = static_cast<double>(exclusion) + 0.5;
    return alpha * std::pow(cut, 3.0 - alpha) / (12.0 * (3.0 - alpha));
}

[[noreturn]] inline void throw_coincident(std::size_t i, std::size_t j) {
    throw numerical_error("energy: coincident non-adjacent samples " + std::to_string(i) + " and " +
                          std::to_string(j) + " (singular configuration)");
}

// Enumeration of unordered sample pairs with circular separation > exclusion:
// rows i in [0,n) with sep in [exclusion+1, n/2]; for even n the antipodal
// separation n/2 is restricted to i < n/2 so each pair appears exactly once.
inline std::size_t max_separation(std::size_t n) { return n / 2; }

inline bool row_owns_pair(std::size_t n, std::size_t i, std::size_t sep) {
    return 2 * sep != n || i < n / 2;
}

}  // namespace detail

// Discrete repulsive energy E_alpha: double sum over ordered sample pairs
// with circular separation > neighbor_exclusion of
//   [ |x_i - x_j|^(-alpha) - D(i,j)^(-alpha) ] * w_i * w_j
// plus the near-diagonal curvature term, with D the corrected arc distance.
// Nonnegative; scales exactly as lambda^(2-alpha).
inline double ohara_energy(const ClosedCurve& curve, const EnergyParams& params) {
    params.require_strict_alpha();
    const std::size_t n = curve.size();
    const std::size_t excl = params.neighbor_exclusion;
    const auto t = detail::build_quad_tables(curve);
    const double alpha = params.alpha;
    const std::size_t sep_max = detail::max_separation(n);

    // Coincidence inside the excluded window is a singular configuration the
    // pair loop below would silently skip.
    for (std::size_t sep = 2; sep <= excl && sep <= sep_max; ++sep) {
        for (std::size_t i = 0; i < n; ++i) {
            if ((curve.points()[i] - curve.points()[(i + sep) % n]).squaredNorm() == 0.0) {
                detail::throw_coincident(i, (i + sep) % n);
            }
        }
    }

    const auto& pts = curve.points();
    double pair_sum = 0.0;
    if (excl + 1 <= sep_max) {
        pair_sum = parallel_sum(n, [&](std::size_t i) {
            double acc = 0.0;
            for (std::size_t sep = excl + 1; sep <= sep_max; ++sep) {
                if (!detail::row_owns_pair(n, i, sep)) continue;
                const std::size_t j = (i + sep) % n;
                const double r2 = (pts[i] - pts[j]).squaredNorm();
                if (r2 == 0.0) detail::throw_coincident(i, j);
                const double fwd = detail::arc_forward_c(t, i, sep);
                const double d = std::min(fwd, t.length_c - fwd);
                const double k = std::pow(r2, -0.5 * alpha) - std::pow(d, -alpha);
                acc += 2.0 * k * t.w[i] * t.w[j];
            }
            return acc;
        });
    }

    const double c_near = detail::near_field_constant(alpha, excl);
    double near = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        near += c_near * t.theta[i] * t.theta[i] * std::pow(t.w[i], 2.0 - alpha);
    }
    return pair_sum + near;
}

// Scale-invariant energy S_alpha = L^(alpha-2) * E_alpha.
inline double scaled_energy(const ClosedCurve& curve, const EnergyParams& params) {
    return std::pow(curve.length(), params.alpha - 2.0) * ohara_energy(curve, params);
}

// Exact derivative of the discrete energy with respect to every sample
// position, including the dependence through weights, turning angles,
// corrected arc lengths and the total length.
inline GradientField energy_gradient(const ClosedCurve& curve, const EnergyParams& params) {
    params.require_strict_alpha();
    const std::size_t n = curve.size();
    const std::size_t excl = params.neighbor_exclusion;
    const double alpha = params.alpha;
    const auto t = detail::build_quad_tables(curve);
    const std::size_t sep_max = detail::max_separation(n);
    const auto& pts = curve.points();

    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    struct ChunkAcc {
        double energy = 0.0;
        std::vector<Vec3> grad;    // chord-term contributions
        std::vector<double> diff;  // range-add buffer for dE/d ell_c
        std::vector<double> a;     // pair-kernel sums per vertex
    };
    std::vector<ChunkAcc> acc(n_chunks);

    if (excl + 1 <= sep_max) {
        parallel_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
            ChunkAcc& ch = acc[c];
            ch.grad.assign(n, Vec3::Zero());
            ch.diff.assign(n + 1, 0.0);
            ch.a.assign(n, 0.0);
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t sep = excl + 1; sep <= sep_max; ++sep) {
                    if (!detail::row_owns_pair(n, i, sep)) continue;
                    const std::size_t j = (i + sep) % n;
                    const Vec3 dx = pts[i] - pts[j];
                    const double r2 = dx.squaredNorm();
                    if (r2 == 0.0) detail::throw_coincident(i, j);
                    const double fwd = detail::arc_forward_c(t, i, sep);
                    const double bwd = t.length_c - fwd;
                    const bool use_fwd = fwd <= bwd;  // tie resolved forward
                    const double d = use_fwd ? fwd : bwd;
                    const double r_pow = std::pow(r2, -0.5 * alpha);
                    const double d_pow = std::pow(d, -alpha);
                    const double ww = t.w[i] * t.w[j];
                    ch.energy += 2.0 * (r_pow - d_pow) * ww;

                    // chord channel: d(2 ww r^-alpha) = -2 alpha ww r^(-alpha-2) dx
                    const Vec3 g = (-2.0 * alpha * ww * r_pow / r2) * dx;
                    ch.grad[i] += g;
                    ch.grad[j] -= g;

                    // arc channel: d(-2 ww d^-alpha)/dd = 2 alpha ww d^(-alpha-1),
                    // spread over every corrected edge of the realized branch.
                    const double cd = 2.0 * alpha * ww * d_pow / d;
                    if (use_fwd) {
                        if (i + sep <= n) {
                            ch.diff[i] += cd;
                            ch.diff[i + sep] -= cd;
                        } else {
                            ch.diff[i] += cd;
                            ch.diff[n] -= cd;
                            ch.diff[0] += cd;
                            ch.diff[i + sep - n] -= cd;
                        }
                    } else {
                        if (i + sep <= n) {
                            ch.diff[0] += cd;
                            ch.diff[i] -= cd;
                            ch.diff[i + sep] += cd;
                            ch.diff[n] -= cd;
                        } else {
                            ch.diff[i + sep - n] += cd;
                            ch.diff[i] -= cd;
                        }
                    }

                    // weight channel (dE/dw_m = 2 A_m over ordered pairs)
                    const double kern = r_pow - d_pow;
                    ch.a[i] += kern * t.w[j];
                    ch.a[j] += kern * t.w[i];
                }
            }
        });
    }

    double energy = 0.0;
    std::vector<Vec3> grad(n, Vec3::Zero());
    std::vector<double> d_ell_c(n + 1, 0.0);
    std::vector<double> d_w(n, 0.0);
    for (const ChunkAcc& ch : acc) {
        energy += ch.energy;
        if (ch.grad.empty()) continue;
        for (std::size_t i = 0; i < n; ++i) grad[i] += ch.grad[i];
        for (std::size_t i = 0; i <= n; ++i) d_ell_c[i] += ch.diff[i];
        for (std::size_t i = 0; i < n; ++i) d_w[i] += 2.0 * ch.a[i];
    }
    // prefix sum turns the range adds into per-edge sensitivities
    for (std::size_t k = 1; k < n; ++k) d_ell_c[k] += d_ell_c[k - 1];

    // near-field term: c_near * theta_i^2 * w_i^(2-alpha)
    const double c_near = detail::near_field_constant(alpha, excl);
    std::vector<double> d_theta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double wp = std::pow(t.w[i], 2.0 - alpha);
        energy += c_near * t.theta[i] * t.theta[i] * wp;
        d_theta[i] += 2.0 * c_near * t.theta[i] * wp;
        d_w[i] += (2.0 - alpha) * c_near * t.theta[i] * t.theta[i] * wp / t.w[i];
    }

    // corrected edge lengths: ell_c = ell (1 + ke^2 ell^2 / 24)
    std::vector<double> d_ell(n, 0.0);
    std::vector<double> d_kv(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double l = t.ell[k];
        const double ke = t.ke[k];
        d_ell[k] += d_ell_c[k] * (1.0 + 3.0 * ke * ke * l * l / 24.0);
        const double d_ke = d_ell_c[k] * (l * l * l / 12.0) * ke;
        d_kv[k] += 0.5 * d_ke;
        d_kv[(k + 1) % n] += 0.5 * d_ke;
    }
    // vertex curvature kv = theta / w
    for (std::size_t i = 0; i < n; ++i) {
        d_theta[i] += d_kv[i] / t.w[i];
        d_w[i] -= d_kv[i] * t.theta[i] / (t.w[i] * t.w[i]);
    }
    // vertex weights w_i = (ell_{i-1} + ell_i)/2
    for (std::size_t k = 0; k < n; ++k) {
        d_ell[k] += 0.5 * (d_w[k] + d_w[(k + 1) % n]);
    }

    // assemble: edge-length channel
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 u = curve.edge(k) / t.ell[k];
        grad[(k + 1) % n] += d_ell[k] * u;
        grad[k] -= d_ell[k] * u;
    }
    // turning-angle channel
    for (std::size_t i = 0; i < n; ++i) {
        if (d_theta[i] == 0.0) continue;
        const std::size_t km = (i + n - 1) % n;
        const Vec3 a = curve.edge(km);
        const Vec3 b = curve.edge(i);
        const double la = t.ell[km];
        const double lb = t.ell[i];
        const double th = t.theta[i];
        const double sin_th = std::sin(th);
        if (sin_th < 1e-14) continue;  // straight vertex: subgradient choice 0
        const Vec3 ahat = a / la;
        const Vec3 bhat = b / lb;
        const double cos_th = std::cos(th);
        const Vec3 na = (cos_th * ahat - bhat) / sin_th;
        const Vec3 nb = (cos_th * bhat - ahat) / sin_th;
        grad[(i + n - 1) % n] -= d_theta[i] * na / la;
        grad[i] += d_theta[i] * (na / la - nb / lb);
        grad[(i + 1) % n] += d_theta[i] * nb / lb;
    }

    GradientField out;
    out.energy_value = energy;
    out.length = t.length;
    const double l_pow = std::pow(t.length, alpha - 2.0);
    out.scaled_value = l_pow * energy;
    out.d_energy = std::move(grad);
    out.d_scaled.resize(n);
    const double l_term = (alpha - 2.0) * std::pow(t.length, alpha - 3.0) * energy;
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t pm = (p + n - 1) % n;
        const Vec3 dl = curve.edge(pm) / t.ell[pm] - curve.edge(p) / t.ell[p];
        out.d_scaled[p] = l_pow * out.d_energy[p] + l_term * dl;
    }
    return out;
}

// Energy of the smooth circle of length 1 via the one-dimensional reduction
//   E_alpha = int_{-1/2}^{1/2} [ (sin(pi|w|)/pi)^(-alpha) - |w|^(-alpha) ] dw,
// evaluated by a composite midpoint rule on a singularity-absorbing graded
// substitution, panel-doubling until successive estimates agree to 1e-8
// relative, with one Richardson step on the finest pair.
inline double circle_energy_oracle(const EnergyParams& params) {
    const double alpha = params.alpha;

    // integrand in log space; stable down to w values far below double range
    const auto f = [alpha](double w) {
        const double x = M_PI * w;
        double g;  // sin(x)/x - 1
        if (x < 1e-4) {
            const double x2 = x * x;
            g = -x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
        } else {
            g = std::sin(x) / x - 1.0;
        }
        const double tpos = std::expm1(-alpha * std::log1p(g));  // > 0
        return std::exp(std::log(tpos) - alpha * std::log(w));
    };

    // w = (1/2) u^grade maps [0,1] onto [0,1/2]; the transformed integrand
    // behaves like u^(grade(3-alpha)-1) at zero.
    const double grade = std::min(40.0, std::max(8.0, 8.0 / (3.0 - alpha)));
    const auto transformed = [&](double u) {
        const double w = 0.5 * std::pow(u, grade);
        return f(w) * 0.5 * grade * std::pow(u, grade - 1.0);
    };
    const auto midpoint = [&](std::size_t panels) {
        const double h = 1.0 / static_cast<double>(panels);
        const double sum = parallel_sum(panels, [&](std::size_t k) {
            return transformed((static_cast<double>(k) + 0.5) * h);
        });
        return 2.0 * sum * h;  // both signs of w
    };

    std::size_t panels = std::max<std::size_t>(64, params.oracle_quad_points);
    double prev = midpoint(panels);
    for (int iter = 0; iter < 16; ++iter) {
        panels *= 2;
        const double cur = midpoint(panels);
        if (std::fabs(cur - prev) <= 1e-8 * std::fabs(cur)) {
            return (4.0 * cur - prev) / 3.0;
        }
        prev = cur;
    }
    throw numerical_error("circle_energy_oracle: refinement budget exhausted before 1e-8 agreement");
}

// Explicit self-avoidance constant: a curve with E_alpha <= b satisfies
// chord >= C * arc with C = min(1/4, e^(-b/(1-(2/3)^alpha)) / 16).
inline double apriori_bilip_bound(double energy_bound, const EnergyParams& params) {
    if (energy_bound < 0.0) {
        throw validation_error("apriori_bilip_bound: energy bound must be nonnegative");
    }
    const double denom = 1.0 - std::pow(2.0 / 3.0, params.alpha);
    const double c = std::exp(-energy_bound / denom) / 16.0;
    return std::min(0.25, c);
}

struct SeminormEnergyReport {
    double seminorm_sq = 0.0;   // [T]^2 at s = (alpha-1)/2
    double energy_bound = 0.0;  // 4^3 2^(2-2alpha) E_alpha
    double slack = 0.05;
    bool pass = false;
};

// Checks the tangent-seminorm bound [T]^2_{(alpha-1)/2,2} <= 4^3 2^(2-2alpha) E_alpha
// on an arclength-uniform curve, with multiplicative slack for quadrature error.
inline SeminormEnergyReport seminorm_energy_check(const ClosedCurve& curve, const EnergyParams& params,
                                                  double slack = 0.05) {
    params.require_strict_alpha();
    const double s = 0.5 * (params.alpha - 1.0);
    const double seminorm = sobolev_seminorm(curve, s);
    SeminormEnergyReport rep;
    rep.seminorm_sq = seminorm * seminorm;
    rep.energy_bound = 64.0 * std::pow(2.0, 2.0 - 2.0 * params.alpha) * ohara_energy(curve, params);
    rep.slack = slack;
    rep.pass = rep.seminorm_sq <= rep.energy_bound * (1.0 + slack);
    return rep;
}

}  // namespace symknot
