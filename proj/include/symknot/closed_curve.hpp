#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "symknot/errors.hpp"
#include "symknot/parallel.hpp"

namespace symknot {

using Vec3 = Eigen::Vector3d;

// A closed polygonal curve in R^3. Sample i carries parameter t_i = i/N and
// index arithmetic wraps modulo N; edge i joins point i to point i+1.
// Immutable after construction; every derived table is precomputed so all
// queries are safe from concurrent threads.
class ClosedCurve {
public:
    explicit ClosedCurve(std::vector<Vec3> points) : pts_(std::move(points)) {
        const std::size_t n = pts_.size();
        if (n < 4) {
            throw validation_error("ClosedCurve: need at least 4 points, got " + std::to_string(n));
        }
        edge_len_.resize(n);
        cum_.resize(n + 1);
        cum_[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 e = pts_[(i + 1) % n] - pts_[i];
            const double len = e.norm();
            if (!(len > 0.0)) {
                throw validation_error("ClosedCurve: degenerate edge at index " + std::to_string(i) +
                                       " (repeated consecutive points)");
            }
            edge_len_[i] = len;
            cum_[i + 1] = cum_[i] + len;
        }
        length_ = cum_[n];
        diameter_ = compute_diameter();
    }

    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec3>& points() const { return pts_; }

    // Point with wrapped index (any integer).
    const Vec3& point(std::ptrdiff_t i) const { return pts_[wrap(i)]; }

    std::size_t wrap(std::ptrdiff_t i) const {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pts_.size());
        std::ptrdiff_t r = i % n;
        if (r < 0) r += n;
        return static_cast<std::size_t>(r);
    }

    double length() const { return length_; }
    double diameter() const { return diameter_; }
    double edge_length(std::size_t i) const { return edge_len_[i % pts_.size()]; }

    Vec3 edge(std::size_t i) const {
        const std::size_t n = pts_.size();
        return pts_[(i + 1) % n] - pts_[i % n];
    }

    Vec3 edge_tangent(std::size_t i) const { return edge(i) / edge_length(i); }

    // Trapezoid sample weight, the arclength share of vertex i.
    double weight(std::size_t i) const {
        const std::size_t n = pts_.size();
        return 0.5 * (edge_len_[(i + n - 1) % n] + edge_len_[i % n]);
    }

    // Arclength from point 0 to point i along the polyline.
    double cumulative(std::size_t i) const { return cum_[i]; }

    // Polyline arclength walking forward from sample i to sample j.
    double arc_forward(std::size_t i, std::size_t j) const {
        const double a = cum_[j] - cum_[i];
        return a >= 0.0 ? a : a + length_;
    }

    double min_edge() const {
        double m = edge_len_[0];
        for (double l : edge_len_) m = std::min(m, l);
        return m;
    }

    double max_edge() const {
        double m = edge_len_[0];
        for (double l : edge_len_) m = std::max(m, l);
        return m;
    }

    // Relative spread of the edge lengths; zero for perfectly uniform sampling.
    double edge_spread() const {
        const double mean = length_ / static_cast<double>(pts_.size());
        return (max_edge() - min_edge()) / mean;
    }

    Vec3 centroid() const {
        Vec3 c = Vec3::Zero();
        for (const Vec3& p : pts_) c += p;
        return c / static_cast<double>(pts_.size());
    }

private:
    double compute_diameter() const {
        const std::size_t n = pts_.size();
        const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
        std::vector<double> partial(n_chunks, 0.0);
        parallel_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
            double best = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    best = std::max(best, (pts_[i] - pts_[j]).squaredNorm());
                }
            }
            partial[c] = best;
        });
        double best = 0.0;
        for (double p : partial) best = std::max(best, p);
        return std::sqrt(best);
    }

    std::vector<Vec3> pts_;
    std::vector<double> edge_len_;
    std::vector<double> cum_;
    double length_ = 0.0;
    double diameter_ = 0.0;
};

struct CurveStats {
    double length = 0.0;
    double min_edge = 0.0;
    double max_edge = 0.0;
    double bilip_ratio = 0.0;
    double diameter = 0.0;
};

inline double polyline_length(const ClosedCurve& curve) { return curve.length(); }

// Length of the shorter arc between samples i and j; at most L/2.
inline double intrinsic_distance(const ClosedCurve& curve, std::size_t i, std::size_t j) {
    const std::size_t n = curve.size();
    if (i >= n || j >= n) {
        throw validation_error("intrinsic_distance: index out of range (" + std::to_string(i) + ", " +
                               std::to_string(j) + ") for n=" + std::to_string(n));
    }
    const double arc = std::fabs(curve.cumulative(j) - curve.cumulative(i));
    return std::min(arc, curve.length() - arc);
}

// Places n_out points at equal arclength spacing along the polyline, starting
// at input point 0 and interpolating linearly within edges.
inline ClosedCurve arclength_resample(const ClosedCurve& curve, std::size_t n_out) {
    if (n_out < 4) {
        throw validation_error("arclength_resample: n_out must be >= 4, got " + std::to_string(n_out));
    }
    const std::size_t n = curve.size();
    const double step = curve.length() / static_cast<double>(n_out);
    std::vector<Vec3> out;
    out.reserve(n_out);
    std::size_t edge = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double target = step * static_cast<double>(k);
        while (edge + 1 < n && curve.cumulative(edge + 1) <= target) ++edge;
        const double local = target - curve.cumulative(edge);
        const double frac = local / curve.edge_length(edge);
        out.push_back(curve.point(static_cast<std::ptrdiff_t>(edge)) + frac * curve.edge(edge));
    }
    return ClosedCurve(std::move(out));
}

// Minimum over sample pairs of chord length / intrinsic distance, in (0, 1]
// for embedded curves. 0 flags coincident distinct samples, i.e. a
// self-intersection at sample resolution.
inline double bilipschitz_ratio(const ClosedCurve& curve) {
    const std::size_t n = curve.size();
    const double total = curve.length();
    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(n_chunks, std::numeric_limits<double>::infinity());
    parallel_chunks(n, [&](std::size_t c, std::size_t begin, std::size_t end) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = begin; i < end; ++i) {
            const double ci = curve.cumulative(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                const double arc_raw = curve.cumulative(j) - ci;
                const double arc = std::min(arc_raw, total - arc_raw);
                const double chord = (curve.points()[i] - curve.points()[j]).norm();
                best = std::min(best, chord / arc);
            }
        }
        partial[c] = best;
    });
    double best = std::numeric_limits<double>::infinity();
    for (double p : partial) best = std::min(best, p);
    return best;
}

inline CurveStats curve_stats(const ClosedCurve& curve) {
    CurveStats s;
    s.length = curve.length();
    s.min_edge = curve.min_edge();
    s.max_edge = curve.max_edge();
    s.bilip_ratio = bilipschitz_ratio(curve);
    s.diameter = curve.diameter();
    return s;
}

// Gagliardo seminorm of the discrete unit tangent field for integrability 2:
// sqrt of sum over (i, w != 0), -N/2 < w <= N/2, of
// |T(i+w) - T(i)|^2 / |w h|^(1+2s) * h^2 with h = L/N. Tangents live at edge
// midpoints, so the curve must be close to arclength-uniform.
inline double sobolev_seminorm(const ClosedCurve& curve, double s_exponent) {
    if (!(s_exponent > 0.0 && s_exponent < 1.0)) {
        throw validation_error("sobolev_seminorm: s must lie in (0,1)");
    }
    if (curve.edge_spread() > 0.01) {
        throw validation_error(
            "sobolev_seminorm: sampling is not arclength-uniform (edge spread > 1%); "
            "apply arclength_resample first");
    }
    const std::size_t n = curve.size();
    const double h = curve.length() / static_cast<double>(n);
    const double p = 1.0 + 2.0 * s_exponent;

    std::vector<Vec3> tang(n);
    for (std::size_t i = 0; i < n; ++i) tang[i] = curve.edge_tangent(i);

    // |w| runs over 1 .. N/2; both signs contribute except w = N/2 for even N,
    // which the domain (-N/2, N/2] contains once.
    const std::size_t w_max = n / 2;
    std::vector<double> kernel(w_max + 1, 0.0);
    for (std::size_t w = 1; w <= w_max; ++w) {
        const double both = (2 * w == n) ? 1.0 : 2.0;
        kernel[w] = both / std::pow(static_cast<double>(w) * h, p);
    }

    const double sum = parallel_sum(n, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t w = 1; w <= w_max; ++w) {
            const std::size_t j = (i + w) % n;
            acc += (tang[j] - tang[i]).squaredNorm() * kernel[w];
        }
        return acc;
    });
    return std::sqrt(sum * h * h);
}

// Uniform scaling about the origin.
inline ClosedCurve scale_curve(const ClosedCurve& curve, double factor) {
    if (!(factor > 0.0)) throw validation_error("scale_curve: factor must be positive");
    std::vector<Vec3> pts = curve.points();
    for (Vec3& p : pts) p *= factor;
    return ClosedCurve(std::move(pts));
}

inline ClosedCurve translate_curve(const ClosedCurve& curve, const Vec3& offset) {
    std::vector<Vec3> pts = curve.points();
    for (Vec3& p : pts) p += offset;
    return ClosedCurve(std::move(pts));
}

// Relabels samples so that output point i is input point i + shift.
inline ClosedCurve shift_start_index(const ClosedCurve& curve, std::ptrdiff_t shift) {
    const std::size_t n = curve.size();
    std::vector<Vec3> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = curve.point(static_cast<std::ptrdiff_t>(i) + shift);
    }
    return ClosedCurve(std::move(pts));
}

// Reverses the traversal direction, keeping point 0 fixed.
inline ClosedCurve reverse_curve(const ClosedCurve& curve) {
    const std::size_t n = curve.size();
    std::vector<Vec3> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = curve.point(-static_cast<std::ptrdiff_t>(i));
    }
    return ClosedCurve(std::move(pts));
}

}  // namespace symknot
