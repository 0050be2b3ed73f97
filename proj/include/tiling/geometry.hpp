#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tiling/mesh.hpp"
#include "tiling/vec.hpp"

namespace tiling {

/// Default antiparallel tolerance for degenerate-pair detection (radians).
/// Generated patterns are antiparallel to ~1e-15; file-loaded polylines may
/// carry coarser noise. Overridable per call and via TILING_ANGLE_TOL in the
/// CLI.
constexpr double kDefaultAngleTol = 1e-7;

/// Threshold separating discretization kinks from genuine corners inside
/// discrete_turning (radians).
constexpr double kDefaultCornerThreshold = 1e-4;

struct PairClassification {
    NodeId node = kInvalidId;
    std::size_t pair_index = 0;
    double angle = 0.0;  // unsigned angle between the two half-tangents, [0, pi]
    bool degenerate = false;
};

/// Stored unit half-tangent at the half-edge's origin, in the origin node's
/// chart (sphere: tangent plane at the node; flat charts: plain 2-vector).
inline Vec3 half_tangent(const TilingMesh& mesh, HalfEdgeId h) { return mesh.he_tangent(h); }

/// Classify the clockwise-consecutive pair (star[j], star[j+1]) at a node.
/// Degenerate means the outgoing half-tangents are antiparallel (the two
/// edges continue smoothly through the node); a tangential pair with angle 0
/// is generic.
inline PairClassification classify_pair(const TilingMesh& mesh, NodeId node_id,
                                        std::size_t pair_index,
                                        double angle_tol = kDefaultAngleTol) {
    const std::vector<HalfEdgeId>& star = mesh.node_star(node_id);
    if (pair_index >= star.size())
        throw BadPairIndex("pair " + std::to_string(pair_index) + " at node " +
                           std::to_string(node_id) + " of degree " + std::to_string(star.size()));
    Vec3 t1 = mesh.he_tangent(star[pair_index]);
    Vec3 t2 = mesh.he_tangent(star[(pair_index + 1) % star.size()]);
    PairClassification pc;
    pc.node = node_id;
    pc.pair_index = pair_index;
    pc.angle = angle_between(t1, t2);
    // dot(t1,t2) <= -cos(angle_tol), phrased through the angle so tolerances
    // below the cosine resolution (~1e-8) still work.
    pc.degenerate = pc.angle >= kPi - angle_tol;
    return pc;
}

/// r_i of Def.-4 style pair counting: number of degenerate pairs among the
/// n_i clockwise-consecutive pairs. Values above 2 signal inconsistent
/// geometry.
inline int node_degeneracy_count(const TilingMesh& mesh, NodeId node_id,
                                 double angle_tol = kDefaultAngleTol) {
    const std::vector<HalfEdgeId>& star = mesh.node_star(node_id);
    int r = 0;
    for (std::size_t j = 0; j < star.size(); ++j)
        if (classify_pair(mesh, node_id, j, angle_tol).degenerate) ++r;
    if (r > 2)
        throw DegeneracyOverflow("node " + std::to_string(node_id) + " has " + std::to_string(r) +
                                 " degenerate pairs");
    return r;
}

/// One vertex record on a boundary trace. When `exact_dirs` is set the
/// incoming/outgoing travel directions come from stored half-tangents and
/// delta_alpha is exact; otherwise they are chord-based.
struct TraceMarker {
    std::size_t sample_index = 0;
    NodeId node = kInvalidId;
    double delta_alpha = 0.0;  // signed exterior angle in (-pi, pi]
    bool is_corner = false;    // mesh-level classification: pair is not degenerate
    bool exact_dirs = false;
    Vec3 in_dir, out_dir;
};

/// Arclength-parametrized closed boundary of one cell, interior on the left.
struct BoundaryTrace {
    FaceId face = kInvalidId;
    std::vector<Vec3> points;     // closed polyline; points.front() == points.back()
    std::vector<double> s;        // normalized arclength per point, s.front()=0, s.back()=1
    std::vector<TraceMarker> markers;  // ordered by sample_index; excludes the duplicate end
    double total_length = 0.0;

    std::size_t segment_count() const { return points.empty() ? 0 : points.size() - 1; }

    /// Tangent angle per segment, unwrapped to a continuous function of s.
    std::vector<double> tangent_angles() const {
        std::vector<double> alpha;
        alpha.reserve(segment_count());
        double prev = 0.0;
        for (std::size_t k = 0; k + 1 < points.size(); ++k) {
            Vec3 d = points[k + 1] - points[k];
            double a = std::atan2(d.y, d.x);
            if (k > 0) a = prev + wrap_angle(a - prev);
            alpha.push_back(a);
            prev = a;
        }
        return alpha;
    }
};

struct TurningBreakdown {
    double smooth_integral = 0.0;
    double corner_sum = 0.0;
    double total = 0.0;
};

/// Split the total turning of a closed trace into its smooth part and its
/// corner part. A vertex contributes to the corner sum only when it carries a
/// marker and its exterior angle exceeds corner_threshold; discretization
/// kinks and smooth (degenerate) vertices accrue to the smooth integral.
/// Markers with exact directions also route the chord-vs-tangent corrections
/// into the smooth integral, so corner angles stay discretization-free.
inline TurningBreakdown discrete_turning(const BoundaryTrace& trace,
                                         double corner_threshold = kDefaultCornerThreshold) {
    const std::vector<Vec3>& p = trace.points;
    if (p.size() < 3) throw OpenTrace("trace has fewer than 3 points");
    double scale = 1.0 + trace.total_length;
    if (distance(p.front(), p.back()) > 1e-9 * scale)
        throw OpenTrace("trace endpoints differ by " +
                        std::to_string(distance(p.front(), p.back())));

    const Vec3 up{0, 0, 1};
    std::size_t m = p.size() - 1;  // segments
    std::vector<Vec3> dir(m);
    for (std::size_t k = 0; k < m; ++k) dir[k] = p[k + 1] - p[k];

    std::vector<const TraceMarker*> at(m, nullptr);
    for (const TraceMarker& mk : trace.markers) {
        if (mk.sample_index < m) at[mk.sample_index] = &mk;
    }

    TurningBreakdown out;
    for (std::size_t k = 0; k < m; ++k) {
        const Vec3& incoming = dir[(k + m - 1) % m];
        const Vec3& outgoing = dir[k];
        const TraceMarker* mk = at[k];
        if (!mk) {
            out.smooth_integral += signed_angle(incoming, outgoing, up);
            continue;
        }
        Vec3 in_dir = mk->exact_dirs ? mk->in_dir : incoming;
        Vec3 out_dir = mk->exact_dirs ? mk->out_dir : outgoing;
        double dalpha = signed_angle(in_dir, out_dir, up);
        if (mk->exact_dirs) {
            out.smooth_integral += signed_angle(incoming, in_dir, up);
            out.smooth_integral += signed_angle(out_dir, outgoing, up);
        }
        if (std::abs(dalpha) > corner_threshold)
            out.corner_sum += dalpha;
        else
            out.smooth_integral += dalpha;
    }
    out.total = out.smooth_integral + out.corner_sum;
    return out;
}

}  // namespace tiling
