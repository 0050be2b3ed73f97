#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tiling/generators.hpp"
#include "tiling/geometry.hpp"
#include "tiling/mesh.hpp"
#include "tiling/vec.hpp"

namespace tiling {

namespace detail {

/// Uniform-arclength resampling of a polyline to `segments` pieces.
inline std::vector<Vec3> resample_polyline(const std::vector<Vec3>& pts, int segments) {
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
    std::vector<Vec3> out;
    out.reserve(std::size_t(segments) + 1);
    out.push_back(pts.front());
    double acc = 0.0;
    std::size_t seg = 1;
    for (int k = 1; k < segments; ++k) {
        double target = total * double(k) / double(segments);
        while (seg + 1 < pts.size() && acc + distance(pts[seg - 1], pts[seg]) < target) {
            acc += distance(pts[seg - 1], pts[seg]);
            ++seg;
        }
        double len = distance(pts[seg - 1], pts[seg]);
        double t = len > 0 ? (target - acc) / len : 0.0;
        out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * t);
    }
    out.push_back(pts.back());
    return out;
}

}  // namespace detail

/// Arclength-parametrized boundary of one cell. Corners sit exactly at the
/// non-degenerate node pairs of this face; degenerate (smooth) vertices are
/// flagged node-smooth with delta_alpha ~ 0. Plane and flat-torus cells only
/// (torus cells are traced in the unwrapped Euclidean chart).
inline BoundaryTrace boundary_trace(const TilingMesh& mesh, FaceId face_id, int samples_per_arc,
                                    double angle_tol = kDefaultAngleTol) {
    if (mesh.manifold.kind == ManifoldKind::Sphere)
        throw TilingError("boundary_trace: turning integrals are defined on flat charts only");
    const Face& f = mesh.face(face_id);
    if (f.outer) throw UnknownFace("face " + std::to_string(face_id) + " is an outer loop");
    if (samples_per_arc < 2) samples_per_arc = 2;

    std::vector<HalfEdgeId> cycle = mesh.face_boundary(face_id);

    BoundaryTrace tr;
    tr.face = face_id;
    {
        const HalfEdge& he0 = mesh.half_edge(cycle.front());
        const Arc& a0 = mesh.arc(he0.arc);
        tr.points.push_back(he0.forward ? a0.samples.front() : a0.samples.back());
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        HalfEdgeId h = cycle[k];
        HalfEdgeId prev = cycle[(k + cycle.size() - 1) % cycle.size()];
        TraceMarker mk;
        mk.sample_index = tr.points.size() - 1;
        mk.node = mesh.he_origin(h);
        mk.exact_dirs = true;
        mk.in_dir = -mesh.he_tangent(mesh.half_edge(prev).twin);
        mk.out_dir = mesh.he_tangent(h);
        mk.delta_alpha = signed_angle(mk.in_dir, mk.out_dir, Vec3{0, 0, 1});
        mk.is_corner = angle_between(-mk.in_dir, mk.out_dir) < kPi - angle_tol;
        tr.markers.push_back(mk);

        std::vector<Vec3> run = mesh.he_polyline(h, tr.points.back());
        run = detail::resample_polyline(run, samples_per_arc);
        for (std::size_t i = 1; i < run.size(); ++i) tr.points.push_back(run[i]);
    }

    tr.total_length = 0.0;
    tr.s.resize(tr.points.size(), 0.0);
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
        tr.total_length += distance(tr.points[i - 1], tr.points[i]);
        tr.s[i] = tr.total_length;
    }
    for (double& v : tr.s) v /= tr.total_length;
    return tr;
}

struct TurningCheck {
    double K = 0.0;
    bool pass = false;
    double tolerance = 0.0;
};

/// Gauss-Bonnet for a flat disk cell: total turning K = smooth + corners must
/// equal 2 pi, within a tolerance that shrinks with sampling density.
inline TurningCheck total_turning_check(const BoundaryTrace& trace) {
    TurningBreakdown tb = discrete_turning(trace);
    TurningCheck tc;
    tc.K = tb.total;
    tc.tolerance = std::max(1e-9, 1.0 / double(std::max<std::size_t>(8, trace.segment_count())));
    tc.pass = std::abs(tc.K - kTwoPi) <= tc.tolerance;
    return tc;
}

/// Turning accumulated at smooth points only.
inline double smooth_part_integral(const BoundaryTrace& trace) {
    return discrete_turning(trace).smooth_integral;
}

struct CornerCount {
    int v_star = 0;
    double max_delta = 0.0;  // max |delta_alpha| over corner records
};

/// Number of genuine corners of the trace; every exterior angle must satisfy
/// |delta_alpha| <= pi.
inline CornerCount corner_count(const BoundaryTrace& trace, double angle_tol = kDefaultAngleTol) {
    CornerCount cc;
    for (const TraceMarker& mk : trace.markers) {
        if (std::abs(mk.delta_alpha) > kPi + 1e-9)
            throw TilingError("exterior angle above pi at node " + std::to_string(mk.node));
        if (std::abs(mk.delta_alpha) > angle_tol) {
            ++cc.v_star;
            cc.max_delta = std::max(cc.max_delta, std::abs(mk.delta_alpha));
        }
    }
    return cc;
}

struct CellCorollaryResult {
    FaceId face = kInvalidId;
    int v_star = 0;
    bool pass = false;
};

struct Corollary1Report {
    bool all_pass = false;
    std::vector<CellCorollaryResult> cells;
};

/// Corner-degree check v* >= 2 on every cell of a monohedral tiling. The
/// congruence pre-check compares sorted boundary arc-length profiles and
/// corner-angle multisets within 1e-9 (necessary, not sufficient; no isometry
/// search).
inline Corollary1Report check_corollary1(const TilingMesh& mesh,
                                         double angle_tol = kDefaultAngleTol,
                                         int samples_per_arc = 64) {
    std::vector<BoundaryTrace> traces;
    std::vector<FaceId> ids;
    for (const Face& f : mesh.faces()) {
        if (f.outer) continue;
        traces.push_back(boundary_trace(mesh, f.id, samples_per_arc, angle_tol));
        ids.push_back(f.id);
    }
    if (traces.empty()) throw NotMonohedral("mesh has no cells");

    auto profile = [&](const BoundaryTrace& tr) {
        std::pair<std::vector<double>, std::vector<double>> pr;
        for (const TraceMarker& mk : tr.markers)
            if (std::abs(mk.delta_alpha) > angle_tol) pr.second.push_back(mk.delta_alpha);
        // Arc lengths between consecutive markers, from the resampled points.
        std::vector<std::size_t> cut;
        for (const TraceMarker& mk : tr.markers) cut.push_back(mk.sample_index);
        cut.push_back(tr.points.size() - 1);
        for (std::size_t c = 0; c + 1 < cut.size(); ++c) {
            double len = 0.0;
            for (std::size_t i = cut[c] + 1; i <= cut[c + 1]; ++i)
                len += distance(tr.points[i - 1], tr.points[i]);
            pr.first.push_back(len);
        }
        std::sort(pr.first.begin(), pr.first.end());
        std::sort(pr.second.begin(), pr.second.end());
        return pr;
    };

    auto base = profile(traces.front());
    for (std::size_t t = 1; t < traces.size(); ++t) {
        auto pr = profile(traces[t]);
        bool same = pr.first.size() == base.first.size() && pr.second.size() == base.second.size();
        for (std::size_t i = 0; same && i < pr.first.size(); ++i)
            if (std::abs(pr.first[i] - base.first[i]) > 1e-9) same = false;
        for (std::size_t i = 0; same && i < pr.second.size(); ++i)
            if (std::abs(pr.second[i] - base.second[i]) > 1e-9) same = false;
        if (!same)
            throw NotMonohedral("cell " + std::to_string(ids[t]) +
                                " is not congruent to cell " + std::to_string(ids[0]));
    }

    Corollary1Report rep;
    rep.all_pass = true;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        CellCorollaryResult r;
        r.face = ids[t];
        r.v_star = corner_count(traces[t], angle_tol).v_star;
        r.pass = r.v_star >= 2;
        if (!r.pass) rep.all_pass = false;
        rep.cells.push_back(r);
    }
    return rep;
}

struct Prism3dResult {
    double stack_residual = 0.0;
    double side_residual = 0.0;
    double vertex_tangent_residual = 0.0;
};

/// Sampled verification of the 3D monohedral prism construction: the top and
/// bottom caps stack with constant offset 2, opposite side curves coincide
/// under the (2,0,0)/(0,2,0) translations, and all three boundary curves
/// meeting at each of the 8 candidate corners have vertical half-tangents.
inline Prism3dResult verify_3d_construction(int grid_n, double fd_step = 1e-6) {
    if (grid_n < 8) throw InvalidSpec("verify_3d_construction needs grid_n >= 8");
    Prism3dResult res;

    auto surf = [](double x, double y, bool top) { return prism3d_surface(x, y, top); };

    for (int i = 0; i <= grid_n; ++i) {
        double x = -1.0 + 2.0 * double(i) / double(grid_n);
        for (int j = 0; j <= grid_n; ++j) {
            double y = -1.0 + 2.0 * double(j) / double(grid_n);
            res.stack_residual =
                std::max(res.stack_residual, std::abs(surf(x, y, true) - surf(x, y, false) - 2.0));
        }
        for (bool top : {true, false}) {
            // x = +/-1 face curves, then y = +/-1, each pair related by the
            // lattice translation of the neighbor cell.
            res.side_residual =
                std::max(res.side_residual, std::abs(surf(1.0, x, top) - surf(-1.0, x, top)));
            res.side_residual =
                std::max(res.side_residual, std::abs(surf(x, 1.0, top) - surf(x, -1.0, top)));
        }
    }

    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (bool top : {true, false}) {
                double h = fd_step;
                // curve in the x = sx face, parametrized by y
                double y1 = sy - (sy > 0 ? h : -h);
                double dz1 = surf(sx, sy, top) - surf(sx, y1, top);
                double ang1 = std::atan2(h, std::abs(dz1));
                // curve in the y = sy face, parametrized by x
                double x1 = sx - (sx > 0 ? h : -h);
                double dz2 = surf(sx, sy, top) - surf(x1, sy, top);
                double ang2 = std::atan2(h, std::abs(dz2));
                // the vertical prism edge is vertical by construction (0)
                res.vertex_tangent_residual =
                    std::max({res.vertex_tangent_residual, ang1, ang2});
            }
    return res;
}

}  // namespace tiling
