#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "tiling/geometry.hpp"
#include "tiling/mesh.hpp"

namespace tiling {

struct NodeMetrics {
    NodeId id;
    int n;       // combinatorial nodal degree
    int r;       // degenerate pairs at the node
    int n_star;  // corner degree n - r
};

struct CellMetrics {
    FaceId id;
    int v;       // combinatorial cell degree
    int q;       // smooth (degenerate) vertices of the cell
    int v_star;  // corner degree v - q
};

enum class PointKind { Combinatorial, Corner };

struct SymbolicPoint {
    double x = 0.0, y = 0.0;
    PointKind kind = PointKind::Combinatorial;
    std::string label;
};

/// Full degree statistics of one mesh. Integer accumulators are kept next to
/// the derived ratios so identity checks stay exact.
struct TilingMetrics {
    long long V = 0, E = 0, F = 0;  // F counts interior cells only
    long long chi = 0;
    long long sum_n = 0, sum_v = 0;
    long long sum_r = 0, sum_q = 0;  // over nodes / over interior cells
    long long sum_q_all = 0;         // includes outer loops of a plane patch

    double n_bar = 0, v_bar = 0;
    double n_star_bar = 0, v_star_bar = 0;
    double h_bar = 0;        // v n / (v + n)
    double h_bar_euler = 0;  // 2E / (E + chi)
    double rho = 0;

    bool bound_defined = false;
    double bound_rhs = 0;
    double margin = 0;
    bool theorem_holds = false;

    bool corner_balance_ok = false;  // sum_r == sum_q_all
    bool convex_candidate = false;   // all n*_i >= 3 and all v*_j >= 3

    std::vector<NodeMetrics> per_node;
    std::vector<CellMetrics> per_cell;
};

/// Harmonic degree v n / (v + n).
inline double harmonic_degree(double n_bar, double v_bar) {
    return v_bar * n_bar / (v_bar + n_bar);
}

/// Right-hand side of the two-vertex bound: 2 - 2 chi n / (E(n-2) + chi n).
inline double theorem1_bound(double E, double chi, double n_bar) {
    double denom = E * (n_bar - 2.0) + chi * n_bar;
    double scale = std::abs(E * (n_bar - 2.0)) + std::abs(chi * n_bar) + 1.0;
    if (std::abs(denom) <= 1e-12 * scale)
        throw SingularDenominator("E(n-2) + chi n vanishes (E=" + std::to_string(E) +
                                  ", chi=" + std::to_string(chi) + ", n=" + std::to_string(n_bar) +
                                  ")");
    return 2.0 - 2.0 * chi * n_bar / denom;
}

/// Smooth-vertex count of one face cycle: corners whose two edges meet at
/// 180 degrees (half-tangents antiparallel).
inline int face_smooth_corner_count(const TilingMesh& mesh, FaceId fid, double angle_tol) {
    int q = 0;
    for (HalfEdgeId h : mesh.face_boundary(fid)) {
        HalfEdgeId nx = mesh.half_edge(h).next;
        Vec3 t_in = mesh.he_tangent(mesh.half_edge(h).twin);
        Vec3 t_out = mesh.he_tangent(nx);
        if (angle_between(t_in, t_out) >= kPi - angle_tol) ++q;
    }
    return q;
}

inline TilingMetrics compute_metrics(const TilingMesh& mesh,
                                     double angle_tol = kDefaultAngleTol) {
    TilingMetrics m;
    m.V = (long long)mesh.num_nodes();
    m.E = (long long)mesh.num_arcs();
    m.F = (long long)mesh.num_faces();
    m.chi = mesh.euler_characteristic();

    m.per_node.reserve(mesh.num_nodes());
    for (const Node& node : mesh.nodes()) {
        int n = int(node.star.size());
        int r = node_degeneracy_count(mesh, node.id, angle_tol);
        m.per_node.push_back(NodeMetrics{node.id, n, r, n - r});
        m.sum_n += n;
        m.sum_r += r;
    }
    if (m.sum_n != 2 * m.E)
        throw TilingError("sum of nodal degrees " + std::to_string(m.sum_n) + " != 2E");

    for (const Face& f : mesh.faces()) {
        int q = face_smooth_corner_count(mesh, f.id, angle_tol);
        if (f.outer) {
            m.sum_q_all += q;
            continue;
        }
        int v = int(f.walk.size());
        m.per_cell.push_back(CellMetrics{f.id, v, q, v - q});
        m.sum_v += v;
        m.sum_q += q;
        m.sum_q_all += q;
    }
    if (mesh.manifold.is_closed() && m.sum_v != 2 * m.E)
        throw TilingError("sum of cell degrees " + std::to_string(m.sum_v) + " != 2E");

    m.n_bar = double(m.sum_n) / double(m.V);
    m.v_bar = double(m.sum_v) / double(m.F);
    m.n_star_bar = double(m.sum_n - m.sum_r) / double(m.V);
    m.v_star_bar = double(m.sum_v - m.sum_q) / double(m.F);
    m.h_bar = harmonic_degree(m.n_bar, m.v_bar);
    m.h_bar_euler = 2.0 * double(m.E) / double(m.E + m.chi);
    m.rho = 1.0 - double(m.sum_r) / (2.0 * double(m.V));
    m.corner_balance_ok = (m.sum_r == m.sum_q_all);

    m.convex_candidate = true;
    for (const NodeMetrics& nm : m.per_node)
        if (nm.n_star < 3) m.convex_candidate = false;
    for (const CellMetrics& cm : m.per_cell)
        if (cm.v_star < 3) m.convex_candidate = false;

    try {
        m.bound_rhs = theorem1_bound(double(m.E), double(m.chi), m.n_bar);
        m.bound_defined = true;
        m.margin = m.v_star_bar - m.bound_rhs;
        m.theorem_holds = m.margin >= -1e-9;
    } catch (const SingularDenominator&) {
        m.bound_defined = false;
    }
    return m;
}

struct Theorem1Check {
    bool holds = false;
    double margin = 0;
    double v_star_bar = 0;
    double bound_rhs = 0;
};

inline Theorem1Check check_theorem1(const TilingMesh& mesh,
                                    double angle_tol = kDefaultAngleTol) {
    TilingMetrics m = compute_metrics(mesh, angle_tol);
    if (!m.bound_defined)
        throw SingularDenominator("theorem-1 bound undefined for this mesh");
    return Theorem1Check{m.theorem_holds, m.margin, m.v_star_bar, m.bound_rhs};
}

enum class BallPolicy { CentroidInside, AllVerticesInside };

struct BallStat {
    double radius = 0;
    double n_bar = 0, v_bar = 0;
    long long V = 0, E = 0, F = 0;
};

/// Remark-1 style finite-ball averaging on a plane patch. A cell belongs to
/// B(X, rho) iff its centroid lies inside (default policy); nodes and edges
/// are counted iff incident to a counted cell.
inline std::vector<BallStat> ball_sweep(const TilingMesh& mesh, const Vec3& center,
                                        const std::vector<double>& radii,
                                        BallPolicy policy = BallPolicy::CentroidInside) {
    if (mesh.manifold.kind != ManifoldKind::PlanePatch)
        throw InvalidSpec("ball_sweep requires a plane patch");
    if (radii.empty()) throw InvalidSpec("ball_sweep needs at least one radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw InvalidSpec("radii must be strictly increasing");

    // Patch extent and the largest cell diameter set the safety margin.
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const Node& n : mesh.nodes()) {
        min_x = std::min(min_x, n.pos.x);
        max_x = std::max(max_x, n.pos.x);
        min_y = std::min(min_y, n.pos.y);
        max_y = std::max(max_y, n.pos.y);
    }
    struct CellGeom {
        FaceId id;
        int degree = 0;
        Vec3 centroid;
        std::vector<Vec3> corners;
        std::vector<NodeId> corner_ids;
        std::vector<ArcId> arcs;
    };
    std::vector<CellGeom> cells;
    double max_diam = 0.0;
    for (const Face& f : mesh.faces()) {
        if (f.outer) continue;
        CellGeom cg;
        cg.id = f.id;
        cg.degree = int(f.walk.size());
        cg.centroid = mesh.face_centroid(f.id);
        for (HalfEdgeId h : mesh.face_boundary(f.id)) {
            NodeId nid = mesh.he_origin(h);
            cg.corner_ids.push_back(nid);
            cg.corners.push_back(mesh.node(nid).pos);
            cg.arcs.push_back(mesh.half_edge(h).arc);
        }
        for (const Vec3& c : cg.corners)
            max_diam = std::max(max_diam, 2.0 * distance(c, cg.centroid));
        cells.push_back(std::move(cg));
    }
    double r_max = radii.back();
    if (center.x - r_max - max_diam < min_x || center.x + r_max + max_diam > max_x ||
        center.y - r_max - max_diam < min_y || center.y + r_max + max_diam > max_y)
        throw BallExceedsPatch("largest ball plus one cell diameter exceeds patch extent");

    std::vector<BallStat> out;
    out.reserve(radii.size());
    for (double r : radii) {
        std::set<NodeId> nodes;
        std::set<ArcId> arcs;
        long long f_count = 0;
        long long degree_sum = 0;
        for (const CellGeom& cg : cells) {
            bool in;
            if (policy == BallPolicy::CentroidInside) {
                in = distance(cg.centroid, center) <= r;
            } else {
                in = true;
                for (const Vec3& c : cg.corners)
                    if (distance(c, center) > r) { in = false; break; }
            }
            if (!in) continue;
            ++f_count;
            degree_sum += cg.degree;
            nodes.insert(cg.corner_ids.begin(), cg.corner_ids.end());
            arcs.insert(cg.arcs.begin(), cg.arcs.end());
        }
        BallStat st;
        st.radius = r;
        st.V = (long long)nodes.size();
        st.E = (long long)arcs.size();
        st.F = f_count;
        // Degrees of the sub-tiling: mean nodal degree is 2E'/V' (every
        // included edge has both endpoints included); mean cell degree sums
        // the included cells' own boundary-edge counts.
        st.n_bar = st.V > 0 ? 2.0 * double(st.E) / double(st.V) : 0.0;
        st.v_bar = st.F > 0 ? double(degree_sum) / double(st.F) : 0.0;
        out.push_back(st);
    }
    return out;
}

inline SymbolicPoint symbolic_point(const TilingMetrics& m, PointKind kind,
                                    const std::string& label = "") {
    SymbolicPoint p;
    p.kind = kind;
    p.label = label;
    if (kind == PointKind::Combinatorial) {
        p.x = m.n_bar;
        p.y = m.v_bar;
    } else {
        p.x = m.n_star_bar;
        p.y = m.v_star_bar;
    }
    return p;
}

}  // namespace tiling
