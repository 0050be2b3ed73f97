#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tiling/errors.hpp"
#include "tiling/manifold.hpp"
#include "tiling/vec.hpp"

namespace tiling {

using NodeId = std::uint32_t;
using ArcId = std::uint32_t;
using HalfEdgeId = std::uint32_t;
using FaceId = std::uint32_t;

constexpr std::uint32_t kInvalidId = std::numeric_limits<std::uint32_t>::max();

/// 0-cell. `star` holds the outgoing half-edges sorted clockwise by
/// outgoing half-tangent bearing in the node's chart; ties (tangential
/// meetings) are broken by the bearing of the arc's second sample point.
struct Node {
    NodeId id = kInvalidId;
    Vec3 pos;
    std::vector<HalfEdgeId> star;
};

/// 1-cell with explicit geometry: ordered sample points plus unit
/// half-tangents at both endpoints, each pointing away from its endpoint
/// into the arc. On the flat torus samples are unwrapped covering-chart
/// points; `shift_start`/`shift_end` record the lattice offset between each
/// terminal sample and its node's fundamental-domain position.
struct Arc {
    ArcId id = kInvalidId;
    NodeId start = kInvalidId, end = kInvalidId;
    std::vector<Vec3> samples;
    Vec3 tan_start, tan_end;
    std::array<int, 2> shift_start{0, 0};
    std::array<int, 2> shift_end{0, 0};
    double length = 0.0;
};

struct HalfEdge {
    HalfEdgeId id = kInvalidId;
    ArcId arc = kInvalidId;
    bool forward = true;  // true: runs along arc sample order
    HalfEdgeId twin = kInvalidId;
    HalfEdgeId next = kInvalidId;
    FaceId face = kInvalidId;
};

/// 2-cell. `outer` marks the unbounded-region loops of a plane patch; outer
/// faces are excluded from F and from all cell statistics.
struct Face {
    FaceId id = kInvalidId;
    std::vector<std::pair<ArcId, bool>> walk;  // (arc, runs forward along samples)
    HalfEdgeId boundary = kInvalidId;
    bool outer = false;
};

struct NodeSpec {
    NodeId id;
    Vec3 pos;
};

struct ArcSpec {
    ArcId id;
    NodeId start, end;
    std::vector<Vec3> samples;
    std::optional<Vec3> tan_start, tan_end;
};

struct FaceSpec {
    FaceId id;
    std::vector<std::pair<ArcId, bool>> walk;
};

enum class ViolationKind {
    DegenerateArcGeometry,
    PinchedCell,
    DisconnectedIntersection,
    NonClosedFace,
    StarFaceMismatch,
    PendantNode,
};

inline const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::DegenerateArcGeometry: return "degenerate arc";
        case ViolationKind::PinchedCell: return "pinched cell";
        case ViolationKind::DisconnectedIntersection: return "disconnected intersection";
        case ViolationKind::NonClosedFace: return "non-closed face";
        case ViolationKind::StarFaceMismatch: return "star/face mismatch";
        case ViolationKind::PendantNode: return "pendant node";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool clean() const { return violations.empty(); }
};

/// Immutable half-edge complex of a normal tiling. Build once via
/// build_mesh(); all read operations are pure and safe to run concurrently.
class TilingMesh {
public:
    ManifoldContext manifold;
    std::string provenance;

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<HalfEdge>& half_edges() const { return half_edges_; }
    const std::vector<Face>& faces() const { return faces_; }  // interior + outer

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_arcs() const { return arcs_.size(); }
    /// Interior faces only (outer loops of a plane patch are not cells).
    std::size_t num_faces() const { return num_interior_faces_; }
    std::size_t num_outer_faces() const { return faces_.size() - num_interior_faces_; }

    const Node& node(NodeId id) const {
        auto it = node_index_.find(id);
        if (it == node_index_.end()) throw UnknownNode("node id " + std::to_string(id));
        return nodes_[it->second];
    }
    const Arc& arc(ArcId id) const {
        auto it = arc_index_.find(id);
        if (it == arc_index_.end()) throw DanglingReference("arc id " + std::to_string(id));
        return arcs_[it->second];
    }
    const Face& face(FaceId id) const {
        auto it = face_index_.find(id);
        if (it == face_index_.end()) throw UnknownFace("face id " + std::to_string(id));
        return faces_[it->second];
    }
    const HalfEdge& half_edge(HalfEdgeId id) const {
        if (id >= half_edges_.size()) throw DanglingReference("half-edge id " + std::to_string(id));
        return half_edges_[id];
    }

    NodeId he_origin(HalfEdgeId h) const {
        const HalfEdge& he = half_edge(h);
        const Arc& a = arcs_[arc_index_.at(he.arc)];
        return he.forward ? a.start : a.end;
    }
    NodeId he_dest(HalfEdgeId h) const { return he_origin(half_edge(h).twin); }

    /// Stored unit half-tangent at the half-edge's origin, pointing into the
    /// arc, expressed in the origin node's chart.
    Vec3 he_tangent(HalfEdgeId h) const {
        const HalfEdge& he = half_edge(h);
        const Arc& a = arcs_[arc_index_.at(he.arc)];
        return he.forward ? a.tan_start : a.tan_end;
    }

    /// Arc samples in half-edge direction, translated so the run starts at
    /// `from` (chart-local continuation; the translation is a lattice vector
    /// on the torus and ~0 elsewhere).
    std::vector<Vec3> he_polyline(HalfEdgeId h, const Vec3& from) const {
        const HalfEdge& he = half_edge(h);
        const Arc& a = arcs_[arc_index_.at(he.arc)];
        std::vector<Vec3> pts(a.samples.begin(), a.samples.end());
        if (!he.forward) std::reverse(pts.begin(), pts.end());
        Vec3 shift = from - pts.front();
        for (Vec3& p : pts) p += shift;
        return pts;
    }

    /// Closed boundary cycle of a face, starting at its stored boundary
    /// half-edge.
    std::vector<HalfEdgeId> face_boundary(FaceId fid) const {
        const Face& f = face(fid);
        std::vector<HalfEdgeId> cycle;
        HalfEdgeId h = f.boundary;
        do {
            cycle.push_back(h);
            h = half_edges_[h].next;
        } while (h != f.boundary && cycle.size() <= half_edges_.size());
        if (h != f.boundary) throw OpenBoundaryWalk("face " + std::to_string(fid));
        return cycle;
    }

    /// Clockwise list of outgoing half-edges at a node.
    const std::vector<HalfEdgeId>& node_star(NodeId nid) const { return node(nid).star; }

    /// V - E + F with outer faces excluded (plane patches report the value
    /// for the interior complex; closed manifolds count every face).
    long long euler_characteristic() const {
        return (long long)num_nodes() - (long long)num_arcs() + (long long)num_faces();
    }

    /// Unwrapped closed polyline of a face boundary (covering-chart
    /// coordinates; consecutive half-edge runs are chained by translation).
    /// The final point equals the first for contractible cells.
    std::vector<Vec3> face_polyline(FaceId fid) const {
        std::vector<HalfEdgeId> cycle = face_boundary(fid);
        std::vector<Vec3> pts;
        const Arc& a0 = arcs_[arc_index_.at(half_edges_[cycle.front()].arc)];
        Vec3 cur = half_edges_[cycle.front()].forward ? a0.samples.front() : a0.samples.back();
        pts.push_back(cur);
        for (HalfEdgeId h : cycle) {
            std::vector<Vec3> run = he_polyline(h, cur);
            for (std::size_t i = 1; i < run.size(); ++i) pts.push_back(run[i]);
            cur = run.back();
        }
        return pts;
    }

    /// Mean of a face's corner node positions in the unwrapped chart.
    Vec3 face_centroid(FaceId fid) const {
        std::vector<HalfEdgeId> cycle = face_boundary(fid);
        const Arc& a0 = arcs_[arc_index_.at(half_edges_[cycle.front()].arc)];
        Vec3 cur = half_edges_[cycle.front()].forward ? a0.samples.front() : a0.samples.back();
        Vec3 sum{0, 0, 0};
        for (HalfEdgeId h : cycle) {
            sum += cur;
            std::vector<Vec3> run = he_polyline(h, cur);
            cur = run.back();
        }
        return sum / double(cycle.size());
    }

    /// Chart tangent frame at a node: unit normal plus right-handed (e1,e2).
    std::array<Vec3, 3> node_frame(NodeId nid) const {
        if (manifold.kind == ManifoldKind::Sphere) {
            Vec3 n = normalized(node(nid).pos);
            auto [e1, e2] = tangent_frame(n);
            return {e1, e2, n};
        }
        return {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    }

    /// Index j such that node_star(node)[j] == h. The clockwise-consecutive
    /// pair (star[j], star[j+1]) is the angular sector owned by the face
    /// corner that arrives along twin(h).
    std::size_t star_index(NodeId nid, HalfEdgeId h) const {
        const std::vector<HalfEdgeId>& st = node_star(nid);
        for (std::size_t j = 0; j < st.size(); ++j)
            if (st[j] == h) return j;
        throw DanglingReference("half-edge not in star of node " + std::to_string(nid));
    }

    std::size_t node_index(NodeId id) const { return node_index_.at(id); }
    std::size_t arc_index(ArcId id) const { return arc_index_.at(id); }
    std::size_t face_index(FaceId id) const { return face_index_.at(id); }

    friend TilingMesh build_mesh(const std::vector<NodeSpec>&, const std::vector<ArcSpec>&,
                                 const std::vector<FaceSpec>&, const ManifoldContext&,
                                 const std::string&);

private:
    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::vector<HalfEdge> half_edges_;
    std::vector<Face> faces_;
    std::size_t num_interior_faces_ = 0;
    std::unordered_map<NodeId, std::size_t> node_index_;
    std::unordered_map<ArcId, std::size_t> arc_index_;
    std::unordered_map<FaceId, std::size_t> face_index_;
};

namespace detail {

inline std::array<int, 2> resolve_lattice_shift(const Vec3& sample, const Vec3& node_pos,
                                                const ManifoldContext& m, ArcId aid) {
    if (m.kind != ManifoldKind::FlatTorus) {
        if (distance(sample, node_pos) > 1e-9 * (1.0 + norm(node_pos)))
            throw DanglingReference("arc " + std::to_string(aid) +
                                    " terminal sample does not coincide with its node");
        return {0, 0};
    }
    double fx = (sample.x - node_pos.x) / m.period_x;
    double fy = (sample.y - node_pos.y) / m.period_y;
    int sx = (int)std::lround(fx), sy = (int)std::lround(fy);
    if (std::abs(fx - sx) * m.period_x > 1e-9 || std::abs(fy - sy) * m.period_y > 1e-9)
        throw DanglingReference("arc " + std::to_string(aid) +
                                " terminal sample is not a lattice translate of its node");
    return {sx, sy};
}

inline double polyline_length(const std::vector<Vec3>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

/// Signed area of a closed flat-chart polyline (positive = CCW).
inline double shoelace(const std::vector<Vec3>& pts) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        a += pts[i].x * pts[i + 1].y - pts[i + 1].x * pts[i].y;
    return 0.5 * a;
}

}  // namespace detail

/// Assemble and validate the half-edge complex. Face walks are normalized to
/// counterclockwise chart orientation (cell interior on the left); node stars
/// come out clockwise, which makes the corner of a face arriving along h
/// correspond to the star pair (twin(h), next(h)).
inline TilingMesh build_mesh(const std::vector<NodeSpec>& node_specs,
                             const std::vector<ArcSpec>& arc_specs,
                             const std::vector<FaceSpec>& face_specs,
                             const ManifoldContext& manifold,
                             const std::string& provenance = "") {
    TilingMesh mesh;
    mesh.manifold = manifold;
    mesh.provenance = provenance;

    mesh.nodes_.reserve(node_specs.size());
    for (const NodeSpec& ns : node_specs) mesh.nodes_.push_back(Node{ns.id, ns.pos, {}});
    std::sort(mesh.nodes_.begin(), mesh.nodes_.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < mesh.nodes_.size(); ++i) {
        if (!mesh.node_index_.emplace(mesh.nodes_[i].id, i).second)
            throw DanglingReference("duplicate node id " + std::to_string(mesh.nodes_[i].id));
    }

    const bool sphere = manifold.kind == ManifoldKind::Sphere;

    mesh.arcs_.reserve(arc_specs.size());
    for (const ArcSpec& as : arc_specs) {
        Arc a;
        a.id = as.id;
        a.start = as.start;
        a.end = as.end;
        a.samples = as.samples;
        if (a.samples.size() < 2)
            throw DanglingReference("arc " + std::to_string(a.id) + " needs >= 2 samples");
        auto it0 = mesh.node_index_.find(a.start);
        auto it1 = mesh.node_index_.find(a.end);
        if (it0 == mesh.node_index_.end() || it1 == mesh.node_index_.end())
            throw DanglingReference("arc " + std::to_string(a.id) + " references unknown node");
        const Vec3& p0 = mesh.nodes_[it0->second].pos;
        const Vec3& p1 = mesh.nodes_[it1->second].pos;
        a.shift_start = detail::resolve_lattice_shift(a.samples.front(), p0, manifold, a.id);
        a.shift_end = detail::resolve_lattice_shift(a.samples.back(), p1, manifold, a.id);
        a.length = detail::polyline_length(a.samples);

        auto derive_tangent = [&](bool at_start) -> Vec3 {
            const std::vector<Vec3>& s = a.samples;
            Vec3 base = at_start ? s.front() : s.back();
            for (std::size_t k = 1; k < s.size(); ++k) {
                Vec3 q = at_start ? s[k] : s[s.size() - 1 - k];
                Vec3 d = q - base;
                if (norm(d) > 1e-15) return d;
            }
            throw DegenerateArc("arc " + std::to_string(a.id) +
                                ": coincident samples, no finite-difference tangent");
        };
        // Normalize/project only when actually off by more than float dust,
        // so already-clean tangents pass through bit-identical (stable
        // save/load round trips).
        auto clean_tangent = [&](Vec3 t, const Vec3& at) -> Vec3 {
            if (sphere) {
                Vec3 n = normalized(at);
                if (std::abs(dot(t, n)) > 1e-12) t = project_to_plane(t, n);
            }
            double len = norm(t);
            if (len < 1e-15)
                throw DegenerateArc("arc " + std::to_string(a.id) + ": zero half-tangent");
            if (std::abs(len - 1.0) > 1e-12) t = t / len;
            return t;
        };
        a.tan_start = clean_tangent(as.tan_start ? *as.tan_start : derive_tangent(true), p0);
        a.tan_end = clean_tangent(as.tan_end ? *as.tan_end : derive_tangent(false), p1);
        mesh.arcs_.push_back(std::move(a));
    }
    std::sort(mesh.arcs_.begin(), mesh.arcs_.end(),
              [](const Arc& a, const Arc& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < mesh.arcs_.size(); ++i) {
        if (!mesh.arc_index_.emplace(mesh.arcs_[i].id, i).second)
            throw DanglingReference("duplicate arc id " + std::to_string(mesh.arcs_[i].id));
    }

    // Two half-edges per arc: 2i along sample order, 2i+1 against it.
    mesh.half_edges_.resize(2 * mesh.arcs_.size());
    for (std::size_t i = 0; i < mesh.arcs_.size(); ++i) {
        HalfEdgeId f = HalfEdgeId(2 * i), r = HalfEdgeId(2 * i + 1);
        mesh.half_edges_[f] = HalfEdge{f, mesh.arcs_[i].id, true, r, kInvalidId, kInvalidId};
        mesh.half_edges_[r] = HalfEdge{r, mesh.arcs_[i].id, false, f, kInvalidId, kInvalidId};
    }
    auto he_of = [&](ArcId aid, bool fwd) -> HalfEdgeId {
        auto it = mesh.arc_index_.find(aid);
        if (it == mesh.arc_index_.end())
            throw DanglingReference("face walk references unknown arc " + std::to_string(aid));
        return HalfEdgeId(2 * it->second + (fwd ? 0 : 1));
    };

    // Face walks: validate closure, normalize winding to CCW, assign next/face.
    std::vector<Face> faces;
    faces.reserve(face_specs.size());
    for (const FaceSpec& fs : face_specs) {
        Face f;
        f.id = fs.id;
        f.walk = fs.walk;
        if (f.walk.empty()) throw OpenBoundaryWalk("face " + std::to_string(f.id) + ": empty walk");

        auto walk_endpoints = [&](const std::pair<ArcId, bool>& e) {
            const Arc& a = mesh.arcs_[mesh.arc_index_.at(e.first)];
            (void)he_of(e.first, e.second);
            return e.second ? std::pair<NodeId, NodeId>{a.start, a.end}
                            : std::pair<NodeId, NodeId>{a.end, a.start};
        };
        for (std::size_t k = 0; k < f.walk.size(); ++k) {
            NodeId tail = walk_endpoints(f.walk[k]).second;
            NodeId head = walk_endpoints(f.walk[(k + 1) % f.walk.size()]).first;
            if (tail != head)
                throw OpenBoundaryWalk("face " + std::to_string(f.id) + ": walk breaks at entry " +
                                       std::to_string(k));
        }

        // Unwrapped boundary polyline for the winding test.
        std::vector<Vec3> poly;
        {
            const Arc& a0 = mesh.arcs_[mesh.arc_index_.at(f.walk.front().first)];
            Vec3 cur = f.walk.front().second ? a0.samples.front() : a0.samples.back();
            poly.push_back(cur);
            for (const auto& e : f.walk) {
                const Arc& a = mesh.arcs_[mesh.arc_index_.at(e.first)];
                std::vector<Vec3> run(a.samples.begin(), a.samples.end());
                if (!e.second) std::reverse(run.begin(), run.end());
                Vec3 shift = cur - run.front();
                for (std::size_t i = 1; i < run.size(); ++i) poly.push_back(run[i] + shift);
                cur = poly.back();
            }
        }
        bool ccw;
        if (!sphere) {
            ccw = detail::shoelace(poly) >= 0.0;
        } else {
            // CCW seen from outside: interior centroid sits left of the walk.
            Vec3 c{0, 0, 0};
            for (const Vec3& p : poly) c += p;
            c = c / double(poly.size());
            const Arc& a0 = mesh.arcs_[mesh.arc_index_.at(f.walk.front().first)];
            Vec3 p = f.walk.front().second ? a0.samples.front() : a0.samples.back();
            Vec3 d = f.walk.front().second ? a0.tan_start : a0.tan_end;
            ccw = dot(cross(normalized(p), d), c - p) >= 0.0;
        }
        if (!ccw) {
            std::reverse(f.walk.begin(), f.walk.end());
            for (auto& e : f.walk) e.second = !e.second;
        }
        faces.push_back(std::move(f));
    }
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.id < b.id; });

    for (Face& f : faces) {
        std::vector<HalfEdgeId> hes;
        hes.reserve(f.walk.size());
        for (const auto& e : f.walk) hes.push_back(he_of(e.first, e.second));
        for (std::size_t k = 0; k < hes.size(); ++k) {
            HalfEdge& he = mesh.half_edges_[hes[k]];
            if (he.face != kInvalidId)
                throw NonManifoldEdge("arc " + std::to_string(he.arc) +
                                      " used twice in the same orientation");
            he.face = f.id;
            he.next = hes[(k + 1) % hes.size()];
        }
        f.boundary = hes.front();
    }

    if (manifold.is_closed()) {
        for (const HalfEdge& he : mesh.half_edges_)
            if (he.face == kInvalidId)
                throw NonManifoldEdge("arc " + std::to_string(he.arc) +
                                      " bounds fewer than two oriented face walks");
    }

    mesh.num_interior_faces_ = faces.size();
    mesh.faces_ = std::move(faces);

    // Node stars: clockwise by outgoing bearing, curvature tie-break.
    {
        struct StarEntry {
            double bearing;
            double delta;
            HalfEdgeId he;
        };
        std::vector<std::vector<StarEntry>> per_node(mesh.nodes_.size());
        for (const HalfEdge& he : mesh.half_edges_) {
            const Arc& a = mesh.arcs_[mesh.arc_index_.at(he.arc)];
            NodeId org = he.forward ? a.start : a.end;
            std::size_t ni = mesh.node_index_.at(org);
            auto frame = [&]() -> std::array<Vec3, 3> {
                if (sphere) {
                    Vec3 n = normalized(mesh.nodes_[ni].pos);
                    auto [e1, e2] = tangent_frame(n);
                    return {e1, e2, n};
                }
                return {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
            }();
            Vec3 t = he.forward ? a.tan_start : a.tan_end;
            double bearing = std::atan2(dot(t, frame[1]), dot(t, frame[0]));
            Vec3 d2 = he.forward ? a.samples[1] - a.samples[0]
                                 : a.samples[a.samples.size() - 2] - a.samples.back();
            if (sphere) d2 = project_to_plane(d2, frame[2]);
            double b2 = std::atan2(dot(d2, frame[1]), dot(d2, frame[0]));
            per_node[ni].push_back(StarEntry{bearing, wrap_angle(b2 - bearing), he.id});
        }
        for (std::size_t ni = 0; ni < mesh.nodes_.size(); ++ni) {
            std::vector<StarEntry>& es = per_node[ni];
            std::sort(es.begin(), es.end(), [](const StarEntry& a, const StarEntry& b) {
                if (a.bearing != b.bearing) return a.bearing > b.bearing;
                if (a.delta != b.delta) return a.delta > b.delta;
                return a.he < b.he;
            });
            mesh.nodes_[ni].star.reserve(es.size());
            for (const StarEntry& e : es) mesh.nodes_[ni].star.push_back(e.he);
        }
    }

    // Plane patches: close the unassigned half-edges into outer loops so
    // every arc bounds exactly two oriented walks. next(h) is the clockwise
    // successor of twin(h) in the star of h's destination node.
    if (!manifold.is_closed()) {
        auto cw_successor = [&](HalfEdgeId h) -> HalfEdgeId {
            const Arc& a = mesh.arcs_[mesh.arc_index_.at(mesh.half_edges_[h].arc)];
            NodeId org = mesh.half_edges_[h].forward ? a.start : a.end;
            const std::vector<HalfEdgeId>& st = mesh.nodes_[mesh.node_index_.at(org)].star;
            for (std::size_t j = 0; j < st.size(); ++j)
                if (st[j] == h) return st[(j + 1) % st.size()];
            throw DanglingReference("star lookup failed");
        };
        FaceId next_fid = 0;
        for (const Face& f : mesh.faces_) next_fid = std::max(next_fid, f.id + 1);
        for (HalfEdgeId h0 = 0; h0 < mesh.half_edges_.size(); ++h0) {
            if (mesh.half_edges_[h0].face != kInvalidId) continue;
            Face outer;
            outer.id = next_fid++;
            outer.outer = true;
            outer.boundary = h0;
            HalfEdgeId h = h0;
            do {
                mesh.half_edges_[h].face = outer.id;
                const HalfEdge& he = mesh.half_edges_[h];
                outer.walk.emplace_back(he.arc, he.forward);
                HalfEdgeId u = cw_successor(he.twin);
                // A consistent patch hands us an unassigned successor; fall
                // back to scanning the star if the geometry disagrees.
                if (mesh.half_edges_[u].face != kInvalidId && u != h0) {
                    const Arc& a = mesh.arcs_[mesh.arc_index_.at(he.arc)];
                    NodeId dest = he.forward ? a.end : a.start;
                    const std::vector<HalfEdgeId>& st =
                        mesh.nodes_[mesh.node_index_.at(dest)].star;
                    HalfEdgeId found = kInvalidId;
                    for (HalfEdgeId cand : st)
                        if (mesh.half_edges_[cand].face == kInvalidId || cand == h0) {
                            found = cand;
                            break;
                        }
                    if (found == kInvalidId)
                        throw OpenBoundaryWalk("outer boundary fails to close at half-edge " +
                                               std::to_string(h));
                    u = found;
                }
                mesh.half_edges_[h].next = u;
                h = u;
            } while (h != h0);
            mesh.faces_.push_back(std::move(outer));
        }
        for (std::size_t i = 0; i < mesh.faces_.size(); ++i)
            mesh.face_index_[mesh.faces_[i].id] = i;
    } else {
        for (std::size_t i = 0; i < mesh.faces_.size(); ++i) {
            if (!mesh.face_index_.emplace(mesh.faces_[i].id, i).second)
                throw DanglingReference("duplicate face id " + std::to_string(mesh.faces_[i].id));
        }
    }
    if (mesh.face_index_.size() != mesh.faces_.size()) {
        mesh.face_index_.clear();
        for (std::size_t i = 0; i < mesh.faces_.size(); ++i) {
            if (!mesh.face_index_.emplace(mesh.faces_[i].id, i).second)
                throw DanglingReference("duplicate face id");
        }
    }

    // Euler identity is part of the build contract on closed manifolds.
    if (manifold.is_closed() && mesh.euler_characteristic() != manifold.chi())
        throw NonManifoldEdge("V - E + F = " + std::to_string(mesh.euler_characteristic()) +
                              " but manifold chi = " + std::to_string(manifold.chi()));

    return mesh;
}

/// Report-only normality diagnostics: degenerate arcs, pinched cells,
/// disconnected pairwise intersections, non-contractible walks, and
/// star-vs-face rotation mismatches.
inline ValidationReport validate_normality(const TilingMesh& mesh) {
    ValidationReport report;
    auto add = [&](ViolationKind k, std::string msg) {
        report.violations.push_back(Violation{k, std::move(msg)});
    };

    for (const Arc& a : mesh.arcs()) {
        if (a.length <= 1e-12)
            add(ViolationKind::DegenerateArcGeometry,
                "arc " + std::to_string(a.id) + " has zero length");
        for (std::size_t i = 1; i < a.samples.size(); ++i)
            if (distance(a.samples[i - 1], a.samples[i]) <= 1e-15) {
                add(ViolationKind::DegenerateArcGeometry,
                    "arc " + std::to_string(a.id) + " has coincident consecutive samples");
                break;
            }
    }

    for (const Node& n : mesh.nodes())
        if (n.star.size() < 2)
            add(ViolationKind::PendantNode,
                "node " + std::to_string(n.id) + " has degree " + std::to_string(n.star.size()));

    // Face-local checks + shared-boundary accumulation.
    std::map<std::pair<FaceId, FaceId>, std::pair<std::set<ArcId>, std::set<NodeId>>> shared;
    double scale = 1.0;
    for (const Node& n : mesh.nodes()) scale = std::max(scale, norm(n.pos));
    for (const Face& f : mesh.faces()) {
        if (f.outer) continue;
        std::vector<HalfEdgeId> cycle = mesh.face_boundary(f.id);
        std::map<NodeId, int> corner_visits;
        for (HalfEdgeId h : cycle) corner_visits[mesh.he_origin(h)]++;
        for (const auto& [nid, cnt] : corner_visits)
            if (cnt > 1)
                add(ViolationKind::PinchedCell, "face " + std::to_string(f.id) +
                                                    " visits node " + std::to_string(nid) + " " +
                                                    std::to_string(cnt) + " times");
        std::vector<Vec3> poly = mesh.face_polyline(f.id);
        if (distance(poly.front(), poly.back()) > 1e-9 * scale)
            add(ViolationKind::NonClosedFace,
                "face " + std::to_string(f.id) + " boundary does not close in the covering chart");
    }

    // Pairwise shared boundaries (cells only, not outer loops).
    for (const Arc& a : mesh.arcs()) {
        HalfEdgeId hf = HalfEdgeId(2 * mesh.arc_index(a.id));
        FaceId f0 = mesh.half_edge(hf).face, f1 = mesh.half_edge(hf + 1).face;
        if (f0 == kInvalidId || f1 == kInvalidId) continue;
        if (mesh.face(f0).outer || mesh.face(f1).outer || f0 == f1) continue;
        auto key = std::minmax(f0, f1);
        shared[{key.first, key.second}].first.insert(a.id);
    }
    {
        std::map<NodeId, std::set<FaceId>> faces_at_node;
        for (const Face& f : mesh.faces()) {
            if (f.outer) continue;
            for (HalfEdgeId h : mesh.face_boundary(f.id)) faces_at_node[mesh.he_origin(h)].insert(f.id);
        }
        for (const auto& [nid, fs] : faces_at_node)
            for (auto it = fs.begin(); it != fs.end(); ++it)
                for (auto jt = std::next(it); jt != fs.end(); ++jt)
                    shared[{*it, *jt}].second.insert(nid);
    }
    for (const auto& [pair, elems] : shared) {
        const auto& [arcs, nodes] = elems;
        // Union-find over shared nodes; each shared arc links its endpoints.
        std::map<NodeId, NodeId> parent;
        for (NodeId n : nodes) parent[n] = n;
        std::function<NodeId(NodeId)> find = [&](NodeId x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        int components = 0;
        for (ArcId aid : arcs) {
            const Arc& a = mesh.arc(aid);
            if (!parent.count(a.start)) parent[a.start] = a.start;
            if (!parent.count(a.end)) parent[a.end] = a.end;
            NodeId ra = find(a.start), rb = find(a.end);
            if (ra != rb) parent[ra] = rb;
        }
        std::set<NodeId> roots;
        for (const auto& [n, _] : parent) roots.insert(find(n));
        components = int(roots.size());
        if (components > 1)
            add(ViolationKind::DisconnectedIntersection,
                "faces " + std::to_string(pair.first) + " and " + std::to_string(pair.second) +
                    " intersect in " + std::to_string(components) + " components");
    }

    // next(h) must be the clockwise successor of twin(h) at the shared node.
    for (const HalfEdge& he : mesh.half_edges()) {
        if (he.next == kInvalidId) continue;
        NodeId v = mesh.he_dest(he.id);
        const std::vector<HalfEdgeId>& st = mesh.node_star(v);
        std::size_t j = mesh.star_index(v, he.twin);
        if (st[(j + 1) % st.size()] != he.next)
            add(ViolationKind::StarFaceMismatch,
                "half-edge " + std::to_string(he.id) + ": next is not the star successor at node " +
                    std::to_string(v));
    }

    return report;
}

}  // namespace tiling
