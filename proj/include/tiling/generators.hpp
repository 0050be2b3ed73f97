#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tiling/geometry.hpp"
#include "tiling/mesh.hpp"
#include "tiling/vec.hpp"

namespace tiling {

enum class PatternFamily {
    Honeycomb,
    Brick,
    Rooftile,
    SquareGrid,
    Platonic,
    VoronoiTorus,
    MonohedralDemo,
};

enum class PlatonicKind { Tetrahedron, Cube, Octahedron, Dodecahedron, Icosahedron };

enum class MonohedralKind { Square, BrickRect, RooftileCurved };

struct PatternSpec {
    PatternFamily family = PatternFamily::Honeycomb;
    int rows = 4, cols = 4;
    ManifoldKind manifold = ManifoldKind::FlatTorus;
    double edge_length = 1.0;  // lattice edge; sphere radius for platonic
    PlatonicKind platonic = PlatonicKind::Cube;
    MonohedralKind demo = MonohedralKind::Square;
    int n_seeds = 50;
    std::uint64_t rng_seed = 1;
    int samples_per_arc = 64;  // curved arcs only; straight arcs keep 2 samples
};

namespace detail {

// ---------------------------------------------------------------------------
// Periodic lattice builder: faces are described by unwrapped integer corner
// coordinates on a sublattice with physical step (ux, uy); nodes and arcs are
// deduplicated modulo the period (torus) or taken verbatim (plane patch).
// ---------------------------------------------------------------------------

struct IVec2 {
    long long i = 0, j = 0;
    bool operator<(const IVec2& o) const { return i != o.i ? i < o.i : j < o.j; }
    bool operator==(const IVec2& o) const { return i == o.i && j == o.j; }
    IVec2 operator-(const IVec2& o) const { return {i - o.i, j - o.j}; }
};

enum class EdgeKind { Straight, BulgeLeft, BulgeRight };

struct CornerSpec {
    IVec2 pt;
    EdgeKind kind = EdgeKind::Straight;  // edge from this corner to the next
};

inline long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

class LatticeBuilder {
public:
    LatticeBuilder(double ux, double uy, long long period_i, long long period_j, bool torus,
                   int bulge_segments)
        : ux_(ux), uy_(uy), pi_(period_i), pj_(period_j), torus_(torus),
          bulge_segments_(std::max(4, bulge_segments)) {}

    void add_face(const std::vector<CornerSpec>& corners) {
        FaceEntry fe;
        for (std::size_t k = 0; k < corners.size(); ++k) {
            const CornerSpec& c = corners[k];
            const CornerSpec& d = corners[(k + 1) % corners.size()];
            fe.edges.push_back(register_edge(c.pt, d.pt, c.kind));
        }
        faces_.push_back(std::move(fe));
    }

    TilingMesh build(const std::string& provenance) {
        // Deterministic ids: nodes by canonical lattice point, arcs by key order.
        std::map<IVec2, NodeId> node_ids;
        for (const auto& [key, _] : edge_refs_) {
            node_ids.emplace(reduce_point(key.a), 0);
            node_ids.emplace(reduce_point(key.b), 0);
        }
        NodeId next_node = 0;
        std::vector<NodeSpec> nodes;
        for (auto& [pt, id] : node_ids) {
            id = next_node++;
            nodes.push_back(NodeSpec{id, position(pt)});
        }

        std::map<EdgeKeyT, ArcId> arc_ids;
        std::vector<ArcSpec> arcs;
        ArcId next_arc = 0;
        for (const auto& [key, uses] : edge_refs_) {
            if (uses != 2 && torus_)
                throw InvalidSpec("lattice edge bounds " + std::to_string(uses) +
                                  " face walks on a torus");
            ArcSpec as;
            as.id = next_arc;
            as.start = node_ids.at(reduce_point(key.a));
            as.end = node_ids.at(reduce_point(key.b));
            make_geometry(key, as);
            arc_ids.emplace(key, next_arc);
            arcs.push_back(std::move(as));
            ++next_arc;
        }

        std::vector<FaceSpec> faces;
        FaceId fid = 0;
        for (const FaceEntry& fe : faces_) {
            FaceSpec fs;
            fs.id = fid++;
            for (const EdgeUse& use : fe.edges)
                fs.walk.emplace_back(arc_ids.at(use.key), use.forward);
            faces.push_back(std::move(fs));
        }

        ManifoldContext m = torus_ ? ManifoldContext::flat_torus(double(pi_) * ux_,
                                                                 double(pj_) * uy_)
                                   : ManifoldContext::plane_patch();
        return build_mesh(nodes, arcs, faces, m, provenance);
    }

private:
    struct EdgeKeyT {
        IVec2 a, b;  // canonical: a is the reduced lexicographic minimum
        EdgeKind kind = EdgeKind::Straight;
        bool operator<(const EdgeKeyT& o) const {
            if (!(a == o.a)) return a < o.a;
            if (!(b == o.b)) return b < o.b;
            return int(kind) < int(o.kind);
        }
    };
    struct EdgeUse {
        EdgeKeyT key;
        bool forward;
    };
    struct FaceEntry {
        std::vector<EdgeUse> edges;
    };

    IVec2 reduce_point(const IVec2& p) const {
        if (!torus_) return p;
        return {p.i - floor_div(p.i, pi_) * pi_, p.j - floor_div(p.j, pj_) * pj_};
    }

    Vec3 position(const IVec2& p) const { return {double(p.i) * ux_, double(p.j) * uy_, 0.0}; }

    static EdgeKind flip(EdgeKind k) {
        if (k == EdgeKind::BulgeLeft) return EdgeKind::BulgeRight;
        if (k == EdgeKind::BulgeRight) return EdgeKind::BulgeLeft;
        return k;
    }

    EdgeUse register_edge(const IVec2& from, const IVec2& to, EdgeKind kind) {
        bool forward = from < to;
        IVec2 a = forward ? from : to;
        IVec2 b = forward ? to : from;
        EdgeKind canon_kind = forward ? kind : flip(kind);
        IVec2 t{0, 0};
        if (torus_) {
            t = {floor_div(a.i, pi_) * pi_, floor_div(a.j, pj_) * pj_};
        }
        EdgeKeyT key{{a.i - t.i, a.j - t.j}, {b.i - t.i, b.j - t.j}, canon_kind};
        auto it = edge_refs_.emplace(key, 0).first;
        it->second++;
        return EdgeUse{key, forward};
    }

    void make_geometry(const EdgeKeyT& key, ArcSpec& as) const {
        Vec3 pa = position(key.a), pb = position(key.b);
        if (key.kind == EdgeKind::Straight) {
            as.samples = {pa, pb};
            as.tan_start = normalized(pb - pa);
            as.tan_end = normalized(pa - pb);
            return;
        }
        double sgn = key.kind == EdgeKind::BulgeRight ? 1.0 : -1.0;
        Vec3 u = normalized(pb - pa);
        Vec3 w{u.y * sgn, -u.x * sgn, 0.0};  // bulge side normal
        Vec3 c = (pa + pb) * 0.5;
        double radius = 0.5 * distance(pa, pb);
        int m = bulge_segments_;
        as.samples.resize(std::size_t(m) + 1);
        for (int k = 0; k <= m; ++k) {
            double th = kPi * double(k) / double(m);
            as.samples[std::size_t(k)] = c + (u * (-std::cos(th)) + w * std::sin(th)) * radius;
        }
        as.samples.front() = pa;
        as.samples.back() = pb;
        as.tan_start = w;  // semicircle leaves both endpoints along the bulge normal
        as.tan_end = w;
    }

    double ux_, uy_;
    long long pi_, pj_;
    bool torus_;
    int bulge_segments_;
    std::map<EdgeKeyT, int> edge_refs_;
    std::vector<FaceEntry> faces_;
};

// ---------------------------------------------------------------------------
// Lattice families
// ---------------------------------------------------------------------------

inline void require_quotient(const PatternSpec& s, bool needs_even_rows) {
    if (s.rows < 1 || s.cols < 1) throw InvalidSpec("rows and cols must be >= 1");
    if (s.manifold == ManifoldKind::FlatTorus) {
        if (s.rows < 2 || s.cols < 2)
            throw InvalidSpec("torus quotients need rows, cols >= 2 (cells must stay disks)");
        if (needs_even_rows && s.rows % 2 != 0)
            throw InvalidSpec("this family needs an even row count on the torus");
    }
    if (s.manifold == ManifoldKind::Sphere)
        throw InvalidSpec("lattice families live on the plane or the flat torus");
}

inline TilingMesh gen_honeycomb(const PatternSpec& s, const std::string& provenance) {
    require_quotient(s, true);
    double L = s.edge_length;
    LatticeBuilder b(std::sqrt(3.0) * L / 2.0, L / 2.0, 2 * s.cols, 3 * s.rows,
                     s.manifold == ManifoldKind::FlatTorus, s.samples_per_arc);
    for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c) {
            long long ci = 2 * c + (r % 2), cj = 3 * r;
            auto at = [&](long long di, long long dj) {
                return CornerSpec{IVec2{ci + di, cj + dj}, EdgeKind::Straight};
            };
            b.add_face({at(1, -1), at(1, 1), at(0, 2), at(-1, 1), at(-1, -1), at(0, -2)});
        }
    return b.build(provenance);
}

inline TilingMesh gen_square_grid(const PatternSpec& s, const std::string& provenance) {
    require_quotient(s, false);
    double L = s.edge_length;
    LatticeBuilder b(L, L, s.cols, s.rows, s.manifold == ManifoldKind::FlatTorus,
                     s.samples_per_arc);
    for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c)
            b.add_face({CornerSpec{{c, r}}, CornerSpec{{c + 1, r}}, CornerSpec{{c + 1, r + 1}},
                        CornerSpec{{c, r + 1}}});
    return b.build(provenance);
}

inline TilingMesh gen_brick_like(const PatternSpec& s, bool curved,
                                 const std::string& provenance) {
    require_quotient(s, true);
    if (s.manifold == ManifoldKind::FlatTorus && s.cols < 2)
        throw InvalidSpec("brick/rooftile torus quotients need cols >= 2");
    double L = s.edge_length;
    LatticeBuilder b(L, L, 2 * s.cols, s.rows, s.manifold == ManifoldKind::FlatTorus,
                     s.samples_per_arc);
    for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c) {
            long long x0 = 2 * c + (r % 2);
            EdgeKind up = curved ? EdgeKind::BulgeRight : EdgeKind::Straight;
            EdgeKind down = curved ? EdgeKind::BulgeLeft : EdgeKind::Straight;
            b.add_face({CornerSpec{{x0, r}}, CornerSpec{{x0 + 1, r}},
                        CornerSpec{{x0 + 2, r}, up}, CornerSpec{{x0 + 2, r + 1}},
                        CornerSpec{{x0 + 1, r + 1}}, CornerSpec{{x0, r + 1}, down}});
        }
    return b.build(provenance);
}

// ---------------------------------------------------------------------------
// Platonic solids on the sphere
// ---------------------------------------------------------------------------

inline TilingMesh build_sphere_mesh(std::vector<Vec3> verts,
                                    const std::vector<std::vector<int>>& cycles, double radius,
                                    int samples_per_arc, const std::string& provenance) {
    for (Vec3& v : verts) v = normalized(v);

    std::map<std::pair<int, int>, ArcId> arc_of;
    std::vector<ArcSpec> arcs;
    auto arc_for = [&](int i, int j) -> std::pair<ArcId, bool> {
        bool fwd = i < j;
        std::pair<int, int> key = fwd ? std::make_pair(i, j) : std::make_pair(j, i);
        auto it = arc_of.find(key);
        if (it == arc_of.end()) {
            ArcSpec as;
            as.id = ArcId(arcs.size());
            as.start = NodeId(key.first);
            as.end = NodeId(key.second);
            const Vec3 &a = verts[std::size_t(key.first)], &b = verts[std::size_t(key.second)];
            double omega = angle_between(a, b);
            int m = std::max(2, samples_per_arc);
            as.samples.resize(std::size_t(m) + 1);
            for (int k = 0; k <= m; ++k) {
                double t = double(k) / double(m);
                Vec3 p = (a * std::sin((1.0 - t) * omega) + b * std::sin(t * omega)) /
                         std::sin(omega);
                as.samples[std::size_t(k)] = p * radius;
            }
            as.samples.front() = a * radius;
            as.samples.back() = b * radius;
            as.tan_start = normalized(b - a * dot(a, b));
            as.tan_end = normalized(a - b * dot(a, b));
            it = arc_of.emplace(key, as.id).first;
            arcs.push_back(std::move(as));
        }
        return {it->second, fwd};
    };

    std::vector<NodeSpec> nodes;
    for (std::size_t i = 0; i < verts.size(); ++i)
        nodes.push_back(NodeSpec{NodeId(i), verts[i] * radius});
    std::vector<FaceSpec> faces;
    for (std::size_t f = 0; f < cycles.size(); ++f) {
        FaceSpec fs;
        fs.id = FaceId(f);
        const std::vector<int>& cy = cycles[f];
        for (std::size_t k = 0; k < cy.size(); ++k) {
            auto [aid, fwd] = arc_for(cy[k], cy[(k + 1) % cy.size()]);
            fs.walk.emplace_back(aid, fwd);
        }
        faces.push_back(std::move(fs));
    }
    return build_mesh(nodes, arcs, faces, ManifoldContext::sphere(radius), provenance);
}

inline TilingMesh gen_platonic(PlatonicKind kind, double radius, int samples_per_arc,
                               const std::string& provenance) {
    std::vector<Vec3> verts;
    std::vector<std::vector<int>> cycles;
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

    auto icosa_verts = [&]() {
        std::vector<Vec3> v;
        for (double s1 : {-1.0, 1.0})
            for (double s2 : {-1.0, 1.0}) {
                v.push_back({0, s1, s2 * phi});
                v.push_back({s1, s2 * phi, 0});
                v.push_back({s2 * phi, 0, s1});
            }
        return v;
    };
    auto triangles_by_adjacency = [&](const std::vector<Vec3>& v) {
        // Edge length is the minimum pairwise distance.
        double min_d = 1e300;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j)
                min_d = std::min(min_d, distance(v[i], v[j]));
        auto adjacent = [&](std::size_t i, std::size_t j) {
            return distance(v[i], v[j]) < min_d * 1.001;
        };
        std::vector<std::vector<int>> tris;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j)
                for (std::size_t k = j + 1; k < v.size(); ++k)
                    if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k))
                        tris.push_back({int(i), int(j), int(k)});
        return tris;
    };

    switch (kind) {
        case PlatonicKind::Tetrahedron:
            verts = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
            cycles = triangles_by_adjacency(verts);
            break;
        case PlatonicKind::Cube:
            for (double x : {-1.0, 1.0})
                for (double y : {-1.0, 1.0})
                    for (double z : {-1.0, 1.0}) verts.push_back({x, y, z});
            // vertex index = 4*(x>0) + 2*(y>0) + (z>0)
            cycles = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                      {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
            break;
        case PlatonicKind::Octahedron:
            verts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
            cycles = triangles_by_adjacency(verts);
            break;
        case PlatonicKind::Icosahedron:
            verts = icosa_verts();
            cycles = triangles_by_adjacency(verts);
            break;
        case PlatonicKind::Dodecahedron: {
            // Dual of the icosahedron: one vertex per icosahedral face, one
            // pentagon per icosahedral vertex.
            std::vector<Vec3> iv = icosa_verts();
            for (Vec3& v : iv) v = normalized(v);
            std::vector<std::vector<int>> itris = triangles_by_adjacency(iv);
            for (const std::vector<int>& t : itris)
                verts.push_back(normalized(iv[std::size_t(t[0])] + iv[std::size_t(t[1])] +
                                           iv[std::size_t(t[2])]));
            for (std::size_t vi = 0; vi < iv.size(); ++vi) {
                std::vector<int> incident;
                for (std::size_t f = 0; f < itris.size(); ++f)
                    for (int w : itris[f])
                        if (w == int(vi)) incident.push_back(int(f));
                Vec3 n = iv[vi];
                auto [e1, e2] = tangent_frame(n);
                std::sort(incident.begin(), incident.end(), [&](int a, int b) {
                    Vec3 da = project_to_plane(verts[std::size_t(a)], n);
                    Vec3 db = project_to_plane(verts[std::size_t(b)], n);
                    return std::atan2(dot(da, e2), dot(da, e1)) <
                           std::atan2(dot(db, e2), dot(db, e1));
                });
                cycles.push_back(incident);
            }
            break;
        }
    }
    return build_sphere_mesh(verts, cycles, radius, samples_per_arc, provenance);
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay for the periodic Voronoi generator
// ---------------------------------------------------------------------------

struct DelTri {
    int a, b, c;
    double ccx, ccy, rr;  // circumcircle
    bool alive = true;
};

struct DegenerateTriangulation : TilingError {
    explicit DegenerateTriangulation(const std::string& m) : TilingError(m) {}
};

inline DelTri make_tri(const std::vector<Vec3>& pts, int a, int b, int c) {
    const Vec3 &A = pts[std::size_t(a)], &B = pts[std::size_t(b)], &C = pts[std::size_t(c)];
    double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) + C.x * (A.y - B.y));
    double span = std::abs(A.x) + std::abs(A.y) + std::abs(B.x) + std::abs(B.y) + std::abs(C.x) +
                  std::abs(C.y) + 1.0;
    if (std::abs(d) < 1e-12 * span * span)
        throw DegenerateTriangulation("collinear triple in Delaunay insertion");
    double a2 = A.x * A.x + A.y * A.y, b2 = B.x * B.x + B.y * B.y, c2 = C.x * C.x + C.y * C.y;
    DelTri t;
    t.a = a; t.b = b; t.c = c;
    t.ccx = (a2 * (B.y - C.y) + b2 * (C.y - A.y) + c2 * (A.y - B.y)) / d;
    t.ccy = (a2 * (C.x - B.x) + b2 * (A.x - C.x) + c2 * (B.x - A.x)) / d;
    double dx = A.x - t.ccx, dy = A.y - t.ccy;
    t.rr = dx * dx + dy * dy;
    return t;
}

inline std::vector<DelTri> delaunay(const std::vector<Vec3>& pts_in, double extent) {
    std::vector<Vec3> pts;
    pts.reserve(pts_in.size() + 3);
    double big = 64.0 * extent;
    pts.push_back({-big, -big, 0});
    pts.push_back({big, -big, 0});
    pts.push_back({0, big, 0});
    pts.insert(pts.end(), pts_in.begin(), pts_in.end());

    std::vector<DelTri> tris;
    tris.push_back(make_tri(pts, 0, 1, 2));

    std::unordered_map<std::uint64_t, int> edge_count;
    for (int p = 3; p < int(pts.size()); ++p) {
        const Vec3& P = pts[std::size_t(p)];
        edge_count.clear();
        std::vector<std::array<int, 2>> boundary;
        for (DelTri& t : tris) {
            if (!t.alive) continue;
            double dx = P.x - t.ccx, dy = P.y - t.ccy;
            if (dx * dx + dy * dy < t.rr) {
                t.alive = false;
                const std::array<std::array<int, 2>, 3> edges{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
                for (const auto& e : edges) {
                    std::uint64_t key = (std::uint64_t(std::uint32_t(std::min(e[0], e[1]))) << 32) |
                                        std::uint32_t(std::max(e[0], e[1]));
                    edge_count[key]++;
                }
            }
        }
        std::vector<DelTri> fresh;
        for (const DelTri& t : tris) {
            if (t.alive) continue;
            const std::array<std::array<int, 2>, 3> edges{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
            for (const auto& e : edges) {
                std::uint64_t key = (std::uint64_t(std::uint32_t(std::min(e[0], e[1]))) << 32) |
                                    std::uint32_t(std::max(e[0], e[1]));
                if (edge_count[key] == 1) fresh.push_back(make_tri(pts, e[0], e[1], p));
            }
        }
        tris.erase(std::remove_if(tris.begin(), tris.end(),
                                  [](const DelTri& t) { return !t.alive; }),
                   tris.end());
        tris.insert(tris.end(), fresh.begin(), fresh.end());
    }

    std::vector<DelTri> out;
    for (const DelTri& t : tris)
        if (t.a >= 3 && t.b >= 3 && t.c >= 3) {
            DelTri s = t;
            s.a -= 3; s.b -= 3; s.c -= 3;
            out.push_back(s);
        }
    return out;
}

// one deterministic attempt at the quotient Voronoi complex
inline TilingMesh voronoi_torus_attempt(const std::vector<Vec3>& seeds, double period,
                                        const std::string& provenance) {
    const int n = int(seeds.size());
    const int span = n < 8 ? 2 : 1;  // replication half-width
    std::vector<std::array<int, 2>> offsets;
    for (int oy = -span; oy <= span; ++oy)
        for (int ox = -span; ox <= span; ++ox) offsets.push_back({ox, oy});

    std::vector<Vec3> pts;
    pts.reserve(offsets.size() * std::size_t(n));
    for (const auto& off : offsets)
        for (const Vec3& s : seeds)
            pts.push_back({s.x + off[0] * period, s.y + off[1] * period, 0.0});

    std::vector<DelTri> tris = delaunay(pts, (2.0 * span + 1.0) * period);

    struct PV {
        int base, ox, oy;
        bool operator<(const PV& o) const {
            if (base != o.base) return base < o.base;
            if (ox != o.ox) return ox < o.ox;
            return oy < o.oy;
        }
        bool operator==(const PV& o) const { return base == o.base && ox == o.ox && oy == o.oy; }
    };
    auto pv_of = [&](int idx) -> PV {
        int copy = idx / n, base = idx % n;
        return PV{base, offsets[std::size_t(copy)][0], offsets[std::size_t(copy)][1]};
    };
    using TriKey = std::array<PV, 3>;
    auto canon_tri = [&](const DelTri& t) -> TriKey {
        std::array<PV, 3> vs{pv_of(t.a), pv_of(t.b), pv_of(t.c)};
        std::sort(vs.begin(), vs.end());
        for (int k = 2; k >= 0; --k) {
            vs[std::size_t(k)].ox -= vs[0].ox;
            vs[std::size_t(k)].oy -= vs[0].oy;
        }
        return vs;
    };

    // Instance adjacency by shared point-index pair.
    std::map<std::pair<int, int>, std::vector<int>> by_edge;
    for (std::size_t ti = 0; ti < tris.size(); ++ti) {
        const DelTri& t = tris[ti];
        const std::array<std::array<int, 2>, 3> es{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
        for (const auto& e : es)
            by_edge[std::minmax(e[0], e[1])].push_back(int(ti));
    }

    // Quotient nodes: triangles whose circumcenter falls in the fundamental
    // domain. Exactly one instance per quotient triangle qualifies.
    std::map<TriKey, int> node_instance;
    for (std::size_t ti = 0; ti < tris.size(); ++ti) {
        const DelTri& t = tris[ti];
        if (t.ccx >= 0.0 && t.ccx < period && t.ccy >= 0.0 && t.ccy < period) {
            auto [it, fresh] = node_instance.emplace(canon_tri(t), int(ti));
            if (!fresh)
                throw DegenerateTriangulation("duplicate fundamental-domain circumcenter");
        }
    }
    if (int(node_instance.size()) != 2 * n)
        throw DegenerateTriangulation("quotient triangle count " +
                                      std::to_string(node_instance.size()) + " != 2n");

    std::map<TriKey, NodeId> node_ids;
    std::vector<NodeSpec> nodes;
    {
        NodeId id = 0;
        for (const auto& [key, inst] : node_instance) {
            node_ids.emplace(key, id);
            nodes.push_back(NodeSpec{id, Vec3{tris[std::size_t(inst)].ccx,
                                              tris[std::size_t(inst)].ccy, 0.0}});
            ++id;
        }
    }

    // Quotient arcs, one per Delaunay edge class. Geometry is anchored at the
    // in-domain instance of the lexicographically smaller endpoint triangle.
    using EdgeKeyV = std::array<PV, 2>;
    auto canon_edge = [&](int pi_, int pj_) -> EdgeKeyV {
        std::array<PV, 2> vs{pv_of(pi_), pv_of(pj_)};
        std::sort(vs.begin(), vs.end());
        vs[1].ox -= vs[0].ox;
        vs[1].oy -= vs[0].oy;
        vs[0].ox = 0;
        vs[0].oy = 0;
        return vs;
    };
    auto neighbor_of = [&](int ti, int u, int v) -> int {
        const std::vector<int>& lst = by_edge.at(std::minmax(u, v));
        int other = -1;
        for (int cand : lst)
            if (cand != ti) {
                if (other != -1) throw DegenerateTriangulation("edge with > 2 triangles");
                other = cand;
            }
        if (other == -1) throw DegenerateTriangulation("edge with 1 triangle near margin");
        return other;
    };

    std::map<EdgeKeyV, ArcSpec> arc_map;
    for (const auto& [key, inst] : node_instance) {
        const DelTri& t = tris[std::size_t(inst)];
        const std::array<std::array<int, 2>, 3> es{{{t.a, t.b}, {t.b, t.c}, {t.c, t.a}}};
        for (const auto& e : es) {
            EdgeKeyV ek = canon_edge(e[0], e[1]);
            if (arc_map.count(ek)) continue;
            int nb = neighbor_of(int(inst), e[0], e[1]);
            TriKey nb_key = canon_tri(tris[std::size_t(nb)]);
            NodeId na = node_ids.at(key), nbid = node_ids.at(nb_key);
            Vec3 pa{t.ccx, t.ccy, 0.0};
            Vec3 pb{tris[std::size_t(nb)].ccx, tris[std::size_t(nb)].ccy, 0.0};
            ArcSpec as;
            bool key_first = !(nb_key < key);
            if (key_first) {
                as.start = na;
                as.end = nbid;
                as.samples = {pa, pb};
            } else {
                as.start = nbid;
                as.end = na;
                as.samples = {pb, pa};
            }
            arc_map.emplace(ek, std::move(as));
        }
    }
    std::vector<ArcSpec> arcs;
    std::map<EdgeKeyV, ArcId> arc_ids;
    {
        ArcId id = 0;
        for (auto& [ek, as] : arc_map) {
            as.id = id;
            arc_ids.emplace(ek, id);
            arcs.push_back(as);
            ++id;
        }
    }

    // Faces: the fan of triangles around each base seed's central copy,
    // ordered by circumcenter angle (Voronoi cells are convex).
    int center_copy = -1;
    for (std::size_t k = 0; k < offsets.size(); ++k)
        if (offsets[k][0] == 0 && offsets[k][1] == 0) center_copy = int(k);
    std::vector<std::vector<int>> tris_at_point(pts.size());
    for (std::size_t ti = 0; ti < tris.size(); ++ti) {
        tris_at_point[std::size_t(tris[ti].a)].push_back(int(ti));
        tris_at_point[std::size_t(tris[ti].b)].push_back(int(ti));
        tris_at_point[std::size_t(tris[ti].c)].push_back(int(ti));
    }

    std::vector<FaceSpec> faces;
    for (int s = 0; s < n; ++s) {
        int pidx = center_copy * n + s;
        std::vector<int> fan = tris_at_point[std::size_t(pidx)];
        if (fan.size() < 3) throw DegenerateTriangulation("seed with tiny fan");
        const Vec3& sp = pts[std::size_t(pidx)];
        std::sort(fan.begin(), fan.end(), [&](int a, int b) {
            const DelTri &ta = tris[std::size_t(a)], &tb = tris[std::size_t(b)];
            return std::atan2(ta.ccy - sp.y, ta.ccx - sp.x) <
                   std::atan2(tb.ccy - sp.y, tb.ccx - sp.x);
        });
        FaceSpec fs;
        fs.id = FaceId(s);
        for (std::size_t k = 0; k < fan.size(); ++k) {
            int ti = fan[k], tj = fan[(k + 1) % fan.size()];
            const DelTri &t1 = tris[std::size_t(ti)], &t2 = tris[std::size_t(tj)];
            std::array<int, 3> v1{t1.a, t1.b, t1.c}, v2{t2.a, t2.b, t2.c};
            int shared_other = -1;
            for (int u : v1)
                for (int w : v2)
                    if (u == w && u != pidx) shared_other = u;
            if (shared_other == -1)
                throw DegenerateTriangulation("non-adjacent consecutive fan triangles");
            EdgeKeyV ek = canon_edge(pidx, shared_other);
            ArcId aid = arc_ids.at(ek);
            const ArcSpec& as = arcs[std::size_t(aid)];
            Vec3 step{t2.ccx - t1.ccx, t2.ccy - t1.ccy, 0.0};
            Vec3 canon = as.samples.back() - as.samples.front();
            bool forward = distance(step, canon) < distance(step, -canon);
            fs.walk.emplace_back(aid, forward);
        }
        faces.push_back(std::move(fs));
    }

    return build_mesh(nodes, arcs, faces, ManifoldContext::flat_torus(period, period),
                      provenance);
}

}  // namespace detail

/// Voronoi diagram of uniformly random seeds on the flat torus, as a mesh
/// with straight arcs. Generically every node has degree 3 and rho = 1;
/// degenerate seed configurations are retried with a 1e-9 perturbation, which
/// is recorded in the provenance field.
inline TilingMesh gen_voronoi_torus(int n_seeds, std::uint64_t rng_seed, double period = 1.0,
                                    int max_attempts = 8) {
    if (n_seeds < 2) throw InvalidSpec("voronoi needs n_seeds >= 2");
    Rng rng(rng_seed ^ 0x5eedbeefULL);
    std::vector<Vec3> seeds;
    seeds.resize(std::size_t(n_seeds));
    for (Vec3& s : seeds) s = {rng.next_double() * period, rng.next_double() * period, 0.0};

    for (int si = 0; si < n_seeds; ++si)
        for (int sj = si + 1; sj < n_seeds; ++sj)
            if (distance(seeds[std::size_t(si)], seeds[std::size_t(sj)]) < 1e-12)
                throw SeedCollision("seeds " + std::to_string(si) + " and " + std::to_string(sj) +
                                    " coincide");

    std::string base_prov = "voronoi_torus n_seeds=" + std::to_string(n_seeds) +
                            " rng_seed=" + std::to_string(rng_seed);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        try {
            std::string prov = base_prov;
            if (attempt > 0)
                prov += " perturbed=1e-9 attempt=" + std::to_string(attempt);
            TilingMesh mesh = detail::voronoi_torus_attempt(seeds, period, prov);
            // Reject non-generic output (degenerate pairs / normality issues).
            for (const Node& nd : mesh.nodes())
                if (node_degeneracy_count(mesh, nd.id) != 0)
                    throw detail::DegenerateTriangulation("non-generic node pair");
            if (!validate_normality(mesh).clean())
                throw detail::DegenerateTriangulation("normality violation");
            return mesh;
        } catch (const SeedCollision&) {
            throw;
        } catch (const InvalidSpec&) {
            throw;
        } catch (const TilingError&) {
            // Degenerate triangulation or an inconsistent quotient assembly;
            // perturb and retry.
            for (Vec3& s : seeds) {
                s.x += (rng.next_double() - 0.5) * 2e-9 * period;
                s.y += (rng.next_double() - 0.5) * 2e-9 * period;
                s.x -= std::floor(s.x / period) * period;
                s.y -= std::floor(s.y / period) * period;
            }
        }
    }
    throw SeedCollision("voronoi triangulation stayed degenerate after " +
                        std::to_string(max_attempts) + " perturbation attempts");
}

/// z = sqrt(1-x^2) - sqrt(1-y^2) +/- 1, the saddle caps of the 3D monohedral
/// prism construction.
inline double prism3d_surface(double x, double y, bool top) {
    if (std::abs(x) > 1.0 || std::abs(y) > 1.0)
        throw OutOfDomain("prism surface needs |x| <= 1 and |y| <= 1");
    double rx = std::sqrt(std::max(0.0, 1.0 - x * x));
    double ry = std::sqrt(std::max(0.0, 1.0 - y * y));
    return rx - ry + (top ? 1.0 : -1.0);
}

inline TilingMesh gen_monohedral_demo(MonohedralKind kind, int rows = 4, int cols = 4,
                                      int samples_per_arc = 64);

/// Construct one of the pattern families. Every generated mesh passes
/// validate_normality with zero violations and is a deterministic function of
/// its spec.
inline TilingMesh generate(const PatternSpec& spec) {
    std::string prov;
    TilingMesh mesh;
    switch (spec.family) {
        case PatternFamily::Honeycomb:
            prov = "honeycomb rows=" + std::to_string(spec.rows) +
                   " cols=" + std::to_string(spec.cols) + " manifold=" +
                   (spec.manifold == ManifoldKind::FlatTorus ? "flat_torus" : "plane_patch");
            mesh = detail::gen_honeycomb(spec, prov);
            break;
        case PatternFamily::Brick:
            prov = "brick rows=" + std::to_string(spec.rows) + " cols=" +
                   std::to_string(spec.cols) + " manifold=" +
                   (spec.manifold == ManifoldKind::FlatTorus ? "flat_torus" : "plane_patch");
            mesh = detail::gen_brick_like(spec, false, prov);
            break;
        case PatternFamily::Rooftile:
            prov = "rooftile rows=" + std::to_string(spec.rows) + " cols=" +
                   std::to_string(spec.cols) + " manifold=" +
                   (spec.manifold == ManifoldKind::FlatTorus ? "flat_torus" : "plane_patch");
            mesh = detail::gen_brick_like(spec, true, prov);
            break;
        case PatternFamily::SquareGrid:
            prov = "square_grid rows=" + std::to_string(spec.rows) + " cols=" +
                   std::to_string(spec.cols) + " manifold=" +
                   (spec.manifold == ManifoldKind::FlatTorus ? "flat_torus" : "plane_patch");
            mesh = detail::gen_square_grid(spec, prov);
            break;
        case PatternFamily::Platonic: {
            static const char* names[] = {"tetrahedron", "cube", "octahedron", "dodecahedron",
                                          "icosahedron"};
            prov = std::string("platonic ") + names[int(spec.platonic)] +
                   " radius=" + std::to_string(spec.edge_length);
            mesh = detail::gen_platonic(spec.platonic, spec.edge_length,
                                        std::max(8, spec.samples_per_arc / 2), prov);
            break;
        }
        case PatternFamily::VoronoiTorus:
            mesh = gen_voronoi_torus(spec.n_seeds, spec.rng_seed, spec.edge_length);
            break;
        case PatternFamily::MonohedralDemo:
            mesh = gen_monohedral_demo(spec.demo, spec.rows, spec.cols, spec.samples_per_arc);
            break;
    }
    ValidationReport rep = validate_normality(mesh);
    if (!rep.clean())
        throw InvalidSpec("generated mesh fails normality: " + rep.violations.front().message);
    return mesh;
}

/// Monohedral demo tilings: flat-torus quotients whose cells are pairwise
/// congruent whole tiles (the quotient of a periodic plane tiling).
inline TilingMesh gen_monohedral_demo(MonohedralKind kind, int rows, int cols,
                                      int samples_per_arc) {
    PatternSpec s;
    s.rows = rows;
    s.cols = cols;
    s.manifold = ManifoldKind::FlatTorus;
    s.samples_per_arc = samples_per_arc;
    switch (kind) {
        case MonohedralKind::Square: s.family = PatternFamily::SquareGrid; break;
        case MonohedralKind::BrickRect: s.family = PatternFamily::Brick; break;
        case MonohedralKind::RooftileCurved: s.family = PatternFamily::Rooftile; break;
    }
    TilingMesh mesh = generate(s);
    mesh.provenance = "monohedral_demo " + mesh.provenance;
    return mesh;
}

}  // namespace tiling
