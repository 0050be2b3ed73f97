#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tiling/geometry.hpp"
#include "tiling/mesh.hpp"
#include "tiling/metrics.hpp"
#include "tiling/vec.hpp"

namespace tiling {

/// Selection of generic node pairs to be bent into degenerate ones.
struct DeregPlan {
    double target_rho = 1.0;
    std::uint64_t rng_seed = 0;
    double blend_fraction = 0.25;  // portion of each incident arc reshaped near the node
    bool greedy = false;
    double angle_tol = kDefaultAngleTol;
    std::vector<std::pair<NodeId, std::size_t>> selected;  // (node, pair index)
};

/// Corner-degree averages predicted by the proof's degree evolution:
/// n*(rho) = n - 2(1-rho), v*(rho) = v (n - 2(1-rho)) / n.
inline std::pair<double, double> predicted_degrees(double n_bar, double v_bar, double rho) {
    double n_star = n_bar - 2.0 * (1.0 - rho);
    return {n_star, v_bar * n_star / n_bar};
}

namespace detail {

inline bool tangents_degenerate(const Vec3& t1, const Vec3& t2, double tol) {
    return angle_between(t1, t2) >= kPi - tol;
}

/// Per-node simulation of tangent retargeting. Slots follow the node's star;
/// selections freeze the slots they touch, so later selections at the same
/// node chain off the already-fixed directions.
class NodeDeregSim {
public:
    NodeDeregSim(const TilingMesh& mesh, NodeId node, double angle_tol)
        : angle_tol_(angle_tol) {
        const std::vector<HalfEdgeId>& star = mesh.node_star(node);
        std::array<Vec3, 3> frame = mesh.node_frame(node);
        e1_ = frame[0];
        e2_ = frame[1];
        for (HalfEdgeId h : star) {
            Slot s;
            s.he = h;
            s.tangent = mesh.he_tangent(h);
            const HalfEdge& he = mesh.half_edge(h);
            const Arc& a = mesh.arc(he.arc);
            Vec3 d2 = he.forward ? a.samples[1] - a.samples[0]
                                 : a.samples[a.samples.size() - 2] - a.samples.back();
            s.delta = wrap_angle(bearing(d2) - bearing(s.tangent));
            slots_.push_back(s);
        }
        const std::size_t n = slots_.size();
        for (std::size_t j = 0; j < n; ++j) {
            if (tangents_degenerate(slots_[j].tangent, slots_[(j + 1) % n].tangent, angle_tol)) {
                ++r_;
                slots_[j].frozen = true;
                slots_[(j + 1) % n].frozen = true;
            }
        }
        base_r_ = r_;
    }

    int current_r() const { return r_; }
    int base_r() const { return base_r_; }

    /// Attempt to make pair (star[j], star[j+1]) degenerate. Returns the gain
    /// in r (0, 1 or 2 for degree-2 nodes) and commits on success; returns -1
    /// if infeasible and max_gain otherwise constrains overshoot.
    int try_select(std::size_t j, int max_gain) {
        const std::size_t n = slots_.size();
        if (j >= n) return -1;
        Slot& a = slots_[j];
        Slot& b = slots_[(j + 1) % n];
        if (tangents_degenerate(a.tangent, b.tangent, angle_tol_)) return 0;  // already smooth
        if (r_ >= 2) return -1;

        Vec3 ta, tb;
        if (a.frozen && b.frozen) return -1;
        if (a.frozen) {
            ta = a.tangent;
            tb = -a.tangent;
        } else if (b.frozen) {
            ta = -b.tangent;
            tb = b.tangent;
        } else {
            Vec3 d = a.tangent - b.tangent;
            if (norm(d) < 1e-9) return -1;  // tangential pair, no symmetric split
            ta = normalized(d);
            tb = -ta;
        }

        // Simulate the retargeted star and recount degeneracies.
        std::vector<Slot> sim = slots_;
        auto retarget = [&](Slot& s, const Vec3& t) {
            if (distance(s.tangent, t) < 1e-15) return;
            // Tie-break: the blend bends back toward the original direction.
            s.delta = wrap_angle(bearing(s.tangent) - bearing(t));
            s.delta = (s.delta > 0 ? 1.0 : -1.0) * 1e-9;
            s.tangent = t;
            s.retargeted = true;
        };
        retarget(sim[j], ta);
        retarget(sim[(j + 1) % n], tb);

        std::vector<std::size_t> order = star_order(sim);
        int r_new = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const Slot& u = sim[order[k]];
            const Slot& v = sim[order[(k + 1) % n]];
            if (tangents_degenerate(u.tangent, v.tangent, angle_tol_)) ++r_new;
        }
        if (r_new > 2) return -1;
        int gain = r_new - r_;
        if (gain <= 0 || gain > max_gain) return -1;
        // Previously degenerate adjacencies must survive the reordering.
        if (!degenerate_pairs_preserved(sim, order)) return -1;

        slots_ = std::move(sim);
        slots_[j].frozen = true;
        slots_[(j + 1) % n].frozen = true;
        r_ = r_new;
        return gain;
    }

    /// Target tangents for slots whose direction changed.
    void collect_targets(std::map<HalfEdgeId, Vec3>& out) const {
        for (const Slot& s : slots_)
            if (s.retargeted) out[s.he] = s.tangent;
    }

private:
    struct Slot {
        HalfEdgeId he = kInvalidId;
        Vec3 tangent;
        double delta = 0.0;
        bool frozen = false;
        bool retargeted = false;
    };

    double bearing(const Vec3& t) const { return std::atan2(dot(t, e2_), dot(t, e1_)); }

    std::vector<std::size_t> star_order(const std::vector<Slot>& sim) const {
        std::vector<std::size_t> order(sim.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            double bx = bearing(sim[x].tangent), by = bearing(sim[y].tangent);
            if (bx != by) return bx > by;
            if (sim[x].delta != sim[y].delta) return sim[x].delta > sim[y].delta;
            return sim[x].he < sim[y].he;
        });
        return order;
    }

    bool degenerate_pairs_preserved(const std::vector<Slot>& sim,
                                    const std::vector<std::size_t>& order) const {
        const std::size_t n = sim.size();
        // Degenerate adjacency in the committed state must persist in sim.
        std::vector<std::size_t> cur_order = star_order(slots_);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t i0 = cur_order[k], i1 = cur_order[(k + 1) % n];
            if (!tangents_degenerate(slots_[i0].tangent, slots_[i1].tangent, angle_tol_))
                continue;
            // Find the unordered pair in the simulated cyclic order.
            bool adjacent = false;
            for (std::size_t m = 0; m < n; ++m) {
                std::size_t a = order[m], b = order[(m + 1) % n];
                if ((a == i0 && b == i1) || (a == i1 && b == i0)) {
                    adjacent = tangents_degenerate(sim[a].tangent, sim[b].tangent, angle_tol_);
                    break;
                }
            }
            if (!adjacent) return false;
        }
        return true;
    }

    double angle_tol_;
    Vec3 e1_, e2_;
    std::vector<Slot> slots_;
    int r_ = 0;
    int base_r_ = 0;
};

struct ResolvedPlan {
    std::map<HalfEdgeId, Vec3> targets;
    std::map<NodeId, int> expected_r;
};

/// Replay a selection list: per-half-edge target tangents plus the resulting
/// degeneracy count per touched node.
inline ResolvedPlan resolve_plan(const TilingMesh& mesh, const DeregPlan& plan) {
    std::map<NodeId, NodeDeregSim> sims;
    for (const auto& [node, j] : plan.selected) {
        auto it = sims.find(node);
        if (it == sims.end())
            it = sims.emplace(node, NodeDeregSim(mesh, node, plan.angle_tol)).first;
        if (it->second.try_select(j, 2) < 0)
            throw InfeasibleTarget("plan entry (node " + std::to_string(node) + ", pair " +
                                   std::to_string(j) + ") is not applicable");
    }
    ResolvedPlan rp;
    for (const auto& [node, sim] : sims) {
        sim.collect_targets(rp.targets);
        rp.expected_r[node] = sim.current_r();
    }
    return rp;
}

inline std::pair<Vec3, Vec3> polyline_at(const std::vector<Vec3>& pts, double s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double seg = distance(pts[i - 1], pts[i]);
        if (acc + seg >= s || i + 1 == pts.size()) {
            double t = seg > 0 ? std::min(1.0, std::max(0.0, (s - acc) / seg)) : 0.0;
            Vec3 p = pts[i - 1] + (pts[i] - pts[i - 1]) * t;
            Vec3 d = normalized(pts[i] - pts[i - 1]);
            return {p, d};
        }
        acc += seg;
    }
    return {pts.back(), normalized(pts.back() - pts[pts.size() - 2])};
}

/// Reshape the first `blend_len` of a sample run (oriented from the node) so
/// it leaves along `new_tan` and rejoins the old geometry with matching
/// position and direction (cubic Hermite blend).
inline std::vector<Vec3> blend_run(const std::vector<Vec3>& run, double blend_len,
                                   const Vec3& new_tan, int region_samples = 16) {
    auto [pB, dB] = polyline_at(run, blend_len);
    std::vector<Vec3> out;
    out.reserve(std::size_t(region_samples) + run.size());
    const Vec3& p0 = run.front();
    Vec3 m0 = new_tan * blend_len, m1 = dB * blend_len;
    for (int k = 0; k < region_samples; ++k) {
        double t = double(k) / double(region_samples);
        double t2 = t * t, t3 = t2 * t;
        Vec3 p = p0 * (2 * t3 - 3 * t2 + 1) + m0 * (t3 - 2 * t2 + t) + pB * (-2 * t3 + 3 * t2) +
                 m1 * (t3 - t2);
        out.push_back(p);
    }
    out.push_back(pB);
    // Keep the untouched tail samples beyond the blend boundary.
    double acc = 0.0;
    for (std::size_t i = 1; i < run.size(); ++i) {
        acc += distance(run[i - 1], run[i]);
        if (acc > blend_len + 1e-15) out.push_back(run[i]);
    }
    return out;
}

inline bool segments_cross(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    auto orient = [](const Vec3& p, const Vec3& q, const Vec3& r) {
        double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    if (distance(a, c) < 1e-14 || distance(a, d) < 1e-14 || distance(b, c) < 1e-14 ||
        distance(b, d) < 1e-14)
        return false;  // sharing an endpoint is not a crossing
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace detail

/// Choose pairs to degenerate so the result is target_rho-regular. Selection
/// is uniform over feasible pairs (or favors the smallest bend in greedy
/// mode) and deterministic given the seed.
inline DeregPlan plan_dereg(const TilingMesh& mesh, double target_rho, std::uint64_t rng_seed,
                            double blend_fraction = 0.25, bool greedy = false,
                            double angle_tol = kDefaultAngleTol) {
    if (!(target_rho >= 0.0 && target_rho <= 1.0))
        throw InfeasibleTarget("target_rho must lie in [0, 1]");
    if (!(blend_fraction > 0.0 && blend_fraction < 0.5))
        throw InfeasibleTarget("blend_fraction must lie in (0, 1/2)");

    DeregPlan plan;
    plan.target_rho = target_rho;
    plan.rng_seed = rng_seed;
    plan.blend_fraction = blend_fraction;
    plan.greedy = greedy;
    plan.angle_tol = angle_tol;

    const long long V = (long long)mesh.num_nodes();
    std::map<NodeId, detail::NodeDeregSim> sims;
    long long existing = 0;
    for (const Node& nd : mesh.nodes()) {
        auto it = sims.emplace(nd.id, detail::NodeDeregSim(mesh, nd.id, angle_tol)).first;
        existing += it->second.current_r();
        if (it->second.current_r() > 2)
            throw DegeneracyOverflow("node " + std::to_string(nd.id));
    }
    double current_rho = 1.0 - double(existing) / (2.0 * double(V));
    if (target_rho > current_rho + 1e-12)
        throw InfeasibleTarget("target_rho " + std::to_string(target_rho) +
                               " above current rho " + std::to_string(current_rho));

    long long needed = std::llround(2.0 * double(V) * (1.0 - target_rho)) - existing;
    if (needed <= 0) return plan;

    struct Candidate {
        NodeId node;
        std::size_t pair;
        double angle;
    };
    std::vector<Candidate> candidates;
    for (const Node& nd : mesh.nodes()) {
        const std::vector<HalfEdgeId>& star = nd.star;
        for (std::size_t j = 0; j < star.size(); ++j) {
            PairClassification pc = classify_pair(mesh, nd.id, j, angle_tol);
            if (!pc.degenerate) candidates.push_back(Candidate{nd.id, j, pc.angle});
        }
    }
    if (greedy) {
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.angle != b.angle) return a.angle > b.angle;  // closest to pi first
            if (a.node != b.node) return a.node < b.node;
            return a.pair < b.pair;
        });
    } else {
        Rng rng(rng_seed ^ 0xdece9ULL);
        for (std::size_t i = candidates.size(); i > 1; --i)
            std::swap(candidates[i - 1], candidates[rng.next_index(i)]);
    }

    long long count = 0;
    bool progress = true;
    while (count < needed && progress) {
        progress = false;
        for (const Candidate& c : candidates) {
            if (count >= needed) break;
            detail::NodeDeregSim& sim = sims.at(c.node);
            int gain = sim.try_select(c.pair, int(std::min<long long>(2, needed - count)));
            if (gain > 0) {
                plan.selected.emplace_back(c.node, c.pair);
                count += gain;
                if (gain == 2) {
                    // Degree-2 nodes: the twin cyclic pair degenerates with it.
                    std::size_t twin_pair = (c.pair + 1) % mesh.node_star(c.node).size();
                    plan.selected.emplace_back(c.node, twin_pair);
                }
                progress = true;
            }
        }
    }
    if (count < needed)
        throw InfeasibleTarget("only " + std::to_string(count) + " of " + std::to_string(needed) +
                               " pairs are reachable under the per-node cap");
    return plan;
}

/// Apply the plan: bend the selected arcs' node-end geometry so every
/// selected pair becomes degenerate, leaving all combinatorial tables
/// untouched. Collisions are retried with halved blend fractions.
inline TilingMesh apply_dereg(const TilingMesh& mesh, const DeregPlan& plan) {
    detail::ResolvedPlan rp = detail::resolve_plan(mesh, plan);
    const std::map<HalfEdgeId, Vec3>& targets = rp.targets;

    double frac = plan.blend_fraction;
    for (int attempt = 0; attempt <= 8; ++attempt, frac *= 0.5) {
        // Rebuild arc geometry with this blend fraction.
        std::map<ArcId, std::vector<Vec3>> new_samples;
        std::map<ArcId, std::pair<std::optional<Vec3>, std::optional<Vec3>>> new_tans;
        bool collision = false;

        for (const auto& [he_id, target] : targets) {
            const HalfEdge& he = mesh.half_edge(he_id);
            const Arc& a = mesh.arc(he.arc);
            std::vector<Vec3> run = new_samples.count(a.id)
                                        ? new_samples[a.id]
                                        : std::vector<Vec3>(a.samples.begin(), a.samples.end());
            if (!he.forward) std::reverse(run.begin(), run.end());
            double blend_len = frac * a.length;
            run = detail::blend_run(run, blend_len, target);
            if (!he.forward) std::reverse(run.begin(), run.end());
            new_samples[a.id] = std::move(run);
            auto& tans = new_tans[a.id];
            if (he.forward)
                tans.first = target;
            else
                tans.second = target;
        }

        // Local collision check: blended regions against the other arcs
        // meeting the same node.
        for (const auto& [he_id, target] : targets) {
            const HalfEdge& he = mesh.half_edge(he_id);
            const Arc& a = mesh.arc(he.arc);
            NodeId node = he.forward ? a.start : a.end;
            std::vector<Vec3> mine = new_samples[a.id];
            if (!he.forward) std::reverse(mine.begin(), mine.end());
            double limit = frac * a.length * 1.5;
            std::vector<Vec3> region;
            double acc = 0.0;
            region.push_back(mine.front());
            for (std::size_t i = 1; i < mine.size() && acc < limit; ++i) {
                acc += distance(mine[i - 1], mine[i]);
                region.push_back(mine[i]);
            }
            for (HalfEdgeId other : mesh.node_star(node)) {
                if (other == he_id) continue;
                const HalfEdge& ohe = mesh.half_edge(other);
                const Arc& oa = mesh.arc(ohe.arc);
                std::vector<Vec3> theirs = new_samples.count(oa.id)
                                               ? new_samples[oa.id]
                                               : std::vector<Vec3>(oa.samples.begin(),
                                                                   oa.samples.end());
                if (!ohe.forward) std::reverse(theirs.begin(), theirs.end());
                // Compare against their near-node stretch only.
                std::vector<Vec3> oregion;
                double oacc = 0.0;
                oregion.push_back(theirs.front());
                for (std::size_t i = 1; i < theirs.size() && oacc < limit; ++i) {
                    oacc += distance(theirs[i - 1], theirs[i]);
                    oregion.push_back(theirs[i]);
                }
                for (std::size_t i = 1; i < region.size() && !collision; ++i)
                    for (std::size_t k = 1; k < oregion.size() && !collision; ++k)
                        if (detail::segments_cross(region[i - 1], region[i], oregion[k - 1],
                                                   oregion[k]))
                            collision = true;
                if (collision) break;
            }
            if (collision) break;
        }
        if (collision) continue;

        // Assemble the new mesh from the original tables plus updated arcs.
        std::vector<NodeSpec> nodes;
        for (const Node& nd : mesh.nodes()) nodes.push_back(NodeSpec{nd.id, nd.pos});
        std::vector<ArcSpec> arcs;
        for (const Arc& a : mesh.arcs()) {
            ArcSpec as;
            as.id = a.id;
            as.start = a.start;
            as.end = a.end;
            as.samples = new_samples.count(a.id)
                             ? new_samples[a.id]
                             : std::vector<Vec3>(a.samples.begin(), a.samples.end());
            auto it = new_tans.find(a.id);
            as.tan_start = (it != new_tans.end() && it->second.first) ? *it->second.first
                                                                      : a.tan_start;
            as.tan_end = (it != new_tans.end() && it->second.second) ? *it->second.second
                                                                     : a.tan_end;
            arcs.push_back(std::move(as));
        }
        std::vector<FaceSpec> faces;
        for (const Face& f : mesh.faces()) {
            if (f.outer) continue;
            faces.push_back(FaceSpec{f.id, f.walk});
        }
        TilingMesh out = build_mesh(nodes, arcs, faces, mesh.manifold,
                                    mesh.provenance + " | deregularized target_rho=" +
                                        std::to_string(plan.target_rho));

        bool ok = true;
        for (const auto& [node, r_exp] : rp.expected_r)
            if (node_degeneracy_count(out, node, plan.angle_tol) != r_exp) ok = false;
        if (!ok) continue;
        return out;
    }
    throw GeometryCollision("blended arcs keep intersecting after 8 halvings");
}

struct RayCheck {
    double ratio_before = 0;
    double ratio_after = 0;
    double max_deviation = 0;
};

/// Ray law of the symbolic plane: deregularization moves the corner point
/// along the origin ray through the combinatorial point.
inline RayCheck verify_ray(const TilingMetrics& before, const TilingMetrics& after) {
    if (std::abs(after.n_star_bar) < 1e-15)
        throw ZeroCornerDegree("n*_bar vanished; the ray law is vacuous");
    RayCheck rc;
    rc.ratio_before = before.v_bar / before.n_bar;
    rc.ratio_after = after.v_star_bar / after.n_star_bar;
    rc.max_deviation = std::abs(rc.ratio_before - rc.ratio_after);
    bool on_segment = after.n_star_bar >= -1e-12 && after.n_star_bar <= before.n_bar + 1e-12;
    if (rc.max_deviation > 1e-9 || !on_segment)
        throw TilingError("ray-law violation: v/n = " + std::to_string(rc.ratio_before) +
                          " vs v*/n* = " + std::to_string(rc.ratio_after));
    return rc;
}

}  // namespace tiling
