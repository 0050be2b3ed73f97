#pragma once

#include <string>

#include "tiling/errors.hpp"
#include "tiling/vec.hpp"

namespace tiling {

enum class ManifoldKind { PlanePatch, FlatTorus, Sphere };

/// Which manifold a tiling lives on, plus its metric conventions.
///
/// Plane patches are finite pieces of the Euclidean plane; the unbounded
/// region is represented by explicit outer faces that are excluded from all
/// cell statistics. Flat torus charts are the fundamental rectangle
/// [0,period_x) x [0,period_y); arcs crossing the seam store unwrapped sample
/// points plus a lattice shift per endpoint. Sphere charts are points on the
/// embedded sphere of the given radius; tangent data lives in the tangent
/// plane of the relevant node.
struct ManifoldContext {
    ManifoldKind kind = ManifoldKind::PlanePatch;
    double period_x = 0.0;  // flat torus only
    double period_y = 0.0;
    double radius = 0.0;    // sphere only

    static ManifoldContext plane_patch() { return {ManifoldKind::PlanePatch, 0, 0, 0}; }

    static ManifoldContext flat_torus(double px, double py) {
        if (!(px > 0.0) || !(py > 0.0))
            throw InvalidSpec("flat torus periods must be positive");
        return {ManifoldKind::FlatTorus, px, py, 0};
    }

    static ManifoldContext sphere(double r) {
        if (!(r > 0.0)) throw InvalidSpec("sphere radius must be positive");
        return {ManifoldKind::Sphere, 0, 0, r};
    }

    bool is_closed() const { return kind != ManifoldKind::PlanePatch; }
    bool is_flat() const { return kind != ManifoldKind::Sphere; }

    /// Euler characteristic of the carrying manifold. Plane patches are
    /// treated as disks (chi = 1 for the interior complex convention).
    int chi() const {
        switch (kind) {
            case ManifoldKind::PlanePatch: return 1;
            case ManifoldKind::FlatTorus: return 0;
            case ManifoldKind::Sphere: return 2;
        }
        return 0;
    }

    Vec3 period_vec() const { return {period_x, period_y, 0.0}; }

    std::string name() const {
        switch (kind) {
            case ManifoldKind::PlanePatch: return "plane_patch";
            case ManifoldKind::FlatTorus: return "flat_torus";
            case ManifoldKind::Sphere: return "sphere";
        }
        return "?";
    }
};

}  // namespace tiling
