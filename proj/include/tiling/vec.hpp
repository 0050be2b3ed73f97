#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tiling {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

/// 3-component vector. Flat charts (plane, torus) keep z == 0.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_ = 0.0) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Unsigned angle between two vectors, in [0, pi]. Robust near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Signed angle from a to b in the oriented plane with normal n, in (-pi, pi].
inline double signed_angle(const Vec3& a, const Vec3& b, const Vec3& n) {
    double s = dot(cross(a, b), n);
    double c = dot(a, b);
    double ang = std::atan2(s, c);
    // atan2(-0.0, negative) yields -pi; fold the reversal case onto +pi.
    if (ang <= -kPi) ang = kPi;
    return ang;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi) a = kPi;
    return a;
}

/// Project v onto the plane orthogonal to unit normal n.
inline Vec3 project_to_plane(const Vec3& v, const Vec3& n) {
    return v - n * dot(v, n);
}

/// Deterministic orthonormal tangent frame (e1, e2) for unit normal n,
/// right-handed: e1 x e2 = n.
inline std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
    Vec3 ref = std::abs(n.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 e1 = normalized(cross(ref, n));
    Vec3 e2 = cross(n, e1);
    return {e1, e2};
}

/// splitmix-seeded mt19937_64 would be overkill here; generators and the
/// deregularizer need only a small deterministic stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // xorshift64* — fixed algorithm so streams are stable across platforms.
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    /// Uniform double in [0, 1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t next_index(std::uint64_t n) {
        std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace tiling
