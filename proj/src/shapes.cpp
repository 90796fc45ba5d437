#include "flatsel/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace flatsel {

namespace {

constexpr double kPi = std::numbers::pi;

// (nu+1) x (nv+1) samples of f(i, j), or nu x (nv+1) when wrapping in u.
Primitive grid(int nu, int nv, bool wrap_u, const std::function<Vec3(int, int)>& f) {
    Primitive p;
    const int cols = wrap_u ? nu : nu + 1;
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i < cols; ++i) p.vertices.push_back(f(i, j));
    auto id = [&](int i, int j) { return j * cols + (i % cols); };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            p.faces.push_back({a, b, c});
            p.faces.push_back({a, c, d});
        }
    p.labels.assign(p.faces.size(), 0);
    p.segment_is_sphere = {0};
    return p;
}

// Flat disk in the plane z = z0 with `rings` concentric rings of n points
// (outer ring angle k * 2pi / n matches the cylinder side) and a centre.
Primitive disk(int n, int rings, double radius, double z0) {
    Primitive p;
    for (int k = 0; k < rings; ++k) {
        const double r = radius * (rings - k) / rings;
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * kPi * i / n;
            p.vertices.emplace_back(r * std::cos(t), r * std::sin(t), z0);
        }
    }
    const int centre = static_cast<int>(p.vertices.size());
    p.vertices.emplace_back(0.0, 0.0, z0);
    for (int k = 0; k + 1 < rings; ++k)
        for (int i = 0; i < n; ++i) {
            const int a = k * n + i, b = k * n + (i + 1) % n;
            const int c = (k + 1) * n + (i + 1) % n, d = (k + 1) * n + i;
            p.faces.push_back({a, b, c});
            p.faces.push_back({a, c, d});
        }
    const int inner = (rings - 1) * n;
    for (int i = 0; i < n; ++i) p.faces.push_back({inner + i, inner + (i + 1) % n, centre});
    p.labels.assign(p.faces.size(), 0);
    p.segment_is_sphere = {0};
    return p;
}

Vec3 face_normal_of(const Primitive& p, const std::array<int, 3>& f) {
    return (p.vertices[f[1]] - p.vertices[f[0]]).cross(p.vertices[f[2]] - p.vertices[f[0]]);
}

}  // namespace

void Primitive::append(const Primitive& other) {
    const int off = static_cast<int>(vertices.size());
    const int loff = num_segments();
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (std::size_t i = 0; i < other.faces.size(); ++i) {
        const auto& f = other.faces[i];
        faces.push_back({f[0] + off, f[1] + off, f[2] + off});
        labels.push_back(other.labels[i] + loff);
    }
    segment_is_sphere.insert(segment_is_sphere.end(), other.segment_is_sphere.begin(), other.segment_is_sphere.end());
}

void Primitive::weld(double tol) {
    using Key = std::tuple<long long, long long, long long>;
    std::map<Key, std::vector<int>> buckets;
    std::vector<int> remap(vertices.size());
    std::vector<Vec3> kept;
    auto key = [&](const Vec3& x) {
        return Key{std::llround(std::floor(x.x() / tol)), std::llround(std::floor(x.y() / tol)),
                   std::llround(std::floor(x.z() / tol))};
    };
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        const Vec3& x = vertices[v];
        const auto [kx, ky, kz] = key(x);
        int found = -1;
        for (int dx = -1; dx <= 1 && found < 0; ++dx)
            for (int dy = -1; dy <= 1 && found < 0; ++dy)
                for (int dz = -1; dz <= 1 && found < 0; ++dz) {
                    auto it = buckets.find(Key{kx + dx, ky + dy, kz + dz});
                    if (it == buckets.end()) continue;
                    for (int w : it->second)
                        if ((kept[w] - x).norm() <= tol) {
                            found = w;
                            break;
                        }
                }
        if (found < 0) {
            found = static_cast<int>(kept.size());
            kept.push_back(x);
            buckets[Key{kx, ky, kz}].push_back(found);
        }
        remap[v] = found;
    }
    vertices = std::move(kept);
    std::vector<std::array<int, 3>> nf;
    std::vector<int> nl;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        std::array<int, 3> f{remap[faces[i][0]], remap[faces[i][1]], remap[faces[i][2]]};
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
        nf.push_back(f);
        nl.push_back(labels[i]);
    }
    faces = std::move(nf);
    labels = std::move(nl);
}

void Primitive::orient_outward(const Vec3& center) {
    for (auto& f : faces) {
        const Vec3 c = (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
        if (face_normal_of(*this, f).dot(c - center) < 0.0) std::swap(f[1], f[2]);
    }
}

void Primitive::transform(const std::function<Vec3(const Vec3&)>& f) {
    for (auto& v : vertices) v = f(v);
}

Primitive plane_grid(int nx, int ny, double sx, double sy) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("plane_grid: need at least one quad per axis");
    return grid(nx, ny, false, [&](int i, int j) { return Vec3(sx * i / nx, sy * j / ny, 0.0); });
}

namespace {

// Square side spanned by origin o and edge vectors a, b.
Primitive square(int n, const Vec3& o, const Vec3& a, const Vec3& b) {
    return grid(n, n, false, [&](int i, int j) { return Vec3(o + a * (double(i) / n) + b * (double(j) / n)); });
}

}  // namespace

Primitive cube(int n, double size) {
    if (n < 1) throw std::invalid_argument("cube: n must be positive");
    const double h = 0.5 * size;
    const Vec3 X(size, 0, 0), Y(0, size, 0), Z(0, 0, size);
    Primitive p;
    p.append(square(n, Vec3(-h, -h, -h), Y, Z));  // x-
    p.append(square(n, Vec3(h, -h, -h), Y, Z));   // x+
    p.append(square(n, Vec3(-h, -h, -h), X, Z));  // y-
    p.append(square(n, Vec3(-h, h, -h), X, Z));   // y+
    p.append(square(n, Vec3(-h, -h, -h), X, Y));  // z-
    p.append(square(n, Vec3(-h, -h, h), X, Y));   // z+
    p.weld(1e-9 * size);
    p.orient_outward(Vec3::Zero());
    return p;
}

Primitive three_sided_cube(int n, double size) {
    if (n < 1) throw std::invalid_argument("three_sided_cube: n must be positive");
    const Vec3 X(size, 0, 0), Y(0, size, 0), Z(0, 0, size);
    Primitive p;
    p.append(square(n, Vec3::Zero(), Y, Z));
    p.append(square(n, Vec3::Zero(), X, Z));
    p.append(square(n, Vec3::Zero(), X, Y));
    p.weld(1e-9 * size);
    p.orient_outward(Vec3::Constant(0.5 * size));
    return p;
}

Primitive cylinder(int n_around, int n_height, double radius, double height, bool caps, int cap_rings) {
    if (n_around < 3 || n_height < 1) throw std::invalid_argument("cylinder: need n_around >= 3, n_height >= 1");
    Primitive p = grid(n_around, n_height, true, [&](int i, int j) {
        const double t = 2.0 * kPi * i / n_around;
        return Vec3(radius * std::cos(t), radius * std::sin(t), height * j / n_height);
    });
    if (caps) {
        const int rings = cap_rings > 0 ? cap_rings : std::max(1, static_cast<int>(std::lround(n_around / (2.0 * kPi))));
        p.append(disk(n_around, rings, radius, 0.0));
        p.append(disk(n_around, rings, radius, height));
        p.weld(1e-9 * std::max(radius, height));
    }
    p.orient_outward(Vec3(0, 0, 0.5 * height));
    return p;
}

Primitive cone(int n_around, int n_height, double radius, double height, bool cap) {
    if (n_around < 3 || n_height < 1) throw std::invalid_argument("cone: need n_around >= 3, n_height >= 1");
    // rows 0 .. n_height-1 are rings shrinking toward the apex
    Primitive side = grid(n_around, n_height - 1, true, [&](int i, int j) {
        const double t = 2.0 * kPi * i / n_around;
        const double s = 1.0 - double(j) / n_height;
        return Vec3(s * radius * std::cos(t), s * radius * std::sin(t), height * (1.0 - s));
    });
    const int apex = static_cast<int>(side.vertices.size());
    side.vertices.emplace_back(0.0, 0.0, height);
    const int top = (n_height - 1) * n_around;
    for (int i = 0; i < n_around; ++i) {
        side.faces.push_back({top + i, top + (i + 1) % n_around, apex});
        side.labels.push_back(0);
    }
    Primitive p = side;
    if (cap) {
        const int rings = std::max(1, static_cast<int>(std::lround(n_around / (2.0 * kPi))));
        p.append(disk(n_around, rings, radius, 0.0));
        p.weld(1e-9 * std::max(radius, height));
    }
    p.orient_outward(Vec3(0, 0, 0.3 * height));
    return p;
}

Primitive icosphere(int subdivisions, double radius) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& x : v) x.normalize();
    std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> nf;
        nf.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
            nf.push_back({tri[0], a, c});
            nf.push_back({tri[1], b, a});
            nf.push_back({tri[2], c, b});
            nf.push_back({a, b, c});
        }
        f = std::move(nf);
    }
    Primitive p;
    for (auto& x : v) p.vertices.push_back(radius * x);
    p.faces = std::move(f);
    p.labels.assign(p.faces.size(), 0);
    p.segment_is_sphere = {1};
    p.orient_outward(Vec3::Zero());
    return p;
}

Primitive tetrahedron(int n) {
    if (n < 1) throw std::invalid_argument("tetrahedron: n must be positive");
    const double s = 1.0 / std::sqrt(3.0);
    const std::array<Vec3, 4> c = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
    const int sides[4][3] = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    Primitive p;
    for (const auto& side : sides) {
        Primitive q;
        const Vec3 A = c[side[0]], B = c[side[1]], C = c[side[2]];
        std::vector<std::vector<int>> id(n + 1, std::vector<int>(n + 1, -1));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                id[i][j] = static_cast<int>(q.vertices.size());
                q.vertices.push_back(A + (B - A) * (double(i) / n) + (C - A) * (double(j) / n));
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; i + j < n; ++j) {
                q.faces.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
                if (i + j + 2 <= n) q.faces.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
            }
        q.labels.assign(q.faces.size(), 0);
        q.segment_is_sphere = {0};
        p.append(q);
    }
    p.weld(1e-9);
    p.orient_outward(Vec3::Zero());
    return p;
}

Primitive hemisphere(int n_rings, int n_around, double radius) {
    if (n_rings < 1 || n_around < 3) throw std::invalid_argument("hemisphere: need n_rings >= 1, n_around >= 3");
    Primitive p;
    p.vertices.emplace_back(0.0, 0.0, radius);
    for (int k = 1; k <= n_rings; ++k) {
        const double phi = 0.5 * kPi * k / n_rings;
        for (int i = 0; i < n_around; ++i) {
            const double t = 2.0 * kPi * i / n_around;
            p.vertices.emplace_back(radius * std::sin(phi) * std::cos(t), radius * std::sin(phi) * std::sin(t),
                                    radius * std::cos(phi));
        }
    }
    auto id = [&](int k, int i) { return 1 + (k - 1) * n_around + (i % n_around); };
    for (int i = 0; i < n_around; ++i) p.faces.push_back({0, id(1, i), id(1, i + 1)});
    for (int k = 1; k < n_rings; ++k)
        for (int i = 0; i < n_around; ++i) {
            p.faces.push_back({id(k, i), id(k + 1, i), id(k + 1, i + 1)});
            p.faces.push_back({id(k, i), id(k + 1, i + 1), id(k, i + 1)});
        }
    p.labels.assign(p.faces.size(), 0);
    p.segment_is_sphere = {1};
    p.orient_outward(Vec3::Zero());
    return p;
}

Primitive torus(int n_major, int n_minor, double major, double minor) {
    if (n_major < 3 || n_minor < 3) throw std::invalid_argument("torus: need at least 3 segments per direction");
    Primitive p;
    for (int j = 0; j < n_minor; ++j)
        for (int i = 0; i < n_major; ++i) {
            const double u = 2.0 * kPi * i / n_major, v = 2.0 * kPi * j / n_minor;
            const double r = major + minor * std::cos(v);
            p.vertices.emplace_back(r * std::cos(u), r * std::sin(u), minor * std::sin(v));
        }
    auto id = [&](int i, int j) { return (j % n_minor) * n_major + (i % n_major); };
    for (int j = 0; j < n_minor; ++j)
        for (int i = 0; i < n_major; ++i) {
            p.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            p.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    p.labels.assign(p.faces.size(), 0);
    p.segment_is_sphere = {0};
    return p;
}

}  // namespace flatsel
