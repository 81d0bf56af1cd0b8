#include "wcnet/homology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "json.hpp"

namespace wcnet {

void Triangulation::finalize() {
    int ne = int(edges.size());
    edge_sides.assign(ne, {});
    for (size_t t = 0; t < triangles.size(); ++t) {
        auto& T = triangles[t];
        for (int i = 0; i < 3; ++i) {
            int e = T.e[i];
            if (e < 0 || e >= ne) throw InputError("triangle refers to a missing edge");
            auto [a, b] = edges[e];
            int u = T.v[i], w = T.v[(i + 1) % 3];
            if (!((a == u && b == w) || (a == w && b == u))) throw InputError("triangle edge endpoints mismatch");
            edge_sides[e].push_back({int(t), i});
        }
        if (T.e[0] == T.e[1] || T.e[1] == T.e[2] || T.e[0] == T.e[2])
            throw InputError("self-folded triangle");
    }
    interior.assign(ne, false);
    interior_edges.clear();
    basis_index.assign(ne, -1);
    for (int e = 0; e < ne; ++e) {
        if (edge_sides[e].size() > 2 || edge_sides[e].empty()) throw InputError("edge must border one or two triangles");
        if (edges[e].first == edges[e].second) throw InputError("loop edges are not supported");
        if (edge_sides[e].size() == 2) {
            interior[e] = true;
            basis_index[e] = int(interior_edges.size());
            interior_edges.push_back(e);
        }
    }
}

std::array<int, 4> Triangulation::quadrilateral(int e0) const {
    if (!interior.at(e0)) throw InputError("edge is not interior");
    auto [t1, s1] = edge_sides[e0][0];
    auto [t2, s2] = edge_sides[e0][1];
    auto& A = triangles[t1];
    auto& B = triangles[t2];
    int a = A.v[s1], b = A.v[(s1 + 1) % 3], c = A.v[(s1 + 2) % 3];
    int d = B.v[(s2 + 2) % 3];
    return {c, a, d, b};
}

Fans Triangulation::fans(int e0) const {
    if (!interior.at(e0)) throw InputError("edge is not interior");
    auto [t1, s1] = edge_sides[e0][0];
    auto [t2, s2] = edge_sides[e0][1];
    auto& A = triangles[t1];
    auto& B = triangles[t2];
    // A = (a,b,c) with e0 = ab, B = (b,a,d); quadrilateral c,a,d,b counterclockwise
    int a = A.v[s1], b = A.v[(s1 + 1) % 3], c = A.v[(s1 + 2) % 3];
    int d = B.v[(s2 + 2) % 3];
    if (B.v[s2] != b || B.v[(s2 + 1) % 3] != a) throw InputError("inconsistent orientation at edge");
    auto fan = [&](int v, int start) {
        std::vector<int> out;
        int cur = start;
        for (size_t guard = 0; guard <= edges.size(); ++guard) {
            if (!interior[cur]) break;
            out.push_back(cur);
            int next = -1;
            for (auto [t, s] : edge_sides[cur]) {
                auto& T = triangles[t];
                if (T.v[(s + 1) % 3] == v && T.v[s] != v) next = T.e[(s + 1) % 3];
            }
            if (next < 0 || next == start) break;
            cur = next;
        }
        return out;
    };
    Fans F;
    F.e = fan(c, A.e[(s1 + 2) % 3]);
    F.f = fan(d, B.e[(s2 + 2) % 3]);
    F.g = fan(b, A.e[(s1 + 1) % 3]);
    F.h = fan(a, B.e[(s2 + 1) % 3]);
    return F;
}

Triangulation polygon_triangulation(int n, const std::vector<std::array<int, 3>>& tris) {
    Triangulation T;
    T.n_vertices = n;
    T.is_hole.assign(n, false);
    std::map<std::pair<int, int>, int> idx;
    auto edge = [&](int u, int v) {
        auto key = std::minmax(u, v);
        auto it = idx.find(key);
        if (it != idx.end()) return it->second;
        int k = int(T.edges.size());
        T.edges.push_back(key);
        idx[key] = k;
        return k;
    };
    for (auto tri : tris) {
        // counterclockwise on the boundary circle means increasing cyclic order
        std::sort(tri.begin(), tri.end());
        Triangle t;
        t.v = tri;
        for (int i = 0; i < 3; ++i) t.e[i] = edge(tri[i], tri[(i + 1) % 3]);
        T.triangles.push_back(t);
    }
    T.finalize();
    return T;
}

Triangulation random_polygon_triangulation(int n, std::mt19937& rng) {
    std::vector<std::array<int, 3>> tris;
    std::function<void(std::vector<int>)> split = [&](std::vector<int> poly) {
        if (poly.size() < 3) return;
        int m = int(poly.size());
        std::uniform_int_distribution<int> d(1, m - 2);
        int k = d(rng);
        tris.push_back({poly[0], poly[k], poly[m - 1]});
        split(std::vector<int>(poly.begin(), poly.begin() + k + 1));
        split(std::vector<int>(poly.begin() + k, poly.end()));
    };
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    split(all);
    return polygon_triangulation(n, tris);
}

std::vector<std::vector<long>> pairing_from_triangulation(const Triangulation& T) {
    int r = T.rank();
    std::vector<std::vector<long>> M(r, std::vector<long>(r, 0));
    for (auto& t : T.triangles)
        for (int i = 0; i < 3; ++i) {
            int e = T.basis_index[t.e[i]], f = T.basis_index[t.e[(i + 1) % 3]];
            if (e < 0 || f < 0) continue;
            // around their common vertex e comes after f counterclockwise
            M[f][e] += 1;
            M[e][f] -= 1;
        }
    return M;
}

ChargeLattice HatBasis::lattice(const Triangulation& T) const {
    ChargeLattice lat;
    lat.rank = int(edges.size());
    lat.central_charge = charge;
    lat.pairing = pairing_from_triangulation(T);
    lat.validate();
    return lat;
}

NetworkTriangulation triangulation_from_network(const QuadraticDifferential& q, double phase, double cap) {
    int nz = int(q.zeros.size());
    int nc = q.cilia();
    std::vector<std::array<TrajectorySegment, 3>> sep(nz);
    for (int i = 0; i < nz; ++i)
        for (int k = 0; k < 3; ++k) {
            auto s = integrate_separatrix(q, i, k, phase, cap);
            if (s.terminus == Terminus::HitZero) throw InputError("phase is active: separatrix hits a zero");
            if (s.terminus == Terminus::LengthCapped) throw CapError("separatrix did not escape within the cap");
            sep[i][k] = std::move(s);
        }
    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i < nz; ++i) {
        std::array<int, 3> c{sep[i][0].cilium, sep[i][1].cilium, sep[i][2].cilium};
        if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) throw InputError("separatrices of one zero share a cilium");
        tris.push_back(c);
    }
    NetworkTriangulation out;
    out.phase = phase;
    out.tri = polygon_triangulation(nc, tris);
    if ((int)out.tri.triangles.size() != nz || out.tri.rank() != nc - 3)
        throw InputError("separatrix endpoints do not form a triangulation");
    // triangle t comes from zero t (sorting keeps the set of cilia)
    auto ray_to = [&](int z, int cil) {
        for (int k = 0; k < 3; ++k)
            if (sep[z][k].cilium == cil) return k;
        return -1;
    };
    const cplx e = std::polar(1.0, phase);
    for (int e0 : out.tri.interior_edges) {
        auto [c1, c2] = out.tri.edges[e0];
        int za = out.tri.edge_sides[e0][0].first, zb = out.tri.edge_sides[e0][1].first;
        if (za > zb) std::swap(za, zb);
        auto& pa = sep[za][ray_to(za, c1)];
        auto& pb = sep[zb][ray_to(zb, c1)];
        std::vector<cplx> path(pa.points);
        path.insert(path.end(), pb.points.rbegin(), pb.points.rend());
        cplx Z = 2.0 * period(q, path, pa.start_root);
        if (std::imag(std::conj(e) * Z) < 0) Z = -Z;
        out.basis.edges.push_back(e0);
        out.basis.charge.push_back(Z);
        out.basis.cilia.push_back({c1, c2});
        out.basis.zeros.push_back({za, zb});
    }
    return out;
}

Vec class_from_charge(cplx hat, const std::vector<cplx>& Z, double tol) {
    int r = int(Z.size());
    double thr = tol * (1 + std::abs(hat));
    auto residual = [&](const Vec& n) {
        cplx s = 0;
        for (int i = 0; i < r; ++i) s += double(n[i]) * Z[i];
        return std::abs(s - hat);
    };
    std::vector<Vec> hits;
    auto consider = [&](const Vec& n) {
        if (residual(n) < thr && std::find(hits.begin(), hits.end(), n) == hits.end()) hits.push_back(n);
    };
    if (r == 0) throw ClassError("empty basis", false);
    if (r == 1) {
        long n = std::lround(std::real(hat / Z[0]));
        for (long d = -1; d <= 1; ++d) consider({n + d});
    } else {
        // pick the most independent pair for the real solve, enumerate the rest
        int p = 0, s = 1;
        double best = -1;
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j) {
                double det = std::abs(std::imag(std::conj(Z[i]) * Z[j]));
                if (det > best) best = det, p = i, s = j;
            }
        if (best < 1e-12) throw ClassError("degenerate period matrix", false);
        double mn = INFINITY;
        for (auto z : Z) mn = std::min(mn, std::abs(z));
        long B = r == 2 ? 0 : std::min<long>(6, long(std::ceil(2 * std::abs(hat) / mn)) + 1);
        std::vector<int> rest;
        for (int i = 0; i < r; ++i)
            if (i != p && i != s) rest.push_back(i);
        Vec n(r, 0);
        std::function<void(size_t)> rec = [&](size_t k) {
            if (k == rest.size()) {
                cplx t = hat;
                for (int i : rest) t -= double(n[i]) * Z[i];
                double a = std::real(Z[p]), b = std::real(Z[s]), c = std::imag(Z[p]), d = std::imag(Z[s]);
                double det = a * d - b * c;
                double x = (std::real(t) * d - b * std::imag(t)) / det;
                double y = (a * std::imag(t) - c * std::real(t)) / det;
                long X = std::lround(x), Y = std::lround(y);
                for (long dx = -1; dx <= 1; ++dx)
                    for (long dy = -1; dy <= 1; ++dy) {
                        n[p] = X + dx;
                        n[s] = Y + dy;
                        consider(n);
                    }
                return;
            }
            for (long v = -B; v <= B; ++v) {
                n[rest[k]] = v;
                rec(k + 1);
            }
        };
        rec(0);
    }
    if (hits.empty()) throw ClassError("charge is not an integer combination of the basis periods", false);
    if (hits.size() > 1) throw ClassError("ambiguous lattice class", true);
    return hits[0];
}

Vec class_from_periods(const SaddleConnection& sc, const HatBasis& basis, double tol) {
    return class_from_charge(sc.hat_charge, basis.charge, tol);
}

BpsRay bps_cycle(CycleKind kind, double phase, const CycleClasses& c) {
    BpsRay r;
    r.phase = phase;
    const Vec& g0 = c.g0;
    switch (kind) {
    case CycleKind::Case1:
        r.content = {{g0, 1, g0}};
        break;
    case CycleKind::Case4a:
        r.content = {{g0, -2, vneg(vadd(c.gt, c.gb))}};
        break;
    case CycleKind::Fixture3a:
        r.content = {{g0, -1, vneg(c.gb)}};
        break;
    case CycleKind::Fixture3b:
        r.content = {{g0, 2, vadd(g0, c.g1)}, {vscale(g0, 2), -1, vneg(vadd(g0, c.g1))}};
        break;
    case CycleKind::Fixture4b:
        r.content = {{g0, 2, vadd(g0, c.g1)}, {vscale(g0, 2), -2, vneg(vadd(vadd(g0, c.g1), c.g2))}};
        break;
    }
    return r;
}

BpsRay bps_cycle(const Classification& cls, double phase, const CycleClasses& c) {
    switch (cls.kind) {
    case RayCase::Case1: return bps_cycle(CycleKind::Case1, phase, c);
    case RayCase::Case4a: return bps_cycle(CycleKind::Case4a, phase, c);
    default: throw InputError("ray is not certified as rank one");
    }
}

std::string triangulation_to_json(const Triangulation& T) {
    nlohmann::ordered_json j;
    j["vertices"] = T.n_vertices;
    std::vector<int> holes;
    for (int i = 0; i < T.n_vertices; ++i)
        if (T.is_hole[i]) holes.push_back(i);
    j["holes"] = holes;
    auto edges = nlohmann::ordered_json::array();
    for (auto [a, b] : T.edges) edges.push_back({a, b});
    j["edges"] = edges;
    auto tris = nlohmann::ordered_json::array();
    for (auto& t : T.triangles) tris.push_back({{"v", t.v}, {"e", t.e}});
    j["triangles"] = tris;
    auto fans = nlohmann::ordered_json::array();
    for (int e : T.interior_edges) {
        auto F = T.fans(e);
        fans.push_back({{"edge", e}, {"e", F.e}, {"f", F.f}, {"g", F.g}, {"h", F.h}});
    }
    j["fans"] = fans;
    return j.dump(2);
}

Triangulation triangulation_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    Triangulation T;
    T.n_vertices = j.at("vertices").get<int>();
    T.is_hole.assign(T.n_vertices, false);
    if (j.contains("holes"))
        for (int h : j["holes"]) T.is_hole.at(h) = true;
    for (auto& e : j.at("edges")) T.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    for (auto& t : j.at("triangles")) {
        Triangle tr;
        tr.v = t.at("v").get<std::array<int, 3>>();
        tr.e = t.at("e").get<std::array<int, 3>>();
        T.triangles.push_back(tr);
    }
    T.finalize();
    return T;
}

}
