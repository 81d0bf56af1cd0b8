#include "wcnet/laminations.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>

namespace wcnet {

namespace {

// union-find over vertices
int find(std::vector<int>& p, int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
}

long side_shifted(const EdgeCoordinates& n, const Triangulation& T, int e, long s) {
    if (!T.interior[e]) return s;
    auto it = n.find(e);
    return (it == n.end() ? 0 : it->second) + s;
}

bool feasible(const EdgeCoordinates& n, const Triangulation& T, long s) {
    for (auto& t : T.triangles) {
        long a = side_shifted(n, T, t.e[0], s), b = side_shifted(n, T, t.e[1], s), c = side_shifted(n, T, t.e[2], s);
        if (a < 0 || b < 0 || c < 0) return false;
        if (a > b + c || b > a + c || c > a + b) return false;
    }
    return true;
}

TwistedSeries exact(const Vec& v, const Rational& c = 1) {
    TwistedSeries s;
    s.level = INFINITY;
    s.add(v, c);
    return s;
}

TwistedSeries one(int rank) { return exact(Vec(rank, 0)); }

struct Algebra {
    ChargeLattice lat;
    int rank = 0;  // interior edges only

    Vec gen(int basis_idx, long k) const {
        Vec v(lat.rank, 0);
        v[basis_idx] = k;
        return v;
    }
    TwistedSeries mul(const TwistedSeries& a, const TwistedSeries& b) const { return twisted_multiply(a, b, lat); }
    TwistedSeries mul(std::initializer_list<TwistedSeries> xs) const {
        TwistedSeries r = one(lat.rank);
        for (auto& x : xs) r = mul(r, x);
        return r;
    }
    TwistedSeries add(std::initializer_list<TwistedSeries> xs) const {
        TwistedSeries r;
        r.level = INFINITY;
        for (auto& x : xs) r = series_add(r, x);
        return r;
    }
    // prefix products of inverse generators along a fan
    std::vector<TwistedSeries> fan_products(const std::vector<int>& fan, const Triangulation& T) const {
        std::vector<TwistedSeries> out;
        TwistedSeries p = one(lat.rank);
        for (int e : fan) {
            p = mul(p, exact(gen(T.basis_index[e], -1)));
            out.push_back(p);
        }
        return out;
    }
};

TwistedSeries sum(const std::vector<TwistedSeries>& xs) {
    TwistedSeries r;
    r.level = INFINITY;
    for (auto& x : xs) r = series_add(r, x);
    return r;
}

}

long Lamination::points(int t, int slot) const {
    auto& a = arcs.at(t);
    return a[slot] + a[(slot + 2) % 3];
}

void Lamination::validate(const Triangulation& T) const {
    if (arcs.size() != T.triangles.size()) throw InvariantError("arc table does not match the triangulation");
    if ((int)peripheral.size() != T.n_vertices) throw InvariantError("peripheral weights do not match the vertices");
    for (auto& a : arcs)
        for (long x : a)
            if (x < 0) throw InvariantError("negative arc count");
    for (size_t e = 0; e < T.edges.size(); ++e) {
        auto& sides = T.edge_sides[e];
        long p = points(sides[0].first, sides[0].second);
        if (sides.size() == 2) {
            if (points(sides[1].first, sides[1].second) != p)
                throw InvariantError("marked points differ on the two sides of an edge");
        } else {
            auto [u, w] = T.edges[e];
            if (p + peripheral[u] + peripheral[w] != 0)
                throw InvariantError("weights at a boundary segment do not sum to zero");
        }
    }
}

CiliatedSurface ciliated_surface(const Triangulation& T) {
    CiliatedSurface S;
    S.tri = T;
    std::vector<int> parent(T.n_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<bool> on_boundary(T.n_vertices, false);
    for (size_t e = 0; e < T.edges.size(); ++e) {
        if (T.interior[e]) continue;
        auto [u, w] = T.edges[e];
        if (T.is_hole[u] || T.is_hole[w]) throw InputError("a hole lies on a boundary segment");
        on_boundary[u] = on_boundary[w] = true;
        parent[find(parent, u)] = find(parent, w);
    }
    std::map<int, int> count;
    for (int v = 0; v < T.n_vertices; ++v) {
        if (T.is_hole[v]) {
            S.holes.push_back(v);
            continue;
        }
        if (!on_boundary[v]) throw InputError("vertex is neither a cilium nor a hole");
        ++count[find(parent, v)];
    }
    for (auto [r, c] : count) S.cilia_per_boundary.push_back(c);
    return S;
}

std::array<long, 3> triangle_arcs(const std::array<long, 3>& m) {
    long total = m[0] + m[1] + m[2];
    if (total % 2) throw InputError("odd number of marked points");
    for (int i = 0; i < 3; ++i)
        if (m[i] < 0 || 2 * m[i] > total) throw InputError("side numbers violate the triangle inequality");
    std::array<long, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = (m[i] + m[(i + 1) % 3] - m[(i + 2) % 3]) / 2;
    return out;
}

long minimal_shift(const EdgeCoordinates& n, const Triangulation& T) {
    for (auto [e, v] : n)
        if (e < 0 || e >= (int)T.edges.size() || !T.interior[e]) throw InputError("coordinate on a non-interior edge");
    long hi = 0;
    for (auto [e, v] : n) hi += std::abs(v);
    for (long s = 0; s <= hi + 1; ++s)
        if (feasible(n, T, s)) return s;
    throw InvariantError("no feasible shift");
}

Lamination lamination_from_coordinates(const EdgeCoordinates& n, const Triangulation& T, std::optional<long> shift) {
    long s = minimal_shift(n, T);
    if (shift) {
        if (*shift < s || !feasible(n, T, *shift)) throw InputError("shift below the minimal feasible one");
        s = *shift;
    }
    Lamination lam;
    lam.shift = s;
    for (auto& t : T.triangles) {
        std::array<long, 3> m;
        for (int i = 0; i < 3; ++i) m[i] = 2 * side_shifted(n, T, t.e[i], s);
        lam.arcs.push_back(triangle_arcs(m));
    }
    lam.peripheral.assign(T.n_vertices, -s);
    lam.validate(T);
    return lam;
}

EdgeCoordinates coordinates_from_lamination(const Lamination& lam, const Triangulation& T) {
    lam.validate(T);
    EdgeCoordinates out;
    for (int e : T.interior_edges) {
        auto [t, slot] = T.edge_sides[e][0];
        auto [u, w] = T.edges[e];
        long x = lam.points(t, slot) + lam.peripheral[u] + lam.peripheral[w];
        if (x % 2) throw InvariantError("half-integer coordinate");
        if (x) out[e] = x / 2;
    }
    return out;
}

ChargeLattice lamination_lattice(const Triangulation& T, const HatBasis& basis, bool holes) {
    ChargeLattice lat = basis.lattice(T);
    if (!holes) return lat;
    int r = lat.rank;
    lat.rank = r + 4;
    for (auto& row : lat.pairing) row.resize(r + 4, 0);
    lat.pairing.resize(r + 4, std::vector<long>(r + 4, 0));
    lat.central_charge.resize(r + 4, 0);
    return lat;
}

TwistedSeries lift_lamination(int e0, int sign, const Triangulation& T, const HatBasis& basis, double L,
                              const std::optional<HolesVariant>& holes) {
    if (sign != 1 && sign != -1) throw InputError("sign must be +1 or -1");
    if (e0 < 0 || e0 >= (int)T.edges.size() || !T.interior[e0]) throw InputError("edge is not interior");
    if ((int)basis.charge.size() != T.rank()) throw InputError("basis does not match the triangulation");
    Algebra A;
    A.lat = lamination_lattice(T, basis, holes.has_value());
    A.rank = T.rank();
    Fans F = T.fans(e0);
    auto quad = T.quadrilateral(e0);  // c, a, d, b
    int c = quad[0], a = quad[1], d = quad[2], b = quad[3];
    int i0 = T.basis_index[e0];
    auto x = exact(A.gen(i0, 1)), xi = exact(A.gen(i0, -1)), u = one(A.lat.rank);
    auto E = A.fan_products(F.e, T), Fp = A.fan_products(F.f, T), G = A.fan_products(F.g, T),
         H = A.fan_products(F.h, T);
    auto cross = [&](const std::vector<TwistedSeries>& P, const std::vector<TwistedSeries>& Q) {
        std::vector<TwistedSeries> out;
        for (auto& p : P)
            for (auto& q : Q) out.push_back(A.mul(p, q));
        return sum(out);
    };
    auto S = [&](const std::vector<TwistedSeries>& P) { return sum(P); };
    TwistedSeries r;
    if (!holes) {
        for (int v : quad)
            if (T.is_hole[v]) throw InputError("the quadrilateral of the edge has a hole; a hole variant is required");
        if (sign > 0) {
            auto onex = A.add({u, x});
            auto sq = A.add({x, series_scale(u, 2), xi});  // x (1 + x^-1)^2
            r = A.add({x, A.mul(onex, S(E)), A.mul(onex, S(Fp)), A.mul(sq, cross(E, Fp))});
        } else {
            r = A.mul({xi, A.add({u, S(G)}), A.add({u, S(H)})});
        }
        return truncate_height(r, L, A.lat);
    }
    int r0 = A.rank;
    auto eps = [&](int hole, bool sigma) {
        Vec v(A.lat.rank, 0);
        v[r0 + 2 * hole + (sigma ? 1 : 0)] = 1;
        return v;
    };
    auto mono = [&](std::initializer_list<Vec> vs) {
        Vec v(A.lat.rank, 0);
        for (auto& w : vs) v = vadd(v, w);
        return exact(v);
    };
    Vec g0 = A.gen(i0, 1);
    auto onex = A.add({u, x}), onexi = A.add({u, xi});
    switch (holes->kind) {
    case HoleCase::OneOuter: {
        if (sign < 0) throw InputError("outer-hole variants lift the positive lamination");
        if (T.is_hole[c] == T.is_hole[d]) throw InputError("exactly one outer vertex must be a hole");
        auto e1 = eps(0, false), s1 = eps(0, true);
        auto ge = mono({g0, e1});
        auto ecoef = A.add({A.mul(mono({e1}), onex), A.mul(mono({s1}), onexi)});
        r = A.add({ge, A.mul(ecoef, S(E)), A.mul({mono({e1}), onex, S(Fp)}),
                   A.mul({ge, onexi, onexi, cross(E, Fp)})});
        break;
    }
    case HoleCase::BothOuter: {
        if (sign < 0) throw InputError("outer-hole variants lift the positive lamination");
        if (!T.is_hole[c] || !T.is_hole[d]) throw InputError("both outer vertices must be holes");
        auto e1 = eps(0, false), e2 = eps(1, false), s1 = eps(0, true);
        auto gee = mono({g0, e1, e2}), ee = mono({e1, e2});
        r = A.add({gee, A.mul(A.add({gee, mono({s1, e2})}), S(E)), A.mul({ee, onex, S(Fp)}),
                   A.mul({ee, onex, cross(E, Fp)})});
        break;
    }
    case HoleCase::OneInner: {
        if (sign > 0) throw InputError("inner-hole variants lift the negative lamination");
        if (T.is_hole[a] == T.is_hole[b]) throw InputError("exactly one inner vertex must be a hole");
        auto e1 = eps(0, false), s1 = eps(0, true);
        auto xe = mono({vneg(g0), e1});
        r = A.add({xe, A.mul(xe, S(G)), A.mul(A.add({xe, mono({s1})}), S(H)), A.mul(xe, cross(G, H))});
        break;
    }
    case HoleCase::BothInner: {
        if (sign > 0) throw InputError("inner-hole variants lift the negative lamination");
        if (!T.is_hole[a] || !T.is_hole[b]) throw InputError("both inner vertices must be holes");
        auto e1 = eps(0, false), e2 = eps(1, false);
        auto xee = mono({vneg(g0), e1, e2}), ee = mono({e1, e2});
        Rational cc = holes->c ? 1 : 0;
        r = A.add({xee, A.mul({ee, A.add({series_scale(u, cc), xi}), S(G)}),
                   series_scale(A.mul(xee, S(H)), cc), series_scale(A.mul(xee, cross(G, H)), cc)});
        break;
    }
    }
    return truncate_height(r, L, A.lat);
}

bool Delta2Cone::contains(cplx z, double tol) const {
    cplx w = z - apex;
    double det = d1.real() * d2.imag() - d1.imag() * d2.real();
    double al = (w.real() * d2.imag() - w.imag() * d2.real()) / det;
    double be = (d1.real() * w.imag() - d1.imag() * w.real()) / det;
    double scale = 1 + std::abs(w);
    return al >= -tol * scale && be >= -tol * scale;
}

Delta2Cone delta2_cone(const ChargeLattice& lat, int rank) {
    double lo = 0, hi = -M_PI;
    for (int i = 0; i < rank; ++i) {
        cplx z = lat.central_charge[i];
        if (z.imag() <= 0) throw InputError("generators must have Im Z > 0");
        double a = std::arg(-z);
        lo = std::min(lo, a), hi = std::max(hi, a);
    }
    Delta2Cone K;
    if (rank == 0) return K;
    if (hi - lo < 0.1) {
        double m = 0.5 * (lo + hi);
        lo = std::max(m - 0.05, -M_PI + 1e-3);
        hi = std::min(m + 0.05, -1e-3);
    }
    K.d1 = std::polar(1.0, lo), K.d2 = std::polar(1.0, hi);
    double det = K.d1.real() * K.d2.imag() - K.d1.imag() * K.d2.real();
    double amin = 0, bmin = 0;
    for (int i = 0; i < rank; ++i) {
        cplx w = lat.central_charge[i];
        amin = std::min(amin, (w.real() * K.d2.imag() - w.imag() * K.d2.real()) / det);
        bmin = std::min(bmin, (K.d1.real() * w.imag() - K.d1.imag() * w.real()) / det);
    }
    K.apex = amin * K.d1 + bmin * K.d2;
    return K;
}

long total_degree(const Vec& v, int rank) {
    long d = 0;
    for (int i = 0; i < rank; ++i) d += std::abs(v[i]);
    return d;
}

long positive_degree(const Vec& v, int rank) {
    long d = 0;
    for (int i = 0; i < rank; ++i) d += std::max(v[i], 0L);
    return d;
}

ApproxResult approximate_generator(int e0, int sign, const Triangulation& T, const HatBasis& basis, double L) {
    ChargeLattice lat = basis.lattice(T);
    int n = lat.rank;
    double top = 0;
    for (auto z : lat.central_charge) {
        if (z.imag() <= 0) throw InputError("generators must have Im Z > 0");
        top = std::max(top, z.imag());
    }
    if (!T.interior.at(e0)) throw InputError("edge is not interior");
    // -Im Z is additive and each substituted factor but one is nonnegative on it
    double H = L + top + 1e-9;
    auto cut = [&](const TwistedSeries& s) {
        TwistedSeries r;
        r.level = INFINITY;
        for (auto& [v, c] : s.terms)
            if (-lat.Z(v).imag() < H) r.terms.emplace(v, c);
        return r;
    };
    std::vector<TwistedSeries> plus(n), minus(n);
    for (int i = 0; i < n; ++i) {
        plus[i] = cut(lift_lamination(T.interior_edges[i], 1, T, basis, INFINITY));
        minus[i] = cut(lift_lamination(T.interior_edges[i], -1, T, basis, INFINITY));
    }
    int i0 = T.basis_index[e0];
    Vec tv(n, 0);
    tv[i0] = sign;
    TwistedSeries target = exact(tv);
    ApproxResult res;
    TwistedSeries P = sign > 0 ? plus[i0] : minus[i0];
    res.steps = 1;
    for (;;) {
        TwistedSeries D = cut(series_sub(target, P));
        if (truncate_height(D, L, lat).empty()) break;
        long deg = LONG_MAX;
        double h = INFINITY;
        for (auto& [v, c] : D.terms) {
            deg = std::min(deg, total_degree(v, n));
            h = std::min(h, -lat.Z(v).imag());
        }
        res.defects.push_back({deg, h});
        if (res.steps > 10000) throw InvariantError("approximation does not stabilize");
        TwistedSeries Q;
        Q.level = INFINITY;
        for (auto& [v, c] : D.terms) {
            if (total_degree(v, n) != deg) continue;
            if (positive_degree(v, n) > 1) throw InvariantError("defect has degree above one in positive generators");
            TwistedSeries word = one(n), sub = one(n);
            // the positive factor goes first so that partial products only grow in -Im Z
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_partition(order.begin(), order.end(), [&](int i) { return v[i] > 0; });
            for (int i : order)
                for (long k = 0; k < std::abs(v[i]); ++k) {
                    Vec g(n, 0);
                    g[i] = v[i] > 0 ? 1 : -1;
                    word = twisted_multiply(word, exact(g), lat);
                    sub = cut(twisted_multiply(sub, v[i] > 0 ? plus[i] : minus[i], lat));
                }
            // word = eps [v]
            Rational eps = word.coeff(v);
            Q = series_add(Q, series_scale(sub, c * eps));
        }
        P = cut(series_add(P, Q));
        ++res.steps;
    }
    res.series = truncate_height(P, L, lat);
    res.series.level = L;
    return res;
}

}
