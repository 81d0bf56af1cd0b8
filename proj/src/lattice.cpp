#include "wcnet/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wcnet {

namespace {

double wrap2pi(double a) {
    a = std::fmod(a, 2 * M_PI);
    if (a < 0) a += 2 * M_PI;
    return a;
}

bool keep(const Vec& v, double L, const ChargeLattice& lat) { return lat.absZ(v) < L - kHeightTol; }

// generalized binomial coefficient
Rational binom(long m, long k) {
    Rational r = 1;
    for (long i = 0; i < k; ++i) {
        r *= Rational(m - i);
        r /= Rational(i + 1);
    }
    return r;
}

}

void ChargeLattice::validate() const {
    if (rank <= 0) throw InputError("lattice rank must be positive");
    if ((int)pairing.size() != rank || (int)central_charge.size() != rank)
        throw InputError("lattice data has wrong size");
    for (int i = 0; i < rank; ++i) {
        if ((int)pairing[i].size() != rank) throw InputError("pairing row has wrong size");
        for (int j = 0; j < rank; ++j)
            if (pairing[i][j] != -pairing[j][i]) throw InputError("pairing is not antisymmetric");
    }
}

long ChargeLattice::pair(const Vec& a, const Vec& b) const {
    long s = 0;
    for (int i = 0; i < rank; ++i) {
        if (!a[i]) continue;
        for (int j = 0; j < rank; ++j) s += a[i] * pairing[i][j] * b[j];
    }
    return s;
}

cplx ChargeLattice::Z(const Vec& v) const {
    cplx z = 0;
    for (int i = 0; i < rank; ++i) z += double(v[i]) * central_charge[i];
    return z;
}

Vec ChargeLattice::basis(int i, long s) const {
    Vec v(rank, 0);
    v[i] = s;
    return v;
}

Vec vadd(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}
Vec vsub(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}
Vec vscale(const Vec& a, long k) {
    Vec r(a);
    for (auto& x : r) x *= k;
    return r;
}
Vec vneg(const Vec& a) { return vscale(a, -1); }
bool vzero(const Vec& a) {
    return std::all_of(a.begin(), a.end(), [](long x) { return x == 0; });
}
long vgcd(const Vec& a) {
    long g = 0;
    for (long x : a) g = std::gcd(g, std::labs(x));
    return g;
}
std::string vstr(const Vec& a) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << ")";
    return os.str();
}

Rational TwistedSeries::coeff(const Vec& v) const {
    auto it = terms.find(v);
    return it == terms.end() ? Rational(0) : it->second;
}

void TwistedSeries::add(const Vec& v, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = terms.emplace(v, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
}

std::string TwistedSeries::str() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [v, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << c.get_str() << "*" << vstr(v);
    }
    return os.str();
}

TwistedSeries monomial(const Vec& v, double L, const ChargeLattice& lat, const Rational& c) {
    TwistedSeries s;
    s.level = L;
    if (keep(v, L, lat)) s.add(v, c);
    return s;
}

TwistedSeries truncate_height(const TwistedSeries& a, double L, const ChargeLattice& lat) {
    TwistedSeries r;
    r.level = std::min(a.level, L);
    for (auto& [v, c] : a.terms)
        if (keep(v, L, lat)) r.terms.emplace(v, c);
    return r;
}

TwistedSeries twisted_multiply(const TwistedSeries& a, const TwistedSeries& b, const ChargeLattice& lat) {
    if (std::abs(a.level - b.level) > kHeightTol) throw InputError("truncation levels differ");
    for (auto* s : {&a, &b})
        if (!s->terms.empty() && (int)s->terms.begin()->first.size() != lat.rank)
            throw InputError("lattice rank mismatch");
    TwistedSeries r;
    r.level = a.level;
    for (auto& [v, c] : a.terms)
        for (auto& [w, d] : b.terms) {
            Vec u = vadd(v, w);
            if (!keep(u, r.level, lat)) continue;
            Rational x = c * d;
            if (lat.pair(v, w) & 1) x = -x;
            r.add(u, x);
        }
    return r;
}

TwistedSeries series_add(const TwistedSeries& a, const TwistedSeries& b) {
    TwistedSeries r = a;
    r.level = std::min(a.level, b.level);
    for (auto& [v, c] : b.terms) r.add(v, c);
    return r;
}

TwistedSeries series_sub(const TwistedSeries& a, const TwistedSeries& b) { return series_add(a, series_scale(b, -1)); }

TwistedSeries series_scale(const TwistedSeries& a, const Rational& c) {
    TwistedSeries r;
    r.level = a.level;
    if (c == 0) return r;
    for (auto& [v, x] : a.terms) r.terms.emplace(v, x * c);
    return r;
}

double height(const TwistedSeries& a, const ChargeLattice& lat) {
    double h = INFINITY;
    for (auto& [v, c] : a.terms) h = std::min(h, lat.absZ(v));
    return h;
}

bool series_equal(const TwistedSeries& a, const TwistedSeries& b) { return a.terms == b.terms; }

void Sector::validate() const {
    double w = theta_hi - theta_lo;
    if (!(w > 0 && w < M_PI)) throw InputError("sector opening must lie strictly between 0 and pi");
    if (support_cone) {
        double a = support_cone->first, b = support_cone->second;
        if (!(b - a >= 0 && b - a < M_PI)) throw InputError("support cone opening must lie in [0, pi)");
        // opposite cone [a+pi, b+pi] must avoid [lo, hi]
        double s = wrap2pi(a + M_PI - theta_lo);
        double e = s + (b - a);
        bool hit = s <= w + 1e-12 || e >= 2 * M_PI - 1e-12;
        if (hit) throw InputError("opposite support cone meets the sector");
    }
}

bool Sector::contains_phase(double phi) const {
    double d = wrap2pi(phi - theta_lo + 1e-12) - 1e-12;
    return d <= theta_hi - theta_lo + 1e-12;
}

bool Sector::in_support(cplx z) const {
    if (!support_cone) return true;
    cplx u = z - translate;
    if (std::abs(u) < 1e-12) return true;
    double d = wrap2pi(std::arg(u) - support_cone->first + 1e-9) - 1e-9;
    return d <= support_cone->second - support_cone->first + 1e-9;
}

Vec BpsRay::primitive() const {
    if (content.empty()) return {};
    Vec p = content.front().vector;
    long g0 = vgcd(p);
    for (auto& x : p) x /= g0;
    return p;
}

BpsRay simple_ray(const Vec& v, long omega, const ChargeLattice& lat) {
    BpsRay r;
    r.phase = std::arg(lat.Z(v));
    r.content.push_back({v, omega, vscale(v, omega)});
    return r;
}

TwistedSeries k_apply(const BpsRay& ray, const Vec& alpha, double L, const ChargeLattice& lat) {
    TwistedSeries out;
    out.level = L;
    if (ray.content.empty()) {
        if (keep(alpha, L, lat)) out.add(alpha, 1);
        return out;
    }
    Vec g = ray.primitive();
    double zg = lat.absZ(g);
    long K = (long)std::ceil((L + lat.absZ(alpha)) / zg) + 1;
    std::vector<Rational> poly(K + 1, 0);
    poly[0] = 1;
    long ga = lat.pair(g, alpha);
    for (auto& c : ray.content) {
        long n = vgcd(c.vector);
        long m = c.omega * n * ga;
        if (m == 0) continue;
        std::vector<Rational> f(K + 1, 0);
        for (long k = 0; k * n <= K; ++k) {
            Rational b = binom(m, k);
            if (m > 0 && k > m) break;
            f[k * n] = (k & 1) ? Rational(-b) : b;
        }
        std::vector<Rational> prod(K + 1, 0);
        for (long i = 0; i <= K; ++i) {
            if (poly[i] == 0) continue;
            for (long j = 0; i + j <= K; ++j)
                if (f[j] != 0) prod[i + j] += poly[i] * f[j];
        }
        poly.swap(prod);
    }
    for (long k = 0; k <= K; ++k) {
        if (poly[k] == 0) continue;
        Vec u = vadd(vscale(g, k), alpha);
        if (!keep(u, L, lat)) continue;
        Rational x = poly[k];
        if ((k * ga) & 1) x = -x;
        out.add(u, x);
    }
    return out;
}

TwistedSeries k_apply(const BpsRay& ray, const TwistedSeries& target, double L, const ChargeLattice& lat) {
    TwistedSeries out;
    out.level = L;
    for (auto& [v, c] : target.terms) {
        TwistedSeries t = k_apply(ray, v, L, lat);
        for (auto& [w, d] : t.terms) out.add(w, c * d);
    }
    return out;
}

bool dt_exp_check(const BpsRay& ray, const Vec& alpha, double L, const ChargeLattice& lat) {
    TwistedSeries rhs = k_apply(ray, alpha, L, lat);
    if (ray.content.empty()) return series_equal(rhs, monomial(alpha, L, lat));
    Vec g = ray.primitive();
    double zg = lat.absZ(g);
    long K = (long)std::ceil((L + lat.absZ(alpha)) / zg) + 1;
    // DT = -sum Omega sum_n [n v]/n^2, indexed by multiple of g
    std::map<long, Rational> dt;
    for (auto& c : ray.content) {
        long m0 = vgcd(c.vector);
        for (long n = 1; n * m0 <= K; ++n) dt[n * m0] -= Rational(c.omega) / Rational(n * n);
    }
    // series in the multiple of g carried on top of alpha
    auto vecof = [&](long k) { return vadd(vscale(g, k), alpha); };
    auto D = [&](const std::map<long, Rational>& s) {
        std::map<long, Rational> r;
        for (auto& [k, c] : s) {
            Vec beta = vecof(k);
            for (auto& [j, d] : dt) {
                if (k + j > K || d == 0) continue;
                Vec w = vscale(g, j);
                long p = lat.pair(w, beta);
                if (p == 0) continue;
                Rational x = c * d * p;
                if (p & 1) x = -x;
                r[k + j] += x;
            }
        }
        return r;
    };
    std::map<long, Rational> term{{0, Rational(1)}}, sum{{0, Rational(1)}};
    for (long n = 1; n <= K && !term.empty(); ++n) {
        term = D(term);
        for (auto& [k, c] : term) c /= n;
        for (auto& [k, c] : term) sum[k] += c;
    }
    TwistedSeries lhs;
    lhs.level = L;
    for (auto& [k, c] : sum) {
        Vec u = vecof(k);
        if (keep(u, L, lat)) lhs.add(u, c);
    }
    return series_equal(lhs, rhs);
}

std::vector<BpsRay> merge_rays(std::vector<BpsRay> rays, double tol) {
    std::sort(rays.begin(), rays.end(), [](auto& a, auto& b) { return a.phase < b.phase; });
    std::vector<BpsRay> out;
    for (auto& r : rays) {
        if (!out.empty() && std::abs(out.back().phase - r.phase) < tol) {
            for (auto& c : r.content) {
                auto it = std::find_if(out.back().content.begin(), out.back().content.end(),
                                       [&](auto& d) { return d.vector == c.vector; });
                if (it == out.back().content.end())
                    out.back().content.push_back(c);
                else {
                    it->omega += c.omega;
                    it->cycle = vadd(it->cycle, c.cycle);
                }
            }
        } else
            out.push_back(r);
    }
    return out;
}

AutomorphismWord ordered_word(std::vector<BpsRay> rays, Order order) {
    AutomorphismWord w;
    w.rays = merge_rays(std::move(rays));
    if (order == Order::Cw) std::reverse(w.rays.begin(), w.rays.end());
    return w;
}

TwistedSeries s_delta_apply(const AutomorphismWord& word, const TwistedSeries& target, double L,
                            const ChargeLattice& lat, const std::optional<Sector>& sector) {
    if (sector) {
        sector->validate();
        for (auto& r : word.rays)
            if (!sector->contains_phase(r.phase)) throw InputError("ray phase outside the sector");
        for (auto& [v, c] : target.terms)
            if (!sector->in_support(lat.Z(v))) throw InputError("target support outside the admissible cone");
    }
    if (word.rays.empty()) return truncate_height(target, L, lat);
    double amax = 0;
    for (auto& [v, c] : target.terms) amax = std::max(amax, lat.absZ(v));
    // opening spanned by the rays decides how much cancellation of |Z| can happen
    double lo = word.rays.front().phase;
    double mn = 0, mx = 0;
    for (auto& r : word.rays) {
        double d = std::remainder(r.phase - lo, 2 * M_PI);
        mn = std::min(mn, d);
        mx = std::max(mx, d);
    }
    double phi = mx - mn;
    if (phi >= M_PI - 1e-9) throw InputError("rays do not fit in an acute sector");
    double c = std::cos(phi / 2);
    double Lint = (L + amax) / c + amax + 1e-6;
    TwistedSeries cur = truncate_height(target, Lint, lat);
    cur.level = Lint;
    for (auto& r : word.rays) {
        if (r.content.empty()) continue;
        double zr = lat.absZ(r.primitive());
        if (c * zr >= L + amax + 1e-6) continue;
        cur = k_apply(r, cur, Lint, lat);
    }
    return truncate_height(cur, L, lat);
}

std::optional<WordDiff> word_diff(const AutomorphismWord& w1, const AutomorphismWord& w2, double L,
                                  const ChargeLattice& lat) {
    for (int i = 0; i < lat.rank; ++i)
        for (long s : {1L, -1L}) {
            Vec e = lat.basis(i, s);
            TwistedSeries t = monomial(e, std::max(L, lat.absZ(e) + 1), lat);
            auto a = s_delta_apply(w1, t, L, lat), b = s_delta_apply(w2, t, L, lat);
            if (series_equal(a, b)) continue;
            std::map<Vec, Rational> all;
            for (auto& [v, c] : a.terms) all[v] = 0;
            for (auto& [v, c] : b.terms) all[v] = 0;
            for (auto& [v, c] : all) {
                Rational x = a.coeff(v), y = b.coeff(v);
                if (x != y) return WordDiff{e, v, x, y};
            }
        }
    return std::nullopt;
}

bool word_equal(const AutomorphismWord& w1, const AutomorphismWord& w2, double L, const ChargeLattice& lat) {
    return !word_diff(w1, w2, L, lat).has_value();
}

}
