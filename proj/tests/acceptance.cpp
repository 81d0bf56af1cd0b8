#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "wcnet/laminations.hpp"
#include "wcnet/path_lift.hpp"

using namespace wcnet;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

ChargeLattice rank2(long p, cplx z1, cplx z2) {
    ChargeLattice lat;
    lat.rank = 2;
    lat.pairing = {{0, p}, {-p, 0}};
    lat.central_charge = {z1, z2};
    lat.validate();
    return lat;
}

QuadraticDifferential poly(std::vector<cplx> c) { return QuadraticDifferential::from_coeffs(std::move(c)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Verdict pentagon() {
    auto t0 = std::chrono::steady_clock::now();
    auto in = rank2(1, std::polar(1.0, 0.4), std::polar(1.3, 1.9));
    auto out = rank2(1, std::polar(1.0, 1.9), std::polar(1.3, 0.4));
    Vec g1{1, 0}, g2{0, 1}, g12{1, 1};
    double L = 8 * std::max(in.absZ(g1), in.absZ(g2));
    auto lhs = ordered_word({simple_ray(g1, 1, out), simple_ray(g2, 1, out)});
    auto rhs = ordered_word({simple_ray(g2, 1, in), simple_ray(g12, 1, in), simple_ray(g1, 1, in)});
    bool order = lhs.rays[0].content[0].vector == g2 && rhs.rays[0].content[0].vector == g1;
    bool eq = word_equal(lhs, rhs, L, in);
    double dt = seconds_since(t0);
    return {order && eq && dt < 1, "L = " + fmt("%.3f", L) + ", " + fmt("%.3f s", dt)};
}

Verdict a1_geometry() {
    auto t0 = std::chrono::steady_clock::now();
    auto q = poly({-1, 0, 1});
    auto s = scan_active_rays(q, Sector{M_PI / 4, 3 * M_PI / 4, 0, std::nullopt}, 10);
    double dt = seconds_since(t0);
    if (s.rays.size() != 1 || s.rays[0].connections.size() != 1)
        return {false, std::to_string(s.rays.size()) + " active rays"};
    auto& c = s.rays[0].connections[0];
    double dphase = std::abs(s.rays[0].phase - M_PI / 2), dz = std::abs(std::abs(c.charge) - M_PI / 2);
    double dhat = std::min(std::abs(c.hat_charge - cplx(0, M_PI)), std::abs(c.hat_charge + cplx(0, M_PI)));
    bool ok = dphase < 1e-6 && dz < 1e-6 && dhat < 1e-6 && s.unresolved.empty() && s.beyond_cap.empty() && dt < 10;
    std::ostringstream o;
    o << "|phase - pi/2| = " << dphase << ", ||Z| - pi/2| = " << dz << ", hat error " << dhat << ", "
      << fmt("%.2f s", dt);
    return {ok, o.str()};
}

Verdict a2_wall() {
    using namespace wcnet::cli;
    auto t0 = std::chrono::steady_clock::now();
    auto cfg = load_config(std::string(WCNET_CONFIG_DIR) + "/a2_family.json");
    auto res = run_command("verify-wcf", cfg);
    auto& r = res.report;
    if (!r.contains("wall")) return {false, r.value("error", std::string("no wall"))};
    // both sides again through the spectrum command: boundary rays and the truncation scale
    double zmin = INFINITY;
    bool boundary_ok = true;
    for (auto side : {"c_before", "c_after"}) {
        json s = cfg;
        s.erase("family");
        s.erase("truncation");
        auto coeffs = cfg["family"]["coeffs"];
        coeffs[cfg["family"]["vary"].get<int>()] = r["wall"][side];
        s["surface"] = {{"coeffs", coeffs}};
        auto sp = run_command("spectrum", s);
        if (sp.code != Ok) return {false, std::string("spectrum at ") + side + " exited " + std::to_string(sp.code)};
        for (auto& ray : sp.report["rays"]) {
            double ph = ray["phase"].get<double>();
            boundary_ok = boundary_ok && std::abs(ph - cfg["sector"]["theta_lo"].get<double>()) > 1e-6 &&
                          std::abs(ph - cfg["sector"]["theta_hi"].get<double>()) > 1e-6;
            for (auto& c : ray["connections"]) {
                cplx h(c["hat_charge"][0].get<double>(), c["hat_charge"][1].get<double>());
                zmin = std::min(zmin, std::abs(h));
            }
        }
    }
    double L = r["truncation"].get<double>(), cerr = r["charge_error"].get<double>();
    double dt = seconds_since(t0);
    bool ok = res.code == Ok && r["result"] == "PASS" && boundary_ok && std::abs(L - 6 * zmin) < 1e-6 * L &&
              cerr < 1e-6 && dt < 300;
    std::ostringstream o;
    o << "wall between c = " << r["wall"]["c_before"].dump() << " and " << r["wall"]["c_after"].dump() << ", "
      << r["word_before"].size() << " -> " << r["word_after"].size() << " rays, L = " << fmt("%.4f", L)
      << " = 6 * " << fmt("%.4f", zmin) << ", charge error " << cerr << ", " << fmt("%.1f s", dt);
    return {ok, o.str()};
}

std::vector<LocalModel> all_models() {
    std::vector<LocalModel> out;
    for (auto k : {ModelKind::SingleSaddle, ModelKind::Cylinder, ModelKind::ToralEnd, ModelKind::DegenerateRing})
        for (bool tor : {false, true}) {
            if (tor && k != ModelKind::DegenerateRing) continue;
            for (int c = 0; c < 5; ++c) {
                LocalModel m;
                m.kind = k, m.toral = tor, m.crossing = CrossingType(c);
                try {
                    m.validate();
                } catch (const InputError&) {
                    continue;
                }
                out.push_back(m);
            }
        }
    return out;
}

Verdict wall_identities() {
    int checks = 0, fails = 0, twisted = 0;
    bool case1[4] = {false, false, false, false}, ring[2] = {false, false};
    std::string first;
    for (auto& m : all_models()) {
        for (double L : {0.5, 2.0, 6.7, 11.0}) {
            ++checks;
            bool ok = wall_identity_check(m, m.ray(), L);
            if (m.kind == ModelKind::Cylinder || m.kind == ModelKind::ToralEnd) {
                auto fm = lift_one_sided(m, Side::Minus, L), fp = lift_one_sided(m, Side::Plus, L);
                auto kf = model_k_apply(m, m.ray(), fm, L);
                for (int a : {1, 2})
                    for (int b : {1, 2}) ok = ok && lift_equal(kf.component(a, b), fp.component(a, b), L);
            }
            if (!ok && first.empty())
                first = std::string(model_name(m.kind)) + " " + crossing_name(m.crossing) + " at L = " + fmt("%.1f", L);
            fails += !ok;
            if (ok && m.kind == ModelKind::SingleSaddle && int(m.crossing) < 4) case1[int(m.crossing)] = true;
            if (ok && m.kind == ModelKind::DegenerateRing) ring[m.toral] = true;
        }
        bool crosses = false;
        for (auto& row : model_intersections(m))
            for (long x : row) crosses = crosses || x != 0;
        if ((m.kind == ModelKind::Cylinder || m.kind == ModelKind::ToralEnd) && crosses) {
            double L = std::abs(m.detour) + 6.5 * std::abs(m.core);
            long top = 0;
            for (auto side : {Side::Minus, Side::Plus})
                for (auto& t : lift_one_sided(m, side, L).terms) top = std::max(top, std::abs(t.cls.hclass[1]));
            bool ok = top >= 5 && wall_identity_check(m, m.ray(), L);
            ++twisted;
            if (!ok && first.empty()) first = std::string("twist orders in ") + model_name(m.kind);
            fails += !ok;
        }
    }
    bool cover = case1[0] && case1[1] && case1[2] && case1[3] && ring[0] && ring[1] && twisted >= 3;
    std::ostringstream o;
    o << checks << " identity checks, " << twisted << " twist checks to >= 5 orders, " << fails << " failures";
    if (!first.empty()) o << " (first: " << first << ")";
    return {fails == 0 && cover, o.str()};
}

Verdict one_sided_limits() {
    auto q = poly({-1, 0, 1});
    double L = 4 * (M_PI / 2);
    bool ok = true;
    std::string detail;
    for (double eps : {1e-2, 1e-3}) {
        auto r = limit_check_report(q, M_PI / 2, {cplx(0.3, -0.6), cplx(0.3, 0.6)}, eps, L);
        ok = ok && r.plus && r.minus;
        if (!(r.plus && r.minus)) detail = r.detail;
    }
    return {ok, "eps in {1e-2, 1e-3}, L = " + fmt("%.4f", L) + (detail.empty() ? "" : ", " + detail)};
}

Verdict homotopy() {
    int checks = 0;
    std::string bad;
    auto same = [&](const LiftElement& a, const LiftElement& b, double L, const char* what) {
        ++checks;
        auto d = lift_diff(a, b, L);
        if (d && bad.empty()) bad = std::string(what) + ": " + *d;
    };
    auto q = poly({0, 1});
    for (double th : {0.2, 1.1, -2.0}) {
        std::vector<cplx> a{cplx(0.5, -1.2), cplx(0.5, -1), cplx(0.6, 0), cplx(0.5, 1), cplx(0.5, 1.2)};
        std::vector<cplx> b{cplx(0.5, -1.2), cplx(0.5, -1), cplx(-0.6, 0), cplx(0.5, 1), cplx(0.5, 1.2)};
        same(lift_path(q, a, th, 20), lift_path(q, b, th, 20), 20, "across a zero");
    }
    auto A1 = poly({-1, 0, 1});
    std::vector<cplx> a{cplx(0.6, -1.2), cplx(0.6, -1), cplx(1.4, 0), cplx(0.6, 1), cplx(0.6, 1.2)};
    std::vector<cplx> b{cplx(0.6, -1.2), cplx(0.6, -1), cplx(0.7, 0), cplx(0.6, 1), cplx(0.6, 1.2)};
    same(lift_path(A1, a, 0.3, 12), lift_path(A1, b, 0.3, 12), 12, "across a zero of z^2 - 1");
    std::vector<cplx> looped{cplx(1.5, -1.2), cplx(1.5, -1),  cplx(1.5, 0.5), cplx(1.7, 0.5),
                             cplx(1.7, -0.5), cplx(1.9, -0.5), cplx(1.9, 1)};
    std::vector<cplx> straight{cplx(1.5, -1.2), cplx(1.5, -1), cplx(1.9, -0.5), cplx(1.9, 1)};
    same(lift_path(q, looped, 0, 20), lift_path(q, straight, 0, 20), 20, "across a trajectory");
    // moving the path past the end of a truncated trajectory drops exactly one detour
    std::vector<cplx> inside{cplx(1, -0.7), cplx(1, -0.5), cplx(1, 0.5), cplx(1, 0.7)};
    std::vector<cplx> beyond{cplx(1, -0.7), cplx(1, -0.5), cplx(2, -0.5), cplx(2, 0.5), cplx(1, 0.5), cplx(1, 0.7)};
    LiftOptions opt;
    opt.network_cap = 1.0;
    auto F = lift_path(q, inside, 0, 10, opt), G = lift_path(q, beyond, 0, 10, opt);
    int extra = 0, wrong = 0;
    for (auto& t : F.terms)
        if (G.coeff(t.cls) != t.coeff) {
            ++extra;
            wrong += t.cls.detours != 1 || G.coeff(t.cls) != 0;
        }
    for (auto& t : G.terms) wrong += F.coeff(t.cls) != t.coeff;
    bool end_ok = extra == 1 && wrong == 0;
    std::ostringstream o;
    o << checks << " homotopies equal, end crossing changes " << extra << " term(s)";
    if (!bad.empty()) o << "; " << bad;
    return {bad.empty() && end_ok, o.str()};
}

Triangulation punctured_polygon(int n) {
    Triangulation T;
    T.n_vertices = n + 1;
    T.is_hole.assign(n + 1, false);
    T.is_hole[n] = true;
    std::map<std::pair<int, int>, int> idx;
    for (int i = 0; i < n; ++i) {
        Triangle t;
        t.v = {i, (i + 1) % n, n};
        for (int k = 0; k < 3; ++k) {
            std::pair<int, int> key = std::minmax(t.v[k], t.v[(k + 1) % 3]);
            auto [it, fresh] = idx.emplace(key, int(T.edges.size()));
            if (fresh) T.edges.push_back(key);
            t.e[k] = it->second;
        }
        T.triangles.push_back(t);
    }
    T.finalize();
    return T;
}

Verdict fg_roundtrip() {
    std::mt19937 rng(20261016);
    std::uniform_int_distribution<long> coord(-5, 5);
    std::uniform_int_distribution<int> size(4, 11), spokes(3, 8);
    int cases = 0, fails = 0, max_rank = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        Triangulation T = trial % 5 == 4 ? punctured_polygon(spokes(rng)) : random_polygon_triangulation(size(rng), rng);
        if (T.rank() > 8) continue;
        max_rank = std::max(max_rank, T.rank());
        EdgeCoordinates n;
        for (int e : T.interior_edges)
            if (long v = coord(rng)) n[e] = v;
        ++cases;
        try {
            fails += coordinates_from_lamination(lamination_from_coordinates(n, T), T) != n;
        } catch (const std::exception&) {
            ++fails;
        }
    }
    return {cases >= 1000 && fails == 0,
            std::to_string(cases) + " tuples, up to " + std::to_string(max_rank) + " interior edges, " +
                std::to_string(fails) + " mismatches"};
}

Verdict approximation() {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> re(-1, 1), im(0.3, 1.5);
    int trials = 0, fails = 0, max_steps = 0;
    std::string first;
    for (int trial = 0; trial < 60; ++trial) {
        auto T = random_polygon_triangulation(4 + trial % 5, rng);
        HatBasis b;
        b.edges = T.interior_edges;
        double mn = INFINITY, mx = 0;
        for (int i = 0; i < T.rank(); ++i) {
            b.charge.push_back(cplx(re(rng), im(rng)));
            mn = std::min(mn, b.charge.back().imag()), mx = std::max(mx, b.charge.back().imag());
        }
        auto lat = b.lattice(T);
        int e0 = T.interior_edges[trial % T.rank()];
        int sign = trial % 2 ? -1 : 1;
        double L = trial % 3 ? 4.5 : 3 * mn;
        ++trials;
        bool ok = true;
        try {
            auto res = approximate_generator(e0, sign, T, b, L);
            Vec g(T.rank(), 0);
            g[T.basis_index[e0]] = sign;
            ok = series_equal(res.series, monomial(g, L, lat));
            long dstar = long(std::ceil((L + mx) / mn - 1e-12)) + 1;
            for (auto& d : res.defects) ok = ok && d.height >= (d.degree - 1) * mn - mx - 1e-9 && d.degree < dstar;
            ok = ok && res.steps == int(res.defects.size()) + 1;
            max_steps = std::max(max_steps, res.steps);
        } catch (const std::exception& e) {
            ok = false;
            if (first.empty()) first = e.what();
        }
        if (!ok && first.empty()) first = "trial " + std::to_string(trial);
        fails += !ok;
    }
    return {fails == 0, std::to_string(trials) + " generators, up to " + std::to_string(max_steps) + " steps, " +
                            std::to_string(fails) + " failures" + (first.empty() ? "" : " (" + first + ")")};
}

Verdict dt_exponential() {
    auto lat = rank2(1, {0, 1}, {1, 0.3});
    Vec g{1, 0};
    double L = 8 * lat.absZ(g);
    BpsRay mixed;
    mixed.phase = M_PI / 2;
    mixed.content = {{{1, 0}, 2, {2, 0}}, {{2, 0}, -1, {-2, 0}}};
    std::vector<BpsRay> rays{simple_ray(g, 1, lat), simple_ray(g, -2, lat), mixed};
    int checks = 0, fails = 0;
    for (auto& r : rays)
        for (Vec a : {Vec{0, 1}, Vec{1, -3}, Vec{2, 1}, Vec{-1, 2}, Vec{0, 3}}) {
            ++checks;
            fails += !dt_exp_check(r, a, L, lat);
        }
    return {fails == 0, std::to_string(checks) + " contents x targets at L = " + fmt("%.1f", L)};
}

Verdict algebra_laws() {
    std::mt19937 rng(500);
    std::uniform_int_distribution<long> small(0, 3), pairing(-2, 2), coef(-3, 3), omega(-2, 2);
    std::uniform_real_distribution<double> ph(0.8, 2.3), mod(0.5, 1.5), lev(2, 6);
    int fails[4] = {0, 0, 0, 0};
    const double big = 1e6;
    for (int it = 0; it < 500; ++it) {
        int r = 2 + it % 2;
        ChargeLattice lat;
        lat.rank = r;
        lat.pairing.assign(r, std::vector<long>(r, 0));
        for (int i = 0; i < r; ++i)
            for (int j = i + 1; j < r; ++j) lat.pairing[i][j] = pairing(rng), lat.pairing[j][i] = -lat.pairing[i][j];
        for (int i = 0; i < r; ++i) lat.central_charge.push_back(std::polar(mod(rng), ph(rng)));
        lat.validate();
        auto vec = [&] {
            Vec v(r);
            for (auto& x : v) x = small(rng);
            return v;
        };
        auto series = [&](double level) {
            TwistedSeries s;
            s.level = level;
            for (int k = 0; k < 4; ++k)
                if (long c = coef(rng)) s.add(vec(), c);
            return s;
        };
        double L = lev(rng);
        // sign rule
        Vec v = vec(), w = vec();
        auto p = twisted_multiply(monomial(v, big, lat), monomial(w, big, lat), lat);
        fails[0] += p.coeff(vadd(v, w)) != ((lat.pair(v, w) & 1) ? -1 : 1) || p.terms.size() != 1;
        fails[0] += !series_equal(p, twisted_multiply(monomial(w, big, lat), monomial(v, big, lat), lat));
        // truncation is a morphism on a common cone
        auto a = series(big), b = series(big);
        auto full = truncate_height(twisted_multiply(a, b, lat), L, lat);
        auto cut = twisted_multiply(truncate_height(a, L, lat), truncate_height(b, L, lat), lat);
        fails[1] += !series_equal(full, cut);
        // K is multiplicative
        Vec g = vec();
        if (vzero(g)) g[0] = 1;
        long g0 = vgcd(g);
        for (auto& x : g) x /= g0;
        long om = omega(rng);
        if (!om) om = 1;
        auto ray = simple_ray(g, om, lat);
        auto aL = truncate_height(a, L, lat), bL = truncate_height(b, L, lat);
        auto lhs = k_apply(ray, twisted_multiply(aL, bL, lat), L, lat);
        auto rhs = twisted_multiply(k_apply(ray, aL, L, lat), k_apply(ray, bL, L, lat), lat);
        fails[2] += !series_equal(lhs, rhs);
        // K followed by its inverse
        auto inv = simple_ray(g, -om, lat);
        fails[3] += !series_equal(k_apply(inv, k_apply(ray, aL, L, lat), L, lat), aL);
    }
    std::ostringstream o;
    o << "500 cases; failures: sign " << fails[0] << ", truncation " << fails[1] << ", multiplicativity " << fails[2]
      << ", inverse " << fails[3];
    return {fails[0] + fails[1] + fails[2] + fails[3] == 0, o.str()};
}

}

int main() {
    std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"pentagon identity", pentagon},
        {"A1 geometry", a1_geometry},
        {"A2 wall crossing", a2_wall},
        {"wall identities in local models", wall_identities},
        {"one-sided limits", one_sided_limits},
        {"homotopy invariance", homotopy},
        {"FG roundtrip", fg_roundtrip},
        {"approximation", approximation},
        {"DT exponential", dt_exponential},
        {"algebra laws", algebra_laws},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria pass\n", int(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
