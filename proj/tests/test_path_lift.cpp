#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wcnet/path_lift.hpp"

using namespace wcnet;

namespace {

QuadraticDifferential poly(std::vector<cplx> c) { return QuadraticDifferential::from_coeffs(std::move(c)); }

int count_detours(const LiftElement& F, int n) {
    int k = 0;
    for (auto& t : F.terms) k += t.cls.detours == n;
    return k;
}

std::vector<ModelKind> all_kinds() {
    return {ModelKind::SingleSaddle, ModelKind::Cylinder, ModelKind::ToralEnd, ModelKind::DegenerateRing};
}

std::vector<LocalModel> all_models() {
    std::vector<LocalModel> out;
    for (auto k : all_kinds())
        for (bool tor : {false, true}) {
            if (tor && k != ModelKind::DegenerateRing) continue;
            for (int c = 0; c < 5; ++c) {
                LocalModel m;
                m.kind = k;
                m.toral = tor;
                m.crossing = CrossingType(c);
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

}

TEST_CASE("a path away from the network lifts trivially") {
    auto q = poly({0, 1});
    auto F = lift_path(q, {cplx(-1, 0.2), cplx(-1, 1.5)}, 0, 20);
    CHECK(F.terms.size() == 2);
    CHECK(count_detours(F, 0) == 2);
    for (auto& t : F.terms) CHECK(t.coeff == 1);
}

TEST_CASE("one crossing gives one elementary detour") {
    auto q = poly({0, 1});
    std::vector<cplx> path{cplx(1, -0.5), cplx(1, 0.5)};
    auto F = lift_path(q, path, 0, 10);
    REQUIRE(F.terms.size() == 3);
    REQUIRE(count_detours(F, 1) == 1);
    auto triv = trivial_lift(q, path, 0);
    for (auto& t : F.terms) {
        if (t.cls.detours != 1) continue;
        // ray from 0 to 1 has flat length 2/3
        CHECK(std::abs(t.cls.weight - 4.0 / 3.0) < 1e-8);
        CHECK(t.cls.start_sheet != t.cls.end_sheet);
        // class: first half on one sheet to the zero, then back on the other sheet
        cplx x = path[0], y = path[1];
        cplx r0 = std::sqrt(q.P(x));
        double sg = t.cls.start_sheet == 1 ? 1 : -1;
        cplx a = period(q, {x, 0.0}, sg * r0);
        cplx ry = root_at_end(q, {x, cplx(1e-3, 0)}, sg * r0);
        cplx b = period(q, {0.0, y}, -ry);
        CHECK(std::abs(t.cls.charge - (a + b)) < 1e-8);
    }
    CHECK(F.terms.size() == triv.terms.size() + 1);
    CHECK_THROWS_AS(lift_path(q, {cplx(-1, 0), cplx(1, 0)}, 0, 10), InputError);
    CHECK_THROWS_AS(lift_path(poly({-1, 0, 1}), path, M_PI / 2, 10), InputError);
}

TEST_CASE("homotopy across a zero") {
    auto q = poly({0, 1});
    for (double th : {0.2, 1.1, -2.0}) {
        std::vector<cplx> a{cplx(0.5, -1.2), cplx(0.5, -1), cplx(0.6, 0), cplx(0.5, 1), cplx(0.5, 1.2)};
        std::vector<cplx> b{cplx(0.5, -1.2), cplx(0.5, -1), cplx(-0.6, 0), cplx(0.5, 1), cplx(0.5, 1.2)};
        auto Fa = lift_path(q, a, th, 20), Fb = lift_path(q, b, th, 20);
        auto d = lift_diff(Fa, Fb, 20);
        CHECK_MESSAGE(!d, *d);
    }
    auto A1 = poly({-1, 0, 1});
    std::vector<cplx> a{cplx(0.6, -1.2), cplx(0.6, -1), cplx(1.4, 0), cplx(0.6, 1), cplx(0.6, 1.2)};
    std::vector<cplx> b{cplx(0.6, -1.2), cplx(0.6, -1), cplx(0.7, 0), cplx(0.6, 1), cplx(0.6, 1.2)};
    auto Fa = lift_path(A1, a, 0.3, 12), Fb = lift_path(A1, b, 0.3, 12);
    auto d = lift_diff(Fa, Fb, 12);
    CHECK_MESSAGE(!d, *d);
}

TEST_CASE("homotopy across a trajectory") {
    auto q = poly({0, 1});
    std::vector<cplx> looped{cplx(1.5, -1.2), cplx(1.5, -1),  cplx(1.5, 0.5), cplx(1.7, 0.5),
                             cplx(1.7, -0.5), cplx(1.9, -0.5), cplx(1.9, 1)};
    std::vector<cplx> straight{cplx(1.5, -1.2), cplx(1.5, -1), cplx(1.9, -0.5), cplx(1.9, 1)};
    auto F = lift_path(q, looped, 0, 20), G = lift_path(q, straight, 0, 20);
    CHECK(count_detours(F, 1) == 1);
    auto d = lift_diff(F, G, 20);
    CHECK_MESSAGE(!d, *d);
}

TEST_CASE("crossing the end of a truncated trajectory") {
    auto q = poly({0, 1});
    std::vector<cplx> inside{cplx(1, -0.7), cplx(1, -0.5), cplx(1, 0.5), cplx(1, 0.7)};
    std::vector<cplx> beyond{cplx(1, -0.7), cplx(1, -0.5), cplx(2, -0.5), cplx(2, 0.5), cplx(1, 0.5), cplx(1, 0.7)};
    LiftOptions opt;
    opt.network_cap = 1.0;
    auto F = lift_path(q, inside, 0, 10, opt), G = lift_path(q, beyond, 0, 10, opt);
    int extra = 0;
    for (auto& t : F.terms)
        if (G.coeff(t.cls) != t.coeff) {
            ++extra;
            CHECK(t.cls.detours == 1);
            CHECK(G.coeff(t.cls) == 0);
        }
    for (auto& t : G.terms) CHECK(F.coeff(t.cls) == t.coeff);
    CHECK(extra == 1);
}

TEST_CASE("composition of lifts") {
    auto q = poly({-1, 0, 1});
    std::vector<cplx> p1{cplx(0.3, -1.6), cplx(0.3, -0.4), cplx(0.5, 0)}, p2{cplx(0.5, 0), cplx(0.5, 0.6), cplx(1.7, 1.4)};
    std::vector<cplx> all{p1[0], p1[1], p1[2], p2[1], p2[2]};
    double L = 5 * M_PI / 2;
    auto a = lift_path(q, p1, 1.2, L), b = lift_path(q, p2, 1.2, L), c = lift_path(q, all, 1.2, L);
    auto ab = compose_lifts(a, b);
    auto d = lift_diff(ab, c, L);
    CHECK_MESSAGE(!d, *d);
    CHECK(count_detours(c, 2) >= 1);
    auto t1 = trivial_lift(q, p1, 0.4), t2 = trivial_lift(q, p2, 0.4);
    CHECK(lift_equal(compose_lifts(t1, t2), trivial_lift(q, all, 0.4), 1));
    CHECK(compose_lifts(t2, t1).terms.empty());
}

TEST_CASE("one-sided lifts of a single saddle") {
    LocalModel m;
    m.crossing = CrossingType::I;
    CHECK(lift_equal(lift_one_sided(m, Side::Plus, 10), lift_one_sided(m, Side::Minus, 10), 10));
    CHECK(lift_one_sided(m, Side::Plus, 10).terms.size() == 3);
    m.crossing = CrossingType::II;
    auto fp = lift_one_sided(m, Side::Plus, 10), fm = lift_one_sided(m, Side::Minus, 10);
    CHECK(fm.terms.size() == 3);
    REQUIRE(fp.terms.size() == 4);
    SignedPathClass longd;
    longd.start_sheet = 1, longd.end_sheet = 2, longd.hclass = {Dsh1, 1};
    CHECK(fp.coeff(longd) == -1);
}

TEST_CASE("wall identities in all local models") {
    for (auto& m : all_models()) {
        INFO(model_name(m.kind), " ", crossing_name(m.crossing), " toral=", m.toral);
        for (double L : {0.5, 2.0, 6.7, 11.0}) {
            CHECK(wall_identity_check(m, m.ray(), L));
            auto fp = lift_one_sided(m, Side::Plus, L), fm = lift_one_sided(m, Side::Minus, L);
            BpsRay inv = m.ray();
            for (auto& rc : inv.content) rc.omega = -rc.omega;
            bool ok = true;
            CHECK(lift_equal(model_k_apply(m, inv, fp, L, &ok), fm, L));
            CHECK(ok);
        }
    }
}

TEST_CASE("cylinder twists to five orders") {
    for (auto kind : {ModelKind::Cylinder, ModelKind::ToralEnd}) {
        LocalModel m;
        m.kind = kind;
        m.crossing = kind == ModelKind::Cylinder ? CrossingType::III : CrossingType::IV;
        double L = std::abs(m.detour) + 6.5 * std::abs(m.core);
        auto fm = lift_one_sided(m, Side::Minus, L);
        long top = 0;
        for (auto& t : fm.terms)
            if (t.cls.hclass[0] == Dsh1) top = std::max(top, t.cls.hclass[1]);
        CHECK(top >= 5);
        CHECK(wall_identity_check(m, m.ray(), L));
    }
}

TEST_CASE("corrupted ray content fails the identity") {
    LocalModel m;
    m.crossing = CrossingType::II;
    BpsRay r = m.ray();
    r.content[0].omega = 2;
    CHECK_FALSE(wall_identity_check(m, r, 10));
    LocalModel c;
    c.kind = ModelKind::Cylinder;
    c.crossing = CrossingType::III;
    BpsRay s = c.ray();
    s.content[0].omega = -1;
    CHECK_FALSE(wall_identity_check(c, s, 10));
    LocalModel bad;
    bad.crossing = CrossingType::V;
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("one-sided limits in A1") {
    auto q = poly({-1, 0, 1});
    double L = 4 * M_PI / 2;
    for (double eps : {1e-2, 1e-3}) {
        auto r = limit_check_report(q, M_PI / 2, {cplx(0.3, -0.6), cplx(0.3, 0.6)}, eps, L);
        CHECK_MESSAGE(r.plus, r.detail);
        CHECK_MESSAGE(r.minus, r.detail);
    }
    // rays next to the saddle
    for (auto path : std::vector<std::vector<cplx>>{{cplx(0.9, 0.8), cplx(2.5, 0.8)}, {cplx(0.9, -0.8), cplx(2.5, -0.8)}})
        CHECK(limit_check(q, M_PI / 2, path, 1e-3, L));
    // no wall at a saddle-free phase
    CHECK(limit_check(q, 0.4, {cplx(0.3, -0.6), cplx(0.3, 0.6)}, 1e-3, L));
}
