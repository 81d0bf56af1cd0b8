#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wcnet/flat.hpp"

using namespace wcnet;

namespace {

QuadraticDifferential a1() { return QuadraticDifferential::from_coeffs({-1, 0, 1}); }

}

TEST_CASE("zeros and validation") {
    auto q = a1();
    REQUIRE(q.zeros.size() == 2);
    CHECK(std::abs(q.zeros[0] + 1.0) < 1e-14);
    CHECK(std::abs(q.zeros[1] - 1.0) < 1e-14);
    CHECK(q.pole_order_at_infinity == 6);
    CHECK_THROWS_AS(QuadraticDifferential::from_coeffs({1}), InputError);
    CHECK_THROWS_AS(QuadraticDifferential::from_coeffs({1, 2, 1}), InputError);
}

TEST_CASE("flat plane segment") {
    auto q = QuadraticDifferential::from_coeffs({1}, true);
    auto s = integrate_trajectory(q, 0, 1, 0, 1);
    CHECK(s.terminus == Terminus::LengthCapped);
    CHECK(std::abs(s.points.back() - 1.0) < 1e-10);
    CHECK(std::abs(s.arclength - 1) < 1e-12);
}

TEST_CASE("separatrix of z dz^2 is a straight ray") {
    auto q = QuadraticDifferential::from_coeffs({0, 1});
    auto s = integrate_separatrix(q, 0, 0, 0, 1);
    CHECK(s.terminus == Terminus::LengthCapped);
    for (auto z : s.points) {
        if (std::abs(z) < 1e-9) continue;
        CHECK(std::abs(std::remainder(std::arg(z), 2 * M_PI / 3)) < 1e-7);
    }
    double r = std::abs(s.points.back());
    CHECK(std::abs(2.0 / 3.0 * std::pow(r, 1.5) - s.arclength) < 1e-7);
}

TEST_CASE("A1 saddle connection") {
    auto q = a1();
    bool found = false;
    for (int k = 0; k < 3; ++k) {
        auto s = integrate_separatrix(q, 1, k, M_PI / 2, 10);
        if (s.terminus == Terminus::HitZero) {
            found = true;
            CHECK(s.hit == 0);
            CHECK(std::abs(s.arclength - M_PI / 2) < 1e-6);
        }
    }
    CHECK(found);
}

TEST_CASE("networks") {
    auto q = QuadraticDifferential::from_coeffs({0, 1});
    auto n = build_network(q, 0.3, 5);
    CHECK(n.segments.size() == 6);
    for (auto& s : n.segments) CHECK(s.terminus == Terminus::Escaped);
    CHECK(n.saddle_segments().empty());
    auto a = build_network(a1(), M_PI / 2, 10);
    auto sad = a.saddle_segments();
    REQUIRE(sad.size() == 1);
    CHECK(a.segments[sad[0]].zero != a.segments[sad[0]].hit);
    CHECK(build_network(a1(), 0, 10).saddle_segments().empty());
}

TEST_CASE("periods") {
    auto q = a1();
    cplx p = period(q, {-1.0, 1.0}, cplx(0, 1));
    CHECK(std::abs(p - cplx(0, M_PI / 2)) < 1e-8);
    cplx r = period(q, {1.0, -1.0}, cplx(0, 1));
    CHECK(std::abs(r + cplx(0, M_PI / 2)) < 1e-8);
    // split path agrees with the straight segment
    std::vector<cplx> bent{-1.0, cplx(0, 0.7), 1.0};
    cplx b = period(q, bent, cplx(0, 1));
    CHECK(std::abs(b - p) < 1e-8);
    cplx a1p = period(q, {-1.0, cplx(0, 0.7)}, cplx(0, 1));
    cplx end = root_at_end(q, {-1.0, cplx(0, 0.7)}, cplx(0, 1));
    cplx a2p = period(q, {cplx(0, 0.7), 1.0}, end);
    CHECK(std::abs(a1p + a2p - b) < 1e-9);
}

TEST_CASE("reversal retraces") {
    auto q = QuadraticDifferential::from_coeffs({cplx(0.3, 0.1), 0, 0, 1});
    cplx z0(0.4, 1.1);
    cplx r0 = std::sqrt(q.P(z0));
    auto f = integrate_trajectory(q, z0, r0, 0.7, 2.0);
    cplx r1 = root_at_end(q, f.points, r0);
    auto b = integrate_trajectory(q, f.points.back(), r1, 0.7 + M_PI, 2.0);
    CHECK(std::abs(b.points.back() - z0) < 1e-8);
}

TEST_CASE("A1 scan") {
    auto q = a1();
    auto res = scan_active_rays(q, Sector{M_PI / 4, 3 * M_PI / 4, 0, std::nullopt}, 5);
    REQUIRE(res.rays.size() == 1);
    CHECK(std::abs(res.rays[0].phase - M_PI / 2) < 1e-9);
    REQUIRE(res.rays[0].connections.size() == 1);
    auto& c = res.rays[0].connections[0];
    CHECK(std::abs(std::abs(c.charge) - M_PI / 2) < 1e-6);
    CHECK(std::abs(c.hat_charge - cplx(0, M_PI)) < 1e-6);
    CHECK(res.unresolved.empty());
    CHECK(classify_ray(q, c.phase, res.rays[0].connections, 5).kind == RayCase::Case1);
    auto none = scan_active_rays(QuadraticDifferential::from_coeffs({0, 1}), Sector{0.1, 3.0, 0, std::nullopt}, 5);
    CHECK(none.rays.empty());
}

TEST_CASE("glued rectangle fixture") {
    GluedRectangle g{2.0, 0.5, 0.4, {0}, {1}};
    auto c = classify_ray(g, 0.4, {}, 10);
    CHECK(c.kind == RayCase::Case4a);
    REQUIRE(c.ring);
    CHECK(std::abs(c.ring->core_period - std::polar(2.0, 0.4)) < 1e-12);
    CHECK(classify_ray(g, 0.5, {}, 10).kind == RayCase::Unknown);
    SaddleConnection s1, s2;
    s1.charge = 1;
    s2.charge = cplx(0, 1);
    s1.start_zero = 0, s1.end_zero = 1, s2.start_zero = 1, s2.end_zero = 2;
    CHECK(classify_ray(QuadraticDifferential::from_coeffs({-1, 0, 0, 1}), 0, {s1, s2}, 10).kind == RayCase::Unknown);
}

TEST_CASE("z^3-1 spectrum is symmetric") {
    auto q = QuadraticDifferential::from_coeffs({-1, 0, 0, 1});
    std::vector<std::pair<double, double>> rays;
    for (auto sec : {Sector{0.05, 1.6, 0, std::nullopt}, Sector{1.6, 3.1916, 0, std::nullopt}}) {
        auto r = scan_active_rays(q, sec, 10);
        CHECK(r.unresolved.empty());
        for (auto& a : r.rays) rays.push_back({std::fmod(a.phase, M_PI), std::abs(a.connections[0].charge)});
    }
    CHECK(rays.size() >= 3);
    for (auto [ph, m] : rays) {
        double target = std::fmod(ph + 2 * M_PI / 3, M_PI);
        bool ok = false;
        for (auto [p2, m2] : rays)
            if (std::abs(std::remainder(p2 - target, M_PI)) < 1e-6 && std::abs(m2 - m) < 1e-6) ok = true;
        CHECK(ok);
    }
}
