#pragma once

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace wcnet {

using cplx = std::complex<double>;
using Vec = std::vector<long>;
using Rational = mpq_class;

constexpr double kHeightTol = 1e-9;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChargeLattice {
    int rank = 0;
    std::vector<std::vector<long>> pairing;
    std::vector<cplx> central_charge;

    void validate() const;
    long pair(const Vec& a, const Vec& b) const;
    cplx Z(const Vec& v) const;
    double absZ(const Vec& v) const { return std::abs(Z(v)); }
    Vec basis(int i, long s = 1) const;
    Vec zero() const { return Vec(rank, 0); }
};

Vec vadd(const Vec& a, const Vec& b);
Vec vsub(const Vec& a, const Vec& b);
Vec vscale(const Vec& a, long k);
Vec vneg(const Vec& a);
bool vzero(const Vec& a);
long vgcd(const Vec& a);
std::string vstr(const Vec& a);

struct TwistedSeries {
    std::map<Vec, Rational> terms;
    double level = 0;

    bool empty() const { return terms.empty(); }
    Rational coeff(const Vec& v) const;
    void add(const Vec& v, const Rational& c);
    std::string str() const;
};

TwistedSeries monomial(const Vec& v, double L, const ChargeLattice& lat, const Rational& c = 1);
TwistedSeries truncate_height(const TwistedSeries& a, double L, const ChargeLattice& lat);
TwistedSeries twisted_multiply(const TwistedSeries& a, const TwistedSeries& b, const ChargeLattice& lat);
TwistedSeries series_add(const TwistedSeries& a, const TwistedSeries& b);
TwistedSeries series_sub(const TwistedSeries& a, const TwistedSeries& b);
TwistedSeries series_scale(const TwistedSeries& a, const Rational& c);
double height(const TwistedSeries& a, const ChargeLattice& lat);
bool series_equal(const TwistedSeries& a, const TwistedSeries& b);

struct Sector {
    double theta_lo = 0;
    double theta_hi = 0;
    cplx translate = 0;
    std::optional<std::pair<double, double>> support_cone;

    void validate() const;
    bool contains_phase(double phi) const;
    bool in_support(cplx z) const;
};

struct RayContent {
    Vec vector;
    long omega = 0;
    Vec cycle;
};

struct BpsRay {
    double phase = 0;
    std::vector<RayContent> content;

    Vec primitive() const;
};

struct AutomorphismWord {
    std::vector<BpsRay> rays;
};

enum class Order { Ccw, Cw };

BpsRay simple_ray(const Vec& v, long omega, const ChargeLattice& lat);

TwistedSeries k_apply(const BpsRay& ray, const Vec& alpha, double L, const ChargeLattice& lat);
TwistedSeries k_apply(const BpsRay& ray, const TwistedSeries& target, double L, const ChargeLattice& lat);
bool dt_exp_check(const BpsRay& ray, const Vec& alpha, double L, const ChargeLattice& lat);

std::vector<BpsRay> merge_rays(std::vector<BpsRay> rays, double tol = 1e-9);
AutomorphismWord ordered_word(std::vector<BpsRay> rays, Order order = Order::Ccw);

TwistedSeries s_delta_apply(const AutomorphismWord& word, const TwistedSeries& target, double L,
                            const ChargeLattice& lat, const std::optional<Sector>& sector = std::nullopt);

struct WordDiff {
    Vec generator;
    Vec vector;
    Rational lhs, rhs;
};

std::optional<WordDiff> word_diff(const AutomorphismWord& w1, const AutomorphismWord& w2, double L,
                                  const ChargeLattice& lat);
bool word_equal(const AutomorphismWord& w1, const AutomorphismWord& w2, double L, const ChargeLattice& lat);

}
