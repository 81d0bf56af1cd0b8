#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "wcnet/homology.hpp"
#include "wcnet/lattice.hpp"

namespace wcnet {

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CiliatedSurface {
    std::vector<int> cilia_per_boundary;
    std::vector<int> holes;
    Triangulation tri;
};

CiliatedSurface ciliated_surface(const Triangulation& T);

// interior edge id -> n_e; missing entries are 0
using EdgeCoordinates = std::map<int, long>;

struct Lamination {
    std::vector<std::array<long, 3>> arcs;  // arcs[t][i] joins sides e[i] and e[i+1] of triangle t
    std::vector<long> peripheral;  // weight of the curve around each vertex
    long shift = 0;

    long points(int t, int slot) const;  // marked points on a side
    void validate(const Triangulation& T) const;
};

// arcs of the non-crossing system with the given numbers of marked points per side
std::array<long, 3> triangle_arcs(const std::array<long, 3>& points);

long minimal_shift(const EdgeCoordinates& n, const Triangulation& T);
Lamination lamination_from_coordinates(const EdgeCoordinates& n, const Triangulation& T,
                                       std::optional<long> shift = std::nullopt);
EdgeCoordinates coordinates_from_lamination(const Lamination& lam, const Triangulation& T);

enum class HoleCase { OneOuter, BothOuter, OneInner, BothInner };

struct HolesVariant {
    HoleCase kind = HoleCase::OneOuter;
    bool c = false;  // the constant of the both-inner case
};

// lattice of the interior edges followed by eps1, sigma(eps1), eps2, sigma(eps2) with Z = 0
ChargeLattice lamination_lattice(const Triangulation& T, const HatBasis& basis, bool holes);

// half the lift of L_{sign e0}; the based lift for hole variants
TwistedSeries lift_lamination(int e0, int sign, const Triangulation& T, const HatBasis& basis, double L,
                              const std::optional<HolesVariant>& holes = std::nullopt);

struct Delta2Cone {
    cplx apex = 0, d1 = cplx(0, -1), d2 = cplx(0, -1);
    bool contains(cplx z, double tol = 1e-9) const;
};

Delta2Cone delta2_cone(const ChargeLattice& lat, int rank);

struct ApproxStep {
    long degree = 0;
    double height = 0;  // min -Im Z over the remaining defect
};

struct ApproxResult {
    TwistedSeries series;
    int steps = 0;
    std::vector<ApproxStep> defects;
};

ApproxResult approximate_generator(int e0, int sign, const Triangulation& T, const HatBasis& basis, double L);

long total_degree(const Vec& v, int rank);
long positive_degree(const Vec& v, int rank);

}
