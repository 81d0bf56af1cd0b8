#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "wcnet/flat.hpp"
#include "wcnet/lattice.hpp"

namespace wcnet {

struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassError : std::runtime_error {
    bool ambiguous = false;
    ClassError(const std::string& m, bool amb) : std::runtime_error(m), ambiguous(amb) {}
};

struct Triangle {
    std::array<int, 3> v;  // counterclockwise
    std::array<int, 3> e;  // e[i] joins v[i] and v[i+1]
};

struct Fans {
    std::vector<int> e, f, g, h;
};

struct Triangulation {
    int n_vertices = 0;
    std::vector<bool> is_hole;
    std::vector<std::pair<int, int>> edges;
    std::vector<Triangle> triangles;

    // derived by finalize()
    std::vector<std::vector<std::pair<int, int>>> edge_sides;  // (triangle, slot)
    std::vector<bool> interior;
    std::vector<int> interior_edges;
    std::vector<int> basis_index;  // edge -> position among interior edges, -1 for boundary

    void finalize();
    int rank() const { return int(interior_edges.size()); }
    Fans fans(int e0) const;
    std::array<int, 4> quadrilateral(int e0) const;
};

Triangulation polygon_triangulation(int n, const std::vector<std::array<int, 3>>& tris);
Triangulation random_polygon_triangulation(int n, std::mt19937& rng);

std::vector<std::vector<long>> pairing_from_triangulation(const Triangulation& T);

struct HatBasis {
    std::vector<int> edges;
    std::vector<cplx> charge;
    std::vector<std::pair<int, int>> cilia;  // cilium pair labelling each basis edge
    std::vector<std::pair<int, int>> zeros;

    ChargeLattice lattice(const Triangulation& T) const;
};

struct NetworkTriangulation {
    Triangulation tri;
    HatBasis basis;
    double phase = 0;
};

NetworkTriangulation triangulation_from_network(const QuadraticDifferential& q, double phase, double cap);

Vec class_from_periods(const SaddleConnection& sc, const HatBasis& basis, double tol = 1e-6);
Vec class_from_charge(cplx hat, const std::vector<cplx>& charges, double tol = 1e-6);

enum class CycleKind { Case1, Case4a, Fixture3a, Fixture3b, Fixture4b };

struct CycleClasses {
    Vec g0, gt, gb, g1, g2;
};

BpsRay bps_cycle(CycleKind kind, double phase, const CycleClasses& c);
BpsRay bps_cycle(const Classification& cls, double phase, const CycleClasses& c);

std::string triangulation_to_json(const Triangulation& T);
Triangulation triangulation_from_json(const std::string& text);

}
