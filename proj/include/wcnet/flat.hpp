#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wcnet/lattice.hpp"

namespace wcnet {

struct IntegrationError : std::runtime_error {
    cplx where;
    IntegrationError(const std::string& m, cplx z) : std::runtime_error(m), where(z) {}
};

struct QuadraticDifferential {
    std::vector<cplx> coeffs;  // ascending powers of z
    std::vector<cplx> zeros;
    int pole_order_at_infinity = 0;
    bool test_mode = false;

    static QuadraticDifferential from_coeffs(std::vector<cplx> c, bool test_mode = false);

    int degree() const { return int(coeffs.size()) - 1; }
    cplx lead() const { return coeffs.back(); }
    cplx P(cplx z) const;
    cplx dP(cplx z) const;
    cplx root_near(cplx z, cplx ref) const;
    double zero_scale() const;
    double eps_hit() const { return 1e-4 * zero_scale(); }
    double r_escape() const;
    int nearest_zero(cplx z, double* dist = nullptr) const;
    int cilia() const { return degree() + 2; }
    int cilium_of(cplx z, double theta) const;
};

enum class Terminus { HitZero, Escaped, LengthCapped };

struct TrajectorySegment {
    std::vector<cplx> points;
    std::vector<double> lengths;  // flat length at each point
    double arclength = 0;
    int zero = -1, ray = -1;
    int orientation = 1;  // +1 for W+, -1 for W-
    double phase = 0;
    Terminus terminus = Terminus::LengthCapped;
    int hit = -1;
    int cilium = -1;
    cplx start_root = 0;
    std::string error;
};

TrajectorySegment integrate_trajectory(const QuadraticDifferential& q, cplx start, cplx root_seed, double phase,
                                       double cap, double tol = 1e-10, int skip_zero = -1,
                                       double reach = 0);
TrajectorySegment integrate_separatrix(const QuadraticDifferential& q, int zero, int ray, double phase, double cap,
                                       double tol = 1e-10, double reach = 0);

struct SaddleConnection {
    int start_zero = -1, end_zero = -1;
    int ray = -1;
    double phase = 0;
    cplx charge = 0;
    cplx hat_charge = 0;
    std::optional<Vec> lattice_class;
    std::vector<cplx> path;
    cplx start_root = 0;
};

struct Incidence {
    int path = -1;
    int segment = -1;
    double path_param = 0;
    double segment_length = 0;
    cplx point = 0;
};

struct SpectralNetwork {
    double phase = 0;
    double cap = 0;
    std::vector<TrajectorySegment> segments;
    std::vector<Incidence> incidences;

    std::vector<int> saddle_segments() const;
};

// reach: radius inside which trajectories are followed in full before the early escape test
SpectralNetwork build_network(const QuadraticDifferential& q, double phase, double cap, double tol = 1e-10,
                              double reach = 0);

struct ActiveRay {
    double phase = 0;
    std::vector<SaddleConnection> connections;
};

struct ScanResult {
    std::vector<ActiveRay> rays;
    std::vector<std::pair<double, double>> unresolved;
    std::vector<SaddleConnection> beyond_cap;
};

struct ScanOptions {
    int grid = 720;
    double tol_phase = 1e-12;
    double tol = 1e-10;
};

ScanResult scan_active_rays(const QuadraticDifferential& q, const Sector& sector, double cap,
                            const ScanOptions& opt = {});

cplx period(const QuadraticDifferential& q, const std::vector<cplx>& path, cplx branch_seed);
cplx root_at_end(const QuadraticDifferential& q, const std::vector<cplx>& path, cplx branch_seed);

// closed-trajectory region of a flat cylinder made of one rectangle glued along its vertical sides
struct GluedRectangle {
    double width = 1, height = 1;
    double rotation = 0;  // direction of the core curve
    std::vector<int> top_connections, bottom_connections;
};

struct RingDomain {
    cplx core_period = 0;
    std::vector<int> boundary_connections;
    bool degenerate = false;
};

enum class RayCase { Case1, Case4a, Unknown };

struct Classification {
    RayCase kind = RayCase::Unknown;
    std::optional<RingDomain> ring;
};

Classification classify_ray(const QuadraticDifferential& q, double phase,
                            const std::vector<SaddleConnection>& connections, double cap);
Classification classify_ray(const GluedRectangle& cyl, double phase, const std::vector<SaddleConnection>& connections,
                            double cap);

const char* case_name(RayCase c);

}
