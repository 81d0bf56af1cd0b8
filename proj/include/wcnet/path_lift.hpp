#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcnet/flat.hpp"
#include "wcnet/homology.hpp"
#include "wcnet/lattice.hpp"

namespace wcnet {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InconclusiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A path class on the double cover. Geometric lifts identify classes by endpoints, sheets and charge;
// local models identify them by hclass = {base, power of the core class}.
// The canonical sign of a class is folded into the coefficient of its term.
struct SignedPathClass {
    cplx start = 0, end = 0;
    int start_sheet = 1, end_sheet = 1;
    Vec hclass;
    cplx charge = 0;
    double weight = 0;  // accumulated detour height
    double start_angle = 0, end_angle = 0;  // tangent direction against the framing at the endpoints
    int detours = 0;

    bool same_class(const SignedPathClass& o, double tol = 1e-6) const;
};

struct LiftTerm {
    SignedPathClass cls;
    Rational coeff;
};

struct LiftElement {
    std::vector<LiftTerm> terms;
    double level = 0;
    cplx translate = 0;

    void add(const SignedPathClass& c, const Rational& k, double tol = 1e-6);
    Rational coeff(const SignedPathClass& c, double tol = 1e-6) const;
    LiftElement component(int start_sheet, int end_sheet) const;
    void sort();
    std::string str() const;
};

// first term present in one lift and not the other, below the given height
std::optional<std::string> lift_diff(const LiftElement& a, const LiftElement& b, double below, double tol = 1e-6);
bool lift_equal(const LiftElement& a, const LiftElement& b, double below, double tol = 1e-6);

struct LiftOptions {
    std::optional<double> network_cap;  // defaults to L/2
    bool allow_saddles = false;
    double angle_tol = 1e-7;
};

LiftElement lift_path(const QuadraticDifferential& q, const std::vector<cplx>& path, double phase, double L,
                      const LiftOptions& opt = {});

LiftElement trivial_lift(const QuadraticDifferential& q, const std::vector<cplx>& path, double phase);

LiftElement compose_lifts(const LiftElement& a, const LiftElement& b);

enum class ModelKind { SingleSaddle, Cylinder, ToralEnd, DegenerateRing };
enum class CrossingType { I, II, III, IV, V };
enum class Side { Plus, Minus };

struct LocalModel {
    ModelKind kind = ModelKind::SingleSaddle;
    CrossingType crossing = CrossingType::I;
    bool toral = false;  // DegenerateRing: the 3b variant
    cplx core = cplx(0, 1);  // Z of the core class
    cplx detour = cplx(0, 0.4);  // Z of the short detours
    cplx path = 0.1;  // Z of the trivial lift on sheet 1

    void validate() const;
    BpsRay ray() const;
};

enum ModelBase { P1 = 0, P2 = 1, Dsh1 = 2, Dsh2 = 3, TorSh = 4, TorLong = 5, BaseCount = 6 };

LiftElement lift_one_sided(const LocalModel& model, Side side, double L);

// intersection numbers of the model's base classes with L(gamma_0) and L(2 gamma_0)
std::array<std::array<long, BaseCount>, 2> model_intersections(const LocalModel& model);

LiftElement model_k_apply(const LocalModel& model, const BpsRay& ray, const LiftElement& f, double L, bool* ok = nullptr);

bool wall_identity_check(const LocalModel& model, const BpsRay& ray, double L);

struct LimitReport {
    bool plus = false, minus = false;
    std::string detail;
};

LimitReport limit_check_report(const QuadraticDifferential& q, double phase, const std::vector<cplx>& path, double eps,
                               double L);
bool limit_check(const QuadraticDifferential& q, double phase, const std::vector<cplx>& path, double eps, double L);

const char* model_name(ModelKind k);
const char* crossing_name(CrossingType c);

}
