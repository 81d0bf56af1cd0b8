#include "wcnet/path_lift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace wcnet {

namespace {

double principal(double a) {
    double r = std::remainder(a, 2 * M_PI);
    if (r <= -M_PI) r += 2 * M_PI;
    return r;
}

bool same_point(cplx a, cplx b) { return std::abs(a - b) <= 1e-9 * (1 + std::abs(a)); }

double seg_dist(cplx a, cplx b, cplx p) {
    cplx d = b - a;
    double n = std::norm(d);
    double t = n > 0 ? std::clamp(std::real((p - a) * std::conj(d)) / n, 0.0, 1.0) : 0.0;
    return std::abs(a + t * d - p);
}

// sheet 1 is the principal square root at the point
int canonical_sheet(const QuadraticDifferential& q, cplx z, cplx root) {
    cplx p = std::sqrt(q.P(z));
    return std::abs(root - p) <= std::abs(root + p) ? 1 : 2;
}

struct Track {
    std::vector<cplx> z, r, phi;
    double rot = 0;  // turning of the tangent against the framing by the sheet 1 root
};

void densify(const QuadraticDifferential& q, cplx a, cplx b, std::vector<cplx>& out, int depth) {
    double d = INFINITY;
    for (auto w : q.zeros) d = std::min({d, std::abs(a - w), std::abs(b - w)});
    if (depth < 40 && std::abs(b - a) > 0.1 * d) {
        cplx m = 0.5 * (a + b);
        densify(q, a, m, out, depth + 1);
        densify(q, m, b, out, depth + 1);
        return;
    }
    out.push_back(b);
}

Track make_track(const QuadraticDifferential& q, const std::vector<cplx>& path) {
    if (path.size() < 2) throw InputError("path needs at least two points");
    double excl = q.zeros.empty() ? 0 : 10 * q.eps_hit();
    Track t;
    t.z.push_back(path[0]);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        if (std::abs(path[i + 1] - path[i]) == 0) throw InputError("repeated path point");
        for (auto w : q.zeros)
            if (seg_dist(path[i], path[i + 1], w) < excl) throw InputError("path passes through a zero");
        densify(q, path[i], path[i + 1], t.z, 0);
    }
    size_t n = t.z.size();
    t.r.resize(n);
    t.phi.resize(n);
    t.r[0] = std::sqrt(q.P(t.z[0]));
    t.phi[0] = 0;
    for (size_t i = 1; i < n; ++i) {
        t.r[i] = q.root_near(t.z[i], t.r[i - 1]);
        t.phi[i] = t.phi[i - 1] + period(q, {t.z[i - 1], t.z[i]}, t.r[i - 1]);
        t.rot -= std::arg(t.r[i] / t.r[i - 1]);
        if (i + 1 < n) t.rot += std::arg((t.z[i + 1] - t.z[i]) / (t.z[i] - t.z[i - 1]));
    }
    return t;
}

struct Crossing {
    double t = 0;  // edge index plus fraction
    cplx y = 0;
    double ell = 0;
    cplx v = 0;  // period from the zero to the crossing along the trajectory
    int sheet = 1;  // sheet of the track that carries the incoming trajectory
    bool left = false;
    cplx phi = 0;
    int segment = -1;
};

cplx track_point(const Track& tr, double t) {
    size_t k = std::min(size_t(t), tr.z.size() - 2);
    double f = t - double(k);
    return tr.z[k] + f * (tr.z[k + 1] - tr.z[k]);
}

std::vector<Crossing> find_crossings(const QuadraticDifferential& q, const Track& tr, const SpectralNetwork& net,
                                     double ell_max, double angle_tol) {
    std::vector<Crossing> out;
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (auto z : tr.z) {
        xlo = std::min(xlo, z.real()), xhi = std::max(xhi, z.real());
        ylo = std::min(ylo, z.imag()), yhi = std::max(yhi, z.imag());
    }
    const cplx e = std::polar(1.0, net.phase);
    for (size_t si = 0; si < net.segments.size(); ++si) {
        const auto& s = net.segments[si];
        if (s.orientation != -1 || s.points.size() < 2) continue;
        for (size_t j = 0; j + 1 < s.points.size(); ++j) {
            if (s.lengths.size() == s.points.size() && s.lengths[j] >= ell_max) break;
            cplx A = s.points[j], B = s.points[j + 1];
            if (std::max(A.real(), B.real()) < xlo || std::min(A.real(), B.real()) > xhi ||
                std::max(A.imag(), B.imag()) < ylo || std::min(A.imag(), B.imag()) > yhi)
                continue;
            cplx u = B - A;
            for (size_t k = 0; k + 1 < tr.z.size(); ++k) {
                cplx P = tr.z[k], d = tr.z[k + 1] - tr.z[k];
                double den = std::imag(std::conj(d) * u);
                if (den == 0) continue;
                cplx w = A - P;
                double sp = std::imag(std::conj(w) * u) / den;
                double su = std::imag(std::conj(w) * d) / den;
                if (sp < 0 || sp >= 1 || su < 0 || su > 1) continue;
                Crossing c;
                c.t = double(k) + sp;
                c.y = P + sp * d;
                cplx tout = u / std::abs(u);
                cplx rp = std::sqrt(q.P(A));
                if (std::real(std::conj(e) * rp * tout) < 0) rp = -rp;
                c.v = e * s.lengths[j] + (su > 0 ? period(q, {A, c.y}, rp) : 0.0);
                c.ell = std::real(std::conj(e) * c.v);
                if (c.ell >= ell_max) continue;
                double sn = std::imag(std::conj(d / std::abs(d)) * (-tout));
                if (std::abs(sn) < angle_tol) throw GeometryError("path tangent to the spectral network");
                c.left = sn > 0;
                cplx rho = std::sqrt(q.P(c.y));
                // the incoming sheet integrates to e^{i theta} R_+ while moving towards the zero
                if (std::real(std::conj(e) * rho * (-tout)) < 0) rho = -rho;
                cplx r1 = q.root_near(c.y, tr.r[k]);
                c.sheet = std::abs(rho - r1) < std::abs(rho + r1) ? 1 : 2;
                c.phi = tr.phi[k] + period(q, {P, c.y}, tr.r[k]);
                c.segment = int(si);
                out.push_back(c);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) {
        return std::tie(a.t, a.sheet, a.segment) < std::tie(b.t, b.sheet, b.segment);
    });
    return out;
}

struct Enumerated {
    std::vector<int> seq;
    int start_sheet;
};

LiftElement assemble(const QuadraticDifferential& q, const Track& tr, const std::vector<Crossing>& cr,
                     const std::vector<Enumerated>& seqs, double phase, double L) {
    LiftElement F;
    F.level = L;
    size_t n = tr.z.size();
    cplx d0 = tr.z[1] - tr.z[0], d1 = tr.z[n - 1] - tr.z[n - 2];
    cplx phi_end = tr.phi[n - 1];
    for (auto& en : seqs) {
        int s = en.start_sheet;
        cplx Z = 0;
        cplx last = 0, V = 0;
        double W = 0;
        int nl = 0, nr = 0;
        for (int i : en.seq) {
            const auto& c = cr[i];
            Z += (s == 1 ? 1.0 : -1.0) * (c.phi - last);
            last = c.phi;
            W += 2 * c.ell;
            V += 2.0 * c.v;
            (c.left ? nl : nr)++;
            s = 3 - s;
        }
        Z += (s == 1 ? 1.0 : -1.0) * (phi_end - last);
        Z += V;
        cplx r0 = en.start_sheet == 1 ? tr.r[0] : -tr.r[0];
        cplx r1 = s == 1 ? tr.r[n - 1] : -tr.r[n - 1];
        SignedPathClass c;
        c.start = tr.z[0];
        c.end = tr.z[n - 1];
        c.start_sheet = canonical_sheet(q, c.start, r0);
        c.end_sheet = canonical_sheet(q, c.end, r1);
        c.charge = Z;
        c.weight = W;
        c.detours = int(en.seq.size());
        c.start_angle = std::arg(d0) - std::arg(r0);
        c.end_angle = std::arg(d1) - std::arg(r1);
        double k = (tr.rot + M_PI * (nl - nr) - principal(c.end_angle - c.start_angle)) / (2 * M_PI);
        long kk = std::lround(k);
        if (std::abs(k - double(kk)) > 1e-6) throw GeometryError("framing rotation is not integral");
        F.add(c, (kk % 2 == 0) ? Rational(1) : Rational(-1));
    }
    F.sort();
    return F;
}

LiftElement enumerate_lift(const QuadraticDifferential& q, const Track& tr, const std::vector<Crossing>& cr,
                           double phase, double L) {
    std::vector<Enumerated> seqs{{{}, 1}, {{}, 2}};
    using Item = std::tuple<double, std::vector<int>>;
    auto cmp = [](const Item& a, const Item& b) { return a > b; };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
    for (size_t i = 0; i < cr.size(); ++i)
        if (2 * cr[i].ell < L) pq.push({2 * cr[i].ell, {int(i)}});
    while (!pq.empty()) {
        auto [w, seq] = pq.top();
        pq.pop();
        seqs.push_back({seq, cr[seq[0]].sheet});
        if (seqs.size() > 2000000) throw GeometryError("detour enumeration does not terminate");
        const auto& lastc = cr[seq.back()];
        for (size_t j = seq.back() + 1; j < cr.size(); ++j) {
            if (cr[j].t <= lastc.t + 1e-12 || cr[j].sheet == lastc.sheet) continue;
            double w2 = w + 2 * cr[j].ell;
            if (w2 >= L) continue;
            auto s2 = seq;
            s2.push_back(int(j));
            pq.push({w2, std::move(s2)});
        }
    }
    return assemble(q, tr, cr, seqs, phase, L);
}

double path_reach(const QuadraticDifferential& q, const Track& tr) {
    double reach = 0;
    for (auto z : tr.z) reach = std::max(reach, 1.5 * std::abs(z) + 1);
    if (reach >= q.r_escape()) throw InputError("path leaves the disk where the network is resolved");
    return reach;
}

std::vector<cplx> subpath(const Track& tr, double a, double b) {
    std::vector<cplx> out{track_point(tr, a)};
    for (size_t k = size_t(std::floor(a)) + 1; double(k) < b; ++k)
        if (!same_point(tr.z[k], out.back())) out.push_back(tr.z[k]);
    cplx e = track_point(tr, b);
    if (!same_point(e, out.back())) out.push_back(e);
    return out;
}

}

bool SignedPathClass::same_class(const SignedPathClass& o, double tol) const {
    if (start_sheet != o.start_sheet || end_sheet != o.end_sheet) return false;
    if (!same_point(start, o.start) || !same_point(end, o.end)) return false;
    if (std::abs(principal(start_angle - o.start_angle)) > 1e-7 || std::abs(principal(end_angle - o.end_angle)) > 1e-7)
        return false;
    if (!hclass.empty() || !o.hclass.empty()) return hclass == o.hclass;
    return std::abs(charge - o.charge) <= tol * (1 + std::abs(charge));
}

void LiftElement::add(const SignedPathClass& c, const Rational& k, double tol) {
    if (k == 0) return;
    for (auto it = terms.begin(); it != terms.end(); ++it)
        if (it->cls.same_class(c, tol)) {
            it->coeff += k;
            if (it->coeff == 0) terms.erase(it);
            return;
        }
    terms.push_back({c, k});
}

Rational LiftElement::coeff(const SignedPathClass& c, double tol) const {
    for (auto& t : terms)
        if (t.cls.same_class(c, tol)) return t.coeff;
    return 0;
}

LiftElement LiftElement::component(int s, int e) const {
    LiftElement out;
    out.level = level;
    out.translate = translate;
    for (auto& t : terms)
        if (t.cls.start_sheet == s && t.cls.end_sheet == e) out.terms.push_back(t);
    return out;
}

void LiftElement::sort() {
    std::sort(terms.begin(), terms.end(), [](const LiftTerm& a, const LiftTerm& b) {
        auto ka = std::make_tuple(a.cls.start_sheet, a.cls.end_sheet, a.cls.hclass, a.cls.weight, a.cls.charge.real(),
                                  a.cls.charge.imag());
        auto kb = std::make_tuple(b.cls.start_sheet, b.cls.end_sheet, b.cls.hclass, b.cls.weight, b.cls.charge.real(),
                                  b.cls.charge.imag());
        return ka < kb;
    });
}

std::string LiftElement::str() const {
    std::ostringstream os;
    os.precision(12);
    for (auto& t : terms) {
        os << "(" << t.cls.start_sheet << "," << t.cls.end_sheet << ") ";
        if (!t.cls.hclass.empty()) os << vstr(t.cls.hclass) << " ";
        os << "Z=" << t.cls.charge << " w=" << t.cls.weight << " : " << t.coeff.get_str() << "\n";
    }
    return os.str();
}

std::optional<std::string> lift_diff(const LiftElement& a, const LiftElement& b, double below, double tol) {
    auto describe = [](const LiftTerm& t, const Rational& other) {
        std::ostringstream os;
        os.precision(12);
        os << "(" << t.cls.start_sheet << "," << t.cls.end_sheet << ") ";
        if (!t.cls.hclass.empty()) os << vstr(t.cls.hclass) << " ";
        os << "Z=" << t.cls.charge << ": " << t.coeff.get_str() << " vs " << other.get_str();
        return os.str();
    };
    for (auto& t : a.terms)
        if (t.cls.weight < below && b.coeff(t.cls, tol) != t.coeff) return describe(t, b.coeff(t.cls, tol));
    for (auto& t : b.terms)
        if (t.cls.weight < below && a.coeff(t.cls, tol) != t.coeff) return describe(t, a.coeff(t.cls, tol));
    return std::nullopt;
}

bool lift_equal(const LiftElement& a, const LiftElement& b, double below, double tol) {
    return !lift_diff(a, b, below, tol);
}

LiftElement lift_path(const QuadraticDifferential& q, const std::vector<cplx>& path, double phase, double L,
                      const LiftOptions& opt) {
    Track tr = make_track(q, path);
    std::vector<Crossing> cr;
    double cap = opt.network_cap.value_or(L / 2);
    if (cap > 0 && !q.zeros.empty()) {
        double reach = path_reach(q, tr);
        SpectralNetwork net = build_network(q, phase, cap + 1e-9, 1e-10, reach);
        for (auto& s : net.segments)
            if (!s.error.empty()) throw GeometryError("network integration failed: " + s.error);
        if (!opt.allow_saddles && !net.saddle_segments().empty()) throw InputError("phase carries a saddle connection");
        cr = find_crossings(q, tr, net, std::min(cap, L / 2), opt.angle_tol);
    }
    return enumerate_lift(q, tr, cr, phase, L);
}

LiftElement trivial_lift(const QuadraticDifferential& q, const std::vector<cplx>& path, double phase) {
    Track tr = make_track(q, path);
    auto F = enumerate_lift(q, tr, {}, phase, 0);
    F.level = INFINITY;
    return F;
}

LiftElement compose_lifts(const LiftElement& a, const LiftElement& b) {
    LiftElement out;
    out.level = std::min(a.level, b.level);
    out.translate = a.translate + b.translate;
    for (auto& s : a.terms)
        for (auto& t : b.terms) {
            if (s.cls.end_sheet != t.cls.start_sheet || !same_point(s.cls.end, t.cls.start)) continue;
            SignedPathClass c;
            c.start = s.cls.start;
            c.end = t.cls.end;
            c.start_sheet = s.cls.start_sheet;
            c.end_sheet = t.cls.end_sheet;
            if (s.cls.hclass.size() == t.cls.hclass.size() && !s.cls.hclass.empty())
                c.hclass = vadd(s.cls.hclass, t.cls.hclass);
            c.charge = s.cls.charge + t.cls.charge;
            c.weight = s.cls.weight + t.cls.weight;
            if (c.weight >= out.level) continue;
            c.detours = s.cls.detours + t.cls.detours;
            c.start_angle = s.cls.start_angle;
            c.end_angle = t.cls.end_angle;
            double k = (principal(s.cls.end_angle - s.cls.start_angle) + principal(t.cls.start_angle - s.cls.end_angle) +
                        principal(t.cls.end_angle - t.cls.start_angle) -
                        principal(t.cls.end_angle - s.cls.start_angle)) /
                       (2 * M_PI);
            long kk = std::lround(k);
            Rational coeff = s.coeff * t.coeff;
            if (kk % 2) coeff = -coeff;
            out.add(c, coeff);
        }
    out.sort();
    return out;
}

// local models

const char* model_name(ModelKind k) {
    switch (k) {
        case ModelKind::SingleSaddle: return "SingleSaddle";
        case ModelKind::Cylinder: return "Cylinder";
        case ModelKind::ToralEnd: return "ToralEnd";
        case ModelKind::DegenerateRing: return "DegenerateRing";
    }
    return "?";
}

const char* crossing_name(CrossingType c) {
    static const char* names[] = {"i", "ii", "iii", "iv", "v"};
    return names[int(c)];
}

namespace {

bool toral_model(const LocalModel& m) {
    return m.kind == ModelKind::ToralEnd || (m.kind == ModelKind::DegenerateRing && m.toral);
}

std::pair<int, int> base_sheets(int b) {
    switch (b) {
        case P1: return {1, 1};
        case P2: return {2, 2};
        case Dsh2: return {2, 1};
        default: return {1, 2};
    }
}

struct ModelBuilder {
    const LocalModel& m;
    double L;
    LiftElement F;

    cplx base_charge(int b) const {
        switch (b) {
            case P1: return m.path;
            case P2: return -m.path;
            case Dsh1: return m.detour;
            case Dsh2: return 1.25 * m.detour;
            case TorSh: return 1.5 * m.detour;
            default: return 1.5 * m.detour + m.core;
        }
    }
    double base_weight(int b) const { return b == P1 || b == P2 ? 0.0 : std::abs(base_charge(b)); }

    SignedPathClass cls(int b, long n) const {
        SignedPathClass c;
        auto [s, e] = base_sheets(b);
        c.start_sheet = s;
        c.end_sheet = e;
        c.hclass = {long(b), n};
        c.charge = base_charge(b) + double(n) * m.core;
        c.weight = base_weight(b) + double(n) * std::abs(m.core);
        c.detours = b == P1 || b == P2 ? 0 : 1;
        return c;
    }
    void add(int b, long n, const Rational& k) {
        auto c = cls(b, n);
        if (c.weight < L) F.add(c, k);
    }
    // sum over j >= 0 of step^j times x^offset
    void series(int b, long offset, long step, const Rational& k) {
        for (long n = offset; base_weight(b) + double(n) * std::abs(m.core) < L; n += step) add(b, n, k);
    }
};

}

void LocalModel::validate() const {
    if (!(std::abs(core) > 0) || !std::isfinite(std::abs(core))) throw InputError("core charge must be nonzero");
    if (!(std::abs(detour) > 0)) throw InputError("detour charge must be nonzero");
    bool ok = true;
    switch (kind) {
        case ModelKind::SingleSaddle: ok = crossing != CrossingType::V; break;
        case ModelKind::Cylinder: ok = crossing != CrossingType::IV && crossing != CrossingType::V; break;
        case ModelKind::ToralEnd: break;
        case ModelKind::DegenerateRing:
            ok = toral || (crossing != CrossingType::IV && crossing != CrossingType::V);
            break;
    }
    if (!ok) throw InputError(std::string("crossing type ") + crossing_name(crossing) + " does not occur in " +
                              model_name(kind));
}

BpsRay LocalModel::ray() const {
    BpsRay r;
    r.phase = std::arg(core);
    switch (kind) {
        case ModelKind::SingleSaddle: r.content = {{{1}, 1, {1}}}; break;
        case ModelKind::Cylinder: r.content = {{{1}, -2, {1}}}; break;
        case ModelKind::ToralEnd: r.content = {{{1}, 2, {1}}, {{2}, -2, {2}}}; break;
        case ModelKind::DegenerateRing:
            if (toral)
                r.content = {{{1}, 2, {1}}, {{2}, -1, {2}}};
            else
                r.content = {{{1}, -1, {1}}};
            break;
    }
    return r;
}

std::array<std::array<long, BaseCount>, 2> model_intersections(const LocalModel& m) {
    std::array<std::array<long, BaseCount>, 2> I{};
    bool tor = toral_model(m);
    int ring = tor ? 1 : 0;  // the cylinder core is gamma_0 or 2 gamma_0
    if (m.kind == ModelKind::SingleSaddle) {
        if (m.crossing == CrossingType::II) I[0][Dsh1] = 1;
        if (m.crossing == CrossingType::III) I[0][Dsh1] = -1;
        if (m.crossing == CrossingType::IV) I[0][P1] = -1, I[0][P2] = 1;
        return I;
    }
    if (m.crossing == CrossingType::III) {
        I[ring][Dsh1] = 1;
        I[ring][Dsh2] = -1;
        I[ring][P1] = -1;
        I[ring][P2] = 1;
    }
    if (tor && m.crossing == CrossingType::IV) {
        I[0][Dsh1] = -1, I[1][Dsh1] = 1;
        I[0][Dsh2] = 1, I[1][Dsh2] = -1;
        I[0][P1] = 1, I[1][P1] = -1;
        I[0][P2] = -1, I[1][P2] = 1;
    }
    return I;
}

LiftElement lift_one_sided(const LocalModel& m, Side side, double L) {
    m.validate();
    ModelBuilder B{m, L, {}};
    B.F.level = L;
    bool plus = side == Side::Plus;
    long c = toral_model(m) ? 2 : 1;  // power of x carried by one turn around the cylinder
    auto trivial = [&] {
        B.add(P1, 0, 1);
        B.add(P2, 0, 1);
    };
    if (m.kind == ModelKind::SingleSaddle) {
        trivial();
        switch (m.crossing) {
            case CrossingType::I: B.add(Dsh1, 0, 1); break;
            case CrossingType::II:
                B.add(Dsh1, 0, 1);
                if (plus) B.add(Dsh1, 1, -1);
                break;
            case CrossingType::III:
                B.add(Dsh1, 0, 1);
                if (!plus) B.add(Dsh1, 1, -1);
                break;
            case CrossingType::IV:
                B.add(Dsh1, 0, 1);
                B.add(Dsh2, 0, 1);
                if (plus)
                    B.add(P2, 1, -1);  // American
                else
                    B.add(P1, 1, -1);  // British
                break;
            default: break;
        }
    } else {
        switch (m.crossing) {
            case CrossingType::I:
                trivial();
                B.add(Dsh1, 0, 1);
                break;
            case CrossingType::II:
                trivial();
                B.add(Dsh1, 0, 1);
                B.add(Dsh1, c, -1);
                break;
            case CrossingType::III:
                if (plus) {
                    B.add(Dsh1, 0, 1);
                    B.series(Dsh2, 0, c, 1);
                    B.series(P1, 0, c, 1);
                    B.add(P2, 0, 1);
                } else {
                    B.series(Dsh1, 0, c, 1);
                    B.add(Dsh2, 0, 1);
                    B.add(P1, 0, 1);
                    B.series(P2, 0, c, 1);
                }
                break;
            case CrossingType::IV:
                // short and long families with their twists around the cylinder
                if (plus) {
                    B.add(Dsh1, 0, 1);
                    B.series(Dsh2, 0, 2, 1);
                    B.series(Dsh2, 1, 2, -1);
                    B.add(P1, 0, 1);
                    B.series(P1, 1, 2, -1);
                    B.series(P1, 2, 2, 1);
                    B.add(P2, 0, 1);
                } else {
                    B.series(Dsh1, 0, 2, 1);
                    B.series(Dsh1, 1, 2, -1);
                    B.add(Dsh2, 0, 1);
                    B.add(P1, 0, 1);
                    B.add(P2, 0, 1);
                    B.series(P2, 1, 2, -1);
                    B.series(P2, 2, 2, 1);
                }
                break;
            case CrossingType::V:
                trivial();
                B.add(TorSh, 0, 1);
                B.add(TorLong, 0, 1);
                break;
        }
    }
    B.F.sort();
    return B.F;
}

namespace {

// coefficients of (1 - t)^e up to degree n
std::vector<Rational> binomial_series(long e, long n) {
    std::vector<Rational> out(n + 1);
    Rational c = 1;
    for (long m = 0; m <= n; ++m) {
        out[m] = c;
        c = c * Rational(e - m) / Rational(m + 1) * Rational(-1);
    }
    return out;
}

}

LiftElement model_k_apply(const LocalModel& m, const BpsRay& ray, const LiftElement& f, double L, bool* ok) {
    if (ok) *ok = true;
    auto fail = [&] {
        if (ok) *ok = false;
    };
    auto I = model_intersections(m);
    BpsRay ref = m.ray();
    std::array<std::array<long, BaseCount>, 2> ex{};
    for (auto& rc : ray.content) {
        if (rc.vector.size() != 1 || (rc.vector[0] != 1 && rc.vector[0] != 2)) {
            fail();
            continue;
        }
        int k = int(rc.vector[0]) - 1;
        long om = 0;
        for (auto& r : ref.content)
            if (r.vector == rc.vector) om = r.omega;
        bool touches = std::any_of(I[k].begin(), I[k].end(), [](long v) { return v != 0; });
        if (om == 0) {
            if (touches && rc.omega != 0) fail();
            continue;
        }
        if (rc.omega % om != 0) {
            if (touches) fail();
            continue;
        }
        for (int b = 0; b < BaseCount; ++b) ex[k][b] += I[k][b] * (rc.omega / om);
    }
    ModelBuilder B{m, L, {}};
    B.F.level = L;
    double a = std::abs(m.core);
    for (auto& t : f.terms) {
        long b = t.cls.hclass.at(0), n0 = t.cls.hclass.at(1);
        long maxd = std::max(0L, long(std::ceil((L - B.base_weight(int(b))) / a)) + 1);
        auto s1 = binomial_series(ex[0][b], maxd);
        auto s2 = binomial_series(ex[1][b], maxd / 2 + 1);
        std::vector<Rational> prod(maxd + 1);
        for (long i = 0; i <= maxd; ++i)
            for (long j = 0; i + 2 * j <= maxd && j < long(s2.size()); ++j) prod[i + 2 * j] += s1[i] * s2[j];
        for (long d = 0; d <= maxd; ++d)
            if (prod[d] != 0) B.add(int(b), n0 + d, t.coeff * prod[d]);
    }
    B.F.sort();
    return B.F;
}

bool wall_identity_check(const LocalModel& m, const BpsRay& ray, double L) {
    auto fm = lift_one_sided(m, Side::Minus, L);
    auto fp = lift_one_sided(m, Side::Plus, L);
    bool ok = true;
    auto kf = model_k_apply(m, ray, fm, L, &ok);
    return ok && lift_equal(kf, fp, L);
}

// one-sided limits from the network at the active phase

LimitReport limit_check_report(const QuadraticDifferential& q, double phase, const std::vector<cplx>& path, double eps,
                               double L) {
    LimitReport rep;
    LiftOptions at;
    at.allow_saddles = true;
    Track tr = make_track(q, path);
    SpectralNetwork net = build_network(q, phase, L / 2 + 1e-9, 1e-10, path_reach(q, tr));
    for (auto& s : net.segments)
        if (!s.error.empty()) throw GeometryError("network integration failed: " + s.error);
    auto Gp = lift_path(q, path, phase + eps, L);
    auto Gm = lift_path(q, path, phase - eps, L);
    double margin = 0.02 * L;
    auto saddles = net.saddle_segments();
    if (saddles.empty()) {
        auto G0 = lift_path(q, path, phase, L);
        rep.plus = lift_equal(Gp, G0, L - margin);
        rep.minus = lift_equal(Gm, G0, L - margin);
        return rep;
    }
    auto cr = find_crossings(q, tr, net, L / 2, at.angle_tol);
    cplx Zc = 0;
    std::vector<int> saddle_zero;
    std::map<int, cplx> saddle_dir;  // initial direction of the saddle at each endpoint
    for (int si : saddles) {
        const auto& s = net.segments[si];
        size_t n = s.points.size();
        Zc = 2 * s.arclength * std::polar(1.0, phase);
        saddle_dir[s.zero] = s.points[1] - s.points[0];
        saddle_dir[s.hit] = s.points[n - 2] - s.points[n - 1];
    }
    if (saddles.size() != 1 || saddle_dir.size() != 2) throw InputError("active phase is not a single saddle connection");
    std::vector<std::vector<int>> groups;
    for (size_t i = 0; i < cr.size(); ++i) {
        if (!groups.empty() && std::abs(cr[i].t - cr[groups.back().back()].t) < 1e-9)
            groups.back().push_back(int(i));
        else
            groups.push_back({int(i)});
    }
    std::vector<double> cuts{0};
    for (size_t g = 0; g + 1 < groups.size(); ++g)
        cuts.push_back(0.5 * (cr[groups[g].back()].t + cr[groups[g + 1].front()].t));
    cuts.push_back(double(tr.z.size() - 1));
    std::optional<LiftElement> Fp, Fm;
    for (size_t p = 0; p + 1 < cuts.size(); ++p) {
        auto piece = subpath(tr, cuts[p], cuts[p + 1]);
        auto base = lift_path(q, piece, phase, L, at);
        LiftElement plus = base, minus = base;
        if (!groups.empty()) {
            auto& grp = groups[p];
            for (int i : grp) {
                const auto& c = cr[i];
                const auto& seg = net.segments[c.segment];
                bool on_saddle = seg.terminus == Terminus::HitZero;
                if (on_saddle) {
                    // double detour through both endpoints, first turn fixed by the driving rule
                    auto& target = c.left ? minus : plus;
                    int s0 = 0;
                    for (auto& t : base.terms)
                        if (t.cls.detours == 1 && std::abs(t.cls.weight - 2 * c.ell) < 1e-6 * (1 + L))
                            s0 = t.cls.start_sheet;
                    for (auto t : base.terms) {
                        if (t.cls.detours != 0 || t.cls.start_sheet != s0) continue;
                        auto cls = t.cls;
                        cls.charge += Zc;
                        cls.weight += std::abs(Zc);
                        cls.detours = 2;
                        if (cls.weight < L) target.add(cls, t.coeff);
                    }
                } else if (saddle_dir.count(seg.zero)) {
                    cplx dr = seg.points[1] - seg.points[0];
                    double delta = std::arg(dr / saddle_dir[seg.zero]);
                    auto& target = delta > 0 ? minus : plus;
                    for (auto t : base.terms) {
                        if (t.cls.detours != 1) continue;
                        if (std::abs(t.cls.weight - 2 * c.ell) > 1e-6 * (1 + L)) continue;
                        auto cls = t.cls;
                        cls.charge += Zc;
                        cls.weight += std::abs(Zc);
                        if (cls.weight < L) target.add(cls, t.coeff);
                    }
                }
            }
        }
        Fp = Fp ? compose_lifts(*Fp, plus) : plus;
        Fm = Fm ? compose_lifts(*Fm, minus) : minus;
    }
    auto ambiguous = [&](const LiftElement& G, const LiftElement& M) {
        for (auto& g : G.terms) {
            int hits = 0;
            for (auto& t : M.terms)
                if (t.cls.same_class(g.cls)) ++hits;
            if (hits > 1) throw InconclusiveError("two model classes match one geometric term; decrease eps");
        }
    };
    ambiguous(Gp, *Fp);
    ambiguous(Gm, *Fm);
    auto dp = lift_diff(Gp, *Fp, L - margin);
    auto dm = lift_diff(Gm, *Fm, L - margin);
    rep.plus = !dp;
    rep.minus = !dm;
    if (dp) rep.detail += "plus: " + *dp + "\n";
    if (dm) rep.detail += "minus: " + *dm + "\n";
    return rep;
}

bool limit_check(const QuadraticDifferential& q, double phase, const std::vector<cplx>& path, double eps, double L) {
    auto r = limit_check_report(q, phase, path, eps, L);
    return r.plus && r.minus;
}

}
