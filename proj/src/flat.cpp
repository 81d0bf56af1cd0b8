#include "wcnet/flat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

namespace wcnet {

namespace {

namespace odeint = boost::numeric::odeint;
using Stepper = odeint::runge_kutta_dopri5<cplx, double, cplx, double, odeint::vector_space_algebra>;

cplx choose(cplx r, cplx ref) { return std::real(r * std::conj(ref)) < 0 ? -r : r; }

double seg_dist(cplx a, cplx b, cplx p) {
    cplx d = b - a;
    double l2 = std::norm(d);
    double t = l2 > 0 ? std::clamp(std::real((p - a) * std::conj(d)) / l2, 0.0, 1.0) : 0.0;
    return std::abs(a + t * d - p);
}

}

QuadraticDifferential QuadraticDifferential::from_coeffs(std::vector<cplx> c, bool test_mode) {
    while (!c.empty() && std::abs(c.back()) == 0) c.pop_back();
    if (c.empty()) throw InputError("zero polynomial");
    QuadraticDifferential q;
    q.coeffs = c;
    q.test_mode = test_mode;
    int d = q.degree();
    if (d == 0 && !test_mode) throw InputError("constant differential has no zeros");
    q.pole_order_at_infinity = d + 4;
    if (d > 0) {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
        for (int i = 1; i < d; ++i) comp(i, i - 1) = 1;
        for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[i] / c[d];
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
        for (int i = 0; i < d; ++i) {
            cplx z = es.eigenvalues()[i];
            for (int it = 0; it < 8; ++it) {
                cplx dp = q.dP(z);
                if (std::abs(dp) == 0) break;
                cplx nz = z - q.P(z) / dp;
                if (std::abs(q.P(nz)) >= std::abs(q.P(z))) break;
                z = nz;
            }
            q.zeros.push_back(z);
        }
        std::sort(q.zeros.begin(), q.zeros.end(), [](cplx a, cplx b) {
            if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        double big = 0;
        for (auto z : q.zeros) big = std::max(big, std::abs(z));
        for (size_t i = 0; i < q.zeros.size(); ++i)
            for (size_t j = i + 1; j < q.zeros.size(); ++j)
                if (std::abs(q.zeros[i] - q.zeros[j]) < 1e-6 * (1 + big)) throw InputError("zeros are not simple");
        for (auto z : q.zeros)
            if (std::abs(q.dP(z)) < 1e-9 * std::abs(c[d]) * std::pow(1 + big, d - 1))
                throw InputError("zeros are not simple");
    }
    return q;
}

cplx QuadraticDifferential::P(cplx z) const {
    cplx r = 0;
    for (int i = degree(); i >= 0; --i) r = r * z + coeffs[i];
    return r;
}

cplx QuadraticDifferential::dP(cplx z) const {
    cplx r = 0;
    for (int i = degree(); i >= 1; --i) r = r * z + double(i) * coeffs[i];
    return r;
}

cplx QuadraticDifferential::root_near(cplx z, cplx ref) const { return choose(std::sqrt(P(z)), ref); }

double QuadraticDifferential::zero_scale() const {
    if (zeros.size() < 2) return 1;
    double m = INFINITY;
    for (size_t i = 0; i < zeros.size(); ++i)
        for (size_t j = i + 1; j < zeros.size(); ++j) m = std::min(m, std::abs(zeros[i] - zeros[j]));
    return m;
}

double QuadraticDifferential::r_escape() const {
    double m = 0;
    for (auto z : zeros) m = std::max(m, std::abs(z));
    return 10 * (1 + m);
}

int QuadraticDifferential::nearest_zero(cplx z, double* dist) const {
    int best = -1;
    double bd = INFINITY;
    for (size_t i = 0; i < zeros.size(); ++i) {
        double d = std::abs(z - zeros[i]);
        if (d < bd) bd = d, best = int(i);
    }
    if (dist) *dist = bd;
    return best;
}

int QuadraticDifferential::cilium_of(cplx z, double theta) const {
    int n = cilia();
    double x = (n * std::arg(z) + std::arg(lead()) - 2 * theta) / (2 * M_PI);
    long k = std::lround(x);
    return int(((k % n) + n) % n);
}

TrajectorySegment integrate_trajectory(const QuadraticDifferential& q, cplx start, cplx root_seed, double phase,
                                       double cap, double tol, int skip_zero, double reach) {
    TrajectorySegment seg;
    seg.phase = phase;
    seg.points.push_back(start);
    seg.lengths.push_back(0);
    cplx ref = q.root_near(start, root_seed);
    seg.start_root = ref;
    const cplx e = std::polar(1.0, phase);
    const double eps = q.zeros.empty() ? 0 : q.eps_hit();
    const double R = q.r_escape();
    double M = 0;
    for (auto w : q.zeros) M = std::max(M, std::abs(w));
    const int dd = std::max(q.degree(), 1);
    const double R_early = std::min(R, std::max(0.5 * dd * (dd + 2) * M + 2, reach));
    const int nc = q.cilia();
    double skip_r = skip_zero >= 0 ? 3 * std::abs(start - q.zeros[skip_zero]) : 0;
    bool left = skip_zero < 0;

    auto sys = [&](const cplx& z, cplx& dz, double) { dz = e / q.root_near(z, ref); };
    auto ctl = odeint::make_controlled(tol, tol, Stepper());
    cplx z = start;
    double s = 0;
    double dt = std::min(cap, 1e-3 * (1 + std::abs(z)) * std::abs(ref) + 1e-12);
    long steps = 0;
    while (true) {
        if (s >= cap - 1e-13) {
            seg.terminus = Terminus::LengthCapped;
            break;
        }
        double dist = INFINITY;
        if (!q.zeros.empty()) q.nearest_zero(z, &dist);
        double ar = std::abs(ref);
        double hmax = std::min({cap - s, 0.25 * dist * ar, 0.25 * (1 + std::abs(z)) * ar});
        dt = std::min(dt, hmax);
        if (dt < 1e-15 * (1 + s) || ++steps > 2000000)
            throw IntegrationError("step size collapse", z);
        auto res = ctl.try_step(sys, z, s, dt);
        if (res == odeint::fail) continue;
        ref = q.root_near(z, ref);
        seg.points.push_back(z);
        seg.lengths.push_back(s);
        if (!left && std::abs(z - q.zeros[skip_zero]) > skip_r) left = true;
        bool hit = false;
        for (size_t j = 0; j < q.zeros.size(); ++j) {
            if (int(j) == skip_zero && !left) continue;
            double dj = std::abs(z - q.zeros[j]);
            if (dj < eps) {
                seg.terminus = Terminus::HitZero;
                seg.hit = int(j);
                double extra = 2.0 / 3.0 * std::sqrt(std::abs(q.dP(q.zeros[j]))) * std::pow(dj, 1.5);
                s += extra;
                seg.points.push_back(q.zeros[j]);
                seg.lengths.push_back(s);
                hit = true;
                break;
            }
        }
        if (hit) break;
        if (std::abs(z) > R) {
            seg.terminus = Terminus::Escaped;
            seg.cilium = q.cilium_of(z, phase);
            break;
        }
        if (std::abs(z) > R_early) {
            // outgoing and nearly radial: the end of the leading-order curve is already decided
            cplx v = e / ref;
            double psi = std::arg(v / z);
            if (std::abs(psi) < M_PI / 4) {
                seg.terminus = Terminus::Escaped;
                seg.cilium = q.cilium_of(z * std::polar(1.0, 2 * psi / nc), phase);
                break;
            }
        }
    }
    seg.arclength = s;
    return seg;
}

namespace {

// flat coordinate of z0+U measured from the zero z0, branch fixed by ref
cplx local_w(const QuadraticDifferential& q, cplx z0, cplx U, cplx ref) {
    auto f = [&](double t) { return q.root_near(z0 + t * t * U, ref) * (2 * t) * U; };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, 1.0);
}

}

TrajectorySegment integrate_separatrix(const QuadraticDifferential& q, int zero, int ray, double phase, double cap,
                                       double tol, double reach) {
    cplx z0 = q.zeros.at(zero);
    cplx a = q.dP(z0);
    cplx e = std::polar(1.0, phase);
    double rho = 10 * q.eps_hit();
    cplx dir = std::polar(1.0, (2 * phase - std::arg(a) + 2 * M_PI * ray) / 3);
    cplx U = rho * dir;
    cplx ref = std::sqrt(a * U);
    if (std::real(std::conj(e) * ref * U) < 0) ref = -ref;
    double s0 = std::abs(local_w(q, z0, U, ref));
    for (int it = 0; it < 12; ++it) {
        cplx w = local_w(q, z0, U, ref);
        cplx d = (w - s0 * e) / q.root_near(z0 + U, ref);
        U -= d;
        if (std::abs(d) < 1e-15 * rho) break;
    }
    cplx r0 = q.root_near(z0 + U, ref);
    TrajectorySegment seg = integrate_trajectory(q, z0 + U, r0, phase, std::max(cap - s0, 1e-12), tol, zero, reach);
    seg.points.insert(seg.points.begin(), z0);
    for (auto& l : seg.lengths) l += s0;
    seg.lengths.insert(seg.lengths.begin(), 0.0);
    seg.arclength += s0;
    seg.zero = zero;
    seg.ray = ray;
    seg.start_root = r0;
    return seg;
}

std::vector<int> SpectralNetwork::saddle_segments() const {
    std::vector<int> out;
    auto midpoint = [](const TrajectorySegment& s) {
        double h = s.arclength / 2;
        auto it = std::lower_bound(s.lengths.begin(), s.lengths.end(), h);
        return s.points[std::min<size_t>(it - s.lengths.begin(), s.points.size() - 1)];
    };
    for (size_t i = 0; i < segments.size(); ++i) {
        auto& s = segments[i];
        if (s.orientation != 1 || s.terminus != Terminus::HitZero) continue;
        bool dup = false;
        for (int j : out) {
            auto& t = segments[j];
            if (t.zero == s.hit && t.hit == s.zero && std::abs(t.arclength - s.arclength) < 1e-6 * (1 + s.arclength)) {
                cplx m = midpoint(s);
                double best = INFINITY;
                for (size_t k = 0; k + 1 < t.points.size(); ++k)
                    best = std::min(best, seg_dist(t.points[k], t.points[k + 1], m));
                if (best < 1e-2 * (1 + std::abs(m))) dup = true;
            }
        }
        if (!dup) out.push_back(int(i));
    }
    return out;
}

SpectralNetwork build_network(const QuadraticDifferential& q, double phase, double cap, double tol, double reach) {
    SpectralNetwork net;
    net.phase = phase;
    net.cap = cap;
    for (size_t i = 0; i < q.zeros.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            TrajectorySegment s;
            try {
                s = integrate_separatrix(q, int(i), k, phase, cap, tol, reach);
            } catch (const IntegrationError& err) {
                s.zero = int(i);
                s.ray = k;
                s.phase = phase;
                s.points = {q.zeros[i], err.where};
                s.error = err.what();
            }
            TrajectorySegment m = s;
            m.orientation = -1;
            m.phase = phase + M_PI;
            m.ray = (k + 2) % 3;
            m.start_root = -s.start_root;
            net.segments.push_back(std::move(s));
            net.segments.push_back(std::move(m));
        }
    return net;
}

namespace {

struct Panel {
    cplx a, b;
    bool za, zb;
};

void panelize(const QuadraticDifferential& q, cplx a, cplx b, bool za, bool zb, std::vector<Panel>& out, int depth) {
    if (depth > 200 || std::abs(b - a) < 1e-300) throw IntegrationError("panel collapse in period quadrature", a);
    cplx m = 0.5 * (a + b);
    if (za && zb) {
        panelize(q, a, m, true, false, out, depth + 1);
        panelize(q, m, b, false, true, out, depth + 1);
        return;
    }
    double len = std::abs(b - a);
    double d = INFINITY;
    for (auto z : q.zeros) {
        if ((za && z == a) || (zb && z == b)) continue;
        d = std::min(d, seg_dist(a, b, z));
    }
    if (len <= 0.5 * d) {
        out.push_back({a, b, za, zb});
        return;
    }
    panelize(q, a, m, za, false, out, depth + 1);
    panelize(q, m, b, false, zb, out, depth + 1);
}

bool is_zero(const QuadraticDifferential& q, cplx z) {
    for (auto w : q.zeros)
        if (std::abs(w - z) < 1e-13 * (1 + std::abs(w))) return true;
    return false;
}

cplx snap(const QuadraticDifferential& q, cplx z) {
    for (auto w : q.zeros)
        if (std::abs(w - z) < 1e-13 * (1 + std::abs(w))) return w;
    return z;
}

// near a zero endpoint the value only depends on where the path enters the disk and with which root,
// so the inner part is replaced by a chord
std::vector<cplx> shortcut(const QuadraticDifferential& q, const std::vector<cplx>& path, cplx& seed) {
    if (path.size() < 3 || q.zeros.empty()) return path;
    double r0 = 0.3 * q.zero_scale();
    std::vector<cplx> out(path);
    if (is_zero(q, out.front())) {
        cplx zs = out.front();
        size_t i = 1;
        cplx ref = seed;
        while (i + 1 < out.size() && std::abs(out[i] - zs) < r0) ref = q.root_near(out[i++], ref);
        if (i > 1 && i + 1 < out.size()) {
            ref = q.root_near(out[i], ref);
            out.erase(out.begin() + 1, out.begin() + i);
            seed = ref;
        }
    }
    if (is_zero(q, out.back()) && out.size() >= 3) {
        cplx ze = out.back();
        size_t j = out.size() - 2;
        while (j > 1 && std::abs(out[j] - ze) < r0) --j;
        if (j + 2 < out.size()) out.erase(out.begin() + j + 1, out.end() - 1);
    }
    return out;
}

cplx integrate_path(const QuadraticDifferential& q, const std::vector<cplx>& path_in, cplx seed, cplx* end_root) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    std::vector<cplx> path = shortcut(q, path_in, seed);
    cplx total = 0;
    cplx ref = seed;
    if (path.size() >= 2 && !is_zero(q, path.front())) ref = q.root_near(path.front(), seed);
    double excl = q.zeros.empty() ? 0 : 0.5 * q.eps_hit();
    for (size_t i = 1; i + 1 < path.size(); ++i)
        for (auto w : q.zeros)
            if (std::abs(path[i] - w) < excl) throw IntegrationError("path vertex too close to a zero", path[i]);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        cplx A = snap(q, path[i]), B = snap(q, path[i + 1]);
        if (A == B) continue;
        bool za = (i == 0) && is_zero(q, A);
        bool zb = (i + 2 == path.size()) && is_zero(q, B);
        std::vector<Panel> panels;
        panelize(q, A, B, za, zb, panels, 0);
        for (auto& p : panels) {
            cplx D = p.b - p.a;
            cplx val;
            if (p.za) {
                cplx r = ref;
                auto f = [&](double t) { return q.root_near(p.a + t * t * D, r) * (2 * t) * D; };
                val = GK::integrate(f, 0.0, 1.0, 20, 1e-13);
                ref = q.root_near(p.b, r);
            } else if (p.zb) {
                cplx r = ref;
                auto f = [&](double t) { return q.root_near(p.b - t * t * D, r) * (2 * t) * D; };
                val = GK::integrate(f, 0.0, 1.0, 20, 1e-13);
            } else {
                cplx r = ref;
                auto f = [&](double t) {
                    cplx z = p.a + t * D;
                    return q.root_near(z, r) * D;
                };
                val = GK::integrate(f, 0.0, 1.0, 20, 1e-13);
                ref = q.root_near(p.b, r);
            }
            total += val;
        }
    }
    if (end_root) *end_root = ref;
    return total;
}

}

cplx period(const QuadraticDifferential& q, const std::vector<cplx>& path, cplx branch_seed) {
    return integrate_path(q, path, branch_seed, nullptr);
}

cplx root_at_end(const QuadraticDifferential& q, const std::vector<cplx>& path, cplx branch_seed) {
    cplx r;
    integrate_path(q, path, branch_seed, &r);
    return r;
}

namespace {

struct SepState {
    Terminus t;
    int idx;
    bool operator==(const SepState& o) const { return t == o.t && idx == o.idx; }
};

SepState state_of(const TrajectorySegment& s) {
    if (s.terminus == Terminus::HitZero) return {s.terminus, s.hit};
    if (s.terminus == Terminus::Escaped) return {s.terminus, s.cilium};
    return {s.terminus, -1};
}

double internal_cap(const QuadraticDifferential& q, double cap) {
    int d = q.degree();
    double R = 2 * q.r_escape();
    double esc = 2.0 / (d + 2) * std::sqrt(std::abs(q.lead())) * std::pow(R, (d + 2) / 2.0);
    return cap + 4 * esc;
}

}

ScanResult scan_active_rays(const QuadraticDifferential& q, const Sector& sector, double cap, const ScanOptions& opt) {
    sector.validate();
    ScanResult out;
    const double Lc = internal_cap(q, cap);
    const double lo = sector.theta_lo, hi = sector.theta_hi;
    std::vector<SaddleConnection> found;

    std::vector<std::tuple<int, int, int, double>> seen;
    auto record = [&](const TrajectorySegment& s, double th) {
        for (auto& [z, k, h, t] : seen)
            if (z == s.zero && k == s.ray && h == s.hit && std::abs(t - th) < 1e-6) return;
        seen.emplace_back(s.zero, s.ray, s.hit, th);
        SaddleConnection c;
        c.start_zero = s.zero;
        c.end_zero = s.hit;
        c.ray = s.ray;
        c.path = s.points;
        c.start_root = s.start_root;
        c.charge = period(q, s.points, s.start_root);
        c.hat_charge = 2.0 * c.charge;
        double ph = std::arg(c.charge);
        while (ph < lo - 1e-6) ph += 2 * M_PI;
        while (ph > lo + 2 * M_PI - 1e-6) ph -= 2 * M_PI;
        c.phase = ph;
        found.push_back(c);
    };

    for (size_t i = 0; i < q.zeros.size(); ++i)
        for (int k = 0; k < 3; ++k) {
            auto run = [&](double th) { return integrate_separatrix(q, int(i), k, th, Lc, opt.tol); };
            std::function<void(double, double, const TrajectorySegment&, const TrajectorySegment&)> bisect =
                [&](double a, double b, const TrajectorySegment& sa, const TrajectorySegment& sb) {
                    SepState A = state_of(sa), B = state_of(sb);
                    if (A == B) return;
                    // an endpoint inside the hit window already pins the connection
                    if (A.t == Terminus::HitZero) return record(sa, a);
                    if (B.t == Terminus::HitZero) return record(sb, b);
                    if (b - a <= opt.tol_phase) {
                        double m = 0.5 * (a + b);
                        auto sm = run(m);
                        if (sm.terminus == Terminus::HitZero)
                            record(sm, m);
                        else
                            out.unresolved.push_back({a, b});
                        return;
                    }
                    double m = 0.5 * (a + b);
                    auto sm = run(m);
                    bisect(a, m, sa, sm);
                    bisect(m, b, sm, sb);
                };
            int n = opt.grid;
            std::vector<TrajectorySegment> samples;
            samples.reserve(n);
            for (int j = 0; j < n; ++j) samples.push_back(run(lo + (hi - lo) * j / (n - 1)));
            for (int j = 0; j + 1 < n; ++j)
                bisect(lo + (hi - lo) * j / (n - 1), lo + (hi - lo) * (j + 1) / (n - 1), samples[j], samples[j + 1]);
        }

    // merge the two separatrices running along each connection, then group by phase
    std::vector<SaddleConnection> uniq;
    for (auto& c : found) {
        if (c.start_zero > c.end_zero) continue;
        bool dup = false;
        for (auto& u : uniq)
            if (u.start_zero == c.start_zero && u.end_zero == c.end_zero &&
                std::abs(u.hat_charge - c.hat_charge) < 1e-6 * (1 + std::abs(c.hat_charge)))
                dup = true;
        if (!dup) uniq.push_back(c);
    }
    // connections seen only from the higher-indexed end
    for (auto& c : found) {
        if (c.start_zero <= c.end_zero) continue;
        bool dup = false;
        for (auto& u : uniq)
            if (std::min(u.start_zero, u.end_zero) == c.end_zero && std::max(u.start_zero, u.end_zero) == c.start_zero &&
                std::abs(u.hat_charge - c.hat_charge) < 1e-6 * (1 + std::abs(c.hat_charge)))
                dup = true;
        if (!dup) uniq.push_back(c);
    }
    std::sort(uniq.begin(), uniq.end(), [](auto& a, auto& b) { return a.phase < b.phase; });
    for (auto& c : uniq) {
        if (std::abs(c.charge) > cap) {
            out.beyond_cap.push_back(c);
            continue;
        }
        if (!out.rays.empty() && std::abs(out.rays.back().phase - c.phase) < 1e-9)
            out.rays.back().connections.push_back(c);
        else
            out.rays.push_back({c.phase, {c}});
    }
    return out;
}

Classification classify_ray(const QuadraticDifferential& q, double phase,
                            const std::vector<SaddleConnection>& connections, double cap) {
    (void)q;
    (void)phase;
    Classification c;
    if (connections.size() == 1 && connections[0].start_zero != connections[0].end_zero &&
        std::abs(connections[0].charge) <= cap)
        c.kind = RayCase::Case1;
    return c;
}

Classification classify_ray(const GluedRectangle& cyl, double phase, const std::vector<SaddleConnection>& connections,
                            double cap) {
    Classification c;
    for (auto& s : connections)
        if (std::abs(std::remainder(s.phase - phase, M_PI)) > 1e-9) return c;
    // first return of the transversal x = 0 under the flow in direction phase
    double alpha = std::remainder(phase - cyl.rotation, 2 * M_PI);
    double vx = std::cos(alpha), vy = std::sin(alpha);
    if (std::abs(vx) < 1e-12) return c;
    double y0 = 0.5 * cyl.height;
    double t = cyl.width / std::abs(vx);
    double y1 = y0 + vy * t;
    if (y1 <= 0 || y1 >= cyl.height) return c;
    if (std::abs(y1 - y0) > 1e-12 * cyl.height) return c;
    cplx core = std::polar(t, phase);
    if (std::abs(core) > cap) return c;
    RingDomain rd;
    rd.core_period = core;
    rd.boundary_connections = cyl.top_connections;
    rd.boundary_connections.insert(rd.boundary_connections.end(), cyl.bottom_connections.begin(),
                                   cyl.bottom_connections.end());
    c.kind = RayCase::Case4a;
    c.ring = rd;
    return c;
}

const char* case_name(RayCase c) {
    switch (c) {
    case RayCase::Case1: return "Case1";
    case RayCase::Case4a: return "Case4a";
    default: return "Unknown";
    }
}

}
