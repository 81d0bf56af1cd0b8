#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "wcnet/homology.hpp"
#include "wcnet/laminations.hpp"
#include "wcnet/path_lift.hpp"

namespace wcnet::cli {

namespace {

struct CommandError : std::runtime_error {
    int code;
    json extra;
    CommandError(const std::string& m, int c, json x = json::object()) : std::runtime_error(m), code(c), extra(std::move(x)) {}
};

double r12(double x) {
    if (!std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

json jnum(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return nullptr;
    return r12(x);
}

json jc(cplx z) { return json::array({jnum(z.real()), jnum(z.imag())}); }

json jvec(const Vec& v) { return json(v); }

json jrat(const Rational& q) {
    if (q.get_den() == 1) return json(q.get_num().get_si());
    return q.get_str();
}

cplx parse_c(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw InputError("complex numbers are written as a number or [re, im]");
}

std::vector<cplx> parse_path(const json& j) {
    std::vector<cplx> out;
    for (auto& p : j) out.push_back(parse_c(p));
    return out;
}

double get_num(const json& j, const char* key, double dflt) { return j.contains(key) ? j.at(key).get<double>() : dflt; }

QuadraticDifferential parse_surface(const json& s) {
    std::vector<cplx> c;
    for (auto& x : s.at("coeffs")) c.push_back(parse_c(x));
    return QuadraticDifferential::from_coeffs(c);
}

Sector parse_sector(const json& cfg) {
    auto& s = cfg.at("sector");
    Sector sec{s.at("theta_lo").get<double>(), s.at("theta_hi").get<double>(), 0, std::nullopt};
    sec.validate();
    return sec;
}

ScanOptions parse_scan(const json& cfg) {
    ScanOptions o;
    if (cfg.contains("grid")) o.grid = cfg["grid"].get<int>();
    if (cfg.contains("tolerances")) {
        auto& t = cfg["tolerances"];
        o.tol_phase = get_num(t, "phase", o.tol_phase);
        o.tol = get_num(t, "integrator", o.tol);
    }
    return o;
}

double class_tol(const json& cfg) {
    return cfg.contains("tolerances") ? get_num(cfg["tolerances"], "class", 1e-6) : 1e-6;
}

Order parse_order(const json& cfg, const Overrides& ov) {
    if (ov.order) return *ov.order;
    std::string o = cfg.value("order", "ccw");
    if (o == "ccw") return Order::Ccw;
    if (o == "cw") return Order::Cw;
    throw InputError("order must be cw or ccw");
}

void check_schema(const json& cfg) {
    if (!cfg.is_object()) throw InputError("config must be an object");
    if (cfg.contains("schema") && cfg["schema"] != kConfigSchema) throw InputError("unsupported config schema");
    int kinds = 0;
    for (auto k : {"surface", "surfaces", "family"}) kinds += cfg.contains(k);
    bool fixture = cfg.contains("fixture");
    if (kinds > 1 || (kinds && fixture)) throw InputError("config must hold exactly one of surface or fixture");
    if (cfg.contains("truncation") && cfg["truncation"].is_number() && !(cfg["truncation"].get<double>() > 0))
        throw InputError("truncation must be positive");
}

json header(const char* command) {
    json r;
    r["schema"] = kReportSchema;
    r["command"] = command;
    return r;
}

// spectrum of one surface over a sector, with classes in the network triangulation basis
struct Spectrum {
    QuadraticDifferential q;
    NetworkTriangulation nt;
    std::optional<ChargeLattice> lat;
    ScanResult scan;
    std::vector<Classification> cls;
    std::vector<std::vector<std::optional<Vec>>> classes;
    std::vector<std::string> class_errors;
};

Spectrum compute_spectrum(const QuadraticDifferential& q, const Sector& sec, double cap, double basis_phase,
                          double basis_cap, const ScanOptions& opt, double tol) {
    Spectrum S;
    S.q = q;
    S.nt = triangulation_from_network(q, basis_phase, basis_cap);
    if (S.nt.tri.rank() > 0) S.lat = S.nt.basis.lattice(S.nt.tri);
    S.scan = scan_active_rays(q, sec, cap, opt);
    for (auto& r : S.scan.rays) {
        S.cls.push_back(classify_ray(q, r.phase, r.connections, cap));
        std::vector<std::optional<Vec>> cs;
        for (auto& c : r.connections) {
            try {
                cs.push_back(class_from_periods(c, S.nt.basis, tol));
            } catch (const ClassError& e) {
                cs.push_back(std::nullopt);
                S.class_errors.push_back(e.what());
            }
        }
        S.classes.push_back(cs);
    }
    return S;
}

std::optional<BpsRay> certified_ray(const Spectrum& S, size_t i) {
    if (S.cls[i].kind == RayCase::Unknown) return std::nullopt;
    if (!S.classes[i][0]) return std::nullopt;
    CycleClasses cc;
    cc.g0 = *S.classes[i][0];
    return bps_cycle(S.cls[i], S.scan.rays[i].phase, cc);
}

json content_json(const BpsRay& r) {
    json a = json::array();
    for (auto& c : r.content) a.push_back({{"vector", jvec(c.vector)}, {"omega", c.omega}});
    return a;
}

json spectrum_json(const Spectrum& S) {
    json rays = json::array();
    for (size_t i = 0; i < S.scan.rays.size(); ++i) {
        auto& r = S.scan.rays[i];
        json conns = json::array();
        for (size_t k = 0; k < r.connections.size(); ++k) {
            auto& c = r.connections[k];
            json cj;
            cj["start_zero"] = c.start_zero;
            cj["end_zero"] = c.end_zero;
            cj["abs_Z"] = jnum(std::abs(c.charge));
            cj["charge"] = jc(c.charge);
            cj["hat_charge"] = jc(c.hat_charge);
            cj["class"] = S.classes[i][k] ? jvec(*S.classes[i][k]) : json(nullptr);
            conns.push_back(cj);
        }
        json rj;
        rj["phase"] = jnum(r.phase);
        rj["connections"] = conns;
        rj["case"] = case_name(S.cls[i].kind);
        auto br = certified_ray(S, i);
        rj["omega"] = br ? content_json(*br) : json(nullptr);
        rays.push_back(rj);
    }
    return rays;
}

json basis_json(const NetworkTriangulation& nt) {
    json b = json::array();
    for (size_t i = 0; i < nt.basis.charge.size(); ++i)
        b.push_back({{"edge", nt.basis.edges[i]},
                     {"cilia", {nt.basis.cilia[i].first, nt.basis.cilia[i].second}},
                     {"hat_charge", jc(nt.basis.charge[i])}});
    return b;
}

json pairs_json(const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (auto [x, y] : v) a.push_back({jnum(x), jnum(y)});
    return a;
}

json beyond_json(const std::vector<SaddleConnection>& v) {
    json a = json::array();
    for (auto& c : v) a.push_back({{"phase", jnum(c.phase)}, {"abs_Z", jnum(std::abs(c.charge))}});
    return a;
}

int scan_status(const Spectrum& S) {
    if (!S.scan.beyond_cap.empty()) return CapExceeded;
    if (!S.scan.unresolved.empty()) return Unresolved;
    return Ok;
}

struct SurfaceRun {
    double cap, basis_phase, basis_cap, tol;
    Sector sec;
    ScanOptions opt;
};

SurfaceRun surface_run(const json& cfg) {
    SurfaceRun r;
    r.sec = parse_sector(cfg);
    r.cap = get_num(cfg, "cap", 20);
    r.basis_phase = r.sec.theta_lo;
    r.basis_cap = 5000;
    if (cfg.contains("basis")) {
        r.basis_phase = get_num(cfg["basis"], "phase", r.basis_phase);
        r.basis_cap = get_num(cfg["basis"], "cap", r.basis_cap);
    }
    r.opt = parse_scan(cfg);
    r.tol = class_tol(cfg);
    return r;
}

Spectrum spectrum_of(const QuadraticDifferential& q, const SurfaceRun& r) {
    return compute_spectrum(q, r.sec, r.cap, r.basis_phase, r.basis_cap, r.opt, r.tol);
}

// permutation from the basis of b to the basis of a, through the cilium labels
std::vector<int> basis_map(const NetworkTriangulation& a, const NetworkTriangulation& b) {
    auto key = [](std::pair<int, int> p) { return std::pair<int, int>(std::minmax(p.first, p.second)); };
    if (a.basis.cilia.size() != b.basis.cilia.size()) return {};
    std::vector<int> m;
    for (auto& cb : b.basis.cilia) {
        int hit = -1;
        for (size_t i = 0; i < a.basis.cilia.size(); ++i)
            if (key(a.basis.cilia[i]) == key(cb)) hit = int(i);
        if (hit < 0) return {};
        m.push_back(hit);
    }
    if (std::set<int>(m.begin(), m.end()).size() != m.size()) return {};
    return m;
}

Vec remap(const Vec& v, const std::vector<int>& m) {
    Vec out(v.size(), 0);
    for (size_t i = 0; i < v.size(); ++i) out[m[i]] += v[i];
    return out;
}

bool boundary_inactive(const Spectrum& S, const Sector& sec) {
    for (auto& r : S.scan.rays)
        if (std::abs(r.phase - sec.theta_lo) < 1e-6 || std::abs(r.phase - sec.theta_hi) < 1e-6) return false;
    return true;
}

std::vector<BpsRay> rays_in(const Spectrum& S, const std::vector<int>& m) {
    std::vector<BpsRay> out;
    for (size_t i = 0; i < S.scan.rays.size(); ++i) {
        auto r = certified_ray(S, i);
        if (!r) throw CommandError("active ray at phase " + std::to_string(S.scan.rays[i].phase) +
                                       " is not rank-one certified",
                                   NotCertified);
        for (auto& c : r->content) {
            c.vector = remap(c.vector, m);
            c.cycle = remap(c.cycle, m);
        }
        out.push_back(*r);
    }
    return out;
}

std::multiset<std::pair<Vec, long>> content_set(const std::vector<BpsRay>& rays) {
    std::multiset<std::pair<Vec, long>> s;
    for (auto& r : rays)
        for (auto& c : r.content) s.insert({c.vector, c.omega});
    return s;
}

double truncation_of(const json& cfg, const Overrides& ov, double scale_min, double scale_max) {
    if (ov.truncation) return *ov.truncation;
    if (!cfg.contains("truncation")) return 6 * scale_min;
    auto& t = cfg["truncation"];
    if (t.is_number()) return t.get<double>();
    if (t.contains("min_factor")) return t["min_factor"].get<double>() * scale_min;
    if (t.contains("max_factor")) return t["max_factor"].get<double>() * scale_max;
    throw InputError("truncation must be a number, {min_factor} or {max_factor}");
}

json diff_json(const std::optional<WordDiff>& d) {
    if (!d) return nullptr;
    return {{"generator", jvec(d->generator)}, {"vector", jvec(d->vector)}, {"lhs", jrat(d->lhs)},
            {"rhs", jrat(d->rhs)}};
}

json word_json(const AutomorphismWord& w) {
    json a = json::array();
    for (auto& r : w.rays) a.push_back({{"phase", jnum(r.phase)}, {"content", content_json(r)}});
    return a;
}

// compare the two sides of a wall given as two spectra with a shared basis
Outcome compare_spectra(const Spectrum& A, const Spectrum& B, const json& cfg, const Overrides& ov, json r) {
    auto m = basis_map(A.nt, B.nt);
    if (m.empty())
        throw CommandError("the two network triangulations differ; a boundary ray is active in between", BadInput);
    if (!A.lat) throw CommandError("the charge lattice has rank zero", BadInput);
    std::vector<int> id(A.nt.tri.rank());
    std::iota(id.begin(), id.end(), 0);
    auto ra = rays_in(A, id), rb = rays_in(B, m);
    // charges of the matched classes
    double cerr = 0;
    for (size_t i = 0; i < B.scan.rays.size(); ++i)
        for (size_t k = 0; k < B.scan.rays[i].connections.size(); ++k)
            if (B.classes[i][k]) cerr = std::max(cerr, std::abs(B.lat->Z(*B.classes[i][k]) - B.scan.rays[i].connections[k].hat_charge));
    double zmin = INFINITY, zmax = 0;
    for (auto* S : {&A, &B})
        for (auto& ray : S->scan.rays)
            for (auto& c : ray.connections) zmin = std::min(zmin, std::abs(c.hat_charge)), zmax = std::max(zmax, std::abs(c.hat_charge));
    if (!std::isfinite(zmin)) zmin = 1;
    double L = truncation_of(cfg, ov, zmin, zmax);
    Order order = parse_order(cfg, ov);
    auto wa = ordered_word(ra, order), wb = ordered_word(rb, order);
    auto d = word_diff(wa, wb, L, *A.lat);
    bool pass = !d && cerr < class_tol(cfg);
    r["truncation"] = jnum(L);
    r["order"] = order == Order::Ccw ? "ccw" : "cw";
    r["charge_error"] = jnum(cerr);
    r["word_before"] = word_json(wa);
    r["word_after"] = word_json(wb);
    r["first_difference"] = diff_json(d);
    r["result"] = pass ? "PASS" : "FAIL";
    return {r, pass ? Ok : Fail, ""};
}

Outcome verify_fixture(const json& cfg, const Overrides& ov, json r) {
    auto& fx = cfg.at("fixture");
    auto pairing = fx.at("pairing").get<std::vector<std::vector<long>>>();
    auto& ch = fx.at("chambers");
    if (ch.size() != 2) throw InputError("a fixture has exactly two chambers");
    std::vector<ChargeLattice> lats;
    std::vector<AutomorphismWord> words;
    Order order = parse_order(cfg, ov);
    double zmin = INFINITY, zmax = 0;
    for (auto& c : ch) {
        ChargeLattice lat;
        lat.rank = int(pairing.size());
        lat.pairing = pairing;
        for (auto& z : c.at("charges")) lat.central_charge.push_back(parse_c(z));
        lat.validate();
        std::vector<BpsRay> rays;
        for (auto& x : c.at("rays")) {
            auto v = x.at("vector").get<Vec>();
            long om = x.at("omega").get<long>();
            rays.push_back(simple_ray(v, om, lat));
            zmin = std::min(zmin, lat.absZ(v)), zmax = std::max(zmax, lat.absZ(v));
        }
        for (int i = 0; i < lat.rank; ++i) zmax = std::max(zmax, std::abs(lat.central_charge[i]));
        lats.push_back(lat);
        words.push_back(ordered_word(rays, order));
    }
    int hc = fx.value("height_chamber", 0);
    double L = ov.truncation ? *ov.truncation
               : cfg.contains("truncation") ? truncation_of(cfg, ov, zmin, zmax)
                                            : 8 * zmax;
    auto d = word_diff(words[0], words[1], L, lats.at(hc));
    r["truncation"] = jnum(L);
    r["order"] = order == Order::Ccw ? "ccw" : "cw";
    r["word_before"] = word_json(words[0]);
    r["word_after"] = word_json(words[1]);
    r["first_difference"] = diff_json(d);
    r["result"] = d ? "FAIL" : "PASS";
    return {r, d ? Fail : Ok, ""};
}

std::string spectrum_key(const Spectrum& S) {
    std::ostringstream o;
    for (size_t i = 0; i < S.scan.rays.size(); ++i) {
        o << case_name(S.cls[i].kind);
        for (auto& c : S.classes[i]) o << (c ? vstr(*c) : "?");
        o << ";";
    }
    return o.str();
}

Outcome verify_family(const json& cfg, const Overrides& ov, json r) {
    auto& fam = cfg.at("family");
    std::vector<cplx> base;
    for (auto& x : fam.at("coeffs")) base.push_back(parse_c(x));
    size_t vary = fam.at("vary").get<size_t>();
    if (vary >= base.size()) throw InputError("varied coefficient out of range");
    cplx from = parse_c(fam.at("from")), to = parse_c(fam.at("to"));
    int steps = fam.value("steps", 9);
    if (steps < 2) throw InputError("a family needs at least two grid points");
    auto run = surface_run(cfg);
    std::vector<cplx> grid;
    for (int k = 0; k < steps; ++k) grid.push_back(from + (to - from) * (double(k) / (steps - 1)));
    std::vector<std::future<Spectrum>> jobs;
    for (cplx c : grid)
        jobs.push_back(std::async(std::launch::async, [&, c] {
            auto co = base;
            co[vary] = c;
            return spectrum_of(QuadraticDifferential::from_coeffs(co), run);
        }));
    std::vector<std::optional<Spectrum>> specs;
    std::vector<std::string> errors;
    for (auto& j : jobs) {
        try {
            specs.push_back(j.get());
            errors.push_back("");
        } catch (const std::exception& e) {
            specs.push_back(std::nullopt);
            errors.push_back(e.what());
        }
    }
    json g = json::array();
    for (size_t k = 0; k < grid.size(); ++k) {
        json e{{"c", jc(grid[k])}};
        if (specs[k]) {
            e["rays"] = specs[k]->scan.rays.size();
            e["spectrum"] = spectrum_key(*specs[k]);
        } else {
            e["error"] = errors[k];
        }
        g.push_back(e);
    }
    r["grid"] = g;
    json skipped = json::array();
    auto skip = [&](size_t k, const std::string& why) { skipped.push_back({{"c", jc(grid[k])}, {"reason", why}}); };
    for (size_t k = 0; k + 1 < grid.size(); ++k) {
        auto &a = specs[k], &b = specs[k + 1];
        if (!a || !b) {
            skip(k, "spectrum failed");
            continue;
        }
        if (scan_status(*a) || scan_status(*b)) {
            skip(k, "scan incomplete");
            continue;
        }
        if (!boundary_inactive(*a, run.sec) || !boundary_inactive(*b, run.sec)) {
            skip(k, "boundary ray active");
            continue;
        }
        auto m = basis_map(a->nt, b->nt);
        if (m.empty()) {
            skip(k, "triangulations differ");
            continue;
        }
        std::vector<int> id(m.size());
        std::iota(id.begin(), id.end(), 0);
        std::vector<BpsRay> ra, rb;
        try {
            ra = rays_in(*a, id), rb = rays_in(*b, m);
        } catch (const CommandError& e) {
            skip(k, e.what());
            continue;
        }
        if (content_set(ra) == content_set(rb)) continue;
        r["skipped"] = skipped;
        r["wall"] = {{"c_before", jc(grid[k])}, {"c_after", jc(grid[k + 1])}};
        return compare_spectra(*a, *b, cfg, ov, r);
    }
    r["skipped"] = skipped;
    throw CommandError("no wall found on the grid", Fail, r);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

LocalModel parse_model(const json& j) {
    LocalModel m;
    std::string k = j.at("kind");
    if (k == "SingleSaddle") m.kind = ModelKind::SingleSaddle;
    else if (k == "Cylinder") m.kind = ModelKind::Cylinder;
    else if (k == "ToralEnd") m.kind = ModelKind::ToralEnd;
    else if (k == "DegenerateRing") m.kind = ModelKind::DegenerateRing;
    else throw InputError("unknown model kind " + k);
    std::string c = j.at("crossing");
    const char* names[] = {"i", "ii", "iii", "iv", "v"};
    bool found = false;
    for (int i = 0; i < 5; ++i)
        if (c == names[i]) m.crossing = CrossingType(i), found = true;
    if (!found) throw InputError("unknown crossing type " + c);
    m.toral = j.value("toral", false);
    m.validate();
    return m;
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

Triangulation parse_triangulation(const json& j) {
    if (j.contains("polygon")) {
        auto& p = j["polygon"];
        return polygon_triangulation(p.at("n").get<int>(), p.at("triangles").get<std::vector<std::array<int, 3>>>());
    }
    if (j.contains("faces")) {
        Triangulation T;
        T.n_vertices = j.at("vertices").get<int>();
        T.is_hole.assign(T.n_vertices, false);
        if (j.contains("holes"))
            for (int h : j["holes"]) T.is_hole.at(h) = true;
        std::map<std::pair<int, int>, int> idx;
        for (auto& f : j["faces"]) {
            Triangle t;
            t.v = f.get<std::array<int, 3>>();
            for (int i = 0; i < 3; ++i) {
                std::pair<int, int> key = std::minmax(t.v[i], t.v[(i + 1) % 3]);
                auto [it, fresh] = idx.emplace(key, int(T.edges.size()));
                if (fresh) T.edges.push_back(key);
                t.e[i] = it->second;
            }
            T.triangles.push_back(t);
        }
        T.finalize();
        return T;
    }
    return triangulation_from_json(j.dump());
}

int edge_id(const Triangulation& T, const json& j) {
    if (j.is_number_integer()) return j.get<int>();
    auto u = j.at(0).get<int>(), v = j.at(1).get<int>();
    std::pair<int, int> key = std::minmax(u, v);
    for (size_t e = 0; e < T.edges.size(); ++e)
        if (T.edges[e] == key) return int(e);
    throw InputError("no edge " + std::to_string(u) + "-" + std::to_string(v));
}

json edge_json(const Triangulation& T, int e) { return json::array({T.edges[e].first, T.edges[e].second}); }

json coords_json(const Triangulation& T, const EdgeCoordinates& n) {
    json a = json::array();
    for (int e : T.interior_edges) {
        auto it = n.find(e);
        a.push_back({{"edge", edge_json(T, e)}, {"n", it == n.end() ? 0 : it->second}});
    }
    return a;
}

json series_json(const TwistedSeries& s, const ChargeLattice& lat) {
    json a = json::array();
    for (auto& [v, c] : s.terms) a.push_back({{"vector", jvec(v)}, {"coeff", jrat(c)}, {"abs_Z", jnum(lat.absZ(v))}});
    return a;
}

HatBasis parse_basis(const Triangulation& T, const json& cfg) {
    HatBasis b;
    b.edges = T.interior_edges;
    for (auto& z : cfg.at("charges")) b.charge.push_back(parse_c(z));
    if ((int)b.charge.size() != T.rank()) throw InputError("one charge per interior edge is required");
    return b;
}

}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    return json::parse(in);
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

Outcome run_spectrum(const json& cfg, const Overrides& ov) {
    check_schema(cfg);
    if (!cfg.contains("surface")) throw InputError("spectrum needs a surface");
    auto run = surface_run(cfg);
    auto q = parse_surface(cfg["surface"]);
    json r = header("spectrum");
    Spectrum S;
    try {
        S = spectrum_of(q, run);
    } catch (const CapError& e) {
        throw CommandError(e.what(), CapExceeded);
    }
    r["sector"] = {jnum(run.sec.theta_lo), jnum(run.sec.theta_hi)};
    r["cap"] = jnum(run.cap);
    r["basis"] = basis_json(S.nt);
    auto rays = spectrum_json(S);
    if (ov.truncation || cfg.contains("truncation")) {
        double L = ov.truncation ? *ov.truncation : cfg["truncation"].get<double>();
        r["truncation"] = jnum(L);
        json kept = json::array();
        for (size_t i = 0; i < rays.size(); ++i)
            if (std::abs(S.scan.rays[i].connections[0].hat_charge) < L) kept.push_back(rays[i]);
        rays = kept;
    }
    r["rays"] = rays;
    r["unresolved"] = pairs_json(S.scan.unresolved);
    r["beyond_cap"] = beyond_json(S.scan.beyond_cap);
    int code = scan_status(S);
    r["status"] = code == Ok ? "ok" : code == CapExceeded ? "cap_exceeded" : "unresolved";
    return {r, code, ""};
}

Outcome run_verify_wcf(const json& cfg, const Overrides& ov) {
    check_schema(cfg);
    json r = header("verify-wcf");
    if (cfg.contains("fixture")) return verify_fixture(cfg, ov, r);
    if (cfg.contains("family")) return verify_family(cfg, ov, r);
    if (!cfg.contains("surfaces") || cfg["surfaces"].size() != 2) throw InputError("verify-wcf needs two surfaces, a family or a fixture");
    auto run = surface_run(cfg);
    Spectrum A, B;
    try {
        A = spectrum_of(parse_surface(cfg["surfaces"][0]), run);
        B = spectrum_of(parse_surface(cfg["surfaces"][1]), run);
    } catch (const CapError& e) {
        throw CommandError(e.what(), CapExceeded);
    }
    for (auto* S : {&A, &B}) {
        if (int c = scan_status(*S)) throw CommandError("scan incomplete", c);
        if (!boundary_inactive(*S, run.sec)) throw CommandError("a sector boundary is active", BadInput);
    }
    return compare_spectra(A, B, cfg, ov, r);
}

Outcome run_verify_wall(const json& cfg, const Overrides& ov) {
    check_schema(cfg);
    json r = header("verify-wall");
    std::vector<LocalModel> models;
    if (!cfg.contains("models") || cfg["models"] == "all") models = all_models();
    else
        for (auto& m : cfg["models"]) models.push_back(parse_model(m));
    std::vector<double> Ls = cfg.contains("truncations") ? cfg["truncations"].get<std::vector<double>>()
                                                        : std::vector<double>{0.5, 2, 6.7, 11};
    if (ov.truncation) Ls = {*ov.truncation};
    int orders = cfg.value("twist_orders", 5);
    bool all = true;
    json out = json::array();
    for (auto& m : models) {
        json mj{{"kind", model_name(m.kind)}, {"crossing", crossing_name(m.crossing)}, {"toral", m.toral}};
        json checks = json::array();
        for (double L : Ls) {
            auto fm = lift_one_sided(m, Side::Minus, L), fp = lift_one_sided(m, Side::Plus, L);
            bool ok = true;
            auto kf = model_k_apply(m, m.ray(), fm, L, &ok);
            json comps = json::object();
            bool pass = ok;
            for (int a : {1, 2})
                for (int b : {1, 2}) {
                    bool eq = lift_equal(kf.component(a, b), fp.component(a, b), L);
                    comps[std::to_string(a) + std::to_string(b)] = eq;
                    pass = pass && eq;
                }
            checks.push_back({{"truncation", jnum(L)}, {"components", comps}, {"pass", pass}});
            all = all && pass;
        }
        mj["checks"] = checks;
        bool crosses_core = false;
        for (auto& row : model_intersections(m))
            for (long x : row) crosses_core = crosses_core || x != 0;
        if ((m.kind == ModelKind::Cylinder || m.kind == ModelKind::ToralEnd) && crosses_core) {
            double L = std::abs(m.detour) + (orders + 1.5) * std::abs(m.core);
            long top = 0;
            for (auto side : {Side::Minus, Side::Plus})
                for (auto& t : lift_one_sided(m, side, L).terms) top = std::max(top, std::abs(t.cls.hclass[1]));
            bool pass = top >= orders && wall_identity_check(m, m.ray(), L);
            mj["twist"] = {{"truncation", jnum(L)}, {"orders", top}, {"pass", pass}};
            all = all && pass;
        }
        out.push_back(mj);
    }
    r["models"] = out;
    json lims = json::array();
    if (cfg.contains("limits"))
        for (auto& l : cfg["limits"]) {
            auto q = parse_surface(l.at("surface"));
            double phase = l.at("phase").get<double>(), L = l.at("truncation").get<double>();
            auto path = parse_path(l.at("path"));
            for (double eps : l.at("eps").get<std::vector<double>>()) {
                auto rep = limit_check_report(q, phase, path, eps, L);
                lims.push_back({{"phase", jnum(phase)}, {"eps", jnum(eps)}, {"truncation", jnum(L)}, {"plus", rep.plus},
                                {"minus", rep.minus}});
                all = all && rep.plus && rep.minus;
            }
        }
    r["limits"] = lims;
    r["result"] = all ? "PASS" : "FAIL";
    return {r, all ? Ok : Fail, ""};
}

Outcome run_network_svg(const json& cfg, const Overrides& ov) {
    check_schema(cfg);
    if (!cfg.contains("surface")) throw InputError("network-svg needs a surface");
    auto q = parse_surface(cfg["surface"]);
    double phase = cfg.at("phase").get<double>();
    double cap = ov.truncation ? *ov.truncation : get_num(cfg, "cap", 10);
    double R = 1.5;
    for (auto z : q.zeros) R = std::max(R, 1.5 * std::abs(z) + 1);
    if (cfg.contains("view")) R = cfg["view"].get<double>();
    SpectralNetwork net;
    net.phase = phase;
    if (cap > 0) net = build_network(q, phase, cap);
    auto saddles = net.saddle_segments();
    std::set<int> hi(saddles.begin(), saddles.end());
    const int W = 600;
    double s = W / (2 * R);
    auto X = [&](cplx z) { return fmt((z.real() + R) * s); };
    auto Y = [&](cplx z) { return fmt((R - z.imag()) * s); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W << "\" viewBox=\"0 0 " << W
      << " " << W << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    int nplus = 0, nminus = 0;
    for (size_t i = 0; i < net.segments.size(); ++i) {
        auto& seg = net.segments[i];
        if (seg.points.size() < 2 || hi.count(int(i))) continue;
        bool plus = seg.orientation > 0;
        (plus ? nplus : nminus)++;
        o << "<polyline class=\"" << (plus ? "wplus" : "wminus") << "\" fill=\"none\" stroke=\""
          << (plus ? "#1f4e9c" : "#c0392b") << "\" stroke-width=\"1.2\"" << (plus ? "" : " stroke-dasharray=\"4 3\"")
          << " points=\"";
        for (size_t k = 0; k < seg.points.size(); ++k) o << (k ? " " : "") << X(seg.points[k]) << "," << Y(seg.points[k]);
        o << "\"/>\n";
    }
    for (int i : saddles) {
        auto& seg = net.segments[i];
        o << "<polyline class=\"saddle\" fill=\"none\" stroke=\"#e08e0b\" stroke-width=\"3\" points=\"";
        for (size_t k = 0; k < seg.points.size(); ++k) o << (k ? " " : "") << X(seg.points[k]) << "," << Y(seg.points[k]);
        o << "\"/>\n";
    }
    for (auto z : q.zeros) o << "<circle class=\"zero\" cx=\"" << X(z) << "\" cy=\"" << Y(z) << "\" r=\"4\" fill=\"black\"/>\n";
    o << "</svg>\n";
    json r = header("network-svg");
    r["phase"] = jnum(phase);
    r["cap"] = jnum(cap);
    r["zeros"] = q.zeros.size();
    r["wplus"] = nplus;
    r["wminus"] = nminus;
    r["saddles"] = saddles.size();
    return {r, Ok, o.str()};
}

Outcome run_fg(const json& cfg, const Overrides&) {
    check_schema(cfg);
    auto T = parse_triangulation(cfg.at("triangulation"));
    EdgeCoordinates n;
    if (cfg.contains("coordinates"))
        for (auto& c : cfg["coordinates"]) {
            long v = c.at("n").get<long>();
            if (v) n[edge_id(T, c.at("edge"))] = v;
        }
    std::optional<long> shift;
    if (cfg.contains("shift")) shift = cfg["shift"].get<long>();
    auto lam = lamination_from_coordinates(n, T, shift);
    auto back = coordinates_from_lamination(lam, T);
    json r = header("fg");
    r["shift"] = lam.shift;
    json arcs = json::array();
    for (size_t t = 0; t < T.triangles.size(); ++t) {
        json a = json::array();
        for (int i = 0; i < 3; ++i)
            a.push_back({{"sides", {edge_json(T, T.triangles[t].e[i]), edge_json(T, T.triangles[t].e[(i + 1) % 3])}},
                         {"arcs", lam.arcs[t][i]}});
        arcs.push_back({{"vertices", T.triangles[t].v}, {"corners", a}});
    }
    r["triangles"] = arcs;
    r["peripheral"] = lam.peripheral;
    r["coordinates"] = coords_json(T, back);
    bool ok = back == n;
    r["roundtrip"] = ok;
    r["result"] = ok ? "PASS" : "FAIL";
    return {r, ok ? Ok : Fail, ""};
}

Outcome run_approx(const json& cfg, const Overrides& ov) {
    check_schema(cfg);
    auto T = parse_triangulation(cfg.at("triangulation"));
    auto b = parse_basis(T, cfg);
    int e0 = edge_id(T, cfg.at("edge"));
    int sign = cfg.value("sign", 1);
    auto lat = b.lattice(T);
    double mn = INFINITY, mx = 0;
    for (auto z : b.charge) mn = std::min(mn, z.imag()), mx = std::max(mx, z.imag());
    double L = ov.truncation ? *ov.truncation : cfg.contains("truncation") ? truncation_of(cfg, ov, mn, mx) : 3 * mn;
    auto res = approximate_generator(e0, sign, T, b, L);
    Vec g(T.rank(), 0);
    g[T.basis_index[e0]] = sign;
    bool ok = series_equal(res.series, monomial(g, L, lat));
    json r = header("approx");
    r["edge"] = edge_json(T, e0);
    r["sign"] = sign;
    r["truncation"] = jnum(L);
    r["steps"] = res.steps;
    json d = json::array();
    bool bound = true;
    for (auto& s : res.defects) {
        double lb = (s.degree - 1) * mn - mx;
        bound = bound && s.height >= lb - 1e-9;
        d.push_back({{"degree", s.degree}, {"height", jnum(s.height)}, {"bound", jnum(lb)}});
    }
    // first degree whose bound reaches L; no round may handle it
    long dstar = long(std::ceil((L + mx) / mn - 1e-12)) + 1;
    for (auto& s : res.defects) bound = bound && s.degree < dstar;
    r["defects"] = d;
    r["degree_bound"] = dstar;
    r["lift"] = series_json(lift_lamination(e0, sign, T, b, L), lat);
    r["series"] = series_json(res.series, lat);
    r["equals_generator"] = ok;
    r["linear_bound"] = bound;
    r["result"] = ok && bound ? "PASS" : "FAIL";
    return {r, ok && bound ? Ok : Fail, ""};
}

Outcome run_command(const std::string& command, const json& cfg, const Overrides& ov) {
    try {
        if (command == "spectrum") return run_spectrum(cfg, ov);
        if (command == "verify-wcf") return run_verify_wcf(cfg, ov);
        if (command == "verify-wall") return run_verify_wall(cfg, ov);
        if (command == "network-svg") return run_network_svg(cfg, ov);
        if (command == "fg") return run_fg(cfg, ov);
        if (command == "approx") return run_approx(cfg, ov);
        throw InputError("unknown command " + command);
    } catch (const CommandError& e) {
        json r = header(command.c_str());
        for (auto& [k, v] : e.extra.items())
            if (k != "schema" && k != "command") r[k] = v;
        r["error"] = e.what();
        r["result"] = "ERROR";
        return {r, e.code, ""};
    } catch (const IntegrationError& e) {
        json r = header(command.c_str());
        r["error"] = e.what();
        r["position"] = jc(e.where);
        r["result"] = "ERROR";
        return {r, BadInput, ""};
    } catch (const std::exception& e) {
        json r = header(command.c_str());
        r["error"] = e.what();
        r["result"] = "ERROR";
        return {r, BadInput, ""};
    }
}

}
