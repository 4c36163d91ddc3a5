// bvlab: batch front end over the core modules. Deterministic report on stdout, timing on stderr.
#include "bvlab/asymptotics.hpp"
#include "bvlab/cellular.hpp"
#include "bvlab/feyngraph.hpp"
#include "bvlab/graded_poly.hpp"
#include "bvlab/homotopy.hpp"
#include "bvlab/wick.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <chrono>
#include <complex>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace bvlab;
using json = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt_complex(std::complex<double> z) {
    return fmt(z.real()) + (z.imag() < 0 ? " - " : " + ") + fmt(std::abs(z.imag())) + "i";
}

class Report {
public:
    std::string command;
    std::uint64_t digest = 0xcbf29ce484222325ULL;

    std::string read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        digest = fnv1a(fnv1a(digest, path), ss.str());
        return ss.str();
    }
    void put(const std::string& key, json value) { out_[key] = std::move(value); }
    void check(const std::string& name, bool ok) { checks_.emplace_back(name, ok); }
    bool ok() const {
        for (const auto& c : checks_)
            if (!c.second) return false;
        return true;
    }

    void print(bool as_json) const {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
        if (as_json) {
            json j;
            j["command"] = command;
            j["inputs"] = std::string("fnv1a:") + hex;
            j["outputs"] = out_;
            json c = json::object();
            for (const auto& [n, v] : checks_) c[n] = v;
            j["checks"] = c;
            j["result"] = ok() ? "pass" : "fail";
            std::cout << j.dump(2) << '\n';
            return;
        }
        std::cout << "command: " << command << '\n' << "inputs: fnv1a:" << hex << '\n';
        for (const auto& [k, v] : out_.items()) print_value(k, v, 0);
        for (const auto& [n, v] : checks_) std::cout << "check " << n << ": " << (v ? "pass" : "fail") << '\n';
        std::cout << "result: " << (ok() ? "pass" : "fail") << '\n';
    }

private:
    static void print_value(const std::string& key, const json& v, int indent) {
        const std::string pad(indent, ' ');
        if (v.is_object()) {
            std::cout << pad << key << ":\n";
            for (const auto& [k, x] : v.items()) print_value(k, x, indent + 2);
        } else if (v.is_array()) {
            std::cout << pad << key << ":\n";
            for (const auto& x : v) {
                if (x.is_string())
                    std::cout << pad << "  - " << x.get<std::string>() << '\n';
                else
                    std::cout << pad << "  - " << x.dump() << '\n';
            }
        } else if (v.is_string()) {
            std::cout << pad << key << ": " << v.get<std::string>() << '\n';
        } else {
            std::cout << pad << key << ": " << v.dump() << '\n';
        }
    }

    json out_ = json::object();
    std::vector<std::pair<std::string, bool>> checks_;
};

std::string q(const Rational& r) { return bvlab::to_string(r); }

json rationals(const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(q(x));
    return a;
}

json series_json(const wick::Series& s) {
    json a = json::array();
    for (const auto& [e, x] : s.c) {
        if (x.is_zero()) continue;
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i]) mono += (mono.empty() ? "" : "*") + s.vars[i] + "^" + std::to_string(e[i]);
        a.push_back((mono.empty() ? "1" : mono) + ": " + x.to_string());
    }
    return a;
}

json poly_lines(const graded::GradedPolynomial& p) {
    json a = json::array();
    for (int k = 0; k < p.truncation(); ++k) {
        auto c = p.h_component(k);
        a.push_back("h^" + std::to_string(k) + ": " + c.to_string());
    }
    return a;
}

homotopy::DgLaData load_lie(Report& rep, const std::string& path) {
    return path.empty() ? homotopy::so3() : homotopy::DgLaData::parse(rep.read(path));
}

// ---- graphs

struct GraphsArgs {
    std::string valency;
    int cap = 16;
    bool connected = false;
    bool no_short_loops = false;
};

void cmd_graphs(Report& rep, const GraphsArgs& a) {
    auto prof = feyn::ValencyProfile::parse(a.valency);
    feyn::EnumerateOptions o;
    o.cap_half_edges = a.cap;
    o.connected_only = a.connected;
    o.allow_short_loops = !a.no_short_loops;
    auto classes = feyn::enumerate(prof, o);
    rep.put("profile", prof.to_string());
    rep.put("classes", classes.size());
    json table = json::array();
    for (const auto& c : classes) {
        json row;
        row["graph"] = c.form.to_string();
        row["aut"] = c.aut;
        row["connected"] = feyn::is_connected(c.form);
        table.push_back(row);
    }
    rep.put("table", table);
    const Rational vol = feyn::groupoid_volume(classes);
    rep.put("groupoid_volume", q(vol));
    if (!a.connected && !a.no_short_loops) {
        const Rational formula = feyn::groupoid_volume_formula(prof);
        rep.put("closed_form", q(formula));
        rep.check("groupoid volume", vol == formula);
    }
}

// ---- integrate

struct IntegrateArgs {
    std::vector<std::string> files;
    int order = 3;
    int hbar_order = 2;
    std::string mode = "gauss";
};

void cmd_integrate(Report& rep, const IntegrateArgs& a) {
    using namespace wick;
    std::vector<std::string> texts;
    for (const auto& f : a.files) texts.push_back(rep.read(f));
    rep.put("mode", a.mode);
    if (a.mode == "gauss" || a.mode == "fresnel") {
        std::string all;
        for (const auto& t : texts) all += t + "\n";
        auto pf = parse_problem(all, Kind::even);
        auto qd = QuadraticData::make(pf.q, Kind::even);
        const bool fres = a.mode == "fresnel";
        ExpectationOptions o;
        o.fresnel = fres;
        auto g = perturbative_expectation(qd, pf.p, a.order, o);
        auto orc = perturbative_expectation_oracle(qd, pf.p, a.order, fres);
        rep.put("order", a.order);
        rep.put("det_Q", q(determinant(pf.q)));
        rep.put("series", series_json(g));
        rep.check("graphs = oracle", g == orc);
    } else if (a.mode == "berezin" || a.mode == "super") {
        SuperQuadraticData s;
        if (a.mode == "berezin") {
            if (texts.empty()) throw std::invalid_argument("berezin needs a problem file");
            std::string all;
            for (const auto& t : texts) all += t + "\n";
            auto pf = parse_problem(all, Kind::odd);
            s.even = QuadraticData::make({}, Kind::even);
            s.odd = QuadraticData::make(pf.q, Kind::odd);
            s.p = pf.p;
            const Rational pf_q = pfaffian(pf.q);
            rep.put("pfaffian", q(pf_q));
            rep.put("berezin_gaussian", q(berezin_gaussian(pf.q)));
            rep.check("gaussian = pfaffian", berezin_gaussian(pf.q) == pf_q);
            rep.check("pf^2 = det", pf_q * pf_q == determinant(pf.q));
        } else {
            if (texts.size() != 2) throw std::invalid_argument("super needs an even and an odd problem file");
            auto pe = parse_problem(texts[0], Kind::even);
            auto po = parse_problem(texts[1], Kind::odd);
            s.even = QuadraticData::make(pe.q, Kind::even);
            s.odd = QuadraticData::make(po.q, Kind::odd);
            // couplings of the two files are kept apart
            for (auto t : pe.p.terms) s.p.terms.push_back({"e" + t.coupling, t.tensor});
            for (auto t : po.p.terms) s.p.terms.push_back({"o" + t.coupling, t.tensor});
        }
        auto g = super_perturbative(s, a.order);
        auto orc = super_perturbative_oracle(s, a.order);
        rep.put("order", a.order);
        rep.put("series", series_json(g));
        rep.check("graphs = oracle", g == orc);
    } else if (a.mode == "loop") {
        std::string all;
        for (const auto& t : texts) all += t + "\n";
        auto pf = parse_problem(all, Kind::even);
        auto qd = QuadraticData::make(pf.q, Kind::even);
        std::vector<SparseTensor> ts;
        for (const auto& t : pf.p.terms) ts.push_back(t.tensor);
        auto le = loop_expansion(qd, ts, a.hbar_order);
        rep.put("hbar_order", a.hbar_order);
        rep.put("full", rationals(le.full));
        rep.put("connected", rationals(le.connected));
        // same numbers from the coupling series with g_d = hbar^{d/2 - 1}
        auto s = perturbative_expectation(qd, pf.p, 2 * a.hbar_order);
        std::vector<int> excess;
        for (const auto& v : s.vars) excess.push_back(std::stoi(v.substr(1)) - 2);
        bool agree = true;
        for (int k = 0; k <= a.hbar_order; ++k) {
            QI v;
            for (const auto& [e, x] : s.c) {
                int w = 0;
                for (std::size_t i = 0; i < e.size(); ++i) w += e[i] * excess[i];
                if (w == 2 * k) v += x;
            }
            agree = agree && v == QI(le.full[k]);
        }
        rep.check("loop series = coupling series", agree);
    } else {
        throw std::invalid_argument("unknown mode '" + a.mode + "'");
    }
}

// ---- bv

struct BvArgs {
    std::string file;
    int hbar_order = 2;
    bool emit = false;
};

graded::ActionFile load_action(Report& rep, const std::string& path) {
    const std::string text = rep.read(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".dgla") {
        auto v = homotopy::DgLaData::parse(text);
        graded::ActionFile af;
        af.s = homotopy::build_bf_action(v);
        af.ctx = af.s.context();
        const auto w = homotopy::superfield_pairing(af.ctx);
        for (const auto& [x, xi] : w.pairs())
            af.pairs.emplace_back(af.ctx->var(x).name, af.ctx->var(xi).name);
        af.truncation = af.s.truncation();
        af.r = graded::GradedPolynomial(af.ctx, af.truncation);
        return af;
    }
    return graded::ActionFile::parse(text);
}

void report_residual(Report& rep, const std::string& key, const graded::GradedPolynomial& res) {
    json j;
    for (int k = 0; k < res.truncation(); ++k) j["h^" + std::to_string(k)] = res.h_component(k).to_string();
    rep.put(key, j);
}

void cmd_bv(Report& rep, const BvArgs& a, bool canonical) {
    auto af = load_action(rep, a.file);
    if (a.emit) rep.put("action_file", af.to_text());
    const auto w = af.pairing();
    rep.put("variables", af.ctx->size());
    rep.put("action", poly_lines(af.s));
    auto res = graded::qme_residual(af.s, w, a.hbar_order);
    report_residual(rep, "qme_residual", res);
    rep.check("quantum master equation", res.is_zero());
    if (!canonical) return;
    if (af.r.is_zero()) throw std::invalid_argument("canonical-step needs an R record");
    auto out = graded::canonical_step(af.s, af.r, w, af.eps, a.hbar_order);
    rep.put("eps", q(af.eps));
    rep.put("transformed", poly_lines(out));
    // QME is preserved to first order in eps: the linear part of the new residual vanishes
    auto delta = graded::poisson_bracket(af.s, af.r, w) + graded::bv_laplacian(af.r, w).h_shift(1);
    auto linear = (graded::poisson_bracket(af.s, delta, w) + graded::bv_laplacian(delta, w).h_shift(1)).truncated(a.hbar_order);
    report_residual(rep, "first_order_defect", linear);
    report_residual(rep, "transformed_residual", graded::qme_residual(out, w, a.hbar_order));
    rep.check("first order preserved", linear.is_zero());
}

// ---- transfer

struct TransferArgs {
    std::string dgla, ind;
    int leaves = 4;
    bool skip_oracle = false;
};

void cmd_transfer(Report& rep, const TransferArgs& a) {
    using namespace homotopy;
    auto v = DgLaData::parse(rep.read(a.dgla));
    auto data = a.ind.empty() ? InductionData::identity(v) : InductionData::parse(rep.read(a.ind), v);
    auto valid = validate_induction(v, data);
    rep.check("induction data", valid.ok);
    if (!valid.ok) {
        rep.put("failures", valid.failures);
        return;
    }
    auto dg = check_dgla(v);
    rep.put("unimodular_dgla", dg.ok);
    auto g = transfer(v, data, a.leaves);
    auto r = transfer_recursive(ULInfinityStructure::from_dgla(v), v.d, data, a.leaves);
    rep.put("leaves", a.leaves);
    rep.put("action", poly_lines(g.action));
    rep.put("operations", json::parse(g.ops.to_json()));
    rep.check("graphs = recursion", g.action == r.action);
    if (!a.skip_oracle) rep.check("graphs = fiber integral", g.action == pushforward_oracle(v.basis, build_bf_action(v), v, data, a.leaves));
    if (dg.ok) {
        auto rel = check_ulinfty(g.ops, a.leaves - 1);
        if (!rel.ok) rep.put("ulinfty_failures", rel.failures);
        rep.check("uL-infinity relations", rel.ok);
        auto res = qme_residual(g.action, superfield_pairing(g.action.context()), 2);
        rep.check("quantum master equation", truncate_leaves(res, a.leaves - 1).is_zero());
    } else {
        rep.put("dgla_failures", dg.failures);
    }
}

// ---- cellular

struct CellArgs {
    std::string complex, lie;
    int polygon = 0;
    int simplex = 1;
    int leaves = 3;
    int order = 2;
    bool print_action = false;
};

cellular::CellComplex1D load_complex(Report& rep, const CellArgs& a) {
    if (a.polygon > 0) return cellular::CellComplex1D::polygon(a.polygon);
    if (a.complex.empty()) throw std::invalid_argument("give a complex file or --polygon");
    return cellular::CellComplex1D::parse(rep.read(a.complex));
}

bool quadratic_only(const graded::GradedPolynomial& p) {
    for (const auto& [m, s] : p.terms())
        if (graded::GradedPolynomial::polynomial_degree(m) > 2) return false;
    return true;
}

void cmd_cellular(Report& rep, const std::string& sub, const CellArgs& a) {
    using namespace cellular;
    if (sub == "interval") {
        auto s = interval_series(a.order);
        rep.put("F", rationals(s.f));
        rep.put("G", rationals(s.g));
        rep.put("G_trace", rationals(s.g_trace));
        rep.check("F = (x/2)coth(x/2)", s.f == bernoulli_f(a.order));
        rep.check("G = log(sinh(x/2)/(x/2))", s.g == bernoulli_g(a.order));
        bool tr = true;
        for (std::size_t k = 1; k < s.g_trace.size(); ++k) tr = tr && s.g_trace[k] == s.g[k];
        rep.check("supertrace route", tr);
        rep.check("odd terms vanish", s.odd_terms_vanish);
        return;
    }
    auto lie = load_lie(rep, a.lie);
    const bool abelian = lie.f.empty();
    if (sub == "block") {
        auto b = building_block(lie, a.simplex, a.leaves);
        rep.put("block", json::parse(b.to_json()));
        rep.check("one-loop ansatz solvable", b.loop_solved);
        if (abelian) rep.check("quadratic action", quadratic_only(b.action));
        return;
    }
    auto x = load_complex(rep, a);
    if (sub == "assemble") {
        auto s = assemble(x, lie, a.leaves);
        rep.put("cells", x.vertices.size() + x.edges.size());
        rep.put("terms", s.term_count());
        if (a.print_action) rep.put("action", poly_lines(s));
        auto res = graded::qme_residual(s, homotopy::superfield_pairing(s.context()), 2);
        rep.check("quantum master equation below " + std::to_string(a.leaves) + " leaves",
                  homotopy::truncate_leaves(res, a.leaves - 1).is_zero());
        if (abelian) rep.check("quadratic action", quadratic_only(s));
        return;
    }
    if (sub == "circle") {
        auto r = circle_effective(x, lie, a.leaves);
        rep.put("effective", poly_lines(r.result.action));
        rep.put("expected", poly_lines(r.expected));
        rep.put("classical_mismatch", r.classical_mismatch);
        rep.put("quantum_mismatch", r.quantum_mismatch);
        rep.check("assembled QME", r.qme_ok);
        bool second = true;
        for (int d : r.quantum_mismatch) second = second && d != 2;
        rep.check("quantum part at second order", second);
        // anything above second order is reported; it may differ by a canonical transformation
        rep.check("classical part", r.classical_mismatch.empty());
        rep.check("quantum part above second order", r.quantum_mismatch.empty());
        return;
    }
    throw std::invalid_argument("unknown cellular command '" + sub + "'");
}

// ---- asymptotics

struct AsymArgs {
    int order = 3;
    double z = 0.1;
    int terms = 12;
    double hbar = 0.05;
    std::string example = "quartic_bump";
    std::string function = "quartic";
    int cap = 16;
};

double slope(const std::vector<double>& h, const std::vector<double>& e) {
    const double n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void cmd_asymptotics(Report& rep, const std::string& sub, const AsymArgs& a) {
    using namespace asym;
    if (sub == "stirling") {
        auto s = stirling_coefficients(a.order);
        rep.put("c", rationals(s.c));
        rep.put("method", s.method);
        rep.put("c1_stated_reading", q(s.c1_stated_reading));
        auto b = bernoulli_numbers(a.order + 1);
        bool closed = true;
        for (int n = 1; n <= a.order; ++n) closed = closed && s.c[n - 1] == b[n + 1] / Rational(n * (n + 1));
        rep.check("c_n = B_{n+1}/(n(n+1))", closed);
        const double ratio = stirling_ratio(20, s.c);
        rep.put("ratio_20", fmt(ratio));
        rep.check("|ratio(20) - 1| < 1e-4", std::abs(ratio - 1) < 1e-4);
        return;
    }
    if (sub == "borel") {
        // a_n = (-1)^n n!
        std::vector<Rational> c;
        for (int n = 0; n <= a.terms; ++n) c.push_back(n % 2 ? Rational(-factorial(n)) : factorial(n));
        auto r = borel_sum(c, a.z);
        const double closed = std::exp(1 / a.z) / a.z * boost::math::expint(1, 1 / a.z);
        rep.put("z", fmt(a.z));
        rep.put("value", fmt(r.value));
        rep.put("closed_form", fmt(closed));
        rep.put("pade", std::to_string(r.pade_l) + "/" + std::to_string(r.pade_m));
        rep.check("matches z^-1 e^(1/z) E1(1/z)", std::abs(r.value - closed) < 1e-6 * std::abs(closed));
        return;
    }
    if (sub == "fp-demo") {
        auto ex = a.example == "gaussian" ? FPExample::gaussian : FPExample::quartic_bump;
        if (a.example != "gaussian" && a.example != "quartic_bump")
            throw std::invalid_argument("unknown example '" + a.example + "'");
        auto r = faddeev_popov_compare(ex, a.hbar);
        rep.put("lhs", fmt_complex(r.lhs));
        rep.put("rhs", fmt_complex(r.rhs));
        rep.put("ratio", fmt(std::abs(r.rhs) / std::abs(r.lhs)));
        rep.put("rel_error", fmt(r.rel_error));
        rep.check("relative error < 1e-4", r.rel_error < 1e-4);
        return;
    }
    if (sub == "oracle") {
        const auto& fn = catalogue_entry(a.function);
        const int L = a.order;
        auto lp = laplace_series(fn.jet(2 * L + 2), L, a.cap);
        std::vector<double> hs{0.1, 0.05, 0.025}, err;
        json rows = json::array();
        for (double h : hs) {
            const double exact = numeric_laplace_oracle(fn.f, fn.g, h, fn.x0);
            const double series = lp.evaluate(h, L + 1).real() * std::exp(fn.f(fn.x0) / h);
            err.push_back(std::abs(exact - series) / exact);
            rows.push_back("hbar " + fmt(h) + ": rel_error " + fmt(err.back()));
        }
        json cs = json::array();
        for (const auto& c : lp.coeffs) cs.push_back(c.to_string());
        rep.put("function", fn.name);
        rep.put("coefficients", cs);
        rep.put("errors", rows);
        const double s = slope(hs, err);
        rep.put("fitted_order", fmt(s));
        rep.check("order >= L + 0.8", s >= L + 0.8);
        return;
    }
    throw std::invalid_argument("unknown asymptotics command '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bvlab: graphs, Gaussian integrals, BV checks, homotopy transfer and cellular BF"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "JSON report");

    GraphsArgs ga;
    auto* graphs = app.add_subcommand("graphs", "enumerate graphs of a valency profile");
    graphs->add_option("--valency", ga.valency, "profile like 3:2,4:1")->required();
    graphs->add_option("--cap-half-edges", ga.cap);
    graphs->add_flag("--connected", ga.connected);
    graphs->add_flag("--no-short-loops", ga.no_short_loops);

    IntegrateArgs ia;
    auto* integ = app.add_subcommand("integrate", "perturbative Gaussian and Berezin integrals");
    integ->add_option("files", ia.files, "problem files (Q and P records)")->required();
    integ->add_option("--order", ia.order);
    integ->add_option("--hbar-order", ia.hbar_order);
    integ->add_option("--mode", ia.mode)->check(CLI::IsMember({"gauss", "fresnel", "berezin", "super", "loop"}));

    BvArgs ba;
    auto* bv = app.add_subcommand("bv", "quantum master equation and canonical transformations");
    bv->require_subcommand(1);
    auto* bv_qme = bv->add_subcommand("qme");
    auto* bv_step = bv->add_subcommand("canonical-step");
    for (auto* s : {bv_qme, bv_step}) {
        s->add_option("file", ba.file, "action file or .dgla")->required();
        s->add_option("--hbar-order", ba.hbar_order);
        s->add_flag("--emit", ba.emit, "print the action in action-file form");
    }

    TransferArgs ta;
    auto* tr = app.add_subcommand("transfer", "homotopy transfer of a unimodular dgLa");
    tr->add_option("dgla", ta.dgla)->required();
    tr->add_option("induction", ta.ind);
    tr->add_option("--leaves", ta.leaves);
    tr->add_flag("--skip-oracle", ta.skip_oracle);

    CellArgs ca;
    auto* cell = app.add_subcommand("cellular", "cellular BF theory");
    cell->require_subcommand(1);
    std::vector<CLI::App*> cell_subs;
    for (const char* n : {"block", "assemble", "circle", "interval"}) cell_subs.push_back(cell->add_subcommand(n));
    for (auto* s : cell_subs) {
        s->add_option("--lie", ca.lie, "Lie algebra file (default so(3))");
        s->add_option("--leaves", ca.leaves);
        s->add_option("--order", ca.order);
    }
    cell_subs[0]->add_option("--simplex", ca.simplex)->check(CLI::Range(0, 2));
    for (auto* s : {cell_subs[1], cell_subs[2]}) {
        s->add_option("complex", ca.complex, "1-dimensional cell complex");
        s->add_option("--polygon", ca.polygon);
    }
    cell_subs[1]->add_flag("--print-action", ca.print_action);

    AsymArgs aa;
    auto* as = app.add_subcommand("asymptotics", "Laplace, Stirling, Borel and Faddeev-Popov");
    as->require_subcommand(1);
    auto* as_st = as->add_subcommand("stirling");
    as_st->add_option("--order", aa.order);
    auto* as_bo = as->add_subcommand("borel");
    as_bo->add_option("--z", aa.z);
    as_bo->add_option("--terms", aa.terms);
    auto* as_fp = as->add_subcommand("fp-demo");
    as_fp->add_option("--hbar", aa.hbar);
    as_fp->add_option("--example", aa.example);
    auto* as_or = as->add_subcommand("oracle");
    as_or->add_option("--function", aa.function);
    as_or->add_option("--order", aa.order);
    as_or->add_option("--cap-half-edges", aa.cap);

    CLI11_PARSE(app, argc, argv);

    Report rep;
    for (int i = 1; i < argc; ++i) rep.command += (i > 1 ? " " : "") + std::string(argv[i]);
    rep.digest = fnv1a(rep.digest, rep.command);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (graphs->parsed()) cmd_graphs(rep, ga);
        if (integ->parsed()) cmd_integrate(rep, ia);
        if (bv->parsed()) cmd_bv(rep, ba, bv_step->parsed());
        if (tr->parsed()) cmd_transfer(rep, ta);
        for (auto* s : cell_subs)
            if (s->parsed()) cmd_cellular(rep, s->get_name(), ca);
        for (auto* s : {as_st, as_bo, as_fp, as_or})
            if (s->parsed()) cmd_asymptotics(rep, s->get_name(), aa);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.print(as_json);
    std::cerr << "time: " << fmt(secs) << " s\n";
    return rep.ok() ? 0 : 1;
}
