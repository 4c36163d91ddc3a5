#include "bvlab/homotopy.hpp"

#include "json.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bvlab::homotopy {

using graded::ContextPtr;
using graded::GradedPolynomial;
using graded::GradedVariable;
using graded::Monomial;
using graded::Side;

namespace {

int koszul(int b, int c) { return sign_pow((b + 1) * c); }

std::string join_failure(const std::string& head, const std::string& detail) {
    std::string s = head + ": " + detail;
    if (s.size() > 400) s = s.substr(0, 397) + "...";
    return s;
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> t;
    std::string w;
    while (in >> w) {
        if (w[0] == '#') break;
        t.push_back(w);
    }
    return t;
}

}  // namespace

// ---------------------------------------------------------------- dgLa data

Rational DgLaData::bracket(int a, int b, int c) const {
    auto it = f.find({a, b, c});
    return it == f.end() ? Rational(0) : it->second;
}

void DgLaData::set_bracket(int a, int b, int c, const Rational& v) {
    const Rational partner = -sign_pow(degree(b) * degree(c)) * v;
    if (b == c && v != partner) throw std::invalid_argument("bracket of e_b with itself must vanish for even e_b");
    if (sgn(v) == 0) {
        f.erase({a, b, c});
        f.erase({a, c, b});
        return;
    }
    f[{a, b, c}] = v;
    f[{a, c, b}] = partner;
}

int DgLaData::index(const std::string& name) const {
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown basis element '" + name + "'");
}

DgLaData DgLaData::parse(const std::string& text) {
    DgLaData v;
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> records;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = tokens(line);
        if (t.empty()) continue;
        if (t[0] == "basis") {
            if (t.size() != 3) throw std::invalid_argument("line " + std::to_string(lineno) + ": basis <name> <degree>");
            v.basis.push_back({t[1], std::stoi(t[2])});
        } else if (t[0] == "d" || t[0] == "f") {
            t.push_back(std::to_string(lineno));
            records.push_back(t);
        } else {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown record '" + t[0] + "'");
        }
    }
    v.d = zero_matrix(v.dim(), v.dim());
    for (const auto& r : records) {
        const std::string& ln = r.back();
        if (r[0] == "d") {
            if (r.size() != 5) throw std::invalid_argument("line " + ln + ": d <a> <b> <value>");
            v.d[v.index(r[1])][v.index(r[2])] = parse_rational(r[3]);
        } else {
            if (r.size() != 6) throw std::invalid_argument("line " + ln + ": f <a> <b> <c> <value>");
            const int a = v.index(r[1]), b = v.index(r[2]), c = v.index(r[3]);
            const Rational val = parse_rational(r[4]);
            auto it = v.f.find({a, b, c});
            if (it != v.f.end() && it->second != val)
                throw std::invalid_argument("line " + ln + ": bracket entry contradicts graded antisymmetry");
            v.set_bracket(a, b, c, val);
        }
    }
    return v;
}

std::string DgLaData::to_text() const {
    std::ostringstream out;
    for (const auto& e : basis) out << "basis " << e.name << ' ' << e.degree << '\n';
    for (std::size_t a = 0; a < dim(); ++a)
        for (std::size_t b = 0; b < dim(); ++b)
            if (sgn(d[a][b]) != 0) out << "d " << basis[a].name << ' ' << basis[b].name << ' ' << bvlab::to_string(d[a][b]) << '\n';
    for (const auto& [k, val] : f) {
        auto [a, b, c] = k;
        if (b > c) continue;
        out << "f " << basis[a].name << ' ' << basis[b].name << ' ' << basis[c].name << ' ' << bvlab::to_string(val) << '\n';
    }
    return out.str();
}

void Report::fail(const std::string& what) {
    ok = false;
    failures.push_back(what);
}

Report check_dgla(const DgLaData& v) {
    Report r;
    const int n = static_cast<int>(v.dim());
    auto deg = [&](int a) { return v.degree(a); };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (sgn(v.d[a][b]) != 0 && deg(a) != deg(b) + 1)
                r.fail("degree: d maps " + v.basis[b].name + " to " + v.basis[a].name);
    RMatrix d2 = mat_mul(v.d, v.d);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (sgn(d2[a][b]) != 0) r.fail("d^2 != 0 at (" + v.basis[a].name + ", " + v.basis[b].name + ")");
    for (const auto& [k, val] : v.f) {
        auto [a, b, c] = k;
        if (deg(a) != deg(b) + deg(c)) r.fail("degree: bracket of " + v.basis[b].name + ", " + v.basis[c].name);
        if (v.bracket(a, c, b) != -sign_pow(deg(b) * deg(c)) * val)
            r.fail("antisymmetry at " + v.basis[b].name + ", " + v.basis[c].name);
    }
    // [x, y] as vectors
    auto br = [&](int b, int c) {
        std::vector<Rational> out(n, 0);
        for (int a = 0; a < n; ++a) out[a] = v.bracket(a, b, c);
        return out;
    };
    auto br_vec = [&](const std::vector<Rational>& x, int c) {
        std::vector<Rational> out(n, 0);
        for (int b = 0; b < n; ++b)
            if (sgn(x[b]) != 0)
                for (int a = 0; a < n; ++a) out[a] += x[b] * v.bracket(a, b, c);
        return out;
    };
    auto vec_br = [&](int b, const std::vector<Rational>& y) {
        std::vector<Rational> out(n, 0);
        for (int c = 0; c < n; ++c)
            if (sgn(y[c]) != 0)
                for (int a = 0; a < n; ++a) out[a] += y[c] * v.bracket(a, b, c);
        return out;
    };
    auto dvec = [&](const std::vector<Rational>& x) {
        std::vector<Rational> out(n, 0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out[a] += v.d[a][b] * x[b];
        return out;
    };
    auto col = [&](const RMatrix& m, int b) {
        std::vector<Rational> out(n, 0);
        for (int a = 0; a < n; ++a) out[a] = m[a][b];
        return out;
    };
    // Leibniz: d[x,y] = [dx,y] + (-1)^{|x|} [x,dy]
    for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
            auto lhs = dvec(br(b, c));
            auto t1 = br_vec(col(v.d, b), c);
            auto t2 = vec_br(b, col(v.d, c));
            for (int a = 0; a < n; ++a)
                if (lhs[a] != t1[a] + sign_pow(deg(b)) * t2[a]) {
                    r.fail("Leibniz at (" + v.basis[b].name + ", " + v.basis[c].name + ")");
                    break;
                }
        }
    // Jacobi: [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|} [y,[x,z]]
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                auto lhs = vec_br(x, br(y, z));
                auto t1 = br_vec(br(x, y), z);
                auto t2 = vec_br(y, br(x, z));
                for (int a = 0; a < n; ++a)
                    if (lhs[a] != t1[a] + sign_pow(deg(x) * deg(y)) * t2[a]) {
                        r.fail("Jacobi at (" + v.basis[x].name + ", " + v.basis[y].name + ", " + v.basis[z].name + ")");
                        break;
                    }
            }
    // unimodularity: Str ad(e_b) = sum_a (-1)^{|a|} f^a_{ba}
    for (int b = 0; b < n; ++b) {
        Rational s = 0;
        for (int a = 0; a < n; ++a) s += sign_pow(deg(a)) * v.bracket(a, b, a);
        if (sgn(s) != 0) r.fail("unimodularity: Str ad(" + v.basis[b].name + ") = " + bvlab::to_string(s));
    }
    return r;
}

// ---------------------------------------------------------------- BF action

ContextPtr superfield_context(const std::vector<BasisElement>& basis) {
    std::vector<GradedVariable> vars;
    for (const auto& e : basis) vars.push_back({"A_" + e.name, 1 - e.degree});
    for (const auto& e : basis) vars.push_back({"B_" + e.name, e.degree - 2});
    return graded::make_context(vars);
}

graded::DarbouxPairing superfield_pairing(const ContextPtr& ctx) {
    const std::size_t n = ctx->size() / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a) pairs.push_back({a, n + a});
    return graded::DarbouxPairing(ctx, pairs);
}

namespace {

GradedPolynomial var(const ContextPtr& ctx, std::size_t i, int trunc) { return GradedPolynomial::variable(ctx, i, trunc); }

std::size_t a_count(const ContextPtr& ctx) { return ctx->size() / 2; }

}  // namespace

GradedPolynomial build_bf_action(const DgLaData& v) {
    auto ctx = superfield_context(v.basis);
    const std::size_t n = v.dim();
    GradedPolynomial s(ctx, 2);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (sgn(v.d[a][b]) != 0) s += v.d[a][b] * (var(ctx, n + a, 2) * var(ctx, b, 2));
    for (const auto& [k, val] : v.f) {
        auto [a, b, c] = k;
        s += Rational(koszul(v.degree(b), v.degree(c)), 2) * val *
             (var(ctx, n + a, 2) * var(ctx, b, 2) * var(ctx, c, 2));
    }
    return s;
}

// ---------------------------------------------------------------- induction data

InductionData InductionData::identity(const DgLaData& v) {
    InductionData d;
    d.target = v.basis;
    d.iota = identity_matrix(v.dim());
    d.p = identity_matrix(v.dim());
    d.k = zero_matrix(v.dim(), v.dim());
    return d;
}

InductionData InductionData::parse(const std::string& text, const DgLaData& v) {
    InductionData d;
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> records;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = tokens(line);
        if (t.empty()) continue;
        if (t[0] == "target") {
            if (t.size() != 3) throw std::invalid_argument("line " + std::to_string(lineno) + ": target <name> <degree>");
            d.target.push_back({t[1], std::stoi(t[2])});
        } else if (t[0] == "iota" || t[0] == "p" || t[0] == "K") {
            if (t.size() != 4)
                throw std::invalid_argument("line " + std::to_string(lineno) + ": " + t[0] + " <row> <col> <value>");
            records.push_back(t);
        } else {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown record '" + t[0] + "'");
        }
    }
    auto tindex = [&](const std::string& name) {
        for (std::size_t i = 0; i < d.target.size(); ++i)
            if (d.target[i].name == name) return static_cast<int>(i);
        throw std::invalid_argument("unknown target basis element '" + name + "'");
    };
    const std::size_t n = v.dim(), m = d.target.size();
    d.iota = zero_matrix(n, m);
    d.p = zero_matrix(m, n);
    d.k = zero_matrix(n, n);
    for (const auto& r : records) {
        const Rational val = parse_rational(r[3]);
        if (r[0] == "iota") d.iota[v.index(r[1])][tindex(r[2])] = val;
        if (r[0] == "p") d.p[tindex(r[1])][v.index(r[2])] = val;
        if (r[0] == "K") d.k[v.index(r[1])][v.index(r[2])] = val;
    }
    return d;
}

std::string InductionData::to_text(const DgLaData& v) const {
    std::ostringstream out;
    for (const auto& e : target) out << "target " << e.name << ' ' << e.degree << '\n';
    for (std::size_t a = 0; a < iota.size(); ++a)
        for (std::size_t b = 0; b < target.size(); ++b)
            if (sgn(iota[a][b]) != 0) out << "iota " << v.basis[a].name << ' ' << target[b].name << ' ' << bvlab::to_string(iota[a][b]) << '\n';
    for (std::size_t a = 0; a < target.size(); ++a)
        for (std::size_t b = 0; b < v.dim(); ++b)
            if (sgn(p[a][b]) != 0) out << "p " << target[a].name << ' ' << v.basis[b].name << ' ' << bvlab::to_string(p[a][b]) << '\n';
    for (std::size_t a = 0; a < v.dim(); ++a)
        for (std::size_t b = 0; b < v.dim(); ++b)
            if (sgn(k[a][b]) != 0) out << "K " << v.basis[a].name << ' ' << v.basis[b].name << ' ' << bvlab::to_string(k[a][b]) << '\n';
    return out.str();
}

RMatrix induced_differential(const DgLaData& v, const InductionData& data) {
    return mat_mul(mat_mul(data.p, v.d), data.iota);
}

Report validate_induction(const DgLaData& v, const InductionData& data) {
    Report r;
    const std::size_t n = v.dim(), m = data.target.size();
    auto shape = [&](const RMatrix& a, std::size_t rows, std::size_t cols, const char* name) {
        bool good = a.size() == rows;
        for (const auto& row : a) good = good && row.size() == cols;
        if (!good) throw std::invalid_argument(std::string("induction data: ") + name + " has the wrong shape");
    };
    shape(data.iota, n, m, "iota");
    shape(data.p, m, n, "p");
    shape(data.k, n, n, "K");
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < m; ++b)
            if (sgn(data.iota[a][b]) != 0 && v.degree(a) != data.target[b].degree) r.fail("iota does not preserve degree");
        for (std::size_t b = 0; b < n; ++b)
            if (sgn(data.k[a][b]) != 0 && v.degree(a) != v.degree(b) - 1) r.fail("K does not have degree -1");
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (sgn(data.p[a][b]) != 0 && data.target[a].degree != v.degree(b)) r.fail("p does not preserve degree");
    const RMatrix dp = induced_differential(v, data);
    auto expect_zero = [&](const RMatrix& x, const std::string& what) {
        if (!is_zero(x)) r.fail(what);
    };
    expect_zero(mat_sub(mat_mul(v.d, data.iota), mat_mul(data.iota, dp)), "iota is not a chain map");
    expect_zero(mat_sub(mat_mul(dp, data.p), mat_mul(data.p, v.d)), "p is not a chain map");
    expect_zero(mat_sub(mat_mul(data.p, data.iota), identity_matrix(m)), "p iota != id");
    expect_zero(mat_sub(mat_add(mat_mul(v.d, data.k), mat_mul(data.k, v.d)),
                        mat_sub(identity_matrix(n), mat_mul(data.iota, data.p))),
                "dK + Kd != id - iota p");
    expect_zero(mat_mul(data.k, data.k), "K^2 != 0");
    expect_zero(mat_mul(data.k, data.iota), "K iota != 0");
    expect_zero(mat_mul(data.p, data.k), "p K != 0");
    return r;
}

namespace {

// independent columns of a, in order of appearance
std::vector<std::vector<Rational>> column_basis(const RMatrix& a) {
    std::vector<std::vector<Rational>> out;
    if (a.empty()) return out;
    const std::size_t rows = a.size(), cols = a[0].size();
    RMatrix acc;
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<Rational> v(rows);
        for (std::size_t r = 0; r < rows; ++r) v[r] = a[r][c];
        RMatrix trial = acc;
        trial.push_back(v);
        if (rank(trial) > acc.size()) {
            acc = trial;
            out.push_back(v);
        }
    }
    return out;
}

std::vector<int> column_indices(const RMatrix& a) {
    std::vector<int> idx;
    if (a.empty()) return idx;
    RMatrix acc;
    for (std::size_t c = 0; c < a[0].size(); ++c) {
        std::vector<Rational> v(a.size());
        for (std::size_t r = 0; r < a.size(); ++r) v[r] = a[r][c];
        RMatrix trial = acc;
        trial.push_back(v);
        if (rank(trial) > acc.size()) {
            acc = trial;
            idx.push_back(static_cast<int>(c));
        }
    }
    return idx;
}

}  // namespace

HodgeSplit hodge_split(const DgLaData& v, const InductionData& data) {
    auto rep = validate_induction(v, data);
    if (!rep.ok) throw std::invalid_argument("hodge_split: invalid induction data (" + rep.failures.front() + ")");
    HodgeSplit h;
    h.retract = column_basis(data.iota);
    h.exact = column_basis(mat_mul(v.d, data.k));
    h.coexact = column_basis(mat_mul(data.k, v.d));
    RMatrix all;
    for (const auto* part : {&h.retract, &h.exact, &h.coexact})
        for (const auto& c : *part) all.push_back(c);
    if (all.size() != v.dim() || rank(all) != v.dim()) throw std::logic_error("Hodge pieces do not form a basis");
    return h;
}

// ---------------------------------------------------------------- polynomial helpers

namespace {

struct Degrees {
    int a = 0, b = 0;
};

Degrees superfield_degrees(const Monomial& m, std::size_t n) {
    Degrees d;
    for (std::size_t i = 0; i < n; ++i) d.a += m[i];
    for (std::size_t i = n; i < 2 * n; ++i) d.b += m[i];
    return d;
}

GradedPolynomial keep(const GradedPolynomial& p, const std::function<bool(const Monomial&)>& pred) {
    GradedPolynomial out(p.context(), p.truncation());
    for (const auto& [m, s] : p.terms())
        if (pred(m)) out.add_term(m, s);
    return out;
}

GradedPolynomial a_degree_part(const GradedPolynomial& p, int n) {
    const std::size_t half = a_count(p.context());
    return keep(p, [&](const Monomial& m) { return superfield_degrees(m, half).a == n; });
}

GradedPolynomial zero(const ContextPtr& ctx, int trunc = 1) { return GradedPolynomial(ctx, trunc); }

}  // namespace

GradedPolynomial truncate_leaves(const GradedPolynomial& p, int max_leaves) {
    if (max_leaves < 0) return p;
    const std::size_t half = a_count(p.context());
    return keep(p, [&](const Monomial& m) { return superfield_degrees(m, half).a <= max_leaves; });
}

// ---------------------------------------------------------------- uL-infinity structures

ULInfinityStructure ULInfinityStructure::from_dgla(const DgLaData& v) {
    return from_action(v.basis, build_bf_action(v), 2);
}

ULInfinityStructure ULInfinityStructure::from_action(const std::vector<BasisElement>& basis, const GradedPolynomial& s,
                                                     int max_order) {
    ULInfinityStructure u;
    u.basis = basis;
    u.ctx = superfield_context(basis);
    if (!s.context()->same_as(*u.ctx)) throw std::invalid_argument("action is not over the superfield context");
    u.max_order = max_order;
    const std::size_t n = basis.size();
    const GradedPolynomial s0 = s.h_component(0), s1 = s.h_component(1);
    GradedPolynomial rebuilt = zero(u.ctx);
    for (std::size_t a = 0; a < n; ++a) {
        GradedPolynomial l = derive(s0, n + a, Side::left);
        for (const auto& [m, c] : l.terms())
            if (superfield_degrees(m, n).b != 0) throw std::invalid_argument("action is not linear in B");
        u.lambda.push_back(truncate_leaves(l, max_order));
        rebuilt += var(u.ctx, n + a, 1) * l;
    }
    if (!(rebuilt == s0)) throw std::invalid_argument("classical part of the action is not of the form <B, Lambda(A)>");
    for (const auto& [m, c] : s1.terms())
        if (superfield_degrees(m, n).b != 0) throw std::invalid_argument("quantum part of the action depends on B");
    u.rho = truncate_leaves(s1, max_order);
    return u;
}

GradedPolynomial ULInfinityStructure::action() const {
    const std::size_t n = basis.size();
    GradedPolynomial s(ctx, 2);
    for (std::size_t a = 0; a < n; ++a) {
        const GradedPolynomial term = var(ctx, n + a, 1) * lambda[a];
        for (const auto& [m, c] : term.terms()) s.add_term(m, c.coeff(0), 0);
    }
    for (const auto& [m, c] : rho.terms()) s.add_term(m, c.coeff(0), 1);
    return s;
}

namespace {

std::vector<ULInfinityStructure::Entry> entries(const GradedPolynomial& p, int out, int n, std::size_t half) {
    std::vector<ULInfinityStructure::Entry> e;
    for (const auto& [m, c] : p.terms()) {
        if (superfield_degrees(m, half).a != n) continue;
        ULInfinityStructure::Entry x;
        x.out = out;
        for (std::size_t i = 0; i < half; ++i)
            for (int k = 0; k < m[i]; ++k) x.in.push_back(static_cast<int>(i));
        x.value = c.coeff(0);
        e.push_back(std::move(x));
    }
    return e;
}

}  // namespace

std::vector<ULInfinityStructure::Entry> ULInfinityStructure::l(int n) const {
    std::vector<Entry> out;
    for (std::size_t a = 0; a < lambda.size(); ++a)
        for (auto& e : entries(lambda[a], static_cast<int>(a), n, basis.size())) out.push_back(std::move(e));
    return out;
}

std::vector<ULInfinityStructure::Entry> ULInfinityStructure::q(int n) const { return entries(rho, -1, n, basis.size()); }

Rational ULInfinityStructure::bracket_from_l2(int a, int b, int c) const {
    const std::size_t n = basis.size();
    auto deg = [&](int i) { return basis[i].degree; };
    if (b > c) return -sign_pow(deg(b) * deg(c)) * bracket_from_l2(a, c, b);
    Monomial m(2 * n, 0);
    m[b] += 1;
    m[c] += 1;
    const Rational coef = lambda[a].coefficient(m);
    // Lambda_2 = 1/2 sum s(b,c) f^a_{bc} A^b A^c; off-diagonal pairs appear twice
    return Rational(b == c ? 2 * coef : coef) * koszul(deg(b), deg(c));
}

std::string ULInfinityStructure::to_json() const {
    nlohmann::ordered_json j;
    j["basis"] = nlohmann::ordered_json::array();
    for (const auto& e : basis) j["basis"].push_back({{"name", e.name}, {"degree", e.degree}});
    j["max_order"] = max_order;
    auto dump = [&](const std::vector<Entry>& es) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& e : es) {
            nlohmann::ordered_json x;
            if (e.out >= 0) x["out"] = basis[e.out].name;
            auto in = nlohmann::ordered_json::array();
            for (int i : e.in) in.push_back(basis[i].name);
            x["in"] = in;
            x["value"] = bvlab::to_string(e.value);
            arr.push_back(x);
        }
        return arr;
    };
    for (int k = 1; k <= max_order; ++k) {
        j["l"][std::to_string(k)] = dump(l(k));
        j["q"][std::to_string(k)] = dump(q(k));
    }
    return j.dump(1);
}

Report check_ulinfty(const ULInfinityStructure& ops, int n_max) {
    Report r;
    const std::size_t n = ops.basis.size();
    auto sgn_a = [&](std::size_t a) { return Rational(sign_pow(ops.basis[a].degree)); };
    std::vector<GradedPolynomial> dlam(n, zero(ops.ctx));
    for (std::size_t c = 0; c < n; ++c) {
        GradedPolynomial q = zero(ops.ctx);
        for (std::size_t a = 0; a < n; ++a)
            if (!ops.lambda[a].is_zero()) q += sgn_a(a) * (ops.lambda[a] * derive(ops.lambda[c], a, Side::left));
        for (int k = 0; k <= std::min(n_max, ops.max_order); ++k) {
            auto part = a_degree_part(q, k);
            if (!part.is_zero())
                r.fail(join_failure("relation 1, n = " + std::to_string(k) + ", output " + ops.basis[c].name,
                                    part.to_string()));
        }
    }
    GradedPolynomial div = zero(ops.ctx);
    for (std::size_t a = 0; a < n; ++a)
        div += sgn_a(a) * (derive(ops.lambda[a], a, Side::left) + ops.lambda[a] * derive(ops.rho, a, Side::left));
    for (int k = 0; k <= std::min(n_max, ops.max_order - 1); ++k) {
        auto part = a_degree_part(div, k);
        if (!part.is_zero()) r.fail(join_failure("relation 2, n = " + std::to_string(k), part.to_string()));
    }
    return r;
}

// ---------------------------------------------------------------- transfer

namespace {

using Field = std::vector<GradedPolynomial>;   // components of a V-valued superfield
using PMatrix = std::vector<std::vector<GradedPolynomial>>;

struct TransferContext {
    const DgLaData* v = nullptr;
    ContextPtr base;  // superfield context of V'
    int max_leaves = 0;
    std::size_t dim = 0;

    GradedPolynomial z() const { return zero(base); }
    GradedPolynomial trunc(const GradedPolynomial& p) const { return truncate_leaves(p, max_leaves); }

    Field apply(const RMatrix& m, const Field& x) const {
        Field out(m.size(), z());
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = 0; b < x.size(); ++b)
                if (sgn(m[a][b]) != 0 && !x[b].is_zero()) out[a] += m[a][b] * x[b];
        return out;
    }

    // [x, y] for x of total degree 1
    Field bracket(const Field& x, const Field& y) const {
        Field out(dim, z());
        for (const auto& [k, val] : v->f) {
            auto [a, b, c] = k;
            if (x[b].is_zero() || y[c].is_zero()) continue;
            out[a] += Rational(koszul(v->degree(b), v->degree(c))) * val * trunc(x[b] * y[c]);
        }
        return out;
    }

    // right-matrix entries of v -> -K [t, v]
    PMatrix bead(const Field& t, const RMatrix& k) const {
        PMatrix m(dim, std::vector<GradedPolynomial>(dim, z()));
        for (const auto& [key, val] : v->f) {
            auto [e, b, c] = key;
            if (t[b].is_zero()) continue;
            const GradedPolynomial term = Rational(koszul(v->degree(b), v->degree(c))) * val * t[b];
            for (std::size_t a = 0; a < dim; ++a)
                if (sgn(k[a][e]) != 0) m[a][c] -= k[a][e] * term;
        }
        return m;
    }

    PMatrix mul(const PMatrix& x, const PMatrix& y) const {
        PMatrix out(dim, std::vector<GradedPolynomial>(dim, z()));
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t e = 0; e < dim; ++e) {
                if (x[a][e].is_zero()) continue;
                for (std::size_t c = 0; c < dim; ++c)
                    if (!y[e][c].is_zero()) out[a][c] += trunc(x[a][e] * y[e][c]);
            }
        return out;
    }

    // supertrace with the parity of the field A^a, i.e. 1 - |a|
    GradedPolynomial str(const PMatrix& x) const {
        GradedPolynomial s = z();
        for (std::size_t a = 0; a < dim; ++a)
            if (!x[a][a].is_zero()) s += Rational(sign_pow(1 - v->degree(a))) * x[a][a];
        return s;
    }

    Field leaves(const InductionData& data) const {
        const std::size_t m = data.target.size();
        Field a(dim, z());
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (sgn(data.iota[i][j]) != 0) a[i] += data.iota[i][j] * var(base, j, 1);
        return a;
    }

    // <B', X> for X a V'-valued field
    GradedPolynomial pair_b(const Field& x) const {
        const std::size_t m = a_count(base);
        GradedPolynomial s = z();
        for (std::size_t a = 0; a < m; ++a)
            if (!x[a].is_zero()) s += var(base, m + a, 1) * x[a];
        return s;
    }
};

void check_data(const DgLaData& v, const InductionData& data) {
    auto rep = validate_induction(v, data);
    if (!rep.ok) throw std::invalid_argument("invalid induction data: " + rep.failures.front());
}

TransferResult finish(const ContextPtr& base, const std::vector<BasisElement>& target, const GradedPolynomial& classical,
                      const GradedPolynomial& quantum, int max_leaves) {
    GradedPolynomial s(base, 2);
    for (const auto& [m, c] : classical.terms()) s.add_term(m, c.coeff(0), 0);
    for (const auto& [m, c] : quantum.terms()) s.add_term(m, c.coeff(0), 1);
    TransferResult r{s, ULInfinityStructure::from_action(target, s, max_leaves)};
    return r;
}

// rooted binary tree shapes, canonical as strings "L" and "(xy)" with x <= y
struct Shape {
    std::string code;
    int leaves = 1;
    Rational aut = 1;
    int left = -1, right = -1;  // indices into the shape table
};

std::vector<Shape> tree_shapes(int max_leaves) {
    std::vector<Shape> shapes{{"L", 1, 1, -1, -1}};
    for (int n = 2; n <= max_leaves; ++n)
        for (std::size_t i = 0; i < shapes.size(); ++i)
            for (std::size_t j = i; j < shapes.size(); ++j) {
                if (shapes[i].leaves + shapes[j].leaves != n) continue;
                Shape s;
                s.code = "(" + shapes[i].code + shapes[j].code + ")";
                s.leaves = n;
                s.aut = shapes[i].aut * shapes[j].aut * (i == j ? 2 : 1);
                s.left = static_cast<int>(i);
                s.right = static_cast<int>(j);
                shapes.push_back(s);
            }
    return shapes;
}

}  // namespace

TransferResult transfer(const DgLaData& v, const InductionData& data, int max_leaves) {
    if (max_leaves < 1 || max_leaves > 6) throw std::invalid_argument("transfer supports 1 <= max_leaves <= 6");
    check_data(v, data);
    TransferContext tc{&v, superfield_context(data.target), max_leaves, v.dim()};
    const auto shapes = tree_shapes(max_leaves);
    const RMatrix minus_k = mat_scale(data.k, -1);
    // value of each shape read as a subtree: leaf -> iota A', node -> -K [left, right]
    std::vector<Field> value;
    for (const auto& s : shapes) {
        if (s.left < 0)
            value.push_back(tc.leaves(data));
        else
            value.push_back(tc.apply(minus_k, tc.bracket(value[s.left], value[s.right])));
    }
    // trees: the two edge-free diagrams <B', d'A'> and <B', p[iA', iA']>/2, then the rest
    const RMatrix dprime = induced_differential(v, data);
    Field a_prime(data.target.size(), tc.z());
    for (std::size_t i = 0; i < data.target.size(); ++i) a_prime[i] = var(tc.base, i, 1);
    GradedPolynomial classical = tc.pair_b(tc.apply(dprime, a_prime));
    for (const auto& s : shapes) {
        if (s.left < 0) continue;
        Field root = tc.apply(data.p, tc.bracket(value[s.left], value[s.right]));
        classical += tc.pair_b(root) * (1 / s.aut);
    }
    // one loop: cyclic words of subtrees hung on the cycle, weight 1/(k prod |Aut|)
    GradedPolynomial quantum = tc.z();
    std::vector<PMatrix> beads;
    for (std::size_t i = 0; i < shapes.size(); ++i) beads.push_back(tc.bead(value[i], data.k));
    std::function<void(const PMatrix&, int, int, const Rational&)> word = [&](const PMatrix& acc, int k, int leaves,
                                                                             const Rational& w) {
        if (k > 0) quantum += tc.str(acc) * (w / k);
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            if (leaves + shapes[i].leaves > max_leaves) continue;
            PMatrix next = k == 0 ? beads[i] : tc.mul(acc, beads[i]);
            word(next, k + 1, leaves + shapes[i].leaves, w / shapes[i].aut);
        }
    };
    word({}, 0, 0, 1);
    return finish(tc.base, data.target, tc.trunc(classical), tc.trunc(quantum), max_leaves);
}

TransferResult transfer_recursive(const ULInfinityStructure& u, const RMatrix& d, const InductionData& data,
                                  int max_leaves) {
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
    DgLaData shell;
    shell.basis = u.basis;
    shell.d = d;
    check_data(shell, data);
    const std::size_t n = u.basis.size();
    TransferContext tc{&shell, superfield_context(data.target), max_leaves, n};
    // higher part of Lambda, its right derivatives
    std::vector<GradedPolynomial> higher;
    for (std::size_t a = 0; a < n; ++a)
        higher.push_back(keep(u.lambda[a], [&](const Monomial& m) { return superfield_degrees(m, n).a >= 2; }));
    auto eval = [&](const GradedPolynomial& p, const Field& alpha) {
        std::vector<std::optional<GradedPolynomial>> repl(2 * n);
        for (std::size_t b = 0; b < n; ++b) {
            repl[b] = alpha[b];
            repl[n + b] = tc.z();
        }
        return tc.trunc(graded::substitute(truncate_leaves(p, max_leaves), repl, tc.base));
    };
    const Field leaves = tc.leaves(data);
    Field alpha = leaves;
    for (int it = 1; it < max_leaves; ++it) {
        Field lam(n, tc.z());
        for (std::size_t a = 0; a < n; ++a) lam[a] = eval(higher[a], alpha);
        Field corr = tc.apply(data.k, lam);
        for (std::size_t a = 0; a < n; ++a) alpha[a] = leaves[a] - corr[a];
    }
    Field lam(n, tc.z());
    for (std::size_t a = 0; a < n; ++a) lam[a] = eval(u.lambda[a], alpha);
    GradedPolynomial classical = tc.pair_b(tc.apply(data.p, lam));
    // T = -K D Lambda_{>=2}(alpha), right derivatives give right-matrix entries
    PMatrix dl(n, std::vector<GradedPolynomial>(n, tc.z()));
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t c = 0; c < n; ++c) dl[e][c] = eval(derive(higher[e], c, Side::right), alpha);
    PMatrix t(n, std::vector<GradedPolynomial>(n, tc.z()));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t e = 0; e < n; ++e)
            if (sgn(data.k[a][e]) != 0)
                for (std::size_t c = 0; c < n; ++c)
                    if (!dl[e][c].is_zero()) t[a][c] -= data.k[a][e] * dl[e][c];
    GradedPolynomial quantum = eval(u.rho, alpha);
    PMatrix power = t;
    for (int k = 1; k <= max_leaves; ++k) {
        quantum += tc.str(power) * Rational(1, k);
        if (k < max_leaves) power = tc.mul(power, t);
    }
    return finish(tc.base, data.target, tc.trunc(classical), tc.trunc(quantum), max_leaves);
}

// ---------------------------------------------------------------- pushforward oracle

namespace {

// polynomial graded by (vertex count, power of h)
using Graded = std::map<std::pair<int, int>, GradedPolynomial>;

}  // namespace

GradedPolynomial pushforward_oracle(const std::vector<BasisElement>& basis, const GradedPolynomial& s,
                                    const DgLaData& v, const InductionData& data, int max_leaves) {
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
    check_data(v, data);
    const std::size_t n = v.dim(), m = data.target.size();
    if (basis.size() != n) throw std::invalid_argument("basis does not match the complex");
    // fiber: y along a basis k_i of im K, z along functionals dual to d k_i vanishing off im d
    const RMatrix kd = mat_mul(data.k, v.d);
    const std::vector<int> cols = column_indices(kd);
    const std::size_t r = cols.size();
    RMatrix kvec(n, std::vector<Rational>(r, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t a = 0; a < n; ++a) kvec[a][i] = kd[a][cols[i]];
    const RMatrix dk = mat_mul(v.d, kvec);
    const RMatrix dt = transpose(dk);
    const RMatrix left_inv = r ? mat_mul(inverse(mat_mul(dt, dk)), dt) : RMatrix{};
    const RMatrix delta = r ? mat_mul(left_inv, mat_mul(v.d, data.k)) : RMatrix{};

    auto base = superfield_context(data.target);
    std::vector<GradedVariable> vars = base->vars();
    for (std::size_t i = 0; i < r; ++i) vars.push_back({"y_" + std::to_string(i), 1 - v.degree(cols[i])});
    for (std::size_t i = 0; i < r; ++i) vars.push_back({"z_" + std::to_string(i), v.degree(cols[i]) - 1});
    auto ext = graded::make_context(vars);
    const std::size_t y0 = 2 * m, z0 = 2 * m + r;

    std::vector<std::optional<GradedPolynomial>> repl(2 * n);
    for (std::size_t a = 0; a < n; ++a) {
        GradedPolynomial ra(ext, 2), rb(ext, 2);
        for (std::size_t j = 0; j < m; ++j) {
            if (sgn(data.iota[a][j]) != 0) ra += data.iota[a][j] * var(ext, j, 2);
            if (sgn(data.p[j][a]) != 0) rb += data.p[j][a] * var(ext, m + j, 2);
        }
        for (std::size_t i = 0; i < r; ++i) {
            if (sgn(kvec[a][i]) != 0) ra += kvec[a][i] * var(ext, y0 + i, 2);
            if (sgn(delta[i][a]) != 0) rb += delta[i][a] * var(ext, z0 + i, 2);
        }
        repl[a] = ra;
        repl[n + a] = rb;
    }
    const GradedPolynomial full = graded::substitute(s, repl, ext);

    auto fiber_count = [&](const Monomial& mo, std::size_t from, std::size_t to) {
        int c = 0;
        for (std::size_t i = from; i < to; ++i) c += mo[i];
        return c;
    };
    auto is_gaussian = [&](const Monomial& mo) {
        return fiber_count(mo, 0, 2 * m) == 0 && fiber_count(mo, y0, z0) == 1 && fiber_count(mo, z0, z0 + r) == 1;
    };
    GradedPolynomial gauss(ext, 1), expected(ext, 1);
    const GradedPolynomial full0 = full.h_component(0);
    for (const auto& [mo, c] : full0.terms())
        if (is_gaussian(mo)) gauss.add_term(mo, c.coeff(0));
    for (std::size_t i = 0; i < r; ++i) expected += var(ext, z0 + i, 1) * var(ext, y0 + i, 1);
    if (!(gauss == expected)) throw std::domain_error("fiber quadratic form is degenerate or not in normal form");
    const GradedPolynomial v0 = full0 - gauss;  // vertices weighted 1/h
    const GradedPolynomial v1 = full.h_component(1);          // vertices weighted h^0

    int max_y = 0, max_z = 0;
    for (const auto* part : {&v0, &v1})
        for (const auto& [mo, c] : part->terms()) {
            max_y = std::max(max_y, fiber_count(mo, y0, z0));
            max_z = std::max(max_z, fiber_count(mo, z0, z0 + r));
        }
    // A' degree <= max_leaves and B' degree <= 1 are preserved under products and contraction
    auto prune = [&](const GradedPolynomial& p, int remaining) {
        return keep(p, [&](const Monomial& mo) {
            const int ya = fiber_count(mo, y0, z0), za = fiber_count(mo, z0, z0 + r);
            return fiber_count(mo, 0, m) <= max_leaves && fiber_count(mo, m, 2 * m) <= 1 &&
                   ya - za <= remaining * max_z && za - ya <= remaining * max_y;
        });
    };
    auto contract = [&](GradedPolynomial g, int vertices, int m_count, Graded& z) {
        Rational fact = 1;
        for (int e = 0; !g.is_zero(); ++e) {
            if (e > 0) fact *= e;
            GradedPolynomial free = keep(g, [&](const Monomial& mo) { return fiber_count(mo, y0, z0 + r) == 0; });
            if (!free.is_zero()) {
                auto key = std::make_pair(vertices, e - m_count);
                auto it = z.find(key);
                GradedPolynomial add = free * (1 / fact);
                if (it == z.end())
                    z.emplace(key, add);
                else
                    it->second += add;
            }
            GradedPolynomial next(ext, 1);
            for (std::size_t i = 0; i < r; ++i)
                next -= derive(derive(g, y0 + i, Side::left), z0 + i, Side::left);
            g = next;
        }
    };
    // X^V / V! grouped by the number of 1/h vertices
    Graded zsum;
    std::map<int, GradedPolynomial> w{{0, GradedPolynomial::constant(ext, 1, 1)}};
    for (int vcount = 1; vcount <= max_leaves; ++vcount) {
        std::map<int, GradedPolynomial> next;
        for (const auto& [mc, poly] : w) {
            auto put = [&](int key, const GradedPolynomial& p) {
                auto it = next.find(key);
                if (it == next.end())
                    next.emplace(key, p);
                else
                    it->second += p;
            };
            if (!v0.is_zero()) put(mc + 1, prune(poly * v0, max_leaves - vcount) * Rational(1, vcount));
            if (!v1.is_zero()) put(mc, prune(poly * v1, max_leaves - vcount) * Rational(1, vcount));
        }
        w = next;
        for (const auto& [mc, poly] : w) contract(poly, vcount, mc, zsum);
    }
    // log(1 + X) in the vertex grading
    auto base_trunc = [&](const GradedPolynomial& p) {
        return keep(p, [&](const Monomial& mo) {
            return fiber_count(mo, 0, m) <= max_leaves && fiber_count(mo, m, 2 * m) <= 1;
        });
    };
    Graded logz, power = zsum;
    for (int k = 1; k <= max_leaves && !power.empty(); ++k) {
        const Rational coef(sign_pow(k + 1), k);
        for (const auto& [key, p] : power) {
            auto it = logz.find(key);
            if (it == logz.end())
                logz.emplace(key, p * coef);
            else
                it->second += p * coef;
        }
        Graded next;
        for (const auto& [ka, pa] : power)
            for (const auto& [kb, pb] : zsum) {
                if (ka.first + kb.first > max_leaves) continue;
                auto key = std::make_pair(ka.first + kb.first, ka.second + kb.second);
                GradedPolynomial prod = base_trunc(pa * pb);
                auto it = next.find(key);
                if (it == next.end())
                    next.emplace(key, prod);
                else
                    it->second += prod;
            }
        power = next;
    }
    // S' = h log Z
    std::map<int, GradedPolynomial> by_power;
    for (const auto& [key, p] : logz) {
        auto it = by_power.find(key.second + 1);
        if (it == by_power.end())
            by_power.emplace(key.second + 1, p);
        else
            it->second += p;
    }
    GradedPolynomial out(base, 2);
    for (const auto& [hp, p] : by_power) {
        if (p.is_zero()) continue;
        if (hp < 0 || hp > 1) throw std::logic_error("fiber integral produced an h^" + std::to_string(hp) + " term");
        for (const auto& [mo, c] : p.terms()) {
            if (fiber_count(mo, 0, m) > max_leaves) continue;
            out.add_term(Monomial(mo.begin(), mo.begin() + 2 * m), c.coeff(0), hp);
        }
    }
    return out;
}

// ---------------------------------------------------------------- fixtures

DgLaData so3() {
    DgLaData v;
    v.basis = {{"x", 0}, {"y", 0}, {"z", 0}};
    v.d = zero_matrix(3, 3);
    v.set_bracket(2, 0, 1, 1);
    v.set_bracket(0, 1, 2, 1);
    v.set_bracket(1, 2, 0, 1);
    return v;
}

DgLaData affine2() {
    DgLaData v;
    v.basis = {{"e", 0}, {"h", 0}};
    v.d = zero_matrix(2, 2);
    v.set_bracket(0, 0, 1, 1);
    return v;
}

namespace {

DgLaData heisenberg() {
    DgLaData v;
    v.basis = {{"x", 0}, {"y", 0}, {"z", 0}};
    v.d = zero_matrix(3, 3);
    v.set_bracket(2, 0, 1, 1);
    return v;
}

// change of basis e'_i = sum_j g[j][i] e_j, degree preserving
DgLaData rebase(const DgLaData& v, const RMatrix& g) {
    const std::size_t n = v.dim();
    const RMatrix gi = inverse(g);
    DgLaData w;
    w.basis = v.basis;
    w.d = mat_mul(mat_mul(gi, v.d), g);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = b; c < n; ++c) {
                Rational s = 0;
                for (const auto& [k, val] : v.f) {
                    auto [a0, b0, c0] = k;
                    s += gi[a][a0] * val * g[b0][b] * g[c0][c];
                }
                if (sgn(s) != 0) w.set_bracket(static_cast<int>(a), static_cast<int>(b), static_cast<int>(c), s);
            }
    return w;
}

Cdga unit_and(std::vector<BasisElement> rest) {
    Cdga a;
    a.basis.push_back({"1", 0});
    for (auto& e : rest) a.basis.push_back(e);
    a.d = zero_matrix(a.basis.size(), a.basis.size());
    for (std::size_t i = 0; i < a.basis.size(); ++i) {
        a.prod[{static_cast<int>(i), 0, static_cast<int>(i)}] = 1;
        a.prod[{static_cast<int>(i), static_cast<int>(i), 0}] = 1;
    }
    return a;
}

void set_prod(Cdga& a, int c, int x, int y, const Rational& v) {
    a.prod[{c, x, y}] = v;
    a.prod[{c, y, x}] = sign_pow(a.basis[x].degree * a.basis[y].degree) * v;
}

// 1, a, b, u in degree 1, c, w in degree 2: ab = c, au = w, bu = c, du = w.
// Cohomology 1, a, b, c with the representative of c shifted to c + lambda w.
std::pair<Cdga, InductionData> massey(const Rational& lambda) {
    Cdga a = unit_and({{"a", 1}, {"b", 1}, {"u", 1}, {"c", 2}, {"w", 2}});
    set_prod(a, 4, 1, 2, 1);
    set_prod(a, 5, 1, 3, 1);
    set_prod(a, 4, 2, 3, 1);
    a.d[5][3] = 1;
    InductionData d;
    d.target = {{"1", 0}, {"a", 1}, {"b", 1}, {"c", 2}};
    d.iota = zero_matrix(6, 4);
    d.p = zero_matrix(4, 6);
    d.k = zero_matrix(6, 6);
    for (int i = 0; i < 4; ++i) {
        d.iota[i == 3 ? 4 : i][i] = 1;
        d.p[i][i == 3 ? 4 : i] = 1;
    }
    d.iota[5][3] = lambda;
    d.k[3][4] = -lambda;
    d.k[3][5] = 1;
    return {a, d};
}

// 1, u in degree 0, e, v in degree 1: eu = v, du = v. Cohomology 1, e with e -> e + lambda v.
std::pair<Cdga, InductionData> circle_like(const Rational& lambda) {
    Cdga a = unit_and({{"e", 1}, {"u", 0}, {"v", 1}});
    set_prod(a, 3, 1, 2, 1);
    a.d[3][2] = 1;
    InductionData d;
    d.target = {{"1", 0}, {"e", 1}};
    d.iota = zero_matrix(4, 2);
    d.p = zero_matrix(2, 4);
    d.k = zero_matrix(4, 4);
    d.iota[0][0] = 1;
    d.iota[1][1] = 1;
    d.iota[3][1] = lambda;
    d.p[0][0] = 1;
    d.p[1][1] = 1;
    d.k[2][1] = -lambda;
    d.k[2][3] = 1;
    return {a, d};
}

}  // namespace

DgLaData random_unimodular6(unsigned seed) {
    // so(3) (x) {1, e} with e^2 = 0, in a random degree-preserving basis
    Cdga a = unit_and({{"e", 1}});
    DgLaData base = tensor(so3(), a);
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dist(-3, 3);
    RMatrix g;
    do {
        g = zero_matrix(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (base.degree(i) == base.degree(j)) g[i][j] = dist(rng);
    } while (sgn(determinant(g)) == 0);
    DgLaData w = rebase(base, g);
    for (std::size_t i = 0; i < 6; ++i) w.basis[i].name = "r" + std::to_string(i);
    return w;
}

DgLaData tensor(const DgLaData& lie, const Cdga& a) {
    for (const auto& e : lie.basis)
        if (e.degree != 0) throw std::invalid_argument("tensor: Lie factor must sit in degree 0");
    const std::size_t g = lie.dim(), n = a.basis.size() * g;
    DgLaData v;
    for (const auto& ea : a.basis)
        for (const auto& eg : lie.basis) v.basis.push_back({eg.name + "_" + ea.name, ea.degree});
    v.d = zero_matrix(n, n);
    for (std::size_t i = 0; i < a.basis.size(); ++i)
        for (std::size_t j = 0; j < a.basis.size(); ++j)
            if (sgn(a.d[i][j]) != 0)
                for (std::size_t x = 0; x < g; ++x) v.d[i * g + x][j * g + x] = a.d[i][j];
    for (const auto& [kp, pv] : a.prod) {
        auto [c, al, be] = kp;
        for (const auto& [kf, fv] : lie.f) {
            auto [z, x, y] = kf;
            v.f[{static_cast<int>(c * g + z), static_cast<int>(al * g + x), static_cast<int>(be * g + y)}] += pv * fv;
        }
    }
    for (auto it = v.f.begin(); it != v.f.end();) it = sgn(it->second) == 0 ? v.f.erase(it) : std::next(it);
    return v;
}

InductionData tensor_induction(const DgLaData& lie, const Cdga& a, const InductionData& on_a) {
    const std::size_t g = lie.dim(), na = a.basis.size(), ma = on_a.target.size();
    InductionData d;
    for (const auto& ea : on_a.target)
        for (const auto& eg : lie.basis) d.target.push_back({eg.name + "_" + ea.name, ea.degree});
    d.iota = zero_matrix(na * g, ma * g);
    d.p = zero_matrix(ma * g, na * g);
    d.k = zero_matrix(na * g, na * g);
    for (std::size_t x = 0; x < g; ++x) {
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < ma; ++j) {
                d.iota[i * g + x][j * g + x] = on_a.iota[i][j];
                d.p[j * g + x][i * g + x] = on_a.p[j][i];
            }
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < na; ++j) d.k[i * g + x][j * g + x] = on_a.k[i][j];
    }
    return d;
}

std::vector<Fixture> toy_fixtures() {
    std::vector<Fixture> out;
    {
        auto [a, d] = massey(1);
        out.push_back({"massey_so3", tensor(so3(), a), tensor_induction(so3(), a, d)});
    }
    {
        auto [a, d] = massey(2);
        out.push_back({"massey_heisenberg", tensor(heisenberg(), a), tensor_induction(heisenberg(), a, d)});
    }
    {
        auto [a, d] = circle_like(Rational(1, 2));
        out.push_back({"circle_so3", tensor(so3(), a), tensor_induction(so3(), a, d)});
    }
    return out;
}

Fixture subalgebra_fixture() {
    auto [a, d] = circle_like(1);
    return {"circle_so3_subalgebra", tensor(so3(), a), tensor_induction(so3(), a, d)};
}

}  // namespace bvlab::homotopy
