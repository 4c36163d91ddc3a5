#include "bvlab/cellular.hpp"

#include "json.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bvlab::cellular {

using graded::ContextPtr;
using graded::GradedPolynomial;
using graded::GradedVariable;
using graded::Monomial;
using graded::Side;
using homotopy::BasisElement;
using homotopy::DgLaData;
using homotopy::Report;

// ---------------------------------------------------------------- faces

std::vector<Face> faces(int n) {
    if (n < 0) throw std::invalid_argument("simplex dimension must be >= 0");
    std::vector<Face> out;
    for (int k = 0; k <= n; ++k)
        for (unsigned mask = 0; mask < (1u << (n + 1)); ++mask) {
            if (__builtin_popcount(mask) != k + 1) continue;
            Face f;
            for (int i = 0; i <= n; ++i)
                if (mask & (1u << i)) f.push_back(i);
            out.push_back(f);
        }
    std::stable_sort(out.begin(), out.end(), [](const Face& a, const Face& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

std::string face_name(const Face& f) {
    std::string s;
    for (int i : f) s += std::to_string(i);
    return s;
}

namespace {

void check_face(const Face& f, int n) {
    if (f.empty()) throw std::invalid_argument("empty face");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0 || f[i] > n) throw std::invalid_argument("face vertex out of range");
        if (i > 0 && f[i] <= f[i - 1]) throw std::invalid_argument("face vertices must increase");
    }
}

}  // namespace

// ---------------------------------------------------------------- forms

ContextPtr form_context(int n) {
    static std::map<int, ContextPtr> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<GradedVariable> vars;
    for (int i = 1; i <= n; ++i) vars.push_back({"t" + std::to_string(i), 0});
    for (int i = 1; i <= n; ++i) vars.push_back({"dt" + std::to_string(i), 1});
    auto ctx = graded::make_context(vars);
    cache.emplace(n, ctx);
    return ctx;
}

PolyForm::PolyForm(int n) : n_(n), p_(form_context(n), 1) {}

PolyForm::PolyForm(int n, GradedPolynomial p) : n_(n), p_(std::move(p)) {
    if (!p_.context()->same_as(*form_context(n))) throw std::invalid_argument("polynomial is not over the form context");
}

PolyForm PolyForm::constant(int n, const Rational& c) {
    return PolyForm(n, GradedPolynomial::constant(form_context(n), c, 1));
}

PolyForm PolyForm::t(int n, int i) {
    if (i < 0 || i > n) throw std::invalid_argument("barycentric index out of range");
    auto ctx = form_context(n);
    if (i > 0) return PolyForm(n, GradedPolynomial::variable(ctx, i - 1, 1));
    GradedPolynomial p = GradedPolynomial::constant(ctx, 1, 1);
    for (int j = 0; j < n; ++j) p -= GradedPolynomial::variable(ctx, j, 1);
    return PolyForm(n, p);
}

PolyForm PolyForm::dt(int n, int i) {
    if (i < 0 || i > n) throw std::invalid_argument("barycentric index out of range");
    auto ctx = form_context(n);
    if (i > 0) return PolyForm(n, GradedPolynomial::variable(ctx, n + i - 1, 1));
    GradedPolynomial p(ctx, 1);
    for (int j = 0; j < n; ++j) p -= GradedPolynomial::variable(ctx, n + j, 1);
    return PolyForm(n, p);
}

PolyForm PolyForm::monomial(int n, const std::vector<int>& a, unsigned mask) {
    Monomial m(2 * n, 0);
    for (int i = 0; i < n; ++i) {
        m[i] = static_cast<std::uint8_t>(a.at(i));
        m[n + i] = (mask >> i) & 1u;
    }
    PolyForm f(n);
    f.p_.add_term(m, Rational(1));
    return f;
}

int PolyForm::max_poly_degree() const {
    int d = 0;
    for (const auto& [m, c] : p_.terms()) {
        int s = 0;
        for (int i = 0; i < n_; ++i) s += m[i];
        d = std::max(d, s);
    }
    return d;
}

PolyForm PolyForm::operator+(const PolyForm& o) const { return PolyForm(n_, p_ + o.p_); }
PolyForm PolyForm::operator-(const PolyForm& o) const { return PolyForm(n_, p_ - o.p_); }
PolyForm PolyForm::operator*(const Rational& s) const { return PolyForm(n_, p_ * s); }

PolyForm wedge(const PolyForm& a, const PolyForm& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("forms on different simplices");
    return PolyForm(a.dim(), a.poly() * b.poly());
}

PolyForm exterior_d(const PolyForm& a) {
    const int n = a.dim();
    auto ctx = form_context(n);
    GradedPolynomial out(ctx, 1);
    for (int i = 0; i < n; ++i)
        out += GradedPolynomial::variable(ctx, n + i, 1) * graded::derive(a.poly(), i, Side::left);
    return PolyForm(n, out);
}

PolyForm whitney_chi(const Face& face, int n) {
    check_face(face, n);
    PolyForm out(n);
    for (std::size_t j = 0; j < face.size(); ++j) {
        PolyForm term = PolyForm::t(n, face[j]);
        for (std::size_t l = 0; l < face.size(); ++l)
            if (l != j) term = wedge(term, PolyForm::dt(n, face[l]));
        out = out + term * Rational(sign_pow(static_cast<int>(j)));
    }
    return out;
}

PolyForm whitney(const Face& face, int n) {
    return whitney_chi(face, n) * factorial(static_cast<int>(face.size()) - 1);
}

Rational poincare(const PolyForm& form, const Face& face) {
    const int n = form.dim();
    check_face(face, n);
    const int k = static_cast<int>(face.size()) - 1;
    auto target = form_context(k);
    std::vector<std::optional<GradedPolynomial>> repl(2 * n);
    for (int i = 1; i <= n; ++i) {
        auto pos = std::find(face.begin(), face.end(), i);
        if (pos == face.end()) {
            repl[i - 1] = GradedPolynomial(target, 1);
            repl[n + i - 1] = GradedPolynomial(target, 1);
        } else {
            const int j = static_cast<int>(pos - face.begin());
            repl[i - 1] = PolyForm::t(k, j).poly();
            repl[n + i - 1] = PolyForm::dt(k, j).poly();
        }
    }
    const GradedPolynomial pulled = graded::substitute(form.poly(), repl, target);
    Rational total = 0;
    for (const auto& [m, c] : pulled.terms()) {
        bool top = true;
        int deg = 0;
        Rational num = 1;
        for (int i = 0; i < k; ++i) {
            top = top && m[k + i] == 1;
            deg += m[i];
            num *= factorial(m[i]);
        }
        if (!top) continue;
        total += c.coeff(0) * num / factorial(deg + k);
    }
    return total;
}

namespace {

// du, u, t_1..t_n, dt_1..dt_n
ContextPtr cylinder_context(int n) {
    static std::map<int, ContextPtr> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<GradedVariable> vars{{"du", 1}, {"u", 0}};
    for (const auto& v : form_context(n)->vars()) vars.push_back(v);
    auto ctx = graded::make_context(vars);
    cache.emplace(n, ctx);
    return ctx;
}

GradedPolynomial cylinder_d(const GradedPolynomial& p, int n) {
    auto ctx = p.context();
    GradedPolynomial out(ctx, 1);
    out += GradedPolynomial::variable(ctx, 0, 1) * graded::derive(p, 1, Side::left);
    for (int i = 0; i < n; ++i)
        out += GradedPolynomial::variable(ctx, 2 + n + i, 1) * graded::derive(p, 2 + i, Side::left);
    return out;
}

}  // namespace

PolyForm dupont_phi(const PolyForm& form, int j) {
    const int n = form.dim();
    if (j < 0 || j > n) throw std::invalid_argument("vertex out of range");
    auto cyl = cylinder_context(n);
    const GradedPolynomial u = GradedPolynomial::variable(cyl, 1, 1);
    const GradedPolynomial one = GradedPolynomial::constant(cyl, 1, 1);
    std::vector<std::optional<GradedPolynomial>> repl(2 * n);
    for (int i = 1; i <= n; ++i) {
        const GradedPolynomial ti = GradedPolynomial::variable(cyl, 1 + i, 1);
        GradedPolynomial image = i == j ? one - u + u * ti : u * ti;
        repl[n + i - 1] = cylinder_d(image, n);
        repl[i - 1] = image;
    }
    const GradedPolynomial pulled = graded::substitute(form.poly(), repl, cyl);
    PolyForm out(n);
    GradedPolynomial acc(form_context(n), 1);
    for (const auto& [m, c] : pulled.terms()) {
        if (m[0] != 1) continue;
        Monomial rest(m.begin() + 2, m.end());
        acc.add_term(rest, c.coeff(0) / (m[1] + 1));
    }
    return PolyForm(n, acc);
}

namespace {

GradedPolynomial dupont_monomial(int n, const Monomial& m) {
    thread_local std::map<std::pair<int, Monomial>, GradedPolynomial> cache;
    auto key = std::make_pair(n, m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    PolyForm alpha(n);
    GradedPolynomial p(form_context(n), 1);
    p.add_term(m, Rational(1));
    alpha = PolyForm(n, p);
    PolyForm out(n);
    for (const auto& f : faces(n)) {
        if (static_cast<int>(f.size()) > n) continue;  // k <= n - 1
        PolyForm x = alpha;
        // phi_{i_k} acts first
        for (auto v = f.rbegin(); v != f.rend(); ++v) {
            x = dupont_phi(x, *v);
            if (x.is_zero()) break;
        }
        if (!x.is_zero()) out = out + wedge(whitney_chi(f, n), x);
    }
    cache.emplace(key, out.poly());
    return out.poly();
}

}  // namespace

PolyForm dupont(const PolyForm& form) {
    const int n = form.dim();
    GradedPolynomial out(form_context(n), 1);
    for (const auto& [m, c] : form.poly().terms()) out += dupont_monomial(n, m) * c.coeff(0);
    return PolyForm(n, out);
}

PolyForm whitney_projection(const PolyForm& form) {
    const int n = form.dim();
    PolyForm out(n);
    for (const auto& f : faces(n)) {
        const Rational c = poincare(form, f);
        if (sgn(c) != 0) out = out + whitney(f, n) * c;
    }
    return out;
}

std::vector<PolyForm> monomial_forms(int n, int max_degree) {
    std::vector<PolyForm> out;
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n) {
            for (unsigned mask = 0; mask < (1u << n); ++mask) out.push_back(PolyForm::monomial(n, a, mask));
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a[i] = e;
            rec(i + 1, left - e);
        }
        a[i] = 0;
    };
    rec(0, max_degree);
    return out;
}

Report check_dupont(int n, int max_degree) {
    Report r;
    const auto fs = faces(n);
    for (const auto& f : fs) {
        const PolyForm w = whitney(f, n);
        if (!dupont(w).is_zero()) r.fail("K iota != 0 on face " + face_name(f));
        for (const auto& g : fs)
            if (poincare(w, g) != (f == g ? 1 : 0)) r.fail("p iota != id at (" + face_name(g) + ", " + face_name(f) + ")");
        if (!(exterior_d(w) == [&] {
                PolyForm s(n);
                for (const auto& g : fs) {
                    if (g.size() != f.size() + 1) continue;
                    // coboundary: (d e_f)(g) = sum over faces of g with incidence sign
                    for (std::size_t drop = 0; drop < g.size(); ++drop) {
                        Face h = g;
                        h.erase(h.begin() + drop);
                        if (h == f) s = s + whitney(g, n) * Rational(sign_pow(static_cast<int>(drop)));
                    }
                }
                return s;
            }()))
            r.fail("iota is not a chain map on face " + face_name(f));
    }
    for (const auto& w : monomial_forms(n, max_degree)) {
        const PolyForm k = dupont(w);
        const PolyForm lhs = exterior_d(k) + dupont(exterior_d(w));
        const PolyForm rhs = w - whitney_projection(w);
        if (!(lhs == rhs)) r.fail("dK + Kd != id - iota p on " + w.to_string());
        if (!dupont(k).is_zero()) r.fail("K^2 != 0 on " + w.to_string());
        for (const auto& f : fs)
            if (sgn(poincare(k, f)) != 0) r.fail("p K != 0 on " + w.to_string() + " at face " + face_name(f));
    }
    return r;
}

// ---------------------------------------------------------------- trees on the simplex

std::vector<BasisElement> simplex_basis(const DgLaData& lie, int n) {
    for (const auto& e : lie.basis)
        if (e.degree != 0) throw std::invalid_argument("coefficient Lie algebra must sit in degree 0");
    if (!is_zero(lie.d)) throw std::invalid_argument("coefficient Lie algebra must have zero differential");
    std::vector<BasisElement> out;
    for (const auto& f : faces(n))
        for (const auto& x : lie.basis) out.push_back({x.name + "_" + face_name(f), static_cast<int>(f.size()) - 1});
    return out;
}

namespace {

// forms (x) functions of the superfields: variables t, dt, then the superfield context
struct FieldForms {
    int n = 0;
    std::size_t form_vars = 0;
    ContextPtr base, big;
    std::size_t a_vars = 0;
    int max_leaves = 0;

    FieldForms(const DgLaData& lie, int n_, int leaves) : n(n_), max_leaves(leaves) {
        form_vars = 2 * n;
        base = homotopy::superfield_context(simplex_basis(lie, n));
        a_vars = base->size() / 2;
        std::vector<GradedVariable> vars = form_context(n)->vars();
        for (const auto& v : base->vars()) vars.push_back(v);
        big = graded::make_context(vars);
    }

    GradedPolynomial zero() const { return GradedPolynomial(big, 1); }

    int leaves(const Monomial& m) const {
        int s = 0;
        for (std::size_t i = 0; i < a_vars; ++i) s += m[form_vars + i];
        return s;
    }

    GradedPolynomial trunc(const GradedPolynomial& p) const {
        GradedPolynomial out(big, 1);
        for (const auto& [m, c] : p.terms())
            if (leaves(m) <= max_leaves) out.add_term(m, c);
        return out;
    }

    GradedPolynomial lift_form(const PolyForm& f) const {
        GradedPolynomial out(big, 1);
        for (const auto& [m, c] : f.poly().terms()) {
            Monomial x(big->size(), 0);
            std::copy(m.begin(), m.end(), x.begin());
            out.add_term(x, c);
        }
        return out;
    }

    // apply a linear map on the form factor of every term
    template <class Map>
    GradedPolynomial on_forms(const GradedPolynomial& p, Map&& map) const {
        GradedPolynomial out(big, 1);
        std::map<Monomial, GradedPolynomial> cache;
        for (const auto& [m, c] : p.terms()) {
            Monomial fm(m.begin(), m.begin() + form_vars);
            auto it = cache.find(fm);
            if (it == cache.end()) {
                GradedPolynomial f(form_context(n), 1);
                f.add_term(fm, Rational(1));
                it = cache.emplace(fm, map(PolyForm(n, f)).poly()).first;
            }
            for (const auto& [m2, c2] : it->second.terms()) {
                Monomial x = m;
                std::copy(m2.begin(), m2.end(), x.begin());
                out.add_term(x, c.coeff(0) * c2.coeff(0));
            }
        }
        return out;
    }

    // Poincare integral over a face, result in the base context
    GradedPolynomial integrate(const GradedPolynomial& p, const Face& f) const {
        GradedPolynomial out(base, 1);
        std::map<Monomial, Rational> cache;
        for (const auto& [m, c] : p.terms()) {
            Monomial fm(m.begin(), m.begin() + form_vars);
            auto it = cache.find(fm);
            if (it == cache.end()) {
                GradedPolynomial g(form_context(n), 1);
                g.add_term(fm, Rational(1));
                it = cache.emplace(fm, poincare(PolyForm(n, g), f)).first;
            }
            if (sgn(it->second) == 0) continue;
            out.add_term(Monomial(m.begin() + form_vars, m.end()), c.coeff(0) * it->second);
        }
        return out;
    }
};

// components alpha_x, x over the Lie basis
using LieField = std::vector<GradedPolynomial>;

LieField lie_bracket(const DgLaData& lie, const FieldForms& ff, const LieField& a, const LieField& b) {
    // split by leaf count so that products above max_leaves are never formed
    auto split = [&](const LieField& f) {
        std::vector<std::vector<GradedPolynomial>> out(f.size(), std::vector<GradedPolynomial>(ff.max_leaves + 1, ff.zero()));
        for (std::size_t y = 0; y < f.size(); ++y)
            for (const auto& [m, c] : f[y].terms()) {
                const int l = ff.leaves(m);
                if (l <= ff.max_leaves) out[y][l].add_term(m, c);
            }
        return out;
    };
    const auto sa = split(a);
    const auto sb = &a == &b ? sa : split(b);
    LieField out(lie.dim(), ff.zero());
    for (const auto& [k, v] : lie.f) {
        auto [x, y, z] = k;
        for (int i = 1; i <= ff.max_leaves; ++i) {
            if (sa[y][i].is_zero()) continue;
            for (int j = 1; i + j <= ff.max_leaves; ++j)
                if (!sb[z][j].is_zero()) out[x] += sa[y][i] * sb[z][j] * v;
        }
    }
    return out;
}

}  // namespace

GradedPolynomial simplex_tree_action(const DgLaData& lie, int n, int max_leaves) {
    if (n < 0 || n > 2) throw std::invalid_argument("building blocks are available for n <= 2");
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
    FieldForms ff(lie, n, max_leaves);
    const std::size_t g = lie.dim();
    const auto fs = faces(n);
    LieField leaves(g, ff.zero());
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const GradedPolynomial w = ff.lift_form(whitney(fs[fi], n));
        for (std::size_t x = 0; x < g; ++x)
            leaves[x] += w * GradedPolynomial::variable(ff.big, ff.form_vars + fi * g + x, 1);
    }
    auto minus_k = [&](const PolyForm& f) { return dupont(f) * Rational(-1); };
    LieField alpha = leaves;
    for (int it = 1; it < max_leaves; ++it) {
        LieField br = lie_bracket(lie, ff, alpha, alpha);
        for (std::size_t x = 0; x < g; ++x) alpha[x] = leaves[x] + ff.on_forms(br[x] * Rational(1, 2), minus_k);
    }
    LieField br = lie_bracket(lie, ff, alpha, alpha);
    GradedPolynomial s(ff.base, 2);
    for (std::size_t x = 0; x < g; ++x) {
        const GradedPolynomial lambda = ff.on_forms(alpha[x], exterior_d) + br[x] * Rational(1, 2);
        for (std::size_t fi = 0; fi < fs.size(); ++fi) {
            const GradedPolynomial comp = ff.integrate(lambda, fs[fi]);
            if (comp.is_zero()) continue;
            const GradedPolynomial term =
                GradedPolynomial::variable(ff.base, ff.a_vars + fi * g + x, 1) * comp;
            for (const auto& [m, c] : term.terms()) s.add_term(m, c.coeff(0), 0);
        }
    }
    return homotopy::truncate_leaves(s, max_leaves);
}

// ---------------------------------------------------------------- trace polynomials

namespace {

using PMatrix = std::vector<std::vector<GradedPolynomial>>;

PMatrix pmul(const PMatrix& a, const PMatrix& b, const ContextPtr& ctx) {
    const std::size_t n = a.size();
    PMatrix out(n, std::vector<GradedPolynomial>(n, GradedPolynomial(ctx, 1)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (a[i][k].is_zero()) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (!b[k][j].is_zero()) out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

GradedPolynomial ptrace(const PMatrix& a, const ContextPtr& ctx) {
    GradedPolynomial s(ctx, 1);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i][i];
    return s;
}

// ad X for X = sum_y x[y] e_y
PMatrix ad_matrix(const DgLaData& lie, const std::vector<GradedPolynomial>& x, const ContextPtr& ctx) {
    const std::size_t g = lie.dim();
    PMatrix m(g, std::vector<GradedPolynomial>(g, GradedPolynomial(ctx, 1)));
    for (const auto& [k, v] : lie.f) {
        auto [a, y, z] = k;
        if (!x[y].is_zero()) m[a][z] += x[y] * v;
    }
    return m;
}

std::vector<GradedPolynomial> lie_vars(const ContextPtr& ctx, std::size_t first, std::size_t g) {
    std::vector<GradedPolynomial> x;
    for (std::size_t y = 0; y < g; ++y) x.push_back(GradedPolynomial::variable(ctx, first + y, 1));
    return x;
}

std::vector<GradedPolynomial> bracket_components(const DgLaData& lie, const std::vector<GradedPolynomial>& a,
                                                 const std::vector<GradedPolynomial>& b, const ContextPtr& ctx) {
    std::vector<GradedPolynomial> out(lie.dim(), GradedPolynomial(ctx, 1));
    for (const auto& [k, v] : lie.f) {
        auto [x, y, z] = k;
        if (!a[y].is_zero() && !b[z].is_zero()) out[x] += a[y] * b[z] * v;
    }
    return out;
}

}  // namespace

GradedPolynomial trace_ad_power(const DgLaData& lie, const ContextPtr& ctx, const std::vector<std::size_t>& vars, int k) {
    if (vars.size() != lie.dim()) throw std::invalid_argument("one variable per Lie basis element expected");
    std::vector<GradedPolynomial> x;
    for (auto v : vars) x.push_back(GradedPolynomial::variable(ctx, v, 1));
    const PMatrix ad = ad_matrix(lie, x, ctx);
    if (k == 0) return GradedPolynomial::constant(ctx, static_cast<long>(lie.dim()), 1);
    PMatrix p = ad;
    for (int i = 1; i < k; ++i) p = pmul(p, ad, ctx);
    return ptrace(p, ctx);
}

// ---------------------------------------------------------------- building blocks

std::vector<Rational> bernoulli_f(int order) {
    auto b = bernoulli_numbers(2 * order);
    std::vector<Rational> out;
    for (int k = 0; k <= order; ++k) out.push_back(b[2 * k] / factorial(2 * k));
    return out;
}

std::vector<Rational> bernoulli_g(int order) {
    auto b = bernoulli_numbers(2 * order);
    std::vector<Rational> out{0};
    for (int k = 1; k <= order; ++k) out.push_back(b[2 * k] / (2 * k * factorial(2 * k)));
    return out;
}

namespace {

int a_degree(const Monomial& m, std::size_t a_vars) {
    int s = 0;
    for (std::size_t i = 0; i < a_vars; ++i) s += m[i];
    return s;
}

GradedPolynomial keep_degree_below(const GradedPolynomial& p, int max_deg) {
    const std::size_t half = p.context()->size() / 2;
    GradedPolynomial out(p.context(), p.truncation());
    for (const auto& [m, c] : p.terms())
        if (a_degree(m, half) <= max_deg) out.add_term(m, c);
    return out;
}

// B_top terms only
GradedPolynomial top_part(const GradedPolynomial& s, std::size_t top_first, std::size_t g) {
    GradedPolynomial out(s.context(), s.truncation());
    for (const auto& [m, c] : s.terms()) {
        bool top = false;
        for (std::size_t x = 0; x < g; ++x) top = top || m[top_first + x] != 0;
        if (top) out.add_term(m, c);
    }
    return out;
}

// carry a block on the face f of Delta^n (given in its own standard labels) into Delta^n
GradedPolynomial face_embed(const GradedPolynomial& block, const DgLaData& lie, const Face& f, int n) {
    const int k = static_cast<int>(f.size()) - 1;
    const auto sub_faces = faces(k);
    const auto big_faces = faces(n);
    const std::size_t g = lie.dim();
    auto target = homotopy::superfield_context(simplex_basis(lie, n));
    const std::size_t half_small = sub_faces.size() * g, half_big = big_faces.size() * g;
    std::vector<std::optional<GradedPolynomial>> repl(2 * half_small);
    for (std::size_t si = 0; si < sub_faces.size(); ++si) {
        Face img;
        for (int v : sub_faces[si]) img.push_back(f[v]);
        const std::size_t bi = std::find(big_faces.begin(), big_faces.end(), img) - big_faces.begin();
        for (std::size_t x = 0; x < g; ++x) {
            repl[si * g + x] = GradedPolynomial::variable(target, bi * g + x, block.truncation());
            repl[half_small + si * g + x] = GradedPolynomial::variable(target, half_big + bi * g + x, block.truncation());
        }
    }
    return graded::substitute(block, repl, target);
}

struct Ansatz {
    std::string key;
    GradedPolynomial poly;
};

// one-loop trace polynomials of ghost degree 0 with leaves colored by faces of Delta^n
std::vector<Ansatz> loop_ansatz(const DgLaData& lie, int n, int max_leaves) {
    const auto fs = faces(n);
    const std::size_t g = lie.dim();
    auto ctx = homotopy::superfield_context(simplex_basis(lie, n));
    std::vector<PMatrix> ad;
    std::vector<std::vector<GradedPolynomial>> comps;
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        comps.push_back(lie_vars(ctx, fi * g, g));
        ad.push_back(ad_matrix(lie, comps.back(), ctx));
    }
    auto gh = [&](std::size_t fi) { return 1 - (static_cast<int>(fs[fi].size()) - 1); };
    std::vector<Ansatz> out;
    std::set<std::vector<std::size_t>> seen;
    // wheels: cyclic words, one representative per rotation class
    std::function<void(std::vector<std::size_t>&, int)> word = [&](std::vector<std::size_t>& w, int total) {
        if (w.size() >= 2 && total == 0) {
            std::vector<std::size_t> best = w;
            for (std::size_t r = 1; r < w.size(); ++r) {
                std::vector<std::size_t> rot(w.begin() + r, w.end());
                rot.insert(rot.end(), w.begin(), w.begin() + r);
                best = std::min(best, rot);
            }
            if (seen.insert(best).second) {
                PMatrix p = ad[best[0]];
                std::string key = "tr(" + face_name(fs[best[0]]);
                for (std::size_t i = 1; i < best.size(); ++i) {
                    p = pmul(p, ad[best[i]], ctx);
                    key += "," + face_name(fs[best[i]]);
                }
                GradedPolynomial t = ptrace(p, ctx);
                if (!t.is_zero()) out.push_back({key + ")", t});
            }
        }
        if (static_cast<int>(w.size()) == max_leaves) return;
        for (std::size_t fi = 0; fi < fs.size(); ++fi) {
            w.push_back(fi);
            word(w, total + gh(fi));
            w.pop_back();
        }
    };
    std::vector<std::size_t> w;
    word(w, 0);
    // a cycle carrying one two-leaf tree: tr(ad[a, b] ad c ...) up to max_leaves
    if (max_leaves >= 3)
        for (std::size_t a = 0; a < fs.size(); ++a)
            for (std::size_t b = a; b < fs.size(); ++b)
                for (std::size_t c = 0; c < fs.size(); ++c) {
                    if (gh(a) + gh(b) + gh(c) != 0) continue;
                    PMatrix m = ad_matrix(lie, bracket_components(lie, comps[a], comps[b], ctx), ctx);
                    GradedPolynomial t = ptrace(pmul(m, ad[c], ctx), ctx);
                    if (!t.is_zero())
                        out.push_back({"tr([" + face_name(fs[a]) + "," + face_name(fs[b]) + "]," + face_name(fs[c]) + ")", t});
                }
    return out;
}

GradedPolynomial h_part(const GradedPolynomial& p) { return p.h_component(1); }

std::string tree_key(const std::string& l, const std::string& r) { return "(" + l + "," + r + ")"; }

}  // namespace

BuildingBlock building_block(const DgLaData& lie, int n, int max_leaves) {
    if (n < 0 || n > 2) throw std::invalid_argument("building blocks are available for n <= 2");
    if (max_leaves < 2) throw std::invalid_argument("max_leaves must be at least 2");
    auto rep = homotopy::check_dgla(lie);
    if (!rep.ok) throw std::invalid_argument("coefficient Lie algebra: " + rep.failures.front());
    BuildingBlock b;
    b.n = n;
    b.max_leaves = max_leaves;
    const auto fs = faces(n);
    const std::size_t g = lie.dim();
    const Face top = fs.back();

    // form-level tree constants
    // one planar representative per tree class: children ordered by key, 1/|Aut| carried along
    struct Sub {
        std::string key;
        PolyForm value;
        int degree;
        Rational weight;
    };
    std::vector<std::vector<Sub>> by_leaves(max_leaves + 1);
    for (const auto& f : fs) by_leaves[1].push_back({face_name(f), whitney(f, n), static_cast<int>(f.size()) - 1, 1});
    auto minus_k = [](const PolyForm& f) { return dupont(f) * Rational(-1); };
    for (int k = 2; k <= max_leaves; ++k)
        for (int kl = 1; kl < k; ++kl) {
            const int kr = k - kl;
            for (const auto& l : by_leaves[kl])
                for (const auto& r : by_leaves[kr]) {
                    if (r.key < l.key) continue;
                    const int deg = l.degree + r.degree;
                    if (deg > n) continue;
                    const PolyForm prod = wedge(l.value, r.value);
                    if (prod.is_zero()) continue;
                    const Rational weight = l.weight * r.weight * (l.key == r.key ? Rational(1, 2) : Rational(1));
                    if (deg == n) {
                        const Rational c = poincare(prod, top);
                        if (sgn(c) != 0) b.tree[tree_key(l.key, r.key)] = c * weight;
                    }
                    if (k < max_leaves && deg >= 1) {
                        PolyForm v = minus_k(prod);
                        if (!v.is_zero()) by_leaves[k].push_back({tree_key(l.key, r.key), v, deg - 1, weight});
                    }
                }
        }

    // action: tree part from the recursion, loop part from the QME. Loop terms with k leaves
    // first meet the QME in A-degree k, against trees with k + 1 leaves.
    const GradedPolynomial tree_full = simplex_tree_action(lie, n, max_leaves + 1);
    auto ctx = tree_full.context();
    const std::size_t half = ctx->size() / 2;
    const std::size_t top_index = fs.size() - 1;
    GradedPolynomial lower_loops(ctx, 2);
    for (std::size_t fi = 0; fi + 1 < fs.size(); ++fi) {
        if (fs[fi].size() < 2) continue;
        BuildingBlock sub = building_block(lie, static_cast<int>(fs[fi].size()) - 1, max_leaves);
        GradedPolynomial loops(sub.action.context(), 2);
        for (const auto& [m, c] : sub.action.terms()) loops.add_term(m, c.coeff(1), 1);
        lower_loops += face_embed(loops, lie, fs[fi], n);
    }
    b.action = homotopy::truncate_leaves(top_part(tree_full, half + top_index * g, g), max_leaves);
    if (n == 0) {
        b.loop_solved = true;
        return b;
    }
    const auto pairing = homotopy::superfield_pairing(ctx);
    const GradedPolynomial s0 = tree_full + lower_loops;
    const int check = max_leaves;
    const GradedPolynomial r0 = keep_degree_below(h_part(graded::qme_residual(s0, pairing, 2)), check);
    const auto ansatz = loop_ansatz(lie, n, max_leaves);
    // the h^1 part of the residual is linear in the loop terms: {S_0, P}
    const GradedPolynomial classical = s0.h_component(0);
    std::vector<GradedPolynomial> rj;
    for (const auto& a : ansatz) rj.push_back(keep_degree_below(graded::poisson_bracket(classical, a.poly, pairing), check));
    std::map<Monomial, std::size_t> rows;
    for (const auto& [m, c] : r0.terms()) rows.emplace(m, rows.size());
    for (const auto& r : rj)
        for (const auto& [m, c] : r.terms()) rows.emplace(m, rows.size());
    RMatrix a(rows.size(), std::vector<Rational>(ansatz.size(), 0));
    std::vector<Rational> rhs(rows.size(), 0);
    for (const auto& [m, c] : r0.terms()) rhs[rows[m]] = -c.coeff(0);
    for (std::size_t j = 0; j < rj.size(); ++j)
        for (const auto& [m, c] : rj[j].terms()) a[rows[m]][j] = c.coeff(0);
    std::vector<Rational> sol;
    b.loop_solved = solve_linear(a, rhs, sol);
    b.loop_free = ansatz.size() - (rows.empty() ? 0 : rank(a));
    if (b.loop_solved)
        for (std::size_t j = 0; j < ansatz.size(); ++j) {
            if (sgn(sol[j]) == 0) continue;
            b.loop[ansatz[j].key] = sol[j];
            for (const auto& [m, c] : ansatz[j].poly.terms()) b.action.add_term(m, c.coeff(0) * sol[j], 1);
        }
    return b;
}

std::string BuildingBlock::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["max_leaves"] = max_leaves;
    for (const auto& [k, v] : tree) j["tree"][k] = bvlab::to_string(v);
    for (const auto& [k, v] : loop) j["loop"][k] = bvlab::to_string(v);
    j["loop_solved"] = loop_solved;
    j["loop_free"] = loop_free;
    return j.dump(1);
}

// ---------------------------------------------------------------- interval

namespace {

// coefficient c_n in sum_n c_n (ad X)^n (Y) for the B_01 component of the interval block
bool fit_branch(const DgLaData& lie, const GradedPolynomial& block, int max_leaves, std::vector<Rational>& coef,
                Rational& midpoint) {
    auto ctx = block.context();
    const std::size_t g = lie.dim();
    const auto x0 = lie_vars(ctx, 0, g), x1 = lie_vars(ctx, g, g), x01 = lie_vars(ctx, 2 * g, g);
    std::vector<GradedPolynomial> diff(g, GradedPolynomial(ctx, 1)), sum(g, GradedPolynomial(ctx, 1));
    for (std::size_t y = 0; y < g; ++y) {
        diff[y] = x1[y] - x0[y];
        sum[y] = x1[y] + x0[y];
    }
    auto pair_b = [&](const std::vector<GradedPolynomial>& v) {
        GradedPolynomial s(ctx, 1);
        const std::size_t bfirst = ctx->size() / 2 + 2 * g;
        for (std::size_t y = 0; y < g; ++y) s += GradedPolynomial::variable(ctx, bfirst + y, 1) * v[y];
        return s;
    };
    std::vector<GradedPolynomial> basis{pair_b(bracket_components(lie, x01, sum, ctx))};
    std::vector<GradedPolynomial> cur = diff;
    for (int k = 0; k + 1 <= max_leaves; ++k) {
        basis.push_back(pair_b(cur));
        cur = bracket_components(lie, x01, cur, ctx);
    }
    const GradedPolynomial target = block.h_component(0);
    std::map<Monomial, std::size_t> rows;
    for (const auto& p : basis)
        for (const auto& [m, c] : p.terms()) rows.emplace(m, rows.size());
    for (const auto& [m, c] : target.terms()) rows.emplace(m, rows.size());
    RMatrix a(rows.size(), std::vector<Rational>(basis.size(), 0));
    std::vector<Rational> rhs(rows.size(), 0);
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (const auto& [m, c] : basis[j].terms()) a[rows[m]][j] = c.coeff(0);
    for (const auto& [m, c] : target.terms()) rhs[rows[m]] = c.coeff(0);
    std::vector<Rational> sol;
    if (!solve_linear(a, rhs, sol)) return false;
    midpoint = sol[0];
    coef.assign(sol.begin() + 1, sol.end());
    return true;
}

// sum_k Str(T^k)/k with T = -K [dt A01, .] on forms of polynomial degree <= deg, field parity
GradedPolynomial interval_trace(const DgLaData& lie, int deg, int max_power) {
    const std::size_t g = lie.dim();
    auto ctx = homotopy::superfield_context(simplex_basis(lie, 1));
    const auto x01 = lie_vars(ctx, 2 * g, g);
    struct Slot {
        int power;
        unsigned mask;
    };
    std::vector<Slot> slots;
    for (unsigned mask = 0; mask < 2; ++mask)
        for (int p = 0; p <= deg; ++p) slots.push_back({p, mask});
    const std::size_t dim = slots.size() * g;
    auto index = [&](int p, unsigned mask) -> int {
        if (p > deg) return -1;
        return static_cast<int>(mask * (deg + 1) + p);
    };
    PMatrix t(dim, std::vector<GradedPolynomial>(dim, GradedPolynomial(ctx, 1)));
    for (std::size_t si = 0; si < slots.size(); ++si) {
        if (slots[si].mask != 0) continue;  // dt ^ (1-form) = 0
        // -K(t^p dt) for the column (t^p, z): the bracket contributes f^x_{yz} A01_y
        const PolyForm k = dupont(PolyForm::monomial(1, {slots[si].power}, 1)) * Rational(-1);
        for (const auto& [m, c] : k.poly().terms()) {
            const int row = index(m[0], m[1]);
            if (row < 0) continue;
            for (const auto& [key, v] : lie.f) {
                auto [x, y, z] = key;
                // superfield sign: A01_y (degree 0) passes nothing odd
                t[row * g + x][si * g + z] += x01[y] * (v * c.coeff(0));
            }
        }
    }
    GradedPolynomial out(ctx, 1);
    PMatrix power = t;
    for (int k = 1; k <= max_power; ++k) {
        GradedPolynomial str(ctx, 1);
        for (std::size_t a = 0; a < dim; ++a) {
            const int form_degree = static_cast<int>(slots[a / g].mask);
            if (!power[a][a].is_zero()) str += power[a][a] * Rational(sign_pow(1 - form_degree));
        }
        out += str * Rational(1, k);
        if (k < max_power) power = pmul(power, t, ctx);
    }
    return out;
}

}  // namespace

IntervalSeries interval_series(int order) {
    if (order < 1 || order > 6) throw std::invalid_argument("interval_series supports 1 <= order <= 6");
    const DgLaData lie = homotopy::so3();
    const int leaves = 2 * order + 1;
    IntervalSeries s;
    BuildingBlock b = building_block(lie, 1, leaves);
    std::vector<Rational> coef;
    Rational midpoint;
    if (!fit_branch(lie, b.action, leaves, coef, midpoint))
        throw std::runtime_error("interval block does not have the branch form");
    for (int k = 0; k <= order; ++k) s.f.push_back(coef[2 * k]);
    for (std::size_t k = 1; k < coef.size(); k += 2) s.odd_terms_vanish = s.odd_terms_vanish && sgn(coef[k]) == 0;
    s.odd_terms_vanish = s.odd_terms_vanish && midpoint == Rational(1, 2);
    s.g.push_back(0);
    for (int k = 1; k <= order; ++k) {
        auto it = b.loop.find("tr(" + [&] {
            std::string w = "01";
            for (int i = 1; i < 2 * k; ++i) w += ",01";
            return w;
        }() + ")");
        s.g.push_back(it == b.loop.end() ? Rational(0) : it->second);
    }
    for (const auto& [key, v] : b.loop)
        if ((std::count(key.begin(), key.end(), ',') + 1) % 2 == 1) s.odd_terms_vanish = false;

    // supertrace route, k <= 2: increase the truncation until two successive values agree
    auto ctx = homotopy::superfield_context(simplex_basis(lie, 1));
    const std::size_t g = lie.dim();
    std::vector<std::size_t> vars;
    for (std::size_t y = 0; y < g; ++y) vars.push_back(2 * g + y);
    const int kmax = std::min(order, 2);
    GradedPolynomial prev;
    for (int deg = 2;; ++deg) {
        GradedPolynomial cur = interval_trace(lie, deg, 2 * kmax);
        if (deg > 2 && cur == prev) {
            s.trace_degree = deg - 1;
            break;
        }
        if (deg > 12) throw std::runtime_error("interval supertrace did not stabilize");
        prev = cur;
    }
    // read coefficients of tr (ad A01)^{2k}
    s.g_trace.push_back(0);
    for (int k = 1; k <= kmax; ++k) {
        const GradedPolynomial basis = trace_ad_power(lie, ctx, vars, 2 * k);
        GradedPolynomial part(ctx, 1);
        for (const auto& [m, c] : prev.terms())
            if (GradedPolynomial::polynomial_degree(m) == 2 * k) part.add_term(m, c.coeff(0));
        const auto& [m0, c0] = *basis.terms().begin();
        const Rational ratio = part.coefficient(m0) / c0.coeff(0);
        s.g_trace.push_back(part == basis * ratio ? ratio : Rational(0));
        if (!(part == basis * ratio)) throw std::runtime_error("supertrace is not a multiple of tr (ad A01)^2k");
    }
    return s;
}

// ---------------------------------------------------------------- 1-dimensional complexes

CellComplex1D CellComplex1D::parse(const std::string& text) {
    CellComplex1D x;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto vindex = [&](const std::string& name) {
        for (std::size_t i = 0; i < x.vertices.size(); ++i)
            if (x.vertices[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown vertex '" + name + "'");
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<std::string> t;
        for (std::string w; ls >> w;) {
            if (w[0] == '#') break;
            t.push_back(w);
        }
        if (t.empty()) continue;
        if (t[0] == "vertex" && t.size() == 2) {
            x.vertices.push_back(t[1]);
        } else if (t[0] == "edge" && t.size() == 4) {
            Edge e{t[1], vindex(t[2]), vindex(t[3])};
            if (e.from == e.to) throw std::invalid_argument("line " + std::to_string(lineno) + ": loop edges are not supported");
            x.edges.push_back(e);
        } else {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'vertex v' or 'edge e v w'");
        }
    }
    return x;
}

CellComplex1D CellComplex1D::polygon(int n) {
    if (n < 2) throw std::invalid_argument("a polygon needs at least 2 vertices");
    CellComplex1D x;
    for (int i = 0; i < n; ++i) x.vertices.push_back("v" + std::to_string(i));
    for (int i = 0; i < n; ++i) x.edges.push_back({"e" + std::to_string(i), i, (i + 1) % n});
    return x;
}

std::string CellComplex1D::to_text() const {
    std::ostringstream out;
    for (const auto& v : vertices) out << "vertex " << v << '\n';
    for (const auto& e : edges) out << "edge " << e.name << ' ' << vertices[e.from] << ' ' << vertices[e.to] << '\n';
    return out.str();
}

bool CellComplex1D::is_circle() const {
    const std::size_t n = vertices.size();
    if (n < 2 || edges.size() != n) return false;
    std::vector<int> deg(n, 0);
    for (const auto& e : edges) {
        deg[e.from]++;
        deg[e.to]++;
    }
    for (int d : deg)
        if (d != 2) return false;
    // connected
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : edges)
            for (auto [a, b] : {std::pair{e.from, e.to}, std::pair{e.to, e.from}})
                if (a == v && !seen[b]) {
                    seen[b] = true;
                    stack.push_back(b);
                }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

DgLaData cochain_complex(const CellComplex1D& x, const DgLaData& lie) {
    const std::size_t g = lie.dim(), nv = x.vertices.size(), ne = x.edges.size();
    DgLaData v;
    for (const auto& c : x.vertices)
        for (const auto& e : lie.basis) v.basis.push_back({e.name + "_" + c, 0});
    for (const auto& c : x.edges)
        for (const auto& e : lie.basis) v.basis.push_back({e.name + "_" + c.name, 1});
    v.d = zero_matrix(v.dim(), v.dim());
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t y = 0; y < g; ++y) {
            v.d[(nv + i) * g + y][x.edges[i].to * g + y] += 1;
            v.d[(nv + i) * g + y][x.edges[i].from * g + y] -= 1;
        }
    return v;
}

namespace {

// block on Delta^n (n <= 1) placed on a cell of X; cells given as indices into the basis blocks
GradedPolynomial place(const GradedPolynomial& block, const std::vector<std::size_t>& cell_of_face,
                       const ContextPtr& target, std::size_t g) {
    const std::size_t half_small = block.context()->size() / 2, half_big = target->size() / 2;
    std::vector<std::optional<GradedPolynomial>> repl(2 * half_small);
    for (std::size_t fi = 0; fi < cell_of_face.size(); ++fi)
        for (std::size_t x = 0; x < g; ++x) {
            repl[fi * g + x] = GradedPolynomial::variable(target, cell_of_face[fi] * g + x, block.truncation());
            repl[half_small + fi * g + x] =
                GradedPolynomial::variable(target, half_big + cell_of_face[fi] * g + x, block.truncation());
        }
    return graded::substitute(block, repl, target);
}

}  // namespace

GradedPolynomial assemble(const CellComplex1D& x, const DgLaData& lie, int max_leaves) {
    const DgLaData v = cochain_complex(x, lie);
    auto ctx = homotopy::superfield_context(v.basis);
    const std::size_t g = lie.dim(), nv = x.vertices.size();
    const BuildingBlock b0 = building_block(lie, 0, max_leaves);
    const BuildingBlock b1 = building_block(lie, 1, max_leaves);
    if (!b1.loop_solved) throw std::runtime_error("interval block: QME has no solution in the loop ansatz");
    GradedPolynomial s(ctx, 2);
    for (std::size_t i = 0; i < nv; ++i) s += place(b0.action, {i}, ctx, g);
    for (std::size_t i = 0; i < x.edges.size(); ++i)
        s += place(b1.action, {static_cast<std::size_t>(x.edges[i].from), static_cast<std::size_t>(x.edges[i].to), nv + i},
                   ctx, g);
    return s;
}

homotopy::InductionData circle_induction(const CellComplex1D& x, const DgLaData& lie) {
    if (!x.is_circle()) throw std::invalid_argument("complex is not a triangulated circle");
    const std::size_t g = lie.dim(), nv = x.vertices.size(), ne = x.edges.size();
    const DgLaData v = cochain_complex(x, lie);
    homotopy::InductionData d;
    for (const auto& e : lie.basis) d.target.push_back({e.name + "_H0", 0});
    for (const auto& e : lie.basis) d.target.push_back({e.name + "_H1", 1});
    const std::size_t n = v.dim();
    d.iota = zero_matrix(n, 2 * g);
    d.p = zero_matrix(2 * g, n);
    d.k = zero_matrix(n, n);
    // orientation of each edge along the cycle starting at edge 0
    std::vector<int> orient(ne, 0);
    {
        int at = x.edges[0].to;
        orient[0] = 1;
        for (std::size_t step = 1; step < ne; ++step)
            for (std::size_t i = 0; i < ne; ++i) {
                if (orient[i] != 0) continue;
                if (x.edges[i].from == at) {
                    orient[i] = 1;
                    at = x.edges[i].to;
                    break;
                }
                if (x.edges[i].to == at) {
                    orient[i] = -1;
                    at = x.edges[i].from;
                    break;
                }
            }
    }
    const int base = x.edges[0].from;
    for (std::size_t y = 0; y < g; ++y) {
        for (std::size_t i = 0; i < nv; ++i) d.iota[i * g + y][y] = 1;
        d.iota[nv * g + y][g + y] = 1;
        d.p[y][base * g + y] = 1;
        for (std::size_t i = 0; i < ne; ++i) d.p[g + y][(nv + i) * g + y] = orient[i];
    }
    // K on edges: the 0-cochain vanishing at the base vertex with dK e = e - iota p e
    const RMatrix dmat = v.d;
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t y = 0; y < g; ++y) {
            const std::size_t col = (nv + i) * g + y;
            RMatrix a;
            std::vector<Rational> rhs;
            for (std::size_t e = 0; e < ne; ++e) {
                std::vector<Rational> row(nv, 0);
                for (std::size_t w = 0; w < nv; ++w) row[w] = dmat[(nv + e) * g + y][w * g + y];
                a.push_back(row);
                Rational target = e == i ? 1 : 0;
                if (e == 0) target -= orient[i];
                rhs.push_back(target);
            }
            std::vector<Rational> base_row(nv, 0);
            base_row[base] = 1;
            a.push_back(base_row);
            rhs.push_back(0);
            std::vector<Rational> sol;
            if (!solve_linear(a, rhs, sol)) throw std::logic_error("circle homotopy: no solution");
            for (std::size_t w = 0; w < nv; ++w) d.k[w * g + y][col] = sol[w];
        }
    auto rep = homotopy::validate_induction(v, d);
    if (!rep.ok) throw std::logic_error("circle induction data invalid: " + rep.failures.front());
    return d;
}

CircleReport circle_effective(const CellComplex1D& x, const DgLaData& lie, int max_leaves) {
    CircleReport r;
    const DgLaData v = cochain_complex(x, lie);
    const auto data = circle_induction(x, lie);
    const GradedPolynomial sx = assemble(x, lie, max_leaves);
    const auto pairing = homotopy::superfield_pairing(sx.context());
    r.qme_ok = keep_degree_below(graded::qme_residual(sx, pairing, 2), max_leaves - 1).is_zero();
    const auto ops = homotopy::ULInfinityStructure::from_action(v.basis, sx, max_leaves);
    r.result = homotopy::transfer_recursive(ops, v.d, data, max_leaves);

    homotopy::Cdga h;
    h.basis = {{"H0", 0}, {"H1", 1}};
    h.d = zero_matrix(2, 2);
    h.prod[{0, 0, 0}] = 1;
    h.prod[{1, 0, 1}] = 1;
    h.prod[{1, 1, 0}] = 1;
    const DgLaData hg = homotopy::tensor(lie, h);
    auto ctx = r.result.action.context();
    r.expected = GradedPolynomial(ctx, 2);
    const GradedPolynomial bf = homotopy::build_bf_action(hg);
    for (const auto& [m, c] : bf.terms()) r.expected.add_term(m, c);
    const auto gcoef = bernoulli_g(max_leaves / 2);
    std::vector<std::size_t> vars;
    for (std::size_t y = 0; y < lie.dim(); ++y) vars.push_back(lie.dim() + y);
    for (int k = 1; 2 * k <= max_leaves; ++k) {
        const GradedPolynomial tr = trace_ad_power(lie, ctx, vars, 2 * k);
        for (const auto& [m, c] : tr.terms()) r.expected.add_term(m, c.coeff(0) * gcoef[k], 1);
    }
    const std::size_t half = ctx->size() / 2;
    for (int deg = 0; deg <= max_leaves; ++deg) {
        auto part = [&](const GradedPolynomial& p, int hp) {
            GradedPolynomial out(ctx, 1);
            for (const auto& [m, c] : p.terms())
                if (a_degree(m, half) == deg) out.add_term(m, c.coeff(hp));
            return out;
        };
        if (!(part(r.result.action, 0) == part(r.expected, 0))) r.classical_mismatch.push_back(deg);
        if (!(part(r.result.action, 1) == part(r.expected, 1))) r.quantum_mismatch.push_back(deg);
    }
    return r;
}

}  // namespace bvlab::cellular
