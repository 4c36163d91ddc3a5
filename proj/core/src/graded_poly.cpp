#include "bvlab/graded_poly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace bvlab::graded {

VariableContext::VariableContext(std::vector<GradedVariable> vars) : vars_(std::move(vars)) {
    if (vars_.size() > 255) throw std::invalid_argument("too many variables");
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        const auto& v = vars_[i];
        if (v.name.empty()) throw std::invalid_argument("empty variable name");
        for (char c : v.name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                throw std::invalid_argument("variable name must be an identifier: " + v.name);
        if (v.name == "h") throw std::invalid_argument("'h' is reserved for the formal parameter");
        if (!by_name_.emplace(v.name, i).second) throw std::invalid_argument("duplicate variable " + v.name);
        odd_.push_back(v.is_odd());
    }
}

std::optional<std::size_t> VariableContext::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t VariableContext::index(const std::string& name) const {
    auto i = find(name);
    if (!i) throw std::invalid_argument("unknown variable " + name);
    return *i;
}

bool VariableContext::same_as(const VariableContext& other) const {
    if (this == &other) return true;
    if (vars_.size() != other.vars_.size()) return false;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name != other.vars_[i].name || vars_[i].degree != other.vars_[i].degree) return false;
    return true;
}

ContextPtr make_context(std::vector<GradedVariable> vars) {
    return std::make_shared<const VariableContext>(std::move(vars));
}

// ---------------------------------------------------------------- FormalSeries

FormalSeries::FormalSeries(int truncation) {
    if (truncation < 1) throw std::invalid_argument("truncation order must be >= 1");
    c_.assign(static_cast<std::size_t>(truncation), Rational(0));
}

FormalSeries FormalSeries::constant(const Rational& c, int truncation) {
    FormalSeries s(truncation);
    s.c_[0] = c;
    return s;
}

FormalSeries FormalSeries::monomial(const Rational& c, int power, int truncation) {
    FormalSeries s(truncation);
    s.add(power, c);
    return s;
}

const Rational& FormalSeries::coeff(int k) const {
    static const Rational zero(0);
    if (k < 0 || k >= truncation()) return zero;
    return c_[static_cast<std::size_t>(k)];
}

void FormalSeries::add(int k, const Rational& c) {
    if (k < 0) throw std::invalid_argument("negative power of h");
    if (k >= truncation()) return;
    c_[static_cast<std::size_t>(k)] += c;
}

bool FormalSeries::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const Rational& q) { return sgn(q) == 0; });
}

int FormalSeries::lowest_order() const {
    for (int k = 0; k < truncation(); ++k)
        if (sgn(c_[static_cast<std::size_t>(k)]) != 0) return k;
    return truncation();
}

FormalSeries FormalSeries::truncated(int t) const {
    FormalSeries s(std::min(t, truncation()));
    for (int k = 0; k < s.truncation(); ++k) s.c_[static_cast<std::size_t>(k)] = c_[static_cast<std::size_t>(k)];
    return s;
}

FormalSeries FormalSeries::operator-() const {
    FormalSeries s = *this;
    for (auto& q : s.c_) q = -q;
    return s;
}

FormalSeries& FormalSeries::operator+=(const FormalSeries& o) {
    if (o.truncation() < truncation()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

FormalSeries& FormalSeries::operator-=(const FormalSeries& o) {
    if (o.truncation() < truncation()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

FormalSeries& FormalSeries::operator*=(const Rational& s) {
    for (auto& q : c_) q *= s;
    return *this;
}

FormalSeries operator*(const FormalSeries& a, const FormalSeries& b) {
    const int t = std::min(a.truncation(), b.truncation());
    FormalSeries r(t);
    for (int i = 0; i < t; ++i) {
        if (sgn(a.c_[static_cast<std::size_t>(i)]) == 0) continue;
        for (int j = 0; i + j < t; ++j)
            if (sgn(b.c_[static_cast<std::size_t>(j)]) != 0)
                r.c_[static_cast<std::size_t>(i + j)] += a.c_[static_cast<std::size_t>(i)] * b.c_[static_cast<std::size_t>(j)];
    }
    return r;
}

bool operator==(const FormalSeries& a, const FormalSeries& b) {
    const int t = std::max(a.truncation(), b.truncation());
    for (int k = 0; k < t; ++k)
        if (a.coeff(k) != b.coeff(k)) return false;
    return true;
}

// ---------------------------------------------------------------- monomials

int monomial_product(const VariableContext& ctx, const Monomial& a, const Monomial& b, Monomial& out) {
    const std::size_t n = a.size();
    out.resize(n);
    int parity = 0;
    int odd_a_above = 0;  // odd variables of a with index > k
    for (std::size_t kk = n; kk-- > 0;) {
        if (ctx.odd(kk)) {
            if (a[kk] && b[kk]) return 0;
            if (b[kk]) parity += odd_a_above;
            if (a[kk]) ++odd_a_above;
        }
        const int e = a[kk] + b[kk];
        if (e > 255) throw std::overflow_error("exponent overflow");
        out[kk] = static_cast<std::uint8_t>(e);
    }
    return (parity % 2) ? -1 : 1;
}

// ---------------------------------------------------------------- GradedPolynomial

GradedPolynomial::GradedPolynomial(ContextPtr ctx, int truncation) : ctx_(std::move(ctx)), trunc_(truncation) {
    if (!ctx_) throw std::invalid_argument("null context");
    if (truncation < 1) throw std::invalid_argument("truncation order must be >= 1");
}

GradedPolynomial GradedPolynomial::constant(ContextPtr ctx, const Rational& c, int truncation) {
    GradedPolynomial p(ctx, truncation);
    p.add_term(Monomial(ctx->size(), 0), c, 0);
    return p;
}

GradedPolynomial GradedPolynomial::variable(ContextPtr ctx, std::size_t idx, int truncation) {
    if (idx >= ctx->size()) throw std::invalid_argument("variable index out of range");
    GradedPolynomial p(ctx, truncation);
    Monomial m(ctx->size(), 0);
    m[idx] = 1;
    p.add_term(m, Rational(1), 0);
    return p;
}

GradedPolynomial GradedPolynomial::variable(ContextPtr ctx, const std::string& name, int truncation) {
    const std::size_t idx = ctx->index(name);
    return variable(std::move(ctx), idx, truncation);
}

void GradedPolynomial::add_term(const Monomial& m, const Rational& c, int power) {
    if (sgn(c) == 0 || power >= trunc_) return;
    if (m.size() != ctx_->size()) throw std::invalid_argument("monomial size mismatch");
    auto it = terms_.find(m);
    if (it == terms_.end()) it = terms_.emplace(m, FormalSeries(trunc_)).first;
    it->second.add(power, c);
    if (it->second.is_zero()) terms_.erase(it);
}

void GradedPolynomial::add_term(const Monomial& m, const FormalSeries& s) {
    if (m.size() != ctx_->size()) throw std::invalid_argument("monomial size mismatch");
    FormalSeries t = s.truncated(trunc_);
    if (t.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) it = terms_.emplace(m, FormalSeries(trunc_)).first;
    for (int k = 0; k < t.truncation(); ++k) it->second.add(k, t.coeff(k));
    if (it->second.is_zero()) terms_.erase(it);
}

Rational GradedPolynomial::coefficient(const Monomial& m, int power) const {
    auto it = terms_.find(m);
    if (it == terms_.end()) return 0;
    return it->second.coeff(power);
}

int GradedPolynomial::ghost_degree(const Monomial& m) const {
    int d = 0;
    for (std::size_t i = 0; i < m.size(); ++i) d += m[i] * ctx_->var(i).degree;
    return d;
}

int GradedPolynomial::polynomial_degree(const Monomial& m) {
    int d = 0;
    for (auto e : m) d += e;
    return d;
}

std::optional<int> GradedPolynomial::homogeneous_degree() const {
    std::optional<int> deg;
    for (const auto& [m, s] : terms_) {
        const int d = ghost_degree(m);
        if (deg && *deg != d) return std::nullopt;
        deg = d;
    }
    return deg;
}

std::vector<Monomial> GradedPolynomial::monomials_of_degree_other_than(int deg) const {
    std::vector<Monomial> bad;
    for (const auto& [m, s] : terms_)
        if (ghost_degree(m) != deg) bad.push_back(m);
    return bad;
}

bool GradedPolynomial::parity_odd() const {
    if (is_zero()) return false;
    auto d = homogeneous_degree();
    if (!d) throw std::domain_error("parity of an inhomogeneous polynomial");
    return (*d % 2) != 0;
}

GradedPolynomial GradedPolynomial::truncated(int t) const {
    GradedPolynomial r(ctx_, std::min(t, trunc_));
    for (const auto& [m, s] : terms_) r.add_term(m, s);
    return r;
}

GradedPolynomial GradedPolynomial::filter_polynomial_degree(int lo, int hi) const {
    GradedPolynomial r(ctx_, trunc_);
    for (const auto& [m, s] : terms_) {
        const int d = polynomial_degree(m);
        if (d >= lo && d <= hi) r.terms_.emplace(m, s);
    }
    return r;
}

GradedPolynomial GradedPolynomial::h_component(int k) const {
    GradedPolynomial r(ctx_, 1);
    for (const auto& [m, s] : terms_) r.add_term(m, s.coeff(k), 0);
    return r;
}

GradedPolynomial GradedPolynomial::h_shift(int k) const {
    GradedPolynomial r(ctx_, trunc_);
    for (const auto& [m, s] : terms_)
        for (int j = 0; j + k < trunc_; ++j) r.add_term(m, s.coeff(j), j + k);
    return r;
}

void GradedPolynomial::check_context(const GradedPolynomial& o) const {
    if (!ctx_ || !o.ctx_ || !ctx_->same_as(*o.ctx_))
        throw std::invalid_argument("polynomials over mismatched variable contexts");
}

GradedPolynomial GradedPolynomial::operator-() const {
    GradedPolynomial r = *this;
    for (auto& [m, s] : r.terms_) s *= Rational(-1);
    return r;
}

GradedPolynomial& GradedPolynomial::operator+=(const GradedPolynomial& o) {
    check_context(o);
    if (o.trunc_ < trunc_) *this = truncated(o.trunc_);
    for (const auto& [m, s] : o.terms_) add_term(m, s);
    return *this;
}

GradedPolynomial& GradedPolynomial::operator-=(const GradedPolynomial& o) {
    check_context(o);
    if (o.trunc_ < trunc_) *this = truncated(o.trunc_);
    for (const auto& [m, s] : o.terms_) add_term(m, -s);
    return *this;
}

GradedPolynomial& GradedPolynomial::operator*=(const Rational& s) {
    if (sgn(s) == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
}

bool operator==(const GradedPolynomial& a, const GradedPolynomial& b) {
    a.check_context(b);
    GradedPolynomial d = a - b;
    return d.is_zero();
}

namespace {

std::string term_body(const VariableContext& ctx, const Monomial& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        s += "*" + ctx.var(i).name;
        if (m[i] > 1) s += "^" + std::to_string(m[i]);
    }
    return s;
}

}  // namespace

std::string GradedPolynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, s] : terms_) {
        for (int k = 0; k < s.truncation(); ++k) {
            Rational c = s.coeff(k);
            if (sgn(c) == 0) continue;
            if (first) {
                if (sgn(c) < 0) out += "-";
            } else {
                out += sgn(c) < 0 ? " - " : " + ";
            }
            first = false;
            out += bvlab::to_string(abs(c)) + "*h^" + std::to_string(k) + term_body(*ctx_, m);
        }
    }
    return out;
}

GradedPolynomial GradedPolynomial::parse(ContextPtr ctx, const std::string& text, int truncation) {
    GradedPolynomial result(ctx, truncation);
    std::istringstream in(text);
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    if (tokens.size() == 1 && tokens[0] == "0") return result;
    if (tokens.empty()) throw std::invalid_argument("empty polynomial text");
    int sign = 1;
    bool expect_term = true;
    for (const auto& tok : tokens) {
        if (!expect_term) {
            if (tok == "+") sign = 1;
            else if (tok == "-") sign = -1;
            else throw std::invalid_argument("expected + or - between terms, got '" + tok + "'");
            expect_term = true;
            continue;
        }
        std::vector<std::string> factors;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= tok.size(); ++i)
            if (i == tok.size() || tok[i] == '*') {
                factors.push_back(tok.substr(start, i - start));
                start = i + 1;
            }
        Rational coef = parse_rational(factors.at(0));
        int hpow = 0;
        GradedPolynomial term = constant(ctx, coef * sign, truncation);
        for (std::size_t f = 1; f < factors.size(); ++f) {
            std::string name = factors[f];
            int e = 1;
            auto caret = name.find('^');
            if (caret != std::string::npos) {
                e = std::stoi(name.substr(caret + 1));
                name = name.substr(0, caret);
            }
            if (e < 0) throw std::invalid_argument("negative exponent");
            if (name == "h") {
                hpow += e;
                continue;
            }
            GradedPolynomial v = variable(ctx, name, truncation);
            for (int j = 0; j < e; ++j) term = multiply(term, v);
        }
        result += term.h_shift(hpow);
        sign = 1;
        expect_term = false;
    }
    if (expect_term) throw std::invalid_argument("dangling operator in polynomial text");
    return result;
}

GradedPolynomial multiply(const GradedPolynomial& p, const GradedPolynomial& q) {
    p.check_context(q);
    GradedPolynomial r(p.ctx_, std::min(p.trunc_, q.trunc_));
    Monomial m;
    for (const auto& [ma, sa] : p.terms_)
        for (const auto& [mb, sb] : q.terms_) {
            const int sign = monomial_product(*p.ctx_, ma, mb, m);
            if (!sign) continue;
            FormalSeries s = sa * sb;
            if (sign < 0) s *= Rational(-1);
            r.add_term(m, s);
        }
    return r;
}

GradedPolynomial power(const GradedPolynomial& p, int n) {
    GradedPolynomial r = GradedPolynomial::constant(p.context(), 1, p.truncation());
    for (int i = 0; i < n; ++i) r = multiply(r, p);
    return r;
}

GradedPolynomial derive(const GradedPolynomial& p, std::size_t var, Side side) {
    const auto& ctx = *p.context();
    if (var >= ctx.size()) throw std::invalid_argument("unknown variable");
    GradedPolynomial r(p.context(), p.truncation());
    const bool odd = ctx.odd(var);
    for (const auto& [m, s] : p.terms()) {
        if (!m[var]) continue;
        Monomial dm = m;
        FormalSeries c = s;
        if (odd) {
            int passed = 0;
            if (side == Side::left) {
                for (std::size_t j = 0; j < var; ++j)
                    if (ctx.odd(j) && m[j]) ++passed;
            } else {
                for (std::size_t j = var + 1; j < m.size(); ++j)
                    if (ctx.odd(j) && m[j]) ++passed;
            }
            if (passed % 2) c *= Rational(-1);
        } else {
            c *= Rational(m[var]);
        }
        dm[var] = static_cast<std::uint8_t>(dm[var] - 1);
        r.add_term(dm, c);
    }
    return r;
}

GradedPolynomial derive(const GradedPolynomial& p, const std::string& var, Side side) {
    return derive(p, p.context()->index(var), side);
}

GradedPolynomial substitute(const GradedPolynomial& p, const std::vector<std::optional<GradedPolynomial>>& repl,
                            const ContextPtr& target) {
    const auto& ctx = *p.context();
    if (repl.size() != ctx.size()) throw std::invalid_argument("substitute: replacement list size mismatch");
    std::vector<GradedPolynomial> image(ctx.size());
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (repl[i]) {
            const auto& r = *repl[i];
            if (!r.context()->same_as(*target)) throw std::invalid_argument("substitute: replacement context");
            if (!r.is_zero() && r.parity_odd() != ctx.odd(i))
                throw std::invalid_argument("substitute: parity mismatch for " + ctx.var(i).name);
            image[i] = r;
        } else {
            image[i] = GradedPolynomial::variable(target, ctx.var(i).name, p.truncation());
        }
    }
    GradedPolynomial out(target, p.truncation());
    for (const auto& [m, s] : p.terms()) {
        GradedPolynomial t(target, p.truncation());
        t.add_term(Monomial(target->size(), 0), s);
        for (std::size_t i = 0; i < m.size() && !t.is_zero(); ++i)
            for (int e = 0; e < m[i]; ++e) t = multiply(t, image[i]);
        out += t;
    }
    return out;
}

GradedPolynomial embed(const GradedPolynomial& p, const ContextPtr& target) {
    std::vector<std::optional<GradedPolynomial>> repl(p.context()->size());
    return substitute(p, repl, target);
}

// ---------------------------------------------------------------- BV structure

DarbouxPairing::DarbouxPairing(ContextPtr ctx, std::vector<std::pair<std::size_t, std::size_t>> pairs)
    : ctx_(std::move(ctx)), pairs_(std::move(pairs)) {
    std::vector<int> seen(ctx_->size(), 0);
    for (auto [x, xi] : pairs_) {
        if (x >= ctx_->size() || xi >= ctx_->size()) throw std::invalid_argument("pairing index out of range");
        if (ctx_->var(x).degree + ctx_->var(xi).degree != -1)
            throw std::invalid_argument("Darboux pair " + ctx_->var(x).name + "," + ctx_->var(xi).name +
                                        " does not have degree sum -1");
        ++seen[x];
        ++seen[xi];
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] == 0) throw std::invalid_argument("unpaired variable in context: " + ctx_->var(i).name);
        if (seen[i] > 1) throw std::invalid_argument("variable paired twice: " + ctx_->var(i).name);
    }
}

DarbouxPairing DarbouxPairing::by_names(ContextPtr ctx, const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (const auto& [a, b] : pairs) idx.emplace_back(ctx->index(a), ctx->index(b));
    return DarbouxPairing(std::move(ctx), std::move(idx));
}

namespace {

void check_pairing(const GradedPolynomial& p, const DarbouxPairing& w) {
    if (!p.context()->same_as(*w.context())) throw std::invalid_argument("pairing over a different context");
}

}  // namespace

GradedPolynomial poisson_bracket(const GradedPolynomial& p, const GradedPolynomial& q, const DarbouxPairing& w) {
    check_pairing(p, w);
    check_pairing(q, w);
    GradedPolynomial r(p.context(), std::min(p.truncation(), q.truncation()));
    for (auto [x, xi] : w.pairs()) {
        GradedPolynomial px = derive(p, x, Side::right);
        if (!px.is_zero()) r += multiply(px, derive(q, xi, Side::left));
        GradedPolynomial pxi = derive(p, xi, Side::right);
        if (!pxi.is_zero()) r -= multiply(pxi, derive(q, x, Side::left));
    }
    return r;
}

GradedPolynomial bv_laplacian(const GradedPolynomial& p, const DarbouxPairing& w) {
    check_pairing(p, w);
    GradedPolynomial r(p.context(), p.truncation());
    for (auto [x, xi] : w.pairs()) {
        GradedPolynomial t = derive(derive(p, xi, Side::left), x, Side::left);
        if (p.context()->odd(x)) t *= Rational(-1);
        r += t;
    }
    return r;
}

GradedPolynomial qme_residual(const GradedPolynomial& s, const DarbouxPairing& w, int h_order) {
    auto bad = s.monomials_of_degree_other_than(0);
    if (!bad.empty()) {
        std::string msg = "action is not of ghost degree 0; offending monomials:";
        for (const auto& m : bad) {
            GradedPolynomial one(s.context(), 1);
            one.add_term(m, Rational(1));
            msg += " " + one.to_string();
        }
        throw std::invalid_argument(msg);
    }
    if (s.truncation() < h_order) throw std::invalid_argument("action truncation below requested h order");
    GradedPolynomial st = s.truncated(h_order);
    GradedPolynomial r = poisson_bracket(st, st, w) * Rational(1, 2);
    r += bv_laplacian(st, w).h_shift(1);
    return r.truncated(h_order);
}

GradedPolynomial canonical_step(const GradedPolynomial& s, const GradedPolynomial& r, const DarbouxPairing& w,
                                const Rational& eps, int h_order) {
    if (!r.is_zero()) {
        auto bad = r.monomials_of_degree_other_than(-1);
        if (!bad.empty()) throw std::invalid_argument("canonical generator must have ghost degree -1");
    }
    GradedPolynomial st = s.truncated(h_order), rt = r.truncated(h_order);
    GradedPolynomial delta = poisson_bracket(st, rt, w) + bv_laplacian(rt, w).h_shift(1);
    return st + delta * eps;
}

}  // namespace bvlab::graded

namespace bvlab::graded {

ActionFile ActionFile::parse(const std::string& text) {
    std::istringstream in(text);
    std::vector<GradedVariable> vars;
    ActionFile af;
    std::vector<std::string> s_lines, r_lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + why);
        };
        std::string rest;
        std::getline(ls, rest);
        std::istringstream rs(rest);
        if (tag == "var") {
            GradedVariable v;
            if (!(rs >> v.name >> v.degree)) fail("var needs a name and a degree");
            vars.push_back(v);
        } else if (tag == "pair") {
            std::string x, xi;
            if (!(rs >> x >> xi)) fail("pair needs two names");
            af.pairs.emplace_back(x, xi);
        } else if (tag == "truncation") {
            if (!(rs >> af.truncation) || af.truncation < 1) fail("bad truncation");
        } else if (tag == "S") {
            s_lines.push_back(rest);
        } else if (tag == "R") {
            r_lines.push_back(rest);
        } else if (tag == "eps") {
            std::string q;
            if (!(rs >> q)) fail("eps needs a value");
            af.eps = parse_rational(q);
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    af.ctx = make_context(vars);
    (void)af.pairing();  // validates the pairs
    af.s = GradedPolynomial(af.ctx, af.truncation);
    af.r = GradedPolynomial(af.ctx, af.truncation);
    for (const auto& l : s_lines) af.s += GradedPolynomial::parse(af.ctx, l, af.truncation);
    for (const auto& l : r_lines) af.r += GradedPolynomial::parse(af.ctx, l, af.truncation);
    return af;
}

std::string ActionFile::to_text() const {
    std::ostringstream out;
    for (const auto& v : ctx->vars()) out << "var " << v.name << ' ' << v.degree << '\n';
    for (const auto& [x, xi] : pairs) out << "pair " << x << ' ' << xi << '\n';
    out << "truncation " << truncation << '\n';
    out << "S " << s.to_string() << '\n';
    if (!r.is_zero()) {
        out << "R " << r.to_string() << '\n';
        out << "eps " << bvlab::to_string(eps) << '\n';
    }
    return out.str();
}

}  // namespace bvlab::graded
