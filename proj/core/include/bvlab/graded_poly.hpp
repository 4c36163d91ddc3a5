#pragma once

#include "bvlab/rational.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bvlab::graded {

struct GradedVariable {
    std::string name;
    int degree = 0;  // ghost number
    bool is_odd() const { return degree % 2 != 0; }
};

class VariableContext {
public:
    explicit VariableContext(std::vector<GradedVariable> vars);

    std::size_t size() const { return vars_.size(); }
    const GradedVariable& var(std::size_t i) const { return vars_.at(i); }
    const std::vector<GradedVariable>& vars() const { return vars_; }
    bool odd(std::size_t i) const { return odd_[i]; }
    std::optional<std::size_t> find(const std::string& name) const;
    std::size_t index(const std::string& name) const;  // throws on unknown name

    bool same_as(const VariableContext& other) const;

private:
    std::vector<GradedVariable> vars_;
    std::vector<bool> odd_;
    std::map<std::string, std::size_t> by_name_;
};

using ContextPtr = std::shared_ptr<const VariableContext>;

ContextPtr make_context(std::vector<GradedVariable> vars);

// Truncated power series in the formal parameter h = -i*hbar.
// Stores c_0 .. c_{T-1}; anything at order >= T is unknown and dropped.
class FormalSeries {
public:
    explicit FormalSeries(int truncation = 1);
    static FormalSeries constant(const Rational& c, int truncation);
    static FormalSeries monomial(const Rational& c, int power, int truncation);

    int truncation() const { return static_cast<int>(c_.size()); }
    const Rational& coeff(int k) const;
    void add(int k, const Rational& c);
    bool is_zero() const;
    int lowest_order() const;  // truncation() when zero

    FormalSeries truncated(int t) const;
    FormalSeries operator-() const;
    FormalSeries& operator+=(const FormalSeries& o);
    FormalSeries& operator-=(const FormalSeries& o);
    FormalSeries& operator*=(const Rational& s);
    friend FormalSeries operator*(const FormalSeries& a, const FormalSeries& b);
    friend bool operator==(const FormalSeries& a, const FormalSeries& b);

private:
    std::vector<Rational> c_;
};

// exponent vector in the context order; odd entries are 0/1
using Monomial = std::vector<std::uint8_t>;

enum class Side { left, right };

class GradedPolynomial {
public:
    GradedPolynomial() = default;
    GradedPolynomial(ContextPtr ctx, int truncation);

    static GradedPolynomial constant(ContextPtr ctx, const Rational& c, int truncation);
    static GradedPolynomial variable(ContextPtr ctx, std::size_t idx, int truncation);
    static GradedPolynomial variable(ContextPtr ctx, const std::string& name, int truncation);

    const ContextPtr& context() const { return ctx_; }
    int truncation() const { return trunc_; }
    const std::map<Monomial, FormalSeries>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    // Adds c * h^power * m, where m is already in canonical order.
    void add_term(const Monomial& m, const Rational& c, int power = 0);
    void add_term(const Monomial& m, const FormalSeries& s);

    Rational coefficient(const Monomial& m, int power = 0) const;

    int ghost_degree(const Monomial& m) const;
    static int polynomial_degree(const Monomial& m);
    // ghost degree if every term has the same one; nullopt otherwise (or when zero)
    std::optional<int> homogeneous_degree() const;
    std::vector<Monomial> monomials_of_degree_other_than(int deg) const;
    bool parity_odd() const;  // requires homogeneity

    GradedPolynomial truncated(int t) const;
    // keep terms with lo <= polynomial_degree <= hi
    GradedPolynomial filter_polynomial_degree(int lo, int hi) const;
    // coefficient polynomial of h^k (as a truncation-1 polynomial)
    GradedPolynomial h_component(int k) const;
    GradedPolynomial h_shift(int k) const;  // multiply by h^k

    GradedPolynomial operator-() const;
    GradedPolynomial& operator+=(const GradedPolynomial& o);
    GradedPolynomial& operator-=(const GradedPolynomial& o);
    GradedPolynomial& operator*=(const Rational& s);
    friend GradedPolynomial operator+(GradedPolynomial a, const GradedPolynomial& b) { return a += b; }
    friend GradedPolynomial operator-(GradedPolynomial a, const GradedPolynomial& b) { return a -= b; }
    friend GradedPolynomial operator*(GradedPolynomial a, const Rational& s) { return a *= s; }
    friend GradedPolynomial operator*(const Rational& s, GradedPolynomial a) { return a *= s; }
    friend bool operator==(const GradedPolynomial& a, const GradedPolynomial& b);

    std::string to_string() const;
    static GradedPolynomial parse(ContextPtr ctx, const std::string& text, int truncation);

private:
    void check_context(const GradedPolynomial& o) const;
    ContextPtr ctx_;
    int trunc_ = 1;
    std::map<Monomial, FormalSeries> terms_;

    friend GradedPolynomial multiply(const GradedPolynomial& p, const GradedPolynomial& q);
};

GradedPolynomial multiply(const GradedPolynomial& p, const GradedPolynomial& q);
inline GradedPolynomial operator*(const GradedPolynomial& p, const GradedPolynomial& q) { return multiply(p, q); }
GradedPolynomial power(const GradedPolynomial& p, int n);

GradedPolynomial derive(const GradedPolynomial& p, std::size_t var, Side side);
GradedPolynomial derive(const GradedPolynomial& p, const std::string& var, Side side);

// Replace each variable i with repl[i] when set. Replacements must have the parity of the
// variable they replace; the product order of the monomial is kept.
GradedPolynomial substitute(const GradedPolynomial& p, const std::vector<std::optional<GradedPolynomial>>& repl,
                            const ContextPtr& target);

// Carry p into a larger context; names must exist in target.
GradedPolynomial embed(const GradedPolynomial& p, const ContextPtr& target);

// Sign of reordering a product of monomial factors into canonical order, and the merged
// monomial; sign 0 when an odd variable repeats.
int monomial_product(const VariableContext& ctx, const Monomial& a, const Monomial& b, Monomial& out);

class DarbouxPairing {
public:
    // pairs (x, xi) with deg x + deg xi = -1; every context variable in exactly one pair
    DarbouxPairing(ContextPtr ctx, std::vector<std::pair<std::size_t, std::size_t>> pairs);
    static DarbouxPairing by_names(ContextPtr ctx, const std::vector<std::pair<std::string, std::string>>& pairs);

    const ContextPtr& context() const { return ctx_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

private:
    ContextPtr ctx_;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// {f,g} = sum_i f (d<_x d>_xi - d<_xi d>_x) g
GradedPolynomial poisson_bracket(const GradedPolynomial& p, const GradedPolynomial& q, const DarbouxPairing& w);
// Delta = sum_i (-1)^{|x_i|} d/dx_i d/dxi_i, left derivatives, xi first
GradedPolynomial bv_laplacian(const GradedPolynomial& p, const DarbouxPairing& w);
// 1/2 {S,S} + h Delta S, truncated at h_order; throws on inhomogeneous S
GradedPolynomial qme_residual(const GradedPolynomial& s, const DarbouxPairing& w, int h_order);
// S + eps ({S,R} + h Delta R)
GradedPolynomial canonical_step(const GradedPolynomial& s, const GradedPolynomial& r, const DarbouxPairing& w,
                                const Rational& eps, int h_order);

// Action file: "var <name> <degree>", "pair <x> <xi>", "truncation <T>", "S <poly>",
// optional "R <poly>" and "eps <q>" for a canonical step. Several S or R lines are summed.
struct ActionFile {
    ContextPtr ctx;
    std::vector<std::pair<std::string, std::string>> pairs;
    int truncation = 2;
    GradedPolynomial s, r;
    Rational eps = 1;

    DarbouxPairing pairing() const { return DarbouxPairing::by_names(ctx, pairs); }
    static ActionFile parse(const std::string& text);
    std::string to_text() const;
};

}  // namespace bvlab::graded
