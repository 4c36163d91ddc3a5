#pragma once

#include "bvlab/graded_poly.hpp"
#include "bvlab/rational.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace bvlab::homotopy {

struct BasisElement {
    std::string name;
    int degree = 0;
};

// d e_b = sum_a d[a][b] e_a,  [e_b, e_c] = sum_a f(a, b, c) e_a
struct DgLaData {
    std::vector<BasisElement> basis;
    RMatrix d;
    std::map<std::tuple<int, int, int>, Rational> f;  // every ordered (b, c) stored

    std::size_t dim() const { return basis.size(); }
    int degree(int a) const { return basis[a].degree; }
    Rational bracket(int a, int b, int c) const;
    // sets f(a,b,c) and the graded-antisymmetric partner f(a,c,b)
    void set_bracket(int a, int b, int c, const Rational& v);
    int index(const std::string& name) const;

    static DgLaData parse(const std::string& text);
    std::string to_text() const;
};

struct Report {
    bool ok = true;
    std::vector<std::string> failures;
    void fail(const std::string& what);
};

// d^2 = 0, degrees, graded antisymmetry, Leibniz, Jacobi, Str ad(x) = 0
Report check_dgla(const DgLaData& v);

// Variables A_<name> (degree 1 - |a|) then B_<name> (degree |a| - 2); Darboux pairs (A_a, B_a).
graded::ContextPtr superfield_context(const std::vector<BasisElement>& basis);
graded::DarbouxPairing superfield_pairing(const graded::ContextPtr& ctx);
// S = sum B_a d^a_b A^b + 1/2 sum (-1)^{(|b|+1)|c|} f^a_{bc} B_a A^b A^c, truncation 2 (h^0, h^1)
graded::GradedPolynomial build_bf_action(const DgLaData& v);

struct InductionData {
    std::vector<BasisElement> target;  // basis of V'
    RMatrix iota;                      // dim V x dim V'
    RMatrix p;                         // dim V' x dim V
    RMatrix k;                         // dim V x dim V

    static InductionData parse(const std::string& text, const DgLaData& v);
    static InductionData identity(const DgLaData& v);
    std::string to_text(const DgLaData& v) const;
};

// d' = p d iota
RMatrix induced_differential(const DgLaData& v, const InductionData& data);
// chain maps, p iota = id, dK + Kd = id - iota p, K^2 = 0, K iota = 0, p K = 0, degrees
Report validate_induction(const DgLaData& v, const InductionData& data);

struct HodgeSplit {
    std::vector<std::vector<Rational>> retract, exact, coexact;  // bases of iota(V'), d(V''), K(V'')
};
HodgeSplit hodge_split(const DgLaData& v, const InductionData& data);

// Unimodular L-infinity structure in the convention of the action itself:
// S = sum_a B_a Lambda^a(A) + h rho(A). The operation l_n is the degree-n part of Lambda,
// q_n the degree-n part of rho.
struct ULInfinityStructure {
    std::vector<BasisElement> basis;
    graded::ContextPtr ctx;                   // superfield context of basis
    std::vector<graded::GradedPolynomial> lambda;  // per output index, polynomials in the A variables
    graded::GradedPolynomial rho;
    int max_order = 0;

    static ULInfinityStructure from_dgla(const DgLaData& v);
    // reads the operations off an action of BF-infinity form; throws when S is not of that form
    static ULInfinityStructure from_action(const std::vector<BasisElement>& basis, const graded::GradedPolynomial& s,
                                           int max_order);
    graded::GradedPolynomial action() const;  // truncation 2

    struct Entry {
        int out = -1;          // -1 for q_n
        std::vector<int> in;   // nondecreasing input indices
        Rational value;        // coefficient of the canonical monomial A^{in_1}...A^{in_n}
    };
    std::vector<Entry> l(int n) const;
    std::vector<Entry> q(int n) const;
    // bracket recovered from l_2: [e_b, e_c] components, undoing the sign (-1)^{(|b|+1)|c|}
    Rational bracket_from_l2(int a, int b, int c) const;
    std::string to_json() const;
};

// Relation 1: sum_a (-1)^{|a|} Lambda^a d_a Lambda^c = 0 in polynomial degree n;
// relation 2: sum_a (-1)^{|a|} (d_a Lambda^a + Lambda^a d_a rho) = 0 in degree n. Left derivatives.
Report check_ulinfty(const ULInfinityStructure& ops, int n_max);

struct TransferResult {
    graded::GradedPolynomial action;  // over superfield_context(data.target), truncation 2
    ULInfinityStructure ops;
};

// Graph organization: rooted binary tree shapes and cyclic words of trees, weighted by 1/|Aut|.
TransferResult transfer(const DgLaData& v, const InductionData& data, int max_leaves);
// Resummed form: alpha = iota A' - K(Lambda_{>=2}(alpha)), S' = <B', p Lambda(alpha)> +
// h (rho(alpha) + Str_V log(1 + K D Lambda_{>=2}(alpha))), Str_V with the parity of V.
// Accepts uL-infinity input.
TransferResult transfer_recursive(const ULInfinityStructure& v, const RMatrix& d, const InductionData& data,
                                  int max_leaves);

// Fiber BV integral over the Lagrangian im K + im K^*, by Wick contraction of graded
// polynomials (no graph organization). Input is any action on the superfield context of V.
graded::GradedPolynomial pushforward_oracle(const std::vector<BasisElement>& basis, const graded::GradedPolynomial& s,
                                            const DgLaData& v, const InductionData& data, int max_leaves);

// Degree-n component of a polynomial in the A variables; n < 0 keeps everything.
graded::GradedPolynomial truncate_leaves(const graded::GradedPolynomial& p, int max_leaves);

// Built-in fixtures.
DgLaData so3();
DgLaData affine2();  // [e, h] = e, not unimodular
DgLaData random_unimodular6(unsigned seed);
// graded commutative dg algebra: a.b = sum_c prod(c, a, b) e_c, every ordered pair stored
struct Cdga {
    std::vector<BasisElement> basis;
    RMatrix d;
    std::map<std::tuple<int, int, int>, Rational> prod;
};
// g (x) A with g in degree 0: [x (x) a, y (x) b] = [x, y] (x) ab; basis names x_a
DgLaData tensor(const DgLaData& lie, const Cdga& a);
// (iota, p, K) on A extended by the identity of g
InductionData tensor_induction(const DgLaData& lie, const Cdga& a, const InductionData& on_a);
struct Fixture {
    std::string name;
    DgLaData v;
    InductionData data;
};
// three toy models with nontrivial K, plus a subalgebra case
std::vector<Fixture> toy_fixtures();
Fixture subalgebra_fixture();

}  // namespace bvlab::homotopy
