#pragma once

#include "bvlab/graded_poly.hpp"
#include "bvlab/homotopy.hpp"
#include "bvlab/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace bvlab::cellular {

using Face = std::vector<int>;  // increasing vertex labels

// Faces of the standard n-simplex ordered by dimension, then lexicographically.
std::vector<Face> faces(int n);
std::string face_name(const Face& f);  // "0", "01", "012"

// Polynomial differential forms on the n-simplex in the chart t_1..t_n (t_0 = 1 - sum t_i).
// Stored as graded polynomials in t_1..t_n (even) and dt_1..dt_n (odd, degree 1).
graded::ContextPtr form_context(int n);

class PolyForm {
public:
    PolyForm() = default;
    explicit PolyForm(int n);
    PolyForm(int n, graded::GradedPolynomial p);

    static PolyForm t(int n, int i);   // barycentric coordinate, i = 0..n
    static PolyForm dt(int n, int i);
    static PolyForm constant(int n, const Rational& c);
    // t^a dt_I in the chart, a has n entries, mask selects dt_1..dt_n
    static PolyForm monomial(int n, const std::vector<int>& a, unsigned mask);

    int dim() const { return n_; }
    const graded::GradedPolynomial& poly() const { return p_; }
    bool is_zero() const { return p_.is_zero(); }
    int max_poly_degree() const;

    PolyForm operator+(const PolyForm& o) const;
    PolyForm operator-(const PolyForm& o) const;
    PolyForm operator*(const Rational& s) const;
    friend bool operator==(const PolyForm& a, const PolyForm& b) { return a.n_ == b.n_ && a.p_ == b.p_; }
    std::string to_string() const { return p_.to_string(); }

private:
    int n_ = 0;
    graded::GradedPolynomial p_;
};

PolyForm wedge(const PolyForm& a, const PolyForm& b);
PolyForm exterior_d(const PolyForm& a);

// chi = sum_j (-1)^j t_{i_j} dt_{i_0} ... ^ ... dt_{i_k}
PolyForm whitney_chi(const Face& face, int n);
// k! chi: integrates to 1 over its own face; this is iota(e_face)
PolyForm whitney(const Face& face, int n);
// integral of the pullback to the face (orientation from the vertex order); 0 on degree mismatch
Rational poincare(const PolyForm& form, const Face& face);
// phi_j = pi_* h_j^*, fiber integral over u in [0, 1] with du placed first
PolyForm dupont_phi(const PolyForm& form, int j);
// K = sum_{k < n} sum_{i_0 < ... < i_k} chi_{i_0...i_k} ^ phi_{i_0} ... phi_{i_k} (phi_{i_k} applied first)
PolyForm dupont(const PolyForm& form);
// iota p
PolyForm whitney_projection(const PolyForm& form);

// all chart monomials with polynomial degree <= max_degree
std::vector<PolyForm> monomial_forms(int n, int max_degree);
// dK + Kd = id - iota p, K^2 = 0, K iota = 0, p K = 0, p iota = id on the spanning set
homotopy::Report check_dupont(int n, int max_degree);

// Lie algebra used for coefficients: a DgLaData with zero differential, all degrees 0.
// Superfields for C(Delta^n) (x) g use basis names <lie>_<face>.
std::vector<homotopy::BasisElement> simplex_basis(const homotopy::DgLaData& lie, int n);

// Tree part of the effective action on the n-simplex, from Whitney/Poincare/Dupont
// induction data: all B_sigma terms, leaves <= max_leaves.
graded::GradedPolynomial simplex_tree_action(const homotopy::DgLaData& lie, int n, int max_leaves);

struct BuildingBlock {
    int n = 0;
    int max_leaves = 0;
    // tree classes: leaves W_e, vertices wedge (left ^ right), internal edges -K, root integral
    // over the simplex, times 1/|Aut|; one planar representative with children ordered by key,
    // e.g. "((01,02),01)"
    std::map<std::string, Rational> tree;
    // coefficient of each trace polynomial in the local one-loop part (1/|Aut| included);
    // keys like "tr(01,01)" or "tr([0,012],01)"
    std::map<std::string, Rational> loop;
    bool loop_solved = false;        // QME constraints admit a solution in the ansatz
    std::size_t loop_free = 0;       // dimension of the solution space of the ansatz
    graded::GradedPolynomial action;  // local block over the superfield context of simplex_basis
    std::string to_json() const;
};
// n in {0, 1, 2}; the one-loop part is constrained by the QME of the simplex action in A-degree
// <= max_leaves (trees are built one leaf further for this), loop_free counts what stays open.
BuildingBlock building_block(const homotopy::DgLaData& lie, int n, int max_leaves);

// Interval block read against F(x) = (x/2) coth(x/2) and G(x) = log(sinh(x/2)/(x/2)).
struct IntervalSeries {
    std::vector<Rational> f;          // coefficient of x^{2k}, k = 0..order
    std::vector<Rational> g;          // coefficient of x^{2k}, k = 1..order (g[0] = 0)
    std::vector<Rational> g_trace;    // same from the truncated supertrace, k <= 2
    bool odd_terms_vanish = true;
    int trace_degree = 0;             // polynomial truncation at which the trace stabilized
};
IntervalSeries interval_series(int order);
std::vector<Rational> bernoulli_f(int order);  // B_2k / (2k)!
std::vector<Rational> bernoulli_g(int order);  // B_2k / (2k (2k)!)

struct CellComplex1D {
    std::vector<std::string> vertices;
    struct Edge {
        std::string name;
        int from = 0, to = 0;
    };
    std::vector<Edge> edges;

    static CellComplex1D parse(const std::string& text);  // "vertex v", "edge e v w"
    static CellComplex1D polygon(int n);                  // v0..v_{n-1}, e_i = (v_i, v_{i+1})
    std::string to_text() const;
    bool is_circle() const;
};

// Cochains C(X) (x) g with basis <lie>_<cell> (vertices degree 0, edges degree 1).
homotopy::DgLaData cochain_complex(const CellComplex1D& x, const homotopy::DgLaData& lie);
// S_X = sum over cells of the building blocks
graded::GradedPolynomial assemble(const CellComplex1D& x, const homotopy::DgLaData& lie, int max_leaves);

// Induction data C(X) -> H(S^1): iota(H0) = sum of vertices, iota(H1) = first edge,
// p = (value at the first vertex, sum over edges), K from the path v0 -> v1 -> ...
homotopy::InductionData circle_induction(const CellComplex1D& x, const homotopy::DgLaData& lie);

struct CircleReport {
    homotopy::TransferResult result;
    graded::GradedPolynomial expected;  // <B0, [A0,A0]/2> + <B1, [A1, A0]> + h tr G(ad A1)
    std::vector<int> classical_mismatch;  // A-degrees where the classical part differs
    std::vector<int> quantum_mismatch;    // A-degrees where the quantum part differs
    bool qme_ok = false;                  // QME of the assembled action below max_leaves
};
CircleReport circle_effective(const CellComplex1D& x, const homotopy::DgLaData& lie, int max_leaves);

// tr_g (ad X)^k as a polynomial in the components of X (variables given by index)
graded::GradedPolynomial trace_ad_power(const homotopy::DgLaData& lie, const graded::ContextPtr& ctx,
                                        const std::vector<std::size_t>& vars, int k);

}  // namespace bvlab::cellular
