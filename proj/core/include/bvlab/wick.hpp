#pragma once

#include "bvlab/feyngraph.hpp"
#include "bvlab/graded_poly.hpp"
#include "bvlab/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace bvlab::wick {

// a + b i with exact rational parts; Fresnel weights only ever need powers of i
struct QI {
    Rational re = 0, im = 0;
    QI() = default;
    QI(const Rational& r) : re(r) {}  // NOLINT(google-explicit-constructor)
    QI(const Rational& r, const Rational& i) : re(r), im(i) {}
    static QI i_power(int k);
    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    QI& operator+=(const QI& o);
    QI& operator-=(const QI& o);
    friend QI operator+(QI a, const QI& b) { return a += b; }
    friend QI operator-(QI a, const QI& b) { return a -= b; }
    friend QI operator*(const QI& a, const QI& b);
    friend bool operator==(const QI& a, const QI& b) { return a.re == b.re && a.im == b.im; }
    std::string to_string() const;
};

enum class Kind { even, odd };

struct QuadraticData {
    Kind kind = Kind::even;
    RMatrix q;
    RMatrix inv;
    std::size_t dim() const { return q.size(); }
    // throws std::invalid_argument on symmetry violation, std::domain_error when singular
    static QuadraticData make(RMatrix q, Kind kind);
};

// Sparse tensor stored with every index order expanded; entries symmetrized (even) or
// antisymmetrized (odd) on ingest. Mixed tensors: the first `even_rank` slots are symmetric,
// the remaining ones antisymmetric.
class SparseTensor {
public:
    SparseTensor() = default;
    SparseTensor(int even_rank, int odd_rank);
    int even_rank() const { return even_; }
    int odd_rank() const { return odd_; }
    int rank() const { return even_ + odd_; }
    // sets value for idx and all permutations allowed by the symmetry type
    void set(const std::vector<int>& idx, const Rational& value);
    Rational at(const std::vector<int>& idx) const;
    const std::map<std::vector<int>, Rational>& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

private:
    int even_ = 0, odd_ = 0;
    std::map<std::vector<int>, Rational> entries_;
};

struct PerturbationTerm {
    std::string coupling;  // name of g
    SparseTensor tensor;   // enters as g/(j! k!) P_{jk}
};

struct Perturbation {
    std::vector<PerturbationTerm> terms;
    std::vector<std::string> couplings() const;  // distinct names in first-seen order
};

// Truncated multivariate series in coupling constants, coefficients in Q[i].
struct Series {
    std::vector<std::string> vars;
    int order = 0;  // keep monomials of total degree <= order
    std::map<std::vector<int>, QI> c;

    Series() = default;
    Series(std::vector<std::string> v, int ord) : vars(std::move(v)), order(ord) {}
    static Series one(std::vector<std::string> v, int ord);
    QI coeff(const std::vector<int>& e) const;
    void add(const std::vector<int>& e, const QI& x);
    Series& operator+=(const Series& o);
    friend Series operator*(const Series& a, const Series& b);
    friend bool operator==(const Series& a, const Series& b);
    std::string to_string() const;
};

Series series_exp(const Series& s);  // requires zero constant term
Series series_log(const Series& s);  // requires constant term 1; throws std::domain_error otherwise
Series series_inverse(const Series& s);  // requires constant term 1

// Wick's lemma by explicit enumeration of perfect matchings (with signs for odd kind).
Rational wick_moment(const QuadraticData& q, const std::vector<int>& indices);
// Same moment grouped by multiplicities (even kind only), memoized; used by the oracles.
Rational gaussian_moment(const QuadraticData& q, const std::vector<int>& exponents);

// One graph contribution Phi(Gamma)/|Aut|.
struct GraphTerm {
    feyn::Graph graph;
    std::uint64_t aut = 1;
    std::vector<int> vertex_counts;  // per perturbation term
    QI weight;                       // Phi / |Aut|, including coupling-free factors
};

// An observable is a sum of homogeneous pieces, each entering as (1/d!) Psi_d.
using Observable = std::vector<SparseTensor>;

struct ExpectationOptions {
    bool fresnel = false;         // factor i on edges and neutral vertices
    bool connected_only = false;  // connected graphs only (log of the full sum)
    int cap_half_edges = 16;
};

// Sum over graphs of Phi/|Aut| with vertices g_d P_d (even Gaussian or Fresnel).
Series perturbative_expectation(const QuadraticData& q, const Perturbation& p, int order,
                                const ExpectationOptions& opts = {});
std::vector<GraphTerm> graph_terms(const QuadraticData& q, const Perturbation& p, int order,
                                   const ExpectationOptions& opts = {});
// All graphs with exactly counts[t] vertices carrying neutral[t] and one vertex per entry of
// `marked` (colors after the neutral ones), any components allowed unless opts.connected_only.
std::vector<GraphTerm> graphs_for_counts(const QuadraticData& q, const std::vector<SparseTensor>& neutral,
                                         const std::vector<int>& counts, const std::vector<SparseTensor>& marked,
                                         const ExpectationOptions& opts = {});
// Oracle: expand e^p and apply the moment termwise. With fresnel set, every term of a
// coupling monomial with V vertices and E contractions gets i^{V+E}.
Series perturbative_expectation_oracle(const QuadraticData& q, const Perturbation& p, int order,
                                       bool fresnel = false);
// <e^p Psi_1...Psi_r> / <e^p> by the oracle, truncated at `order`.
Series observables_oracle(const QuadraticData& q, const Perturbation& p, const std::vector<Observable>& obs,
                          int order);
// Normalized <Psi_1...Psi_r> under the perturbed measure via colored graphs where every
// component touches an observable.
Series expectation_with_observables(const QuadraticData& q, const Perturbation& p,
                                    const std::vector<Observable>& obs, int order,
                                    const ExpectationOptions& opts = {});
// Series for e^{1/2 Q^{-1}(d,d)} e^{p} at x=0, by iterated differentiation.
Series exp_operator_form(const QuadraticData& q, const Perturbation& p, int order);

// hbar-expansion of the normalized integral of e^{(-Q/2 + p)/hbar}; p has degrees >= 3 only
// and no couplings. full[k] is the hbar^k coefficient of sum_Gamma hbar^{-chi} Phi/|Aut|,
// connected[k] the hbar^k coefficient of sum_gamma hbar^{loops-1} Phi/|Aut|.
struct LoopExpansion {
    std::vector<Rational> full;
    std::vector<Rational> connected;
};
LoopExpansion loop_expansion(const QuadraticData& q, const std::vector<SparseTensor>& p, int hbar_order);

// Pfaffian by signed matching expansion; 0 for odd size.
Rational pfaffian(const RMatrix& a);
Rational determinant_cofactor(const RMatrix& a);

// Integral over D theta_n ... D theta_1 (vars listed as theta_1..theta_n): iterated left derivatives
// d_{theta_n} ... d_{theta_1}; remaining variables survive.
graded::GradedPolynomial berezin_integrate(const graded::GradedPolynomial& f, const std::vector<std::string>& vars);
// Integral of e^{B(thetabar,theta)} over (D theta_n D thetabar_n)...(D theta_1 D thetabar_1)
Rational det_via_pairs(const RMatrix& b);
// Integral of e^{Q(theta,theta)/2} over D theta_n ... D theta_1
Rational berezin_gaussian(const RMatrix& q);

struct PolygonCheck {
    std::vector<Rational> graph_side;  // det(-B) exp(-sum a^k/k tr(B^-1 P)^k), Taylor coefficients
    std::vector<Rational> direct;      // Taylor coefficients of det(-B + a P)
    bool agree = false;
};
PolygonCheck polygon_series(const RMatrix& b, const RMatrix& p, int order);

// sdet [[A,B],[C,D]] = det(A - B D^-1 C) / det D
Rational sdet(const RMatrix& a, const RMatrix& b, const RMatrix& c, const RMatrix& d);

// Superspace data: even Gaussian q_e, odd Gaussian q_o (antisymmetric), mixed vertices P_{jk}
// with k even.
struct SuperQuadraticData {
    QuadraticData even, odd;
    Perturbation p;  // tensors with even_rank j over even indices and odd_rank k over odd indices
};
Series super_perturbative(const SuperQuadraticData& s, int order, std::vector<GraphTerm>* terms = nullptr,
                          int cap_half_edges = 16);
Series super_perturbative_oracle(const SuperQuadraticData& s, int order);

// Text formats: "Q i j num/den" and "P d i1 ... id num/den"; the degree-d coupling is named g<d>.
struct ProblemFile {
    RMatrix q;
    Perturbation p;
};
ProblemFile parse_problem(const std::string& text, Kind kind);
// upper triangle of Q, one sorted index tuple per tensor entry
std::string problem_to_text(const ProblemFile& pf);

}  // namespace bvlab::wick
