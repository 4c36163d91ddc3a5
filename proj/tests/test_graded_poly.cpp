#include "doctest.h"
#include "random_poly.hpp"

#include "bvlab/graded_poly.hpp"

using namespace bvlab;
using namespace bvlab::graded;
using bvlab::testing::random_poly;

namespace {

Rational sg(int e) { return Rational(sign_pow(e)); }

}  // namespace

TEST_CASE("Koszul signs of the product") {
    auto c = make_context({{"x", 0}, {"t1", 1}, {"t2", 1}});
    auto x = GradedPolynomial::variable(c, "x", 1);
    auto t1 = GradedPolynomial::variable(c, "t1", 1);
    auto t2 = GradedPolynomial::variable(c, "t2", 1);
    CHECK(t2 * t1 == -(t1 * t2));
    CHECK((t1 * t1).is_zero());
    CHECK((x + t1 * t2) * x == x * x + x * (t1 * t2));
    CHECK((t2 * t1).to_string() == "-1/1*h^0*t1*t2");
}

TEST_CASE("derivatives") {
    auto c = make_context({{"x", 0}, {"t1", 1}, {"t2", 1}});
    auto x = GradedPolynomial::variable(c, "x", 1);
    auto t1 = GradedPolynomial::variable(c, "t1", 1);
    auto t2 = GradedPolynomial::variable(c, "t2", 1);
    auto one = GradedPolynomial::constant(c, 1, 1);
    CHECK(derive(t1 * t2, "t1", Side::left) == t2);
    CHECK(derive(t1 * t2, "t2", Side::left) == -t1);
    CHECK(derive(t1 * t2, "t2", Side::right) == t1);
    CHECK(derive(x * x * t1, "x", Side::left) == Rational(2) * (x * t1));
    CHECK(derive(t1, "t1", Side::left) == one);
    CHECK(derive(t1, "t1", Side::right) == one);
    CHECK_THROWS(derive(x, "nope", Side::left));
}

TEST_CASE("algebra laws on random polynomials") {
    std::mt19937 rng(11);
    auto c = bvlab::testing::four_pair_context();
    std::uniform_int_distribution<int> dg(-3, 3);
    std::uniform_int_distribution<int> vi(0, static_cast<int>(c->size()) - 1);
    for (int it = 0; it < 60; ++it) {
        int dp = dg(rng), dq = dg(rng), dr = dg(rng);
        auto p = random_poly(rng, c, dp, 3), q = random_poly(rng, c, dq, 3), r = random_poly(rng, c, dr, 2);
        CHECK(p * q == sg(dp * dq) * (q * p));
        CHECK((p * q) * r == p * (q * r));
        const std::size_t v = vi(rng);
        const int dv = c->var(v).degree;
        // d_left(pq) = d(p) q + (-1)^{|v||p|} p d(q)
        CHECK(derive(p * q, v, Side::left) ==
              derive(p, v, Side::left) * q + sg(dv * dp) * (p * derive(q, v, Side::left)));
        // d_right(pq) = p d(q) + (-1)^{|v||q|} d(p) q
        CHECK(derive(p * q, v, Side::right) ==
              p * derive(q, v, Side::right) + sg(dv * dq) * (derive(p, v, Side::right) * q));
    }
}

TEST_CASE("bracket and Laplacian examples") {
    auto c = make_context({{"x", 0}, {"xi", -1}});
    auto w = DarbouxPairing::by_names(c, {{"x", "xi"}});
    auto x = GradedPolynomial::variable(c, "x", 1);
    auto xi = GradedPolynomial::variable(c, "xi", 1);
    auto one = GradedPolynomial::constant(c, 1, 1);
    CHECK(poisson_bracket(x, xi, w) == one);
    CHECK(poisson_bracket(x * x, xi, w) == Rational(2) * x);
    CHECK(poisson_bracket(x, x, w).is_zero());
    CHECK(bv_laplacian(x * xi, w) == one);
    CHECK(bv_laplacian(x, w).is_zero());
    CHECK(bv_laplacian(xi, w).is_zero());
    CHECK(bv_laplacian(one, w).is_zero());

    auto c2 = make_context({{"x", 0}, {"xi", -1}, {"z", 0}});
    CHECK_THROWS_WITH(DarbouxPairing::by_names(c2, {{"x", "xi"}}), doctest::Contains("unpaired"));
    CHECK_THROWS(DarbouxPairing::by_names(c2, {{"x", "z"}}));
}

TEST_CASE("BV algebra identities on random polynomials") {
    std::mt19937 rng(5);
    auto c = bvlab::testing::four_pair_context();
    auto w = bvlab::testing::four_pair_pairing(c);
    std::uniform_int_distribution<int> dg(-3, 3);
    int checked = 0;
    for (int it = 0; it < 120; ++it) {
        int dp = dg(rng), dq = dg(rng), dr = dg(rng);
        auto p = random_poly(rng, c, dp, 3), q = random_poly(rng, c, dq, 3), r = random_poly(rng, c, dr, 2);
        if (p.is_zero() || q.is_zero() || r.is_zero()) continue;
        ++checked;
        auto D = [&](const GradedPolynomial& f) { return bv_laplacian(f, w); };
        auto B = [&](const GradedPolynomial& f, const GradedPolynomial& g) { return poisson_bracket(f, g, w); };
        CHECK(D(D(p)).is_zero());
        CHECK(D(p * q) - D(p) * q - sg(dp) * (p * D(q)) == sg(dp) * B(p, q));
        CHECK((B(p, q) + sg((dp + 1) * (dq + 1)) * B(q, p)).is_zero());
        CHECK(B(p, B(q, r)) == B(B(p, q), r) + sg((dp + 1) * (dq + 1)) * B(q, B(p, r)));
        CHECK(D(B(p, q)) == B(D(p), q) + sg(dp + 1) * B(p, D(q)));
        CHECK(B(p, q * r) == B(p, q) * r + sg((dp + 1) * dq) * (q * B(p, r)));
        // seven-term relation: Delta(pqr) expanded through second-order defects
        auto seven = D(p * q * r) - D(p * q) * r - sg(dp) * (p * D(q * r)) - sg((dp + 1) * dq) * (q * D(p * r)) +
                     D(p) * q * r + sg(dp) * (p * D(q) * r) + sg(dp + dq) * (p * q * D(r));
        CHECK(seven.is_zero());
        // degree of the bracket
        auto br = B(p, q);
        if (!br.is_zero()) CHECK(br.homogeneous_degree() == std::optional<int>(dp + dq + 1));
    }
    CHECK(checked > 50);
}

TEST_CASE("QME residual and canonical step") {
    auto c = make_context({{"A0", 1}, {"A1", 0}, {"B0", -2}, {"B1", -1}});
    auto w = DarbouxPairing::by_names(c, {{"A0", "B0"}, {"A1", "B1"}});
    // d: e0 -> e1, S = <B, dA> = B1 A0 (pairing (A^a, B_a))
    auto S = GradedPolynomial::parse(c, "1/1*h^0*B1*A0", 2);
    CHECK(qme_residual(S, w, 2).is_zero());
    CHECK(qme_residual(GradedPolynomial(c, 2), w, 2).is_zero());
    auto bad = GradedPolynomial::parse(c, "1/1*h^0*A0", 2);
    CHECK_THROWS_WITH(qme_residual(bad, w, 2), doctest::Contains("A0"));

    auto R0 = GradedPolynomial(c, 2);
    CHECK(canonical_step(S, R0, w, Rational(1, 3), 2) == S);
    CHECK_THROWS(canonical_step(S, S, w, 1, 2));

    // R = <B, lambda A> with lambda = scaling on e1: R = B1 A1 has degree -1
    auto R = GradedPolynomial::parse(c, "1/1*h^0*B1*A1", 2);
    auto out = canonical_step(S, R, w, Rational(1, 2), 2);
    auto expect = S + Rational(1, 2) * (poisson_bracket(S, R, w) + bv_laplacian(R, w).h_shift(1));
    CHECK(out == expect);
    CHECK(qme_residual(out, w, 2).is_zero());
}

TEST_CASE("text round trip") {
    std::mt19937 rng(3);
    auto c = bvlab::testing::four_pair_context();
    for (int it = 0; it < 30; ++it) {
        auto p = random_poly(rng, c, 0, 4, 3);
        p += random_poly(rng, c, 0, 2, 3).h_shift(2);
        auto back = GradedPolynomial::parse(c, p.to_string(), 3);
        CHECK(back == p);
    }
    CHECK(GradedPolynomial(c, 1).to_string() == "0");
    CHECK(GradedPolynomial::parse(c, "0", 1).is_zero());
    CHECK(GradedPolynomial::parse(c, "3/2*h^1*x*xi", 2).to_string() == "3/2*h^1*x*xi");
}
