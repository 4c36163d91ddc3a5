#include "doctest.h"

#include "bvlab/cellular.hpp"

#include "json.hpp"

#include <algorithm>
#include <random>

using namespace bvlab;
using namespace bvlab::cellular;
using graded::GradedPolynomial;
using homotopy::DgLaData;

namespace {

// binomial expansion of (1 - t1)^(b + 1), integrated term by term
Rational triangle_oracle(int a, int b) {
    Rational s = 0;
    for (int j = 0; j <= b + 1; ++j) {
        Rational binom = factorial(b + 1) / (factorial(j) * factorial(b + 1 - j));
        s += binom * sign_pow(j) / Rational(a + j + 1);
    }
    return s / (b + 1);
}

// carry a block over the faces of Delta^k into the superfields of Delta^n along face f
GradedPolynomial relabel(const GradedPolynomial& p, const DgLaData& lie, const Face& f, int n,
                         const std::vector<int>& sign_of_face = {}) {
    const auto small = faces(static_cast<int>(f.size()) - 1);
    const auto big = faces(n);
    auto target = homotopy::superfield_context(simplex_basis(lie, n));
    auto src = p.context();
    std::vector<std::optional<GradedPolynomial>> repl(src->size());
    for (std::size_t si = 0; si < small.size(); ++si) {
        Face img;
        for (int v : small[si]) img.push_back(f[v]);
        int sign = 1;
        // sort the image; the permutation sign is the orientation change
        for (std::size_t i = 0; i < img.size(); ++i)
            for (std::size_t j = i + 1; j < img.size(); ++j)
                if (img[i] > img[j]) sign = -sign;
        std::sort(img.begin(), img.end());
        if (!sign_of_face.empty()) sign = sign_of_face[si];
        for (const auto& x : lie.basis)
            for (const char* side : {"A_", "B_"}) {
                const std::string from = side + x.name + "_" + face_name(small[si]);
                const std::string to = side + x.name + "_" + face_name(img);
                repl[src->index(from)] = GradedPolynomial::variable(target, target->index(to), p.truncation()) * Rational(sign);
            }
    }
    return graded::substitute(p, repl, target);
}

DgLaData abelian2() { return DgLaData::parse("basis a 0\nbasis b 0\n"); }

}  // namespace

TEST_CASE("faces and forms") {
    CHECK(faces(2).size() == 7);
    CHECK(face_name(faces(2).back()) == "012");
    CHECK_THROWS(faces(-1));
    // chi_01 = t0 dt1 - t1 dt0, which is dt1 in the chart
    CHECK(whitney_chi({0, 1}, 1) ==
          wedge(PolyForm::t(1, 0), PolyForm::dt(1, 1)) - wedge(PolyForm::t(1, 1), PolyForm::dt(1, 0)));
    CHECK(whitney_chi({0, 1}, 1) == PolyForm::dt(1, 1));
    for (int i = 0; i <= 2; ++i) CHECK(whitney_chi({i}, 2) == PolyForm::t(2, i));
    CHECK_THROWS(whitney_chi({1, 0}, 2));
    CHECK_THROWS(whitney_chi({0, 3}, 2));
    // d t0 = -dt1 - dt2
    CHECK(exterior_d(PolyForm::t(2, 0)) == PolyForm::dt(2, 0));
    CHECK(wedge(PolyForm::dt(2, 1), PolyForm::dt(2, 1)).is_zero());
}

TEST_CASE("Poincare integration") {
    CHECK(poincare(PolyForm::dt(1, 1), {0, 1}) == 1);
    CHECK(poincare(whitney_chi({0, 1}, 1), {0, 1}) == 1);
    // honest Lebesgue integral: chi_012 has volume 1/2, the Whitney cochain 2 chi_012 has 1
    CHECK(poincare(whitney_chi({0, 1, 2}, 2), {0, 1, 2}) == Rational(1, 2));
    CHECK(poincare(wedge(PolyForm::t(2, 0), wedge(PolyForm::dt(2, 1), PolyForm::dt(2, 2))), {0, 1, 2}) == Rational(1, 6));
    // degree mismatch
    CHECK(poincare(PolyForm::t(2, 1), {0, 1, 2}) == 0);
    CHECK(poincare(PolyForm::t(2, 1), {1}) == 1);
    CHECK(poincare(PolyForm::t(2, 1), {2}) == 0);
    // against iterated integration on all monomials t1^a t2^b dt1 dt2
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b) CHECK(poincare(PolyForm::monomial(2, {a, b}, 3), {0, 1, 2}) == triangle_oracle(a, b));
    // edge [12] of the triangle: t2 runs from 0 to 1
    CHECK(poincare(PolyForm::dt(2, 2), {1, 2}) == 1);
    CHECK(poincare(PolyForm::dt(2, 1), {1, 2}) == -1);
    CHECK(poincare(wedge(PolyForm::t(2, 2), PolyForm::dt(2, 2)), {0, 2}) == Rational(1, 2));
    for (int n : {1, 2}) {
        for (const auto& f : faces(n))
            for (const auto& g : faces(n)) CHECK(poincare(whitney(f, n), g) == (f == g ? 1 : 0));
    }
}

TEST_CASE("Dupont homotopy") {
    auto r1 = check_dupont(1, 6);
    CHECK(r1.ok);
    auto r2 = check_dupont(2, 4);
    CHECK(r2.ok);
    for (const auto& f : r2.failures) MESSAGE(f);
    // K(t dt) = (1 - t) int_0^t s ds - t int_t^1 s ds = (t^2 - t) / 2 on the interval
    const PolyForm t = PolyForm::t(1, 1);
    CHECK(dupont(wedge(t, PolyForm::dt(1, 1))) == (wedge(t, t) - t) * Rational(1, 2));
    CHECK(dupont(PolyForm::constant(1, 3)).is_zero());
    CHECK(dupont(whitney({0, 1}, 1)).is_zero());
    CHECK(dupont(PolyForm::constant(2, 1)).is_zero());
    // phi_j: chain homotopy between id and evaluation at the vertex, on functions
    const PolyForm f = PolyForm::t(2, 1) + wedge(PolyForm::t(2, 1), PolyForm::t(2, 2));
    for (int j = 0; j <= 2; ++j) CHECK(dupont_phi(exterior_d(f), j) == f - PolyForm::constant(2, j == 1 ? 1 : 0));
}

TEST_CASE("tree constants of the building blocks") {
    const DgLaData g = homotopy::so3();
    auto b0 = building_block(g, 0, 3);
    CHECK(b0.tree.size() == 1);
    CHECK(b0.tree.at("(0,0)") == Rational(1, 2));

    auto b1 = building_block(g, 1, 3);
    // [A01, (A0 + A1) / 2]
    CHECK(b1.tree.at("(0,01)") == Rational(1, 2));
    CHECK(b1.tree.at("(01,1)") == Rational(1, 2));
    CHECK_FALSE(b1.tree.count("(01,0)"));
    CHECK(b1.loop_solved);
    CHECK(b1.loop_free == 0);
    CHECK(b1.loop.at("tr(01,01)") == Rational(1, 24));

    // three-leaf trees on the triangle: |C| = |e1|! |e2|! |e3|! / ((|e1| + |e2| + 1) 4!)
    auto b2 = building_block(g, 2, 3);
    int checked = 0;
    for (const auto& [key, c] : b2.tree) {
        if (key.rfind("((", 0) != 0) continue;
        // key "((a,b),c)"
        const auto comma1 = key.find(','), close = key.find(')'), comma2 = key.find(',', close);
        const std::string a = key.substr(2, comma1 - 2), b = key.substr(comma1 + 1, close - comma1 - 1),
                          e = key.substr(comma2 + 1, key.size() - comma2 - 2);
        const int da = static_cast<int>(a.size()) - 1, db = static_cast<int>(b.size()) - 1, de = static_cast<int>(e.size()) - 1;
        INFO(key);
        CHECK(da + db + de == 3);
        CHECK(abs(c) == factorial(da) * factorial(db) * factorial(de) / (Rational(da + db + 1) * factorial(4)));
        ++checked;
    }
    CHECK(checked > 10);
    CHECK(abs(b2.tree.at("((01,02),01)")) == Rational(1, 72));
    CHECK(b2.loop_solved);
    CHECK_THROWS(building_block(g, 3, 3));
    CHECK_THROWS(building_block(g, 1, 1));

    nlohmann::json j = nlohmann::json::parse(b1.to_json());
    CHECK(j["tree"]["(0,01)"] == "1/2");
    CHECK(j["loop"]["tr(01,01)"] == "1/24");
}

TEST_CASE("equivariance under vertex relabeling") {
    const DgLaData g = homotopy::so3();
    for (int n : {1, 2}) {
        const GradedPolynomial s = simplex_tree_action(g, n, 3);
        std::vector<int> perm(n + 1);
        for (int i = 0; i <= n; ++i) perm[i] = i;
        while (std::next_permutation(perm.begin(), perm.end())) {
            INFO("n = " << n << ", perm starts " << perm[0]);
            CHECK(relabel(s, g, perm, n) == s);
        }
    }
    // a wrong orientation sign on one edge breaks it
    const GradedPolynomial s = simplex_tree_action(g, 1, 3);
    CHECK_FALSE(relabel(s, g, {1, 0}, 1, {1, 1, 1}) == s);
}

TEST_CASE("face subtraction telescopes") {
    const DgLaData g = homotopy::so3();
    for (int n : {1, 2}) {
        const GradedPolynomial full = simplex_tree_action(g, n, 3);
        GradedPolynomial sum(full.context(), 2);
        for (const auto& f : faces(n)) {
            auto b = building_block(g, static_cast<int>(f.size()) - 1, 3);
            sum += relabel(b.action.h_component(0), g, f, n);
        }
        CHECK(sum.h_component(0) == full.h_component(0));
    }
}

TEST_CASE("interval block and Bernoulli numbers") {
    auto s = interval_series(2);
    CHECK(s.f == std::vector<Rational>{1, Rational(1, 12), Rational(-1, 720)});
    CHECK(s.g == std::vector<Rational>{0, Rational(1, 24), Rational(-1, 2880)});
    CHECK(s.g_trace == s.g);
    CHECK(s.odd_terms_vanish);
    CHECK(s.trace_degree > 0);
    CHECK(bernoulli_numbers(4)[2] == Rational(1, 6));
    CHECK(bernoulli_numbers(4)[4] == Rational(-1, 30));
    CHECK(bernoulli_f(2) == s.f);
    CHECK(bernoulli_g(2) == s.g);
    auto s3 = interval_series(3);
    CHECK(s3.f.back() == Rational(1, 30240));
    CHECK(s3.g.back() == Rational(1, 181440));
    CHECK_THROWS(interval_series(7));
    CHECK_THROWS(interval_series(0));
}

TEST_CASE("one-dimensional complexes") {
    auto tri = CellComplex1D::polygon(3);
    CHECK(tri.is_circle());
    auto back = CellComplex1D::parse(tri.to_text());
    CHECK(back.to_text() == tri.to_text());
    CHECK_THROWS(CellComplex1D::polygon(1));
    CHECK_THROWS(CellComplex1D::parse("vertex a\nedge e a b\n"));
    CHECK_THROWS(CellComplex1D::parse("vertex a\nedge e a a\n"));
    CHECK_THROWS(CellComplex1D::parse("face f\n"));
    auto path = CellComplex1D::parse("vertex a\nvertex b\nvertex c\nedge e a b\nedge f b c\n");
    CHECK_FALSE(path.is_circle());
    CHECK_THROWS(circle_induction(path, homotopy::so3()));
    CHECK_THROWS(circle_effective(path, homotopy::so3(), 3));

    auto v = cochain_complex(tri, homotopy::so3());
    CHECK(homotopy::check_dgla(v).ok);
    CHECK(homotopy::validate_induction(v, circle_induction(tri, homotopy::so3())).ok);
}

TEST_CASE("circle: QME and effective action") {
    const DgLaData g = homotopy::so3();
    for (int n : {2, 3}) {
        INFO("n-gon " << n);
        const GradedPolynomial s = assemble(CellComplex1D::polygon(n), g, 4);
        const auto res = graded::qme_residual(s, homotopy::superfield_pairing(s.context()), 2);
        CHECK(homotopy::truncate_leaves(res, 3).is_zero());
    }
    auto r = circle_effective(CellComplex1D::polygon(3), g, 4);
    CHECK(r.qme_ok);
    CHECK(r.classical_mismatch.empty());
    CHECK(r.quantum_mismatch.empty());
    // tr (ad A1)^2 / 24 at second order: so(3) has tr (ad X)^2 = -2 |X|^2
    const auto ctx = r.result.action.context();
    graded::Monomial m(ctx->size(), 0);
    m[ctx->index("A_x_H1")] = 2;
    CHECK(r.result.action.coefficient(m, 1) == Rational(-2) / 24);

    // orientation of the edges does not matter
    auto twisted = CellComplex1D::parse("vertex p\nvertex q\nvertex r\nedge a p q\nedge b r q\nedge c r p\n");
    auto r2 = circle_effective(twisted, g, 4);
    CHECK(r2.classical_mismatch.empty());
    CHECK(r2.quantum_mismatch.empty());
}

TEST_CASE("abelian coefficients give a quadratic action") {
    const GradedPolynomial s = assemble(CellComplex1D::polygon(3), abelian2(), 4);
    CHECK_FALSE(s.is_zero());
    for (const auto& [m, c] : s.terms()) {
        CHECK(GradedPolynomial::polynomial_degree(m) == 2);
        CHECK(c.coeff(1) == 0);
    }
}
