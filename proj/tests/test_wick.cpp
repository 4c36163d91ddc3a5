#include "doctest.h"

#include "bvlab/wick.hpp"

#include <cmath>
#include <array>
#include <random>

using namespace bvlab;
using namespace bvlab::wick;

namespace {

Rational rnd(std::mt19937& rng, int lo = -3, int hi = 3) {
    std::uniform_int_distribution<int> d(lo, hi), den(1, 3);
    Rational r(d(rng), den(rng));
    r.canonicalize();
    return r;
}

// diagonally dominant symmetric matrix, hence positive definite
RMatrix random_spd(std::mt19937& rng, std::size_t n) {
    RMatrix q = zero_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) q[i][j] = q[j][i] = rnd(rng, -1, 1);
    for (std::size_t i = 0; i < n; ++i) q[i][i] = Rational(static_cast<long>(n) + 1) + rnd(rng, 0, 2);
    return q;
}

RMatrix random_antisym(std::mt19937& rng, std::size_t n) {
    RMatrix q = zero_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            q[i][j] = rnd(rng);
            q[j][i] = -q[i][j];
        }
    return q;
}

RMatrix random_matrix(std::mt19937& rng, std::size_t n, std::size_t m) {
    RMatrix a = zero_matrix(n, m);
    for (auto& row : a)
        for (auto& x : row) x = rnd(rng);
    return a;
}

SparseTensor random_tensor(std::mt19937& rng, int even_rank, int odd_rank, int ne, int no, int entries) {
    SparseTensor t(even_rank, odd_rank);
    std::uniform_int_distribution<int> ie(0, std::max(ne - 1, 0)), io(0, std::max(no - 1, 0));
    for (int k = 0; k < entries; ++k) {
        std::vector<int> idx;
        for (int s = 0; s < even_rank; ++s) idx.push_back(ie(rng));
        for (int s = 0; s < odd_rank; ++s) idx.push_back(io(rng));
        std::vector<int> o(idx.begin() + even_rank, idx.end());
        std::sort(o.begin(), o.end());
        if (std::adjacent_find(o.begin(), o.end()) != o.end()) continue;
        t.set(idx, rnd(rng));
    }
    return t;
}

SparseTensor scalar_tensor(int d, const Rational& v) {
    SparseTensor t(d, 0);
    t.set(std::vector<int>(d, 0), v);
    return t;
}

QuadraticData one_dim(const Rational& q = 1) { return QuadraticData::make({{q}}, Kind::even); }

Perturbation quartic_1d() { return Perturbation{{{"l", scalar_tensor(4, 1)}}}; }

Rational re(const Series& s, std::vector<int> e) { return s.coeff(e).re; }

}  // namespace

TEST_CASE("Gaussian moments") {
    auto q = one_dim();
    for (int m = 0; m <= 5; ++m) {
        CHECK(wick_moment(q, std::vector<int>(2 * m, 0)) == double_factorial_odd(m));
        CHECK(gaussian_moment(q, {2 * m}) == double_factorial_odd(m));
    }
    CHECK(wick_moment(q, {0, 0, 0}) == 0);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        auto d = QuadraticData::make(random_spd(rng, 3), Kind::even);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(wick_moment(d, {i, j}) == d.inv[i][j]);
        // explicit matchings against integration by parts
        std::uniform_int_distribution<int> pick(0, 2);
        for (int k = 0; k < 6; ++k) {
            std::vector<int> idx(6), ex(3, 0);
            for (auto& i : idx) ++ex[i = pick(rng)];
            CHECK(wick_moment(d, idx) == gaussian_moment(d, ex));
        }
    }
}

TEST_CASE("odd Wick moments") {
    std::mt19937 rng(5);
    auto d = QuadraticData::make(random_antisym(rng, 4), Kind::odd);
    const auto& e = d.inv;
    CHECK(wick_moment(d, {0, 1, 2, 3}) == e[0][1] * e[2][3] - e[0][2] * e[1][3] + e[0][3] * e[1][2]);
    CHECK(wick_moment(d, {0, 1}) == e[0][1]);
    CHECK(wick_moment(d, {0, 0}) == 0);
    CHECK(wick_moment(d, {0, 1, 0, 2}) == 0);
    // against Berezin integration: vertices of a single odd slot pair
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            SparseTensor t(0, 2);
            t.set({a, b}, 1);  // enters as theta_a theta_b
            Perturbation p{{{"g", t}}};
            auto oracle = perturbative_expectation_oracle(d, p, 1);
            CHECK(re(oracle, {1}) == wick_moment(d, {a, b}));
            CHECK(re(perturbative_expectation(d, p, 1), {1}) == wick_moment(d, {a, b}));
        }
    // four-point function against the Berezin oracle
    SparseTensor t4(0, 4);
    t4.set({0, 1, 2, 3}, 1);
    auto oracle = perturbative_expectation_oracle(d, Perturbation{{{"g", t4}}}, 1);
    CHECK(re(oracle, {1}) == wick_moment(d, {0, 1, 2, 3}));
}

TEST_CASE("quartic perturbation: graphs against the Wick oracle") {
    auto q = one_dim();
    auto p = quartic_1d();
    auto graphs = perturbative_expectation(q, p, 4);
    auto oracle = perturbative_expectation_oracle(q, p, 4);
    CHECK(graphs == oracle);
    Rational pw24 = 1;
    for (int n = 0; n <= 4; ++n, pw24 *= 24) CHECK(re(graphs, {n}) == double_factorial_odd(2 * n) / (factorial(n) * pw24));
    CHECK(re(graphs, {1}) == Rational(1, 8));
    CHECK(re(graphs, {2}) == Rational(1, 128) + Rational(1, 48) + Rational(1, 16));

    // the three second-order graphs individually
    std::vector<Rational> second;
    for (const auto& t : graph_terms(q, p, 2))
        if (t.vertex_counts[0] == 2) second.push_back(t.weight.re);
    std::sort(second.begin(), second.end());
    CHECK(second == std::vector<Rational>{Rational(1, 128), Rational(1, 48), Rational(1, 16)});

    CHECK(perturbative_expectation(q, Perturbation{}, 3) == Series::one({}, 3));
}

TEST_CASE("connected graphs and the logarithm") {
    auto q = one_dim();
    auto p = quartic_1d();
    ExpectationOptions conn;
    conn.connected_only = true;
    auto c = perturbative_expectation(q, p, 3, conn);
    CHECK(re(c, {0}) == 0);
    CHECK(re(c, {1}) == Rational(1, 8));
    CHECK(re(c, {2}) == Rational(1, 48) + Rational(1, 16));
    CHECK(series_log(perturbative_expectation(q, p, 3)) == c);
    CHECK(series_exp(c) == perturbative_expectation(q, p, 3));

    // no edges possible: the log is the vertex term itself
    Perturbation constant{{{"g", scalar_tensor(0, Rational(5, 2))}}};
    CHECK(perturbative_expectation(q, constant, 3, conn).coeff({1}).re == Rational(5, 2));
    CHECK(series_log(perturbative_expectation(q, constant, 3)) == perturbative_expectation(q, constant, 3, conn));

    std::mt19937 rng(3);
    auto q2 = QuadraticData::make(random_spd(rng, 2), Kind::even);
    Perturbation cubic{{{"g", random_tensor(rng, 3, 0, 2, 0, 4)}}};
    auto all = perturbative_expectation(q2, cubic, 4);
    CHECK(all == perturbative_expectation_oracle(q2, cubic, 4));
    CHECK(series_exp(series_log(all)) == all);
    CHECK(series_log(all) == perturbative_expectation(q2, cubic, 4, conn));

    CHECK_THROWS_AS(series_log(Series(std::vector<std::string>{"g"}, 2)), std::domain_error);
}

TEST_CASE("random perturbations: graph sums equal matching sums") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 2 + trial % 2;
        auto q = QuadraticData::make(random_spd(rng, n), Kind::even);
        Perturbation p;
        p.terms.push_back({"a", random_tensor(rng, 1, 0, n, 0, 2)});
        p.terms.push_back({"b", random_tensor(rng, 2, 0, n, 0, 3)});
        p.terms.push_back({"c", random_tensor(rng, 3, 0, n, 0, 3)});
        p.terms.push_back({"c", random_tensor(rng, 4, 0, n, 0, 3)});
        const int order = 3;
        auto graphs = perturbative_expectation(q, p, order);
        CHECK(graphs == perturbative_expectation_oracle(q, p, order));
        CHECK(exp_operator_form(q, p, order) == graphs);
    }
}

TEST_CASE("Fresnel rules: a factor i per edge and per vertex") {
    std::mt19937 rng(23);
    RMatrix m = {{Rational(2), Rational(1)}, {Rational(1), Rational(-3)}};  // indefinite
    auto q = QuadraticData::make(m, Kind::even);
    Perturbation p{{{"g", random_tensor(rng, 3, 0, 2, 0, 4)}, {"k", random_tensor(rng, 4, 0, 2, 0, 3)}}};
    ExpectationOptions fr;
    fr.fresnel = true;
    auto graphs = perturbative_expectation(q, p, 3, fr);
    CHECK(graphs == perturbative_expectation_oracle(q, p, 3, true));
    // 1-D quartic: lambda/8 picks up i^{1+2}
    auto one = perturbative_expectation(one_dim(), quartic_1d(), 1, fr);
    CHECK(one.coeff({1}) == QI(0, Rational(-1, 8)));
}

TEST_CASE("loop expansion") {
    auto q = one_dim();
    auto le = loop_expansion(q, {scalar_tensor(3, 1)}, 2);
    CHECK(le.full[0] == 1);
    CHECK(le.connected[0] == 0);
    CHECK(le.full[1] == Rational(1, 12) + Rational(1, 8));
    CHECK(le.connected[1] == Rational(5, 24));
    // exp of the connected series
    CHECK(le.full[2] == le.connected[2] + le.connected[1] * le.connected[1] / 2);

    // same numbers from the coupling series with g_d = hbar^{d/2 - 1}
    std::mt19937 rng(29);
    auto q2 = QuadraticData::make(random_spd(rng, 2), Kind::even);
    auto t3 = random_tensor(rng, 3, 0, 2, 0, 4);
    auto t4 = random_tensor(rng, 4, 0, 2, 0, 3);
    auto l2 = loop_expansion(q2, {t3, t4}, 2);
    auto s = perturbative_expectation(q2, Perturbation{{{"g3", t3}, {"g4", t4}}}, 4);
    for (int k = 0; k <= 2; ++k) {
        Rational v = 0;
        for (int b = 0; b <= k; ++b) v += re(s, {2 * (k - b), b});
        CHECK(l2.full[k] == v);
    }
    CHECK(loop_expansion(q, {}, 3).full == std::vector<Rational>{1, 0, 0, 0});
    CHECK_THROWS_AS(loop_expansion(q, {scalar_tensor(2, 1)}, 1), std::invalid_argument);
}

TEST_CASE("observables") {
    std::mt19937 rng(31);
    auto q = QuadraticData::make(random_spd(rng, 3), Kind::even);
    auto lin = [](int i) {
        SparseTensor t(1, 0);
        t.set({i}, 1);
        return Observable{t};
    };
    CHECK(expectation_with_observables(q, Perturbation{}, {lin(0)}, 2).c.empty());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(re(expectation_with_observables(q, Perturbation{}, {lin(i), lin(j)}, 0), {}) == q.inv[i][j]);

    // 1-D quartic with observable x^2 (entering as Psi_2/2!)
    auto q1 = one_dim();
    Observable x2{scalar_tensor(2, 2)};
    auto g = expectation_with_observables(q1, quartic_1d(), {x2}, 2);
    auto o = observables_oracle(q1, quartic_1d(), {x2}, 2);
    CHECK(g == o);
    CHECK(re(g, {0}) == 1);
    CHECK(re(g, {1}) == Rational(1, 2));  // <x^6>/24 - <x^4><x^2>/24 ... from the oracle: 15/24 - 3/24

    // two inhomogeneous observables against the oracle
    Perturbation p{{{"g", random_tensor(rng, 3, 0, 3, 0, 4)}}};
    Observable a{random_tensor(rng, 1, 0, 3, 0, 2), random_tensor(rng, 2, 0, 3, 0, 2)};
    Observable b{random_tensor(rng, 0, 0, 3, 0, 1), random_tensor(rng, 3, 0, 3, 0, 2)};
    CHECK(expectation_with_observables(q, p, {a, b}, 2) == observables_oracle(q, p, {a, b}, 2));
}

TEST_CASE("Pfaffian") {
    RMatrix blocks = zero_matrix(6, 6);
    Rational as[3] = {2, Rational(-1, 3), 5};
    for (int k = 0; k < 3; ++k) {
        blocks[2 * k][2 * k + 1] = as[k];
        blocks[2 * k + 1][2 * k] = -as[k];
    }
    CHECK(pfaffian(blocks) == as[0] * as[1] * as[2]);

    std::mt19937 rng(37);
    auto a = random_antisym(rng, 4);
    CHECK(pfaffian(a) == a[0][1] * a[2][3] - a[0][2] * a[1][3] + a[0][3] * a[1][2]);
    CHECK(pfaffian(random_antisym(rng, 5)) == 0);
    for (int trial = 0; trial < 5; ++trial) {
        auto q = random_antisym(rng, 6);
        CHECK(pfaffian(q) * pfaffian(q) == determinant(q));
        CHECK(berezin_gaussian(q) == pfaffian(q));
        auto m = random_matrix(rng, 6, 6);
        CHECK(pfaffian(mat_mul(mat_mul(transpose(m), q), m)) == determinant(m) * pfaffian(q));
        Rational lam(3, 2);
        CHECK(pfaffian(mat_scale(q, lam)) == lam * lam * lam * pfaffian(q));
        auto q2 = random_antisym(rng, 2);
        RMatrix sum = zero_matrix(8, 8);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) sum[i][j] = q[i][j];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) sum[6 + i][6 + j] = q2[i][j];
        CHECK(pfaffian(sum) == pfaffian(q) * pfaffian(q2));
    }
}

TEST_CASE("Berezin integrals") {
    using graded::GradedPolynomial;
    auto ctx = graded::make_context({{"t1", 1}, {"t2", 1}});
    auto t1 = GradedPolynomial::variable(ctx, "t1", 1), t2 = GradedPolynomial::variable(ctx, "t2", 1);
    auto c = [&](const Rational& v) { return GradedPolynomial::constant(ctx, v, 1); };
    auto top = [&](const GradedPolynomial& f, std::vector<std::string> vars) {
        return berezin_integrate(f, vars).coefficient(graded::Monomial(2, 0));
    };
    // one variable: a + b theta -> b
    auto ctx1 = graded::make_context({{"t", 1}});
    auto th = GradedPolynomial::variable(ctx1, "t", 1);
    auto f1 = GradedPolynomial::constant(ctx1, 4, 1) + th * Rational(7);
    CHECK(berezin_integrate(f1, {"t"}).coefficient(graded::Monomial(1, 0)) == 7);
    // n = 2
    auto f = c(1) + t1 * Rational(2) + t2 * Rational(3) + multiply(t1, t2) * Rational(5);
    CHECK(top(f, {"t1", "t2"}) == 5);
    CHECK(top(multiply(t2, t1), {"t1", "t2"}) == -1);
    // Stokes: the integral of a derivative vanishes
    auto g = multiply(t1, t2) * Rational(3) + t1;
    CHECK(top(graded::derive(g, "t1", graded::Side::left), {"t1", "t2"}) == 0);
    CHECK(top(graded::derive(g, "t2", graded::Side::left), {"t1", "t2"}) == 0);

    CHECK(det_via_pairs(identity_matrix(3)) == 1);
    CHECK(det_via_pairs({{Rational(2), Rational(0)}, {Rational(0), Rational(3)}}) == 6);
    std::mt19937 rng(41);
    for (int trial = 0; trial < 4; ++trial) {
        auto b = random_matrix(rng, 4, 4);
        CHECK(det_via_pairs(b) == determinant_cofactor(b));
        CHECK(determinant_cofactor(b) == determinant(b));
    }
}

TEST_CASE("polygon series") {
    std::mt19937 rng(43);
    auto b = random_matrix(rng, 3, 3);
    while (determinant(b) == 0) b = random_matrix(rng, 3, 3);
    auto zero = polygon_series(b, zero_matrix(3, 3), 3);
    CHECK(zero.agree);
    CHECK(zero.graph_side[0] == determinant(mat_scale(b, -1)));
    auto one = polygon_series({{Rational(2)}}, {{Rational(5)}}, 3);
    CHECK(one.agree);
    CHECK(one.direct == std::vector<Rational>{-2, 5, 0, 0});
    for (int trial = 0; trial < 3; ++trial) {
        auto p = random_matrix(rng, 3, 3);
        auto r = polygon_series(b, p, 5);
        CHECK(r.agree);
    }
    CHECK_THROWS_AS(polygon_series(zero_matrix(2, 2), identity_matrix(2), 2), std::domain_error);
}

TEST_CASE("superdeterminant") {
    std::mt19937 rng(47);
    auto a = random_matrix(rng, 2, 2), d = random_matrix(rng, 2, 2);
    while (determinant(d) == 0) d = random_matrix(rng, 2, 2);
    CHECK(sdet(a, zero_matrix(2, 2), zero_matrix(2, 2), d) == determinant(a) / determinant(d));
    CHECK_THROWS_AS(sdet(a, zero_matrix(2, 2), zero_matrix(2, 2), zero_matrix(2, 2)), std::domain_error);

    // Sdet(1 + eps j) = 1 + eps Str j + O(eps^2); blocks as rationals, so measure the remainder
    auto ja = random_matrix(rng, 2, 2), jb = random_matrix(rng, 2, 3), jc = random_matrix(rng, 3, 2),
         jd = random_matrix(rng, 3, 3);
    Rational str = ja[0][0] + ja[1][1] - jd[0][0] - jd[1][1] - jd[2][2];
    for (int k : {3, 5}) {
        Rational eps(1, static_cast<long>(std::pow(10, k)));
        Rational s = sdet(mat_add(identity_matrix(2), mat_scale(ja, eps)), mat_scale(jb, eps), mat_scale(jc, eps),
                          mat_add(identity_matrix(3), mat_scale(jd, eps)));
        Rational rem = (s - 1 - eps * str) / (eps * eps);
        CHECK(std::abs(rem.get_d()) < 1000);
    }

    // multiplicativity; numeric off-diagonal blocks compose consistently only in block-triangular form
    auto nonsingular = [&] {
        auto m = random_matrix(rng, 2, 2);
        while (determinant(m) == 0) m = random_matrix(rng, 2, 2);
        return m;
    };
    for (int trial = 0; trial < 3; ++trial) {
        auto ax = nonsingular(), dx = nonsingular(), ay = nonsingular(), dy = nonsingular();
        auto bx = random_matrix(rng, 2, 2), by = random_matrix(rng, 2, 2);
        auto z = zero_matrix(2, 2);
        // upper triangular product: [[ax ay, ax by + bx dy], [0, dx dy]]
        CHECK(sdet(mat_mul(ax, ay), mat_add(mat_mul(ax, by), mat_mul(bx, dy)), z, mat_mul(dx, dy)) ==
              sdet(ax, bx, z, dx) * sdet(ay, by, z, dy));
        // lower triangular product
        CHECK(sdet(mat_mul(ax, ay), z, mat_add(mat_mul(bx, ay), mat_mul(dx, by)), mat_mul(dx, dy)) ==
              sdet(ax, z, bx, dx) * sdet(ay, z, by, dy));
        // upper times lower has a full Schur complement
        auto p = std::array<RMatrix, 4>{mat_add(ax, mat_mul(bx, by)), mat_mul(bx, dy), mat_mul(dx, by), mat_mul(dx, dy)};
        CHECK(sdet(p[0], p[1], p[2], p[3]) == sdet(ax, bx, z, dx) * sdet(identity_matrix(2), z, by, dy));
    }
}

TEST_CASE("superspace perturbation theory") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 3; ++trial) {
        SuperQuadraticData s;
        s.even = QuadraticData::make(random_spd(rng, 2), Kind::even);
        auto qo = random_antisym(rng, 4);
        while (pfaffian(qo) == 0) qo = random_antisym(rng, 4);
        s.odd = QuadraticData::make(qo, Kind::odd);
        s.p.terms.push_back({"g", random_tensor(rng, 1, 2, 2, 4, 5)});
        s.p.terms.push_back({"g", random_tensor(rng, 0, 4, 2, 4, 2)});
        s.p.terms.push_back({"k", random_tensor(rng, 2, 2, 2, 4, 4)});
        s.p.terms.push_back({"k", random_tensor(rng, 3, 0, 2, 4, 3)});
        CHECK(super_perturbative(s, 3) == super_perturbative_oracle(s, 3));
    }
}

TEST_CASE("faux QED bubble") {
    std::mt19937 rng(59);
    const int m = 2;
    for (int trial = 0; trial < 3; ++trial) {
        auto qe = random_spd(rng, 2);
        auto dm = random_matrix(rng, m, m);
        while (determinant(dm) == 0) dm = random_matrix(rng, m, m);
        // theta_a has index a, thetabar_a has index m + a; <thetabar, D theta> = 1/2 Q_o(psi, psi)
        RMatrix qo = zero_matrix(2 * m, 2 * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                qo[m + a][b] = dm[a][b];
                qo[b][m + a] = -dm[a][b];
            }
        std::vector<RMatrix> pm{random_matrix(rng, m, m), random_matrix(rng, m, m)};
        SparseTensor t(1, 2);
        for (int i = 0; i < 2; ++i)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) t.set({i, m + a, b}, pm[i][a][b]);
        SuperQuadraticData s;
        s.even = QuadraticData::make(qe, Kind::even);
        s.odd = QuadraticData::make(qo, Kind::odd);
        s.p.terms.push_back({"g", t});
        std::vector<GraphTerm> terms;
        auto series = super_perturbative(s, 2, &terms);
        CHECK(series == super_perturbative_oracle(s, 2));

        RMatrix dinv = inverse(dm), qinv = inverse(qe);
        Rational expect = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                auto prod = mat_mul(mat_mul(dinv, pm[i]), mat_mul(dinv, pm[j]));
                expect += qinv[i][j] * (prod[0][0] + prod[1][1]);
            }
        expect *= Rational(-1, 2);
        // two vertices joined by the photon line and by both odd lines
        int found = 0;
        for (const auto& gt : terms) {
            if (gt.graph.num_vertices() != 2) continue;
            bool bubble = true;
            for (std::size_t h = 0; h < gt.graph.num_half_edges(); ++h)
                bubble = bubble && gt.graph.incidence[h] != gt.graph.incidence[gt.graph.matching[h]];
            if (!bubble) continue;
            ++found;
            CHECK(gt.aut == 4);
            CHECK(gt.weight.re == expect);
        }
        CHECK(found == 1);
    }
}

TEST_CASE("differential operator form") {
    CHECK(re(exp_operator_form(one_dim(), quartic_1d(), 1), {1}) == Rational(1, 8));
    CHECK(exp_operator_form(one_dim(), Perturbation{}, 2) == Series::one({}, 2));
    std::mt19937 rng(61);
    auto q = QuadraticData::make(random_spd(rng, 2), Kind::even);
    Perturbation p{{{"g", random_tensor(rng, 3, 0, 2, 0, 4)}}};
    CHECK(exp_operator_form(q, p, 2) == perturbative_expectation_oracle(q, p, 2));
}

TEST_CASE("problem file format") {
    auto pf = parse_problem("# quartic\nQ 0 0 1/1\nQ 0 1 1/2\nQ 1 1 2\nP 4 0 0 1 1 3/1\nP 3 0 1 1 -1/2\n", Kind::even);
    REQUIRE(pf.q.size() == 2);
    CHECK(pf.q[1][0] == Rational(1, 2));
    REQUIRE(pf.p.terms.size() == 2);
    CHECK(pf.p.terms[0].coupling == "g3");
    CHECK(pf.p.terms[1].tensor.at({1, 0, 1, 0}) == 3);
    CHECK_THROWS_AS(parse_problem("X 1 2\n", Kind::even), std::invalid_argument);
    CHECK_THROWS_AS(parse_problem("P 3 0 1 1/1\n", Kind::even), std::invalid_argument);
    auto odd = parse_problem("Q 0 1 2\n", Kind::odd);
    CHECK(odd.q[1][0] == -2);
    CHECK_THROWS_AS(QuadraticData::make({{Rational(1), Rational(2)}, {Rational(3), Rational(1)}}, Kind::even),
                    std::invalid_argument);
    CHECK_THROWS_AS(QuadraticData::make({{Rational(1), Rational(1)}, {Rational(1), Rational(1)}}, Kind::even),
                    std::domain_error);
}
