#include "doctest.h"

#include "bvlab/asymptotics.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <cmath>

using namespace bvlab;
using namespace bvlab::asym;
using wick::QI;
using wick::SparseTensor;

namespace {

constexpr double pi = 3.14159265358979323846;

SparseTensor scalar(int d, const Rational& v) {
    SparseTensor t(d, 0);
    t.set(std::vector<int>(d, 0), v);
    return t;
}

// log-log slope of errors against hbar
double slope(const std::vector<double>& h, const std::vector<double>& e) {
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("signature of symmetric forms") {
    CHECK(signature({{Rational(1), 0}, {0, Rational(-2)}}) == 0);
    CHECK(signature({{Rational(0), 1}, {1, Rational(0)}}) == 0);
    CHECK(signature({{Rational(2), 1, 0}, {1, Rational(2), 0}, {0, 0, Rational(3)}}) == 3);
    CHECK(signature({{Rational(0), 0, 1}, {0, Rational(-1), 0}, {1, 0, Rational(0)}}) == -1);
    CHECK_THROWS(signature({{Rational(0), 0}, {0, Rational(1)}}));
}

TEST_CASE("quadratic phases have no corrections") {
    CriticalPointData cp;
    cp.hessian = {{Rational(2), 1}, {1, Rational(-3)}};
    auto s = stationary_phase_series(cp, 3);
    CHECK(s.coeffs[0] == QI(1));
    for (int k = 1; k <= 3; ++k) CHECK(s.coeffs[k].is_zero());
    CHECK(s.signature == 0);
    CHECK(s.det_hessian == -7);
    CHECK_THROWS(laplace_series(cp, 1));
}

TEST_CASE("quartic coefficients") {
    auto cp = catalogue_entry("quartic").jet(4);
    auto st = stationary_phase_series(cp, 2);
    CHECK(st.coeffs[1] == QI(0, Rational(-1, 8)));
    CHECK(st.coeffs[2] == QI(Rational(-35, 384)));
    auto lp = laplace_series(cp, 2);
    CHECK(lp.coeffs[1] == QI(Rational(-1, 8)));
    CHECK(lp.coeffs[2] == QI(Rational(35, 384)));
}

TEST_CASE("basic integrals") {
    auto one = [](double) { return 1.0; };
    auto gauss = numeric_oscillatory_oracle([](double x) { return x * x; }, one, 1.0);
    CHECK(std::abs(gauss - std::sqrt(pi) * std::exp(Complex(0, pi / 4))) < 1e-8);
    CHECK(numeric_laplace_oracle([](double x) { return x * x; }, one, 1.0) == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::exp(-x * x / 2) * x * x * x * x; }, -40, 40) ==
          doctest::Approx(3 * std::sqrt(2 * pi)).epsilon(1e-12));
}

TEST_CASE("stationary phase against the oscillatory oracle") {
    const auto& fn = catalogue_entry("quartic");
    auto st = stationary_phase_series(fn.jet(4), 2);
    std::vector<double> hs{0.1, 0.05, 0.025}, err1, err2;
    for (double h : hs) {
        const Complex exact = numeric_oscillatory_oracle(fn.f, fn.g, 1 / h);
        err1.push_back(std::abs(exact - st.evaluate(h, 2)) / std::abs(exact));
        err2.push_back(std::abs(exact - st.evaluate(h, 3)) / std::abs(exact));
    }
    CHECK(slope(hs, err1) > 1.8);
    CHECK(slope(hs, err2) > 2.8);
    // first coefficient recovered numerically
    const double h = 0.01;
    const Complex ratio = numeric_oscillatory_oracle(fn.f, fn.g, 1 / h) / st.prefactor(h);
    CHECK(std::abs((ratio - 1.0) / h - Complex(0, -1.0 / 8)) < 0.02);
}

TEST_CASE("Laplace order fit") {
    for (const char* name : {"stirling", "quartic", "quartic_density", "cosh"}) {
        const auto& fn = catalogue_entry(name);
        for (int L = 1; L <= 2; ++L) {
            auto lp = laplace_series(fn.jet(2 * L + 2), L);
            std::vector<double> hs{0.1, 0.05, 0.025}, err;
            for (double h : hs) {
                // the oracle drops exp(-f(x0)/hbar)
                const double exact = numeric_laplace_oracle(fn.f, fn.g, h, fn.x0);
                const double series = lp.evaluate(h, L + 1).real() * std::exp(fn.f(fn.x0) / h);
                err.push_back(std::abs(exact - series) / exact);
            }
            INFO(std::string(name) << " L=" << L);
            CHECK(slope(hs, err) >= L + 0.8);
        }
    }
}

TEST_CASE("Stirling coefficients") {
    auto rep = stirling_coefficients(3);
    CHECK(rep.c1_stated_reading == 0);
    REQUIRE(rep.c.size() == 3);
    CHECK(rep.c[0] == Rational(1, 12));
    CHECK(rep.c[1] == 0);
    CHECK(rep.c[2] == Rational(-1, 360));
    CHECK(rep.method[0] == "graphs");
    CHECK(rep.method[2] == "volume-log");
    // closed form B_{n+1} / (n (n+1))
    auto b = bernoulli_numbers(7);
    auto rep6 = stirling_coefficients(6);
    for (int n = 1; n <= 6; ++n) CHECK(rep6.c[n - 1] == b[n + 1] / (n * (n + 1)));
    CHECK(std::abs(stirling_ratio(20, rep.c) - 1) < 1e-4);
    CHECK(stirling_connected_sum(2) == Rational(1, 12));
}

TEST_CASE("chart changes") {
    CriticalPointData cp;
    cp.value = 1;
    cp.hessian = {{Rational(2), 1}, {1, Rational(3)}};
    SparseTensor t3(3, 0), t4(4, 0);
    t3.set({0, 0, 1}, 1);
    t3.set({1, 1, 1}, Rational(-1, 2));
    t4.set({0, 0, 0, 0}, 3);
    t4.set({0, 1, 1, 1}, 1);
    cp.derivs.emplace(3, t3);
    cp.derivs.emplace(4, t4);
    cp.density.emplace(0, scalar(0, 1));
    cp.density.emplace(1, [] {
        SparseTensor d(1, 0);
        d.set({1}, 2);
        return d;
    }());
    RMatrix a{{Rational(1), 2}, {Rational(-1, 2), Rational(3)}};
    auto s = laplace_series(cp, 2);
    auto p = laplace_series(pullback(cp, a), 2);
    const Rational det_a = determinant(a);
    CHECK(p.det_hessian == s.det_hessian * det_a * det_a);
    for (int k = 0; k <= 2; ++k) CHECK(p.coeffs[k] == QI(abs(det_a) * s.coeffs[k].re, abs(det_a) * s.coeffs[k].im));
    CHECK(std::abs(p.evaluate(0.1, 3) - s.evaluate(0.1, 3)) < 1e-12 * std::abs(s.evaluate(0.1, 3)));
}

TEST_CASE("Borel summation") {
    // sum (-1)^n n! z^n = z^{-1} e^{1/z} E_1(1/z)
    std::vector<Rational> a;
    for (int n = 0; n <= 12; ++n) a.push_back(n % 2 ? Rational(-factorial(n)) : factorial(n));
    for (double z : {0.2, 0.5, 1.0}) {
        auto r = borel_sum(a, z);
        CHECK(r.exact);
        CHECK(r.pade_m == 1);
        CHECK(r.value == doctest::Approx(std::exp(1 / z) / z * boost::math::expint(1, 1 / z)).epsilon(1e-9));
    }
    // same series read with z < 0 has its Borel pole on the ray s > 0 unless the sign flips
    std::vector<Rational> g;
    for (int n = 0; n <= 10; ++n) g.push_back(factorial(n));
    CHECK(borel_sum(g, -0.3).value == doctest::Approx(std::exp(1 / 0.3) / 0.3 * boost::math::expint(1, 1 / 0.3)).epsilon(1e-9));
    CHECK_THROWS(borel_sum(g, 0.3));
    // a_n = 1: the Borel transform is e^s and the sum is 1/(1 - z)
    std::vector<Rational> ones(14, Rational(1));
    CHECK(borel_sum(ones, 0.25).value == doctest::Approx(1 / 0.75).epsilon(1e-6));
}

TEST_CASE("Faddeev-Popov reduction") {
    auto q = faddeev_popov_compare(FPExample::quartic_bump, 0.05);
    CHECK(q.rel_error < 1e-4);
    auto g = faddeev_popov_compare(FPExample::gaussian, 0.5);
    CHECK(g.rel_error < 1e-6);
    // gaussian case in closed form: pi / (1 - i / (2 hbar))
    CHECK(std::abs(g.lhs - pi / Complex(1, -1)) < 1e-8);
}
