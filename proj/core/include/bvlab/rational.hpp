#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace bvlab {

using Rational = mpq_class;
using Integer = mpz_class;

// Always "num/den", integers included ("3/1"). Parser also accepts a bare integer.
std::string to_string(const Rational& q);
Rational parse_rational(std::string_view text);

Rational factorial(int n);
// (2m-1)!! with the convention (-1)!! = 1
Rational double_factorial_odd(int m);
Rational binomial(int n, int k);

// B_0 = 1, B_1 = -1/2, ... (exact)
std::vector<Rational> bernoulli_numbers(int n_max);

inline int sign_pow(int e) { return (e % 2 == 0) ? 1 : -1; }

// Dense rational matrix helpers, row-major, used by wick and homotopy.
using RMatrix = std::vector<std::vector<Rational>>;

RMatrix identity_matrix(std::size_t n);
RMatrix zero_matrix(std::size_t rows, std::size_t cols);
RMatrix mat_mul(const RMatrix& a, const RMatrix& b);
RMatrix mat_add(const RMatrix& a, const RMatrix& b);
RMatrix mat_sub(const RMatrix& a, const RMatrix& b);
RMatrix mat_scale(const RMatrix& a, const Rational& s);
RMatrix transpose(const RMatrix& a);
bool is_zero(const RMatrix& a);
Rational determinant(RMatrix a);
// throws std::domain_error when singular
RMatrix inverse(RMatrix a);
std::size_t rank(RMatrix a);
// basis of the null space (columns returned as vectors)
std::vector<std::vector<Rational>> null_space(RMatrix a);
// solve a x = b; returns false when inconsistent. Free variables set to 0.
bool solve_linear(RMatrix a, std::vector<Rational> b, std::vector<Rational>& x);

}  // namespace bvlab
