#include "bvlab/rational.hpp"

#include <stdexcept>

namespace bvlab {

std::string to_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& t) {
        while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
        while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.pop_back();
    };
    trim(s);
    if (s.empty()) throw std::invalid_argument("empty rational");
    if (s.front() == '+') s.erase(s.begin());
    for (char c : s)
        if (!(c == '-' || c == '/' || (c >= '0' && c <= '9')))
            throw std::invalid_argument("malformed rational: " + std::string(text));
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational: " + std::string(text));
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    q.canonicalize();
    return q;
}

Rational factorial(int n) {
    if (n < 0) throw std::invalid_argument("factorial of negative");
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return Rational(r);
}

Rational double_factorial_odd(int m) {
    Integer r = 1;
    for (int k = 2 * m - 1; k > 1; k -= 2) r *= k;
    return Rational(r);
}

Rational binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational(r);
}

std::vector<Rational> bernoulli_numbers(int n_max) {
    // sum_{k=0}^{m} C(m+1,k) B_k = 0
    std::vector<Rational> b(n_max + 1);
    b[0] = 1;
    for (int m = 1; m <= n_max; ++m) {
        Rational s = 0;
        for (int k = 0; k < m; ++k) s += binomial(m + 1, k) * b[k];
        b[m] = -s / (m + 1);
    }
    return b;
}

RMatrix identity_matrix(std::size_t n) {
    RMatrix m = zero_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

RMatrix zero_matrix(std::size_t rows, std::size_t cols) {
    return RMatrix(rows, std::vector<Rational>(cols, Rational(0)));
}

RMatrix mat_mul(const RMatrix& a, const RMatrix& b) {
    if (a.empty()) return {};
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    if (a[0].size() != k) throw std::invalid_argument("mat_mul: shape mismatch");
    RMatrix c = zero_matrix(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (sgn(a[i][l]) == 0) continue;
            for (std::size_t j = 0; j < m; ++j)
                if (sgn(b[l][j]) != 0) c[i][j] += a[i][l] * b[l][j];
        }
    return c;
}

RMatrix mat_add(const RMatrix& a, const RMatrix& b) {
    RMatrix c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] += b[i][j];
    return c;
}

RMatrix mat_sub(const RMatrix& a, const RMatrix& b) {
    RMatrix c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] -= b[i][j];
    return c;
}

RMatrix mat_scale(const RMatrix& a, const Rational& s) {
    RMatrix c = a;
    for (auto& row : c)
        for (auto& x : row) x *= s;
    return c;
}

RMatrix transpose(const RMatrix& a) {
    if (a.empty()) return {};
    RMatrix t = zero_matrix(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

bool is_zero(const RMatrix& a) {
    for (const auto& row : a)
        for (const auto& x : row)
            if (sgn(x) != 0) return false;
    return true;
}

Rational determinant(RMatrix a) {
    const std::size_t n = a.size();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && sgn(a[piv][c]) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (sgn(a[r][c]) == 0) continue;
            Rational f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return det;
}

RMatrix inverse(RMatrix a) {
    const std::size_t n = a.size();
    RMatrix inv = identity_matrix(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && sgn(a[piv][c]) == 0) ++piv;
        if (piv == n) throw std::domain_error("singular matrix");
        std::swap(a[piv], a[c]);
        std::swap(inv[piv], inv[c]);
        Rational d = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || sgn(a[r][c]) == 0) continue;
            Rational f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

namespace {

// reduced row echelon form in place; returns pivot columns
std::vector<std::size_t> rref(RMatrix& a, std::size_t ncols) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t c = 0; c < ncols && row < a.size(); ++c) {
        std::size_t piv = row;
        while (piv < a.size() && sgn(a[piv][c]) == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[row]);
        Rational d = a[row][c];
        for (auto& x : a[row]) x /= d;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r == row || sgn(a[r][c]) == 0) continue;
            Rational f = a[r][c];
            for (std::size_t j = 0; j < a[r].size(); ++j) a[r][j] -= f * a[row][j];
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

}  // namespace

std::size_t rank(RMatrix a) {
    if (a.empty()) return 0;
    return rref(a, a[0].size()).size();
}

std::vector<std::vector<Rational>> null_space(RMatrix a) {
    if (a.empty()) return {};
    const std::size_t n = a[0].size();
    auto piv = rref(a, n);
    std::vector<bool> is_piv(n, false);
    for (auto p : piv) is_piv[p] = true;
    std::vector<std::vector<Rational>> basis;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_piv[f]) continue;
        std::vector<Rational> v(n, Rational(0));
        v[f] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -a[r][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

bool solve_linear(RMatrix a, std::vector<Rational> b, std::vector<Rational>& x) {
    const std::size_t rows = a.size();
    const std::size_t n = rows ? a[0].size() : 0;
    for (std::size_t r = 0; r < rows; ++r) a[r].push_back(b[r]);
    auto piv = rref(a, n);
    for (std::size_t r = piv.size(); r < rows; ++r)
        if (sgn(a[r][n]) != 0) return false;
    x.assign(n, Rational(0));
    for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = a[r][n];
    return true;
}

}  // namespace bvlab
