#include "bvlab/asymptotics.hpp"

#include "bvlab/feyngraph.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace bvlab::asym {

using wick::QI;
using wick::SparseTensor;

namespace {

constexpr double pi = 3.14159265358979323846;

Complex to_complex(const QI& q) { return {q.re.get_d(), q.im.get_d()}; }

SparseTensor scalar(int d, const Rational& v) {
    SparseTensor t(d, 0);
    t.set(std::vector<int>(d, 0), v);
    return t;
}

SparseTensor negated(const SparseTensor& t) {
    SparseTensor out(t.even_rank(), t.odd_rank());
    for (const auto& [idx, v] : t.entries()) out.set(idx, -v);
    return out;
}

}  // namespace

Rational CriticalPointData::density_at_zero() const {
    auto it = density.find(0);
    if (density.empty()) return 1;
    return it == density.end() ? Rational(0) : it->second.at({});
}

int signature(const RMatrix& s) {
    RMatrix a = s;
    const std::size_t n = a.size();
    int sig = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (sgn(a[k][k]) == 0) {
            std::size_t j = k + 1;
            while (j < n && sgn(a[j][j]) == 0) ++j;
            if (j < n) {
                std::swap(a[k], a[j]);
                for (auto& row : a) std::swap(row[k], row[j]);
            } else {
                j = k + 1;
                while (j < n && sgn(a[k][j]) == 0) ++j;
                if (j == n) throw std::domain_error("degenerate quadratic form");
                // e_k -> e_k + e_j makes the pivot 2 a_kj
                for (std::size_t c = 0; c < n; ++c) a[k][c] += a[j][c];
                for (std::size_t r = 0; r < n; ++r) a[r][k] += a[r][j];
            }
        }
        const Rational p = a[k][k];
        sig += sgn(p) > 0 ? 1 : -1;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (sgn(a[r][k]) == 0) continue;
            Rational f = a[r][k] / p;
            for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
            for (std::size_t c = k; c < n; ++c) a[c][r] = a[r][c];
        }
    }
    return sig;
}

Complex AsymptoticExpansion::prefactor(double hbar) const {
    const double mag = std::pow(2 * pi * hbar, dim / 2.0) / std::sqrt(std::abs(det_hessian.get_d()));
    if (!oscillatory) return mag * std::exp(-critical_value.get_d() / hbar);
    return mag * std::exp(Complex(0, critical_value.get_d() / hbar + pi * signature / 4.0));
}

Complex AsymptoticExpansion::evaluate(double hbar, int terms) const {
    Complex s = 0;
    double pw = 1;
    for (int k = 0; k < terms && k < static_cast<int>(coeffs.size()); ++k, pw *= hbar) s += to_complex(coeffs[k]) * pw;
    return prefactor(hbar) * s;
}

double AsymptoticExpansion::correction_sum(double hbar, int terms) const {
    double s = 0, pw = 1;
    for (int k = 0; k < terms && k < static_cast<int>(coeffs.size()); ++k, pw *= hbar) s += coeffs[k].re.get_d() * pw;
    return s;
}

namespace {

AsymptoticExpansion build_series(const CriticalPointData& cp, int loop_order, bool oscillatory, int cap) {
    if (loop_order < 0) throw std::invalid_argument("negative loop order");
    const std::size_t n = cp.dim();
    AsymptoticExpansion out;
    out.oscillatory = oscillatory;
    out.dim = static_cast<int>(n);
    out.critical_value = cp.value;
    out.det_hessian = n ? determinant(cp.hessian) : Rational(1);
    if (sgn(out.det_hessian) == 0) throw std::domain_error("degenerate Hessian");
    out.signature = n ? signature(cp.hessian) : 0;
    if (!oscillatory && out.signature != static_cast<int>(n))
        throw std::domain_error("Laplace method needs a positive definite Hessian");
    auto q = wick::QuadraticData::make(cp.hessian, wick::Kind::even);

    std::vector<SparseTensor> neutral;
    std::vector<int> degree;
    for (const auto& [d, t] : cp.derivs) {
        if (d < 3) throw std::invalid_argument("derivative tensors start at degree 3");
        if (t.rank() != d) throw std::invalid_argument("derivative tensor rank mismatch");
        if (d - 2 > 2 * loop_order) continue;
        neutral.push_back(oscillatory ? t : negated(t));
        degree.push_back(d);
    }
    std::map<int, SparseTensor> density = cp.density;
    if (density.empty()) density.emplace(0, scalar(0, 1));

    wick::ExpectationOptions opts;
    opts.fresnel = oscillatory;
    opts.cap_half_edges = cap;
    out.coeffs.assign(loop_order + 1, QI());
    const int nt = static_cast<int>(neutral.size());
    for (const auto& [dm, rho] : density) {
        if (dm > 2 * loop_order) continue;
        std::vector<int> counts(nt, 0);
        // hbar power of a graph is (sum n_t (d_t - 2) + dm) / 2
        std::function<void(int, int)> rec = [&](int t, int twice) {
            if (t == nt) {
                if (twice % 2) return;
                for (auto& g : wick::graphs_for_counts(q, neutral, counts, {rho}, opts))
                    out.coeffs[twice / 2] += g.weight;
                return;
            }
            for (int c = 0; twice + c * (degree[t] - 2) <= 2 * loop_order; ++c) {
                counts[t] = c;
                rec(t + 1, twice + c * (degree[t] - 2));
            }
            counts[t] = 0;
        };
        rec(0, dm);
    }
    return out;
}

// T'_{i1..id} = sum_j T_{j1..jd} A_{j1 i1} ... A_{jd id}
SparseTensor pull_tensor(const SparseTensor& t, const RMatrix& a, const Rational& scale) {
    const int d = t.rank();
    const int n = static_cast<int>(a.size());
    SparseTensor out(d, 0);
    std::vector<int> idx(d, 0);
    std::function<void(int, int)> rec = [&](int s, int lo) {
        if (s == d) {
            Rational v = 0;
            for (const auto& [j, tv] : t.entries()) {
                Rational p = tv;
                for (int k = 0; k < d && sgn(p) != 0; ++k) p *= a[j[k]][idx[k]];
                v += p;
            }
            if (sgn(v) != 0) out.set(idx, v * scale);
            return;
        }
        for (int i = lo; i < n; ++i) {
            idx[s] = i;
            rec(s + 1, i);
        }
    };
    rec(0, 0);
    return out;
}

}  // namespace

AsymptoticExpansion stationary_phase_series(const CriticalPointData& cp, int loop_order, int cap_half_edges) {
    return build_series(cp, loop_order, true, cap_half_edges);
}

AsymptoticExpansion laplace_series(const CriticalPointData& cp, int loop_order, int cap_half_edges) {
    return build_series(cp, loop_order, false, cap_half_edges);
}

CriticalPointData pullback(const CriticalPointData& cp, const RMatrix& a) {
    CriticalPointData out;
    out.value = cp.value;
    out.hessian = mat_mul(mat_mul(transpose(a), cp.hessian), a);
    for (const auto& [d, t] : cp.derivs) out.derivs.emplace(d, pull_tensor(t, a, 1));
    Rational jac = abs(determinant(a));
    if (cp.density.empty())
        out.density.emplace(0, scalar(0, jac));
    else
        for (const auto& [d, t] : cp.density) out.density.emplace(d, pull_tensor(t, a, jac));
    return out;
}

// ---------------------------------------------------------------- Stirling

Rational stirling_connected_sum(int loops, int cap_half_edges) {
    if (loops < 0) throw std::invalid_argument("negative loop count");
    // connected, valence >= 3: E - V = loops - 1 = sum_d n_d (d/2 - 1)
    const int twice = 2 * (loops - 1);
    if (twice <= 0) return 0;
    auto q = wick::QuadraticData::make({{Rational(1)}}, wick::Kind::even);
    std::vector<SparseTensor> neutral;
    std::vector<int> degree;
    for (int d = 3; d - 2 <= twice; ++d) {
        neutral.push_back(scalar(d, -1));
        degree.push_back(d);
    }
    wick::ExpectationOptions opts;
    opts.connected_only = true;
    opts.cap_half_edges = cap_half_edges;
    Rational total = 0;
    std::vector<int> counts(neutral.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t t, int left) {
        if (t == neutral.size()) {
            if (left != 0) return;
            for (auto& g : wick::graphs_for_counts(q, neutral, counts, {}, opts)) total += g.weight.re;
            return;
        }
        for (int c = 0; c * (degree[t] - 2) <= left; ++c) {
            counts[t] = c;
            rec(t + 1, left - c * (degree[t] - 2));
        }
        counts[t] = 0;
    };
    rec(0, twice);
    return total;
}

namespace {

// log of Z(hbar) = sum over valency profiles (-1)^V hbar^{E-V} vol(profile)
std::vector<Rational> stirling_volume_log(int n_max) {
    std::vector<Rational> z(n_max + 1, 0);
    std::map<int, int> prof;
    // every profile with sum n_d (d - 2) <= 2 n_max
    for (int budget = 0; budget <= 2 * n_max; ++budget) {
        prof.clear();
        std::function<void(int, int)> exact = [&](int d, int left) {
            if (left == 0) {
                int half_edges = 0, v = 0;
                for (auto [dd, c] : prof) {
                    half_edges += dd * c;
                    v += c;
                }
                if (half_edges % 2) return;
                Rational vol = feyn::groupoid_volume_formula(feyn::ValencyProfile::plain(prof));
                z[budget / 2] += v % 2 ? Rational(-vol) : vol;
                return;
            }
            if (d - 2 > left) return;
            for (int c = 0; c * (d - 2) <= left; ++c) {
                if (c) prof[d] = c;
                exact(d + 1, left - c * (d - 2));
                prof.erase(d);
            }
        };
        exact(3, budget);
    }
    // log(1 + u) as a power series
    std::vector<Rational> l(n_max + 1, 0);
    for (int k = 1; k <= n_max; ++k) {
        Rational s = k * z[k];
        for (int j = 1; j < k; ++j) s -= j * l[j] * z[k - j];
        l[k] = s / k;
    }
    return l;
}

}  // namespace

StirlingReport stirling_coefficients(int n_max) {
    if (n_max < 1 || n_max > 6) throw std::invalid_argument("stirling_coefficients supports 1 <= n_max <= 6");
    StirlingReport r;
    r.c1_stated_reading = stirling_connected_sum(0);
    // calibration: c_1 must come out as 1/12
    if (stirling_connected_sum(1 + r.loops_offset) != Rational(1, 12))
        throw std::logic_error("Stirling calibration failed: c_1 != 1/12");
    auto vol = stirling_volume_log(n_max);
    for (int n = 1; n <= n_max; ++n) {
        const int loops = n + r.loops_offset;
        if (6 * (loops - 1) <= 16) {
            Rational c = stirling_connected_sum(loops);
            if (c != vol[n]) throw std::logic_error("Stirling graph sum disagrees with the volume series");
            r.c.push_back(c);
            r.method.push_back("graphs");
        } else {
            r.c.push_back(vol[n]);
            r.method.push_back("volume-log");
        }
    }
    return r;
}

double stirling_ratio(int n, const std::vector<Rational>& c) {
    long double ln = std::lgamma(static_cast<long double>(n) + 1);
    long double nn = n;
    long double approx = 0.5L * std::log(2 * static_cast<long double>(pi) * nn) + nn * std::log(nn) - nn;
    long double pw = 1;
    for (const auto& ck : c) {
        pw /= nn;
        approx += static_cast<long double>(ck.get_d()) * pw;
    }
    return static_cast<double>(std::exp(ln - approx));
}

// ---------------------------------------------------------------- catalogue

namespace {

CriticalPointData one_dim(const Rational& value, const Rational& h) {
    CriticalPointData cp;
    cp.value = value;
    cp.hessian = {{h}};
    return cp;
}

std::vector<Function1D> make_catalogue() {
    std::vector<Function1D> c;
    auto one = [](double) { return 1.0; };
    c.push_back({"quartic", [](double x) { return x * x / 2 + x * x * x * x / 24; }, one, 0, [](int) {
                     auto cp = one_dim(0, 1);
                     cp.derivs.emplace(4, scalar(4, 1));
                     return cp;
                 }});
    c.push_back({"quartic_density", [](double x) { return x * x / 2 + x * x * x * x / 24; },
                 [](double x) { return 1 + x / 2 + x * x; }, 0, [](int) {
                     auto cp = one_dim(0, 1);
                     cp.derivs.emplace(4, scalar(4, 1));
                     cp.density.emplace(0, scalar(0, 1));
                     cp.density.emplace(1, scalar(1, Rational(1, 2)));
                     cp.density.emplace(2, scalar(2, 2));
                     return cp;
                 }});
    c.push_back({"x2_x4", [](double x) { return x * x / 2 + x * x * x * x; }, one, 0, [](int) {
                     auto cp = one_dim(0, 1);
                     cp.derivs.emplace(4, scalar(4, 24));
                     return cp;
                 }});
    c.push_back({"stirling", [](double x) { return std::exp(x) - x; }, one, 0, [](int d_max) {
                     auto cp = one_dim(1, 1);
                     for (int d = 3; d <= d_max; ++d) cp.derivs.emplace(d, scalar(d, 1));
                     return cp;
                 }});
    c.push_back({"cosh", [](double x) { return std::cosh(x) - 1; }, one, 0, [](int d_max) {
                     auto cp = one_dim(0, 1);
                     for (int d = 4; d <= d_max; d += 2) cp.derivs.emplace(d, scalar(d, 1));
                     return cp;
                 }});
    c.push_back({"gauss", [](double x) { return x * x; }, one, 0, [](int) { return one_dim(0, 2); }});
    return c;
}

}  // namespace

const std::vector<Function1D>& catalogue() {
    static const std::vector<Function1D> c = make_catalogue();
    return c;
}

const Function1D& catalogue_entry(const std::string& name) {
    for (const auto& f : catalogue())
        if (f.name == name) return f;
    throw std::invalid_argument("unknown test function '" + name + "'");
}

// ---------------------------------------------------------------- quadrature

double integrate(const std::function<double(double)>& h, double a, double b, double tol) {
    if (a == b) return 0;
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(h, a, b, 15, tol, &err);
}

namespace {

// smooth step, 0 for t <= 0 and 1 for t >= 1
double smooth_step(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    const double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
    return a / (a + b);
}

// g exp(i k f - eps x^2) times a cut-off equal to 1 on [-R, R] and 0 outside [-2R, 2R].
// R is large enough that k |f'| R >> 1 on the transition, where the cut-off error is
// beyond all orders. Fixed 15-point rule per panel, phase change below half a radian.
Complex oscillatory_at(const std::function<double(double)>& f, const std::function<double(double)>& g, double k,
                       double eps) {
    auto fprime = [&](double x) {
        const double h = 1e-5 * (1 + std::abs(x));
        return (f(x + h) - f(x - h)) / (2 * h);
    };
    double r = 1;
    while (k * std::min(std::abs(fprime(r)), std::abs(fprime(-r))) * r < 4000) r *= 1.05;
    auto cut = [&](double x) { return smooth_step((2 * r - std::abs(x)) / r); };
    using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
    auto re = [&](double x) { return cut(x) * g(x) * std::exp(-eps * x * x) * std::cos(k * f(x)); };
    auto im = [&](double x) { return cut(x) * g(x) * std::exp(-eps * x * x) * std::sin(k * f(x)); };
    Complex total = 0;
    double x = -2 * r;
    while (x < 2 * r) {
        double w = std::min(r / 40, 0.5 / (k * std::abs(fprime(x)) + 1e-300));
        w = std::min(w, 2 * r - x);
        total += Complex(gk::integrate(re, x, x + w, 0), gk::integrate(im, x, x + w, 0));
        x += w;
    }
    return total;
}

}  // namespace

Complex numeric_oscillatory_oracle(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                   double k, const QuadratureOptions& opts) {
    if (opts.levels < 1) throw std::invalid_argument("need at least one damping level");
    std::vector<double> eps;
    std::vector<Complex> val;
    for (int j = 0; j < opts.levels; ++j) {
        eps.push_back(opts.eps0 / std::pow(2.0, j));
        val.push_back(oscillatory_at(f, g, k, eps.back()));
    }
    // Neville extrapolation to eps = 0
    for (int m = 1; m < opts.levels; ++m)
        for (int j = opts.levels - 1; j >= m; --j)
            val[j] = (eps[j - m] * val[j] - eps[j] * val[j - 1]) / (eps[j - m] - eps[j]);
    const Complex v = val.back();
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw std::runtime_error("oscillatory oracle diverged");
    return v;
}

double numeric_laplace_oracle(const std::function<double(double)>& f, const std::function<double(double)>& g,
                              double hbar, double x0) {
    const double f0 = f(x0);
    auto h = [&](double x) { return g(x) * std::exp(-(f(x) - f0) / hbar); };
    double lo = 0.5, hi = 0.5;
    while (f(x0 - lo) - f0 < 60 * hbar) lo *= 1.5;
    while (f(x0 + hi) - f0 < 60 * hbar) hi *= 1.5;
    // panels around the peak so the adaptive rule sees its width
    double total = 0;
    const int panels = 32;
    for (int s = 0; s < panels; ++s) {
        double a = x0 - lo + (lo + hi) * s / panels, b = x0 - lo + (lo + hi) * (s + 1) / panels;
        total += integrate(h, a, b, 1e-14);
    }
    return total;
}

// ---------------------------------------------------------------- Borel

namespace {

using Poly = std::vector<Rational>;  // low degree first

void trim(Poly& p) {
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

Poly poly_rem(Poly a, const Poly& b) {
    trim(a);
    while (a.size() >= b.size() && !a.empty()) {
        Rational f = a.back() / b.back();
        const std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
        trim(a);
    }
    return a;
}

// number of distinct roots of q in (0, inf) via a Sturm sequence
int positive_roots(Poly q) {
    trim(q);
    if (q.size() <= 1) return 0;
    std::vector<Poly> seq{q};
    Poly d;
    for (std::size_t i = 1; i < q.size(); ++i) d.push_back(q[i] * static_cast<long>(i));
    seq.push_back(d);
    while (seq.back().size() > 1) {
        Poly r = poly_rem(seq[seq.size() - 2], seq.back());
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        seq.push_back(r);
    }
    auto changes = [&](bool at_inf) {
        int ch = 0, last = 0;
        for (const auto& p : seq) {
            if (p.empty()) continue;
            int s = at_inf ? sgn(p.back()) : 0;
            if (!at_inf) {
                for (const auto& c : p)
                    if (sgn(c) != 0) {
                        s = sgn(c);
                        break;
                    }
                // sign just right of 0 is that of the lowest nonzero coefficient
            }
            if (s == 0) continue;
            if (last != 0 && s != last) ++ch;
            last = s;
        }
        return ch;
    };
    return changes(false) - changes(true);
}

bool pade(const std::vector<Rational>& b, int l, int m, Poly& p, Poly& q) {
    // q_0 = 1; sum_{j=0}^m q_j b_{k-j} = 0 for k = l+1 .. l+m
    RMatrix a(m, std::vector<Rational>(m, 0));
    std::vector<Rational> rhs(m, 0);
    auto coef = [&](int k) { return k >= 0 && k < static_cast<int>(b.size()) ? b[k] : Rational(0); };
    for (int r = 0; r < m; ++r) {
        const int k = l + 1 + r;
        rhs[r] = -coef(k);
        for (int j = 1; j <= m; ++j) a[r][j - 1] = coef(k - j);
    }
    std::vector<Rational> sol;
    if (m > 0 && !solve_linear(a, rhs, sol)) return false;
    q.assign(m + 1, 0);
    q[0] = 1;
    for (int j = 1; j <= m; ++j) q[j] = sol[j - 1];
    p.assign(l + 1, 0);
    for (int k = 0; k <= l; ++k)
        for (int j = 0; j <= std::min(k, m); ++j) p[k] += q[j] * coef(k - j);
    return true;
}

bool reproduces(const std::vector<Rational>& b, const Poly& p, const Poly& q) {
    // Taylor coefficients of p/q
    std::vector<Rational> s(b.size(), 0);
    for (std::size_t k = 0; k < b.size(); ++k) {
        Rational v = k < p.size() ? p[k] : Rational(0);
        for (std::size_t j = 1; j < q.size() && j <= k; ++j) v -= q[j] * s[k - j];
        s[k] = v;  // q_0 = 1
    }
    return s == b;
}

double horner(const Poly& p, double x) {
    double v = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + it->get_d();
    return v;
}

}  // namespace

BorelResult borel_sum(const std::vector<Rational>& a, double z) {
    if (a.empty()) throw std::invalid_argument("no coefficients");
    std::vector<Rational> b;
    for (std::size_t n = 0; n < a.size(); ++n) b.push_back(a[n] / factorial(static_cast<int>(n)));
    const int nn = static_cast<int>(b.size()) - 1;
    auto pole_free = [&](const Poly& q) {
        Poly qq = q;
        if (z < 0)
            for (std::size_t i = 1; i < qq.size(); i += 2) qq[i] = -qq[i];
        return positive_roots(qq) == 0;
    };
    BorelResult best;
    Poly bp, bq;
    bool found = false;
    // an exact rational continuation wins; otherwise the largest pole-free approximant near the diagonal
    for (int total = 0; total <= nn && !best.exact; ++total)
        for (int m = 0; m <= total; ++m) {
            Poly p, q;
            if (!pade(b, total - m, m, p, q)) continue;
            if (reproduces(b, p, q)) {
                if (!pole_free(q)) throw std::domain_error("Borel transform has a pole on the integration ray");
                best.exact = true;
                best.pade_l = total - m;
                best.pade_m = m;
                bp = p;
                bq = q;
                found = true;
                break;
            }
        }
    if (!found)
        for (int total = nn; total >= 0 && !found; --total)
            for (int off = 0; off <= total && !found; ++off) {
                for (int sgn_off : {1, -1}) {
                    const int m = total / 2 + sgn_off * off;
                    if (m < 0 || m > total) continue;
                    Poly p, q;
                    if (!pade(b, total - m, m, p, q) || !pole_free(q)) continue;
                    best.pade_l = total - m;
                    best.pade_m = m;
                    bp = p;
                    bq = q;
                    found = true;
                    break;
                }
            }
    if (!found) throw std::runtime_error("no pole-free Pade continuation of the Borel transform");
    boost::math::quadrature::exp_sinh<double> integrator;
    auto h = [&](double t) {
        if (t == 0) return horner(bp, 0) / horner(bq, 0);
        const double e = std::exp(-t);
        if (e == 0) return 0.0;
        return e * horner(bp, t * z) / horner(bq, t * z);
    };
    best.value = integrator.integrate(h, 1e-13);
    return best;
}

// ---------------------------------------------------------------- Faddeev-Popov

FaddeevPopovResult faddeev_popov_compare(FPExample ex, double hbar) {
    std::function<double(double)> s_of_r2, mu_of_r;
    double r_max;
    if (ex == FPExample::quartic_bump) {
        r_max = 1.6;
        s_of_r2 = [](double r2) { return (r2 - 1) * (r2 - 1); };
        mu_of_r = [r_max](double r) {
            const double u = r / r_max;
            return u < 1 ? std::exp(1 - 1 / (1 - u * u)) : 0.0;
        };
    } else {
        r_max = 9;
        s_of_r2 = [](double r2) { return r2 / 2; };
        mu_of_r = [](double r) { return std::exp(-r * r); };
    }
    auto phase = [&](double r2, bool imag) {
        const double a = s_of_r2(r2) / hbar;
        return imag ? std::sin(a) : std::cos(a);
    };
    // left side: plain 2-D quadrature over the disc of radius r_max
    auto lhs_part = [&](bool imag) {
        auto outer = [&](double x1) {
            const double w = std::sqrt(std::max(0.0, r_max * r_max - x1 * x1));
            auto inner = [&](double x2) {
                const double r2 = x1 * x1 + x2 * x2;
                return mu_of_r(std::sqrt(r2)) * phase(r2, imag);
            };
            return integrate(inner, -w, w, 1e-11);
        };
        return integrate(outer, -r_max, r_max, 1e-10);
    };
    // right side: (Vol G / N) int mu delta(x2) |det FP| e^{iS/hbar}, FP = <d x2, v> = x1
    const double vol_over_n = 2 * pi / 2;
    auto rhs_part = [&](bool imag) {
        auto h = [&](double x1) { return mu_of_r(std::abs(x1)) * std::abs(x1) * phase(x1 * x1, imag); };
        return vol_over_n * (integrate(h, -r_max, 0, 1e-13) + integrate(h, 0, r_max, 1e-13));
    };
    FaddeevPopovResult out;
    out.lhs = Complex(lhs_part(false), lhs_part(true));
    out.rhs = Complex(rhs_part(false), rhs_part(true));
    out.rel_error = std::abs(out.lhs - out.rhs) / std::abs(out.lhs);
    return out;
}

}  // namespace bvlab::asym
