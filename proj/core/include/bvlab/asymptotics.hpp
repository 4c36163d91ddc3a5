#pragma once

#include "bvlab/rational.hpp"
#include "bvlab/wick.hpp"

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace bvlab::asym {

using Complex = std::complex<double>;

// Taylor data of f and of the density rho at a critical point, in some chart y around it.
struct CriticalPointData {
    Rational value = 0;                       // f(x0)
    RMatrix hessian;                          // f''(x0)
    std::map<int, wick::SparseTensor> derivs;  // d >= 3 -> d^d f (components)
    std::map<int, wick::SparseTensor> density; // d >= 0 -> d^d rho; empty means rho = 1
    std::size_t dim() const { return hessian.size(); }
    Rational density_at_zero() const;
};

struct AsymptoticExpansion {
    bool oscillatory = false;
    int dim = 0;
    Rational critical_value = 0;
    Rational det_hessian = 0;
    int signature = 0;               // oscillatory phase exp(i pi signature / 4)
    std::vector<wick::QI> coeffs;    // hbar^k coefficient multiplying the prefactor, k = 0..L

    Complex prefactor(double hbar) const;
    Complex evaluate(double hbar, int terms) const;  // prefactor * sum_{k < terms} coeffs[k] hbar^k
    double correction_sum(double hbar, int terms) const;  // real part of the bracket only
};

int signature(const RMatrix& symmetric);

// exp(i f/hbar) asymptotics: edges i f''^{-1}, vertices i d^d f, marked density vertex.
AsymptoticExpansion stationary_phase_series(const CriticalPointData& cp, int loop_order, int cap_half_edges = 16);
// exp(-f/hbar) asymptotics: edges f''^{-1}, vertices -d^d f, marked density vertex.
AsymptoticExpansion laplace_series(const CriticalPointData& cp, int loop_order, int cap_half_edges = 16);

// Chart change y = A y': every tensor pulled back, density multiplied by |det A|.
CriticalPointData pullback(const CriticalPointData& cp, const RMatrix& a);

// c_n in Gamma(z) ~ z^z e^{-z} sqrt(2 pi/z) exp(sum c_n z^{-n}).
struct StirlingReport {
    std::vector<Rational> c;             // c_1..c_nmax
    std::vector<std::string> method;     // per coefficient: "graphs" or "volume-log"
    Rational c1_stated_reading;          // c_1 summed over graphs with n-1 = 0 loops
    int loops_offset = 1;                // c_n sums connected graphs with n + offset loops
};
// sum over connected graphs with the given loop count, all vertices -1, propagator 1
Rational stirling_connected_sum(int loops, int cap_half_edges = 16);
StirlingReport stirling_coefficients(int n_max);
// n! / (sqrt(2 pi n) n^n e^{-n} exp(sum_{k<=terms} c_k n^{-k}))
double stirling_ratio(int n, const std::vector<Rational>& c);

// Numeric oracles. Built-in 1-D test functions are listed in catalogue().
struct Function1D {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> g;  // density
    double x0 = 0;                    // critical point
    // exact jets at x0 up to the given order
    std::function<CriticalPointData(int)> jet;
};
const std::vector<Function1D>& catalogue();
const Function1D& catalogue_entry(const std::string& name);

struct QuadratureOptions {
    double eps0 = 0.05;   // smallest damping level is eps0 / 2^(levels-1)
    int levels = 5;
    double tol = 1e-12;
};
// integral of g exp(i k f - eps x^2) dx extrapolated to eps -> 0
Complex numeric_oscillatory_oracle(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                   double k, const QuadratureOptions& opts = {});
// integral of g exp(-(f - f(x0))/hbar) dx over the real line
double numeric_laplace_oracle(const std::function<double(double)>& f, const std::function<double(double)>& g,
                              double hbar, double x0 = 0);
// adaptive Gauss-Kronrod on [a, b]
double integrate(const std::function<double(double)>& h, double a, double b, double tol = 1e-12);

// Borel summation with a Pade continuation of the Borel transform.
struct BorelResult {
    double value = 0;
    int pade_l = 0, pade_m = 0;
    bool exact = false;  // approximant reproduces every supplied coefficient
};
BorelResult borel_sum(const std::vector<Rational>& a, double z);

// Faddeev-Popov check for U(1) acting on R^2 by rotations, gauge phi = x_2 (N = 2).
struct FaddeevPopovResult {
    Complex lhs, rhs;
    double rel_error = 0;
};
enum class FPExample { quartic_bump, gaussian };
FaddeevPopovResult faddeev_popov_compare(FPExample ex, double hbar);

}  // namespace bvlab::asym
