#pragma once
// lattice geometry + decay functions with certified (upper-bounded) lattice sums

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrlab::lattice {

// ---------------------------------------------------------------------------
// sites

// point of Z^d, d <= 4; unused coordinates stay 0 so comparisons are uniform
struct Site {
    std::array<int, 4> c{0, 0, 0, 0};
    int dim = 1;

    int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    int& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Site& a, const Site& b) {
        return a.dim == b.dim && a.c == b.c;
    }
    friend bool operator<(const Site& a, const Site& b) { return a.c < b.c; }  // lexicographic

    friend Site operator+(Site a, const Site& b) {
        for (int i = 0; i < a.dim; ++i) a[i] += b[i];
        return a;
    }
    friend Site operator-(Site a, const Site& b) {
        for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
        return a;
    }
};

Site site(int x);
Site site(int x, int y);
Site site(int x, int y, int z);
Site site_of(const std::vector<int>& coords);

int max_norm(const Site& x);
double euclid_norm(const Site& x);
std::string to_string(const Site& x);

// box Lambda_L = {x : |x_i| <= L}, lexicographic order, (2L+1)^d sites
std::vector<Site> box_sites(int L, int d);
std::vector<Site> box_sites(int L, int d, const Site& center);
// shell Lambda_n \ Lambda_{n-1}; n = 0 gives {origin}
std::vector<Site> shell_sites(int n, int d);
// d=1 chain of n consecutive sites starting at x0 (working regions need not be centered)
std::vector<Site> chain_sites(int x0, int n);

// ---------------------------------------------------------------------------
// decay functions

enum class DecayKind { Polynomial, ExponentialPolynomial };

// Polynomial:            F(r) = (1+r)^-(d+epsilon)
// ExponentialPolynomial: F(r) = exp(-2 sigma r) (1+r)^-(d+epsilon)
struct DecayFunction {
    DecayKind kind = DecayKind::Polynomial;
    int d = 1;
    double epsilon = 1.0;
    double sigma = 0.0;  // only for the exponential kind

    double value(double r) const;
};

DecayFunction poly_decay(int d, double epsilon);
DecayFunction exp_poly_decay(int d, double epsilon, double sigma);

// certified upper bound on sum_{x in Z^d} F(|x|); exact sum over |x|_inf <= trunc
// plus a closed-form integral majorant of the dropped tail
double f_norm_bound(const DecayFunction& F, int trunc = 64);

// the tail majorant alone: certified upper bound on sum_{|x|_inf > R} F(|x|)
double f_norm_tail_bound(const DecayFunction& F, int R);

// certified upper bound on the convolution constant D:
//   sum_z F(|x-z|) F(|z-y|) <= D F(|x-y|),   D <= 2^(d+1+epsilon) ||F_poly||_1
// (the exponential kind inherits the bound of its polynomial factor)
double convolution_constant_bound(const DecayFunction& F, int trunc = 64);

// exact double sum  sum_{x in A} sum_{y in B} F(|x-y|)
double decay_double_sum(const DecayFunction& F,
                        const std::vector<Site>& A,
                        const std::vector<Site>& B);

// ---------------------------------------------------------------------------
// summability data for the box-shell condition
//
// S(n,m) = |shell(n)| * sum_{z in Lambda_m} max_{y in shell(n)} F(|z-y|)
//        = |shell(n)| * sum_{j=0..m} |shell(j)| F(n-j)          (exact, n > m)
//
// Polynomial kind:  u_{n,m} = S(n,m) (1+n)^zeta must be summable in n, which
//                   forces zeta < epsilon (default epsilon/2).
// Exponential kind: S(n,m) <= C_m exp(-2 sigma n) with certified C_m.

struct DecaySequenceData {
    DecayKind kind;
    int d = 1;
    double zeta = 0.0;                 // rescaling exponent (poly) / rate sigma (exp)
    int m_max = 0;
    std::vector<double> u_norm;        // certified upper bounds on ||u_{.,m}||_l1, m = 0..m_max
    std::vector<double> c_m;           // certified C_m (exponential kind; empty otherwise)
};

// exact S(n,m) for n > m
double shell_condition_term(const DecayFunction& F, int n, int m);

// zeta <= 0 picks the default: epsilon/2 for the polynomial kind, sigma for the
// exponential kind. n_big is raised internally to max(2*m_max+2, 2d, 16).
DecaySequenceData decay_sequences(const DecayFunction& F, int m_max,
                                  double zeta = 0.0, int n_big = 64);

}  // namespace lrlab::lattice
