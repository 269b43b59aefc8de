#pragma once
// tree combinatorics for the multi-commutator machinery: rooted trees with
// ordered parent maps, degree counting, the overlap indicator kappa_T, the
// remainder coefficient with certified tails, and its closed-form majorants

#include <vector>

#include "lrlab/lattice.hpp"

namespace lrlab::trees {

// ---------------------------------------------------------------------------
// trees on vertices {0, ..., k}, encoded by a parent map P(j) < j for j >= 1.
// There are exactly k! of them.

struct Tree {
    int k = 1;
    std::vector<int> parent;  // parent[j-1] = P(j), j = 1..k

    int p(int j) const { return parent[static_cast<std::size_t>(j - 1)]; }
};

std::vector<Tree> enumerate_trees(int k);

// degree sequence d_T(0), ..., d_T(k); each edge {P(j), j} counts once per end
std::vector<int> degrees(const Tree& t);

// simplified code (P(2), ..., P(k)); vertex j appears d_T(j) - 1 times in it
std::vector<int> simplified_code(const Tree& t);

// edge weight m_T(j) = max{d_T(j), d_T(P(j))} of the edge {P(j), j}
int edge_weight(const Tree& t, const std::vector<int>& deg, int j);

// ---------------------------------------------------------------------------
// counting helpers (long-double accumulation, exact for the sizes we allow)

double factorial(int n);          // n <= 170
double binomial(int n, int m);

// trees with prescribed degree sequence: exact count by enumeration vs the
// closed-form majorant (k-1)! / prod_j (d(j)-1)!
struct DegreeCount {
    double exact = 0.0;
    double bound = 0.0;
};
DegreeCount count_trees_with_degrees(int k, const std::vector<int>& deg);

// number of positive degree sequences of length k+1 summing to 2k,
// exactly binomial(2k-1, k); majorized by 4^k
double degree_sequence_count(int k);

// sum over all trees of prod_j d_T(j)!, exact by enumeration; majorant k! (4e^2)^k
struct FactorialSum {
    double exact = 0.0;
    double bound = 0.0;
};
FactorialSum degree_factorial_sum(int k);

// g^g e^-g e^{1/(12g+1)} sqrt(2 pi g) <= g! <= g^g e^-g e^{1/(12g)} sqrt(2 pi g)
bool stirling_sandwich_holds(int g_max = 50);

// ---------------------------------------------------------------------------
// kappa_T: product over edges of the indicator that the boxes
// Lambda_{n_j} + x_j and Lambda_{n_P(j)} + x_P(j) intersect

double kappa(const Tree& t, const std::vector<int>& n,
             const std::vector<lattice::Site>& x);

// ---------------------------------------------------------------------------
// remainder coefficient of the multi-commutator bound

// per-vertex data: box radii m_j (j = 0..k), times s_j (j = 1..k; s[0] ignored),
// box centers x_j (j = 0..k)
struct TreeData {
    std::vector<int> m;
    std::vector<double> s;
    std::vector<lattice::Site> x;
};

// R_{T,alpha}: sum over non-empty subsets I of {1..k} of
//   (2 alpha)^|I| prod_{j in I} |s_j| e^{4 D alpha |s_j|}
//   sum_{n_j > m_j, j in I} kappa_T({n_j, x_j}) prod_{j in I} W_j(n_j)
// with W_j(n) = sum_{z in Lambda_{m_j}} sum_{y in shell(n)} F(|z-y|) and
// n_j = m_j off I.  `lower` truncates every n_j at trunc; `upper` adds the
// certified tail prod_j Wfull_j - prod_j Wpartial_j (kappa <= 1).
struct Remainder {
    double lower = 0.0;
    double upper = 0.0;
};
Remainder remainder(const Tree& t, double alpha, const TreeData& data,
                    const lattice::DecayFunction& F, double conv_const, int trunc);

// closed-form majorants of R_{T,alpha} built from the summability data
// (polynomial kind: needs seq.u_norm; exponential kind: needs seq.c_m)
double remainder_poly_bound(const Tree& t, double alpha, const TreeData& data,
                            const lattice::DecaySequenceData& seq, double conv_const);
double remainder_exp_bound(const Tree& t, double alpha, const TreeData& data,
                           const lattice::DecaySequenceData& seq, double conv_const);

// matching majorants of kappa_T itself
double kappa_poly_bound(const Tree& t, const TreeData& data, double zeta, int d);
double kappa_exp_bound(const Tree& t, const TreeData& data, double sigma, int d);

// ---------------------------------------------------------------------------
// tree-decay constants (hopping data m_j = 1, |s_j| <= t)

double tree_decay_k0(double alpha, double t, const lattice::DecaySequenceData& seq,
                     double conv_const, int d);
double tree_decay_k1(double alpha, double t, const lattice::DecaySequenceData& seq,
                     double conv_const);

// sum over trees of the edge-decay products appearing in the tree-decay bounds
double tree_edge_sum_poly(int k, const std::vector<lattice::Site>& x, double zeta);
double tree_edge_sum_exp(int k, const std::vector<lattice::Site>& x, double sigma,
                         int d);

// ---------------------------------------------------------------------------
// summed tree-decay proposition:
//   sum_T prod_{j=1..k} G(m_T(j)) <= D^k (k!)^d,
// where G(g) = sum_{w in Z^d} exp(-sigma |w| / (sqrt(d) g)) is the per-edge
// lattice sum after factorizing over the tree.  G is evaluated as a certified
// upper bound (exact sum below a g-dependent radius plus a geometric tail) and
// D = 4 e^2 e^{2d} S_d with S_d = (1 + 2 d sqrt(d) / sigma)^d.

struct TreeSumCheck {
    double lhs_upper = 0.0;
    double rhs = 0.0;
    double constant_d = 0.0;
    bool pass = false;
};
TreeSumCheck tree_sum_bound_check(int k, int d, double sigma);

// certified upper bound on G(g) itself (used by the check; exposed for tests)
double edge_lattice_sum(int d, double sigma, int g);

}  // namespace lrlab::trees
