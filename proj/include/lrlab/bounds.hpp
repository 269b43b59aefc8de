#pragma once
// verification harness: assemble each bound's right-hand side from certified
// constants, compute the exact left-hand side on small lattices, and report
// lhs <= rhs with margins

#include <string>
#include <vector>

#include "lrlab/dynamics.hpp"
#include "lrlab/fock.hpp"
#include "lrlab/interactions.hpp"
#include "lrlab/lattice.hpp"
#include "lrlab/trees.hpp"

namespace lrlab::bounds {

struct BoundReport {
    std::string case_id;
    std::string params;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
    bool pass = false;    // margin >= -1e-10 (absolute slack)
};

// fills margin/pass from lhs/rhs
BoundReport make_report(double lhs, double rhs, std::string case_id = "",
                        std::string params = "");

// ---------------------------------------------------------------------------
// pair commutator light cone
//
//   ||[tau_t(B1), B2]|| <= 2 D^-1 ||B1|| ||B2|| (e^{2 D |t| alpha} - 1)
//                            sum_{x in d_Psi(supp B1)} sum_{y in supp B2} F(|x-y|)
//
// alpha is the interaction W-norm, conv_const the certified convolution
// constant D.  Requires B1 even and disjoint supports.

double lr_rhs(const fock::FockOperator& B1, const fock::FockOperator& B2, double t,
              const interactions::Interaction& psi, const lattice::DecayFunction& F,
              double alpha, double conv_const);

// lhs by exact simulation under the Hamiltonian of psi + V on `work`
BoundReport verify_lr(const interactions::Interaction& psi,
                      const interactions::Potential& V, const fock::Context& work,
                      const fock::FockOperator& B1, const fock::FockOperator& B2,
                      double t, const lattice::DecayFunction& F, double alpha,
                      double conv_const);

// non-autonomous variant: tau_{t,s} from the Magnus propagator; alpha must
// dominate sup_t of the instantaneous W-norm
BoundReport verify_lr_nonautonomous(const interactions::TimeInteraction& psi,
                                    const interactions::Potential& V,
                                    const fock::Context& work,
                                    const fock::FockOperator& B1,
                                    const fock::FockOperator& B2, double s, double t,
                                    const lattice::DecayFunction& F, double alpha,
                                    double conv_const, double tol = 1e-9);

// ---------------------------------------------------------------------------
// finite-volume dynamics as a Cauchy sequence
//
//   ||tau^{(L2)}_t(B) - tau^{(L1)}_t(B)||
//       <= 2 ||B|| alpha |t| e^{4 D |t| alpha}
//          sum_{y in box(L2) \ box(L1)} sum_{x in supp B} F(|x-y|)

BoundReport convergence_rate_check(const interactions::Interaction& psi,
                                   const interactions::Potential& V,
                                   const fock::FockOperator& B, double t, int L1,
                                   int L2, int d, const lattice::DecayFunction& F,
                                   double alpha, double conv_const);

BoundReport convergence_rate_check_nonautonomous(
    const interactions::TimeInteraction& psi, const interactions::Potential& V,
    const fock::FockOperator& B, double s, double t, int L1, int L2, int d,
    const lattice::DecayFunction& F, double alpha, double conv_const,
    double tol = 1e-9);

// ---------------------------------------------------------------------------
// telescoping decomposition: identity, base norm, and per-shell block bounds
//
//   ||B(n)|| <= 2 ||B|| alpha |t| e^{4 D |t| alpha}
//               sum_{y in shell(n)} sum_{z in box(m)} F(|z-y|),   n > m

struct TelescopingReport {
    int m = 0;
    int N = 0;
    double identity_defect = 0.0;   // max-entry | sum_n B(n) - tau^{(N,x)}(chi_x B) |
    double base_norm_defect = 0.0;  // | ||B(m)|| - ||B|| |
    std::vector<BoundReport> block_bounds;  // n = m+1 .. N
    bool pass = false;
};

TelescopingReport telescoping_bound_check(const interactions::Interaction& psi,
                                          const interactions::Potential& V,
                                          const fock::FockOperator& B, double t,
                                          const lattice::Site& x, int m,
                                          const fock::Context& work,
                                          const lattice::DecayFunction& F,
                                          double alpha, double conv_const);

// ---------------------------------------------------------------------------
// multi-commutator bounds
//
//   ||[tau_{s_k} chi_{x_k}(B_k), ..., tau_{s_1} chi_{x_1}(B_1), chi_{x_0}(B_0)]||
//       <= 2^k prod_j ||B_j|| sum_T (kappa_T({m_j, x_j}) + R_{T,alpha})
//
// modes: Raw evaluates R by truncated lattice sums with certified tails,
// Poly/Exp substitute the closed-form majorants built from summability data.

enum class RemainderMode { Raw, Poly, Exp };

double multicomm_rhs(const std::vector<double>& b_norms, const trees::TreeData& data,
                     const lattice::DecayFunction& F,
                     const lattice::DecaySequenceData* seq, RemainderMode mode,
                     double alpha, double conv_const, int trunc);

// B[j] lives on a context inside box(m_j) at the origin; it is translated to
// x_j and (for j >= 1) evolved to time s_j under psi + V on `work`
BoundReport verify_multicomm(const interactions::Interaction& psi,
                             const interactions::Potential& V,
                             const fock::Context& work,
                             const std::vector<fock::FockOperator>& B,
                             const trees::TreeData& data,
                             const lattice::DecayFunction& F,
                             const lattice::DecaySequenceData* seq,
                             RemainderMode mode, double alpha, double conv_const,
                             int trunc);

// ---------------------------------------------------------------------------
// tree-decay bound for hopping observables B_j = a*_{x_j} a_{x_j + z_j}
// (|z_j| = 1, j >= 1), B_0 translated to x_0; rhs uses K0 (poly seq) or
// K1 (exponential seq) with the tree edge-decay sum

BoundReport tree_decay_check(const interactions::Interaction& psi,
                             const interactions::Potential& V,
                             const fock::Context& work, const fock::FockOperator& B0,
                             int m0, const std::vector<lattice::Site>& x,
                             const std::vector<lattice::Site>& z,
                             const std::vector<double>& s,
                             const lattice::DecayFunction& F,
                             const lattice::DecaySequenceData& seq, double alpha,
                             double conv_const);

}  // namespace lrlab::bounds
