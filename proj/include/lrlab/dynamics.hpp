#pragma once
// Heisenberg dynamics: autonomous evolution by exact eigendecomposition (with a
// number-sector fast path), non-autonomous evolution by 4th-order commutator-free
// Magnus with adaptive step halving, Dyson-Phillips partial sums, telescoping
// decompositions, Gibbs states

#include <functional>
#include <vector>

#include "lrlab/fock.hpp"
#include "lrlab/interactions.hpp"

namespace lrlab::dynamics {

using fock::Context;
using fock::Cplx;
using fock::FockOperator;
using fock::Mat;

// ---------------------------------------------------------------------------
// autonomous dynamics

struct Spectrum {
    Eigen::VectorXd evals;
    Mat evecs;  // H = evecs * diag(evals) * evecs^H
};
Spectrum hermitian_eig(const Mat& h);

// i[H, B]
FockOperator generator(const FockOperator& H, const FockOperator& B);

// evolution engine for one Hamiltonian; eigendecomposes once, then applies
// tau_t(B) = e^{itH} B e^{-itH} for arbitrary t and B.  Hamiltonians commuting
// with the total number operator are decomposed sector by sector; both paths
// are exact and agree to roundoff.
class Evolution {
  public:
    explicit Evolution(FockOperator H);

    const Context& ctx() const { return ctx_; }
    Mat unitary(double t) const;  // e^{-itH}
    FockOperator heisenberg(const FockOperator& B, double t) const;
    bool sector_path() const { return !sectors_.empty(); }

    // dense spectral data (assembled on demand for the sector path)
    const Spectrum& spectrum() const;

  private:
    struct Sector {
        std::vector<Eigen::Index> idx;
        Eigen::VectorXd evals;
        Mat evecs;
    };
    Context ctx_;
    std::vector<Sector> sectors_;
    mutable Spectrum spec_;
    mutable bool spec_ready_ = false;
};

FockOperator evolve_heisenberg(const FockOperator& H, const FockOperator& B, double t);

// ---------------------------------------------------------------------------
// Gibbs states

struct GibbsState {
    Spectrum spec;
    Eigen::VectorXd p;  // Gibbs weights in the eigenbasis
    double beta;
    Context ctx;

    double value(const FockOperator& B) const;  // tr(rho B), real part
};
GibbsState gibbs_state(const FockOperator& H, double beta);

// ---------------------------------------------------------------------------
// non-autonomous dynamics

struct Protocol {
    Context ctx;
    std::function<Mat(double)> h;  // Hermitian matrix at each time
};

Protocol constant_protocol(const FockOperator& H);
// protocol of a time-dependent interaction plus a static potential; the second
// form keeps only terms supported inside `region`
Protocol interaction_protocol(const interactions::TimeInteraction& psi,
                              const interactions::Potential& V, const Context& ctx);
Protocol interaction_protocol(const interactions::TimeInteraction& psi,
                              const interactions::Potential& V,
                              const std::vector<lattice::Site>& region,
                              const Context& ctx);

struct PropagatorResult {
    Mat u;          // U_{t,s}: solves dU/dt = -i H(t) U, U_{s,s} = 1
    double defect;  // accepted step-halving defect (spectral norm)
    int steps;
};
PropagatorResult propagator(const Protocol& pr, double s, double t, double tol = 1e-9);

// tau_{t,s}(B) = U*_{t,s} B U_{t,s}
FockOperator evolve_nonautonomous(const Protocol& pr, const FockOperator& B, double s,
                                  double t, double tol = 1e-9);

// Dyson-Phillips terms T_j = (-i)^j int_s^t ds_1 ... int_s^{s_{j-1}} ds_j
// H(s_1) ... H(s_j), j = 0..order (iterated Gauss-Legendre, 16 nodes per level);
// dyson_phillips returns the partial sum
std::vector<Mat> dyson_phillips_terms(const Protocol& pr, double s, double t, int order);
Mat dyson_phillips(const Protocol& pr, double s, double t, int order);

// interaction-picture evolution built from the three-propagator product for the
// split H(t) = H_static + V(t); full = protocol of H, pot = protocol of V alone
FockOperator interaction_picture_evolve(const Protocol& full, const Protocol& pot,
                                        const FockOperator& B, double s, double t,
                                        double tol = 1e-9);

// ---------------------------------------------------------------------------
// telescoping decomposition around a translated observable
//
// partial[i] = tau_t^{(m+i,x)}(chi_x(B)) evolved under the Hamiltonian of the
// box of radius m+i centered at x; blocks[0] = partial[0] and
// blocks[i] = partial[i] - partial[i-1], so partial sums telescope exactly.
// N is the largest shell index whose box still fits in the working context.

struct TelescopingBlocks {
    int m = 0;
    int N = 0;
    std::vector<FockOperator> blocks;
    std::vector<FockOperator> partial;
};

TelescopingBlocks telescoping_blocks(const interactions::Interaction& psi,
                                     const interactions::Potential& V,
                                     const FockOperator& B, double t,
                                     const lattice::Site& x, int m, const Context& work);

}  // namespace lrlab::dynamics
