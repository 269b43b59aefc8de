#pragma once
// response: the disordered-fermion workbench.  Random on-site potentials on a
// finite box, Peierls-type electromagnetic perturbations, current observables,
// the space-averaged paramagnetic transport coefficient, its atomic spectral
// measure (finite-volume AC proxy), linear-response currents, and the Taylor
// expansion of dynamical increments in the field strength.

#include <complex>
#include <cstdint>
#include <vector>

#include "lrlab/dynamics.hpp"
#include "lrlab/fock.hpp"
#include "lrlab/interactions.hpp"
#include "lrlab/lattice.hpp"

namespace lrlab::response {

using fock::Context;
using fock::Cplx;
using fock::FockOperator;
using fock::Mat;

// ---------------------------------------------------------------------------
// disordered model: H = sum of hopping (discrete Laplacian) + interparticle
// part + lambda * sum_x omega(x) n_x on the box of radius L.  omega is i.i.d.
// uniform [-1,1], keyed by (seed, site index); psi_ip must commute with every
// n_x (density-density only) so the full Hamiltonian conserves particle number.

struct DisorderedModel {
    int L = 2;
    int d = 1;
    double lambda = 0.5;
    double beta = 1.0;
    std::uint64_t seed = 1;
    interactions::Potential omega;      // raw disorder in [-1,1]; scaled by lambda
    interactions::Interaction psi_ip;   // interparticle part (number conserving)
    Context ctx;                        // box(L, d)
};

// ip_strength: coefficient of the nearest-neighbor density-density part
DisorderedModel make_model(int L, int d, double lambda, std::uint64_t seed,
                           double beta = 1.0, double ip_strength = 0.4);

// same geometry/couplings, fresh disorder stream for realization r
DisorderedModel with_realization(const DisorderedModel& base, std::uint64_t r);

FockOperator model_hamiltonian(const DisorderedModel& model);

// max_abs([H, N]) -- zero for every shipped model
double number_conservation_defect(const DisorderedModel& model);

// ---------------------------------------------------------------------------
// electromagnetic field protocol.  Per axis, a smooth compactly supported
// vector potential A_q(t) = amp * bump(t) * sin(omega_c t + phase) with
// bump(t) = exp(-1/(1-u^2)), u = 2(t - t_on)/width - 1, supported on
// [t_on, t_on + width], t_on >= 0; the electric field is E_q = -A_q'.

struct AxisField {
    double amp = 0.0;
    double t_on = 0.25;
    double width = 2.5;
    double omega_c = 3.0;
    double phase = 0.4;

    double a(double t) const;  // vector potential
    double e(double t) const;  // electric field -a'(t)
};

struct FieldProtocol {
    int l = 1;          // active box radius (perturbation lives in box(l+1))
    double eta = 0.0;   // field strength
    std::vector<AxisField> axes;

    int dim() const { return static_cast<int>(axes.size()); }
};

// one identical AxisField per axis
FieldProtocol make_field(int d, int l, double eta, const AxisField& shape = AxisField{});

// Peierls weight w_{x,x+z}(eta,t) for |z|_1 <= 1; zero offset gives 0.
// For z = +-e_q the weight is 1 - exp(+-i eta A_q(t)); conjugation swaps the
// bond orientation, so w-bar_{x,y} = w_{y,x}.
Cplx peierls_weight(const FieldProtocol& fp, const lattice::Site& x,
                    const lattice::Site& z, double t);

// W_t = sum over ordered bonds (x, x+z), |z| = 1, touching box(l), of
// w_{x,x+z} a*_x a_{x+z}; including both orientations of every such bond makes
// W self-adjoint with support inside box(l+1).
FockOperator perturbation_operator(const FieldProtocol& fp, double t, const Context& ctx);

// dW/d eta at eta = 0 (closed form: d/d eta [1 - e^{+-i eta A}] = -+ i A)
FockOperator perturbation_derivative(const FieldProtocol& fp, double t, const Context& ctx);

// protocol t -> H + W_t; when W_t is exactly zero the static matrix is
// returned unchanged, so the eta = 0 protocol is bitwise the unperturbed one
dynamics::Protocol perturbed_protocol(const DisorderedModel& model, const FieldProtocol& fp);

// ---------------------------------------------------------------------------
// currents

// I_{(x,y)} = i (a*_y a_x - a*_x a_y); self-adjoint, even, gauge invariant
FockOperator current_observable(const lattice::Site& x, const lattice::Site& y,
                                const Context& ctx);

// sum_{x in box(l)} I_{(x+e_k, x)}; requires box(l)+e_k inside ctx
FockOperator axis_current(int l, int k, const Context& ctx);

// ---------------------------------------------------------------------------
// paramagnetic transport coefficient.  Everything downstream works in the
// eigenbasis of H: currents rotated once, Bohr frequencies and Gibbs weights
// cached.

struct LehmannData {
    Eigen::VectorXd evals;
    Eigen::VectorXd pop;           // Gibbs populations
    std::vector<Mat> a_hat;        // axis currents in the eigenbasis
    double cells = 1.0;            // |box(l)|
    int d = 1;
    int l = 0;
};

LehmannData lehmann_data(const DisorderedModel& model, int l);

// {C_p(t)}_{k,q} = |box(l)|^{-1} int_0^t i [tau_{-s}(A^{(q)}), A^{(k)}] ds,
// done in closed form per matrix element (each integrand is e^{-is w})
FockOperator paramagnetic_observable(const DisorderedModel& model, double t, int k,
                                     int q, int l);

// Gibbs expectation of the same coefficient, directly from LehmannData
Cplx paramagnetic_value(const LehmannData& data, double t, int k, int q);
Mat paramagnetic_matrix(const LehmannData& data, double t);  // d x d of values

// disorder average over n realizations (seeded per index, reduced in index
// order); se is the entrywise standard error, zero when lambda = 0
struct XiReport {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd se;
    double imag_defect = 0.0;
    int realizations = 0;
};
XiReport xi_p(const DisorderedModel& model, int l, double t, int n_realizations,
              int threads = 1);

// ---------------------------------------------------------------------------
// finite-volume AC measure.  Atoms sit at Bohr frequencies nu = E_n - E_m;
// the stored weight is the AC-measure weight (the parent measure assigns
// nu^2 * weight to {nu}).  Weights are real symmetric PSD, the atom list is
// symmetric under nu <-> -nu, and
//     Xi_p(t) = sum_atoms (cos(t nu) - 1) * weight(nu)
// reproduces the Gibbs value of C_p(t) exactly (Gibbs gives no mass at 0).

struct Atom {
    double nu = 0.0;
    Eigen::MatrixXd weight;  // d x d
};

struct SpectralMeasure {
    std::vector<Atom> atoms;  // sorted by nu, +- paired
    int d = 1;
    double cells = 1.0;
    double psd_defect = 0.0;       // most negative weight eigenvalue seen
    double symmetry_defect = 0.0;  // max |w - w^T| before symmetrization
    double imag_defect = 0.0;      // max imaginary part discarded
    int clusters_merged = 0;       // frequency pairs merged at the 1e-9 gap
};

// disorder-averaged atomic measure (atoms of all realizations, weights / n)
SpectralMeasure ac_measure(const DisorderedModel& model, int l, int n_realizations,
                           int threads = 1);

// sum_atoms (cos(t nu) - 1) weight(nu)
Eigen::MatrixXd lk_reconstruction(const SpectralMeasure& mu, double t);

// moments[e] = sum_atoms nu^e weight(nu), e = 0..max_order; odd orders vanish
// by symmetry, even orders are PSD
std::vector<Eigen::MatrixXd> moment_report(const SpectralMeasure& mu, int max_order);

// ---------------------------------------------------------------------------
// linear response vs. the full field simulation

// J_p(t), axis k: int_0^t sum_q rho(C_p(t-s))_{k,q} E_q(s) ds, with the state
// value of C_p evaluated through the atomic measure (Gibbs is tau-invariant)
std::vector<double> linear_response_current(const DisorderedModel& model,
                                            const FieldProtocol& fp, double t);

// full simulation: |box(l)|^{-1} [rho(tau~_{t,0}(A^{(k)})) - rho(A^{(k)})]
std::vector<double> full_current(const DisorderedModel& model, const FieldProtocol& fp,
                                 double t, double tol = 1e-9);

// ---------------------------------------------------------------------------
// increments T_{t,s} = tau~_{t,s}(U_Phi) - tau_{t,s}(U_Phi) and their Taylor
// expansion in eta around 0

// both transports run through the same Magnus propagator, so eta = 0 gives
// the exact zero operator
FockOperator increment(const DisorderedModel& model, const FieldProtocol& fp,
                       const interactions::Interaction& phi, double s, double t,
                       double tol = 1e-9);

// order-k Taylor term at eta_0 = 0 (k = 1, 2):
//   i^k int_s^t ds_1 ... int_s^{s_{k-1}} ds_k
//     [X(s_k), ..., X(s_1), tau_{t-s}(U_Phi)]^{(k+1)},
// X(r) = tau_{r-s}(W_r(eta)); time integrals by nested 16-node Gauss-Legendre
FockOperator taylor_term(const DisorderedModel& model, const FieldProtocol& fp,
                         const interactions::Interaction& phi, double s, double t, int k);

// defect of the exact first-difference identity
//   tau~^{eta}_{t,s}(U) - tau~^{eta0}_{t,s}(U)
//     = i int_s^t tau~^{eta}_{s1,s}([W_{s1}(eta) - W_{s1}(eta0),
//                                    tau~^{eta0}_{t,s1}(U)]) ds_1
double increment_identity_defect(const DisorderedModel& model, const FieldProtocol& fp,
                                 double eta0, const interactions::Interaction& phi,
                                 double s, double t, double tol = 1e-12);

// log-log slope of ||T(eta) - sum_{k<=m} term_k(eta)|| over
// eta = 10^{-1}, 10^{-1.5}, ..., 10^{-3}; the remainder after order m has
// slope >= m + 1 up to quadrature noise
double taylor_slope(const DisorderedModel& model, const FieldProtocol& shape,
                    const interactions::Interaction& phi, double s, double t, int m,
                    double tol = 1e-12);

}  // namespace lrlab::response
