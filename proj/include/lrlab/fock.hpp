#pragma once
// fermionic Fock algebra on finite site contexts (occupation basis, dense matrices)
//
// conventions: a context is a strictly lex-sorted site list; basis index b has
// bit i = occupation of sites[i]; a_i carries the sign (-1)^(n_0+...+n_{i-1})

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lrlab/common.hpp"
#include "lrlab/lattice.hpp"

namespace lrlab::fock {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// contexts

class Context {
  public:
    Context() = default;
    static Context from_sites(std::vector<lattice::Site> sites);  // sorts, rejects duplicates
    static Context box(int L, int d);
    static Context box(int L, int d, const lattice::Site& center);
    static Context chain(int x0, int n);

    const std::vector<lattice::Site>& sites() const { return sites_; }
    int n() const { return static_cast<int>(sites_.size()); }
    std::size_t dim() const { return std::size_t{1} << sites_.size(); }

    bool contains(const lattice::Site& s) const;
    int index_of(const lattice::Site& s) const;  // -1 if absent
    bool subset_of(const Context& big) const;
    // positions of this context's sites inside big (strictly increasing)
    std::vector<int> positions_in(const Context& big) const;
    Context unite(const Context& other) const;

    friend bool operator==(const Context& a, const Context& b) { return a.sites_ == b.sites_; }
    friend bool operator!=(const Context& a, const Context& b) { return !(a == b); }

  private:
    std::vector<lattice::Site> sites_;
};

// ---------------------------------------------------------------------------
// operators

struct FockOperator {
    Context ctx;
    Mat m;
};

FockOperator zero_op(const Context& ctx);
FockOperator identity_op(const Context& ctx);
FockOperator annihilation(const Context& ctx, const lattice::Site& x);
FockOperator creation(const Context& ctx, const lattice::Site& x);
FockOperator number_op(const Context& ctx, const lattice::Site& x);
// total number operator of a sub-region (defaults to the whole context)
FockOperator number_total(const Context& ctx);
FockOperator number_total(const Context& ctx, const std::vector<lattice::Site>& region);

// isometric *-embedding into a larger context (Jordan-Wigner sign-correct)
FockOperator embed(const FockOperator& B, const Context& big);

// lattice translation chi_x; shifted sites must lie in nobody's way (lex order
// is preserved automatically). translate_into also embeds into target.
FockOperator translate(const FockOperator& B, const lattice::Site& shift);
FockOperator translate_into(const FockOperator& B, const lattice::Site& shift,
                            const Context& target);

// algebra; operands on different contexts are first embedded into the union
FockOperator add(const FockOperator& A, const FockOperator& B);
FockOperator sub(const FockOperator& A, const FockOperator& B);
FockOperator scale(Cplx c, const FockOperator& A);
FockOperator multiply(const FockOperator& A, const FockOperator& B);
FockOperator adjoint(const FockOperator& A);
FockOperator commutator(const FockOperator& A, const FockOperator& B);
FockOperator anticommutator(const FockOperator& A, const FockOperator& B);
// right-nested [B_k, ..., B_1, B_0]; ops = {B_0, B_1, ..., B_k}; depth guard k <= 9
FockOperator multicommutator(const std::vector<FockOperator>& ops);

// ---------------------------------------------------------------------------
// norms and symmetries

double max_abs(const Mat& m);
double max_abs(const FockOperator& A);

// operator (spectral) norm: Hermitian eigensolve of B^H B for dim <= 512,
// power iteration (relative 1e-10, <= 1e4 iterations) above
double spectral_norm(const Mat& m);
double spectral_norm(const FockOperator& A);

struct ParityReport {
    double even_defect;  // max-entry |P B P - B|
    double odd_defect;   // max-entry |P B P + B|
};
ParityReport parity_defects(const FockOperator& B);
bool is_even(const FockOperator& B, double tol = 1e-12);

// gauge transform sigma_theta(B) = e^{i theta N} B e^{-i theta N}
FockOperator gauge_transform(const FockOperator& B, double theta);
// max over a 16-point theta grid of max-entry |sigma_theta(B) - B|; the grid
// resolves any charge imbalance up to +-15, ample for contexts <= 12 sites
double gauge_defect(const FockOperator& B);

// ---------------------------------------------------------------------------
// canonical anticommutation relations, checked exactly over all site pairs

struct CarReport {
    double max_aa_defect;        // max-entry |{a_x, a_y}|
    double max_a_adag_defect;    // max-entry |{a_x, a*_y} - delta_{xy} 1|
    double max_norm_deviation;   // max over x of | ||a_x|| - 1 |
};
CarReport car_suite(const Context& ctx);

}  // namespace lrlab::fock
