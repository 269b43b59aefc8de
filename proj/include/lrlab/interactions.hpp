#pragma once
// interactions: families of even self-adjoint terms on finite supports,
// single-site potentials, Hamiltonian assembly, W-norms

#include <map>
#include <vector>

#include "lrlab/fock.hpp"
#include "lrlab/lattice.hpp"

namespace lrlab::interactions {

struct Term {
    std::vector<lattice::Site> zsites;  // sorted support
    fock::FockOperator op;              // on the minimal context of zsites
    double norm;                        // spectral norm, cached at build time
};

struct Interaction {
    std::vector<Term> terms;
    int range = 0;  // max-norm diameter of the largest support (guard <= 8)
};

// single-site potential x -> V_x (coefficient of n_x); absent sites mean 0
struct Potential {
    std::map<lattice::Site, double> v;
    double operator()(const lattice::Site& x) const {
        auto it = v.find(x);
        return it == v.end() ? 0.0 : it->second;
    }
};

// ---------------------------------------------------------------------------
// builders (terms enumerated over a finite window of sites)

// Psi_{x} = (h0 + v0) n_x ; Psi_{x,y} = h(r)(a*_x a_y + a*_y a_x) + 2 v(r) n_x n_y
// with r = |x-y|_inf; tables h, v are indexed by r = 0..R
Interaction hopping_density(const std::vector<double>& h, const std::vector<double>& v,
                            const std::vector<lattice::Site>& window);

// Psi_{x} = 2d n_x ; Psi_{x,y} = -(a*_x a_y + a*_y a_x) for |x-y| = 1
// (matrix elements of the discrete Laplacian)
Interaction discrete_laplacian(int d, const std::vector<lattice::Site>& window);

// density-density only: Psi_{x,y} = 2 v(r) n_x n_y, r >= 1 (commutes with every n_z)
Interaction density_density(const std::vector<double>& v,
                            const std::vector<lattice::Site>& window);

Interaction combine(const Interaction& a, const Interaction& b);
Interaction scale_interaction(double c, const Interaction& a);

// V_x = lambda * omega(x), omega i.i.d. uniform [-1,1] keyed by (seed, site index)
Potential random_potential(const std::vector<lattice::Site>& window, double lambda,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// derived objects

// sum of embedded terms with support inside `region`, plus sum_x V_x n_x,
// represented on ctx (region must be a subset of ctx.sites())
fock::FockOperator hamiltonian(const Interaction& psi, const Potential& V,
                               const std::vector<lattice::Site>& region,
                               const fock::Context& ctx);
fock::FockOperator hamiltonian(const Interaction& psi, const Potential& V,
                               const fock::Context& ctx);

// energy observable: sum of terms with support inside region, no potential
fock::FockOperator energy_observable(const Interaction& psi,
                                     const std::vector<lattice::Site>& region,
                                     const fock::Context& ctx);

// ||Psi||_W = sup_{x,y in window} sum_{Z containing x,y} ||Psi_Z|| / F(|x-y|);
// exact for finite-range interactions when the window has radius >= 2 * range
double w_norm(const Interaction& psi, const lattice::DecayFunction& F,
              const std::vector<lattice::Site>& window);

// {x in region : some term Z with x in Z sticks out of region}
std::vector<lattice::Site> boundary_set(const Interaction& psi,
                                        const std::vector<lattice::Site>& region);

// ---------------------------------------------------------------------------
// time-dependent interactions: static part + sum_i f_i(t) * part_i with
// f_i(t) = amp * wave(omega t + phase); sup_t |f_i| is known analytically,
// so sup_t ||Psi^(t)||_W has a certified bound

struct Drive {
    enum class Wave { Sine, Cosine, Constant };
    Interaction part;
    Wave wave = Wave::Sine;
    double amp = 0.0;
    double omega = 0.0;
    double phase = 0.0;

    double value(double t) const;
    double sup_abs() const { return std::abs(amp); }
};

struct TimeInteraction {
    Interaction static_part;
    std::vector<Drive> drives;

    Interaction at_time(double t) const;
    // majorant interaction whose W-norm dominates sup_t ||Psi^(t)||_W
    Interaction envelope() const;
};

double sup_w_norm(const TimeInteraction& psi, const lattice::DecayFunction& F,
                  const std::vector<lattice::Site>& window);

}  // namespace lrlab::interactions
