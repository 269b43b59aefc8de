#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "lrlab/dynamics.hpp"

using namespace lrlab;
using namespace lrlab::dynamics;
using fock::Context;
using lattice::chain_sites;
using lattice::site;

namespace {

const Cplx I1{0.0, 1.0};

// independent dense route: tau_t(B) = e^{itH} B e^{-itH} via a fresh eigensolve
Mat heisenberg_oracle(const Mat& h, const Mat& b, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    Mat phase = Mat::Zero(ev.size(), ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        phase(i, i) = std::exp(Cplx(0.0, -t * ev(i)));
    const Mat u = es.eigenvectors() * phase * es.eigenvectors().adjoint();
    return u.adjoint() * b * u;
}

interactions::Interaction chain_model(const std::vector<lattice::Site>& window) {
    return interactions::hopping_density({0.4, 0.9}, {0.0, 0.3}, window);
}

}  // namespace

TEST_CASE("phase rotation of a single mode") {
    const Context ctx = Context::from_sites({site(0)});
    const double omega = 1.7;
    const FockOperator H = fock::scale(omega, fock::number_op(ctx, site(0)));
    const FockOperator a = fock::annihilation(ctx, site(0));

    Evolution ev(H);
    for (double t : {0.0, 0.3, -2.4}) {
        const FockOperator at = ev.heisenberg(a, t);
        // tau_t(a) = e^{-i omega t} a
        CHECK(fock::max_abs(fock::sub(at, fock::scale(std::exp(-I1 * omega * t), a))) <
              1e-13);
    }
    // generator i[H, a] = -i omega a
    CHECK(fock::max_abs(fock::sub(generator(H, a), fock::scale(-I1 * omega, a))) < 1e-13);
}

TEST_CASE("unitary group laws") {
    const auto window = chain_sites(0, 4);
    const Context ctx = Context::from_sites(window);
    const FockOperator H =
        interactions::hamiltonian(chain_model(window), {}, ctx);
    Evolution ev(H);

    const Mat id = Mat::Identity(16, 16);
    CHECK((ev.unitary(0.0) - id).cwiseAbs().maxCoeff() < 1e-14);
    const Mat u1 = ev.unitary(0.7), u2 = ev.unitary(-1.1);
    CHECK((u1 * u1.adjoint() - id).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((u1 * u2 - ev.unitary(0.7 - 1.1)).cwiseAbs().maxCoeff() < 1e-13);

    // evolution preserves the norm and the trace
    const FockOperator B = fock::number_op(ctx, site(1));
    const FockOperator Bt = ev.heisenberg(B, 1.3);
    CHECK(fock::spectral_norm(Bt) == doctest::Approx(1.0));
    CHECK(std::abs(Bt.m.trace() - B.m.trace()) < 1e-12);
}

TEST_CASE("sector fast path agrees with a fresh dense solve") {
    const auto window = chain_sites(0, 8);
    const Context ctx = Context::from_sites(window);
    interactions::Potential V = interactions::random_potential(window, 0.6, 5);
    const FockOperator H = interactions::hamiltonian(chain_model(window), V, ctx);

    Evolution ev(H);
    CHECK(ev.sector_path());  // number-conserving and dim >= 256

    const FockOperator B =
        fock::add(fock::multiply(fock::creation(ctx, site(2)),
                                 fock::annihilation(ctx, site(5))),
                  fock::multiply(fock::creation(ctx, site(5)),
                                 fock::annihilation(ctx, site(2))));
    const double t = 0.9;
    const FockOperator fast = ev.heisenberg(B, t);
    const Mat slow = heisenberg_oracle(H.m, B.m, t);
    CHECK((fast.m - slow).cwiseAbs().maxCoeff() < 1e-11);

    // spectrum() assembled on demand matches H
    const Spectrum& sp = ev.spectrum();
    const Mat rebuilt =
        sp.evecs * sp.evals.cast<Cplx>().asDiagonal() * sp.evecs.adjoint();
    CHECK((rebuilt - H.m).cwiseAbs().maxCoeff() < 1e-11);

    // a parity-breaking observable forces the dense route; results still agree
    const FockOperator a2 = fock::annihilation(ctx, site(2));
    CHECK((ev.heisenberg(a2, t).m - heisenberg_oracle(H.m, a2.m, t)).cwiseAbs().maxCoeff() <
          1e-11);

    CHECK(fock::max_abs(fock::sub(evolve_heisenberg(H, B, t), fast)) < 1e-12);
}

TEST_CASE("gibbs state of a single mode, and stationarity") {
    const Context ctx = Context::from_sites({site(0)});
    const double eps = 0.8, beta = 1.3;
    const FockOperator H = fock::scale(eps, fock::number_op(ctx, site(0)));
    const GibbsState gs = gibbs_state(H, beta);

    const double z = 1.0 + std::exp(-beta * eps);
    CHECK(gs.value(fock::identity_op(ctx)) == doctest::Approx(1.0));
    CHECK(gs.value(fock::number_op(ctx, site(0))) ==
          doctest::Approx(std::exp(-beta * eps) / z));

    // invariance under the modular flow
    const auto window = chain_sites(0, 4);
    const Context c4 = Context::from_sites(window);
    const FockOperator H4 = interactions::hamiltonian(chain_model(window), {}, c4);
    const GibbsState g4 = gibbs_state(H4, 0.7);
    Evolution ev(H4);
    const FockOperator B = fock::number_op(c4, site(2));
    CHECK(g4.value(ev.heisenberg(B, 1.9)) == doctest::Approx(g4.value(B)).epsilon(1e-10));

    // beta -> 0 is the tracial state
    const GibbsState flat = gibbs_state(H4, 0.0);
    CHECK(flat.value(fock::number_op(c4, site(0))) == doctest::Approx(0.5));
}

TEST_CASE("propagator against the exact exponential") {
    const auto window = chain_sites(0, 4);
    const Context ctx = Context::from_sites(window);
    const FockOperator H = interactions::hamiltonian(chain_model(window), {}, ctx);
    Evolution ev(H);
    const Protocol pr = constant_protocol(H);

    for (auto [s, t] : {std::pair{0.0, 1.4}, {0.5, -0.9}, {-1.0, -1.0}}) {
        const PropagatorResult res = propagator(pr, s, t, 1e-10);
        CHECK(res.defect <= 1e-10 * std::max(1.0, std::abs(t - s)) + 1e-15);
        const Mat exact = ev.unitary(t - s);
        CHECK((res.u - exact).cwiseAbs().maxCoeff() < 1e-9);
        if (s == t) CHECK((res.u - Mat::Identity(16, 16)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("driven propagator satisfies the cocycle laws") {
    const auto window = chain_sites(0, 4);
    const Context ctx = Context::from_sites(window);

    interactions::TimeInteraction psiT;
    psiT.static_part = chain_model(window);
    interactions::Drive d;
    d.part = interactions::hopping_density({0.0, 0.5}, {}, window);
    d.wave = interactions::Drive::Wave::Sine;
    d.amp = 0.7;
    d.omega = 1.3;
    d.phase = 0.4;
    psiT.drives.push_back(d);

    const Protocol pr = interaction_protocol(psiT, {}, ctx);

    const double s = 0.2, mid = 0.8, t = 1.5;
    const Mat u_ts = propagator(pr, s, t, 1e-10).u;
    const Mat u_tm = propagator(pr, mid, t, 1e-10).u;
    const Mat u_ms = propagator(pr, s, mid, 1e-10).u;
    CHECK((u_ts - u_tm * u_ms).cwiseAbs().maxCoeff() < 1e-8);

    // reversing the span inverts the propagator
    const Mat u_st = propagator(pr, t, s, 1e-10).u;
    CHECK((u_ts * u_st - Mat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-8);

    // observable route: evolve there and back
    const FockOperator B = fock::number_op(ctx, site(1));
    const FockOperator there = evolve_nonautonomous(pr, B, s, t, 1e-10);
    CHECK(there.ctx.n() == 4);
    const Mat back = u_ts.adjoint() * (u_ts * there.m * u_ts.adjoint()) * u_ts;
    CHECK((back - there.m).cwiseAbs().maxCoeff() < 1e-12);

    // small-context observables are embedded before evolving
    const FockOperator nb = fock::number_op(Context::from_sites({site(1)}), site(1));
    const FockOperator emb = evolve_nonautonomous(pr, nb, s, t, 1e-10);
    CHECK(fock::max_abs(fock::sub(emb, there)) < 1e-12);
}

TEST_CASE("dyson-phillips terms of a constant protocol are the Taylor terms") {
    const auto window = chain_sites(0, 3);
    const Context ctx = Context::from_sites(window);
    const FockOperator H = interactions::hamiltonian(chain_model(window), {}, ctx);
    const Protocol pr = constant_protocol(H);

    const double s = 0.1, t = 0.8;
    const auto terms = dyson_phillips_terms(pr, s, t, 5);
    REQUIRE(terms.size() == 6);

    Mat pw = Mat::Identity(8, 8);
    double fact = 1.0;
    for (int j = 0; j <= 5; ++j) {
        if (j > 0) {
            pw = (pw * (-I1 * (t - s)) * H.m).eval();
            fact *= j;
        }
        CHECK((terms[static_cast<std::size_t>(j)] - pw / fact).cwiseAbs().maxCoeff() <
              1e-10);
    }

    // partial sums converge to the true propagator; keep ||H|| (t - s) small
    // enough that the factorial tail beats 1e-6 by order eight
    const double t2 = 0.35;
    const Mat u = propagator(pr, s, t2, 1e-12).u;
    double prev = 1e300;
    for (int k = 2; k <= 8; k += 2) {
        const double err = (dyson_phillips(pr, s, t2, k) - u).cwiseAbs().maxCoeff();
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("interaction picture is the three-propagator conjugation") {
    const auto window = chain_sites(0, 3);
    const Context ctx = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    interactions::Potential V = interactions::random_potential(window, 0.9, 11);

    interactions::TimeInteraction stat;
    stat.static_part = psi;
    const Protocol full = interaction_protocol(stat, V, ctx);
    interactions::TimeInteraction empty_psi;
    const Protocol pot = interaction_protocol(empty_psi, V, ctx);

    const FockOperator B = fock::number_op(ctx, site(1));
    const double s = 0.0, t = 1.1;
    const FockOperator tilde = interaction_picture_evolve(full, pot, B, s, t, 1e-10);

    // oracle from exact exponentials: both generators are time-independent here
    const FockOperator Hfull = interactions::hamiltonian(psi, V, ctx);
    const FockOperator Hv = interactions::hamiltonian(interactions::Interaction{}, V, ctx);
    Evolution evf(Hfull), evv(Hv);
    const Mat uh = evf.unitary(t - s), uv = evv.unitary(t - s);
    const Mat expect = uh.adjoint() * (uv * B.m * uv.adjoint()) * uh;
    CHECK((tilde.m - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("telescoping blocks sum exactly to the widest evolution") {
    const auto work_sites = chain_sites(0, 8);
    const Context work = Context::from_sites(work_sites);
    const interactions::Interaction psi = chain_model(work_sites);
    interactions::Potential V = interactions::random_potential(work_sites, 0.5, 3);

    const Context c1 = Context::from_sites({site(0)});
    const FockOperator B = fock::sub(fock::scale(2.0, fock::number_op(c1, site(0))),
                                     fock::identity_op(c1));
    const lattice::Site x = site(3);
    const double t = 0.8;

    const TelescopingBlocks tb = telescoping_blocks(psi, V, B, t, x, 0, work);
    CHECK(tb.m == 0);
    CHECK(tb.N == 3);  // box of radius 4 around x = 3 leaves the 8-site chain
    REQUIRE(tb.blocks.size() == 4);
    REQUIRE(tb.partial.size() == 4);

    // partial sums telescope exactly
    FockOperator acc = tb.blocks[0];
    for (std::size_t i = 1; i < tb.blocks.size(); ++i) {
        acc = fock::add(acc, tb.blocks[i]);
        CHECK(fock::max_abs(fock::sub(acc, tb.partial[i])) < 1e-12);
    }

    // innermost block is the evolution under the radius-m box Hamiltonian
    const FockOperator h0 =
        interactions::hamiltonian(psi, V, lattice::box_sites(0, 1, x), work);
    const FockOperator chi_b = fock::translate_into(B, x, work);
    CHECK(fock::max_abs(fock::sub(tb.partial[0],
                                  Evolution(h0).heisenberg(chi_b, t))) < 1e-12);

    // m > 0 starts the ladder higher but reaches the same top
    const TelescopingBlocks tb1 = telescoping_blocks(psi, V, B, t, x, 1, work);
    CHECK(tb1.m == 1);
    CHECK(tb1.N == 3);
    CHECK(fock::max_abs(fock::sub(tb1.partial.back(), tb.partial.back())) < 1e-12);

    // the box of radius m must fit
    CHECK_THROWS_AS(telescoping_blocks(psi, V, B, t, site(0), 1, work),
                    std::invalid_argument);
}
