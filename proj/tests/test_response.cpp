#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "lrlab/response.hpp"

using namespace lrlab;
using namespace lrlab::response;
using lattice::site;

TEST_CASE("model assembly: geometry, disorder, conservation") {
    const DisorderedModel m = make_model(2, 1, 0.5, 7);
    CHECK(m.ctx.n() == 5);
    CHECK(m.L == 2);
    CHECK(number_conservation_defect(m) < 1e-14);

    // disorder stream is keyed: same seed reproduces, realizations differ
    const DisorderedModel m2 = make_model(2, 1, 0.5, 7);
    const DisorderedModel r1 = with_realization(m, 1);
    double same = 0.0, diff = 0.0;
    for (const auto& x : m.ctx.sites()) {
        same = std::max(same, std::abs(m.omega(x) - m2.omega(x)));
        diff = std::max(diff, std::abs(m.omega(x) - r1.omega(x)));
        CHECK(std::abs(m.omega(x)) <= 1.0);
    }
    CHECK(same == 0.0);
    CHECK(diff > 1e-3);

    // hamiltonian is self-adjoint and carries the scaled disorder
    const FockOperator H = model_hamiltonian(m);
    CHECK(fock::max_abs(fock::sub(H, fock::adjoint(H))) < 1e-14);
    const DisorderedModel clean = make_model(2, 1, 0.0, 7);
    const FockOperator Hc = model_hamiltonian(clean);
    const FockOperator delta = fock::sub(H, Hc);
    // difference is diagonal: lambda * sum omega(x) n_x
    for (const auto& x : m.ctx.sites()) {
        const Eigen::Index i = 1 << m.ctx.index_of(x);
        CHECK(std::abs(delta.m(i, i) - 0.5 * m.omega(x)) < 1e-13);
    }
}

TEST_CASE("axis field: support, smoothness, derivative consistency") {
    AxisField f;
    f.amp = 0.8;
    CHECK(f.a(f.t_on) == 0.0);
    CHECK(f.a(f.t_on + f.width) == 0.0);
    CHECK(f.a(f.t_on - 0.3) == 0.0);
    CHECK(f.a(f.t_on + f.width + 0.3) == 0.0);
    CHECK(std::abs(f.a(f.t_on + 0.5 * f.width)) > 0.0);

    // e = -a' by central difference in the interior
    const double t0 = f.t_on + 0.9, h = 1e-6;
    const double num = -(f.a(t0 + h) - f.a(t0 - h)) / (2.0 * h);
    CHECK(f.e(t0) == doctest::Approx(num).epsilon(1e-5));
}

TEST_CASE("peierls weights and the perturbation operator") {
    const DisorderedModel m = make_model(2, 1, 0.4, 3);
    AxisField shape;
    shape.amp = 0.8;
    const FieldProtocol fp = make_field(1, 1, 0.3, shape);
    const double t = shape.t_on + 1.0;

    // zero offset gives no weight; +-e_1 weights are conjugate-swapped
    CHECK(peierls_weight(fp, site(0), site(0), t) == Cplx(0.0, 0.0));
    const Cplx wp = peierls_weight(fp, site(0), site(1), t);
    const Cplx wm = peierls_weight(fp, site(1), site(-1), t);
    CHECK(std::abs(wp - (Cplx(1.0, 0.0) - std::exp(Cplx(0.0, fp.eta * shape.a(t))))) <
          1e-14);
    CHECK(std::abs(wm - (Cplx(1.0, 0.0) - std::exp(Cplx(0.0, -fp.eta * shape.a(t))))) <
          1e-14);

    const FockOperator W = perturbation_operator(fp, t, m.ctx);
    CHECK(fock::max_abs(fock::sub(W, fock::adjoint(W))) < 1e-13);
    CHECK(fock::is_even(W));

    // before switch-on the perturbation vanishes identically
    const FockOperator W0 = perturbation_operator(fp, 0.0, m.ctx);
    CHECK(fock::max_abs(W0) == 0.0);

    // derivative at eta = 0 against a central difference in eta
    const FockOperator dW = perturbation_derivative(fp, t, m.ctx);
    const FieldProtocol fpp = make_field(1, 1, 1e-5, shape);
    const FieldProtocol fpm = make_field(1, 1, -1e-5, shape);
    const FockOperator num = fock::scale(
        1.0 / 2e-5, fock::sub(perturbation_operator(fpp, t, m.ctx),
                              perturbation_operator(fpm, t, m.ctx)));
    CHECK(fock::max_abs(fock::sub(dW, num)) < 1e-8);

    // eta = 0 keeps the protocol bitwise static
    const FieldProtocol off = make_field(1, 1, 0.0, shape);
    const dynamics::Protocol pr = perturbed_protocol(m, off);
    const FockOperator H = model_hamiltonian(m);
    CHECK((pr.h(t) - H.m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("current observables: algebraic properties and continuity equation") {
    const DisorderedModel m = make_model(2, 1, 0.3, 5);
    const FockOperator I01 = current_observable(site(0), site(1), m.ctx);
    CHECK(fock::max_abs(fock::sub(I01, fock::adjoint(I01))) < 1e-14);
    CHECK(fock::is_even(I01));
    CHECK(fock::gauge_defect(I01) < 1e-13);
    // antisymmetric under swapping the bond
    const FockOperator I10 = current_observable(site(1), site(0), m.ctx);
    CHECK(fock::max_abs(fock::add(I01, I10)) < 1e-14);

    // axis current sums bonds x -> x + e_1 over box(l)
    const FockOperator J = axis_current(1, 0, m.ctx);
    FockOperator expect = current_observable(site(0), site(-1), m.ctx);
    expect = fock::add(expect, current_observable(site(1), site(0), m.ctx));
    expect = fock::add(expect, current_observable(site(2), site(1), m.ctx));
    CHECK(fock::max_abs(fock::sub(J, expect)) < 1e-13);
    CHECK_THROWS(axis_current(2, 0, m.ctx));  // box(2)+e_1 pokes out of box(2)

    // continuity: d n_x / dt = i[H, n_x] = divergence of bond currents for the
    // pure laplacian model
    const DisorderedModel clean = make_model(2, 1, 0.0, 5, 1.0, 0.0);
    const FockOperator H = model_hamiltonian(clean);
    const FockOperator n0 = fock::number_op(clean.ctx, site(0));
    const FockOperator lhs = dynamics::generator(H, n0);  // i[H, n_0]
    const FockOperator div =
        fock::sub(current_observable(site(0), site(1), clean.ctx),
                  current_observable(site(-1), site(0), clean.ctx));
    CHECK(fock::max_abs(fock::sub(lhs, fock::scale(-1.0, div))) < 1e-12);
}

TEST_CASE("lehmann data and the paramagnetic coefficient") {
    const DisorderedModel m = make_model(2, 1, 0.5, 11);
    const LehmannData data = lehmann_data(m, 1);
    CHECK(data.cells == doctest::Approx(3.0));
    CHECK(data.l == 1);
    REQUIRE(data.a_hat.size() == 1);
    CHECK_THROWS(lehmann_data(m, 2));  // l + 1 must fit in the box

    // value route equals the observable route through the Gibbs state
    const FockOperator H = model_hamiltonian(m);
    const dynamics::GibbsState gs = dynamics::gibbs_state(H, m.beta);
    for (double t : {0.0, 0.7, 1.9}) {
        const Cplx v = paramagnetic_value(data, t, 0, 0);
        const FockOperator C = paramagnetic_observable(m, t, 0, 0, 1);
        CHECK(std::abs(v.real() - gs.value(C)) < 1e-10);
        CHECK(std::abs(v.imag()) < 1e-10);
    }
    // t = 0 gives exactly zero (empty integral)
    CHECK(paramagnetic_value(data, 0.0, 0, 0) == Cplx(0.0, 0.0));

    const Mat pm = paramagnetic_matrix(data, 0.9);
    CHECK(pm.rows() == 1);
    CHECK(std::abs(pm(0, 0) - paramagnetic_value(data, 0.9, 0, 0)) < 1e-14);
}

TEST_CASE("xi_p: averages, zero at t = 0, clean limit has zero se") {
    const DisorderedModel m = make_model(2, 1, 0.5, 2);
    const XiReport rep = xi_p(m, 1, 1.1, 6);
    CHECK(rep.realizations == 6);
    CHECK(rep.imag_defect < 1e-9);
    CHECK(rep.mean.rows() == 1);
    CHECK(rep.se(0, 0) >= 0.0);

    const XiReport zero = xi_p(m, 1, 0.0, 3);
    CHECK(zero.mean(0, 0) == 0.0);

    const DisorderedModel clean = make_model(2, 1, 0.0, 2);
    const XiReport cr = xi_p(clean, 1, 1.1, 4);
    CHECK(cr.se(0, 0) == 0.0);  // identical realizations, exactly

    // mean equals the hand average over the same realizations
    double acc = 0.0;
    for (std::uint64_t r = 0; r < 6; ++r) {
        const LehmannData data = lehmann_data(with_realization(m, r), 1);
        acc += paramagnetic_value(data, 1.1, 0, 0).real();
    }
    CHECK(rep.mean(0, 0) == doctest::Approx(acc / 6.0).epsilon(1e-12));
}

TEST_CASE("ac measure: structure and exact reconstruction") {
    const DisorderedModel m = make_model(2, 1, 0.5, 13);
    const SpectralMeasure mu = ac_measure(m, 1, 2);
    REQUIRE(!mu.atoms.empty());
    CHECK(mu.psd_defect > -1e-9);
    CHECK(mu.symmetry_defect < 1e-9);
    CHECK(mu.imag_defect < 1e-9);

    // sorted, +- paired with equal weights
    for (std::size_t i = 1; i < mu.atoms.size(); ++i)
        CHECK(mu.atoms[i - 1].nu <= mu.atoms[i].nu);
    for (const Atom& a : mu.atoms) {
        bool found = false;
        for (const Atom& b : mu.atoms)
            if (std::abs(b.nu + a.nu) < 1e-9 &&
                (b.weight - a.weight).cwiseAbs().maxCoeff() < 1e-12) {
                found = true;
                break;
            }
        CHECK(found);
        CHECK(std::abs(a.nu) > 1e-12);  // Gibbs gives no mass at zero frequency
    }

    // reconstruction matches the disorder-averaged coefficient on a grid
    for (double t : {0.0, 0.4, 1.3}) {
        const Eigen::MatrixXd recon = lk_reconstruction(mu, t);
        const XiReport xi = xi_p(m, 1, t, 2);
        CHECK((recon - xi.mean).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(lk_reconstruction(mu, 0.0)(0, 0) == 0.0);  // cos(0) - 1 path is exact

    // moments: odd vanish, even are PSD
    const auto mom = moment_report(mu, 6);
    REQUIRE(mom.size() == 7);
    for (int e = 0; e <= 6; ++e) {
        if (e % 2 == 1) {
            CHECK(mom[static_cast<std::size_t>(e)].cwiseAbs().maxCoeff() < 1e-9);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                mom[static_cast<std::size_t>(e)]);
            CHECK(es.eigenvalues().minCoeff() > -1e-9);
        }
    }
}

TEST_CASE("linear response against the full simulation") {
    const DisorderedModel m = make_model(2, 1, 0.4, 17);
    AxisField shape;
    shape.amp = 0.8;

    const double t = 2.0;
    const double eta = 1e-3;
    const FieldProtocol fp = make_field(1, 1, eta, shape);

    const auto jlin = linear_response_current(m, fp, t);
    REQUIRE(jlin.size() == 1);

    // central difference of the full current in eta
    const FieldProtocol fpp = make_field(1, 1, +eta, shape);
    const FieldProtocol fpm = make_field(1, 1, -eta, shape);
    const auto jp = full_current(m, fpp, t, 1e-10);
    const auto jm = full_current(m, fpm, t, 1e-10);
    // the bare-field response is the eta-derivative of the full current
    const double deriv = (jp[0] - jm[0]) / (2.0 * eta);
    CHECK(jlin[0] == doctest::Approx(deriv).epsilon(2e-3));

    // the reconstruction route keys on the field shape, not the strength
    const auto jlin2 = linear_response_current(m, make_field(1, 1, 2.0 * eta, shape), t);
    CHECK(jlin2[0] == doctest::Approx(jlin[0]).epsilon(1e-12));

    // before switch-on nothing moves
    const auto early = full_current(m, fp, shape.t_on, 1e-10);
    CHECK(std::abs(early[0]) < 1e-9);
}

TEST_CASE("increments: exact zeros and the first-difference identity") {
    const DisorderedModel m = make_model(2, 1, 0.4, 23);
    AxisField shape;
    shape.amp = 0.8;
    const interactions::Interaction phi = interactions::hopping_density(
        {0.3, 0.5}, {0.0, 0.2}, lattice::box_sites(1, 1));

    // eta = 0: both transports share one propagator, so the increment is 0.0
    const FieldProtocol off = make_field(1, 1, 0.0, shape);
    CHECK(fock::max_abs(increment(m, off, phi, 0.0, 1.5)) == 0.0);

    // t = s: both transports are the identity
    const FieldProtocol on = make_field(1, 1, 0.2, shape);
    CHECK(fock::max_abs(increment(m, on, phi, 0.7, 0.7)) == 0.0);

    // the increment is genuinely nonzero once the field acts
    CHECK(fock::max_abs(increment(m, on, phi, 0.0, 1.5)) > 1e-6);

    // first-difference identity defect
    const double defect = increment_identity_defect(m, on, 0.05, phi, 0.0, 1.2, 1e-11);
    CHECK(defect < 1e-6);
}

TEST_CASE("taylor remainder slopes certify the expansion order") {
    const DisorderedModel m = make_model(2, 1, 0.4, 29);
    AxisField shape;
    shape.amp = 0.8;
    const interactions::Interaction phi = interactions::hopping_density(
        {0.3, 0.5}, {0.0, 0.2}, lattice::box_sites(1, 1));
    const FieldProtocol unit = make_field(1, 1, 1.0, shape);

    // remainder after order m decays like eta^{m+1}
    for (int mm : {0, 1}) {
        const double slope = taylor_slope(m, unit, phi, 0.0, 1.5, mm, 1e-11);
        CHECK(slope >= mm + 0.9);
    }

    // the order-1 term matches a central difference of the increment
    const FockOperator t1 = taylor_term(m, unit, phi, 0.0, 1.5, 1);
    const double h = 1e-4;
    const FockOperator fplus = increment(m, make_field(1, 1, +h, shape), phi, 0.0, 1.5,
                                         1e-11);
    const FockOperator fminus = increment(m, make_field(1, 1, -h, shape), phi, 0.0, 1.5,
                                          1e-11);
    const FockOperator num = fock::scale(1.0 / (2.0 * h), fock::sub(fplus, fminus));
    CHECK(fock::max_abs(fock::sub(t1, num)) < 1e-5);
}
