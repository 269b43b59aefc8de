#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lrlab/lattice.hpp"

using namespace lrlab::lattice;

TEST_CASE("site construction and norms") {
    const Site a = site(3, -4);
    CHECK(a.dim == 2);
    CHECK(a[0] == 3);
    CHECK(a[1] == -4);
    CHECK(max_norm(a) == 4);
    CHECK(euclid_norm(a) == doctest::Approx(5.0));

    const Site b = site(1, 1);
    const Site c = a + b;
    CHECK(c[0] == 4);
    CHECK(c[1] == -3);
    CHECK((a - a) == site(0, 0));

    // lexicographic order drives every sorted context downstream
    CHECK(site(0, 1) < site(1, 0));
    CHECK(site(1, 0) < site(1, 1));
    CHECK_FALSE(site(2) < site(2));
}

TEST_CASE("box, shell, and chain site counts") {
    CHECK(box_sites(2, 1).size() == 5);
    CHECK(box_sites(1, 2).size() == 9);
    CHECK(box_sites(1, 3).size() == 27);
    CHECK(box_sites(0, 2).size() == 1);

    // |shell(n)| = (2n+1)^d - (2n-1)^d
    CHECK(shell_sites(0, 1).size() == 1);
    CHECK(shell_sites(3, 1).size() == 2);
    CHECK(shell_sites(2, 2).size() == 25 - 9);
    CHECK(shell_sites(1, 3).size() == 27 - 1);

    const auto ch = chain_sites(-2, 4);
    REQUIRE(ch.size() == 4);
    CHECK(ch.front() == site(-2));
    CHECK(ch.back() == site(1));

    // shells partition the box
    std::size_t total = 0;
    for (int n = 0; n <= 3; ++n) total += shell_sites(n, 2).size();
    CHECK(total == box_sites(3, 2).size());

    const auto centered = box_sites(1, 1, site(5));
    CHECK(centered.front() == site(4));
    CHECK(centered.back() == site(6));
}

TEST_CASE("decay function point values") {
    const DecayFunction F = poly_decay(1, 1.0);
    CHECK(F.value(0.0) == doctest::Approx(1.0));
    CHECK(F.value(1.0) == doctest::Approx(0.25));
    CHECK(F.value(3.0) == doctest::Approx(1.0 / 16.0));

    const DecayFunction G = exp_poly_decay(2, 0.5, 0.7);
    CHECK(G.value(0.0) == doctest::Approx(1.0));
    CHECK(G.value(2.0) ==
          doctest::Approx(std::exp(-2.0 * 0.7 * 2.0) * std::pow(3.0, -2.5)));
}

TEST_CASE("f_norm_bound sandwiches the exact lattice sum") {
    const DecayFunction F = poly_decay(1, 1.0);
    // sum_{x in Z} (1+|x|)^-2 = 2 * pi^2/6 - 1
    const double exact = M_PI * M_PI / 3.0 - 1.0;
    CHECK(f_norm_bound(F) >= exact);
    CHECK(f_norm_bound(F, 4000) == doctest::Approx(exact).epsilon(1e-3));
    // larger exact window, tighter certified bound
    CHECK(f_norm_bound(F, 256) <= f_norm_bound(F, 32));

    const DecayFunction G = exp_poly_decay(1, 1.0, 0.5);
    double partial = 1.0;
    for (int n = 1; n <= 400; ++n)
        partial += 2.0 * std::exp(-n) * std::pow(1.0 + n, -2.0);
    // the two sums accumulate in different orders; allow rounding slack
    CHECK(f_norm_bound(G) >= partial - 1e-12);
    CHECK(f_norm_bound(G) == doctest::Approx(partial).epsilon(1e-9));
}

TEST_CASE("tail majorant dominates the dropped tail") {
    const DecayFunction F = poly_decay(1, 0.5);
    for (int R : {4, 16, 64}) {
        double tail = 0.0;
        for (int n = R + 1; n <= 2000000; ++n) tail += 2.0 * std::pow(1.0 + n, -1.5);
        CHECK(f_norm_tail_bound(F, R) >= tail);
    }
    // and it goes to zero
    CHECK(f_norm_tail_bound(F, 4096) < f_norm_tail_bound(F, 64));
}

TEST_CASE("convolution constant certifies the double-convolution inequality") {
    for (const DecayFunction& F : {poly_decay(1, 1.0), poly_decay(2, 0.5),
                                   exp_poly_decay(1, 1.0, 0.6)}) {
        const double D = convolution_constant_bound(F);
        CHECK(D > 0.0);
        // sampled check of sum_z F(|x-z|)F(|z-y|) <= D F(|x-y|) in d = 1
        if (F.d == 1) {
            for (int r = 0; r <= 6; ++r) {
                double conv = 0.0;
                for (int z = -60; z <= 60; ++z)
                    conv += F.value(std::abs(z)) * F.value(std::abs(r - z));
                CHECK(conv <= D * F.value(r) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("decay_double_sum matches a hand-computed value") {
    const DecayFunction F = poly_decay(1, 1.0);
    const std::vector<Site> A = {site(0)};
    const std::vector<Site> B = {site(1), site(3)};
    CHECK(decay_double_sum(F, A, B) == doctest::Approx(0.25 + 1.0 / 16.0));
    // symmetric in the two clouds
    CHECK(decay_double_sum(F, B, A) == doctest::Approx(decay_double_sum(F, A, B)));

    const std::vector<Site> C = {site(0, 0), site(1, 1)};
    const DecayFunction F2 = poly_decay(2, 1.0);
    // Euclidean distances: two pairs at 0, two at sqrt(2)
    CHECK(decay_double_sum(F2, C, C) ==
          doctest::Approx(2.0 * F2.value(0.0) + 2.0 * F2.value(std::sqrt(2.0))));
}

TEST_CASE("shell condition terms, d = 1 hand values") {
    const DecayFunction F = poly_decay(1, 1.0);
    // S(n,m) = |shell(n)| sum_{j<=m} |shell(j)| F(n-j)
    CHECK(shell_condition_term(F, 2, 0) == doctest::Approx(2.0 / 9.0));
    CHECK(shell_condition_term(F, 2, 1) == doctest::Approx(2.0 * (1.0 / 9.0 + 2.0 / 4.0)));
    CHECK(shell_condition_term(F, 5, 1) ==
          doctest::Approx(2.0 * (F.value(5) + 2.0 * F.value(4))));
}

TEST_CASE("summability data certifies the shell sums") {
    const DecayFunction F = poly_decay(1, 1.0);
    const DecaySequenceData seq = decay_sequences(F, 1);
    CHECK(seq.kind == DecayKind::Polynomial);
    CHECK(seq.zeta == doctest::Approx(0.5));  // default epsilon / 2
    REQUIRE(seq.u_norm.size() == 2);

    // certified l1 norms dominate long partial sums of the exact terms
    for (int m = 0; m <= 1; ++m) {
        double partial = 0.0;
        for (int n = m + 1; n <= 20000; ++n)
            partial += shell_condition_term(F, n, m) * std::pow(1.0 + n, seq.zeta);
        CHECK(seq.u_norm[static_cast<std::size_t>(m)] >= partial);
    }
    // rescaling exponent must stay below epsilon
    CHECK_THROWS(decay_sequences(F, 1, 1.0));
    CHECK_THROWS(decay_sequences(F, 1, 1.7));

    const DecayFunction G = exp_poly_decay(1, 1.0, 0.4);
    const DecaySequenceData seqe = decay_sequences(G, 2);
    CHECK(seqe.kind == DecayKind::ExponentialPolynomial);
    CHECK(seqe.zeta == doctest::Approx(0.4));
    REQUIRE(seqe.c_m.size() == 3);
    // S(n,m) <= C_m exp(-2 sigma n) pointwise
    for (int m = 0; m <= 2; ++m)
        for (int n = m + 1; n <= 60; ++n)
            CHECK(shell_condition_term(G, n, m) <=
                  seqe.c_m[static_cast<std::size_t>(m)] * std::exp(-2.0 * 0.4 * n) *
                      (1.0 + 1e-12));
}
