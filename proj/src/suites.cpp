#include "lrlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <utility>

#include "json.hpp"

#include "lrlab/bounds.hpp"
#include "lrlab/common.hpp"
#include "lrlab/dynamics.hpp"
#include "lrlab/fock.hpp"
#include "lrlab/interactions.hpp"
#include "lrlab/lattice.hpp"
#include "lrlab/response.hpp"
#include "lrlab/trees.hpp"

namespace lrlab::suites {

namespace {

using fock::Context;
using fock::FockOperator;
using lattice::Site;
using lattice::site;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string istr(long long v) { return std::to_string(v); }
std::string pstr(bool b) { return b ? "1" : "0"; }

double u01(std::uint64_t seed, std::uint64_t c) { return lrlab::uniform01(seed, c); }
double pm1(std::uint64_t seed, std::uint64_t c) { return lrlab::uniform_pm1(seed, c); }

// rows produced by one independent case, plus the margins it contributes;
// cases run in parallel, slots are merged in index order afterwards
struct CaseOut {
    std::vector<std::vector<std::string>> rows;
    double worst = kInf;
    bool any = false;

    void margin(double m) {
        worst = std::min(worst, m);
        any = true;
    }
};

void merge(SuiteResult& r, std::vector<CaseOut>& slots) {
    for (CaseOut& s : slots) {
        for (auto& row : s.rows) r.table.rows.push_back(std::move(row));
        if (s.any) {
            r.worst_margin = r.has_margin ? std::min(r.worst_margin, s.worst) : s.worst;
            r.has_margin = true;
        }
    }
}

template <typename Fn>
void run_cases(SuiteResult& r, int n, int threads, Fn&& fn) {
    std::vector<CaseOut> slots(static_cast<std::size_t>(n));
    lrlab::parallel_for_indexed(static_cast<std::size_t>(n), threads,
                                 [&](std::size_t i) { fn(static_cast<int>(i), slots[i]); });
    merge(r, slots);
}

// pass column is always last
SuiteResult finish(SuiteResult r) {
    r.n_cases = static_cast<int>(r.table.rows.size());
    r.n_pass = 0;
    for (const auto& row : r.table.rows)
        if (!row.empty() && row.back() == "1") ++r.n_pass;
    r.pass = (r.n_pass == r.n_cases);
    if (!r.has_margin) r.worst_margin = 0.0;
    return r;
}

// even self-adjoint operator on two sites, spectral norm 1; the n_x weight is
// bounded away from zero so normalization is always safe
FockOperator random_even_pair(const Site& x, const Site& y, std::uint64_t seed,
                              std::uint64_t c0) {
    const Context ctx = Context::from_sites({x, y});
    const double c1 = 0.3 + 0.7 * u01(seed, c0);
    const double c2 = pm1(seed, c0 + 1);
    const double c3 = pm1(seed, c0 + 2);
    const double c4 = pm1(seed, c0 + 3);
    FockOperator op = fock::scale(c1, fock::number_op(ctx, x));
    op = fock::add(op, fock::scale(c2, fock::number_op(ctx, y)));
    const FockOperator hop =
        fock::multiply(fock::creation(ctx, x), fock::annihilation(ctx, y));
    op = fock::add(op, fock::scale(c3, fock::add(hop, fock::adjoint(hop))));
    op = fock::add(op, fock::scale(c4, fock::multiply(fock::number_op(ctx, x),
                                                      fock::number_op(ctx, y))));
    return fock::scale(1.0 / fock::spectral_norm(op), op);
}

// traceless single-site observable 2 n_x - 1, spectral norm 1
FockOperator flip_op(const Site& x) {
    const Context ctx = Context::from_sites({x});
    return fock::sub(fock::scale(2.0, fock::number_op(ctx, x)), fock::identity_op(ctx));
}

// range-2 hopping + density-density with coefficients drawn from (seed, c0)
interactions::Interaction random_chain_interaction(const std::vector<Site>& window,
                                                   std::uint64_t seed,
                                                   std::uint64_t c0) {
    const double h0 = 0.5 * pm1(seed, c0);
    const double h1 = 0.6 * pm1(seed, c0 + 1);
    const double h2 = 0.25 * pm1(seed, c0 + 2);
    const double v1 = 0.4 * pm1(seed, c0 + 3);
    return interactions::hopping_density({h0, h1, h2}, {0.0, v1}, window);
}

void bound_row(CaseOut& out, std::vector<std::string> prefix,
               const bounds::BoundReport& rep) {
    prefix.push_back(format17(rep.lhs));
    prefix.push_back(format17(rep.rhs));
    prefix.push_back(format17(rep.margin));
    prefix.push_back(pstr(rep.pass));
    out.rows.push_back(std::move(prefix));
    out.margin(rep.margin);
}

// defect-style row: pass iff value <= tol, margin tol - value
void defect_row(CaseOut& out, std::vector<std::string> prefix, double value,
                double tol) {
    const double m = tol - value;
    prefix.push_back(format17(value));
    prefix.push_back(format17(tol));
    prefix.push_back(format17(m));
    prefix.push_back(pstr(m >= 0.0));
    out.rows.push_back(std::move(prefix));
    out.margin(m);
}

double or_default(double override_value, double fallback) {
    return override_value >= 0.0 ? override_value : fallback;
}

long long positive_compositions(int total, int parts) {
    if (parts == 1) return total >= 1 ? 1 : 0;
    long long n = 0;
    for (int first = 1; first <= total - (parts - 1); ++first)
        n += positive_compositions(total - first, parts - 1);
    return n;
}

}  // namespace

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// car

SuiteResult car_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "car";
    r.table.header = {"context", "n_sites", "aa_defect", "a_adag_defect",
                      "norm_dev", "margin", "pass"};
    if (opt.count == 0) return finish(std::move(r));

    std::vector<std::pair<std::string, Context>> cases;
    for (int n = 1; n <= 8; ++n)
        cases.emplace_back("chain" + istr(n), Context::chain(0, n));
    cases.emplace_back("square", Context::from_sites({site(0, 0), site(1, 0),
                                                      site(0, 1), site(1, 1)}));

    run_cases(r, static_cast<int>(cases.size()), opt.threads, [&](int i, CaseOut& out) {
        const auto& [name, ctx] = cases[static_cast<std::size_t>(i)];
        const fock::CarReport rep = fock::car_suite(ctx);
        const double m = std::min({1e-13 - rep.max_aa_defect,
                                   1e-13 - rep.max_a_adag_defect,
                                   1e-10 - rep.max_norm_deviation});
        out.rows.push_back({name, istr(ctx.n()), format17(rep.max_aa_defect),
                            format17(rep.max_a_adag_defect),
                            format17(rep.max_norm_deviation), format17(m),
                            pstr(m >= 0.0)});
        out.margin(m);
    });
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// verify-lr

SuiteResult verify_lr_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "verify-lr";
    r.table.header = {"case", "n_sites", "b2", "t", "lhs", "rhs", "margin", "pass"};
    const int n_cases = opt.count < 0 ? 100 : opt.count;
    if (n_cases == 0) return finish(std::move(r));

    const lattice::DecayFunction F = lattice::poly_decay(1, or_default(opt.epsilon, 1.0));
    const double D = lattice::convolution_constant_bound(F);
    const double t_max = or_default(opt.t_max, 2.0);

    // chains of 6..10 sites, weighted toward the small ones to keep the batch fast
    static constexpr int kSizes[10] = {6, 7, 8, 9, 10, 6, 7, 8, 6, 7};

    run_cases(r, n_cases, opt.threads, [&](int i, CaseOut& out) {
        const std::uint64_t c0 = static_cast<std::uint64_t>(i) << 12;
        const int n = kSizes[i % 10];
        const Context work = Context::chain(0, n);

        const int x1 = u01(opt.seed, c0) < 0.5 ? 0 : 1;
        const int ymin = x1 + 3;  // keep supp B1 = {x1, x1+1} and B2 disjoint
        int y = ymin + static_cast<int>(u01(opt.seed, c0 + 1) * (n - ymin));
        y = std::min(y, n - 1);

        const FockOperator B1 = random_even_pair(site(x1), site(x1 + 1), opt.seed, c0 + 2);
        const bool odd = (i % 2 == 1);
        const FockOperator B2 =
            odd ? fock::annihilation(Context::from_sites({site(y)}), site(y))
                : flip_op(site(y));

        const interactions::Interaction psi =
            random_chain_interaction(work.sites(), opt.seed, c0 + 8);
        const interactions::Potential V = interactions::random_potential(
            work.sites(), 0.7, opt.seed + 1000003ULL * static_cast<std::uint64_t>(i) + 17ULL);
        const double t = t_max * pm1(opt.seed, c0 + 16);
        const double alpha = interactions::w_norm(psi, F, work.sites());

        const bounds::BoundReport rep =
            bounds::verify_lr(psi, V, work, B1, B2, t, F, alpha, D);
        bound_row(out, {"lr-" + istr(i), istr(n), odd ? "odd" : "even", format17(t)}, rep);
    });
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// verify-multicomm

SuiteResult verify_multicomm_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "verify-multicomm";
    r.table.header = {"case", "k", "mode", "lhs", "rhs", "margin", "pass"};
    const int per_k = opt.count < 0 ? 30 : opt.count;
    if (per_k == 0) return finish(std::move(r));

    const Context work = Context::box(3, 1);
    const interactions::Interaction psi =
        interactions::hopping_density({0.1, 0.8, 0.2}, {0.0, 0.3}, work.sites());
    const interactions::Potential V =
        interactions::random_potential(work.sites(), 0.5, opt.seed + 11);

    const lattice::DecayFunction Fp = lattice::poly_decay(1, or_default(opt.epsilon, 1.0));
    const lattice::DecayFunction Fe =
        lattice::exp_poly_decay(1, or_default(opt.epsilon, 1.0), or_default(opt.sigma, 0.5));
    const double Dp = lattice::convolution_constant_bound(Fp);
    const double De = lattice::convolution_constant_bound(Fe);
    const lattice::DecaySequenceData seq_p = lattice::decay_sequences(Fp, 1);
    const lattice::DecaySequenceData seq_e = lattice::decay_sequences(Fe, 1);
    const double alpha_p = interactions::w_norm(psi, Fp, work.sites());
    const double alpha_e = interactions::w_norm(psi, Fe, work.sites());

    const double s_max = or_default(opt.t_max, 1.0);

    run_cases(r, 2 * per_k, opt.threads, [&](int i, CaseOut& out) {
        const int k = 2 + i / per_k;
        const std::uint64_t c0 = static_cast<std::uint64_t>(i) << 12;

        trees::TreeData data;
        std::vector<FockOperator> B;
        for (int j = 0; j <= k; ++j) {
            const std::uint64_t cj = c0 + 16 * static_cast<std::uint64_t>(j);
            const int mj = u01(opt.seed, cj) < 0.5 ? 0 : 1;
            const int span = 3 - mj;
            int xj = -span + static_cast<int>(u01(opt.seed, cj + 1) * (2 * span + 1));
            xj = std::clamp(xj, -span, span);
            data.m.push_back(mj);
            data.x.push_back(site(xj));
            data.s.push_back(j == 0 ? 0.0 : s_max * pm1(opt.seed, cj + 2));
            if (mj == 0)
                B.push_back(u01(opt.seed, cj + 3) < 0.5
                                ? fock::number_op(Context::from_sites({site(0)}), site(0))
                                : flip_op(site(0)));
            else
                B.push_back(random_even_pair(site(0), site(1), opt.seed, cj + 4));
        }

        const std::string id = "mc-k" + istr(k) + "-" + istr(i % per_k);
        bound_row(out, {id, istr(k), "raw"},
                  bounds::verify_multicomm(psi, V, work, B, data, Fp, nullptr,
                                           bounds::RemainderMode::Raw, alpha_p, Dp, 12));
        bound_row(out, {id, istr(k), "poly"},
                  bounds::verify_multicomm(psi, V, work, B, data, Fp, &seq_p,
                                           bounds::RemainderMode::Poly, alpha_p, Dp, 12));
        bound_row(out, {id, istr(k), "exp"},
                  bounds::verify_multicomm(psi, V, work, B, data, Fe, &seq_e,
                                           bounds::RemainderMode::Exp, alpha_e, De, 12));
    });

    // hopping-observable corollary, both decay classes
    {
        CaseOut out;
        const FockOperator B0 = random_even_pair(site(0), site(1), opt.seed, 7001);
        const std::vector<Site> x3 = {site(0), site(-2), site(2), site(3)};
        const std::vector<Site> z3 = {site(1), site(-1), site(-1)};
        const std::vector<double> s3 = {0.8, -0.6, 0.4};
        for (int k = 2; k <= 3; ++k) {
            const std::vector<Site> x(x3.begin(), x3.begin() + k + 1);
            const std::vector<Site> z(z3.begin(), z3.begin() + k);
            const std::vector<double> s(s3.begin(), s3.begin() + k);
            bound_row(out, {"decay-k" + istr(k), istr(k), "poly"},
                      bounds::tree_decay_check(psi, V, work, B0, 1, x, z, s, Fp, seq_p,
                                               alpha_p, Dp));
            bound_row(out, {"decay-k" + istr(k), istr(k), "exp"},
                      bounds::tree_decay_check(psi, V, work, B0, 1, x, z, s, Fe, seq_e,
                                               alpha_e, De));
        }
        std::vector<CaseOut> one{std::move(out)};
        merge(r, one);
    }
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// tree-suite

SuiteResult tree_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "tree-suite";
    r.table.header = {"check", "k", "value", "bound", "pass"};
    if (opt.count == 0) return finish(std::move(r));
    const int k_max =
        opt.count < 0 ? 7 : std::min(opt.count, opt.override_guards ? 10 : 9);

    CaseOut out;
    for (int k = 1; k <= k_max; ++k) {
        const auto trees = trees::enumerate_trees(k);
        const double expected = trees::factorial(k);
        const bool ok = static_cast<double>(trees.size()) == expected;
        out.rows.push_back({"count", istr(k), istr(static_cast<long long>(trees.size())),
                            format17(expected), pstr(ok)});
    }
    for (int k = 1; k <= std::min(k_max, 6); ++k) {
        const auto trees = trees::enumerate_trees(k);
        std::vector<std::vector<int>> codes;
        bool sums_ok = true;
        for (const auto& t : trees) {
            codes.push_back(trees::simplified_code(t));
            const auto deg = trees::degrees(t);
            int s = 0;
            for (int d : deg) s += d;
            sums_ok = sums_ok && (s == 2 * k);
        }
        std::sort(codes.begin(), codes.end());
        const bool distinct =
            std::adjacent_find(codes.begin(), codes.end()) == codes.end();
        out.rows.push_back({"structure", istr(k),
                            istr(static_cast<long long>(codes.size())),
                            format17(trees::factorial(k)), pstr(distinct && sums_ok)});
    }
    for (int k = 1; k <= std::min(k_max, 5); ++k) {
        // exact per-degree-sequence counts against the closed-form majorant
        const auto trees = trees::enumerate_trees(k);
        std::map<std::vector<int>, long long> freq;
        for (const auto& t : trees) ++freq[trees::degrees(t)];
        bool ok = true;
        long long nseq = 0;
        for (const auto& [deg, cnt] : freq) {
            ++nseq;
            const trees::DegreeCount dc = trees::count_trees_with_degrees(k, deg);
            ok = ok && dc.exact == static_cast<double>(cnt) && dc.exact <= dc.bound + 1e-9;
        }
        ok = ok && static_cast<double>(nseq) <= trees::degree_sequence_count(k);
        out.rows.push_back({"degree-count", istr(k), istr(nseq),
                            format17(trees::degree_sequence_count(k)), pstr(ok)});
    }
    const int k_comp = opt.count < 0 ? 10 : std::min(opt.count, 10);
    for (int k = 1; k <= k_comp; ++k) {
        const long long comps = positive_compositions(2 * k, k + 1);
        const double claimed = trees::degree_sequence_count(k);
        const bool ok = static_cast<double>(comps) == claimed &&
                        claimed <= std::pow(4.0, k) + 1e-9;
        out.rows.push_back({"compositions", istr(k), istr(comps), format17(claimed),
                            pstr(ok)});
    }
    for (int k = 1; k <= std::min(k_max, 6); ++k) {
        const trees::FactorialSum fs = trees::degree_factorial_sum(k);
        const bool ok = fs.exact <= fs.bound + 1e-9;
        out.rows.push_back({"factorial-sum", istr(k), format17(fs.exact),
                            format17(fs.bound), pstr(ok)});
        out.margin(fs.bound - fs.exact);
    }
    out.rows.push_back({"stirling", "50", "1", "1", pstr(trees::stirling_sandwich_holds(50))});

    const std::vector<std::array<double, 3>> ts = {
        {2, 1, 0.8}, {3, 1, 0.8}, {2, 2, 1.0}, {4, 1, 1.0}};
    for (const auto& c : ts) {
        const trees::TreeSumCheck ck = trees::tree_sum_bound_check(
            static_cast<int>(c[0]), static_cast<int>(c[1]), c[2]);
        out.rows.push_back({"tree-sum-d" + istr(static_cast<long long>(c[1])),
                            istr(static_cast<long long>(c[0])), format17(ck.lhs_upper),
                            format17(ck.rhs), pstr(ck.pass)});
        out.margin(ck.rhs - ck.lhs_upper);
    }

    std::vector<CaseOut> one{std::move(out)};
    merge(r, one);
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// convergence

SuiteResult convergence_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "convergence";
    r.table.header = {"case", "L1", "L2", "t", "lhs", "rhs", "margin", "pass"};
    const int n_cases = opt.count < 0 ? 20 : opt.count;
    if (n_cases == 0) return finish(std::move(r));

    const lattice::DecayFunction F = lattice::poly_decay(1, or_default(opt.epsilon, 1.0));
    const double D = lattice::convolution_constant_bound(F);
    const double t_max = or_default(opt.t_max, 1.5);

    run_cases(r, n_cases, opt.threads, [&](int i, CaseOut& out) {
        const std::uint64_t c0 = static_cast<std::uint64_t>(i) << 12;
        const int L1 = (i % 4 == 3) ? 3 : 2;  // mostly the cheaper volume pair
        const int L2 = L1 + 2;
        const std::vector<Site> window = lattice::box_sites(L2, 1);
        const interactions::Interaction psi =
            random_chain_interaction(window, opt.seed, c0);
        const interactions::Potential V = interactions::random_potential(
            window, 0.6, opt.seed + 31ULL + static_cast<std::uint64_t>(i));
        const FockOperator B = random_even_pair(site(0), site(1), opt.seed, c0 + 8);
        const double t = t_max * pm1(opt.seed, c0 + 16);
        const double alpha = interactions::w_norm(psi, F, window);
        bound_row(out, {"cv-" + istr(i), istr(L1), istr(L2), format17(t)},
                  bounds::convergence_rate_check(psi, V, B, t, L1, L2, 1, F, alpha, D));
    });

    // fixed sweep toward one target volume: the finite-volume error must fall
    {
        CaseOut out;
        const int L2 = 5;
        const std::vector<Site> window = lattice::box_sites(L2, 1);
        const interactions::Interaction psi =
            interactions::hopping_density({0.0, 0.9, 0.2}, {0.0, 0.3}, window);
        const interactions::Potential V =
            interactions::random_potential(window, 0.5, opt.seed + 7);
        const FockOperator B = random_even_pair(site(0), site(1), opt.seed, 9001);
        const double t = 1.0;
        const double alpha = interactions::w_norm(psi, F, window);
        std::vector<double> lhs;
        for (int L1 = 1; L1 <= 3; ++L1) {
            const bounds::BoundReport rep =
                bounds::convergence_rate_check(psi, V, B, t, L1, L2, 1, F, alpha, D);
            lhs.push_back(rep.lhs);
            bound_row(out, {"sweep-L" + istr(L1), istr(L1), istr(L2), format17(t)}, rep);
        }
        bool mono = true;
        double mmargin = kInf;
        for (std::size_t j = 0; j + 1 < lhs.size(); ++j) {
            mono = mono && lhs[j + 1] <= lhs[j] + 1e-12;
            mmargin = std::min(mmargin, lhs[j] - lhs[j + 1]);
        }
        out.rows.push_back({"sweep-monotone", "1..3", istr(L2), format17(t),
                            format17(lhs.front()), format17(lhs.back()),
                            format17(mmargin), pstr(mono)});
        std::vector<CaseOut> one{std::move(out)};
        merge(r, one);
    }
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// telescoping

SuiteResult telescoping_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "telescoping";
    r.table.header = {"case", "kind", "m", "n", "lhs", "rhs", "margin", "pass"};
    if (opt.count == 0) return finish(std::move(r));

    const Context work = Context::from_sites(lattice::chain_sites(0, 8));
    const Site x = site(3);
    const interactions::Interaction psi =
        interactions::hopping_density({0.0, 0.85}, {0.0, 0.3}, work.sites());
    const interactions::Potential V =
        interactions::random_potential(work.sites(), 0.5, opt.seed + 5);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double D = lattice::convolution_constant_bound(F);
    const double alpha = interactions::w_norm(psi, F, work.sites());

    std::vector<std::pair<int, double>> cases = {{0, 0.6}, {0, -1.1}, {1, 0.6}, {1, -1.1}};
    if (opt.count > 0 && opt.count < static_cast<int>(cases.size()))
        cases.resize(static_cast<std::size_t>(opt.count));

    run_cases(r, static_cast<int>(cases.size()), opt.threads, [&](int i, CaseOut& out) {
        const auto [m, t] = cases[static_cast<std::size_t>(i)];
        const FockOperator B = m == 0
                                   ? flip_op(x)
                                   : random_even_pair(site(3), site(4), opt.seed,
                                                      static_cast<std::uint64_t>(i) << 8);
        const bounds::TelescopingReport rep =
            bounds::telescoping_bound_check(psi, V, B, t, x, m, work, F, alpha, D);
        const std::string id = "tb-" + istr(i);
        defect_row(out, {id, "identity", istr(rep.m), istr(rep.N)},
                   rep.identity_defect, 1e-10);
        defect_row(out, {id, "base-norm", istr(rep.m), istr(rep.N)},
                   rep.base_norm_defect, 1e-8);
        int n = rep.m;
        for (const bounds::BoundReport& block : rep.block_bounds) {
            ++n;
            bound_row(out, {id, "block", istr(rep.m), istr(n)}, block);
        }
    });
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// nonauto

SuiteResult nonauto_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "nonauto";
    r.table.header = {"check", "k", "lhs", "rhs", "margin", "pass"};
    if (opt.count == 0) return finish(std::move(r));

    const Context ctx = Context::chain(0, 6);
    const std::vector<Site>& sites = ctx.sites();

    interactions::TimeInteraction psi;
    psi.static_part = interactions::hopping_density({0.2, 0.8}, {0.0, 0.3}, sites);
    interactions::Drive d1;
    d1.part = interactions::hopping_density({0.0, 0.5}, {0.0, 0.0}, sites);
    d1.wave = interactions::Drive::Wave::Sine;
    d1.amp = 0.7;
    d1.omega = 1.3;
    d1.phase = 0.4;
    interactions::Drive d2;
    d2.part = interactions::density_density({0.0, 0.4}, sites);
    d2.wave = interactions::Drive::Wave::Cosine;
    d2.amp = 0.5;
    d2.omega = 2.1;
    psi.drives = {d1, d2};

    const interactions::Potential V =
        interactions::random_potential(sites, 0.5, opt.seed + 3);
    const dynamics::Protocol pr = dynamics::interaction_protocol(psi, V, ctx);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double D = lattice::convolution_constant_bound(F);

    CaseOut out;

    {  // two-point composition law of the propagator
        const double s = 0.1, t = 1.4, mid = 0.55;
        const fock::Mat u_full = dynamics::propagator(pr, s, t, 1e-10).u;
        const fock::Mat u_a = dynamics::propagator(pr, s, mid, 1e-10).u;
        const fock::Mat u_b = dynamics::propagator(pr, mid, t, 1e-10).u;
        defect_row(out, {"cocycle-unitary", "-"},
                   fock::spectral_norm(fock::Mat(u_full - u_b * u_a)), 1e-8);
    }
    {  // the same law on an evolved observable
        const double s = 0.1, t = 1.4, mid = 0.55;
        const FockOperator B =
            fock::embed(random_even_pair(site(2), site(3), opt.seed, 41), ctx);
        const FockOperator direct = dynamics::evolve_nonautonomous(pr, B, s, t, 1e-10);
        const FockOperator split = dynamics::evolve_nonautonomous(
            pr, dynamics::evolve_nonautonomous(pr, B, mid, t, 1e-10), s, mid, 1e-10);
        defect_row(out, {"cocycle-observable", "-"},
                   fock::spectral_norm(fock::sub(direct, split)), 1e-8);
    }
    {  // constant protocol must match the spectral propagator
        const FockOperator Hc = interactions::hamiltonian(psi.static_part, V, ctx);
        const fock::Mat u_m =
            dynamics::propagator(dynamics::constant_protocol(Hc), 0.0, 0.8, 1e-11).u;
        const fock::Mat u_e = dynamics::Evolution(Hc).unitary(0.8);
        defect_row(out, {"constant-protocol", "-"},
                   fock::spectral_norm(fock::Mat(u_m - u_e)), 1e-9);
    }
    {  // accepted step-halving defect honors the requested tolerance
        const dynamics::PropagatorResult res = dynamics::propagator(pr, 0.0, 1.5, 1e-10);
        defect_row(out, {"propagator-defect", istr(res.steps)}, res.defect, 1e-10);
    }
    {  // Dyson-Phillips partial sums against the factorial envelope
        const FockOperator Hstat = interactions::hamiltonian(psi.static_part, V, ctx);
        double hbound = fock::spectral_norm(Hstat);
        for (const interactions::Drive& dr : psi.drives) {
            hbound += dr.sup_abs() *
                      fock::spectral_norm(interactions::hamiltonian(
                          dr.part, interactions::Potential{}, ctx));
        }
        const double span = std::min(0.8, 0.9 / hbound);
        const double s = 0.1, t = s + span;
        const double x = hbound * span;
        const std::vector<fock::Mat> terms = dynamics::dyson_phillips_terms(pr, s, t, 6);
        const fock::Mat u = dynamics::propagator(pr, s, t, 1e-11).u;
        fock::Mat partial = terms[0];
        for (int k = 0; k <= 6; ++k) {
            if (k > 0) partial += terms[static_cast<std::size_t>(k)];
            const double defect = fock::spectral_norm(fock::Mat(u - partial));
            const double env =
                std::pow(x, k + 1) / trees::factorial(k + 1) * std::exp(x) + 2e-11;
            defect_row(out, {"dyson-phillips", istr(k)}, defect, env);
        }
    }
    {  // light cone under the driven dynamics
        const FockOperator B1 = random_even_pair(site(0), site(1), opt.seed, 61);
        const FockOperator B2 = flip_op(site(4));
        const double alpha = interactions::sup_w_norm(psi, F, sites);
        bound_row(out, {"lr-nonauto", "-"},
                  bounds::verify_lr_nonautonomous(psi, V, ctx, B1, B2, 0.2, 1.1, F,
                                                  alpha, D, 1e-9));
    }
    {  // finite-volume Cauchy difference under the driven dynamics
        const std::vector<Site> window = lattice::box_sites(3, 1);
        interactions::TimeInteraction psi2;
        psi2.static_part = interactions::hopping_density({0.2, 0.8}, {0.0, 0.3}, window);
        interactions::Drive d3 = d1;
        d3.part = interactions::hopping_density({0.0, 0.5}, {0.0, 0.0}, window);
        psi2.drives = {d3};
        const interactions::Potential V2 =
            interactions::random_potential(window, 0.5, opt.seed + 13);
        const FockOperator B = random_even_pair(site(0), site(1), opt.seed, 71);
        const double alpha2 = interactions::sup_w_norm(psi2, F, window);
        bound_row(out, {"convergence-nonauto", "-"},
                  bounds::convergence_rate_check_nonautonomous(
                      psi2, V2, B, 0.1, 0.8, 1, 3, 1, F, alpha2, D, 1e-9));
    }

    std::vector<CaseOut> one{std::move(out)};
    merge(r, one);
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// conductivity

SuiteResult conductivity_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "conductivity";
    r.table.header = {"lambda", "t", "n", "xi", "se", "imag_defect", "margin", "pass"};
    const int n_real = opt.count < 0 ? 32 : opt.count;
    if (n_real == 0) return finish(std::move(r));

    std::vector<double> lams = {0.0, 0.5};
    if (opt.lambda >= 0.0) lams = {opt.lambda};
    const double beta = or_default(opt.beta, 1.0);
    const double t_top = or_default(opt.t_max, 2.0);

    CaseOut out;
    for (const double lam : lams) {
        const response::DisorderedModel model =
            response::make_model(2, 1, lam, opt.seed, beta);
        for (int j = 0; j <= 8; ++j) {
            const double t = t_top / 8.0 * j;
            const response::XiReport rep = response::xi_p(model, 1, t, n_real, opt.threads);
            const double m = 1e-9 - rep.imag_defect;
            bool ok = m >= 0.0;
            if (j == 0) ok = ok && rep.mean(0, 0) == 0.0;  // no mass at t = 0
            if (lam == 0.0) ok = ok && rep.se(0, 0) == 0.0;
            out.rows.push_back({format17(lam), format17(t), istr(rep.realizations),
                                format17(rep.mean(0, 0)), format17(rep.se(0, 0)),
                                format17(rep.imag_defect), format17(m), pstr(ok)});
            out.margin(m);
        }
    }
    std::vector<CaseOut> one{std::move(out)};
    merge(r, one);
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// ac-measure

SuiteResult ac_measure_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "ac-measure";
    r.table.header = {"check", "x", "value", "ref", "margin", "pass"};
    const int n_real = opt.count < 0 ? 4 : opt.count;
    if (n_real == 0) return finish(std::move(r));

    const response::DisorderedModel model = response::make_model(
        2, 1, or_default(opt.lambda, 0.5), opt.seed, or_default(opt.beta, 1.0));
    CaseOut out;

    // single-realization measure must reproduce the Lehmann value on a grid
    const response::SpectralMeasure mu1 = response::ac_measure(model, 1, 1, opt.threads);
    {
        const double at_zero = response::lk_reconstruction(mu1, 0.0)(0, 0);
        out.rows.push_back({"recon-zero", "0", format17(at_zero), "0", format17(-std::abs(at_zero)),
                            pstr(at_zero == 0.0)});
    }
    for (int j = 1; j <= 16; ++j) {
        const double t = 0.125 * j;
        const double recon = response::lk_reconstruction(mu1, t)(0, 0);
        const double direct = response::xi_p(model, 1, t, 1, 1).mean(0, 0);
        const double m = 1e-8 - std::abs(recon - direct);
        out.rows.push_back({"recon", format17(t), format17(recon), format17(direct),
                            format17(m), pstr(m >= 0.0)});
        out.margin(m);
    }

    const response::SpectralMeasure mu = response::ac_measure(model, 1, n_real, opt.threads);
    defect_row(out, {"psd", istr(static_cast<long long>(mu.atoms.size()))},
               mu.psd_defect, 1e-9);
    defect_row(out, {"symmetry", istr(static_cast<long long>(mu.atoms.size()))},
               mu.symmetry_defect, 1e-9);
    defect_row(out, {"imag", istr(static_cast<long long>(mu.atoms.size()))},
               mu.imag_defect, 1e-9);
    {  // atom list symmetric under nu -> -nu with identical weights
        double pair_defect = 0.0;
        for (const response::Atom& a : mu.atoms) {
            double best = kInf;
            for (const response::Atom& b : mu.atoms)
                if (std::abs(b.nu + a.nu) < 1e-12)
                    best = std::min(best, (a.weight - b.weight).cwiseAbs().maxCoeff());
            pair_defect = std::max(pair_defect, best);
        }
        defect_row(out, {"pairing", istr(static_cast<long long>(mu.atoms.size()))},
                   pair_defect, 1e-12);
    }
    const std::vector<Eigen::MatrixXd> moments = response::moment_report(mu, 8);
    for (int e = 0; e <= 8; ++e) {
        const Eigen::MatrixXd& mom = moments[static_cast<std::size_t>(e)];
        if (e % 2 == 1) {
            defect_row(out, {"moment-odd", istr(e)}, mom.cwiseAbs().maxCoeff(), 1e-9);
        } else {
            const double lam_min =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mom).eigenvalues().minCoeff();
            const double m = lam_min + 1e-9;
            out.rows.push_back({"moment-even", istr(e), format17(lam_min), "-1e-09",
                                format17(m), pstr(m >= 0.0)});
            out.margin(m);
        }
    }

    nlohmann::json atoms = nlohmann::json::array();
    for (const response::Atom& a : mu.atoms) {
        nlohmann::json w = nlohmann::json::array();
        for (Eigen::Index row = 0; row < a.weight.rows(); ++row) {
            nlohmann::json line = nlohmann::json::array();
            for (Eigen::Index col = 0; col < a.weight.cols(); ++col)
                line.push_back(a.weight(row, col));
            w.push_back(line);
        }
        atoms.push_back({{"nu", a.nu}, {"weight_matrix", w}});
    }
    r.extra_json = atoms.dump();

    std::vector<CaseOut> one{std::move(out)};
    merge(r, one);
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// increments

SuiteResult increments_suite(const Options& opt) {
    SuiteResult r;
    r.suite = "increments";
    r.table.header = {"check", "m", "value", "bound", "margin", "pass"};
    if (opt.count == 0) return finish(std::move(r));

    const response::DisorderedModel model = response::make_model(
        2, 1, or_default(opt.lambda, 0.4), opt.seed, or_default(opt.beta, 1.0));
    const double t_inc = or_default(opt.t_max, 1.5);
    response::AxisField shape;
    shape.amp = 0.8;
    const interactions::Interaction phi =
        interactions::hopping_density({0.3, 0.5}, {0.0, 0.2}, lattice::box_sites(1, 1));

    CaseOut out;
    {  // switched-off field: same code path, exact zero
        const double v = fock::max_abs(
            response::increment(model, response::make_field(1, 1, 0.0, shape), phi, 0.0, t_inc));
        out.rows.push_back({"eta-zero", "-", format17(v), "0", format17(-v), pstr(v == 0.0)});
    }
    {
        const double v = fock::max_abs(
            response::increment(model, response::make_field(1, 1, 0.1, shape), phi, 1.0, 1.0));
        out.rows.push_back({"t-equals-s", "-", format17(v), "0", format17(-v), pstr(v == 0.0)});
    }
    defect_row(out, {"first-difference", "-"},
               response::increment_identity_defect(
                   model, response::make_field(1, 1, 0.1, shape), 0.02, phi, 0.0, t_inc, 1e-9),
               1e-6);
    for (int m = 0; m <= 2; ++m) {
        const double slope = response::taylor_slope(
            model, response::make_field(1, 1, 0.0, shape), phi, 0.0, t_inc, m, 1e-11);
        const double need = m + 0.9;
        out.rows.push_back({"taylor-slope", istr(m), format17(slope), format17(need),
                            format17(slope - need), pstr(slope >= need)});
        out.margin(slope - need);
    }
    {  // eta-linear coefficient vs central difference of the full simulation
        const double t = 2.0, eta = 1e-3;
        const double jlin =
            response::linear_response_current(model, response::make_field(1, 1, 1.0, shape), t)[0];
        const double jp =
            response::full_current(model, response::make_field(1, 1, eta, shape), t)[0];
        const double jm =
            response::full_current(model, response::make_field(1, 1, -eta, shape), t)[0];
        const double cd = (jp - jm) / (2.0 * eta);
        const double rel = std::abs(cd - jlin) / std::max(1e-12, std::abs(jlin));
        out.rows.push_back({"linear-response", "-", format17(cd), format17(jlin),
                            format17(1e-3 - rel), pstr(rel <= 1e-3)});
        out.margin(1e-3 - rel);
    }

    std::vector<CaseOut> one{std::move(out)};
    merge(r, one);
    return finish(std::move(r));
}

// ---------------------------------------------------------------------------
// dispatch and writers

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "car",         "verify-lr",        "verify-multicomm", "tree-suite",
        "convergence", "telescoping",      "nonauto",          "conductivity",
        "ac-measure",  "increments"};
    return names;
}

SuiteResult run_suite(const std::string& name, const Options& opt) {
    if (name == "car") return car_suite(opt);
    if (name == "verify-lr") return verify_lr_suite(opt);
    if (name == "verify-multicomm") return verify_multicomm_suite(opt);
    if (name == "tree-suite") return tree_suite(opt);
    if (name == "convergence") return convergence_suite(opt);
    if (name == "telescoping") return telescoping_suite(opt);
    if (name == "nonauto") return nonauto_suite(opt);
    if (name == "conductivity") return conductivity_suite(opt);
    if (name == "ac-measure") return ac_measure_suite(opt);
    if (name == "increments") return increments_suite(opt);
    throw ConfigError("unknown suite: " + name);
}

void write_csv(const std::string& path, const Table& table) {
    std::ofstream fout(path, std::ios::binary);
    if (!fout) throw ConfigError("cannot open for writing: " + path);
    // fields never contain commas or quotes by construction
    auto line = [&fout](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) fout << ',';
            fout << row[i];
        }
        fout << '\n';
    };
    line(table.header);
    for (const auto& row : table.rows) line(row);
}

void write_json(const std::string& path, const SuiteResult& result) {
    nlohmann::json j;
    j["suite"] = result.suite;
    j["n_cases"] = result.n_cases;
    j["n_pass"] = result.n_pass;
    j["pass"] = result.pass;
    if (result.has_margin)
        j["worst_margin"] = result.worst_margin;
    else
        j["worst_margin"] = nullptr;
    if (!result.extra_json.empty()) j["atoms"] = nlohmann::json::parse(result.extra_json);
    std::ofstream fout(path, std::ios::binary);
    if (!fout) throw ConfigError("cannot open for writing: " + path);
    fout << j.dump(2) << '\n';
}

}  // namespace lrlab::suites
