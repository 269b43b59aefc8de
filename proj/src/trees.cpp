#include "lrlab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lrlab::trees {

using lattice::Site;

namespace {

constexpr int kMaxTreeOrder = 10;  // k! trees are enumerated, keep it sane

void check_k(int k) {
    if (k < 1 || k > kMaxTreeOrder)
        throw std::invalid_argument("trees: need 1 <= k <= 10");
}

}  // namespace

std::vector<Tree> enumerate_trees(int k) {
    check_k(k);
    std::vector<Tree> out;
    std::size_t total = 1;
    for (int j = 1; j <= k; ++j) total *= static_cast<std::size_t>(j);
    out.reserve(total);
    std::vector<int> parent(static_cast<std::size_t>(k), 0);
    // odometer over the choices P(j) in {0, ..., j-1}
    while (true) {
        out.push_back(Tree{k, parent});
        int j = k;
        while (j >= 1) {
            int& pj = parent[static_cast<std::size_t>(j - 1)];
            if (pj + 1 < j) {
                ++pj;
                break;
            }
            pj = 0;
            --j;
        }
        if (j == 0) break;
    }
    return out;
}

std::vector<int> degrees(const Tree& t) {
    std::vector<int> deg(static_cast<std::size_t>(t.k + 1), 0);
    for (int j = 1; j <= t.k; ++j) {
        ++deg[static_cast<std::size_t>(j)];
        ++deg[static_cast<std::size_t>(t.p(j))];
    }
    return deg;
}

std::vector<int> simplified_code(const Tree& t) {
    std::vector<int> code;
    for (int j = 2; j <= t.k; ++j) code.push_back(t.p(j));
    return code;
}

int edge_weight(const Tree& t, const std::vector<int>& deg, int j) {
    return std::max(deg[static_cast<std::size_t>(j)],
                    deg[static_cast<std::size_t>(t.p(j))]);
}

// ---------------------------------------------------------------------------
// counting

double factorial(int n) {
    if (n < 0 || n > 170) throw std::invalid_argument("factorial: 0 <= n <= 170");
    long double f = 1.0L;
    for (int i = 2; i <= n; ++i) f *= i;
    return static_cast<double>(f);
}

double binomial(int n, int m) {
    if (m < 0 || m > n) return 0.0;
    m = std::min(m, n - m);
    long double b = 1.0L;
    for (int i = 1; i <= m; ++i) b = b * (n - m + i) / i;
    return static_cast<double>(std::floor(b + 0.5L));
}

DegreeCount count_trees_with_degrees(int k, const std::vector<int>& deg) {
    check_k(k);
    if (deg.size() != static_cast<std::size_t>(k + 1))
        throw std::invalid_argument("count_trees_with_degrees: degree sequence length");
    DegreeCount out;
    for (const Tree& t : enumerate_trees(k))
        if (degrees(t) == deg) out.exact += 1.0;
    double denom = 1.0;
    for (int v : deg) {
        if (v < 1) throw std::invalid_argument("count_trees_with_degrees: degrees >= 1");
        denom *= factorial(v - 1);
    }
    out.bound = factorial(k - 1) / denom;
    return out;
}

double degree_sequence_count(int k) {
    check_k(k);
    // positive solutions of d(0) + ... + d(k) = 2k
    return binomial(2 * k - 1, k);
}

FactorialSum degree_factorial_sum(int k) {
    check_k(k);
    FactorialSum out;
    for (const Tree& t : enumerate_trees(k)) {
        double prod = 1.0;
        for (int v : degrees(t)) prod *= factorial(v);
        out.exact += prod;
    }
    out.bound = factorial(k) * std::pow(4.0 * std::exp(2.0), k);
    return out;
}

bool stirling_sandwich_holds(int g_max) {
    if (g_max < 1 || g_max > 170) throw std::invalid_argument("stirling_sandwich_holds: 1 <= g_max <= 170");
    const long double two_pi = 2.0L * 3.14159265358979323846L;
    long double f = 1.0L;
    for (int g = 1; g <= g_max; ++g) {
        f *= g;
        const long double core = std::pow(static_cast<long double>(g), static_cast<long double>(g)) *
                                 std::exp(static_cast<long double>(-g)) * std::sqrt(two_pi * g);
        const long double lo = core * std::exp(1.0L / (12.0L * g + 1.0L));
        const long double hi = core * std::exp(1.0L / (12.0L * g));
        if (!(lo <= f && f <= hi)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// kappa

double kappa(const Tree& t, const std::vector<int>& n, const std::vector<Site>& x) {
    if (n.size() != static_cast<std::size_t>(t.k + 1) || x.size() != n.size())
        throw std::invalid_argument("kappa: need k+1 radii and k+1 centers");
    for (int j = 1; j <= t.k; ++j) {
        const int pj = t.p(j);
        const Site& a = x[static_cast<std::size_t>(j)];
        const Site& b = x[static_cast<std::size_t>(pj)];
        const int reach = n[static_cast<std::size_t>(j)] + n[static_cast<std::size_t>(pj)];
        // boxes are sup-norm balls: they intersect iff every axis overlaps
        for (int c = 0; c < a.dim; ++c)
            if (std::abs(a[c] - b[c]) > reach) return 0.0;
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// remainder coefficient

namespace {

void check_data(const Tree& t, const TreeData& data) {
    const auto sz = static_cast<std::size_t>(t.k + 1);
    if (data.m.size() != sz || data.s.size() != sz || data.x.size() != sz)
        throw std::invalid_argument("trees: data vectors must have length k+1");
}

// per-edge product of (1 + |x_j - x_P(j)|)^(-zeta / m_T(j))
double poly_edge_product(const Tree& t, const std::vector<Site>& x, double zeta) {
    const std::vector<int> deg = degrees(t);
    double prod = 1.0;
    for (int j = 1; j <= t.k; ++j) {
        const double r = lattice::euclid_norm(x[static_cast<std::size_t>(j)] -
                                              x[static_cast<std::size_t>(t.p(j))]);
        prod *= std::pow(1.0 + r, -zeta / edge_weight(t, deg, j));
    }
    return prod;
}

double exp_edge_product(const Tree& t, const std::vector<Site>& x, double sigma, int d) {
    const std::vector<int> deg = degrees(t);
    double prod = 1.0;
    for (int j = 1; j <= t.k; ++j) {
        const double r = lattice::euclid_norm(x[static_cast<std::size_t>(j)] -
                                              x[static_cast<std::size_t>(t.p(j))]);
        prod *= std::exp(-sigma * r / (std::sqrt(double(d)) * edge_weight(t, deg, j)));
    }
    return prod;
}

}  // namespace

Remainder remainder(const Tree& t, double alpha, const TreeData& data,
                    const lattice::DecayFunction& F, double conv_const, int trunc) {
    check_data(t, data);
    const int k = t.k;
    const int d = F.d;
    for (int j = 1; j <= k; ++j)
        if (trunc <= data.m[static_cast<std::size_t>(j)] + 1)
            throw std::invalid_argument("remainder: trunc must exceed every m_j + 1");

    // W_j(n) tables for n in (m_j, trunc], their partial sums, and certified
    // full sums: shifting y by z maps the tail onto |w| > trunc - m_j
    std::vector<std::vector<double>> w_tab(static_cast<std::size_t>(k + 1));
    std::vector<double> w_partial(static_cast<std::size_t>(k + 1), 0.0);
    std::vector<double> w_full(static_cast<std::size_t>(k + 1), 0.0);
    for (int j = 1; j <= k; ++j) {
        const int mj = data.m[static_cast<std::size_t>(j)];
        const auto box = lattice::box_sites(mj, d);
        for (int n = mj + 1; n <= trunc; ++n)
            w_tab[static_cast<std::size_t>(j)].push_back(
                lattice::decay_double_sum(F, box, lattice::shell_sites(n, d)));
        for (double v : w_tab[static_cast<std::size_t>(j)]) w_partial[static_cast<std::size_t>(j)] += v;
        w_full[static_cast<std::size_t>(j)] =
            w_partial[static_cast<std::size_t>(j)] +
            double(box.size()) * lattice::f_norm_tail_bound(F, trunc - mj);
    }

    Remainder out;
    std::vector<int> n(static_cast<std::size_t>(k + 1));
    for (int j = 0; j <= k; ++j) n[static_cast<std::size_t>(j)] = data.m[static_cast<std::size_t>(j)];

    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> members;
        double weight = 1.0;
        for (int j = 1; j <= k; ++j)
            if (mask & (1u << (j - 1))) {
                members.push_back(j);
                const double sj = std::abs(data.s[static_cast<std::size_t>(j)]);
                weight *= 2.0 * alpha * sj * std::exp(4.0 * conv_const * alpha * sj);
            }

        // truncated inflated sum: every member radius runs over (m_j, trunc]
        double truncated = 0.0;
        std::vector<std::size_t> idx(members.size(), 0);
        while (true) {
            double wprod = 1.0;
            for (std::size_t i = 0; i < members.size(); ++i) {
                const int j = members[i];
                n[static_cast<std::size_t>(j)] = data.m[static_cast<std::size_t>(j)] + 1 + static_cast<int>(idx[i]);
                wprod *= w_tab[static_cast<std::size_t>(j)][idx[i]];
            }
            truncated += kappa(t, n, data.x) * wprod;
            std::size_t i = 0;
            while (i < idx.size()) {
                if (++idx[i] < w_tab[static_cast<std::size_t>(members[i])].size()) break;
                idx[i] = 0;
                ++i;
            }
            if (i == idx.size()) break;
        }
        for (int j : members) n[static_cast<std::size_t>(j)] = data.m[static_cast<std::size_t>(j)];

        // tail: at least one member radius exceeds trunc; kappa <= 1 there
        double full = 1.0, part = 1.0;
        for (int j : members) {
            full *= w_full[static_cast<std::size_t>(j)];
            part *= w_partial[static_cast<std::size_t>(j)];
        }
        out.lower += weight * truncated;
        out.upper += weight * (truncated + (full - part));
    }
    return out;
}

// ---------------------------------------------------------------------------
// closed-form majorants

double remainder_poly_bound(const Tree& t, double alpha, const TreeData& data,
                            const lattice::DecaySequenceData& seq, double conv_const) {
    check_data(t, data);
    if (seq.kind != lattice::DecayKind::Polynomial)
        throw std::invalid_argument("remainder_poly_bound: polynomial summability data required");
    const int k = t.k;
    for (int j = 0; j <= k; ++j)
        if (data.m[static_cast<std::size_t>(j)] > seq.m_max)
            throw std::invalid_argument("remainder_poly_bound: m_j exceeds tabulated m_max");

    const double zeta = seq.zeta;
    const double edge = poly_edge_product(t, data.x, zeta);
    double subset_sum = 0.0;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        double term = 1.0;
        for (int j = 1; j <= k; ++j) {
            const int mj = data.m[static_cast<std::size_t>(j)];
            if (mask & (1u << (j - 1))) {
                const double sj = std::abs(data.s[static_cast<std::size_t>(j)]);
                term *= 2.0 * alpha * seq.u_norm[static_cast<std::size_t>(mj)] * sj *
                        std::exp(4.0 * conv_const * alpha * sj);
            } else {
                term *= std::pow(1.0 + mj, zeta);
            }
        }
        term *= std::pow(1.0 + data.m[0], zeta);  // vertex 0 is never inflated
        subset_sum += term;
    }
    return std::pow(double(seq.d), zeta * k / 2.0) * subset_sum * edge;
}

double remainder_exp_bound(const Tree& t, double alpha, const TreeData& data,
                           const lattice::DecaySequenceData& seq, double conv_const) {
    check_data(t, data);
    if (seq.kind != lattice::DecayKind::ExponentialPolynomial)
        throw std::invalid_argument("remainder_exp_bound: exponential summability data required");
    const int k = t.k;
    for (int j = 0; j <= k; ++j)
        if (data.m[static_cast<std::size_t>(j)] > seq.m_max)
            throw std::invalid_argument("remainder_exp_bound: m_j exceeds tabulated m_max");

    const double sg = seq.zeta;
    const double edge = exp_edge_product(t, data.x, sg, seq.d);
    const double geom = 2.0 * alpha / (std::exp(sg) - 1.0);
    double subset_sum = 0.0;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        double term = 1.0;
        for (int j = 1; j <= k; ++j) {
            const int mj = data.m[static_cast<std::size_t>(j)];
            if (mask & (1u << (j - 1))) {
                const double sj = std::abs(data.s[static_cast<std::size_t>(j)]);
                term *= geom * seq.c_m[static_cast<std::size_t>(mj)] * sj *
                        std::exp(4.0 * conv_const * alpha * sj - sg * mj);
            } else {
                term *= std::exp(sg * mj);
            }
        }
        term *= std::exp(sg * data.m[0]);
        subset_sum += term;
    }
    return subset_sum * edge;
}

double kappa_poly_bound(const Tree& t, const TreeData& data, double zeta, int d) {
    check_data(t, data);
    double prod = std::pow(double(d), zeta * t.k / 2.0);
    for (int j = 0; j <= t.k; ++j)
        prod *= std::pow(1.0 + data.m[static_cast<std::size_t>(j)], zeta);
    return prod * poly_edge_product(t, data.x, zeta);
}

double kappa_exp_bound(const Tree& t, const TreeData& data, double sigma, int d) {
    check_data(t, data);
    int msum = 0;
    for (int v : data.m) msum += v;
    return std::exp(sigma * msum) * exp_edge_product(t, data.x, sigma, d);
}

// ---------------------------------------------------------------------------
// tree-decay constants

double tree_decay_k0(double alpha, double t, const lattice::DecaySequenceData& seq,
                     double conv_const, int d) {
    if (seq.kind != lattice::DecayKind::Polynomial || seq.m_max < 1)
        throw std::invalid_argument("tree_decay_k0: polynomial data with m_max >= 1 required");
    const double u1 = seq.u_norm[1];
    return 2.0 * std::pow(double(d), seq.zeta / 2.0) *
           (std::pow(2.0, seq.zeta) +
            2.0 * u1 * alpha * std::abs(t) * std::exp(4.0 * conv_const * std::abs(t) * alpha));
}

double tree_decay_k1(double alpha, double t, const lattice::DecaySequenceData& seq,
                     double conv_const) {
    if (seq.kind != lattice::DecayKind::ExponentialPolynomial || seq.m_max < 1)
        throw std::invalid_argument("tree_decay_k1: exponential data with m_max >= 1 required");
    const double sg = seq.zeta;
    const double c1 = seq.c_m[1];
    return 2.0 * (std::exp(sg) +
                  2.0 * c1 * alpha * std::abs(t) * std::exp(4.0 * conv_const * std::abs(t) * alpha) /
                      (std::exp(2.0 * sg) - std::exp(sg)));
}

double tree_edge_sum_poly(int k, const std::vector<Site>& x, double zeta) {
    check_k(k);
    if (x.size() != static_cast<std::size_t>(k + 1))
        throw std::invalid_argument("tree_edge_sum_poly: need k+1 sites");
    double s = 0.0;
    for (const Tree& t : enumerate_trees(k)) s += poly_edge_product(t, x, zeta);
    return s;
}

double tree_edge_sum_exp(int k, const std::vector<Site>& x, double sigma, int d) {
    check_k(k);
    if (x.size() != static_cast<std::size_t>(k + 1))
        throw std::invalid_argument("tree_edge_sum_exp: need k+1 sites");
    double s = 0.0;
    for (const Tree& t : enumerate_trees(k)) s += exp_edge_product(t, x, sigma, d);
    return s;
}

// ---------------------------------------------------------------------------
// summed tree-decay proposition

double edge_lattice_sum(int d, double sigma, int g) {
    if (d < 1 || d > 4 || sigma <= 0.0 || g < 1)
        throw std::invalid_argument("edge_lattice_sum: need d in 1..4, sigma > 0, g >= 1");
    const double theta = sigma / (std::sqrt(double(d)) * g);
    const int R = std::max({8, static_cast<int>(std::ceil(2.0 * (d - 1) / theta)),
                            static_cast<int>(std::ceil(8.0 / theta))});
    double s = 0.0;
    for (const Site& w : lattice::box_sites(R, d))
        s += std::exp(-theta * lattice::euclid_norm(w));
    // tail over |w|_inf = r > R: |w|_2 >= r and |shell(r)| <= d 2^d (1+r)^(d-1);
    // (1+r)^(d-1) e^{-theta r / 2} is decreasing past R >= 2(d-1)/theta
    const double tail = d * std::pow(2.0, d) * std::pow(2.0 + R, d - 1.0) *
                        std::exp(-theta * (R + 1)) / (1.0 - std::exp(-theta / 2.0));
    return s + tail;
}

TreeSumCheck tree_sum_bound_check(int k, int d, double sigma) {
    check_k(k);
    if (d < 1 || d > 4 || sigma <= 0.0)
        throw std::invalid_argument("tree_sum_bound_check: need d in 1..4, sigma > 0");

    TreeSumCheck out;
    // S_d with sum_w exp(-sigma |w| / (g sqrt(d))) <= S_d g^d:
    // |w|_2 >= (|w_1| + ... + |w_d|) / sqrt(d) factorizes the sum per axis, and
    // each axis gives 1 + 2/(e^b - 1) <= 1 + 2gd/sigma <= g (1 + 2 d sqrt(d)/sigma)
    const double s_d = std::pow(1.0 + 2.0 * d * std::sqrt(double(d)) / sigma, d);
    out.constant_d = 4.0 * std::exp(2.0) * std::exp(2.0 * d) * s_d;
    out.rhs = std::pow(out.constant_d, k) * std::pow(factorial(k), d);

    std::map<int, double> g_cache;
    for (const Tree& t : enumerate_trees(k)) {
        const std::vector<int> deg = degrees(t);
        double prod = 1.0;
        for (int j = 1; j <= k; ++j) {
            const int g = edge_weight(t, deg, j);
            auto it = g_cache.find(g);
            if (it == g_cache.end()) it = g_cache.emplace(g, edge_lattice_sum(d, sigma, g)).first;
            prod *= it->second;
        }
        out.lhs_upper += prod;
    }
    out.pass = out.lhs_upper <= out.rhs * (1.0 + 1e-12);
    return out;
}

}  // namespace lrlab::trees
