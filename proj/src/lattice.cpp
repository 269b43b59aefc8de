#include "lrlab/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace lrlab::lattice {

// ---------------------------------------------------------------------------
// sites

Site site(int x) { return Site{{x, 0, 0, 0}, 1}; }
Site site(int x, int y) { return Site{{x, y, 0, 0}, 2}; }
Site site(int x, int y, int z) { return Site{{x, y, z, 0}, 3}; }

Site site_of(const std::vector<int>& coords) {
    if (coords.empty() || coords.size() > 4)
        throw std::invalid_argument("site_of: dimension must be 1..4");
    Site s;
    s.dim = static_cast<int>(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) s.c[i] = coords[i];
    return s;
}

int max_norm(const Site& x) {
    int m = 0;
    for (int i = 0; i < x.dim; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

double euclid_norm(const Site& x) {
    double s = 0.0;
    for (int i = 0; i < x.dim; ++i) s += double(x[i]) * double(x[i]);
    return std::sqrt(s);
}

std::string to_string(const Site& x) {
    std::string out = "(";
    for (int i = 0; i < x.dim; ++i) {
        if (i) out += ",";
        out += std::to_string(x[i]);
    }
    return out + ")";
}

std::vector<Site> box_sites(int L, int d) { return box_sites(L, d, site_of(std::vector<int>(static_cast<std::size_t>(d), 0))); }

std::vector<Site> box_sites(int L, int d, const Site& center) {
    if (L < 0 || d < 1 || d > 4) throw std::invalid_argument("box_sites: need L >= 0, 1 <= d <= 4");
    if (center.dim != d) throw std::invalid_argument("box_sites: center dimension mismatch");
    const int w = 2 * L + 1;
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) count *= static_cast<std::size_t>(w);
    std::vector<Site> out;
    out.reserve(count);
    Site s;
    s.dim = d;
    std::array<int, 4> idx{};
    for (std::size_t n = 0; n < count; ++n) {
        std::size_t r = n;
        // lexicographic: first coordinate is the most significant digit
        for (int i = d - 1; i >= 0; --i) {
            idx[static_cast<std::size_t>(i)] = static_cast<int>(r % static_cast<std::size_t>(w));
            r /= static_cast<std::size_t>(w);
        }
        for (int i = 0; i < d; ++i) s[i] = center[i] - L + idx[static_cast<std::size_t>(i)];
        out.push_back(s);
    }
    return out;
}

std::vector<Site> shell_sites(int n, int d) {
    if (n < 0) throw std::invalid_argument("shell_sites: n >= 0");
    std::vector<Site> out;
    for (const Site& s : box_sites(n, d))
        if (max_norm(s) == n) out.push_back(s);
    return out;
}

std::vector<Site> chain_sites(int x0, int n) {
    if (n < 1) throw std::invalid_argument("chain_sites: n >= 1");
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(site(x0 + i));
    return out;
}

// ---------------------------------------------------------------------------
// decay functions

double DecayFunction::value(double r) const {
    if (r < 0) throw std::invalid_argument("DecayFunction::value: r >= 0");
    const double p = std::pow(1.0 + r, -(double(d) + epsilon));
    if (kind == DecayKind::Polynomial) return p;
    return std::exp(-2.0 * sigma * r) * p;
}

DecayFunction poly_decay(int d, double epsilon) {
    if (d < 1 || d > 4 || epsilon <= 0.0) throw std::invalid_argument("poly_decay: need d in 1..4, epsilon > 0");
    return DecayFunction{DecayKind::Polynomial, d, epsilon, 0.0};
}

DecayFunction exp_poly_decay(int d, double epsilon, double sigma) {
    if (d < 1 || d > 4 || epsilon <= 0.0 || sigma <= 0.0)
        throw std::invalid_argument("exp_poly_decay: need d in 1..4, epsilon > 0, sigma > 0");
    return DecayFunction{DecayKind::ExponentialPolynomial, d, epsilon, sigma};
}

namespace {

// |shell(r)| in Z^d: (2r+1)^d - (2r-1)^d, with shell(0) = {0}
double shell_count(int r, int d) {
    if (r == 0) return 1.0;
    return std::pow(2.0 * r + 1.0, d) - std::pow(2.0 * r - 1.0, d);
}

// closed-form majorant of sum_{|x|_inf > R} F(|x|_2), using F decreasing,
// |x|_2 >= |x|_inf and |shell(r)| <= d 2^d (1+r)^(d-1):
//   poly: d 2^d (1+R)^-eps / eps
//   exp:  d 2^d (1+R)^-(1+eps) e^{-2 sigma (R+1)} / (1 - e^{-2 sigma})
double f_norm_tail(const DecayFunction& F, int R) {
    const double pre = F.d * std::pow(2.0, F.d);
    if (F.kind == DecayKind::Polynomial)
        return pre * std::pow(1.0 + R, -F.epsilon) / F.epsilon;
    return pre * std::pow(1.0 + R, -(1.0 + F.epsilon)) * std::exp(-2.0 * F.sigma * (R + 1)) /
           (1.0 - std::exp(-2.0 * F.sigma));
}

}  // namespace

double f_norm_tail_bound(const DecayFunction& F, int R) {
    if (R < 0) throw std::invalid_argument("f_norm_tail_bound: R >= 0");
    return f_norm_tail(F, R);
}

double f_norm_bound(const DecayFunction& F, int trunc) {
    if (trunc < 1) throw std::invalid_argument("f_norm_bound: trunc >= 1");
    double s = 0.0;
    // radial exact sum: shells share |x|_2 only in d=1, so sum per site
    for (int r = 0; r <= trunc; ++r)
        for (const Site& x : shell_sites(r, F.d)) s += F.value(euclid_norm(x));
    return s + f_norm_tail(F, trunc);
}

double convolution_constant_bound(const DecayFunction& F, int trunc) {
    DecayFunction poly{DecayKind::Polynomial, F.d, F.epsilon, 0.0};
    return std::pow(2.0, F.d + 1.0 + F.epsilon) * f_norm_bound(poly, trunc);
}

double decay_double_sum(const DecayFunction& F,
                        const std::vector<Site>& A,
                        const std::vector<Site>& B) {
    double s = 0.0;
    for (const Site& x : A)
        for (const Site& y : B) s += F.value(euclid_norm(x - y));
    return s;
}

// ---------------------------------------------------------------------------
// summability data

double shell_condition_term(const DecayFunction& F, int n, int m) {
    if (n <= m || m < 0) throw std::invalid_argument("shell_condition_term: need n > m >= 0");
    // closest shell point to z in Lambda_m is at Euclidean distance n - |z|_inf
    double inner = 0.0;
    for (int j = 0; j <= m; ++j) inner += shell_count(j, F.d) * F.value(double(n - j));
    return shell_count(n, F.d) * inner;
}

DecaySequenceData decay_sequences(const DecayFunction& F, int m_max, double zeta, int n_big) {
    if (m_max < 0) throw std::invalid_argument("decay_sequences: m_max >= 0");
    if (zeta <= 0.0) zeta = (F.kind == DecayKind::Polynomial) ? F.epsilon / 2.0 : F.sigma;
    if (F.kind == DecayKind::Polynomial && zeta >= F.epsilon)
        throw std::invalid_argument("decay_sequences: polynomial kind needs zeta < epsilon");
    n_big = std::max({n_big, 2 * m_max + 2, 2 * F.d, 16});
    if (F.kind == DecayKind::ExponentialPolynomial)
        n_big = std::max(n_big, static_cast<int>(std::ceil(zeta / F.sigma)) + 1);

    DecaySequenceData out;
    out.kind = F.kind;
    out.d = F.d;
    out.zeta = zeta;
    out.m_max = m_max;

    const double d2 = double(F.d);
    for (int m = 0; m <= m_max; ++m) {
        // exact partial sum of u_{n,m} = S(n,m) (1+n)^zeta
        double partial = 0.0;
        for (int n = m + 1; n <= n_big; ++n)
            partial += shell_condition_term(F, n, m) * std::pow(1.0 + n, zeta);
        // tail majorant: for n > n_big >= 2m+2 one has
        //   u_{n,m} <= d 2^(2d+eps) (2m+1)^d (1+n)^-(1+eps-zeta) [* e^{-2 sigma (n-m)}]
        const double pre = d2 * std::pow(2.0, 2.0 * d2 + F.epsilon) * std::pow(2.0 * m + 1.0, d2);
        double tail;
        if (F.kind == DecayKind::Polynomial) {
            tail = pre * std::pow(1.0 + n_big, -(F.epsilon - zeta)) / (F.epsilon - zeta);
        } else {
            // u_{n,m} <= pre e^{2 sigma m} [(1+n)^(zeta-1-eps) e^{-sigma n}] e^{-sigma n};
            // the bracket is decreasing past n_big >= zeta/sigma, so freeze it there
            // and sum the remaining geometric factor
            const int n1 = n_big + 1;
            const double bracket =
                std::pow(1.0 + n1, zeta - 1.0 - F.epsilon) * std::exp(-F.sigma * n1);
            tail = pre * std::exp(2.0 * F.sigma * m) * bracket * std::exp(-F.sigma * n1) /
                   (1.0 - std::exp(-F.sigma));
        }
        out.u_norm.push_back(partial + tail);

        if (F.kind == DecayKind::ExponentialPolynomial) {
            // C_m = sup_n S(n,m) e^{2 sigma n}; exact max over n <= n_big, then the
            // majorant 2d (2n+1)^(d-1) (2m+1)^d (1+n-m)^-(d+eps) e^{2 sigma m},
            // which is decreasing for n > n_big >= max(2m+2, 2d)
            double cm = 0.0;
            for (int n = m + 1; n <= n_big; ++n)
                cm = std::max(cm, shell_condition_term(F, n, m) * std::exp(2.0 * F.sigma * n));
            const int n1 = n_big + 1;
            const double maj = 2.0 * d2 * std::pow(2.0 * n1 + 1.0, d2 - 1.0) *
                               std::pow(2.0 * m + 1.0, d2) *
                               std::pow(1.0 + n1 - m, -(d2 + F.epsilon)) *
                               std::exp(2.0 * F.sigma * m);
            out.c_m.push_back(std::max(cm, maj));
        }
    }
    return out;
}

}  // namespace lrlab::lattice
