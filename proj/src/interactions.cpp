#include "lrlab/interactions.hpp"

#include <algorithm>
#include <cmath>

namespace lrlab::interactions {

using fock::Context;
using fock::FockOperator;
using lattice::Site;

namespace {

Term make_term(std::vector<Site> zsites, FockOperator op) {
    std::sort(zsites.begin(), zsites.end());
    return Term{std::move(zsites), op, fock::spectral_norm(op)};
}

int support_diameter(const std::vector<Site>& z) {
    int diam = 0;
    for (const auto& a : z)
        for (const auto& b : z) diam = std::max(diam, lattice::max_norm(a - b));
    return diam;
}

void check_range(Interaction& psi) {
    for (const auto& t : psi.terms) psi.range = std::max(psi.range, support_diameter(t.zsites));
    if (psi.range > 8) throw GuardError("interaction range exceeds the finite-range guard 8");
}

}  // namespace

Interaction hopping_density(const std::vector<double>& h, const std::vector<double>& v,
                            const std::vector<Site>& window) {
    if (h.empty() && v.empty()) throw std::invalid_argument("hopping_density: empty tables");
    const int R = static_cast<int>(std::max(h.size(), v.size())) - 1;
    auto tab = [](const std::vector<double>& t, int r) {
        return r < static_cast<int>(t.size()) ? t[static_cast<std::size_t>(r)] : 0.0;
    };
    Interaction psi;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const Site& x = window[i];
        const double c0 = tab(h, 0) + tab(v, 0);  // a*_x a_x = n_x and n_x n_x = n_x
        if (c0 != 0.0) {
            Context cx = Context::from_sites({x});
            psi.terms.push_back(make_term({x}, fock::scale(c0, fock::number_op(cx, x))));
        }
        for (std::size_t j = i + 1; j < window.size(); ++j) {
            const Site& y = window[j];
            const int r = lattice::max_norm(x - y);
            if (r > R) continue;
            const double hr = tab(h, r), vr = tab(v, r);
            if (hr == 0.0 && vr == 0.0) continue;
            Context cxy = Context::from_sites({x, y});
            FockOperator t = fock::zero_op(cxy);
            if (hr != 0.0) {
                FockOperator hop =
                    fock::multiply(fock::creation(cxy, x), fock::annihilation(cxy, y));
                t = fock::add(t, fock::scale(hr, fock::add(hop, fock::adjoint(hop))));
            }
            if (vr != 0.0) {
                t = fock::add(t, fock::scale(2.0 * vr,
                                             fock::multiply(fock::number_op(cxy, x),
                                                            fock::number_op(cxy, y))));
            }
            psi.terms.push_back(make_term({x, y}, t));
        }
    }
    check_range(psi);
    return psi;
}

Interaction discrete_laplacian(int d, const std::vector<Site>& window) {
    Interaction psi;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const Site& x = window[i];
        Context cx = Context::from_sites({x});
        psi.terms.push_back(make_term({x}, fock::scale(2.0 * d, fock::number_op(cx, x))));
        for (std::size_t j = i + 1; j < window.size(); ++j) {
            const Site& y = window[j];
            if (std::abs(lattice::euclid_norm(x - y) - 1.0) > 1e-12) continue;
            Context cxy = Context::from_sites({x, y});
            FockOperator hop = fock::multiply(fock::creation(cxy, x), fock::annihilation(cxy, y));
            psi.terms.push_back(make_term({x, y}, fock::scale(-1.0, fock::add(hop, fock::adjoint(hop)))));
        }
    }
    check_range(psi);
    return psi;
}

Interaction density_density(const std::vector<double>& v, const std::vector<Site>& window) {
    Interaction psi;
    const int R = static_cast<int>(v.size()) - 1;
    for (std::size_t i = 0; i < window.size(); ++i) {
        for (std::size_t j = i + 1; j < window.size(); ++j) {
            const Site &x = window[i], &y = window[j];
            const int r = lattice::max_norm(x - y);
            if (r < 1 || r > R || v[static_cast<std::size_t>(r)] == 0.0) continue;
            Context cxy = Context::from_sites({x, y});
            psi.terms.push_back(make_term(
                {x, y}, fock::scale(2.0 * v[static_cast<std::size_t>(r)],
                                    fock::multiply(fock::number_op(cxy, x),
                                                   fock::number_op(cxy, y)))));
        }
    }
    check_range(psi);
    return psi;
}

Interaction combine(const Interaction& a, const Interaction& b) {
    Interaction out = a;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    out.range = std::max(a.range, b.range);
    return out;
}

Interaction scale_interaction(double c, const Interaction& a) {
    Interaction out = a;
    for (auto& t : out.terms) {
        t.op = fock::scale(c, t.op);
        t.norm *= std::abs(c);
    }
    return out;
}

Potential random_potential(const std::vector<Site>& window, double lambda, std::uint64_t seed) {
    Potential V;
    for (std::size_t i = 0; i < window.size(); ++i)
        V.v[window[i]] = lambda * uniform_pm1(seed, i);
    return V;
}

// ---------------------------------------------------------------------------

namespace {

bool support_inside(const std::vector<Site>& z, const std::vector<Site>& region) {
    return std::all_of(z.begin(), z.end(), [&](const Site& s) {
        return std::binary_search(region.begin(), region.end(), s);
    });
}

}  // namespace

FockOperator hamiltonian(const Interaction& psi, const Potential& V,
                         const std::vector<Site>& region, const Context& ctx) {
    std::vector<Site> reg = region;
    std::sort(reg.begin(), reg.end());
    FockOperator H = fock::zero_op(ctx);
    for (const auto& t : psi.terms) {
        if (!support_inside(t.zsites, reg)) continue;
        H.m += fock::embed(t.op, ctx).m;
    }
    for (const auto& s : reg) {
        const double vx = V(s);
        if (vx != 0.0) H.m += vx * fock::number_op(ctx, s).m;
    }
    return H;
}

FockOperator hamiltonian(const Interaction& psi, const Potential& V, const Context& ctx) {
    return hamiltonian(psi, V, ctx.sites(), ctx);
}

FockOperator energy_observable(const Interaction& psi, const std::vector<Site>& region,
                               const Context& ctx) {
    return hamiltonian(psi, Potential{}, region, ctx);
}

double w_norm(const Interaction& psi, const lattice::DecayFunction& F,
              const std::vector<Site>& window) {
    std::map<std::pair<Site, Site>, double> bucket;
    for (const auto& t : psi.terms) {
        if (t.norm == 0.0) continue;
        for (const auto& x : t.zsites)
            for (const auto& y : t.zsites) bucket[{x, y}] += t.norm;
    }
    std::vector<Site> win = window;
    std::sort(win.begin(), win.end());
    double sup = 0.0;
    for (const auto& [pair, sum] : bucket) {
        if (!std::binary_search(win.begin(), win.end(), pair.first)) continue;
        if (!std::binary_search(win.begin(), win.end(), pair.second)) continue;
        sup = std::max(sup, sum / F.value(lattice::euclid_norm(pair.first - pair.second)));
    }
    return sup;
}

std::vector<Site> boundary_set(const Interaction& psi, const std::vector<Site>& region) {
    std::vector<Site> reg = region;
    std::sort(reg.begin(), reg.end());
    std::vector<Site> out;
    for (const auto& t : psi.terms) {
        if (t.norm == 0.0) continue;
        const bool sticks_out = !support_inside(t.zsites, reg);
        if (!sticks_out) continue;
        for (const auto& s : t.zsites)
            if (std::binary_search(reg.begin(), reg.end(), s)) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// time dependence

double Drive::value(double t) const {
    switch (wave) {
        case Wave::Sine: return amp * std::sin(omega * t + phase);
        case Wave::Cosine: return amp * std::cos(omega * t + phase);
        case Wave::Constant: return amp;
    }
    return 0.0;
}

Interaction TimeInteraction::at_time(double t) const {
    Interaction out = static_part;
    for (const auto& d : drives) {
        const double f = d.value(t);
        if (f != 0.0) out = combine(out, scale_interaction(f, d.part));
    }
    out.range = static_part.range;
    for (const auto& d : drives) out.range = std::max(out.range, d.part.range);
    return out;
}

Interaction TimeInteraction::envelope() const {
    Interaction out = static_part;
    for (const auto& d : drives) out = combine(out, scale_interaction(d.sup_abs(), d.part));
    return out;
}

double sup_w_norm(const TimeInteraction& psi, const lattice::DecayFunction& F,
                  const std::vector<Site>& window) {
    // per-term triangle inequality: ||static_Z + sum f_i drive_Z|| <= ||static_Z|| +
    // sum sup|f_i| ||drive_Z||, so the envelope's W-norm dominates every time slice
    return w_norm(psi.envelope(), F, window);
}

}  // namespace lrlab::interactions
