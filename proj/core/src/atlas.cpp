#include "extcalc/atlas.hpp"

namespace extcalc {

Transition::Transition(std::string from, std::string to, int n, std::vector<Expr> forward,
                       std::vector<Expr> backward)
    : from_(std::move(from)), to_(std::move(to)), n_(n), fwd_(std::move(forward)),
      bwd_(std::move(backward)) {
    if (n_ < 1) throw ShapeMismatch("transition dimension must be >= 1");
    if (fwd_.size() != static_cast<std::size_t>(n_) || bwd_.size() != static_cast<std::size_t>(n_))
        throw ShapeMismatch("transition needs n forward and n backward expressions");
    const std::vector<std::string> names = base_var_names(n_);
    cfwd_.reserve(fwd_.size());
    cbwd_.reserve(bwd_.size());
    for (const Expr& e : fwd_) cfwd_.emplace_back(e, names);
    for (const Expr& e : bwd_) cbwd_.emplace_back(e, names);
}

TransitionData transition_data(const Transition& t, std::span<const double> point) {
    return transition_jets<double>(t, point);
}

std::vector<double> theta_tilde_alt(const TransitionData& d) {
    const int n = d.n;
    std::vector<double> out(static_cast<std::size_t>(n) * n * n, 0.0);
    // dT^k_h/dxt^i = sum_m fwd_hess^k_{hm} S^m_i
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int h = 0; h < n; ++h) {
                    double dt = 0.0;
                    for (int m = 0; m < n; ++m)
                        dt += d.fwd_hess[(static_cast<std::size_t>(k) * n + h) * n + m] * d.Sm(m, i);
                    acc -= dt * d.Sm(h, j);
                }
                out[(static_cast<std::size_t>(k) * n + i) * n + j] = acc;
            }
    return out;
}

ThetaDualityReport check_theta_duality(const TransitionData& d) {
    const int n = d.n;
    ThetaDualityReport rep;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc316 = d.th(k, i, j);
                double acc317 = d.tht(k, i, j);
                for (int h = 0; h < n; ++h)
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) {
                            acc316 += d.tht(h, p, q) * d.Sm(k, h) * d.Tm(p, i) * d.Tm(q, j);
                            acc317 += d.th(h, p, q) * d.Tm(k, h) * d.Sm(p, i) * d.Sm(q, j);
                        }
                rep.residual_316 = std::max(rep.residual_316, std::abs(acc316));
                rep.residual_317 = std::max(rep.residual_317, std::abs(acc317));
            }
    return rep;
}

}  // namespace extcalc
