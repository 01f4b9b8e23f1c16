#ifndef EXTCALC_MULTITENSOR_HPP
#define EXTCALC_MULTITENSOR_HPP

// Dense multi-index tensor values of arbitrary valence over dimension n.
// Layout: flat row-major, all contravariant indices before all covariant
// ones, each index 0-based internally (user-facing keys are 1-based).

#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "extcalc/errors.hpp"
#include "extcalc/jets.hpp"

namespace extcalc {

struct Valence {
    int r = 0;  // contravariant slots
    int s = 0;  // covariant slots

    int rank() const { return r + s; }
    bool operator==(const Valence& o) const { return r == o.r && s == o.s; }
    bool operator!=(const Valence& o) const { return !(*this == o); }
};

inline std::string to_string(const Valence& v) {
    return "(" + std::to_string(v.r) + "," + std::to_string(v.s) + ")";
}

inline std::size_t int_power(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

template <class S>
class Tensor {
public:
    Tensor() : dim_(1) {}
    Tensor(int dim, Valence val)
        : dim_(dim), val_(val), c_(int_power(static_cast<std::size_t>(dim), val.rank()), S{}) {
        if (dim < 1 || val.r < 0 || val.s < 0) throw ShapeMismatch("invalid tensor shape");
    }
    Tensor(int dim, Valence val, std::vector<S> comps) : dim_(dim), val_(val), c_(std::move(comps)) {
        if (dim < 1 || val.r < 0 || val.s < 0) throw ShapeMismatch("invalid tensor shape");
        if (c_.size() != int_power(static_cast<std::size_t>(dim), val.rank()))
            throw ShapeMismatch("component count " + std::to_string(c_.size()) +
                                " does not match dim^" + std::to_string(val.rank()));
    }

    static Tensor scalar(int dim, S value) {
        Tensor t(dim, Valence{0, 0});
        t.c_[0] = std::move(value);
        return t;
    }

    static Tensor identity(int dim) {
        Tensor t(dim, Valence{1, 1});
        for (int i = 0; i < dim; ++i) t.c_[static_cast<std::size_t>(i) * dim + i] = S(1.0);
        return t;
    }

    int dim() const { return dim_; }
    const Valence& valence() const { return val_; }
    std::size_t size() const { return c_.size(); }

    const std::vector<S>& components() const { return c_; }
    std::vector<S>& components() { return c_; }
    const S& operator[](std::size_t flat) const { return c_[flat]; }
    S& operator[](std::size_t flat) { return c_[flat]; }

    // stride of index position pos (0-based over the r+s positions)
    std::size_t stride(int pos) const {
        return int_power(static_cast<std::size_t>(dim_), val_.rank() - 1 - pos);
    }

    std::size_t flatten(const std::vector<int>& multi) const {
        std::size_t f = 0;
        for (int idx : multi) f = f * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx);
        return f;
    }

    std::vector<int> unflatten(std::size_t flat) const {
        std::vector<int> multi(val_.rank());
        for (int p = val_.rank() - 1; p >= 0; --p) {
            multi[p] = static_cast<int>(flat % static_cast<std::size_t>(dim_));
            flat /= static_cast<std::size_t>(dim_);
        }
        return multi;
    }

    int digit(std::size_t flat, int pos) const {
        return static_cast<int>((flat / stride(pos)) % static_cast<std::size_t>(dim_));
    }

    // flat index with position pos replaced by v
    std::size_t with_digit(std::size_t flat, int pos, int v) const {
        const std::size_t st = stride(pos);
        const int old = static_cast<int>((flat / st) % static_cast<std::size_t>(dim_));
        return flat + static_cast<std::size_t>(v - old) * st;
    }

private:
    int dim_;
    Valence val_;
    std::vector<S> c_;
};

using TensorD = Tensor<double>;

namespace detail {

template <class S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
    if (a.dim() != b.dim() || a.valence() != b.valence())
        throw ShapeMismatch(std::string(op) + ": got " + std::to_string(a.dim()) +
                            to_string(a.valence()) + " vs " + std::to_string(b.dim()) +
                            to_string(b.valence()));
}

}  // namespace detail

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "add");
    Tensor<S> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] + b[i];
    return out;
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "sub");
    Tensor<S> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] - b[i];
    return out;
}

template <class S>
Tensor<S> scale(const S& lambda, const Tensor<S>& a) {
    Tensor<S> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * out[i];
    return out;
}

template <class S, class = std::enable_if_t<!std::is_same_v<S, double>>>
Tensor<S> scale(double lambda, const Tensor<S>& a) {
    Tensor<S> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * lambda;
    return out;
}

// Slot order of the product: a's uppers, b's uppers, a's lowers, b's lowers.
template <class S>
Tensor<S> tensor_product(const Tensor<S>& a, const Tensor<S>& b) {
    if (a.dim() != b.dim()) throw ShapeMismatch("tensor_product: dimension mismatch");
    const int n = a.dim();
    const Valence va = a.valence(), vb = b.valence();
    Tensor<S> out(n, Valence{va.r + vb.r, va.s + vb.s});

    const std::size_t na_up = int_power(static_cast<std::size_t>(n), va.r);
    const std::size_t nb_up = int_power(static_cast<std::size_t>(n), vb.r);
    const std::size_t na_lo = int_power(static_cast<std::size_t>(n), va.s);
    const std::size_t nb_lo = int_power(static_cast<std::size_t>(n), vb.s);

    std::size_t o = 0;
    for (std::size_t au = 0; au < na_up; ++au)
        for (std::size_t bu = 0; bu < nb_up; ++bu)
            for (std::size_t al = 0; al < na_lo; ++al)
                for (std::size_t bl = 0; bl < nb_lo; ++bl, ++o)
                    out[o] = a[au * na_lo + al] * b[bu * nb_lo + bl];
    return out;
}

// Sums the paired index; remaining slots keep their relative order.
template <class S>
Tensor<S> contract(const Tensor<S>& a, int upper_slot, int lower_slot) {
    const Valence v = a.valence();
    if (v.r < 1 || v.s < 1) throw SlotOutOfRange("contract: tensor has no index pair");
    if (upper_slot < 0 || upper_slot >= v.r || lower_slot < 0 || lower_slot >= v.s)
        throw SlotOutOfRange("contract: slot out of range");
    const int n = a.dim();
    const int pos_u = upper_slot;
    const int pos_l = v.r + lower_slot;
    Tensor<S> out(n, Valence{v.r - 1, v.s - 1});

    // positions of the result's slots inside the source index tuple
    std::vector<int> src_pos;
    src_pos.reserve(static_cast<std::size_t>(v.rank() - 2));
    for (int p = 0; p < v.rank(); ++p)
        if (p != pos_u && p != pos_l) src_pos.push_back(p);

    const std::size_t out_count = out.size();
    for (std::size_t of = 0; of < out_count; ++of) {
        std::size_t base = 0;
        {
            std::size_t rest = of;
            for (int p = static_cast<int>(src_pos.size()) - 1; p >= 0; --p) {
                const int idx = static_cast<int>(rest % static_cast<std::size_t>(n));
                rest /= static_cast<std::size_t>(n);
                base += static_cast<std::size_t>(idx) * a.stride(src_pos[p]);
            }
        }
        S sum{};
        const std::size_t su = a.stride(pos_u), sl = a.stride(pos_l);
        for (int k = 0; k < n; ++k)
            sum = sum + a[base + static_cast<std::size_t>(k) * (su + sl)];
        out[of] = sum;
    }
    return out;
}

// Action of a (1,1) matrix A on every slot of x: +A on each upper slot,
// -(A transpose) on each lower slot. This is the correction pattern shared by
// the derivation formula, horizontal lifts, theta corrections, and the
// curvature contraction tensors.
template <class S>
Tensor<S> degenerate_action(const Tensor<S>& A, const Tensor<S>& x) {
    if (A.valence() != Valence{1, 1} || A.dim() != x.dim())
        throw ShapeMismatch("degenerate_action: A must be a (1,1) tensor of matching dim");
    const int n = x.dim();
    const Valence v = x.valence();
    Tensor<S> out(n, v);
    for (std::size_t c = 0; c < x.size(); ++c) {
        S acc{};
        for (int m = 0; m < v.r; ++m) {
            const int im = x.digit(c, m);
            for (int w = 0; w < n; ++w)
                acc = acc + A[static_cast<std::size_t>(im) * n + w] * x[x.with_digit(c, m, w)];
        }
        for (int m = 0; m < v.s; ++m) {
            const int pos = v.r + m;
            const int jm = x.digit(c, pos);
            for (int w = 0; w < n; ++w)
                acc = acc - A[static_cast<std::size_t>(w) * n + jm] * x[x.with_digit(c, pos, w)];
        }
        out[c] = acc;
    }
    return out;
}

template <class S>
Tensor<double> tensor_values(const Tensor<S>& t) {
    Tensor<double> out(t.dim(), t.valence());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = scalar_value(t[i]);
    return out;
}

inline double max_abs(const Tensor<double>& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double a = t[i] < 0 ? -t[i] : t[i];
        if (a > m) m = a;
    }
    return m;
}

template <class S>
double max_abs_diff(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(scalar_value(a[i]) - scalar_value(b[i]));
        if (d > m) m = d;
    }
    return m;
}

}  // namespace extcalc

#endif
