#include "extcalc/bundle.hpp"

namespace extcalc {

std::vector<std::string> bundle_var_names(const BundleSpec& spec) {
    std::vector<std::string> names = base_var_names(spec.n);
    names.reserve(spec.total_dim());
    for (int P = 0; P < spec.slots(); ++P) {
        const Valence v = spec.types[static_cast<std::size_t>(P)];
        Tensor<double> probe(spec.n, v);
        for (std::size_t c = 0; c < probe.size(); ++c) {
            const std::vector<int> multi = probe.unflatten(c);
            std::string name = "T" + std::to_string(P + 1) + "_{";
            for (int m = 0; m < v.r; ++m) name += std::to_string(multi[static_cast<std::size_t>(m)] + 1);
            name += ";";
            for (int m = 0; m < v.s; ++m)
                name += std::to_string(multi[static_cast<std::size_t>(v.r + m)] + 1);
            name += "}";
            names.push_back(std::move(name));
        }
    }
    return names;
}

}  // namespace extcalc
