#include "rqgmm/synth.hpp"

#include <cmath>

#include "rqgmm/error.hpp"
#include "rqgmm/rng.hpp"

namespace rqgmm {

void SynthSpec::validate() const {
    if (n < 1 || d < 1 || coarse_k < 1 || fine_k < 1) {
        throw InputError("synth spec: n, d, coarse_k and fine_k must all be >= 1");
    }
    if (!(coarse_scale > 0.0) || !std::isfinite(coarse_scale)) {
        throw InputError("synth spec: coarse_scale must be > 0");
    }
    // Zero fine spread or zero noise is allowed (exact point masses).
    if (!(fine_scale >= 0.0) || !(noise_sigma >= 0.0) || !std::isfinite(fine_scale) ||
        !std::isfinite(noise_sigma)) {
        throw InputError("synth spec: fine_scale and noise_sigma must be >= 0");
    }
}

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SynthData out;
    out.coarse_centers = Matrix(spec.coarse_k, spec.d);
    out.fine_offsets = Matrix(spec.fine_k, spec.d);
    out.noise_std = Matrix(spec.fine_k, spec.d, spec.noise_sigma);

    for (double& v : out.coarse_centers.values()) v = spec.coarse_scale * rng.normal();
    for (double& v : out.fine_offsets.values()) v = spec.fine_scale * rng.normal();
    if (spec.heteroscedastic) {
        const double log_spread = std::log(4.0);
        for (double& v : out.noise_std.values()) {
            v = spec.noise_sigma * std::exp(-log_spread * rng.uniform());
        }
    }

    Matrix x(spec.n, spec.d);
    out.coarse_labels.resize(spec.n);
    out.fine_labels.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto a = static_cast<std::size_t>(rng.below(spec.coarse_k));
        const auto b = static_cast<std::size_t>(rng.below(spec.fine_k));
        out.coarse_labels[i] = static_cast<int>(a);
        out.fine_labels[i] = static_cast<int>(b);
        auto row = x.row(i);
        for (std::size_t j = 0; j < spec.d; ++j) {
            row[j] = out.coarse_centers(a, j) + out.fine_offsets(b, j) +
                     out.noise_std(b, j) * rng.normal();
        }
    }
    out.x = EmbeddingMatrix(std::move(x));
    return out;
}

}  // namespace rqgmm
