#pragma once

#include <cstdint>
#include <vector>

#include "rqgmm/matrix.hpp"

namespace rqgmm {

// Two-level hierarchical synthetic embeddings:
//   x_i = coarse_center[a_i] + fine_offset[b_i] + noise_i
// with a_i, b_i uniform labels. Noise is zero-mean Gaussian with per-dimension
// standard deviation noise_sigma * m(b_i, j); the multipliers m are 1 unless
// `heteroscedastic`, in which case each fine cluster draws its own
// per-dimension multipliers log-uniformly from [1/4, 1] (a 4x spread).
struct SynthSpec {
    std::size_t n = 5000;
    std::size_t d = 16;
    std::size_t coarse_k = 8;
    std::size_t fine_k = 8;
    double coarse_scale = 4.0;
    double fine_scale = 1.0;
    double noise_sigma = 0.25;
    bool heteroscedastic = true;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthData {
    EmbeddingMatrix x;
    std::vector<int> coarse_labels;
    std::vector<int> fine_labels;
    Matrix coarse_centers;  // coarse_k x d
    Matrix fine_offsets;    // fine_k x d
    Matrix noise_std;       // fine_k x d, per fine cluster and dimension
};

// Deterministic in spec (including seed); bitwise reproducible across runs.
SynthData generate(const SynthSpec& spec);

}  // namespace rqgmm
