#pragma once

namespace rqgmm {

// Worker count used by the OpenMP kernels. Results never depend on it: every
// reduction runs in a fixed order (per row, or per component over rows in
// ascending order).
void set_threads(int n);
int threads();

}  // namespace rqgmm
