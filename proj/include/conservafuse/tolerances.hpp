#pragma once

namespace conservafuse {

// Relative tolerances for symmetry and spectrum checks. Every check scales by
// spectral_scale(M) = max(1, |lambda|_max) so the same settings work for O(1)
// and O(10) covariances alike.
struct Tolerances {
  double symmetry = 1e-9;
  double psd = 1e-9;
};

}  // namespace conservafuse
