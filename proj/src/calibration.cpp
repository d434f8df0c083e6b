#include "gkdv/lab.hpp"

namespace gkdv {

// Fixed once, at twice the minimal constant each reference run reported,
// rounded up to two digits.
// Monotone and virial constants: p = 4, c = (1, 0.05), X0 = T_c, L = 2048,
// n = 32768, dt = 0.005, T = 300, Gaussian perturbation alpha = 2e-2 of
// width 2 on the slow soliton. Minimal: I 44.0, C1 1.44, C2 0.0134,
// C3 3.00, C4 0.0120, K1 24.4, K2 0.
// J constant: p = 2, c = 1, L = 400, n = 2048, sponge width 80, T = 200,
// bump perturbation alpha = 5e-2 of width 2 at offset 2. Minimal 20.9.
SlackConstants calibrated_constants() {
  SlackConstants k;
  k.I = 89.0;
  k.M1 = 2.9;
  k.E1 = 0.027;
  k.M2 = 6.0;
  k.E2 = 0.025;
  k.virial = 49.0;
  k.J = 42.0;
  return k;
}

}  // namespace gkdv
