# Zero-energy scattering off a square barrier has the closed form
# a = R - tanh(kappa R) / kappa with kappa = sqrt(A / 2).  This script
# sweeps the barrier height toward the hard-core limit, checks the exact
# dilation identity behind the dilute scaling, and prints the pieces of
# the softened-potential kit.

import math

import numpy as np

from dilutefermi.scattering import (
    dyson_parts,
    hardcore,
    hardcore_limit,
    scaled_identity_check,
    scattering_energy,
    square_barrier,
    zero_energy_solve,
)

# --- barrier sweep toward the hard core ---------------------------------
print("unit barrier, amplitude sweep (exact: 1 - tanh(sqrt(A/2)) / sqrt(A/2))")
for A, a in hardcore_limit(square_barrier(1.0), [2.0, 20.0, 200.0, 2000.0, 1e6]):
    kappa = math.sqrt(A / 2.0)
    exact = 1.0 - math.tanh(kappa) / kappa
    print(f"  A={A:>9.0f}  a={a:.9f}  exact={exact:.9f}")
print("  hard core of radius 1:", zero_energy_solve(hardcore(1.0)).a)

# --- the length is also a variational energy ----------------------------
sol = zero_energy_solve(square_barrier(2.0))
print("\nvariational identity: energy / 4 pi =",
      f"{scattering_energy(sol) / (4 * math.pi):.9f} vs a = {sol.a:.9f}")

# --- dilation identity of the dilute scaling -----------------------------
# Scaling the interaction as N^(2 beta) w(N^beta .) divides the length by
# exactly N^beta; both sides here come from independent outward solves.
print("\ndilation identity")
for N in (100, 10000):
    for beta in (0.35, 0.45):
        rep = scaled_identity_check(square_barrier(2.0), N, beta)
        print(f"  N={N:>6} beta={beta:.2f}  lhs={rep.lhs:.10e}  "
              f"rhs={rep.rhs:.10e}  rel={rep.rel_err:.1e}")

# --- softened-potential kit ----------------------------------------------
p_F = 3.0
kit = dyson_parts(0.0, 1.0, 1.0 / (2.0 * p_F), p_F)
print("\nsoftened-potential kit at s = 1/(2 p_F)")
print(f"  bump normalization check: {kit.U_integral_check:.12f}")
p = np.linspace(1e-6, 8 * p_F, 10**4)
print(f"  min of Gamma - (1 - s^2 p_F^2) chi^2 over 1e4 momenta: "
      f"{kit.high_frequency_margin(p).min():.6f}  (must be >= 0)")
