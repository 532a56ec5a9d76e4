# The headline number: the two-term energy prediction
#     N E_TF + 2 pi a_w N^(4/3 - beta) int rho_TF^2,
# cross-checked at desk scale by the box-decomposition estimator and
# accompanied by the lower-bound error budget, whose total must stay
# small against the correction's order N^(4/3 - beta).

from fractions import Fraction

from dilutefermi.asymptotics import (
    beta_l_window,
    box_estimate,
    error_budget,
    make_context,
    predict_energy,
)
from dilutefermi.potentials import harmonic_trap
from dilutefermi.scattering import square_barrier
from dilutefermi.thomas_fermi import tf_solve

v = harmonic_trap(0.0)
w = square_barrier(2.0)
base = tf_solve(v)

# --- the prediction across N ---------------------------------------------
print("two-term prediction, beta = 0.40, unit square barrier of height 2")
print("      N        main            correction      relative")
for N in (10**4, 10**5, 10**6):
    ctx = make_context(N, 0.40, w)
    p = predict_energy(v, ctx, base)
    print(f"  {N:>7}  {p.main:>14.4f}  {p.correction:>14.4f}  {p.relative_correction:.3e}")

# --- admissible box scales ------------------------------------------------
print("\nbox-scale windows")
for beta in (0.40, Fraction(34, 81), 0.45):
    win = beta_l_window(beta, 10**6)
    print(f"  beta={float(win.beta):.5f}  feasible={win.feasible}  "
          f"lower-bound regime={win.lower_bound_regime}  l={win.chosen_l}")

# --- the box estimator against the continuum -------------------------------
ctx = make_context(10**6, 0.40, w)
l0 = beta_l_window(0.40, 10**6).chosen_l
print("\nbox estimator at N = 10^6, beta = 0.40")
for l in (l0, l0 / 2):
    est = box_estimate(v, ctx, l, base)
    print(f"  l={l:.4f}: cells={est.n_cells}, 2 sum M_i = {est.mass_sum_doubled}, "
          f"ratio to prediction = {est.ratio:.4f}")
    print(f"           Riemann defects: rho^(5/3) {est.rho53_defect:.2e}, "
          f"rho^2 {est.rho2_defect:.2e}")

# --- the error budget -------------------------------------------------------
print("\nerror budget ratio f(N) / N^(4/3 - beta) under the default coupling")
print("      N     beta=0.40   beta=0.45   beta=0.49")
for N in (10**4, 10**6, 10**8):
    row = [error_budget(N, b).ratio for b in (0.40, 0.45, 0.49)]
    print(f"  {N:>7}  " + "  ".join(f"{x:>9.4f}" for x in row))
