"""How the temperature schedule controls the asymptotic decay rate.

V(alpha) is the exponential decay rate of the second moment, measured in
units of I(A): plain Monte Carlo has V = 1 and no unbiased estimator can beat
V = 2. The dyadic schedule (1, 1/2, 1/4, ...) is optimal for each K.
"""
import numpy as np

from infswap.theory import (
    alpha_sweep,
    optimal_alpha,
    random_schedule,
    rate_bound,
    v_probability,
    v_probability_grid_oracle,
    v_risk,
)

print("K   V(alpha*)   2 - 2^(1-K)")
for k in range(1, 9):
    print(f"{k}   {v_probability(optimal_alpha(k)).value:.6f}    {rate_bound(k):.6f}")

# Two temperatures (1, a): the rate is the smaller of 1 + a and 2 - a.
a = np.linspace(0, 1, 11)
print("\nK=2 sweep")
for ai, v in zip(a, alpha_sweep(a)):
    print(f"  a={ai:.1f}  V={v:.2f}  " + "#" * int(40 * (v - 1)))

# The closed form against a brute-force grid search over rate vectors.
rng = np.random.default_rng(0)
print("\nrandom schedules: closed form vs grid")
for _ in range(5):
    s = random_schedule(rng, 3)
    print(f"  {np.round(s.alphas, 3)}  {v_probability(s).value:.4f}  {v_probability_grid_oracle(s):.4f}")

# A risk functional: candidate points (I, F). The cheapest way to make the
# functional large decides the rate.
print("\nrisk-sensitive rate, alpha=(1, 1/2), candidates (1, 0) and (0.2, 0.5):",
      v_risk((1.0, 0.5), [(1.0, 0.0), (0.2, 0.5)]).value)
