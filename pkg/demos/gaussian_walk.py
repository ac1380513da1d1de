"""Rare exits of a scaled Gaussian random walk.

X = eps * (xi_1 + ... + xi_n), n = floor(1/eps), lands in
A = (-inf, -0.25] U [0.2, inf) with a probability that is known in closed
form, which makes this the calibration problem for the estimator. The script
prints a table of estimates next to the exact values and the normalised
empirical decay rate for each number of temperatures.

    python demos/gaussian_walk.py --trials 100000
"""
import argparse

from infswap import optimal_alpha, rate_bound, run_simulation
from infswap.samplers import GaussianWalk, exact_probability

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=100_000)
parser.add_argument("--seed", type=int, default=42)
args = parser.parse_args()

epsilons = (1e-2, 5e-3, 2e-3, 1e-3)
model = GaussianWalk()

print("exact probabilities")
for eps in epsilons:
    print(f"  eps={eps:<6g} p={exact_probability(eps):.3e}")

# One temperature is plain Monte Carlo. Each extra temperature adds a hotter
# copy whose hits are reweighted back to the base temperature.
print(f"\nestimates with N={args.trials} trials (z = distance to truth in standard errors)")
print("K   eps      estimate     z      D_hat   bound")
for k in range(1, 6):
    sched = optimal_alpha(k)
    for eps in epsilons:
        r = run_simulation(model, sched, eps, args.trials, args.seed).report
        truth = exact_probability(eps)
        z = (r.estimate - truth) / r.std_error if r.std_error else float("nan")
        d = f"{r.norm_decay_rate:.3f}" if r.norm_decay_rate is not None else "  -  "
        print(f"{k}  {eps:<7g} {r.estimate:.3e}  {z:+6.2f}  {d}   {rate_bound(k):.3f}")

# With d coordinates the rate counts all of them while A only looks at the
# first, so the weights are less well aligned with the target set.
r1 = run_simulation(GaussianWalk(1), optimal_alpha(5), 5e-3, args.trials, args.seed).report
r5 = run_simulation(GaussianWalk(5), optimal_alpha(5), 5e-3, args.trials, args.seed).report
print(f"\nd=1: {r1.estimate:.3e}  D_hat={r1.norm_decay_rate:.3f}")
print(f"d=5: {r5.estimate:.3e}  D_hat={r5.norm_decay_rate:.3f}   exact {exact_probability(5e-3):.3e}")
