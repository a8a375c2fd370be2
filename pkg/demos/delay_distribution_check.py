"""Spot-check the closed-form cloud-delay law against the simulator.

Runs the canonical validation scenario, prints the empirical vs model
CDF at a few delay points, and the windowed Kolmogorov-Smirnov distance
used by the acceptance suite.

Run:  python3 demos/delay_distribution_check.py
"""

import math

from edgeprovision import (
    SimConfig,
    canonical_validation_scenario,
    delay_cdf,
    delay_ks_statistic,
    run_trials,
)

scenario = canonical_validation_scenario()
w = scenario.workload
cfg = SimConfig(scenario=scenario, window_radius=math.sqrt(50.0), trials=2000)
summary = run_trials(cfg)

print(f"trials: {cfg.trials}, expected APs in window: {4 * cfg.window_radius**2:.0f}")
print()
print(f"{'delay d':>10}  {'model CDF':>10}  {'empirical':>10}")
for d in (0.015, 0.02, 0.03, 0.06, 0.12, 0.3, 0.6):
    print(
        f"{d:10.3f}  {delay_cdf(scenario, d):10.4f}  "
        f"{summary.delay_samples.evaluate(d):10.4f}"
    )

ks = delay_ks_statistic(
    summary.delay_samples, scenario, w.compute_delay, 10.0 * w.delay_budget
)
print()
print(f"windowed KS distance on ({w.compute_delay}, {10 * w.delay_budget}]: {ks:.4f}")
print("the acceptance gate allows 0.05 at 10^4 trials")
