"""How average inference accuracy responds to AP densification.

Walks the AP/device density ratio over two decades and prints the
closed-form average MSE next to a Monte Carlo estimate, plus the
asymptotic floor that no amount of densification can beat.

Run:  python3 demos/accuracy_vs_density.py
"""

import math
from dataclasses import replace

from edgeprovision import (
    AirInterface,
    DeploymentConfig,
    InferenceWorkload,
    Scenario,
    SimConfig,
    asymptotic_mse,
    average_mse,
    run_trials,
)

base = Scenario(
    deployment=DeploymentConfig(lambda_ap=1.0, lambda_dev=1.0),
    workload=InferenceWorkload(
        payload_bits=1.0e6,
        delay_budget=0.06,
        compute_delay=0.01,
        mse_cloud=1.0,
        mse_edge=1.5,
    ),
    air=AirInterface(bandwidth=1.6e8),
)

floor = asymptotic_mse(base.workload, base.air)
print(f"min spectral efficiency demand: {base.inference_rate:g} bit/s/Hz")
print(f"asymptotic MSE floor (infinite densification): {floor:.4f}")
print()
print(f"{'ratio':>8}  {'avg MSE (model)':>16}  {'avg MSE (sim)':>14}")

for ratio in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
    s = replace(base, deployment=DeploymentConfig(ratio, 1.0))
    # window sized to ~150 expected APs so boundary effects stay small
    radius = math.sqrt(150.0 / ratio) / 2.0
    sim = run_trials(SimConfig(scenario=s, window_radius=radius, trials=1000))
    print(f"{ratio:8.2f}  {average_mse(s):16.4f}  {sim.mse_estimate:14.4f}")

print()
print("densification buys accuracy quickly at first, then saturates toward the floor")
