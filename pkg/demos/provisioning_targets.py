"""Provisioning answers to two deployment questions.

1. How many APs per device do I need to hit a target average MSE?
2. How inaccurate may the on-device (edge) model be before a target
   average MSE becomes unreachable at a fixed deployment?

Run:  python3 demos/provisioning_targets.py
"""

from edgeprovision import (
    AirInterface,
    DeploymentConfig,
    InferenceWorkload,
    Scenario,
    InfeasibleTargetError,
    asymptotic_mse,
    critical_ap_density,
    critical_edge_mse,
)

workload = InferenceWorkload(
    payload_bits=1.0,
    delay_budget=2.0,
    compute_delay=1.0,
    mse_cloud=1.0,
    mse_edge=1.5,
)
air = AirInterface(bandwidth=1.0)

floor = asymptotic_mse(workload, air)
print(f"asymptotic MSE floor: {floor:.6f} (targets at or below it are infeasible)")
print()
print(f"{'target MSE':>10}  {'critical AP density':>20}")
for target in (1.25, 1.28, 1.3, 1.35, 1.4, 1.45, 1.5):
    try:
        lc = critical_ap_density(workload, air, lambda_dev=1.0, mse_target=target)
        note = f"{lc:20.4f}" if lc > 0 else f"{'0 (any density works)':>20}"
    except InfeasibleTargetError:
        note = f"{'infeasible':>20}"
    print(f"{target:10.2f}  {note}")

print()
print("edge-model quality budget at a fixed deployment (density ratio 1):")
print(f"{'target MSE':>10}  {'worst tolerable edge MSE':>25}")
scenario = Scenario(DeploymentConfig(1.0, 1.0), workload, air)
for target in (1.05, 1.1, 1.2, 1.3, 1.4):
    md_max = critical_edge_mse(scenario, target)
    print(f"{target:10.2f}  {md_max:25.4f}")
