"""Simulate both bundled scenarios for a few seeds and summarise the outcome.

    python demos/consensus_runs.py [t_final]

Each run writes nothing; use ``edgecons run`` for CSV or JSON output.
"""
import sys

from edgecons import integrate, load_scenario, scale_noise, with_overrides
from edgecons.results import summary

t_final = float(sys.argv[1]) if len(sys.argv) > 1 else 20.0
for name in ("strong_6agent", "quasi_6agent"):
    base = load_scenario(name)
    print(f"{name} (t_final {t_final:g} s)")
    for seed in range(3):
        sc = with_overrides(base, seed=seed, t_final=t_final)
        full, half = summary(integrate(sc)), summary(integrate(scale_noise(sc, 0.5)))
        print(f"  seed {seed}: disparity {full['initial_disparity']:.2f} -> "
              f"{full['steady_state_disparity']:.2e}, steady-state edge norm "
              f"{full['steady_state_edge_norm']:.2e} (half noise {half['steady_state_edge_norm']:.2e}), "
              f"below 0.1 from t = {full['convergence_time']}")
