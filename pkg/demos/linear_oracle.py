"""Uncontrolled Laplacian flow against the matrix exponential of -L_e, and the
RK4 error ratio under step halving.

    python demos/linear_oracle.py
"""
import numpy as np
import scipy.linalg

from edgecons import (ControllerConfig, DynamicsSpec, InitialSpec, IntegratorSpec, NoiseSpec,
                      Scenario, build_edge_algebra, incidence_decomposition, integrate, load_graph)
from edgecons.scenario import bundled_path

g = load_graph(bundled_path("strong_6agent.graph"))
flow = scipy.linalg.expm(-build_edge_algebra(incidence_decomposition(g)).L_e)


def error(dt):
    sc = Scenario(g, ControllerConfig(mode="off"), DynamicsSpec("zero", 3), NoiseSpec(0.0, 0),
                  IntegratorSpec(dt, 1.0), InitialSpec(seed=1))
    res = integrate(sc)
    return np.abs(res.edge_states[-1] - flow @ res.edge_states[0]).max()


print(f"default step 0.001: max edge error at t = 1 is {error(0.001):.3e}")
prev = None
for dt in (0.2, 0.1, 0.05, 0.025, 0.0125):
    e = error(dt)
    # fourth-order convergence shows up as ratios near 16
    ratio = f"  ratio {prev / e:5.1f}" if prev is not None else ""
    print(f"dt {dt:<7g} max edge error {e:.3e}{ratio}")
    prev = e
