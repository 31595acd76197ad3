"""Gain conversion, the cotree gain bound and the synthesised edge laws.

    python demos/controller_design.py
"""
import math
from dataclasses import replace

from edgecons import ConfigError, load_scenario, prepare, quasi_gain_bound, rho_from_gain

print("rho for gain 0.9487:", round(rho_from_gain(0.9487), 4))
print("rho for gain 0.175: ", round(rho_from_gain(0.175), 4))
print("cotree gain bound for lambda_bar_1 = 1, N = 6:", quasi_gain_bound(1.0, 6))

for name in ("strong_6agent", "quasi_6agent"):
    loop = prepare(load_scenario(name))
    law = loop.synthesis.law
    print(f"\n{name}: eta = {law.eta}, xi = {law.xi:.4f} (= 0.25 sqrt 3 = {0.25 * math.sqrt(3):.4f})")
    for k, c in zip(law.edges, law.coefficients):
        print(f"  e{k}: |x| coefficient eta + {c:.4f}")

sc = load_scenario("quasi_6agent")
try:
    prepare(replace(sc, controller=replace(sc.controller, cotree_gain=0.25)))
except ConfigError as exc:
    print("\ncotree gain 0.25 rejected:", exc)
