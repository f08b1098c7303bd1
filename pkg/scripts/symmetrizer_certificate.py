"""Friedrichs feasibility at random states, with the forced-zero cascade at one of them.

    python3 scripts/symmetrizer_certificate.py --states 10 --seed 0
"""
import argparse

import numpy as np

from cattaneo_hyp.spectral import random_states
from cattaneo_hyp.symmetrize import forced_zero_trace, friedrichs_feasibility
from cattaneo_hyp.thermo import ideal_gas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    gas = ideal_gas()
    states = random_states(np.random.default_rng(args.seed), args.states)
    for U in states:
        cert = friedrichs_feasibility(U, gas)
        print(f"rho={U.rho:.3f} theta={U.theta:.3f} q={np.round(U.q, 3)}  "
              f"{cert.verdict:<12} null dim {cert.null_dim}  forced diag {cert.forced_zero_diagonal}")
    print("\ncascade at the first state:")
    for step in forced_zero_trace(states[0], gas):
        print(f"  {step.description:<58} -> {', '.join(step.forced)}")


if __name__ == "__main__":
    main()
