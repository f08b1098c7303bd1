"""Compare the largest growth rate of the 3D and the reduced 1D linearized systems.

    python3 scripts/dissipativity_contrast.py --csv-dir out/
"""
import argparse
from pathlib import Path

from cattaneo_hyp.coupling import dissipativity_sweep, linearize, reduce_1d, write_sweep_csv
from cattaneo_hyp.symbol import EquilibriumState
from cattaneo_hyp.thermo import ideal_gas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv-dir", default=None)
    args = ap.parse_args()

    gas = ideal_gas()
    V_e = EquilibriumState(1.0, [1.0, 0.0, 0.0], 1.0)
    for name, sys in (("3d", linearize(V_e, gas)), ("1d", reduce_1d(V_e, gas))):
        sweep = dissipativity_sweep(sys)
        print(f"{name}: {len(sweep.xis):5d} frequencies, max Re lambda = {sweep.max_real:+.3e} "
              f"at xi={sweep.argmax_xi}, strictly dissipative: {sweep.strictly_dissipative}")
        if args.csv_dir:
            Path(args.csv_dir).mkdir(parents=True, exist_ok=True)
            write_sweep_csv(sweep, Path(args.csv_dir) / f"dissipativity_{name}.csv")


if __name__ == "__main__":
    main()
