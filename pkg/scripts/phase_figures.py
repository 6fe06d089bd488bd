"""Phase portraits of the closed-form dimension formulas.

For each requested rank profile (k_min, k_max, d) this writes the phase
table and figure over the admissible exponent range and prints where
the regularity transition sits together with the corollary flags at a
few sample exponents.

Usage:
    python3 scripts/phase_figures.py
    python3 scripts/phase_figures.py --out-dir figures --families 1,3,4 2,2,3
"""

import argparse
import os

import numpy as np

import kleindim.cli as cli
import kleindim.predict as predict

DEFAULT_FAMILIES = ["1,1,2", "1,2,2", "1,3,4", "3,5,6"]


def parse_family(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected k_min,k_max,d; got {text!r}")
    return tuple(int(p) for p in parts)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures", help="directory for csv/svg output")
    ap.add_argument(
        "--families", nargs="+", type=parse_family,
        default=[parse_family(f) for f in DEFAULT_FAMILIES],
        help="rank profiles as k_min,k_max,d triples",
    )
    ap.add_argument("--grid", type=int, default=200, help="number of exponent samples")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for k_min, k_max, d in args.families:
        out = os.path.join(args.out_dir, f"phase_k{k_min}_{k_max}_d{d}.csv")
        code = cli.main([
            "plot", "--phase", str(k_min), str(k_max), str(d),
            "--out", out,
            "--scales", f"{k_max / 2 + 1e-6}:{d}:{args.grid}",
        ])
        if code != 0:
            raise SystemExit(code)

        mid = (k_min + k_max) / 2.0
        print(f"\nk_min={k_min} k_max={k_max} d={d}: "
              f"regularity transition at delta={mid:g}")
        lo = k_max / 2.0
        for frac in (0.25, 0.5, 0.75, 1.0):
            delta = lo + (d - lo) * frac
            profile = predict.GroupProfile(delta=delta, k_min=k_min, k_max=k_max, d=d)
            r = predict.predict_dims(profile)
            flags = ", ".join(sorted(predict.classify_corollaries(profile))) or "-"
            print(f"  delta={delta:6.3f}: "
                  f"L={r.dim_L:.3f} H={r.dim_H:.3f} A={r.dim_A:.3f} "
                  f"reg=[{r.lower_reg:.3f},{r.upper_reg:.3f}]  {flags}")


if __name__ == "__main__":
    main()
