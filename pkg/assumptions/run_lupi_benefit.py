# assumptions/run_lupi_benefit.py

import os
import sys

# --- Make parent folder importable (so we can import rvfl, data_loader, etc.) ---
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.append(ROOT_DIR)

from checks import lupi_benefit_check


def main():
    res = lupi_benefit_check()

    print("=== RVFL vs RVFL+ on synthetic LUPI data (paired seeds) ===")
    print(f"{'seed':>6} {'RVFL':>8} {'RVFL+':>8}")
    for s, a, b in zip(res["seeds"], res["rvfl_accuracy"], res["rvfl_plus_accuracy"]):
        print(f"{s:>6} {a:>8.2f} {b:>8.2f}")
    print(f"Mean RVFL:  {res['mean_rvfl']:.2f}%")
    print(f"Mean RVFL+: {res['mean_rvfl_plus']:.2f}%")
    print(f"RVFL+ wins: {res['wins']}/{len(res['seeds'])}")
    print(f"Elapsed: {res['elapsed_s']:.2f} s")
    print(f"PASS: {res['passed']}")


if __name__ == "__main__":
    main()
