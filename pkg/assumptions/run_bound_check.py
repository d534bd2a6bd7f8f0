# assumptions/run_bound_check.py

import os
import sys

# --- Make parent folder importable (so we can import bound, rvfl, etc.) ---
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.append(ROOT_DIR)

from checks import bound_coverage_check


def main():
    res = bound_coverage_check()

    print("=== Generalization bound coverage (absolute loss, K = 1) ===")
    print(f"Runs: {res['n_runs']}")
    print(f"Covered (held-out loss <= bound): {res['covered']}")
    print(f"Smallest bound - held-out gap: {res['min_gap']:.4f}")
    print("Bound for M = 100, 1000, 10000 (K = Z = B = 1): "
          + ", ".join(f"{b:.4f}" for b in res["bound_by_M"]))
    print(f"Elapsed: {res['elapsed_s']:.2f} s")
    print(f"PASS: {res['passed']}")
    print("\nInterpretation:")
    print("  - The bound assumes a bounded loss; the absolute loss of an RVFL output is bounded only through Z and B.")


if __name__ == "__main__":
    main()
