# assumptions/run_oracle_check.py

import os
import sys

# --- Make parent folder importable (so we can import rvfl, qp_oracle, etc.) ---
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.append(ROOT_DIR)

from checks import oracle_equivalence_check, kernel_feature_check, reduction_limits_check


def main():
    # 1. Closed form vs KKT oracle, correct and flipped right-hand side
    res = oracle_equivalence_check(n_instances=100, seed=0)
    flipped = oracle_equivalence_check(n_instances=100, seed=0, flip_sign=True)

    print("=== RVFL+ closed form vs KKT oracle ===")
    print(f"Instances: {res['n_instances']}")
    print(f"Max relative error: {res['max_rel_error']:.3e}")
    print(f"Max KKT residual:   {res['max_kkt_residual']:.3e}")
    print(f"Elapsed: {res['elapsed_s']:.2f} s")
    print(f"PASS: {res['passed']}")
    print(f"Flipped sign max relative error: {flipped['max_rel_error']:.3e} "
          f"(PASS: {flipped['passed']})")

    # 2. Explicit-feature kernel
    k = kernel_feature_check(n_instances=20, seed=0)
    print("\n=== KRVFL+ with explicit features vs RVFL+ ===")
    print(f"Max relative prediction error: {k['max_rel_error']:.3e}")
    print(f"PASS: {k['passed']}")

    # 3. Reduction limits
    r = reduction_limits_check(seed=0)
    print("\n=== Reduction limits ===")
    print(f"Zero privileged features vs dual ridge: {r['zero_privileged_error']:.3e}")
    print(f"gamma = 1e12 vs zero privileged:       {r['large_gamma_error']:.3e}")
    print(f"C = 1e12 ridge vs pseudo-inverse:      {r['large_C_error']:.3e}")
    print(f"PASS: {r['passed']}")
    print("\nInterpretation:")
    print("  - The flipped right-hand side should FAIL: only Y + (C/gamma) Ht Ht^T 1 satisfies the KKT conditions.")


if __name__ == "__main__":
    main()
