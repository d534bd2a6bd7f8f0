# tests/conftest.py

import os
import sys

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pytest

# --- Make repository root importable (flat module layout) ---
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def iris_like_csv(tmp_path):
    """150 rows, 4 numeric attributes, 3 string classes."""
    gen = np.random.default_rng(7)
    names = ["setosa", "versicolor", "virginica"]
    lines = ["sepal_length,sepal_width,petal_length,petal_width,species"]
    for i in range(150):
        cls = i // 50
        feats = gen.normal(loc=cls + 1.0, scale=0.3, size=4)
        lines.append(",".join(f"{v:.4f}" for v in feats) + f",{names[cls]}")
    path = tmp_path / "iris.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
