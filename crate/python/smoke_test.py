"""Smoke test for the stein_decomp_py extension module.

Build the module first:

    cargo build -p stein-decomp-py --release --features extension-module
    cp target/release/libstein_decomp_py.so python/stein_decomp_py.so

then run `python3 python/smoke_test.py` from the repository root.
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import stein_decomp_py as sd


def approx(a, b, tol=1e-9):
    assert abs(a - b) < tol, f"{a} != {b} (tol {tol})"


def main():
    # C4 model oracle values
    model = sd.ColoringModel(4, 2, [0.5, 0.5])
    approx(model.mean_vector()[0], 1.0)
    cov = model.covariance()
    approx(cov[0][0], 1.25)
    approx(cov[0][1], -0.75)
    exact_mean, exact_cov = model.exact_moments()
    approx(exact_cov[0][0], cov[0][0], 1e-10)

    n1, n2, n3, beta = model.structure_params()
    assert (n1, n2, n3) == (3, 4, 4), (n1, n2, n3)
    approx(beta, 4.0)
    approx(model.xi_envelope(), 4.0)

    # sampling is deterministic in the seed
    rows_a = model.sample_standardized(500, 9)
    rows_b = model.sample_standardized(500, 9)
    assert rows_a == rows_b
    assert len(rows_a) == 500 and len(rows_a[0]) == 2

    # bound functionals
    approx(sd.theorem1_functional(1, 1, 1, 1, 1, 1.0, 1.0), 2.0)
    L, b = sd.proposition1_bound(100, 2, 2, [0.5, 0.5], 1.0)
    approx(L, 2.0 * math.sqrt(2.0))
    approx(b, 21.5269482304950923, 1e-10)

    # exact binomial(4, 1/2) Kolmogorov oracle
    pts = [k - 2.0 for k in range(5)]
    wts = [1 / 16, 4 / 16, 6 / 16, 4 / 16, 1 / 16]
    approx(sd.kolmogorov_1d(pts, wts), 0.1875, 1e-12)

    # distance estimate on a big standardized sample stays near 0
    big = sd.ColoringModel(64, 2, [0.5, 0.5])
    est, ci, lower, _ = sd.estimate_dc(big.sample_standardized(20000, 3), 2, 1)
    assert est < 0.1, est
    assert lower <= est

    # Stein residuals certify the solver
    assert abs(sd.stein_residual_halfline(0.0, 0.5, 0.3)) < 1e-3
    assert abs(sd.stein_residual_ball(1.0, 0.5, [0.4, 0.1])) < 1e-3

    # Hermite inequality, equality case k=2 d=1
    lhs, rhs, se, ok = sd.lemma5_check([1.0], 2, 1, 200000, 42)
    assert ok
    approx(rhs, 2.0)
    assert abs(lhs - rhs) < 5 * se

    # psi profile knots
    approx(sd.psi(-1.0), 1.0)
    approx(sd.psi(0.5), 0.5)
    approx(sd.psi(2.0), 0.0)

    print("smoke test passed")


if __name__ == "__main__":
    main()
