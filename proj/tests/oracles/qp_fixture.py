"""Reference projections onto {X >= 0, X 1 <= 1, X' 1 <= 1} from a generic QP solver.

Writes tests/data/projection_qp_oracle.json. Rerun only to regenerate the fixture:
    python3 tests/oracles/qp_fixture.py
"""
import json
import pathlib

import cvxpy as cp
import numpy as np

SEED = 20240611
COUNT = 200


def project(xt):
    K, L = xt.shape
    x = cp.Variable((K, L))
    prob = cp.Problem(
        cp.Minimize(0.5 * cp.sum_squares(x - xt)),
        [x >= 0, cp.sum(x, axis=1) <= 1, cp.sum(x, axis=0) <= 1],
    )
    prob.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-12,
        tol_gap_rel=1e-12,
        tol_feas=1e-12,
        tol_ktratio=1e-10,
        max_iter=500,
    )
    assert prob.status == cp.OPTIMAL, prob.status
    return np.asarray(x.value)


def main():
    rng = np.random.default_rng(SEED)
    cases = []
    for _ in range(COUNT):
        K = int(rng.integers(1, 9))
        L = int(rng.integers(1, 7))
        xt = rng.uniform(-1.0, 2.0, size=(K, L))
        x = project(xt)
        cases.append({"K": K, "L": L, "xt": xt.ravel().tolist(), "x": x.ravel().tolist()})
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "projection_qp_oracle.json"
    out.write_text(json.dumps({"solver": "cvxpy/CLARABEL", "seed": SEED, "cases": cases}, indent=0))
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
