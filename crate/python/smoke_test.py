#!/usr/bin/env python3
"""Build the extension module, import it, and exercise every entry point.

Run from anywhere: the script locates the workspace root, builds the
`cyclic-lie-py` cdylib with cargo, and stages it under a temporary
directory so the interpreter can import it as `cyclic_lie_py`.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def build_extension() -> Path:
    subprocess.run(["cargo", "build", "-p", "cyclic-lie-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "debug" / "libcyclic_lie_py.so"
    if not lib.exists():
        lib = ROOT / "target" / "debug" / "libcyclic_lie_py.dylib"
    staging = Path(tempfile.mkdtemp(prefix="cyclic-lie-py."))
    shutil.copy2(lib, staging / "cyclic_lie_py.so")
    return staging


def brackets(dim, entries):
    """n×n×n structure constants from a sparse bracket list.

    `entries` holds `(i, j, {k: coeff})` triples meaning
    `[e_i, e_j] = sum coeff * e_k`; antisymmetry is filled in.
    """
    c = [[[0.0] * dim for _ in range(dim)] for _ in range(dim)]
    for i, j, coeffs in entries:
        for k, v in coeffs.items():
            c[i][j][k] = v
            c[j][i][k] = -v
    return c


def main():
    sys.path.insert(0, str(build_extension()))
    import cyclic_lie_py as m

    # Simple factor: closed values of the (mu, nu) = (2, 1) metric.
    sl2 = m.sl2_report(2.0, 1.0)
    assert abs(sl2["scalar"] + 28.0 / 3.0) < 1e-9
    assert abs(sl2["ricci"][0][0] - 8.0) < 1e-9
    assert abs(sl2["ricci"][1][1] + 8.0) < 1e-9
    assert abs(sl2["ricci"][2][2] + 8.0) < 1e-9

    # The hyperbolic plane as the one-weight solvable model.
    plane = m.gqp_report([[1.0]])
    assert abs(plane["constant_curvature"] + 1.0) < 1e-9
    assert plane["negative_sectional"]
    assert abs(plane["einstein"] + 1.0) < 1e-9
    assert plane["discrepancy_rel_nonzero"] < 1e-10
    assert plane["discrepancy_abs_zero"] < 1e-10

    # su(2) admits no cyclic metric; sl(2,R) with the adapted diagonal
    # gram is cyclic and reproduces the closed scalar curvature.
    su2 = brackets(3, [(0, 1, {2: 1.0}), (1, 2, {0: 1.0}), (2, 0, {1: 1.0})])
    assert not m.analyze(su2)["cyclic"]

    sl2_c = brackets(3, [(0, 1, {2: 2.0}), (1, 2, {0: -2.0}), (2, 0, {1: 2.0})])
    gram = [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]
    report = m.analyze(sl2_c, gram=gram)
    assert report["cyclic"]
    assert report["cyclic_residual"] < 1e-12
    assert not report["solvable"]
    assert abs(report["scalar"] + 28.0 / 3.0) < 1e-9

    # An abelian line times the hyperbolic plane, pulled back apart.
    prod = brackets(3, [(1, 2, {2: 1.0})])
    dec = m.decompose_algebra(prod)
    assert dec["r"] == 1
    assert abs(dec["omega"][0][0] - 1.0) < 1e-9
    assert dec["sl2_factors"] == []
    assert dec["residual"] < 1e-9

    # Reordering weights is an isometry; changing one is not.
    witness = m.is_isometric([[1.0, 2.0]], [[2.0, 1.0]])
    assert witness is not None
    assert witness["permutation"] == [1, 0]
    assert witness["residual"] < 1e-12
    assert m.is_isometric([[1.0, 2.0]], [[1.0, 3.0]]) is None

    # The family list in dimension five.
    assert len(m.catalog(5)) == 7

    # Validation errors surface as ValueError.
    try:
        m.sl2_report(1.0, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("mu <= nu must be rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
