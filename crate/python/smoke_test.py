"""Smoke test for the pyqkdc extension module.

Build and install first:

    maturin build --release -m crates/qkdc-py/Cargo.toml -o dist
    pip install dist/pyqkdc-*.whl
    python python/smoke_test.py
"""

import json
import math
import sys

import numpy as np
from scipy.stats import norm

import pyqkdc


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def check_dephasing():
    gamma, n, eps = 0.1, 1000, 0.05
    r = pyqkdc.dephasing_boundary(gamma, n, eps)
    first, second, third = r.terms
    v = gamma * (1 - gamma) * math.log2((1 - gamma) / gamma) ** 2
    close(first, 1 - h2(gamma), 1e-12)
    close(second, math.sqrt(v / n) * norm.ppf(eps), 1e-9)
    close(third, math.log2(n) / (2 * n), 1e-12)
    assert r.kind == "exact" and r.family == "dephasing"
    again = pyqkdc.BoundReport.from_json(r.to_json())
    assert again.value_bits == r.value_bits


def check_erasure_and_eb():
    r = pyqkdc.erasure_boundary(0.5, 10_000, 0.05)
    close(r.value_bits, 0.5 + math.sqrt(0.25 / 10_000) * norm.ppf(0.05), 5 / 10_000)
    close(pyqkdc.eb_bound(10, 0.5), 0.1, 1e-15)
    assert pyqkdc.c_eps(0.5) == math.log2(54)


def check_divergences():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    rows = rho.tolist()
    close(pyqkdc.hypothesis_test_divergence(rows, rows, 0.25), -math.log2(0.75), 1e-10)
    close(pyqkdc.rel_entropy(rows, rows), 0.0, 1e-10)

    p, q = [0.8, 0.2], [0.4, 0.6]
    d = sum(a * math.log2(a / b) for a, b in zip(p, q))
    close(pyqkdc.rel_entropy(np.diag(p).tolist(), np.diag(q).tolist()), d, 1e-12)
    close(pyqkdc.hypothesis_test_divergence_iid(p, q, 0.25, 1), pyqkdc.hypothesis_test_divergence(np.diag(p).tolist(), np.diag(q).tolist(), 0.25), 1e-10)


def check_gaussian():
    r = pyqkdc.gaussian_bound("pure-loss", 100, 0.1, eta=0.5)
    close(r.value_bits, 1 + pyqkdc.c_eps(0.1) / 100, 1e-14)
    eta, nb = 0.6, 0.5
    expected = -math.log2((1 - eta) * eta**nb) - ((nb + 1) * math.log2(nb + 1) - nb * math.log2(nb))
    close(pyqkdc.gaussian_asymptotic("thermal", eta=eta, nb=nb), expected, 1e-12)
    d, _ = pyqkdc.gaussian_divergences("thermal", 1e6, eta=eta, nb=nb)
    close(d, expected, 1e-4 * expected)
    try:
        pyqkdc.gaussian_bound("thermal", 10, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("missing eta accepted")


def check_meta_converse_and_cli():
    channel = json.dumps({"kind": "measure-prepare", "states": [[[1, 0], [0, 0]], [[0.6, 0], [0.8, 0]]]})
    for eps in (0.1, 0.5, 0.9):
        close(pyqkdc.meta_converse(channel, eps).value_bits, -math.log2(1 - eps), 1e-10)
    code, out, _ = pyqkdc.run_cli(["bound", "eb", "--n", "10", "--eps", "0.5"])
    assert code == 0 and json.loads(out)["value_bits"] == 0.1
    code, _, err = pyqkdc.run_cli(["bound", "eb", "--bogus"])
    assert code == 2 and err


def main():
    checks = [check_dephasing, check_erasure_and_eb, check_divergences, check_gaussian, check_meta_converse_and_cli]
    failed = 0
    for check in checks:
        try:
            check()
            print(f"ok   {check.__name__}")
        except Exception as exc:  # report every failure, then exit non-zero
            failed += 1
            print(f"FAIL {check.__name__}: {exc!r}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
