"""Acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL summary; the lines are printed at the
end of a pytest run (see conftest.py) and when this file is run as a script.
Expected integers come from the momentum-space oracles in oracles.py.
"""

import time

import numpy as np
import pytest

from helpers import algebra_identity_errors, fiber_trace_violations, random_triple_setup
from oracles import fhs_chern, kernel_count_isometry, landau_bloch, ssh_symbol, winding_number
from nctopo.clifford import build_gammas
from nctopo.invariants import (
    CONSTANTS,
    fedosov_trace_index,
    index_invariant_even,
    index_invariant_odd,
    local_invariant_even,
    local_invariant_odd,
)
from nctopo.lattice_rep import (
    DisorderSample,
    Lattice,
    commutator_decay,
    dirac_phase,
    fit_power_law,
    magnetic_translation,
    represent,
)
from nctopo.nc_algebra import TwistMatrix, adjoint, multiply
from nctopo.runner import run
from nctopo.spectral import build_hamiltonian, fermi_projection, fermi_unitary, hofstadter2d, ssh1d, stacked_chern3d

RESULTS = {}


def record(number, name, passed, detail):
    RESULTS[number] = (name, bool(passed), detail)
    assert passed, f"criterion {number} ({name}) failed: {detail}"


def summary_lines():
    return [f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2} {name}: {detail}"
            for n, (name, ok, detail) in sorted(RESULTS.items())]


def tknn_integer():
    return int(round(fhs_chern(landau_bloch(1, 3), 1, 24, 24, 2 * np.pi / 3, 2 * np.pi)))


def test_criterion_01_clifford():
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(1, 7):
        cr = build_gammas(k)
        # includes the odd parity residual |g_1...g_k - parity_sign|
        worst = max(worst, max(cr.residuals().values()))
    dt = time.perf_counter() - t0
    record(1, "clifford residuals", worst <= 1e-12 and dt < 1.0, f"max residual {worst:.1e}, {dt:.2f} s")


def test_criterion_02_algebra_suite():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst: dict = {}
    for _ in range(200):
        system, _, (a, b, c) = random_triple_setup(rng)
        errs = algebra_identity_errors(a, b, c)
        shift = tuple(rng.integers(-2, 3, size=system.d))
        errs.update(fiber_trace_violations(system, a.coeffs[0], b.coeffs[0], shift))
        for key, v in errs.items():
            worst[key] = max(worst.get(key, -np.inf), float(v))
    dt = time.perf_counter() - t0
    bad = max(worst.values())
    record(2, "algebra identities", bad <= 1e-10 and dt < 30.0,
           f"worst violation {bad:.1e} over {len(worst)} identities, {dt:.1f} s")


def test_criterion_03_representation():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst_prod = worst_adj = 0.0
    for _ in range(200):
        system, twist, (a, b, _) = random_triple_setup(rng, L=7)
        lat = Lattice(system.d, 7)
        for w in range(system.n_points):
            A = represent(a, w, lat).dense()
            B = represent(b, w, lat).dense()
            AB = represent(multiply(a, b), w, lat, allow_aliasing=True).dense()
            # Frobenius norm bounds the operator norm from above
            worst_prod = max(worst_prod, np.linalg.norm(AB - A @ B))
            worst_adj = max(worst_adj, np.abs(represent(adjoint(a), w, lat).dense() - A.conj().T).max())
    dt = time.perf_counter() - t0
    record(3, "representation faithfulness", worst_prod <= 1e-10 and worst_adj <= 1e-10 and dt < 30.0,
           f"product {worst_prod:.1e}, adjoint {worst_adj:.1e}, {dt:.1f} s")


def test_criterion_04_fedosov():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        m, n = (int(v) for v in rng.integers(1, 41, size=2))
        T, expected = kernel_count_isometry(rng, m, n, int(rng.integers(0, min(m, n) + 1)))
        for p in (1, 2, 3):
            worst = max(worst, abs(fedosov_trace_index(T, p) - expected))
    dt = time.perf_counter() - t0
    record(4, "Fedosov kernel counts", worst <= 1e-8 and dt < 10.0, f"max error {worst:.1e}, {dt:.2f} s")


@pytest.fixture(scope="module")
def clean_hofstadter():
    lat = Lattice(2, 24)
    return fermi_projection(build_hamiltonian(hofstadter2d(1 / 3), None, lat), bands=1, n_bands=3)


def test_criterion_05_strong_even(clean_hofstadter):
    t0 = time.perf_counter()
    target = tknn_integer()
    loc = local_invariant_even(clean_hofstadter, [1, 2]).value
    idx = index_invariant_even(clean_hofstadter, [1, 2]).value
    dt = time.perf_counter() - t0
    ok = abs(loc - target) <= 0.02 and abs(idx - target) <= 0.1 and abs(loc - idx) <= 0.1 and dt < 300
    record(5, "strong even invariant L=24", ok, f"oracle {target}, local {loc:.4f}, index {idx:.4f}, {dt:.1f} s")


def test_criterion_06_disorder():
    t0 = time.perf_counter()
    target = tknn_integer()
    lat = Lattice(2, 24)
    model = hofstadter2d(1 / 3, 0.5)
    vals = []
    for seed in range(10):
        sample = DisorderSample.generate(seed, lat.shape, 2)
        fd = fermi_projection(build_hamiltonian(model, sample, lat), bands=1, n_bands=3)
        vals.append(local_invariant_even(fd, [1, 2]).value)
    dt = time.perf_counter() - t0
    mean, worst = float(np.mean(vals)), float(np.max(np.abs(np.array(vals) - target)))
    ok = abs(mean - target) <= 0.1 and worst < 0.2 and dt < 1800
    record(6, "disorder stability", ok, f"mean {mean:.4f}, worst seed deviation {worst:.4f}, {dt:.1f} s")


def test_criterion_07_odd():
    t0 = time.perf_counter()
    lat = Lattice(1, 128)
    details, ok = [], True
    for t1, t2 in [(0.5, 1.0), (1.0, 0.5)]:
        target = round(winding_number(ssh_symbol(t1, t2)))
        model = ssh1d(t1, t2)
        fd = fermi_projection(build_hamiltonian(model, None, lat), 0.0)
        U = fermi_unitary(fd, model.chiral_structure())
        loc = local_invariant_odd(U, [1]).value
        idx = index_invariant_odd(U, [1]).value
        ok &= abs(loc - target) <= 0.05 and abs(idx - target) <= 0.05 and abs(loc - idx) <= 0.1
        details.append(f"t1={t1},t2={t2}: oracle {target}, local {loc:.4f}, index {idx:.4f}")
    dt = time.perf_counter() - t0
    record(7, "odd invariant L=128", ok and dt < 60, "; ".join(details) + f", {dt:.1f} s")


def test_criterion_08_weak():
    t0 = time.perf_counter()
    layer = fermi_projection(build_hamiltonian(hofstadter2d(1 / 3), None, Lattice(2, 12)), bands=1, n_bands=3)
    layer_value = local_invariant_even(layer, [1, 2]).value
    lat = Lattice(3, 12)
    vals = {}
    for t3 in (0.0, 0.1):
        fd = fermi_projection(build_hamiltonian(stacked_chern3d(1 / 3, t3), None, lat), bands=1, n_bands=3)
        vals[t3] = local_invariant_even(fd, [1, 2]).value
    dt = time.perf_counter() - t0
    ok = abs(vals[0.0] - layer_value) <= 0.05 and abs(vals[0.1] - vals[0.0]) < 0.1 and dt < 600
    record(8, "weak invariant d=3", ok,
           f"layer {layer_value:.4f}, stack {vals[0.0]:.4f}, t3=0.1 {vals[0.1]:.4f}, {dt:.1f} s")


def test_criterion_09_decay():
    t0 = time.perf_counter()
    lat = Lattice(2, 41, "open")
    x0 = (0.5, 0.5)
    F = dirac_phase([1, 2], x0, lat, build_gammas(2), dense=False)
    U = magnetic_translation((1, 0), TwistMatrix.zero(2), lat, dense=False).matrix
    slope = fit_power_law(commutator_decay(F, U, lat, x0, [1, 2]), 2, 15)
    dt = time.perf_counter() - t0
    record(9, "commutator decay exponent", -1.3 <= slope <= -0.7 and dt < 60, f"slope {slope:.3f}, {dt:.2f} s")


def test_criterion_10_constants():
    worst = max(CONSTANTS.identity_residual(k) for k in (2, 4, 6))
    record(10, "constant identity", worst <= 1e-12, f"max residual {worst:.1e} for k = 2, 4, 6")


def test_criterion_11_reproducible(tmp_path):
    cfg = {"model": {"preset": "hofstadter2d", "params": {"disorder": 0.5}}, "lattice_sizes": [12],
           "index_sets": [[1, 2]], "seeds": [0, 1, 2], "bands": 1, "x0": 2, "fixed_reduction": True}
    texts = []
    for name, threads in (("a", 1), ("b", 3)):
        _, csv_path = run(cfg, threads=threads).write(tmp_path / name)
        texts.append(csv_path.read_bytes())
    record(11, "byte-identical samples.csv", texts[0] == texts[1], f"{len(texts[0])} bytes per file")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
