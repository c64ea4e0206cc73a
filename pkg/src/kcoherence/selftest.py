"""Randomized property checks behind ``kcoherence selftest``.

Each check returns ``(name, passed, detail)``. Sample counts scale with
``size`` so the same suite serves as a quick smoke test and a full run.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .closed_form import k_support_dual_norm, k_support_norm, robustness_value
from .core import canonicalize, select_branch, tail_sums
from .document import coherence_document, dumps, verify_document
from .entanglement import entanglement_robustness, schmidt_decompose
from .primal import certify, decompose_into_I2


def random_state(rng, n):
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    return x / np.linalg.norm(x)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_sandwich(rng, count):
    worst = {"pairwise": 0.0, "reconstruction": 0.0, "dual_feasibility": 0.0, "norm": 0.0}
    for _ in range(count):
        raw = random_state(rng, int(rng.integers(3, 9)))
        state = canonicalize(raw)
        for k in range(2, state.dim + 1):
            cert = certify(state, k, raise_on_gap=False)
            g = cert.gaps
            worst["pairwise"] = max(worst["pairwise"], g["dual_objective"], g["primal_trace"], g["dual_primal"])
            worst["reconstruction"] = max(worst["reconstruction"], g["reconstruction"])
            worst["dual_feasibility"] = max(worst["dual_feasibility"], g["dual_feasibility"])
            worst["norm"] = max(worst["norm"], abs(k_support_norm(raw, k) ** 2 - cert.value.value - 1))
    ok = (worst["pairwise"] <= 1e-7 and worst["reconstruction"] <= 1e-8
          and worst["dual_feasibility"] <= 1e-8 and worst["norm"] <= 1e-8)
    return "duality sandwich", ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items())


def check_anchors(rng, count):
    worst = 0.0
    for n in range(2, 11):
        u = np.full(n, 1 / np.sqrt(n))
        for k in range(2, n + 1):
            worst = max(worst, abs(robustness_value(canonicalize(u), k).value - (n / k - 1)))
    for _ in range(count):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(2, n + 1))
        x = random_state(rng, n)
        x[rng.permutation(n)[:n - k]] = 0
        x /= np.linalg.norm(x)
        worst = max(worst, robustness_value(canonicalize(x), k).value,
                    robustness_value(canonicalize(random_state(rng, n)), n).value)
    return "anchors", worst <= 1e-12, f"max deviation {worst:.1e}"


def check_branch(rng, count):
    bad = 0
    for _ in range(count):
        state = canonicalize(random_state(rng, int(rng.integers(2, 11))))
        v, s = state.entries, tail_sums(state.entries)
        for k in range(2, state.dim + 1):
            ell = select_branch(state, k).ell
            holds = [c for c in range(2, k + 1) if v[c - 2] >= s[c - 1] / (k - c + 1)]
            bad += ell != (max(holds) if holds else 1)
    return "branch maximality", bad == 0, f"{bad} mismatches"


def check_split(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        off = -rng.exponential(size=(n, n)) * (rng.random((n, n)) < 0.7)
        S = np.triu(off, 1)
        S = S + S.T
        S += np.diag(-S.sum(axis=1) + rng.exponential(size=n) * (rng.random(n) < 0.5))
        dec = decompose_into_I2(S, tolerance=1e-12)
        worst = max(worst, float(np.max(np.abs(dec.reconstruct() - S))))
        for block in dec.pair_parts.values():
            if block[0, 0] < 0 or block[0, 0] * block[1, 1] - block[0, 1] ** 2 < -1e-12:
                worst = np.inf
    return "two-incoherent split", worst <= 1e-12, f"max residual {worst:.1e}"


def check_norms(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(1, n + 1))
        x, y = random_state(rng, n) * rng.exponential(), random_state(rng, n)
        worst = max(worst, abs(np.vdot(x, y)) - k_support_norm(x, k) * k_support_dual_norm(y, k))
        worst = max(worst, abs(k_support_norm(x, 1) - np.abs(x).sum()),
                    abs(k_support_norm(x, n) - np.linalg.norm(x)))
    return "k-support norms", worst <= 1e-10, f"max violation {worst:.1e}"


def check_entanglement(rng, count):
    worst = 0.0
    for _ in range(count):
        m, n = (int(d) for d in rng.integers(2, 5, size=2))
        M = random_state(rng, m * n).reshape(m, n)
        M2 = random_unitary(rng, m) @ M @ random_unitary(rng, n).T
        for k in range(1, min(m, n) + 1):
            a = entanglement_robustness(schmidt_decompose(M), k)
            b = entanglement_robustness(schmidt_decompose(M2), k)
            worst = max(worst, abs(a.value - b.value), *a.checks.values())
            if max(a.atom_schmidt_ranks((m, n))) > k:
                worst = np.inf
    bell = entanglement_robustness(schmidt_decompose(np.eye(2) / np.sqrt(2)), 1).value
    me3 = entanglement_robustness(schmidt_decompose(np.eye(3) / np.sqrt(3)), 2).value
    ok = worst <= 1e-8 and abs(bell - 1) <= 1e-10 and abs(me3 - 0.5) <= 1e-10
    return "entanglement lift", ok, f"max deviation {worst:.1e}, bell {bell:.12f}, 3x3 {me3:.12f}"


def check_lp(rng, count):
    state = canonicalize(np.full(3, 1 / np.sqrt(3)))
    runs = [certify(state, 2) for _ in range(3)]
    same = all(np.array_equal(r.primal.weights, runs[0].primal.weights) for r in runs)
    ok = same and runs[0].certified
    return "mixture program", ok, f"uniform n=3 trace {runs[0].primal.s:.12f}, deterministic={same}"


def check_roundtrip(rng, count):
    failed = 0
    for _ in range(count):
        raw = random_state(rng, int(rng.integers(3, 9)))
        state = canonicalize(raw)
        k = int(rng.integers(2, state.dim + 1))
        text = dumps(coherence_document(certify(state, k), raw))
        failed += verify_document(json.loads(text))["status"] != "certified"
    return "json round trip", failed == 0, f"{failed} failures"


CHECKS = [
    (check_sandwich, 500), (check_anchors, 200), (check_branch, 10_000), (check_split, 1000),
    (check_norms, 10_000), (check_entanglement, 200), (check_lp, 1), (check_roundtrip, 200),
]


def run(seed: int = 0, size: float = 1.0, workers: int = 1):
    """Run every check; returns a list of ``(name, passed, detail)``."""
    seeds = np.random.SeedSequence(seed).spawn(len(CHECKS))

    def one(item):
        (fn, count), ss = item
        return fn(np.random.default_rng(ss), max(1, int(count * size)))

    items = list(zip(CHECKS, seeds))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def format_table(results) -> str:
    width = max(len(name) for name, _, _ in results)
    lines = [f"{'check':<{width}}  result  detail"]
    for name, ok, detail in results:
        lines.append(f"{name:<{width}}  {'PASS' if ok else 'FAIL':<6}  {detail}")
    return "\n".join(lines)
