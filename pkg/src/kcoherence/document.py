"""JSON certificate documents: building, deterministic serialization, re-verification.

Documents are plain dicts. Floats are written with 17 significant digits and
keys keep insertion order, so identical inputs give byte-identical output.
Complex arrays are stored as ``{"real": [...], "imag": [...]}``; rationals
from exact mode as ``"p/q"`` strings.

A document carries everything needed to re-check it without trusting the
producer: the input, the dual factor and the primal atoms and weights.
:func:`verify_document` recomputes the state from the input echo and checks
the certificates from scratch.
"""
from __future__ import annotations

from fractions import Fraction
import json
import math

import numpy as np

from .closed_form import robustness_value
from .core import canonicalize
from .dual import DualWitness, verify_dual_witness
from .entanglement import EntanglementCertificate, SchmidtData, schmidt_decompose
from .errors import ValidationError
from .primal import Certificate, decompose_into_I2, slack_violation

SCHEMA_VERSION = "1.0"
SCHMIDT_RANK_THRESHOLD = 1e-9


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _nums(arr):
    arr = np.asarray(arr)
    if arr.dtype != object and np.iscomplexobj(arr):
        return {"real": _nums(arr.real), "imag": _nums(arr.imag)}
    if arr.ndim == 0:
        return _num(arr.item())
    return [_nums(a) for a in arr] if arr.ndim > 1 else [_num(a) for a in arr]


def _read(obj):
    """Inverse of ``_nums`` into a float or complex numpy array."""
    if isinstance(obj, dict):
        return _read(obj["real"]) + 1j * _read(obj["imag"])
    def conv(x):
        if isinstance(x, list):
            return [conv(y) for y in x]
        return float(Fraction(x)) if isinstance(x, str) else float(x)
    return np.array(conv(obj), dtype=float)


def _echo(raw, exact):
    if exact:
        return [str(Fraction(x)) if not isinstance(x, str) else x.strip() for x in raw]
    arr = np.asarray(raw)
    if arr.dtype == object:
        arr = arr.astype(complex)
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real
    return _nums(arr)


def coherence_document(cert: Certificate, raw, timings: dict | None = None) -> dict:
    r'''Document for a coherence certificate.

    Parameters:
        cert (Certificate): certificate from :func:`kcoherence.certify`
        raw (array_like): the input vector as given (echoed for re-verification)
        timings (dict | None): optional stage timings in seconds; omitted by default
            to keep output deterministic

    Returns:
        doc (dict)
    '''
    state = cert.state
    dual, primal = cert.dual, cert.primal
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": "coherence",
        "status": "certified" if cert.certified else "gap",
        "exact": state.exact,
        "tolerance": cert.tolerance,
        "input_echo": _echo(raw, state.exact),
        "k": cert.k,
        "state": {"entries": _nums(state.entries), "permutation": _nums(state.permutation)},
        "branch_ell": cert.value.branch.ell,
        "value": _num(cert.value.value),
        "k_support_norm": math.sqrt(float(cert.value.k_support_norm_sq)),
        "near_boundary": cert.near_boundary,
        "dual_witness": {
            "kind": dual.kind,
            "a": None if dual.a is None else _nums(dual.a),
            "objective": _num(dual.objective),
            "max_submatrix_eig": cert.dual_report.max_submatrix_eig,
        },
        "primal": {
            "weights": _nums(primal.weights),
            "atoms": _nums(primal.atoms),
            "slack_trace": _num(primal.s),
            "reconstruction_residual": cert.gaps["reconstruction"],
        },
        "gaps": dict(cert.gaps),
    }
    if timings is not None:
        doc["timings"] = dict(timings)
    return doc


def entanglement_document(ecert: EntanglementCertificate, matrix, schmidt: SchmidtData,
                          tolerance: float, timings: dict | None = None) -> dict:
    """Document for an entanglement certificate; ``matrix`` is the input amplitude matrix."""
    arr = np.asarray(matrix)
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real
    ok = all(g <= tolerance for g in ecert.checks.values())
    if ecert.coherence is not None:
        ok = ok and ecert.coherence.certified
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": "entanglement",
        "status": "certified" if ok else "gap",
        "exact": False,
        "tolerance": tolerance,
        "input_echo": _nums(arr),
        "dims": list(schmidt.dims),
        "k": ecert.k,
        "schmidt_coefficients": _nums(schmidt.coefficients),
        "branch_ell": None if ecert.coherence is None else ecert.coherence.value.branch.ell,
        "value": ecert.value,
        "gamma_norm": ecert.gamma_norm,
        "dual_witness": {"b": _nums(ecert.dual_vector_b),
                         "objective": float(abs(np.vdot(ecert.dual_vector_b, schmidt.state_vector())) ** 2 - 1)},
        "primal": {"weights": _nums(ecert.weights), "atoms": _nums(ecert.lifted_atoms),
                   "slack_trace": float(np.trace(ecert.lifted_slack).real),
                   "reconstruction_residual": ecert.checks["reconstruction"]},
        "gaps": dict(ecert.checks),
    }
    if timings is not None:
        doc["timings"] = dict(timings)
    return doc


def value_document(rv, k: int, raw, exact: bool) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": "coherence",
        "exact": exact,
        "input_echo": _echo(raw, exact),
        "k": k,
        "branch_ell": rv.branch.ell,
        "value": _num(rv.value),
        "k_support_norm": math.sqrt(float(rv.k_support_norm_sq)),
    }


def _encode(obj, level: int) -> str:
    pad = "  " * (level + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(key))}: {_encode(val, level + 1)}" for key, val in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * level + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(x, level) for x in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(doc: dict) -> str:
    """Serialize a document deterministically (17 significant digits per float)."""
    return _encode(doc, 0) + "\n"


def verify_document(doc: dict, tolerance: float | None = None) -> dict:
    r'''Re-check a parsed certificate document from its own data.

    Parameters:
        doc (dict): parsed JSON document
        tolerance (float | None): defaults to the tolerance recorded in the document

    Returns:
        report (dict): ``{"status": "certified" | "gap", "checks": {...}}``
    '''
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {doc.get('schema_version')!r}")
    tol = float(doc.get("tolerance", 1e-8) if tolerance is None else tolerance)
    mode = doc.get("mode")
    if mode == "coherence":
        checks = _verify_coherence(doc, tol)
    elif mode == "entanglement":
        checks = _verify_entanglement(doc, tol)
    else:
        raise ValidationError(f"unknown document mode {mode!r}")
    ok = all(v <= tol for v in checks.values())
    return {"status": "certified" if ok else "gap", "checks": checks}


def _verify_coherence(doc, tol):
    if "primal" not in doc:
        raise ValidationError("document carries no certificates (value-only output)")
    exact = bool(doc.get("exact"))
    raw = doc["input_echo"] if exact else _read(doc["input_echo"])
    state = canonicalize(raw, exact=exact)
    if exact:
        state = canonicalize(np.asarray(state.reconstruct(), dtype=float))
    k = int(doc["k"])
    rv = robustness_value(state, k)
    value = float(rv.value)
    v = state.entries
    ell = rv.branch.ell

    dual = doc["dual_witness"]
    if dual["kind"] == "all_ones":
        W = np.full((state.dim, state.dim), 1.0 / k)
        a = None
    elif dual["kind"] == "rank_one":
        a = _read(dual["a"])
        W = np.outer(a, a)
    else:
        raise ValidationError(f"unknown dual witness kind {dual['kind']!r}")
    report = verify_dual_witness(DualWitness(dual["kind"], a, W, float(v @ W @ v - 1), k), state, tol)

    primal = doc["primal"]
    weights = _read(primal["weights"])
    atoms = _read(primal["atoms"]).reshape(len(weights), state.dim)
    slack = (atoms.T * weights) @ atoms - np.outer(v, v)
    try:
        decompose_into_I2(slack, tol)
        split = 0.0
    except ValidationError:
        split = math.inf
    support = int(np.max(np.count_nonzero(np.abs(atoms) > 0, axis=1)))
    return {
        "value_recomputed": abs(value - float(_read(doc["value"]))),
        "branch": 0.0 if ell == doc["branch_ell"] else math.inf,
        "dual_feasibility": report.margin,
        "dual_objective": report.objective_gap,
        "primal_trace": abs(float(np.trace(slack)) - value),
        "slack_structure": slack_violation(slack, ell),
        "slack_decomposition": split,
        "weights": float(max(abs(weights.sum() - 1), -weights.min(), 0.0)),
        "atom_support": float(max(support - k, 0)),
    }


def _verify_entanglement(doc, tol):
    M = _read(doc["input_echo"])
    schmidt = schmidt_decompose(M)
    k = int(doc["k"])
    m, n = schmidt.dims
    lam = schmidt.coefficients
    r = schmidt.rank
    if k >= r:
        value = 0.0
    elif k == 1:
        value = float(lam.sum() ** 2 - 1)
    else:
        value = float(robustness_value(canonicalize(lam), k).value)
    v = schmidt.state_vector()
    b = _read(doc["dual_witness"]["b"])
    sb = np.linalg.svd(b.reshape(m, n), compute_uv=False)
    weights = _read(doc["primal"]["weights"])
    atoms = _read(doc["primal"]["atoms"]).reshape(len(weights), m * n)
    ranks = [np.linalg.svd(w.reshape(m, n), compute_uv=False) for w in atoms]
    excess = max(float(np.max(s[k:], initial=0.0)) for s in ranks)
    # the slack must live on span{l_i (x) r_i} and be a zero-row-sum Z-matrix there
    P = schmidt.product_basis()
    lifted = (atoms.T * weights) @ atoms.conj() - np.outer(v, v.conj())
    S = P.conj().T @ lifted @ P
    leak = float(np.max(np.abs(lifted - P @ S @ P.conj().T)))
    try:
        decompose_into_I2(S.real, tol)
        split = 0.0
    except ValidationError:
        split = math.inf
    return {
        "value_recomputed": abs(value - float(doc["value"])),
        "dual_objective": float(abs(abs(np.vdot(b, v)) ** 2 - 1 - value)),
        "dual_feasibility": max(float(np.sum(sb[:k] ** 2)) - 1, 0.0),
        "primal_trace": abs(float(np.trace(lifted).real) - value),
        "slack_support": leak,
        "slack_imaginary": float(np.max(np.abs(S.imag))),
        "slack_decomposition": split,
        "atom_schmidt_rank": math.inf if excess > SCHMIDT_RANK_THRESHOLD else 0.0,
        "weights": float(max(abs(weights.sum() - 1), -weights.min(), 0.0)),
    }

