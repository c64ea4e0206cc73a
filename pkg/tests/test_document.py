import json

import numpy as np
import pytest

from kcoherence import (ValidationError, canonicalize, certify, coherence_document, dumps,
                        entanglement_document, entanglement_robustness, schmidt_decompose,
                        verify_document)

from conftest import EX4, random_state


def roundtrip(doc):
    return verify_document(json.loads(dumps(doc)))


def test_coherence_roundtrip(rng):
    for _ in range(30):
        raw = random_state(rng, int(rng.integers(3, 9)))
        state = canonicalize(raw)
        for k in range(2, state.dim + 1):
            report = roundtrip(coherence_document(certify(state, k), raw))
            assert report["status"] == "certified", report


def test_exact_roundtrip():
    raw = ["1/2", "1/2", "1/2", "1/2"]
    doc = coherence_document(certify(canonicalize(raw, exact=True), 3), raw)
    assert doc["value"] == "1/3"
    assert roundtrip(doc)["status"] == "certified"


def test_entanglement_roundtrip(rng):
    M = random_state(rng, 12).reshape(3, 4)
    sd = schmidt_decompose(M)
    for k in (1, 2, 3):
        doc = entanglement_document(entanglement_robustness(sd, k), M, sd, 1e-8)
        assert roundtrip(doc)["status"] == "certified"


def test_dumps_is_deterministic():
    raw = EX4
    a = dumps(coherence_document(certify(canonicalize(raw), 3), raw))
    b = dumps(coherence_document(certify(canonicalize(raw), 3), raw))
    assert a == b
    assert "0.22423753745794883" in a or "0.2242375374579488" in a
    assert "timings" not in a


def test_floats_survive_roundtrip(rng):
    x = rng.normal(size=20)
    text = dumps({"x": [float(t) for t in x]})
    assert np.array_equal(json.loads(text)["x"], x)


def test_tampered_documents_fail():
    raw = EX4
    doc = json.loads(dumps(coherence_document(certify(canonicalize(raw), 3), raw)))
    bad = json.loads(json.dumps(doc))
    bad["value"] = 0.2
    assert verify_document(bad)["status"] == "gap"
    bad = json.loads(json.dumps(doc))
    bad["dual_witness"]["a"] = [1.05 * t for t in bad["dual_witness"]["a"]]
    assert verify_document(bad)["checks"]["dual_feasibility"] > 1e-8
    bad = json.loads(json.dumps(doc))
    bad["primal"]["weights"][0] += 0.01
    assert verify_document(bad)["status"] == "gap"


def test_document_schema_checks():
    with pytest.raises(ValidationError):
        verify_document({"schema_version": "0.1"})
    with pytest.raises(ValidationError):
        verify_document({"schema_version": "1.0", "mode": "other"})


def test_document_fields():
    raw = [0.5] * 4
    doc = coherence_document(certify(canonicalize(raw), 2), raw, timings={"certify_seconds": 0.1})
    for key in ["schema_version", "mode", "input_echo", "k", "branch_ell", "value", "k_support_norm",
                "dual_witness", "primal", "gaps", "timings"]:
        assert key in doc
    assert set(doc["dual_witness"]) == {"kind", "a", "objective", "max_submatrix_eig"}
    assert set(doc["primal"]) == {"weights", "atoms", "slack_trace", "reconstruction_residual"}
    assert doc["k_support_norm"] == pytest.approx(np.sqrt(2))
