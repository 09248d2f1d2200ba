import math

import numpy as np
import pytest

from conftest import random_valid_walk
from cuntzwalk import (
    InvalidWalkError,
    LabeledWalk,
    apply_sigma,
    build_coisometry,
    fixtures,
)


def test_coisometry_identity_on_fixtures():
    for w in (fixtures.five_vertex_walk(), fixtures.six_vertex_walk(),
              fixtures.phased_triangle_walk(), fixtures.cycle_walk(4)):
        assert build_coisometry(w).defect() < 1e-12


def test_coisometry_identity_random(rng):
    for _ in range(20):
        w = random_valid_walk(rng)
        assert build_coisometry(w).defect() < 1e-12


def test_vstar_moves_along_edges():
    w = fixtures.five_vertex_walk()
    c = build_coisometry(w)
    e0 = np.zeros(5)
    e0[0] = 1.0
    out = c.Vstar["l3"] @ e0
    expected = np.zeros(5, dtype=complex)
    expected[1] = 1 / math.sqrt(2)        # 0 --l3--> 1 with amplitude 1/sqrt(2)
    assert np.allclose(out, expected)
    # V is the adjoint
    for lam in w.labels:
        assert np.allclose(c.V[lam].toarray(), c.Vstar[lam].toarray().conj().T)


def test_each_v_column_has_at_most_one_entry():
    w = fixtures.six_vertex_walk()
    c = build_coisometry(w)
    for lam in w.labels:
        counts = np.diff(c.V[lam].indptr)
        assert counts.max() <= 1


def test_invalid_rows_are_rejected():
    w = LabeledWalk((0,), ("a", "b"), {(0, "a"): (0, 0.5)})
    with pytest.raises(InvalidWalkError):
        build_coisometry(w)


def test_out_injectivity_violation_is_tolerated():
    # both labels of Z/2 step by the same element; the coisometry is fine
    c = build_coisometry(fixtures.cycle_walk(2))
    assert c.defect() < 1e-12


def test_sigma_preserves_identity():
    # sigma is unital: sum_lam V_lam V_lam* = I
    for w in (fixtures.five_vertex_walk(), fixtures.cycle_walk(3)):
        c = build_coisometry(w)
        I = np.eye(w.n_vertices, dtype=complex)
        assert np.abs(apply_sigma(c, c, I) - I).max() < 1e-12


def test_sigma_entrywise_formula(rng):
    # (sigma T)[i, i'] = sum_lam alpha[i,lam] conj(alpha'[i',lam]) T[i.lam, i'.lam]
    w = random_valid_walk(rng)
    w2 = random_valid_walk(rng, n_labels=w.n_labels)
    w2 = LabeledWalk(w2.vertices, w.labels,
                     {(i, w.labels[w2.lindex[l]]): e for (i, l), e in w2.edges.items()})
    c, c2 = build_coisometry(w), build_coisometry(w2)
    T = rng.normal(size=(w2.n_vertices, w.n_vertices)) \
        + 1j * rng.normal(size=(w2.n_vertices, w.n_vertices))
    out = apply_sigma(c, c2, T)
    for i in w.vertices:
        for i2 in w2.vertices:
            acc = 0.0 + 0.0j
            for lam in w.labels:
                a, a2 = w.amplitude(i, lam), w2.amplitude(i2, lam)
                if a == 0 or a2 == 0:
                    continue
                acc += a * np.conj(a2) * T[w2.vindex[w2.target(i2, lam)],
                                           w.vindex[w.target(i, lam)]]
            assert out[w2.vindex[i2], w.vindex[i]] == pytest.approx(acc)


def test_sigma_shape_and_alphabet_checks():
    c = build_coisometry(fixtures.five_vertex_walk())
    c2 = build_coisometry(fixtures.phased_triangle_walk())
    with pytest.raises(ValueError):
        apply_sigma(c, c2, np.zeros((3, 5)))
    with pytest.raises(ValueError):
        apply_sigma(c, c, np.zeros((3, 3)))
