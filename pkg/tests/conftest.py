import numpy as np
import pytest

from cuntzwalk import LabeledWalk, validate_walk


def random_valid_walk(rng, n_vertices=None, n_labels=None,
                      max_vertices=5, max_labels=3, keep=0.8):
    """Rejection-sample a walk satisfying all three invariants.

    Per label, draw a random permutation of the vertices and keep each edge
    with probability ``keep`` (in-injectivity holds by construction); rows get
    complex Gaussian amplitudes, resampled away from the zero-snap threshold,
    then normalized.  Out-injectivity is left to rejection.
    """
    for _ in range(500):
        nv = n_vertices or int(rng.integers(2, max_vertices + 1))
        nl = n_labels or int(rng.integers(2, max_labels + 1))
        vertices = tuple(range(nv))
        labels = tuple(f"l{k}" for k in range(nl))
        support = {v: [] for v in vertices}
        for lam in labels:
            perm = rng.permutation(nv)
            mask = rng.random(nv) < keep
            for i in vertices:
                if mask[i]:
                    support[i].append((lam, int(perm[i])))
        if not all(support.values()):
            continue
        edges = {}
        for i in vertices:
            k = len(support[i])
            for _retry in range(20):
                amps = rng.normal(size=k) + 1j * rng.normal(size=k)
                if np.abs(amps).min() > 0.05:
                    break
            amps = amps / np.linalg.norm(amps)
            for (lam, j), a in zip(support[i], amps):
                edges[(i, lam)] = (j, complex(a))
        w = LabeledWalk(vertices, labels, edges)
        if validate_walk(w).ok:
            return w
    raise RuntimeError("random walk sampling failed to converge")


def random_walk_pair(rng, max_product=25, max_labels=3):
    """Two valid walks over the same label alphabet with |V| * |V'| bounded."""
    for _ in range(500):
        nl = int(rng.integers(2, max_labels + 1))
        nv = int(rng.integers(2, 6))
        nv2 = int(rng.integers(2, 6))
        if nv * nv2 > max_product:
            continue
        w = random_valid_walk(rng, n_vertices=nv, n_labels=nl)
        w2 = random_valid_walk(rng, n_vertices=nv2, n_labels=nl)
        return w, w2
    raise RuntimeError("random pair sampling failed to converge")


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
