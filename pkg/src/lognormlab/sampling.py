"""Seeded, replayable samplers.

Every draw is addressed by ``(seed, stream, index)``.  Samples are produced
in fixed-size blocks, each block seeded from ``SeedSequence(seed,
spawn_key=(stream, block))``, so the i-th sample never depends on how many
samples were requested or how the work was sharded.  Counterexamples can be
replayed by regenerating the same stream.
"""

from __future__ import annotations

import numpy as np

BLOCK = 256

# atom kinds mixed into vector streams
SIGNS, TIE, ZEROS, UNIT = range(4)


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(block))))


def _blocks(seed, stream, count, make):
    out = []
    nblocks = -(-count // BLOCK)
    for b in range(nblocks):
        out.append(make(_block_rng(seed, stream, b)))
    if not out:
        return None
    return np.concatenate(out, axis=0)[:count]


def _atomize(rng, v, kind):
    n = v.size
    if kind == SIGNS:
        mag = float(rng.integers(1, 4))
        return mag * rng.choice([-1.0, 1.0], size=n)
    if kind == TIE and n > 1:
        i = int(np.argmax(np.abs(v)))
        j = int(rng.integers(0, n - 1))
        j = j + 1 if j >= i else j
        v = v.copy()
        v[j] = abs(v[i]) * rng.choice([-1.0, 1.0])
        return v
    if kind == ZEROS and n > 1:
        keep = rng.random(n) < 0.5
        if not keep.any():
            keep[int(rng.integers(0, n))] = True
        return np.where(keep, v, 0.0)
    u = np.zeros(n)
    u[int(rng.integers(0, n))] = float(rng.integers(1, 4)) * rng.choice([-1.0, 1.0])
    return u


def sample_vectors(seed: int, n: int, count: int, stream: int = 0,
                   atom_rate: float = 0.1, scale: float = 1.0) -> np.ndarray:
    """Return ``count`` vectors in R^n, shape ``(count, n)``.

    Coordinates are i.i.d. standard normal (times ``scale``).  A fraction
    ``atom_rate`` of the rows is replaced by adversarial atoms: +-c sign
    patterns, exact ties in |x_i|, vectors with zero coordinates, and signed
    multiples of unit vectors.  Atoms are never the zero vector.
    """
    if count <= 0:
        return np.zeros((0, n))

    def make(rng):
        v = rng.standard_normal((BLOCK, n)) * scale
        is_atom = rng.random(BLOCK) < atom_rate
        kinds = rng.integers(0, 4, BLOCK)
        for k in np.flatnonzero(is_atom):
            v[k] = _atomize(rng, v[k], int(kinds[k]))
        return v

    return _blocks(seed, stream, count, make)


def sample_atoms(seed: int, n: int, count: int, stream: int = 0, kinds=(SIGNS, TIE, ZEROS, UNIT)) -> np.ndarray:
    """Atom-only stream (every row is one of ``kinds``)."""
    kinds = tuple(kinds)

    def make(rng):
        v = rng.standard_normal((BLOCK, n))
        pick = rng.integers(0, len(kinds), BLOCK)
        for k in range(BLOCK):
            v[k] = _atomize(rng, v[k], kinds[int(pick[k])])
        return v

    return _blocks(seed, stream, count, make)


def sample_uniform(seed: int, count: int, low: float, high: float, stream: int = 0, shape=()) -> np.ndarray:
    shape = tuple(shape)

    def make(rng):
        return rng.uniform(low, high, size=(BLOCK,) + shape)

    if count <= 0:
        return np.zeros((0,) + shape)
    return _blocks(seed, stream, count, make)


def sample_matrices(seed: int, n: int, count: int, stream: int = 0,
                    low: float = -2.0, high: float = 2.0) -> np.ndarray:
    """``count`` matrices with i.i.d. U[low, high] entries, shape ``(count, n, n)``."""
    return sample_uniform(seed, count, low, high, stream=stream, shape=(n, n))


def sample_box(seed: int, lo, hi, count: int, stream: int = 0) -> np.ndarray:
    """Uniform points in the axis-aligned box ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    u = sample_uniform(seed, count, 0.0, 1.0, stream=stream, shape=lo.shape)
    return lo + u * (hi - lo)


def random_spd(seed: int, n: int, stream: int = 0, cond_floor: float = 0.1) -> np.ndarray:
    """A random symmetric positive definite matrix with eigenvalues >= ``cond_floor``."""
    rng = _block_rng(seed, stream, 0)
    B = rng.standard_normal((n, n))
    return B @ B.T / n + cond_floor * np.eye(n)


def random_full_rank(seed: int, m: int, n: int, stream: int = 0) -> np.ndarray:
    """A random m x n matrix with full column rank (resampled until well conditioned)."""
    rng = _block_rng(seed, stream, 0)
    while True:
        W = rng.standard_normal((m, n))
        s = np.linalg.svd(W, compute_uv=False)
        if s[-1] > 1e-2 * s[0]:
            return W
