"""Shared generators and independent oracles for the test suite."""

import random
from itertools import permutations
from pathlib import Path

import pytest

from nickalgebra import terms
from nickalgebra.terms import (
    EMPTY_DUPLEX,
    cosignal,
    duplex,
    is_private,
    molecule_domains,
    private,
    seg_t,
    seg_tx,
    seg_x,
    seg_xt,
    seg_xy,
    signal,
    soup,
)

DATA_DIR = Path(__file__).parent / "data"

PUBS = ["x", "y", "z", "w", "v"]


def random_dom(rng, n_priv):
    if n_priv and rng.random() < 0.45:
        return private(rng.randrange(n_priv))
    return rng.choice(PUBS)


def random_segment(rng, n_priv):
    k = rng.randrange(5)
    if k == 0:
        return seg_t()
    if k == 1:
        return seg_x(random_dom(rng, n_priv))
    if k == 2:
        return seg_tx(random_dom(rng, n_priv))
    if k == 3:
        return seg_xt(random_dom(rng, n_priv))
    return seg_xy(random_dom(rng, n_priv), random_dom(rng, n_priv))


def random_molecule(rng, n_priv):
    k = rng.randrange(3)
    if k == 0:
        return signal(random_dom(rng, n_priv))
    if k == 1:
        return cosignal(random_dom(rng, n_priv))
    return duplex(*[random_segment(rng, n_priv) for _ in range(rng.randrange(0, 5))])


def random_soup(rng, max_priv=3, max_mols=7):
    n_priv = rng.randrange(max_priv + 1)
    mols = [
        (random_molecule(rng, n_priv), rng.randrange(1, 4))
        for _ in range(rng.randrange(0, max_mols))
    ]
    return soup(mols, n_priv)


def shuffled_alpha_variant(rng, u):
    """Same soup modulo multiset order and a random nu-slot permutation."""
    perm = list(range(u.n_priv))
    rng.shuffle(perm)
    mapping = {private(i): private(p) for i, p in enumerate(perm)}
    mols = [(terms._map_mol(m, mapping), c) for m, c in u.mols]
    rng.shuffle(mols)
    return soup(mols, u.n_priv)


def orbit_equal(u1, u2):
    """Brute-force algebraic equality: drop blanks, ignore unused slots, and
    try every bijection between the used nu-slots.  Independent of
    canonicalize(); exponential, for oracle use only."""
    c1 = [(m, c) for m, c in u1.mols if m != EMPTY_DUPLEX and c > 0]
    c2 = [(m, c) for m, c in u2.mols if m != EMPTY_DUPLEX and c > 0]
    used1 = sorted({d for m, _ in c1 for d in molecule_domains(m) if is_private(d)})
    used2 = sorted({d for m, _ in c2 for d in molecule_domains(m) if is_private(d)})
    if len(used1) != len(used2):
        return False
    want = tuple(sorted(c2))
    for perm in permutations(used1):
        mapping = dict(zip(perm, used2))
        cand = tuple(sorted((terms._map_mol(m, mapping), c) for m, c in c1))
        if cand == want:
            return True
    return False


@pytest.fixture
def rng():
    return random.Random(20260810)


@pytest.fixture
def circuit_script_text():
    return (DATA_DIR / "fork_join_circuit.dsd").read_text(encoding="utf-8")
