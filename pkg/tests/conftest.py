import random
from pathlib import Path

import pytest

from qsetlab.core import Species, add_macro_atom, add_micro_atom, make_qset, new_universe

MODELS = Path(__file__).resolve().parent.parent / "models"


def build_random_universe(rng: random.Random, size: int, micro: bool = True):
    """Mixed universe of ``size`` entities; qsets draw members from earlier entities."""
    u = new_universe([Species("electron"), Species("photon"), Species("muon")])
    kinds = ["micro", "macro", "qset"] if micro else ["macro", "qset"]
    for _ in range(size):
        kind = rng.choice(kinds)
        existing = u.handles()
        if kind == "qset" and existing:
            make_qset(u, rng.sample(existing, rng.randint(0, min(3, len(existing)))))
        elif kind == "micro":
            add_micro_atom(u, rng.choice(["electron", "photon", "muon"]))
        else:
            add_macro_atom(u, rng.choice(["p", "q", "r"]))
    return u


@pytest.fixture
def random_universe():
    return build_random_universe


@pytest.fixture
def universe():
    return new_universe([Species("electron", "spin-1/2"), Species("photon")])


@pytest.fixture
def models_dir():
    return MODELS
