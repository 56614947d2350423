import os
import random
from pathlib import Path

import pytest

from tropinf.lang import (
    App,
    Choice,
    Ifz,
    Lam,
    Pred,
    Program,
    Succ,
    Var,
    numeral,
    parse,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

SEED = int(os.environ.get("TROPINF_SEED", "20240817"))


@pytest.fixture
def rng():
    return random.Random(SEED)


def load(name: str) -> Program:
    return parse(load_source(name))


def load_source(name: str) -> str:
    return (CORPUS / f"{name}.pcfx").read_text()


def term_size(t) -> int:
    children = []
    for attr in ("body", "fun", "arg", "scrutinee", "then", "orelse", "left", "right"):
        child = getattr(t, attr, None)
        if child is not None:
            children.append(child)
    return 1 + sum(term_size(c) for c in children)


def random_ground_term(rng: random.Random, budget: int, k: int = 2, var=None):
    """A random well-typed ground term without fixpoints.

    budget bounds the number of AST nodes; var, when given, is a variable
    name that may be used as a ground leaf.
    """
    leaves = [lambda: numeral(rng.randint(0, 2))]
    if var is not None:
        leaves.append(lambda: Var(var))
    if budget <= 2:
        return rng.choice(leaves)()
    kind = rng.randrange(6)
    if kind == 0:
        return rng.choice(leaves)()
    if kind == 1:
        left = random_ground_term(rng, (budget - 1) // 2, k, var)
        right = random_ground_term(rng, (budget - 1) // 2, k, var)
        return Choice(rng.randint(1, k), left, right)
    if kind == 2 and budget >= 4:
        third = (budget - 1) // 3
        return Ifz(
            random_ground_term(rng, third, k, var),
            random_ground_term(rng, third, k, var),
            random_ground_term(rng, third, k, var),
        )
    if kind == 3:
        return Succ(random_ground_term(rng, budget - 1, k, var))
    if kind == 4:
        return Pred(random_ground_term(rng, budget - 1, k, var))
    if kind == 5 and budget >= 5:
        name = f"v{rng.randrange(1000)}"
        body = random_ground_term(rng, (budget - 2) // 2, k, name)
        arg = random_ground_term(rng, (budget - 2) // 2, k)
        return App(Lam(name, body), arg)
    return rng.choice(leaves)()


def random_program(rng: random.Random, max_nodes: int = 12, k: int = 2) -> Program:
    while True:
        term = random_ground_term(rng, max_nodes, k)
        if term_size(term) <= max_nodes:
            return Program(term, k)
