"""Seeded random AST generators shared by parser and acceptance tests."""

from __future__ import annotations

import random

from hybridflow.dsl import ast as A

NAMES = ["x", "y", "k1", "k2", "Vo", "T_h", "a_b", "s"]
NUMBERS = [0.0, 1.0, 0.5, 2.0, 0.25, 3.5, 1e-3, 12.0, 7.25, 0.1]


def gen_term(rng: random.Random, depth: int) -> A.Term:
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.5:
            return A.Var(rng.choice(NAMES))
        return A.Num(rng.choice(NUMBERS))
    op = rng.choice(["+", "-", "*", "/", "min", "max", "neg"])
    if op == "neg":
        return A.Apply("neg", (gen_term(rng, depth - 1),))
    return A.Apply(op, (gen_term(rng, depth - 1), gen_term(rng, depth - 1)))


def gen_fo_formula(rng: random.Random, depth: int) -> A.Formula:
    """Quantifier-free, modality-free formulas (tests, domains)."""
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.15:
            return A.BoolLit(rng.random() < 0.5)
        return A.Compare(
            rng.choice(["<", "<=", "=", ">=", ">"]),
            gen_term(rng, depth),
            gen_term(rng, depth),
        )
    kind = rng.choice(["not", "and", "or", "implies"])
    if kind == "not":
        return A.Not(gen_fo_formula(rng, depth - 1))
    cls = {"and": A.And, "or": A.Or, "implies": A.Implies}[kind]
    return cls(gen_fo_formula(rng, depth - 1), gen_fo_formula(rng, depth - 1))


def gen_formula(rng: random.Random, depth: int) -> A.Formula:
    """Full dL formulas, modalities and quantifiers included."""
    if depth <= 0:
        return gen_fo_formula(rng, 1)
    r = rng.random()
    if r < 0.5:
        return gen_fo_formula(rng, depth)
    if r < 0.6:
        quant = A.Forall if rng.random() < 0.5 else A.Exists
        return quant(rng.choice(NAMES), gen_formula(rng, depth - 1))
    if r < 0.8:
        modal = A.Box if rng.random() < 0.5 else A.Diamond
        return modal(gen_program(rng, depth - 1), gen_formula(rng, depth - 1))
    kind = rng.choice(["not", "and", "or", "implies"])
    if kind == "not":
        return A.Not(gen_formula(rng, depth - 1))
    cls = {"and": A.And, "or": A.Or, "implies": A.Implies}[kind]
    return cls(gen_formula(rng, depth - 1), gen_formula(rng, depth - 1))


def gen_program(rng: random.Random, depth: int) -> A.Program:
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.4:
            count = rng.choice([1, 1, 2, 3])
            names = rng.sample(NAMES, count)
            return A.Assign(tuple((n, gen_term(rng, max(0, depth - 1))) for n in names))
        if r < 0.55:
            return A.RandomAssign(rng.choice(NAMES))
        if r < 0.8:
            return A.Test(gen_fo_formula(rng, max(0, depth - 1)))
        count = rng.choice([1, 2, 3])
        names = rng.sample(NAMES, count)
        domain = gen_fo_formula(rng, max(0, depth - 1)) if rng.random() < 0.7 else A.BoolLit(True)
        return A.Ode(tuple((n, gen_term(rng, max(0, depth - 1))) for n in names), domain)
    kind = rng.choice(["choice", "seq", "seq", "star"])
    if kind == "choice":
        return A.Choice(gen_program(rng, depth - 1), gen_program(rng, depth - 1))
    if kind == "seq":
        return A.Seq(gen_program(rng, depth - 1), gen_program(rng, depth - 1))
    return A.Star(gen_program(rng, depth - 1))
