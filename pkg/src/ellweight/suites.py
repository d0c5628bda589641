"""Verification suites: deterministic case lists and per-case evaluators.

Every suite turns a configuration and a seeded generator into a list of
``Case`` objects.  All random inputs are drawn while building the list, so
evaluation is a pure function of the case and can run in any worker
process; results are reported in list order.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, PoleError
from .numerics import EllipticParams
from .partitions import LambdaShape, Partition, all_words, concat, enumerate_shape, leq
from .properties import (check_orthogonality, check_quasiperiodicity, check_transition, generic_u,
                         w_matrix)
from .rmatrix import DynamicalParams, check_dybe, check_unitarity
from .shuffle import (check_omega_shuffle, check_star_closure, check_wheel, row_slices, star,
                      wheel_configurations, wtilde_handle)
from .weights import VariableAssignment, triangular_diagonal

PROPOSITIONS = {
    "dybe": "dynamical Yang-Baxter equation",
    "unitarity": "unitarity of R = mu Rbar",
    "triangular": "triangularity of W~_J(z_I)",
    "transition": "transition property of W~ under adjacent swaps",
    "orthogonality": "orthogonality of weight functions",
    "quasiperiod": "quasi-periodicity of W, H_lambda and W~",
    "wheel": "wheel condition for W~",
    "shuffle": "star-closure of W~ and wheel condition of star products",
    "omega-shuffle": "shuffle identity omega_I * omega_J = omega_{I+J}",
}

TOLERANCES = {
    "dybe": 1e-9,
    "unitarity": 1e-9,
    "triangular": 1e-10,
    "transition": 1e-9,
    "orthogonality": 1e-8,
    "quasiperiod": 1e-9,
    "wheel": 1e-10,
    "shuffle": 1e-9,
    "omega-shuffle": 1e-9,
}

SUITES = tuple(PROPOSITIONS)


@dataclass
class Case:
    suite: str
    label: dict
    fn: Callable[..., float]
    args: tuple = ()
    tolerance: float = 1e-9
    extra: dict = field(default_factory=dict)


def _cnormal(rng: np.random.Generator, size, scale: float) -> np.ndarray:
    return scale * (rng.normal(size=size) + 1j * rng.normal(size=size))


def compositions(n: int, N: int, positive: bool = False):
    """All shapes (lambda_1..lambda_N) summing to n."""
    lo = 1 if positive else 0
    for lam in itertools.product(range(lo, n + 1), repeat=N):
        if sum(lam) == n:
            yield LambdaShape(lam)


def run_case(case: Case, params: EllipticParams) -> dict:
    """Evaluate one case; pole errors become failed records rather than crashes."""
    rec = {"suite": case.suite, "proposition": PROPOSITIONS[case.suite], "case": case.label}
    try:
        res = float(case.fn(*case.args, params))
        rec.update(residual=res, tolerance=case.tolerance, **{"pass": bool(res < case.tolerance)})
    except (PoleError, DomainError) as exc:
        rec.update(residual=None, tolerance=case.tolerance, error=f"{type(exc).__name__}: {exc}",
                   **{"pass": False})
    rec.update(case.extra)
    return rec


# ---------------------------------------------------------------------------
# evaluators (top level so they pickle for worker pools)

def _dybe(u1, u2, u3, a, params):
    return check_dybe(u1, u2, u3, DynamicalParams(a), params)


def _unitarity(u, a, params):
    return check_unitarity(u, DynamicalParams(a), params)


@lru_cache(maxsize=8)
def _identity_matrix(shape_lam, u, a, params):
    shape = LambdaShape(shape_lam)
    return w_matrix(tuple(range(1, shape.n + 1)), shape, np.asarray(u), DynamicalParams(a), params)


def _triangular(shape_lam, word_i, word_j, u, a, params):
    N = len(shape_lam)
    shape = LambdaShape(shape_lam)
    parts = enumerate_shape(shape)
    I, J = Partition(word_i, N), Partition(word_j, N)
    M = _identity_matrix(tuple(shape_lam), tuple(complex(x) for x in u), tuple(a), params)
    i, j = parts.index(I), parts.index(J)
    if i == j:
        d = triangular_diagonal(I, u, params)
        return abs(M[i, i] - d) / abs(d)
    return abs(M[i, j]) / max(np.max(np.abs(M)), 1e-300)


def _transition(i, word, N, x, u, a, params):
    return check_transition(i, Partition(word, N), x, u, DynamicalParams(a), params)


def _orthogonality(word_j, word_k, N, u, a, params):
    return check_orthogonality(Partition(word_j, N), Partition(word_k, N), u, DynamicalParams(a), params)


def _quasiperiod(word, N, l, a_slot, u, v, a, params):
    I = Partition(word, N)
    recs = check_quasiperiodicity(I, VariableAssignment(u, v), DynamicalParams(a), params,
                                  slots={(l, a_slot)})
    if not recs:
        raise DomainError(f"no slot ({l}, {a_slot})")
    return recs[0]["max"]


def _wheel(word, N, seed, params):
    F = wtilde_handle(Partition(word, N), params)
    rng = np.random.default_rng(seed)
    return check_wheel(F, DynamicalParams.random(N, rng), rng, params)


def _closure(word_i, word_j, N, X, a, params):
    return check_star_closure(Partition(word_i, N), Partition(word_j, N), X, DynamicalParams(a), params)


def _star_wheel(word_i, word_j, N, seed, params):
    I, J = Partition(word_i, N), Partition(word_j, N)
    F = star(wtilde_handle(I, params), wtilde_handle(J, params), params)
    rng = np.random.default_rng(seed)
    return check_wheel(F, DynamicalParams.random(N, rng), rng, params)


def _omega_shuffle(word_i, word_j, N, X, a, params):
    return check_omega_shuffle(Partition(word_i, N), Partition(word_j, N), X, DynamicalParams(a), params)


# ---------------------------------------------------------------------------
# case builders

def _a(N, rng, scale=0.5):
    return tuple(complex(x) for x in _cnormal(rng, N, scale))


def build_cases(suite: str, rng: np.random.Generator, N: int = 2, n: int = 2, trials: int | None = None,
                shapes: list[LambdaShape] | None = None, shape2: LambdaShape | None = None,
                tol: float | None = None) -> list[Case]:
    """The case list of a suite.  ``tol`` overrides the default tolerance."""
    if suite not in PROPOSITIONS:
        raise DomainError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    tolerance = TOLERANCES[suite] if tol is None else tol
    cases: list[Case] = []

    def add(label, fn, *args, **extra):
        cases.append(Case(suite, label, fn, args, tolerance, extra))

    if suite == "dybe":
        for k in range(trials or 20):
            u = _cnormal(rng, 3, 0.4)
            add({"N": N, "trial": k}, _dybe, *map(complex, u), _a(N, rng))
    elif suite == "unitarity":
        for k in range(trials or 20):
            add({"N": N, "trial": k}, _unitarity, complex(_cnormal(rng, 1, 0.4)[0]), _a(N, rng))
    elif suite == "triangular":
        for shape in shapes or list(compositions(n, N)):
            u = generic_u(shape.n, rng)
            a = _a(shape.N, rng)
            parts = enumerate_shape(shape)
            for I, J in itertools.product(parts, repeat=2):
                if I == J or not leq(I, J):
                    kind = "diagonal" if I == J else "off-order"
                    add({"lam": list(shape.lam), "I": str(I), "J": str(J), "kind": kind},
                        _triangular, shape.lam, I.word, J.word, u, a)
    elif suite == "transition":
        for I in all_words(N, n):
            word = I.word
            for i in range(1, n):
                for k in range(trials or 3):
                    D = sum(I.shape.cumulative(l) for l in range(1, N))
                    add({"word": "".join(map(str, word)), "i": i, "trial": k}, _transition,
                        i, tuple(word), N, _cnormal(rng, D, 0.5), generic_u(n, rng), _a(N, rng))
    elif suite == "orthogonality":
        for shape in shapes or list(compositions(n, N, positive=True)):
            parts = enumerate_shape(shape)
            u = generic_u(shape.n, rng)
            a = _a(shape.N, rng)
            for J, K in itertools.product(parts, repeat=2):
                add({"lam": list(shape.lam), "J": str(J), "K": str(K)}, _orthogonality,
                    J.word, K.word, shape.N, u, a)
    elif suite == "quasiperiod":
        for I in all_words(N, n):
            word = I.word
            for l in range(1, N):
                for s in range(1, I.shape.cumulative(l) + 1):
                    x = VariableAssignment.random(I.shape, rng, 0.4)
                    add({"word": "".join(map(str, word)), "l": l, "a": s}, _quasiperiod,
                        tuple(word), N, l, s, x.u, x.v, _a(N, rng))
    elif suite == "wheel":
        for I in all_words(N, n):
            word = I.word
            if not any(True for _ in wheel_configurations(I.shape)):
                continue
            add({"word": "".join(map(str, word))}, _wheel, tuple(word), N, int(rng.integers(2**31)))
    elif suite == "shuffle":
        s1 = shapes[0] if shapes else LambdaShape((1,) * N)
        s2 = shape2 or s1
        for I, J in itertools.product(enumerate_shape(s1), enumerate_shape(s2)):
            merged = s1 + s2
            D = row_slices(merged)[-1].stop
            for k in range(trials or 1):
                X = _cnormal(rng, D, 0.5)
                add({"I": str(I), "J": str(J), "check": "closure", "trial": k}, _closure,
                    I.word, J.word, N, X, _a(N, rng))
            if any(True for _ in wheel_configurations(merged)):
                add({"I": str(I), "J": str(J), "check": "wheel"}, _star_wheel, I.word, J.word, N,
                    int(rng.integers(2**31)))
    elif suite == "omega-shuffle":
        for total in range(2, n + 1):
            for m in range(1, total):
                for I in all_words(N, m):
                    for J in all_words(N, total - m):
                        wi, wj = I.word, J.word
                        D = row_slices(concat(I, J).shape)[-1].stop
                        add({"I": str(I), "J": str(J)}, _omega_shuffle, tuple(wi), tuple(wj), N,
                            _cnormal(rng, D, 0.4), _a(N, rng))
    return cases
