"""Elliptic weight functions W_I, W~_I = W_I / H_lambda and omega_I = mu^+ W~_I.

Each weight function is compiled once into a ``WeightPlan``: a list of
bracket factors of the form [X[i] - X[j] + const] over a flat variable
vector X = (v^(1), ..., v^(N-1), u), plus the index permutations that
realise the symmetrisation over every row v^(l).  Evaluation is then a
vectorised product of brackets summed over permutations, and accepts a
leading batch axis so quadrature nodes can be evaluated in one call.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PoleError
from .numerics import DEFAULT_PARAMS, POLE_TOL, EllipticParams, bracket
from .partitions import LambdaShape, Partition, dyn_shift_direct
from .rmatrix import DynamicalParams, mu_plus


class Convention(enum.Enum):
    SHIFTED = "shifted"
    UNSHIFTED = "unshifted"


@dataclass
class VariableAssignment:
    """u_1..u_n together with the rows v^(1), ..., v^(N-1).

    ``v[l-1]`` holds v^(l)_1..v^(l)_{lambda^(l)}; the N-th row is u itself.
    """

    u: np.ndarray
    v: list[np.ndarray]

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        self.v = [np.asarray(row, dtype=complex) for row in self.v]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "VariableAssignment":
        """From a full list of rows v^(1), ..., v^(N) with the last being u."""
        return cls(rows[-1], list(rows[:-1]))

    @classmethod
    def random(cls, shape: LambdaShape, rng: np.random.Generator, scale: float = 0.6):
        rows = [scale * (rng.normal(size=shape.cumulative(l)) + 1j * rng.normal(size=shape.cumulative(l)))
                for l in range(1, shape.N)]
        u = scale * (rng.normal(size=shape.n) + 1j * rng.normal(size=shape.n))
        return cls(u, rows)

    def flat(self) -> np.ndarray:
        return np.concatenate([*self.v, self.u]) if self.v else self.u.copy()

    def rows(self) -> list[np.ndarray]:
        return [*self.v, self.u]

    def shifted_rows(self, offsets: Sequence[float]) -> "VariableAssignment":
        """Add offsets[l-1] to every entry of row v^(l) (l < N)."""
        return VariableAssignment(self.u, [row + c for row, c in zip(self.v, offsets)])


def _offsets(shape: LambdaShape) -> list[int]:
    """Start index of row l (1-indexed, l = 1..N) in the flat vector."""
    out, pos = [], 0
    for l in range(1, shape.N):
        out.append(pos)
        pos += shape.cumulative(l)
    out.append(pos)
    return out


def _row_length(shape: LambdaShape, l: int) -> int:
    return shape.n if l == shape.N else shape.cumulative(l)


def sym_permutations(shape: LambdaShape) -> np.ndarray:
    """All index maps permuting each row v^(l), l < N, inside the flat vector."""
    offs = _offsets(shape)
    D = offs[-1] + shape.n
    per_row = [list(itertools.permutations(range(shape.cumulative(l)))) for l in range(1, shape.N)]
    perms = []
    for combo in itertools.product(*per_row):
        idx = np.arange(D)
        for l, p in enumerate(combo, start=1):
            idx[offs[l - 1]:offs[l - 1] + len(p)] = offs[l - 1] + np.asarray(p, dtype=int)
        perms.append(idx)
    return np.asarray(perms, dtype=int).reshape(len(perms), D)


class _Factors:
    """Accumulates bracket factors [X[ip] - X[im] + c]; index -1 stands for 0."""

    def __init__(self):
        self.ip, self.im, self.c = [], [], []

    def add(self, ip, im, c):
        self.ip.append(ip)
        self.im.append(im)
        self.c.append(complex(c))

    def arrays(self):
        return (np.asarray(self.ip, dtype=int), np.asarray(self.im, dtype=int),
                np.asarray(self.c, dtype=complex))


@dataclass
class WeightPlan:
    """A compiled W_I: symmetrised product of bracket factors."""

    shape: LambdaShape
    num: tuple
    den: tuple
    scalar: complex
    perms: np.ndarray
    params: EllipticParams
    label: str = ""

    @property
    def dim(self) -> int:
        return self.perms.shape[1]

    def _brackets(self, X, factors):
        ip, im, c = factors
        if len(ip) == 0:
            return np.ones(X.shape[:-1] + (0,), dtype=complex)
        Xz = np.concatenate([X, np.zeros(X.shape[:-1] + (1,), dtype=complex)], axis=-1)
        args = Xz[..., ip] - Xz[..., im] + c
        return np.asarray(bracket(args, self.params))

    def terms(self, X: np.ndarray, symmetrize: bool = True) -> np.ndarray:
        """Per-permutation values, shape batch + (T,)."""
        X = np.asarray(X, dtype=complex)
        perms = self.perms if symmetrize else self.perms[:1]
        Xp = X[..., perms]
        nb = self._brackets(Xp, self.num)
        db = self._brackets(Xp, self.den)
        if db.size and np.min(np.abs(db)) < POLE_TOL:
            raise PoleError(f"vanishing column bracket in {self.label}", label=self.label)
        return self.scalar * np.prod(nb, axis=-1) / np.prod(db, axis=-1)

    def __call__(self, X: np.ndarray, symmetrize: bool = True):
        out = np.sum(self.terms(X, symmetrize), axis=-1)
        return out if np.ndim(out) else complex(out)


def _half(conv: Convention) -> float:
    return 0.0 if conv is Convention.SHIFTED else 0.5


def compile_u(I: Partition, Pi: DynamicalParams, conv: Convention = Convention.SHIFTED,
              params: EllipticParams = DEFAULT_PARAMS) -> WeightPlan:
    """The product U_I compiled into a plan whose symmetrisation gives W_I."""
    shape = I.shape
    N = I.N
    offs = _offsets(shape)
    h = _half(conv)
    num, den = _Factors(), _Factors()
    scalar = 1.0 + 0j
    one = complex(bracket(1.0, params))
    for l in range(1, N):
        rows_l, rows_n = I.rows[l - 1], I.rows[l]
        for a, ia in enumerate(rows_l, start=1):
            xa = offs[l - 1] + a - 1
            for b, ib in enumerate(rows_n, start=1):
                xb = offs[l] + b - 1
                if ib == ia:
                    s = ia
                    ms = I.word[s - 1]
                    dyn = Pi.s(ms, l + 1) - dyn_shift_direct(I, s, l)
                    d = complex(bracket(dyn, params))
                    if abs(d) < POLE_TOL:
                        raise PoleError(f"dynamical denominator [(P+h)-C] vanishes at row {s}, column {l}",
                                        label=("dyn", s, l))
                    scalar *= one / d
                    num.add(xb, xa, dyn - h)
                elif ib > ia:
                    num.add(xb, xa, -h)
                else:
                    num.add(xb, xa, 1.0 - h)
            for b in range(a + 1, len(rows_l) + 1):
                xb = offs[l - 1] + b - 1
                num.add(xb, xa, 1.0)
                den.add(xb, xa, 0.0)
    return WeightPlan(shape, num.arrays(), den.arrays(), scalar, sym_permutations(shape), params,
                      label=f"W_{I}")


def compile_h(shape: LambdaShape, conv: Convention = Convention.SHIFTED,
              params: EllipticParams = DEFAULT_PARAMS) -> WeightPlan:
    """H_lambda = prod_l prod_{a,b} [v^(l+1)_b - v^(l)_a + 1] (+1/2 when unshifted)."""
    offs = _offsets(shape)
    c = 1.0 - _half(conv)
    num = _Factors()
    for l in range(1, shape.N):
        for a in range(_row_length(shape, l)):
            for b in range(_row_length(shape, l + 1)):
                num.add(offs[l] + b, offs[l - 1] + a, c)
    D = offs[-1] + shape.n
    return WeightPlan(shape, num.arrays(), _Factors().arrays(), 1.0 + 0j,
                      np.arange(D)[None, :], params, label=f"H_{shape}")


def _flat(x) -> np.ndarray:
    return x.flat() if isinstance(x, VariableAssignment) else np.asarray(x, dtype=complex)


def u_term(I, x, Pi, conv=Convention.SHIFTED, params=DEFAULT_PARAMS) -> complex:
    """U_I at x, without symmetrisation."""
    return compile_u(I, Pi, conv, params)(_flat(x), symmetrize=False)


def symmetrize(f, shape: LambdaShape):
    """Plain sum of f over all permutations of each row v^(l), l < N.

    ``f`` takes a VariableAssignment; the result is again such a function.
    """
    perms = sym_permutations(shape)
    offs = _offsets(shape)

    def g(x: VariableAssignment):
        X = x.flat()
        total = 0j
        for p in perms:
            Y = X[p]
            rows = [Y[offs[l - 1]:offs[l - 1] + shape.cumulative(l)] for l in range(1, shape.N)]
            total += f(VariableAssignment(x.u, rows))
        return total

    return g


def w_entire(I, x, Pi, conv=Convention.SHIFTED, params=DEFAULT_PARAMS):
    """W_I = Sym U_I."""
    return compile_u(I, Pi, conv, params)(_flat(x))


def h_lambda(shape, x, conv=Convention.SHIFTED, params=DEFAULT_PARAMS):
    return compile_h(shape, conv, params)(_flat(x))


class WTilde:
    """W~_I = W_I / H_lambda as a reusable compiled evaluator."""

    def __init__(self, I: Partition, Pi: DynamicalParams, conv=Convention.SHIFTED,
                 params: EllipticParams = DEFAULT_PARAMS):
        self.I, self.Pi, self.conv, self.params = I, Pi, conv, params
        self.w = compile_u(I, Pi, conv, params)
        self.h = compile_h(I.shape, conv, params)

    def __call__(self, x):
        X = _flat(x)
        H = np.asarray(self.h(X))
        if np.min(np.abs(H)) < POLE_TOL:
            raise PoleError(f"H_lambda vanishes for W~_{self.I}", label="H")
        out = np.asarray(self.w(X)) / H
        return out if out.ndim else complex(out)


def w_tilde(I, x, Pi, conv=Convention.SHIFTED, params=DEFAULT_PARAMS):
    return WTilde(I, Pi, conv, params)(x)


def omega(I, x, Pi, params=DEFAULT_PARAMS):
    """omega_I = mu^+(z) W~_I in the unshifted convention."""
    u = x.u if isinstance(x, VariableAssignment) else _flat(x)[-I.n:]
    return mu_plus(np.atleast_1d(u), I.N, params) * w_tilde(I, x, Pi, Convention.UNSHIFTED, params)


def triangular_diagonal(I: Partition, u: Sequence[complex], params=DEFAULT_PARAMS) -> complex:
    """prod_{k<l} prod_{a in I_k, b in I_l, a<b} [u_b - u_a] / [u_b - u_a + 1]."""
    u = np.asarray(u, dtype=complex)
    num, den = [], []
    for k, l in itertools.combinations(range(I.N), 2):
        for a in I.index_sets[k]:
            for b in I.index_sets[l]:
                if a < b:
                    num.append(u[b - 1] - u[a - 1])
                    den.append(u[b - 1] - u[a - 1] + 1)
    if not num:
        return 1.0 + 0j
    return complex(np.prod(bracket(np.array(num), params)) / np.prod(bracket(np.array(den), params)))
