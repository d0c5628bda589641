"""The star (shuffle) product on symmetric quasi-periodic functions and wheel checks.

A ``WeightFunctionHandle`` wraps an evaluator ``f(X, Pi)`` on the flat
variable vector X = (v^(1), ..., v^(N-1), u) together with its shape and
the word that drives dynamical shifts in products.

Because the factors F and G of a product are symmetric in their own rows
and Xi is symmetric under permutations inside the F-part and inside the
G-part of each merged row, ``Sym / prod lambda^(l)! lambda'^(l)!`` equals
the sum over shuffles (choices of which merged variables feed F).  The
shuffle sum is what ``star`` evaluates; ``literal=True`` evaluates the
full symmetrisation instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PoleError
from .numerics import DEFAULT_PARAMS, POLE_TOL, EllipticParams, bracket, gamma2, qpow
from .partitions import LambdaShape, Partition, concat
from .rmatrix import DynamicalParams, mu_plus
from .weights import Convention, WTilde, compile_h, compile_u

Evaluator = Callable[[np.ndarray, DynamicalParams], complex]


def row_slices(shape: LambdaShape) -> list[slice]:
    """Slices of rows v^(1), ..., v^(N-1), u inside the flat vector."""
    out, pos = [], 0
    for l in range(1, shape.N):
        k = shape.cumulative(l)
        out.append(slice(pos, pos + k))
        pos += k
    out.append(slice(pos, pos + shape.n))
    return out


def split_rows(X: np.ndarray, shape: LambdaShape) -> list[np.ndarray]:
    return [X[s] for s in row_slices(shape)]


def join_rows(rows: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(r, dtype=complex) for r in rows])


@dataclass(frozen=True)
class WeightFunctionHandle:
    """A symmetric function of the rows of a shape, with dynamical bookkeeping."""

    shape: LambdaShape
    word: tuple[int, ...]
    evaluator: Evaluator = field(compare=False)
    convention: Convention = Convention.SHIFTED
    entire: Evaluator | None = field(default=None, compare=False)

    @property
    def N(self) -> int:
        return self.shape.N

    def __call__(self, X, Pi: DynamicalParams) -> complex:
        return complex(self.evaluator(np.asarray(X, dtype=complex), Pi))

    def numerator(self, X, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS) -> complex:
        """H_lambda times the function (directly, when an entire form is known)."""
        X = np.asarray(X, dtype=complex)
        if self.entire is not None:
            return complex(self.entire(X, Pi))
        H = compile_h(self.shape, self.convention, params)(X)
        return complex(H * self.evaluator(X, Pi))


def unit_handle(N: int, convention: Convention = Convention.SHIFTED) -> WeightFunctionHandle:
    """The constant 1 in degree zero."""
    return WeightFunctionHandle(LambdaShape((0,) * N), (), lambda X, Pi: 1.0 + 0j, convention,
                                entire=lambda X, Pi: 1.0 + 0j)


def wtilde_handle(I: Partition, params: EllipticParams = DEFAULT_PARAMS,
                  convention: Convention = Convention.SHIFTED) -> WeightFunctionHandle:
    cache = {}

    def plans(Pi):
        key = Pi.a
        if key not in cache:
            cache.clear()
            cache[key] = (WTilde(I, Pi, convention, params), compile_u(I, Pi, convention, params))
        return cache[key]

    return WeightFunctionHandle(I.shape, I.word, lambda X, Pi: plans(Pi)[0](X), convention,
                                entire=lambda X, Pi: plans(Pi)[1](X))


def omega_handle(I: Partition, params: EllipticParams = DEFAULT_PARAMS) -> WeightFunctionHandle:
    """omega_I = mu^+(z) W~_I (unshifted convention)."""
    base = wtilde_handle(I, params, Convention.UNSHIFTED)
    n = I.n

    def ev(X, Pi):
        return mu_plus(X[len(X) - n:], I.N, params) * base(X, Pi)

    return WeightFunctionHandle(I.shape, I.word, ev, Convention.UNSHIFTED)


# ---------------------------------------------------------------------------
# the Xi factors

def _xi_core(rows_f, rows_g, params, half):
    num, den = [], []
    N = len(rows_f)
    for l in range(N - 1):
        for va in rows_f[l]:
            for vb in rows_g[l + 1]:
                num.append(vb - va - half)
                den.append(vb - va + 1 - half)
            for vc in rows_g[l]:
                num.append(vc - va + 1)
                den.append(vc - va)
    if not num:
        return 1.0 + 0j
    d = np.asarray(bracket(np.asarray(den, dtype=complex), params))
    if np.min(np.abs(d)) < POLE_TOL:
        raise PoleError("vanishing denominator in Xi", label="xi")
    return complex(np.prod(bracket(np.asarray(num, dtype=complex), params)) / np.prod(d))


def xi_factor(rows_f: Sequence[np.ndarray], rows_g: Sequence[np.ndarray],
              params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """Xi(t, t', z, z') for the shifted convention; rows include the z-row last."""
    return _xi_core(rows_f, rows_g, params, 0.0)


def mu_plus_mn(z, zp, N: int, params: EllipticParams = DEFAULT_PARAMS, printed: bool = False) -> complex:
    """Cross factor mu^+_{m,n}(z, z') between two blocks of points.

    By default the Gamma arguments are z_k / z'_l, which makes
    mu^+(z u z') = mu^+(z) mu^+(z') mu^+_{m,n}(z, z').  ``printed=True``
    uses the reversed ratio z'_l / z_k instead.
    """
    p, q2N, q2 = params.p, qpow(2 * N, params), qpow(2, params)
    sign = np.exp(1j * math.pi * (N - 1) / N)
    expo = params.rstar * (N - 1) / (params.r * N)
    out = 1.0 + 0j
    for uk in np.atleast_1d(z):
        for ul in np.atleast_1d(zp):
            d = (ul - uk) if printed else (uk - ul)
            x = qpow(2 * d, params)
            out *= sign * qpow(2 * uk * expo, params) * gamma2(q2 * x, p, q2N, K=params.K) \
                / gamma2(q2N * x, p, q2N, K=params.K)
    return complex(out)


def xi_tilde(rows_f, rows_g, N: int, params: EllipticParams = DEFAULT_PARAMS, printed: bool = False) -> complex:
    """Xi~ = mu^+_{m,n}(z, z') times the half-shifted Xi product."""
    return mu_plus_mn(rows_f[-1], rows_g[-1], N, params, printed) * _xi_core(rows_f, rows_g, params, 0.5)


# ---------------------------------------------------------------------------
# star product

def _shuffles(total: int, k: int, literal: bool):
    """Index orders of a merged row: the first k feed F, the rest feed G."""
    if literal:
        yield from itertools.permutations(range(total))
        return
    for comb in itertools.combinations(range(total), k):
        rest = tuple(i for i in range(total) if i not in comb)
        yield comb + rest


def star(F: WeightFunctionHandle, G: WeightFunctionHandle,
         params: EllipticParams = DEFAULT_PARAMS, literal: bool = False,
         omega: bool = False, printed_mu: bool = False) -> WeightFunctionHandle:
    """The star product F * G as a handle on the merged shape.

    ``omega=True`` uses Xi~ (with mu^+_{m,n}) in place of Xi.
    """
    if F.N != G.N:
        raise ValueError("star product needs equal N")
    N = F.N
    sf, sg = F.shape, G.shape
    shape = sf + sg
    m = sf.n
    norm = 1.0
    if literal:
        for l in range(1, N):
            norm *= math.factorial(sf.cumulative(l)) * math.factorial(sg.cumulative(l))

    def ev(X, Pi):
        rows = split_rows(np.asarray(X, dtype=complex), shape)
        Pf = Pi.shift_by_word(G.word, -1.0)
        choices = [list(_shuffles(len(rows[l]), sf.cumulative(l + 1), literal)) for l in range(N - 1)]
        total = 0j
        for combo in itertools.product(*choices):
            rf, rg = [], []
            for l, order in enumerate(combo):
                k = sf.cumulative(l + 1)
                row = rows[l][list(order)]
                rf.append(row[:k])
                rg.append(row[k:])
            rf.append(rows[-1][:m])
            rg.append(rows[-1][m:])
            xi = xi_tilde(rf, rg, N, params, printed_mu) if omega else xi_factor(rf, rg, params)
            total += F(join_rows(rf), Pf) * G(join_rows(rg), Pi) * xi
        return total / norm

    return WeightFunctionHandle(shape, F.word + G.word, ev, F.convention)


def check_star_closure(I: Partition, J: Partition, X, Pi: DynamicalParams,
                       params: EllipticParams = DEFAULT_PARAMS) -> float:
    """Relative residual of W~_I * W~_J = W~_{I+J} at X (shifted convention)."""
    lhs = star(wtilde_handle(I, params), wtilde_handle(J, params), params)(X, Pi)
    rhs = WTilde(concat(I, J), Pi, params=params)(X)
    return float(abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300))


def check_omega_shuffle(I: Partition, J: Partition, X, Pi: DynamicalParams,
                        params: EllipticParams = DEFAULT_PARAMS, printed_mu: bool = False) -> float:
    """Relative residual of omega_I * omega_J = omega_{I+J} at X."""
    if I.n == 0 or J.n == 0:
        return 0.0
    lhs = star(omega_handle(I, params), omega_handle(J, params), params, omega=True,
               printed_mu=printed_mu)(X, Pi)
    rhs = omega_handle(concat(I, J), params)(X, Pi)
    return float(abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300))


# ---------------------------------------------------------------------------
# wheel conditions

def wheel_configurations(shape: LambdaShape):
    """(l, eps, a, b, c) with l in 1..N-1, l+eps in 1..N, a != b in row l, c in row l+eps.

    a and b are integration variables; c may sit in the z-row.
    """
    lens = [shape.cumulative(l) for l in range(1, shape.N)] + [shape.n]
    for l in range(1, shape.N):
        for eps in (1, -1):
            k = l + eps
            if not 1 <= k <= shape.N or lens[l - 1] < 2 or lens[k - 1] < 1:
                continue
            for a, b in itertools.permutations(range(lens[l - 1]), 2):
                for c in range(lens[k - 1]):
                    yield l, eps, a, b, c


def _entire_at(F, X, Pi, index, params, radius=0.05, nodes=24):
    """H F at X, as the mean of H F over a small circle in coordinate ``index``.

    H F is entire, so the circle mean reproduces its centre value even
    when F alone has a pole there.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = []
    for t in theta:
        Y = X.copy()
        Y[index] += radius * np.exp(1j * t)
        vals.append(F.numerator(Y, Pi, params))
    return complex(np.mean(vals))


def check_wheel(F: WeightFunctionHandle, Pi: DynamicalParams, rng: np.random.Generator,
                params: EllipticParams = DEFAULT_PARAMS, draws: int = 3, scale: float = 0.5,
                configurations=None) -> float:
    """max |H F| over wheel configurations, relative to |H F| at nearby generic points.

    Returns 0.0 when the shape admits no wheel.
    """
    shape = F.shape
    confs = list(wheel_configurations(shape) if configurations is None else configurations)
    if not confs:
        return 0.0
    sl = row_slices(shape)
    D = sl[-1].stop
    worst = 0.0
    for _ in range(draws):
        X = scale * (rng.normal(size=D) + 1j * rng.normal(size=D))
        ref = max(abs(F.numerator(X + 0.1 * (rng.normal(size=D) + 1j * rng.normal(size=D)), Pi, params))
                  for _ in range(2))
        for l, eps, a, b, c in confs:
            Y = X.copy()
            w = Y[sl[l + eps - 1].start + c]
            ia, ib = sl[l - 1].start + a, sl[l - 1].start + b
            Y[ia] = w + eps
            Y[ib] = w
            if F.entire is not None:
                val = F.numerator(Y, Pi, params)
            else:
                # F itself has a pole on the wheel; circle around it in v^(l)_a
                val = _entire_at(F, Y, Pi, ia, params)
            worst = max(worst, abs(val) / max(ref, 1e-300))
    return worst
