"""The elliptic dynamical R-matrix of type sl_N and its scalar normalisations.

Tensors follow one convention throughout: ``R[m1', m2', m1, m2]`` (0-indexed
labels, output pair first) is the coefficient of v_{m1'} (x) v_{m2'} in the
image of v_{m1} (x) v_{m2}.  Reshaped to an N^2 x N^2 matrix this is the
ordinary matrix of the operator in the row-major basis (m1, m2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import PoleError
from .numerics import (DEFAULT_PARAMS, POLE_TOL, EllipticParams, bracket, gamma2,
                       pochhammer2, qpow)


@dataclass(frozen=True)
class DynamicalParams:
    """Dynamical parameters a_1..a_N with (P+h)_{j,k} = a_j - a_k."""

    a: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))

    @property
    def N(self) -> int:
        return len(self.a)

    def s(self, j: int, k: int) -> complex:
        """(P+h)_{j,k} for 1-indexed j, k."""
        return self.a[j - 1] - self.a[k - 1]

    def shift_by_weight(self, mu: int, c: float = 1.0) -> "DynamicalParams":
        """Pi q^{2c <epsbar_mu, h>}: adds c to a_mu (1-indexed mu)."""
        a = list(self.a)
        a[mu - 1] += c
        return DynamicalParams(tuple(a))

    def shift_by_word(self, word: Sequence[int], c: float = 1.0) -> "DynamicalParams":
        """Repeated shift_by_weight over every letter of a word."""
        out = self
        for mu in word:
            out = out.shift_by_weight(mu, c)
        return out

    def inverse(self) -> "DynamicalParams":
        """Pi -> Pi^{-1}."""
        return DynamicalParams(tuple(-x for x in self.a))

    @classmethod
    def random(cls, N: int, rng: np.random.Generator, scale: float = 1.0) -> "DynamicalParams":
        return cls(tuple(scale * (rng.normal() + 1j * rng.normal()) for _ in range(N)))


def _ratio(num, den, label):
    if abs(den) < POLE_TOL:
        raise PoleError(f"vanishing denominator in {label}", label=label)
    return num / den


def entry_b(u, s, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """b(u, s) = [s+1][s-1][u] / ([s]^2 [u+1])."""
    br = bracket(np.array([s + 1, s - 1, u, s, u + 1]), params)
    return _ratio(br[0] * br[1] * br[2], br[3] ** 2 * br[4], "b(u,s)")


def entry_bbar(u, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """bbar(u) = [u] / [u+1]."""
    br = bracket(np.array([u, u + 1]), params)
    return _ratio(br[0], br[1], "bbar(u)")


def entry_c(u, s, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """c(u, s) = [1][s+u] / ([s][u+1])."""
    br = bracket(np.array([1, s + u, s, u + 1]), params)
    return _ratio(br[0] * br[1], br[2] * br[3], "c(u,s)")


def entry_cbar(u, s, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """cbar(u, s) = [1][s-u] / ([s][u+1])."""
    br = bracket(np.array([1, s - u, s, u + 1]), params)
    return _ratio(br[0] * br[1], br[2] * br[3], "cbar(u,s)")


@dataclass(frozen=True)
class LabeledTensor:
    """An operator on C^N (x) C^N stored as entries[m1', m2', m1, m2]."""

    entries: np.ndarray

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def matrix(self) -> np.ndarray:
        N = self.N
        return self.entries.reshape(N * N, N * N)

    def swapped(self) -> "LabeledTensor":
        """R^{(21)}: the same operator with the two tensor slots exchanged."""
        return LabeledTensor(self.entries.transpose(1, 0, 3, 2))

    def transposed(self) -> "LabeledTensor":
        return LabeledTensor(self.entries.transpose(2, 3, 0, 1))

    def __getitem__(self, key):
        return self.entries[key]

    def to_json(self):
        flat = self.matrix().ravel()
        return [[float(z.real), float(z.imag)] for z in flat]


def rbar(u, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS) -> LabeledTensor:
    """The bare R-matrix Rbar(z, Pi) with z = q^{2u}."""
    N = Pi.N
    R = np.zeros((N, N, N, N), dtype=complex)
    bb = entry_bbar(u, params)
    for j in range(N):
        R[j, j, j, j] = 1.0
    for j1, j2 in itertools.combinations(range(N), 2):
        s = Pi.a[j1] - Pi.a[j2]
        R[j1, j2, j1, j2] = entry_b(u, s, params)
        R[j2, j1, j2, j1] = bb
        R[j1, j2, j2, j1] = entry_c(u, s, params)
        R[j2, j1, j1, j2] = entry_cbar(u, s, params)
    return LabeledTensor(R)


def _curly(z, N, params):
    """{z} = (z; p, q^{2N})_inf."""
    return pochhammer2(z, params.p, qpow(2 * N, params), K=params.K)


def rho_tilde(u, N: int, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    p = params.p
    z = qpow(2 * u, params)
    q2, q2N = qpow(2, params), qpow(2 * N, params)
    c = lambda x: _curly(x, N, params)
    num = c(q2N / q2 * z) * c(q2 * z) * c(p * q2N / z) * c(p / z)
    den = c(q2N * z) * c(z) * c(p * q2N / q2 / z) * c(p * q2 / z)
    return _ratio(num, den, "rho_tilde")


def rho_plus(u, N: int, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """rho^+(z) = q^{-(N-1)/N} z^{(N-1)/(rN)} rho_tilde(z)."""
    pref = qpow(-(N - 1) / N + 2 * u * (N - 1) / (params.r * N), params)
    return pref * rho_tilde(u, N, params)


def mu_scalar(u, N: int, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """mu(z), the normalisation making R = mu Rbar the vertex-operator exchange matrix.

    The exponent of z uses r*, which is r - 1 at level one.
    """
    p = params.p
    z = qpow(2 * u, params)
    q2, q2N = qpow(2, params), qpow(2 * N, params)
    c = lambda x: _curly(x, N, params)
    expo = -params.rstar * (N - 1) / (params.r * N)
    num = c(p * q2N / q2 * z) * c(q2 * z) * c(p / z) * c(q2N / z)
    den = c(p * z) * c(q2N * z) * c(p * q2N / q2 / z) * c(q2 / z)
    return qpow(2 * u * expo, params) * _ratio(num, den, "mu(z)")


def mu_plus(us: Sequence[complex], N: int, params: EllipticParams = DEFAULT_PARAMS) -> complex:
    """mu^+(z_1..z_n) = prod_{k<l} (-)^{(N-1)/N} z_k^{r*(N-1)/(rN)} Gamma(q^2 z_k/z_l)/Gamma(q^{2N} z_k/z_l)."""
    us = [complex(x) for x in us]
    p, q2N = params.p, qpow(2 * N, params)
    sign = np.exp(1j * math.pi * (N - 1) / N)
    expo = params.rstar * (N - 1) / (params.r * N)
    out = 1.0 + 0j
    for k, l in itertools.combinations(range(len(us)), 2):
        x = qpow(2 * (us[k] - us[l]), params)
        g = gamma2(qpow(2, params) * x, p, q2N, K=params.K) / gamma2(q2N * x, p, q2N, K=params.K)
        out *= sign * qpow(2 * us[k] * expo, params) * g
    return complex(out)


def r_full(u, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS) -> LabeledTensor:
    """R(z, Pi) = mu(z) Rbar(z, Pi)."""
    return LabeledTensor(mu_scalar(u, Pi.N, params) * rbar(u, Pi, params).entries)


def r_plus(u, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS) -> LabeledTensor:
    """R^+(z, Pi) = rho^+(z) Rbar(z, Pi)."""
    return LabeledTensor(rho_plus(u, Pi.N, params) * rbar(u, Pi, params).entries)


# ---------------------------------------------------------------------------
# embedding two-site operators into (C^N)^{(x) n}

def basis_states(N: int, n: int):
    """All label tuples (0-indexed) in row-major order."""
    return list(itertools.product(range(N), repeat=n))


def state_index(labels: Sequence[int], N: int) -> int:
    idx = 0
    for m in labels:
        idx = idx * N + m
    return idx


def embed(n: int, N: int, i: int, j: int,
          block: Callable[[tuple[int, ...]], np.ndarray]) -> np.ndarray:
    """Matrix of a two-site operator acting on slots i, j (1-indexed, i != j).

    ``block(labels)`` returns the N x N x N x N tensor (output slots first,
    ordered as (slot i, slot j)) to use when the other slots carry
    ``labels``; those labels are untouched by the operator, so dynamical
    shifts that depend on them are well defined.
    """
    dim = N ** n
    out = np.zeros((dim, dim), dtype=complex)
    others = [k for k in range(n) if k not in (i - 1, j - 1)]
    for rest in itertools.product(range(N), repeat=len(others)):
        labels = [0] * n
        for k, m in zip(others, rest):
            labels[k] = m
        T = block(tuple(labels))
        for a, b, c, d in itertools.product(range(N), repeat=4):
            val = T[a, b, c, d]
            if val == 0:
                continue
            lo = list(labels)
            lo[i - 1], lo[j - 1] = a, b
            li = list(labels)
            li[i - 1], li[j - 1] = c, d
            out[state_index(lo, N), state_index(li, N)] += val
    return out


def _shift_by_slots(Pi: DynamicalParams, labels, slots, c=1.0) -> DynamicalParams:
    for k in slots:
        Pi = Pi.shift_by_weight(labels[k - 1] + 1, c)
    return Pi


def dybe_sides(u1, u2, u3, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS,
               sign: float = 1.0, rfunc=rbar):
    """Both sides of the dynamical Yang-Baxter equation as N^3 x N^3 matrices.

    R12(s + h3) R13(s) R23(s + h1) = R23(s) R13(s + h2) R12(s), where
    "s + h_k" adds ``sign`` to the dynamical coordinate of the label
    carried by slot k.
    """
    N = Pi.N

    def op(i, j, u, shift_slot):
        def block(labels):
            P = Pi if shift_slot is None else _shift_by_slots(Pi, labels, [shift_slot], sign)
            return rfunc(u, P, params).entries
        return embed(3, N, i, j, block)

    lhs = op(1, 2, u1 - u2, 3) @ op(1, 3, u1 - u3, None) @ op(2, 3, u2 - u3, 1)
    rhs = op(2, 3, u2 - u3, None) @ op(1, 3, u1 - u3, 2) @ op(1, 2, u1 - u2, None)
    return lhs, rhs


def normalized_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(lhs)), 1e-300)
    return float(np.max(np.abs(lhs - rhs)) / scale)


def check_dybe(u1, u2, u3, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS) -> float:
    """Max-norm residual of the dynamical Yang-Baxter equation for Rbar.

    Scalar normalisations cancel between the two sides, so Rbar suffices.
    """
    return normalized_residual(*dybe_sides(u1, u2, u3, Pi, params))


def check_unitarity(u, Pi: DynamicalParams, params: EllipticParams = DEFAULT_PARAMS,
                    rfunc=r_full) -> float:
    """Residual of R(z, Pi) R^{(21)}(1/z, Pi) = id."""
    A = rfunc(u, Pi, params).matrix()
    B = rfunc(-u, Pi, params).swapped().matrix()
    prod = A @ B
    return float(np.max(np.abs(prod - np.eye(prod.shape[0]))))
