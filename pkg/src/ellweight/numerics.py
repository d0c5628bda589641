"""Truncated infinite products, theta functions and the odd brackets [u], [u]*.

Everything here is written in additive ("u-space") coordinates: the
multiplicative variable is z = q**(2u) and every fractional power q**w is
exp(w * log q) with the principal branch of log q.  Functions accept
numpy arrays as well as Python scalars and broadcast elementwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import DomainError, PoleError

POLE_TOL = 1e-13


@dataclass(frozen=True)
class EllipticParams:
    """Base parameters q, r, r* and the product truncation order K.

    ``p = q**(2r)`` and ``p_star = q**(2 r_star)``; ``tau`` is fixed to
    ``-pi i / (r log q)`` so that the shift u -> u + r*tau leaves
    z = q**(2u) invariant.
    """

    q: complex = 0.6
    r: float = 6.0
    r_star: float | None = None
    K: int = 40
    _rs: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rs = self.r - 1.0 if self.r_star is None else self.r_star
        object.__setattr__(self, "_rs", float(rs))
        if not (abs(self.q) < 1 and self.q != 0):
            raise DomainError(f"need 0 < |q| < 1, got q={self.q!r}")
        if self.r <= 0 or rs <= 0:
            raise DomainError(f"need r > 0 and r* > 0, got r={self.r}, r*={rs}")
        if int(self.K) < 1:
            raise DomainError("truncation order K must be positive")
        if abs(self.p) >= 1 or abs(self.p_star) >= 1:
            raise DomainError("nomes p, p* must lie in the unit disc")

    @property
    def rstar(self) -> float:
        return self._rs

    @cached_property
    def log_q(self) -> complex:
        lq = cmath.log(self.q)
        return lq.real if lq.imag == 0 else lq

    @cached_property
    def p(self) -> complex:
        return qpow(2 * self.r, self)

    @cached_property
    def p_star(self) -> complex:
        return qpow(2 * self._rs, self)

    @cached_property
    def tau(self) -> complex:
        return -1j * math.pi / (self.r * self.log_q)

    @cached_property
    def tau_star(self) -> complex:
        return -1j * math.pi / (self._rs * self.log_q)

    def starred(self) -> "EllipticParams":
        """Parameters with (r, p) replaced by (r*, p*)."""
        return replace(self, r=self._rs, r_star=self._rs)

    def with_K(self, K: int) -> "EllipticParams":
        return replace(self, K=int(K))

    def as_dict(self) -> dict:
        q = complex(self.q)
        return {"q": [q.real, q.imag], "r": self.r, "rstar": self._rs, "K": self.K}


def qpow(w, params: EllipticParams):
    """q**w as exp(w log q); broadcasts over arrays."""
    if isinstance(w, np.ndarray):
        return np.exp(w * params.log_q)
    return cmath.exp(w * params.log_q)


DEFAULT_PARAMS = EllipticParams()


def _check_base(a, what="base"):
    if abs(a) >= 1:
        raise DomainError(f"{what} modulus must be < 1, got |{what}|={abs(a):.6g}")


def _K(params, K):
    if K is not None:
        return int(K)
    return (params or DEFAULT_PARAMS).K


def pochhammer1(x, a, params: EllipticParams | None = None, K: int | None = None):
    """(x; a)_inf truncated to K factors."""
    _check_base(a)
    n = _K(params, K)
    pw = complex(a) ** np.arange(n)
    x = np.asarray(x, dtype=complex)
    out = np.prod(1.0 - x[..., None] * pw, axis=-1)
    return out if out.ndim else complex(out)


def pochhammer2(x, a, b, params: EllipticParams | None = None, K: int | None = None):
    """(x; a, b)_inf truncated to m, n < K."""
    _check_base(a)
    _check_base(b)
    n = _K(params, K)
    ar = np.arange(n)
    grid = (complex(a) ** ar)[:, None] * (complex(b) ** ar)[None, :]
    x = np.asarray(x, dtype=complex)
    out = np.prod(1.0 - x[..., None] * grid.ravel(), axis=-1)
    return out if out.ndim else complex(out)


def pochhammer3(x, a, b, c, params: EllipticParams | None = None, K: int | None = None):
    """(x; a, b, c)_inf truncated to l, m, n < K."""
    for base in (a, b, c):
        _check_base(base)
    n = _K(params, K)
    ar = np.arange(n)
    grid = ((complex(a) ** ar)[:, None, None] * (complex(b) ** ar)[None, :, None]
            * (complex(c) ** ar)[None, None, :])
    x = np.asarray(x, dtype=complex)
    out = np.prod(1.0 - x[..., None] * grid.ravel(), axis=-1)
    return out if out.ndim else complex(out)


def _first_zero_index(x, a, b, n):
    ar = np.arange(n)
    grid = (complex(a) ** ar)[:, None] * (complex(b) ** ar)[None, :]
    fac = np.abs(1.0 - complex(x) * grid)
    idx = np.argwhere(fac < POLE_TOL)
    return tuple(int(i) for i in idx[0]) if len(idx) else None


def gamma2(x, a, b, params: EllipticParams | None = None, K: int | None = None):
    """Elliptic gamma Gamma(x; a, b) = (ab/x; a, b) / (x; a, b)."""
    n = _K(params, K)
    # test single factors: other large factors can hide a vanishing one in the product
    idx = _first_zero_index(x, a, b, n)
    if idx is not None:
        raise PoleError(f"Gamma(x;a,b) has a pole at x={x!r} (index {idx})", label=idx)
    return pochhammer2(a * b / x, a, b, K=n) / pochhammer2(x, a, b, K=n)


def gamma3(x, a, b, c, params: EllipticParams | None = None, K: int | None = None):
    """Gamma(x; a, b, c) = (x; a, b, c) (abc/x; a, b, c), an entire function of x != 0."""
    if x == 0:
        raise DomainError("Gamma(x; a, b, c) needs x != 0")
    n = _K(params, K)
    return pochhammer3(x, a, b, c, K=n) * pochhammer3(a * b * c / x, a, b, c, K=n)


def theta_p(z, nome, params: EllipticParams | None = None, K: int | None = None):
    """Theta_p(z) = (z; p)(p/z; p)(p; p)."""
    _check_base(nome, "nome")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("Theta_p(z) needs z != 0")
    n = _K(params, K)
    pw = complex(nome) ** np.arange(n)
    out = (np.prod(1.0 - z[..., None] * pw, axis=-1)
           * np.prod(1.0 - (nome / z)[..., None] * pw, axis=-1)
           * np.prod(1.0 - nome * pw))
    return out if out.ndim else complex(out)


def _bracket(u, r, nome, params, K):
    u = np.asarray(u, dtype=complex)
    lq = params.log_q
    pref = np.exp((u * u / r - u) * lq)
    z = np.exp(2.0 * u * lq)
    out = pref * theta_p(z, nome, K=K if K is not None else params.K)
    return out if out.ndim else complex(out)


def bracket(u, params: EllipticParams = DEFAULT_PARAMS, K: int | None = None):
    """Odd theta function [u] = q**(u^2/r - u) Theta_p(q**(2u))."""
    return _bracket(u, params.r, params.p, params, K)


def bracket_star(u, params: EllipticParams = DEFAULT_PARAMS, K: int | None = None):
    """[u]* = q**(u^2/r* - u) Theta_{p*}(q**(2u))."""
    return _bracket(u, params.rstar, params.p_star, params, K)


def bracket_nome(u, r: float, nome, params: EllipticParams, K: int | None = None):
    """[u] built with an arbitrary (r, nome) pair; used for the q**kappa variants."""
    return _bracket(u, r, nome, params, K)


def bracket_ratio(num_args, den_args, params: EllipticParams = DEFAULT_PARAMS, label="ratio"):
    """prod [num] / prod [den] with a pole check on the denominator."""
    num = np.asarray(bracket(np.asarray(num_args, dtype=complex), params))
    den = np.asarray(bracket(np.asarray(den_args, dtype=complex), params))
    if den.size and np.min(np.abs(den)) < POLE_TOL:
        raise PoleError(f"vanishing bracket in denominator of {label}", label=label)
    return complex(np.prod(num) / np.prod(den))
