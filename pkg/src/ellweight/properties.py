"""Identity checkers for the weight functions: triangularity, transition,
the R-matrix coefficients of permuted weight functions, orthogonality and
quasi-periodicity.

Permutations are tuples in one-line notation (1-indexed).  For a
permutation sigma the permuted weight function is
W~_{sigma,I}(t, z, Pi) = W~_{sigma^{-1}(I)}(t, sigma(z), Pi).
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import PoleError
from .numerics import DEFAULT_PARAMS, POLE_TOL, EllipticParams, bracket
from .partitions import (LambdaShape, Partition, apply_sigma, enumerate_shape, inverse, leq,
                         longest, reduced_word, specialize_zI)
from .rmatrix import DynamicalParams, normalized_residual, rbar
from .weights import (Convention, VariableAssignment, WTilde, compile_h, compile_u,
                      triangular_diagonal)

Perm = tuple[int, ...]


def generic_u(n: int, rng: np.random.Generator | None = None, jitter: float = 0.05) -> np.ndarray:
    """u_a = 0.31 a + 0.17 i a plus a small random jitter."""
    a = np.arange(1, n + 1)
    base = 0.31 * a + 0.17j * a
    if rng is None or jitter == 0:
        return base.astype(complex)
    return base + jitter * (rng.normal(size=n) + 1j * rng.normal(size=n))


def with_retries(fn, rng: np.random.Generator, n: int, tries: int = 5):
    """Call fn(u) with fresh generic u until no PoleError is raised."""
    last = None
    for _ in range(tries):
        try:
            return fn(generic_u(n, rng))
        except PoleError as exc:
            last = exc
    raise last


def zI_point(I: Partition, u_t: Sequence[complex], u_z: Sequence[complex] | None = None) -> np.ndarray:
    """Flat variables with t = z_I built from ``u_t`` and the last row set to ``u_z``."""
    rows = specialize_zI(I, u_t)
    last = np.asarray(u_t if u_z is None else u_z, dtype=complex)
    return np.concatenate([*rows[:-1], last])


def lambda_weight_word(shape: LambdaShape) -> tuple[int, ...]:
    """A word whose letters carry the weight sum_j epsbar_{mu_j} associated with the shape."""
    return tuple(l for l in range(1, shape.N + 1) for _ in range(shape.lam[l - 1]))


def shift_lambda(Pi: DynamicalParams, shape: LambdaShape, c: float) -> DynamicalParams:
    """Pi q^{2c sum_j <epsbar_{mu_j}, h>}."""
    return Pi.shift_by_word(lambda_weight_word(shape), c)


# ---------------------------------------------------------------------------
# W-hat matrices

def w_matrix(sigma: Perm, shape: LambdaShape, u, Pi: DynamicalParams,
             params: EllipticParams = DEFAULT_PARAMS, weights: str = "tilde") -> np.ndarray:
    """M[I, J] = W~_{sigma, J}(z_I, z, Pi) in the enumeration order of the shape.

    ``weights="entire"`` gives the entire W instead of W~.
    """
    parts = enumerate_shape(shape)
    u = np.asarray(u, dtype=complex)
    su = u[np.asarray(sigma) - 1]
    out = np.zeros((len(parts), len(parts)), dtype=complex)
    for j, J in enumerate(parts):
        Jsig, _ = apply_sigma(sigma, J, u)
        f = WTilde(Jsig, Pi, params=params) if weights == "tilde" else compile_u(Jsig, Pi, params=params)
        for i, I in enumerate(parts):
            out[i, j] = f(zI_point(I, u, su))
    return out


def triangularity_report(shape: LambdaShape, u, Pi, params=DEFAULT_PARAMS):
    """(max off-order |W~_J(z_I)| / scale, max relative diagonal error)."""
    parts = enumerate_shape(shape)
    M = w_matrix(tuple(range(1, shape.n + 1)), shape, u, Pi, params)
    scale = max(np.max(np.abs(M)), 1e-300)
    off, diag = 0.0, 0.0
    for i, I in enumerate(parts):
        for j, J in enumerate(parts):
            if not leq(I, J):
                off = max(off, abs(M[i, j]) / scale)
        d = triangular_diagonal(I, u, params)
        diag = max(diag, abs(M[i, i] - d) / abs(d))
    return off, diag


# ---------------------------------------------------------------------------
# transition

def _swap(word, i):
    w = list(word)
    w[i - 1], w[i] = w[i], w[i - 1]
    return tuple(w)


def transition_coefficients(i: int, I: Partition, u, Pi: DynamicalParams,
                            params: EllipticParams = DEFAULT_PARAMS) -> dict:
    """{word': coefficient} with W~_{s_i I}(t, s_i z) = sum coeff W~_{word'}(t, z).

    The coefficient is Rbar(u_i - u_{i+1}, Pi q^{-2 sum_{j>=i} <epsbar_{mu_j}, h>})
    with output pair (mu_i, mu_{i+1}) and input pair (mu'_i, mu'_{i+1}).
    """
    w = I.word
    Ps = Pi.shift_by_word(w[i - 1:], -1.0)
    R = rbar(u[i - 1] - u[i], Ps, params).entries
    out = {}
    for a, b in itertools.product(range(I.N), repeat=2):
        coef = R[w[i - 1] - 1, w[i] - 1, a, b]
        if coef != 0:
            ww = list(w)
            ww[i - 1], ww[i] = a + 1, b + 1
            out[tuple(ww)] = coef
    return out


def check_transition(i: int, I: Partition, x, u, Pi: DynamicalParams,
                     params: EllipticParams = DEFAULT_PARAMS) -> float:
    """Relative residual of the transition identity for the adjacent swap s_i.

    ``x`` holds the flat v-variables (all rows below N), ``u`` the z-row.
    """
    u = np.asarray(u, dtype=complex)
    x = np.asarray(x, dtype=complex)
    su = u.copy()
    su[i - 1], su[i] = u[i], u[i - 1]
    lhs = WTilde(Partition(_swap(I.word, i), I.N), Pi, params=params)(np.concatenate([x, su]))
    X = np.concatenate([x, u])
    terms = [c * WTilde(Partition(w, I.N), Pi, params=params)(X)
             for w, c in transition_coefficients(i, I, u, Pi, params).items()]
    rhs = sum(terms)
    scale = max([abs(lhs)] + [abs(t) for t in terms] + [1e-300])
    return float(abs(lhs - rhs) / scale)


# ---------------------------------------------------------------------------
# coefficient matrices C_sigma and the R-cal matrices

def _step_matrix(i, shape, u, Pi, params, index):
    parts = enumerate_shape(shape)
    C = np.zeros((len(parts), len(parts)), dtype=complex)
    for r, J in enumerate(parts):
        for w, c in transition_coefficients(i, J, u, Pi, params).items():
            C[r, index[w]] += c
    return C


def c_sigma(sigma: Perm, shape: LambdaShape, u, Pi: DynamicalParams,
            params: EllipticParams = DEFAULT_PARAMS, word: Sequence[int] | None = None) -> np.ndarray:
    """C with W~_{sigma, I} = sum_L C[I, L] W~_L, built along a reduced word of sigma.

    ``word`` = (i_1, ..., i_k) means sigma = s_{i_1} ... s_{i_k}.
    """
    n = shape.n
    u = np.asarray(u, dtype=complex)
    parts = enumerate_shape(shape)
    index = {P.word: k for k, P in enumerate(parts)}
    word = list(reduced_word(sigma) if word is None else word)
    C = np.eye(len(parts), dtype=complex)
    tau = tuple(range(1, n + 1))
    for i in word:
        # sigma' = tau s_i:  C' [I, L] = sum_J' C_i(tau z)[tau^{-1} I, J'] C_tau[tau J', L]
        tz = u[np.asarray(tau) - 1]
        Ci = _step_matrix(i, shape, tz, Pi, params, index)
        tinv = inverse(tau)
        rows = [index[tuple(P.word[t - 1] for t in tau)] for P in parts]   # tau^{-1}(I)
        cols = [index[tuple(P.word[t - 1] for t in tinv)] for P in parts]  # tau(J')
        A = Ci[np.ix_(rows, range(len(parts)))]
        B = C[cols, :]
        C = A @ B
        tau = _swap(tau, i)  # tau o s_i in one-line notation
    return C


def rcal(sigma: Perm, sigma_p: Perm, shape: LambdaShape, u, Pi: DynamicalParams,
         params: EllipticParams = DEFAULT_PARAMS, word=None, word_p=None) -> np.ndarray:
    """R-cal^{(sigma, sigma')}(z, Pi) restricted to the shape block.

    Defined by W~_{sigma, I}(Pi) = sum_{I'} R-cal(z, Pi q^{-2 Sigma})[I, I'] W~_{sigma', I'}(Pi),
    i.e. R-cal(z, Pi) = C_sigma C_sigma'^{-1} evaluated at Pi q^{+2 Sigma}.
    """
    Pp = shift_lambda(Pi, shape, +1.0)
    A = c_sigma(sigma, shape, u, Pp, params, word)
    B = c_sigma(sigma_p, shape, u, Pp, params, word_p)
    return A @ np.linalg.inv(B)


def rcal_full(sigma: Perm, sigma_p: Perm, N: int, u, Pi: DynamicalParams,
              params: EllipticParams = DEFAULT_PARAMS) -> np.ndarray:
    """R-cal as an N^n x N^n operator, the direct sum of its shape blocks."""
    u = np.asarray(u, dtype=complex)
    n = len(u)
    dim = N ** n
    out = np.zeros((dim, dim), dtype=complex)
    for lam in itertools.product(range(n + 1), repeat=N):
        if sum(lam) != n:
            continue
        shape = LambdaShape(lam)
        parts = enumerate_shape(shape)
        idx = [sum((m - 1) * N ** (n - 1 - k) for k, m in enumerate(P.word)) for P in parts]
        out[np.ix_(idx, idx)] = rcal(sigma, sigma_p, shape, u, Pi, params)
    return out


def check_reduced_word_independence(sigma: Perm, shape, u, Pi, params=DEFAULT_PARAMS,
                                    words: Sequence[Sequence[int]] | None = None) -> float:
    if words is None:
        words = all_reduced_words(sigma)
    mats = [c_sigma(sigma, shape, u, Pi, params, w) for w in words]
    return max(normalized_residual(m, mats[0]) for m in mats)


def all_reduced_words(sigma: Perm) -> list[list[int]]:
    """Every reduced word of sigma (small n only)."""
    n = len(sigma)
    length = sum(1 for a in range(n) for b in range(a + 1, n) if sigma[a] > sigma[b])

    @lru_cache(maxsize=None)
    def rec(s, k):
        if k == 0:
            return [[]] if s == tuple(range(1, n + 1)) else []
        out = []
        for i in range(1, n):
            if s[i - 1] > s[i]:
                t = list(s)
                t[i - 1], t[i] = t[i], t[i - 1]
                out += [w + [i] for w in rec(tuple(t), k - 1)]
        return out

    return rec(tuple(sigma), length)


def check_rtr(sigma: Perm, sigma_p: Perm, shape, u, Pi, params=DEFAULT_PARAMS) -> float:
    """Residual of  t R-cal(z, Pi q^{-2 Sigma}) = R-cal(z, Pi^{-1})."""
    lhs = rcal(sigma, sigma_p, shape, u, shift_lambda(Pi, shape, -1.0), params).T
    rhs = rcal(sigma, sigma_p, shape, u, Pi.inverse(), params)
    return normalized_residual(lhs, rhs)


def check_winv_w(sigma: Perm, sigma_p: Perm, shape, u, Pi, params=DEFAULT_PARAMS) -> float:
    """Residual of  W-hat_{sigma'}^{-1} W-hat_sigma = t R-cal(z, Pi q^{-2 Sigma})."""
    lhs = np.linalg.solve(w_matrix(sigma_p, shape, u, Pi, params), w_matrix(sigma, shape, u, Pi, params))
    rhs = rcal(sigma, sigma_p, shape, u, shift_lambda(Pi, shape, -1.0), params).T
    return normalized_residual(lhs, rhs)


# ---------------------------------------------------------------------------
# orthogonality

def _pairs(I: Partition, u):
    u = np.asarray(u, dtype=complex)
    for k, l in itertools.combinations(range(I.N), 2):
        for a in I.index_sets[k]:
            for b in I.index_sets[l]:
                yield u[b - 1] - u[a - 1]


def _prod_brackets(args, params):
    args = np.asarray(list(args), dtype=complex)
    if args.size == 0:
        return 1.0 + 0j
    return complex(np.prod(bracket(args, params)))


def q_func(I: Partition, u, params=DEFAULT_PARAMS) -> complex:
    """Q(z_I) = prod_{k<l} prod_{a in I_k, b in I_l} [u_b - u_a + 1]."""
    return _prod_brackets((d + 1 for d in _pairs(I, u)), params)


def r_func(I: Partition, u, params=DEFAULT_PARAMS) -> complex:
    """R(z_I) = prod_{k<l} prod_{a in I_k, b in I_l} [u_b - u_a]."""
    return _prod_brackets(_pairs(I, u), params)


def s_func(I: Partition, u, params=DEFAULT_PARAMS) -> complex:
    """S(z_I) = prod_{l<N} prod_{x, y in I^(l)} [u_y - u_x + 1].

    This is E_lambda(t) = prod_l prod_{a,b} [v^(l)_b - v^(l)_a + 1] at t = z_I,
    the reading of S that satisfies Q(z_I) S(z_I) = H_lambda(z_I).
    """
    u = np.asarray(u, dtype=complex)
    args = []
    for l in range(1, I.N):
        rows = I.rows[l - 1]
        args += [u[y - 1] - u[x - 1] + 1 for x in rows for y in rows]
    return _prod_brackets(args, params)


def h_at_zI(I: Partition, u, params=DEFAULT_PARAMS) -> complex:
    return compile_h(I.shape, Convention.SHIFTED, params)(zI_point(I, u))


def s_diagonal(I: Partition, u, Pi, params=DEFAULT_PARAMS) -> complex:
    """W~_I(z_I, z, Pi) W~_{sigma_0(I)}(z_I, sigma_0(z), Pi^{-1} q^{2 Sigma})."""
    u = np.asarray(u, dtype=complex)
    n = len(u)
    s0 = longest(n)
    Ir, su = apply_sigma(s0, I, u)
    P2 = shift_lambda(Pi.inverse(), I.shape, +1.0)
    return (WTilde(I, Pi, params=params)(zI_point(I, u))
            * WTilde(Ir, P2, params=params)(zI_point(I, u, su)))


def orthogonality_sum(J: Partition, K: Partition, u, Pi: DynamicalParams,
                      params: EllipticParams = DEFAULT_PARAMS):
    """(sum, largest term modulus) for the orthogonality relation."""
    u = np.asarray(u, dtype=complex)
    shape = J.shape
    n = len(u)
    s0 = longest(n)
    Kr, su = apply_sigma(s0, K, u)
    PJ = shift_lambda(Pi.inverse(), shape, +1.0)
    WJ = compile_u(J, PJ, params=params)
    WK = compile_u(Kr, Pi, params=params)
    total, biggest = 0j, 0.0
    for I in enumerate_shape(shape):
        den = q_func(I, u, params) * r_func(I, u, params) * s_func(I, u, params) ** 2
        if abs(den) < POLE_TOL:
            raise PoleError(f"Q R S^2 vanishes at z_I for I={I}", label=str(I))
        term = WJ(zI_point(I, u)) * WK(zI_point(I, u, su)) / den
        total += term
        biggest = max(biggest, abs(term))
    return total, biggest


def check_orthogonality(J: Partition, K: Partition, u, Pi: DynamicalParams,
                        params: EllipticParams = DEFAULT_PARAMS) -> float:
    total, biggest = orthogonality_sum(J, K, u, Pi, params)
    target = 1.0 if J.word == K.word else 0.0
    return float(abs(total - target) / max(biggest, 1.0))


# ---------------------------------------------------------------------------
# quasi-periodicity in a single variable v^(l)_a

def _slot_data(shape: LambdaShape, rows, l: int, a: int):
    """(m, v^(l)_a, sum v^(l+1), sum v^(l-1)) with m = lambda^(l+1) + lambda^(l-1)."""
    upper = shape.n if l + 1 == shape.N else shape.cumulative(l + 1)
    m = upper + shape.cumulative(l - 1)
    below = np.sum(rows[l - 2]) if l >= 2 else 0.0
    return m, rows[l - 1][a], np.sum(rows[l]), below


def w_multiplier(I: Partition, x: VariableAssignment, Pi: DynamicalParams, l: int, a: int,
                 params: EllipticParams = DEFAULT_PARAMS) -> tuple[complex, complex]:
    """Factors picked up by W_I under v^(l)_a -> v^(l)_a + r and + r tau (a 0-indexed)."""
    shape = I.shape
    m, va, up, down = _slot_data(shape, x.rows(), l, a)
    tau, r = params.tau, params.r
    f_r = (-1.0) ** m
    f_rt = ((-np.exp(-1j * np.pi * tau)) ** m
            * np.exp(-2j * np.pi / r * (m * va - up - down - Pi.s(l, l + 1) - shape.lam[l])))
    return complex(f_r), complex(f_rt)


def h_multiplier(shape: LambdaShape, x: VariableAssignment, l: int, a: int,
                 params: EllipticParams = DEFAULT_PARAMS) -> tuple[complex, complex]:
    """Factors picked up by H_lambda under v^(l)_a -> + r and + r tau."""
    m, va, up, down = _slot_data(shape, x.rows(), l, a)
    tau, r = params.tau, params.r
    f_rt = ((-np.exp(-1j * np.pi * tau)) ** m
            * np.exp(-2j * np.pi / r * (m * va - up - down - shape.lam[l] - shape.lam[l - 1])))
    return complex((-1.0) ** m), complex(f_rt)


def wtilde_multiplier(I: Partition, Pi: DynamicalParams, l: int,
                      params: EllipticParams = DEFAULT_PARAMS) -> tuple[complex, complex]:
    """Factors picked up by W~_I: 1 under + r, exp(2 pi i ((P+h)_{l,l+1} - lambda_l)/r) under + r tau."""
    return 1.0 + 0j, complex(np.exp(2j * np.pi / params.r * (Pi.s(l, l + 1) - I.shape.lam[l - 1])))


def check_quasiperiodicity(I: Partition, x: VariableAssignment, Pi: DynamicalParams,
                           params: EllipticParams = DEFAULT_PARAMS, slots=None) -> list[dict]:
    """One record per (l, a) slot with the relative errors of all six multipliers.

    ``slots`` restricts the check to the given (l, a) pairs (a 1-indexed).
    """
    shape = I.shape
    W = compile_u(I, Pi, params=params)
    H = compile_h(shape, params=params)
    Wt = WTilde(I, Pi, params=params)
    X = x.flat()
    offs = [0]
    for l in range(1, I.N):
        offs.append(offs[-1] + shape.cumulative(l))
    out = []
    for l in range(1, I.N):
        for a in range(shape.cumulative(l)):
            if slots is not None and (l, a + 1) not in slots:
                continue
            k = offs[l - 1] + a
            X1, X2 = X.copy(), X.copy()
            X1[k] += params.r
            X2[k] += params.r * params.tau
            errs = {}
            for name, fn, mult in (("W", W, w_multiplier(I, x, Pi, l, a, params)),
                                   ("H", H, h_multiplier(shape, x, l, a, params)),
                                   ("Wtilde", Wt, wtilde_multiplier(I, Pi, l, params))):
                base = fn(X)
                for tag, Y, f in (("r", X1, mult[0]), ("rtau", X2, mult[1])):
                    errs[f"{name}_{tag}"] = float(abs(fn(Y) / (base * f) - 1))
            out.append({"l": l, "a": a + 1, "errors": errs, "max": max(errs.values())})
    return out
