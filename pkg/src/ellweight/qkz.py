"""Trace integrands for the face-type elliptic q-KZ equation and a small-rank check.

The trace function Phi(t, z) contains zero-mode exponents (h-eigenvalues and
dynamical parameters) that only become numbers after choosing a sector.
Here they are supplied as scalars through ``QKZParams``:

* (P+h)_{alpha_l} is read from the dynamical parameters as a_l - a_{l+1};
* (P+h)_{epsbar_N} is a_N - mean(a);
* h_{alpha_l} and h_{epsbar_N} come from ``QKZParams.h_alpha`` /
  ``QKZParams.h_epsN``, optionally with an integer offset depending on the
  word (``word_offsets``), see ``sector_exponents``.

Only M <= 2 integration variables are supported by the torus quadrature.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ContourError, DomainError, PoleError
from .numerics import POLE_TOL, EllipticParams, gamma2, gamma3, pochhammer1, pochhammer2, qpow
from .partitions import LambdaShape, Partition
from .rmatrix import DynamicalParams, mu_plus, r_full
from .weights import Convention, VariableAssignment, WTilde


def _default_params() -> EllipticParams:
    # p = 0.05 with q = 0.6
    return EllipticParams(q=0.6, r=math.log(0.05) / (2 * math.log(0.6)))


@dataclass(frozen=True)
class QKZParams:
    """Everything Phi(t, z) needs besides the integration point.

    ``h_alpha`` / ``h_epsN`` left as None take the highest-weight values of
    the sector a: h_{alpha_l} = delta_{a,l} and h_{epsbar_N} = -a/N.
    """

    params: EllipticParams = field(default_factory=_default_params)
    kappa: float = math.log(0.5) / math.log(0.6)
    sector: int = 0
    Pi: DynamicalParams = DynamicalParams((0.37 + 0.21j, -0.15 + 0.1j))
    Upsilon: DynamicalParams = DynamicalParams((0.29 - 0.17j, -0.08 + 0.23j))
    h_alpha: tuple[complex, ...] | None = None
    h_epsN: complex | None = None
    word_offsets: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive so that |q^kappa| < 1")
        if abs(self.q_kappa) >= 1:
            raise DomainError("need |q^kappa| < 1")

    @property
    def q_kappa(self) -> complex:
        return qpow(self.kappa, self.params)

    def next_sector(self, N: int) -> "QKZParams":
        """a -> a' under the cyclic permutation (0 N-1 N-2 ... 1)."""
        return replace(self, sector=(self.sector - 1) % N)

    def kappa_params(self) -> EllipticParams:
        """Parameters whose nome is q^kappa (r -> kappa/2), used for omega^kappa."""
        p = self.params
        return EllipticParams(q=p.q, r=self.kappa / 2, r_star=p.rstar, K=p.K)

    def eigenvalues(self, N: int) -> tuple[list[complex], complex]:
        a = self.sector % N
        if self.h_alpha is None:
            h = [1.0 + 0j if l == a else 0j for l in range(1, N)]
        else:
            h = [complex(self.h_alpha[min(l, len(self.h_alpha) - 1)]) for l in range(N - 1)]
        e = complex(-a / N) if self.h_epsN is None else complex(self.h_epsN)
        return h, e


def zero_weight(I: Partition) -> bool:
    """True iff lambda_1 = ... = lambda_N."""
    return len(set(I.lam)) == 1


def sector_exponents(I: Partition, qp: QKZParams) -> tuple[list[complex], complex]:
    """(h_{alpha_l} for l = 1..N-1, h_{epsbar_N}) used in Phi for the word of I.

    With ``word_offsets`` the alpha_l eigenvalue is raised by the number of
    letters equal to l+1 among mu_1, ..., mu_{lambda^(l)}; for N = 2, n = 2
    this is 0 on the word 12 and 1 on the word 21.
    """
    N = I.N
    h, e = qp.eigenvalues(N)
    if qp.word_offsets:
        for l in range(1, N):
            k = I.cumulative(l)
            h[l - 1] += sum(1 for m in I.word[:k] if m == l + 1)
    return h, e


def c_n(shape: LambdaShape, qp: QKZParams) -> complex:
    """The constant C_n of the evaluated trace."""
    P = qp.params
    N, n = shape.N, shape.n
    p, qk = P.p, qp.q_kappa
    q2, q2N = qpow(2, P), qpow(2 * N, P)
    lam = [shape.cumulative(l) for l in range(1, N)]
    sgn = (-1) ** (n * lam[-1]) if lam else 1
    pairs = sum(x * (x - 1) // 2 for x in lam)
    second = (-1) ** pairs * qpow(pairs * P.rstar / P.r, P)
    a = (pochhammer1(p, p, K=P.K) / pochhammer1(q2, p, K=P.K)
         * gamma2(p, p, qk, K=P.K) / gamma2(q2, p, qk, K=P.K))
    b = (pochhammer2(q2N, p, q2N, K=P.K) / pochhammer2(q2, p, q2N, K=P.K)
         * gamma3(q2, p, qk, q2N, K=P.K) / gamma3(q2N, p, qk, q2N, K=P.K))
    return complex(sgn * second * a ** sum(lam) * b ** n)


def _dyn_alpha(Pi: DynamicalParams, l: int) -> complex:
    return Pi.a[l - 1] - Pi.a[l]


def _dyn_epsN(Pi: DynamicalParams) -> complex:
    return Pi.a[-1] - sum(Pi.a) / Pi.N


def phi_z_part(I: Partition, u: Sequence[complex], Pi: DynamicalParams, qp: QKZParams) -> complex:
    """The t-independent part of Phi(t, z): constants, z-powers and the Gamma double product."""
    P = qp.params
    N, n = I.N, I.n
    if n == 0:
        return 1.0 + 0j
    shape = I.shape
    h_alpha, h_eps = sector_exponents(I, qp)
    lamN1 = shape.cumulative(N - 1)
    out = c_n(shape, qp) * cmath.exp(1j * math.pi * n * h_eps)
    for l in range(1, N):
        out *= qpow((N - l) * shape.cumulative(l) * (_dyn_alpha(Pi, l) - 1) / P.r, P)
    expo = -lamN1 - h_eps + (_dyn_epsN(Pi) + lamN1) / P.r
    u = np.asarray(u, dtype=complex)
    out *= qpow(2 * expo * complex(np.sum(u)), P)
    p, qk, q2, q2N = P.p, qp.q_kappa, qpow(2, P), qpow(2 * N, P)
    for k, l in itertools.permutations(range(n), 2):
        x = qpow(2 * (u[k] - u[l]), P)
        out *= gamma3(q2 * x, p, qk, q2N, K=P.K) / gamma3(q2N * x, p, qk, q2N, K=P.K)
    return complex(out)


def phi_t_part(I: Partition, X: np.ndarray, Pi: DynamicalParams, qp: QKZParams) -> complex:
    """The t-dependent part of Phi on the flat variables X = (v rows, u)."""
    P = qp.params
    N = I.N
    shape = I.shape
    h_alpha, _ = sector_exponents(I, qp)
    p, qk, ps = P.p, qp.q_kappa, P.p_star
    q1 = qpow(1, P)
    X = np.asarray(X, dtype=complex)
    offs, pos = [], 0
    for l in range(1, N):
        offs.append(pos)
        pos += shape.cumulative(l)
    offs.append(pos)

    def row(l):
        k = shape.n if l == N else shape.cumulative(l)
        return X[offs[l - 1]:offs[l - 1] + k]

    out = 1.0 + 0j
    for l in range(1, N):
        vl, vn = row(l), row(l + 1)
        beta = shape.lam[l - 1] - h_alpha[l - 1] + (_dyn_alpha(Pi, l) - shape.cumulative(l)) / P.r
        for va in vl:
            out *= qpow(2 * va * beta, P)
            for vb in vn:
                x = qpow(2 * (va - vb), P)
                den = gamma2(ps * q1 * x, p, qk, K=P.K)
                if abs(den) < POLE_TOL:
                    raise PoleError("zero of Gamma(p* q t/t') in Phi", label=("row", l))
                out *= gamma2(q1 * x, p, qk, K=P.K) / den
        for a, b in itertools.combinations(range(len(vl)), 2):
            x = qpow(2 * (vl[a] - vl[b]), P)
            out *= (gamma2(ps * x, p, qk, K=P.K) * gamma2(ps / x, p, qk, K=P.K)
                    / (gamma2(x, p, qk, K=P.K) * gamma2(1 / x, p, qk, K=P.K)))
    return complex(out)


def _flat(x) -> np.ndarray:
    return x.flat() if isinstance(x, VariableAssignment) else np.asarray(x, dtype=complex)


def phi_trace(I: Partition, x, qp: QKZParams, Pi: DynamicalParams | None = None) -> complex:
    """Phi(t, z) for the shape (and, with word offsets, the word) of I.

    ``x`` is a VariableAssignment or the flat vector (v rows, u); Pi defaults
    to ``qp.Pi``.
    """
    Pi = qp.Pi if Pi is None else Pi
    X = _flat(x)
    u = X[len(X) - I.n:] if I.n else X[:0]
    return phi_z_part(I, u, Pi, qp) * phi_t_part(I, X, Pi, qp)


def omega_with(I: Partition, x, Pi: DynamicalParams, params: EllipticParams) -> complex:
    """omega_I = mu^+ W~_I (unshifted) for an arbitrary parameter set."""
    X = _flat(x)
    u = X[len(X) - I.n:]
    return mu_plus(u, I.N, params) * WTilde(I, Pi, Convention.UNSHIFTED, params)(X)


def pairing_integrand(I: Partition, J: Partition, x, qp: QKZParams,
                      Upsilon: DynamicalParams | None = None,
                      Pi: DynamicalParams | None = None) -> complex:
    """Phi(t, z) omega^kappa_I(t, z, Upsilon) omega_J(t, z, Pi).

    omega^kappa is omega with the nome p replaced by q^kappa.
    """
    Pi = qp.Pi if Pi is None else Pi
    Upsilon = qp.Upsilon if Upsilon is None else Upsilon
    X = _flat(x)
    if I.n == 0:
        return phi_trace(J, X, qp, Pi)
    return (phi_trace(J, X, qp, Pi) * omega_with(I, X, Upsilon, qp.kappa_params())
            * omega_with(J, X, Pi, qp.params))


# ---------------------------------------------------------------------------
# quadrature on |t| = 1

def angle_to_v(theta, params: EllipticParams):
    """v with q^{2v} = e^{i theta}."""
    return 1j * np.asarray(theta) / (2 * params.log_q)


def torus_quadrature(f: Callable[[np.ndarray], complex], M: int, npoints: int,
                     spike: float = 1e8) -> complex:
    """Normalised trapezoidal integral of f over the M-torus, f taking angles.

    A node whose modulus exceeds ``spike`` times the median raises ContourError.
    """
    if M not in (0, 1, 2):
        raise DomainError("torus quadrature supports M <= 2")
    if M == 0:
        return complex(f(np.zeros(0)))
    theta = 2 * np.pi * np.arange(npoints) / npoints
    vals = np.array([f(np.asarray(th)) for th in itertools.product(theta, repeat=M)], dtype=complex)
    mags = np.abs(vals)
    med = np.median(mags)
    if not np.all(np.isfinite(vals)) or (med > 0 and np.max(mags) > spike * med):
        raise ContourError("integrand spikes on the torus: a pole sits on or near the contour")
    return complex(np.mean(vals))


def trace_component(I: Partition, u: Sequence[complex], qp: QKZParams,
                    Pi: DynamicalParams | None = None, npoints: int = 512) -> complex:
    """F^a_{mu}(z; Pi) = torus integral of Phi(t, z) omega_mu(t, z, Pi)."""
    Pi = qp.Pi if Pi is None else Pi
    if not zero_weight(I):
        return 0.0 + 0j
    P = qp.params
    u = np.asarray(u, dtype=complex)
    for x in u:
        if not abs(P.p) < abs(qpow(2 * x, P)) < 1:
            raise DomainError("need |p| < |z_k| < 1 for the trace formula")
    M = I.shape.M
    zpart = phi_z_part(I, u, Pi, qp) * mu_plus(u, I.N, P)
    wt = WTilde(I, Pi, Convention.UNSHIFTED, P)

    def f(theta):
        X = np.concatenate([angle_to_v(theta, P), u])
        return phi_t_part(I, X, Pi, qp) * wt(X)

    return zpart * torus_quadrature(f, M, npoints)


# ---------------------------------------------------------------------------
# the q-KZ check for N = 2, n = 2

@dataclass
class QKZReport:
    residual: float
    ladder: float
    lhs: np.ndarray
    rhs: np.ndarray
    components: dict

    @property
    def passed(self) -> bool:
        return self.residual < 1e-6 and self.ladder < 1e-6


def _qkz_sides(u1, u2, Pi, qp, npoints):
    P = qp.params
    N = 2
    words = [(1, 2), (2, 1)]
    qpa = qp.next_sector(N)
    u = np.array([u1, u2], dtype=complex)
    ush = np.array([u1 + qp.kappa / 2, u2], dtype=complex)
    F_lhs = {w: trace_component(Partition(w, N), ush, qp, Pi, npoints) for w in words}
    R = r_full(u2 - u1 - qp.kappa / 2, Pi, P).entries
    F_rhs = {}
    for w in words:
        F_rhs[w] = trace_component(Partition(w, N), u, qpa, Pi.shift_by_weight(w[0], -1.0), npoints)
    lhs, rhs = [], []
    for m1, m2 in words:
        lhs.append(F_lhs[(m1, m2)])
        tot = 0j
        for n1, n2 in words:
            tot += R[m2 - 1, m1 - 1, n2 - 1, n1 - 1] * F_rhs[(n1, n2)]
        rhs.append(tot)
    return np.array(lhs), np.array(rhs), {"lhs": F_lhs, "rhs": F_rhs}


def check_qkz_n2(u1, u2, qp: QKZParams, npoints: int = 512) -> QKZReport:
    """Residual of F^a(q^kappa z_1, z_2; Pi) = R(q^-kappa z_2/z_1, Pi) Gamma_1 F^{a'}(z_1, z_2; Pi).

    In components (R with output pair first):
    F^a_{m1 m2}(q^k z1, z2; Pi)
        = sum R[(m2, m1), (n2, n1)] F^{a'}_{n1 n2}(z1, z2; Pi q^{-2<epsbar_{n1}, h>}).
    The ladder value compares npoints with 2 npoints.
    """
    lhs, rhs, comps = _qkz_sides(u1, u2, qp.Pi, qp, npoints)
    lhs2, rhs2, _ = _qkz_sides(u1, u2, qp.Pi, qp, 2 * npoints)
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    residual = float(np.max(np.abs(lhs - rhs)) / scale)
    ladder = float(max(np.max(np.abs(lhs - lhs2)), np.max(np.abs(rhs - rhs2))) / scale)
    return QKZReport(residual, ladder, lhs, rhs, comps)


def check_cyclic_n2(u1, u2, qp: QKZParams, npoints: int = 512) -> dict:
    """Per-word residuals of F^a_{m1 m2}(z1, q^k z2; Pi) = F^{a'}_{m2 m1}(z2, z1; Pi q^{-2<epsbar_{m2},h>})."""
    N = 2
    out = {}
    Pi = qp.Pi
    qpa = qp.next_sector(N)
    for m1, m2 in [(1, 2), (2, 1)]:
        lhs = trace_component(Partition((m1, m2), N), [u1, u2 + qp.kappa / 2], qp, Pi, npoints)
        rhs = trace_component(Partition((m2, m1), N), [u2, u1], qpa, Pi.shift_by_weight(m2, -1.0), npoints)
        out[(m1, m2)] = float(abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return out


def cyclic_pointwise_ratio(word: tuple[int, int], theta: float, u1, u2, qp: QKZParams,
                           contour_shift: bool = False) -> complex:
    """Ratio of the two integrands of the cyclic relation at one torus angle.

    Left: Phi omega_{m1 m2} at (z1, q^k z2; Pi) and t (or q^k t with
    ``contour_shift``).  Right: Phi omega_{m2 m1} at (z2, z1; Pi q^{-2<epsbar_{m2},h>})
    in the next sector.  A ratio independent of theta means the two torus
    integrals differ by that constant (after moving the contour if shifted).
    """
    P, Pi = qp.params, qp.Pi
    m1, m2 = word
    I, J = Partition((m1, m2), 2), Partition((m2, m1), 2)
    Pj, qa = Pi.shift_by_weight(m2, -1.0), qp.next_sector(2)
    v = complex(angle_to_v(theta, P))
    XL = np.array([v + (qp.kappa / 2 if contour_shift else 0.0), u1, u2 + qp.kappa / 2])
    XR = np.array([v, u2, u1])
    return (phi_trace(I, XL, qp, Pi) * omega_with(I, XL, Pi, P)
            / (phi_trace(J, XR, qa, Pj) * omega_with(J, XR, Pj, P)))
