"""Command-line front end.

    ellweight eval KIND [options]        evaluate a single quantity
    ellweight verify SUITE [options]     run a verification suite
    ellweight qkz-check [options]        the N = 2, n = 2 q-KZ residual

Output is JSON lines: a header record echoing the effective configuration,
then one record per result.  Complex numbers are [re, im] pairs.  Exit
codes: 0 success (all checks pass), 1 some check failed, 2 parse error,
3 pole or domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from typing import Any, Sequence

import numpy as np

from .errors import ContourError, DomainError, PoleError
from .numerics import EllipticParams, bracket, qpow, theta_p
from .partitions import LambdaShape, Partition, from_word
from .properties import zI_point
from .qkz import QKZParams, check_qkz_n2, phi_trace
from .rmatrix import DynamicalParams, rbar, r_full
from .suites import SUITES, build_cases, run_case
from .weights import Convention, VariableAssignment, compile_h, compile_u, omega, triangular_diagonal, w_tilde

EVAL_KINDS = ("theta", "bracket", "rmatrix", "weight", "omega", "hlambda", "phi")

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3


class ParseError(Exception):
    pass


# ---------------------------------------------------------------------------
# JSON helpers

def to_jsonable(obj: Any) -> Any:
    """Recursively convert complex numbers to [re, im] and numpy types to Python ones."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def parse_complex(text: Any) -> complex:
    """Accept 1.5, "0.1+0.2j", "0.1+0.2i" or [re, im]."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ParseError(f"complex pair must have two entries: {text!r}")
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    if s.startswith("["):
        return parse_complex(json.loads(s))
    try:
        return complex(s)
    except ValueError as exc:
        raise ParseError(f"cannot parse complex number {text!r}") from exc


def parse_complex_list(text: Any) -> list[complex]:
    if isinstance(text, str):
        s = text.strip()
        if s.startswith("["):
            try:
                data = json.loads(s)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON list {text!r}") from exc
        else:
            data = [x for x in s.split(",") if x]
    else:
        data = text
    return [parse_complex(x) for x in data]


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    q: float = 0.6
    r: float = 6.0
    rstar: float | None = None
    K: int = 40
    tol: float | None = None
    seed: int = 0
    jobs: int = 1
    N: int = 2
    n: int = 2
    trials: int | None = None
    word: str | None = None
    lam: str | None = None
    shape: str | None = None
    shape2: str | None = None
    u: list | None = None
    v: list | None = None
    Pi: list | None = None
    at: str | None = None
    convention: str = "shifted"
    entire: bool = False
    kappa: float | None = None
    nodes: int = 512
    sector: int = 0
    u1: list | None = None
    u2: list | None = None
    json_out: str | None = None

    def params(self) -> EllipticParams:
        return EllipticParams(q=self.q, r=self.r, r_star=self.rstar, K=self.K)

    def canonical(self) -> str:
        """Sorted-key JSON of everything that can influence results.

        ``jobs`` and ``json_out`` only affect execution, so they are left out
        and reports stay byte-identical across worker counts.
        """
        data = asdict(self)
        for key in RUNTIME_KEYS:
            data.pop(key)
        return dumps(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


CONFIG_KEYS = tuple(f.name for f in fields(RunConfig))
RUNTIME_KEYS = ("jobs", "json_out")


def _complex_pairs(values):
    return None if values is None else [[c.real, c.imag] for c in values]


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("config file must hold a JSON object")
    return data


def effective_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < flags."""
    merged = asdict(RunConfig())
    merged.update(load_config(getattr(args, "config", None)))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    for key in ("u", "Pi", "u1", "u2"):
        if merged.get(key) is not None:
            merged[key] = _complex_pairs(parse_complex_list(merged[key]))
    if merged.get("v") is not None and isinstance(merged["v"], str):
        try:
            merged["v"] = json.loads(merged["v"])
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad --v JSON: {exc}") from exc
    cfg = RunConfig.from_dict(merged)
    if cfg.jobs < 1:
        raise ParseError("--jobs must be >= 1")
    return cfg


def _dyn(cfg: RunConfig, N: int) -> DynamicalParams:
    if cfg.Pi is not None:
        a = [complex(*x) for x in cfg.Pi]
        if len(a) != N:
            raise ParseError(f"--Pi needs {N} entries, got {len(a)}")
        return DynamicalParams(tuple(a))
    return DynamicalParams(tuple(0.37 * j + 0.21j * j * j for j in range(1, N + 1)))


def _shape(text: str) -> LambdaShape:
    try:
        return LambdaShape.parse(text)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad shape {text!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands

def cmd_eval(kind: str, cfg: RunConfig) -> list[dict]:
    P = cfg.params()
    u = [complex(*x) for x in cfg.u] if cfg.u is not None else None
    rec: dict = {"kind": kind}
    if kind in ("theta", "bracket", "rmatrix"):
        x = u[0] if u else 0j
        rec["inputs"] = {"u": x}
        if kind == "theta":
            rec["value"] = complex(theta_p(qpow(2 * x, P), P.p, K=P.K))
        elif kind == "bracket":
            rec["value"] = complex(bracket(x, P))
        else:
            Pi = _dyn(cfg, cfg.N)
            R = r_full(x, Pi, P) if cfg.entire else rbar(x, Pi, P)
            rec["inputs"]["Pi"] = list(Pi.a)
            rec["normalisation"] = "mu Rbar" if cfg.entire else "Rbar"
            rec["index_order"] = "R[out1, out2, in1, in2]"
            rec["value"] = R.entries
        return [rec]
    if kind == "phi":
        if not cfg.word:
            raise ParseError("eval phi needs --word")
        I = from_word(cfg.word, cfg.N)
        qp = _qkz_params(cfg)
        X = _point(I, cfg, u)
        rec["inputs"] = {"word": cfg.word, "x": X}
        rec["value"] = phi_trace(I, X, qp)
        return [rec]
    if not cfg.word:
        raise ParseError(f"eval {kind} needs --word")
    I = from_word(cfg.word, cfg.N)
    Pi = _dyn(cfg, I.N)
    conv = Convention(cfg.convention)
    X = _point(I, cfg, u)
    rec["inputs"] = {"word": cfg.word, "N": I.N, "Pi": list(Pi.a), "x": X, "convention": conv.value}
    if kind == "weight":
        if cfg.entire:
            rec["value"] = compile_u(I, Pi, conv, P)(X)
        else:
            rec["value"] = w_tilde(I, X, Pi, conv, P)
            if cfg.at == "zI" and conv is Convention.SHIFTED:
                rec["closed_form"] = triangular_diagonal(I, X[len(X) - I.n:], P)
    elif kind == "omega":
        rec["value"] = omega(I, X, Pi, P)
    elif kind == "hlambda":
        rec["value"] = compile_h(I.shape, conv, P)(X)
    else:
        raise ParseError(f"unknown eval kind {kind!r}")
    return [rec]


def _point(I: Partition, cfg: RunConfig, u) -> np.ndarray:
    if u is None:
        u = [0.31 * a + 0.17j * a for a in range(1, I.n + 1)]
    if len(u) != I.n:
        raise ParseError(f"--u needs {I.n} entries for word {cfg.word}")
    if cfg.at == "zI":
        return zI_point(I, u)
    if cfg.v is None:
        rng = np.random.default_rng(cfg.seed)
        x = VariableAssignment.random(I.shape, rng, 0.4)
        return VariableAssignment(np.asarray(u), x.v).flat()
    v = [[parse_complex(c) for c in row] for row in cfg.v]
    lens = [I.shape.cumulative(l) for l in range(1, I.N)]
    if [len(row) for row in v] != lens:
        raise ParseError(f"--v rows must have lengths {lens}")
    return VariableAssignment(np.asarray(u), v).flat()


def cmd_verify(suite: str, cfg: RunConfig) -> list[dict]:
    if suite not in SUITES:
        raise ParseError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    P = cfg.params()
    rng = np.random.default_rng(cfg.seed)
    shapes = None
    if cfg.lam:
        shapes = [_shape(cfg.lam)]
    elif cfg.shape:
        shapes = [_shape(cfg.shape)]
    shape2 = _shape(cfg.shape2) if cfg.shape2 else None
    N = shapes[0].N if shapes else cfg.N
    n = shapes[0].n if shapes and suite not in ("shuffle",) else cfg.n
    cases = build_cases(suite, rng, N=N, n=n, trials=cfg.trials, shapes=shapes, shape2=shape2, tol=cfg.tol)
    if cfg.jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(partial(run_case, params=P), cases))
    return [run_case(c, P) for c in cases]


def _qkz_params(cfg: RunConfig) -> QKZParams:
    base = QKZParams()
    P = base.params if (cfg.q, cfg.r, cfg.rstar, cfg.K) == (0.6, 6.0, None, 40) else cfg.params()
    kw = {"params": P, "sector": cfg.sector}
    if cfg.kappa is not None:
        kw["kappa"] = cfg.kappa
    if cfg.Pi is not None:
        kw["Pi"] = _dyn(cfg, 2)
    return replace(base, **kw)


def cmd_qkz(cfg: RunConfig) -> list[dict]:
    qp = _qkz_params(cfg)
    u1 = complex(*cfg.u1[0]) if cfg.u1 else 0.1 + 0.3j
    u2 = complex(*cfg.u2[0]) if cfg.u2 else 0.2 + 0.1j
    rep = check_qkz_n2(u1, u2, qp, cfg.nodes)
    tol = 1e-6 if cfg.tol is None else cfg.tol
    rec = {"suite": "qkz", "proposition": "face-type elliptic q-KZ equation (N=2, n=2, i=1)",
           "case": {"u1": u1, "u2": u2, "nodes": cfg.nodes, "kappa": qp.kappa, "p": qp.params.p,
                    "sector": qp.sector},
           "residual": rep.residual, "ladder": rep.ladder, "tolerance": tol,
           "lhs": rep.lhs, "rhs": rep.rhs, "pass": bool(rep.residual < tol and rep.ladder < tol)}
    if rep.ladder >= tol:
        rec["warning"] = "quadrature ladder above tolerance; increase --nodes"
    return [rec]


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--rstar", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--json-out", dest="json_out")
    p.add_argument("--config")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--N", type=int)
    p.add_argument("--Pi", help="dynamical parameters a_1..a_N, comma separated or JSON pairs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ellweight", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    pe = sub.add_parser("eval", help="evaluate a quantity")
    pe.add_argument("kind", choices=EVAL_KINDS)
    _common(pe)
    pe.add_argument("--u", help="u values (comma separated or JSON pairs)")
    pe.add_argument("--v", help="rows v^(1..N-1) as JSON")
    pe.add_argument("--word")
    pe.add_argument("--at", choices=["zI"])
    pe.add_argument("--convention", choices=[c.value for c in Convention])
    pe.add_argument("--entire", action="store_const", const=True,
                    help="W instead of W~ (weight) or mu Rbar instead of Rbar (rmatrix)")
    pe.add_argument("--kappa", type=float)
    pe.add_argument("--sector", type=int)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=SUITES)
    _common(pv)
    pv.add_argument("--n", type=int)
    pv.add_argument("--trials", type=int)
    pv.add_argument("--lam")
    pv.add_argument("--shape")
    pv.add_argument("--shape2")

    pq = sub.add_parser("qkz-check", help="q-KZ residual for N = 2, n = 2")
    _common(pq)
    pq.add_argument("--kappa", type=float)
    pq.add_argument("--nodes", type=int)
    pq.add_argument("--sector", type=int)
    pq.add_argument("--u1")
    pq.add_argument("--u2")
    return parser


def _render_pretty(records: list[dict]) -> str:
    lines = []
    for rec in records:
        if "header" in rec:
            lines.append(f"# {rec['command']}")
            continue
        if "residual" in rec:
            res = rec["residual"]
            res_s = "error" if res is None else f"{res:.3e}"
            case = ", ".join(f"{k}={v}" for k, v in rec["case"].items()) if isinstance(rec.get("case"), dict) else ""
            mark = "PASS" if rec["pass"] else "FAIL"
            lines.append(f"{mark}  {rec['suite']:<14} {res_s:>10}  tol {rec['tolerance']:.0e}  {case}")
        else:
            lines.append(dumps(rec))
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = effective_config(args)
        if args.command == "eval":
            records = cmd_eval(args.kind, cfg)
            label = f"eval {args.kind}"
        elif args.command == "verify":
            records = cmd_verify(args.suite, cfg)
            label = f"verify {args.suite}"
        else:
            records = cmd_qkz(cfg)
            label = "qkz-check"
    except ParseError as exc:
        print(dumps({"error": "parse", "message": str(exc)}))
        return EXIT_PARSE
    except (PoleError, DomainError, ContourError, ZeroDivisionError) as exc:
        print(dumps({"error": "domain", "type": type(exc).__name__, "message": str(exc)}))
        return EXIT_DOMAIN
    header = {"header": True, "command": label, "config": json.loads(cfg.canonical())}
    out = [header] + records
    lines = [dumps(r) for r in out]
    if cfg.json_out:
        with open(cfg.json_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    print(_render_pretty(out) if getattr(args, "pretty", False) else "\n".join(lines))
    if args.command == "eval":
        return EXIT_OK
    return EXIT_OK if all(r.get("pass", True) for r in records) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
