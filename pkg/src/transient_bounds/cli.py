"""``tb`` command-line front end.

Exit codes: 0 success, 1 a reproduction or check did not pass, 2 usage or
domain error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError
from .growth import (
    ResolventProfile,
    c_profile,
    concave_envelope,
    dyadic_grid,
    hat_c_curve,
    lower_bound_curve,
    NormCurve,
    tw_lower_bound,
)
from .linop import parse_norm_index
from .models import MODEL_IDS, get_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(DomainError):
    pass


# grid parsing

def parse_t_grid(spec: str) -> np.ndarray:
    """``start:step:stop`` (inclusive), ``log:lo:hi:count`` or a comma list."""
    spec = spec.strip()
    try:
        if spec.startswith("log:"):
            _, lo, hi, count = spec.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if lo <= 0 or hi < lo or count < 1:
                raise UsageError(f"bad log grid {spec!r}")
            grid = np.logspace(math.log10(lo), math.log10(hi), count)
        elif ":" in spec:
            start, step, stop = (float(x) for x in spec.split(":"))
            if step <= 0 or stop < start:
                raise UsageError(f"bad range grid {spec!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = start + step * np.arange(count)
        else:
            grid = np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError:
        raise UsageError(f"cannot parse t grid {spec!r}") from None
    if grid.size == 0:
        raise UsageError("t grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise UsageError("t grid must be finite and non-negative")
    return grid


def parse_a_grid(spec: Optional[str]) -> np.ndarray:
    """``dyadic:m_lo:m_hi`` (``a = 2^-m``) or a comma list; default dyadic -8..20."""
    if spec is None:
        return dyadic_grid()
    spec = spec.strip()
    try:
        if spec.startswith("dyadic:"):
            _, lo, hi = spec.split(":")
            if int(hi) < int(lo):
                raise UsageError(f"bad dyadic grid {spec!r}")
            grid = dyadic_grid(int(lo), int(hi))
        else:
            grid = np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError:
        raise UsageError(f"cannot parse a grid {spec!r}") from None
    if grid.size == 0:
        raise UsageError("a grid is empty")
    if np.any(grid <= 0):
        raise UsageError("a grid must be positive")
    return grid


def parse_terms(spec: str):
    """``alpha:beta,alpha:beta`` with Python complex literals, e.g. ``1:2,0.5j:1+1j``."""
    terms = []
    try:
        for part in spec.split(","):
            al, be = part.split(":")
            terms.append((complex(al.replace(" ", "")), complex(be.replace(" ", ""))))
    except ValueError:
        raise UsageError(f"cannot parse mixture terms {spec!r}") from None
    return tuple(terms)


# output

def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    if isinstance(v, complex):
        return "%.12g%+.12gj" % (v.real, v.imag)
    return str(v)


@dataclass
class Output:
    columns: List[str]
    rows: List[list]
    meta: Dict[str, object] = field(default_factory=dict)
    json_key: str = "rows"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_csv_cell(v) for v in r])
            return buf.getvalue()
        doc = {k: _plain(v) if not isinstance(v, dict) else
               {kk: _plain(vv) for kk, vv in v.items()} for k, v in self.meta.items()}
        doc[self.json_key] = [{c: _plain(v) for c, v in zip(self.columns, r)}
                              for r in self.rows]
        return json.dumps(doc, indent=2) + "\n"


def _write(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# model helpers

def _model_params(args) -> Dict[str, object]:
    params = {"n": args.n, "N_dim": args.Ndim, "gamma": args.gamma, "c": args.c, "b": args.b}
    if args.model == "jordan-n" and args.p is not None:
        params["p"] = args.p
    return {k: v for k, v in params.items() if v is not None}


def _load_model(args):
    if args.model is None:
        raise UsageError("--model is required")
    if args.model not in MODEL_IDS:
        raise UsageError(f"unknown model {args.model!r}; choose from {', '.join(MODEL_IDS)}")
    return get_model(args.model, **_model_params(args))


def _schrodinger_family(args):
    from .schrodinger import build_family
    return build_family(args.n or 300, args.Ndim or 3)


def _norm_values(model, times) -> np.ndarray:
    from ._parallel import pmap
    return np.array(pmap(model.norm, list(times)), dtype=float)


# commands

def cmd_norms(args) -> Output:
    model = _load_model(args)
    times = parse_t_grid(args.t)
    vals = _norm_values(model, times)
    return Output(["t", "norm"], [[t, v] for t, v in zip(times, vals)],
                  meta={"model": model.id, "params": dict(model.params)}, json_key="curve")


def _resolvent_profile(args, model, a_grid) -> ResolventProfile:
    if model.id == "schrodinger":
        from .schrodinger import m1_c_profile
        return m1_c_profile(_schrodinger_family(args), a_grid)
    if model.exact_c is not None:
        return ResolventProfile(a_grid, np.array([model.exact_c(a) for a in a_grid]),
                                model.positivity_preserving)
    if model.generator is not None:
        return c_profile(model, a_grid)
    raise UsageError(f"model {model.id!r} has neither a generator nor a resolvent formula")


def cmd_bounds(args) -> Output:
    model = _load_model(args)
    times = parse_t_grid(args.t)
    a_grid = parse_a_grid(args.a)
    profile = _resolvent_profile(args, model, a_grid)
    truth = _norm_values(model, times)
    if model.log_concave is not True and times.size > 1:
        truth = concave_envelope(NormCurve(times, truth)).values
    ctilde = lower_bound_curve(profile, times)
    chat: List[Optional[float]] = [None] * times.size
    branch = profile.decreasing_branch()
    if branch.a_grid.size:
        vals, mask = hat_c_curve(branch, times)
        chat = [float(v) if m else None for v, m in zip(vals, mask)]
    usable = profile.c_values >= 1.0
    tw = [max(tw_lower_bound(a, c, t) for a, c in
              zip(profile.a_grid[usable], profile.c_values[usable])) for t in times]
    rows = [[t, e, ct, ch, w] for t, e, ct, ch, w in zip(times, truth, ctilde, chat, tw)]
    return Output(["t", "exact_or_envelope", "ctilde", "chat", "tw_best"], rows,
                  meta={"model": model.id, "params": dict(model.params)})


def cmd_table(args) -> Output:
    from .tables import reproduce_table, table_passes
    if args.id not in ("1", "2", "3", "4"):
        raise UsageError(f"unknown table {args.id!r}; choose from 1-4")
    cells = reproduce_table(args.id)
    rows = [[c.label, c.reference, c.computed, c.difference, c.tolerance, c.ok] for c in cells]
    out = Output(["cell", "reference", "computed", "abs_diff", "tolerance", "pass"], rows,
                 meta={"table": int(args.id), "all_pass": table_passes(cells)}, json_key="cells")
    out.meta["_exit"] = EXIT_OK if table_passes(cells) else EXIT_FAIL
    return out


def cmd_fit(args) -> Output:
    from .schrodinger import growth_fit
    fam = _schrodinger_family(args)
    try:
        lo, hi = (float(x) for x in args.window.split(":"))
    except ValueError:
        raise UsageError(f"cannot parse window {args.window!r}") from None
    res = growth_fit(fam, (lo, hi), args.exponent, count=args.count)
    exponent = args.exponent if args.exponent is not None else (fam.N_dim - 2) / 4.0
    rows = [[t, k] for t, k in zip(res.times, res.k_values)]
    return Output(["t", "k"], rows,
                  meta={"model": "schrodinger", "params": {"n": fam.n, "N_dim": fam.N_dim},
                        "exponent": exponent, "k_low": res.k_low, "k_high": res.k_high,
                        "stable": res.stable})


def cmd_restrict(args) -> Output:
    from .linop import expm, op_norm
    from .restriction import eigen_span, restricted_norm
    model = _load_model(args)
    if model.generator is None:
        raise UsageError(f"model {model.id!r} has no generator")
    A = model.generator
    if args.p is not None:
        A = A.with_norm(args.p)
    times = parse_t_grid(args.t)
    span = eigen_span(A, k=args.k)
    if span.norm_index != 2:
        raise UsageError("restricted norms need the l2 norm (pass --p 2)")
    rows = [[t, restricted_norm(span, t), op_norm(expm(A, t), 2)] for t in times]
    return Output(["t", "restricted", "full"], rows,
                  meta={"model": model.id, "params": dict(model.params), "k": span.k})


def cmd_specmap(args) -> Output:
    from .regularized import ExponentialMixture, spectral_mapping_check
    model = _load_model(args)
    if model.generator is None:
        raise UsageError(f"model {model.id!r} has no generator")
    if args.terms:
        terms = parse_terms(args.terms)
    else:
        rng = np.random.default_rng(args.seed)
        k = 3
        terms = tuple(zip(rng.normal(size=k) + 1j * rng.normal(size=k),
                          rng.uniform(0.5, 2.0, size=k) + 1j * rng.normal(size=k)))
    mix = ExponentialMixture(tuple((complex(a), complex(b)) for a, b in terms))
    res = spectral_mapping_check(model.generator, mix)
    rows = [[complex(c), complex(p), abs(c - p)] for c, p in zip(res.computed, res.predicted)]
    out = Output(["computed", "predicted", "mismatch"], rows,
                 meta={"model": model.id, "max_mismatch": res.max_mismatch, "ok": res.ok})
    out.meta["_exit"] = EXIT_OK if res.ok else EXIT_FAIL
    return out


def cmd_models(args) -> Output:
    rows = []
    for mid in MODEL_IDS:
        params = {"n": 20} if mid == "schrodinger" else {}
        m = get_model(mid, **params)
        rows.append([mid, int(m.norm_index) if math.isfinite(m.norm_index) else "inf",
                     m.generator is not None, m.exact_norm is not None, m.exact_c is not None,
                     m.description])
    return Output(["id", "norm", "generator", "exact_norm", "exact_c", "description"], rows,
                  json_key="models")


COMMANDS = {
    "norms": cmd_norms,
    "bounds": cmd_bounds,
    "table": cmd_table,
    "fit": cmd_fit,
    "restrict": cmd_restrict,
    "specmap": cmd_specmap,
    "models": cmd_models,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=None)
    common.add_argument("--n", type=int)
    common.add_argument("--Ndim", type=int)
    common.add_argument("--gamma", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--p", type=parse_norm_index, help="norm index: 1, 2 or inf")
    common.add_argument("--t", default="0:1:10", help="start:step:stop, log:lo:hi:count or list")
    common.add_argument("--a", help="dyadic:m_lo:m_hi or list")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-o", "--output", default="-")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="tb", description="Transient growth bounds for matrix semigroups.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("norms", parents=[common], help="semigroup norms on a t grid")
    sub.add_parser("bounds", parents=[common], help="resolvent lower bounds against the truth")
    p = sub.add_parser("table", parents=[common], help="reproduce a reference table")
    p.add_argument("id")
    p = sub.add_parser("fit", parents=[common], help="power-law bracket for the Schrodinger norm")
    p.add_argument("--window", default="200:1200")
    p.add_argument("--exponent", type=float)
    p.add_argument("--count", type=int, default=50)
    p = sub.add_parser("restrict", parents=[common], help="norms restricted to eigenvector spans")
    p.add_argument("--k", type=int)
    p = sub.add_parser("specmap", parents=[common], help="spectral mapping check for a mixture")
    p.add_argument("--terms")
    sub.add_parser("models", parents=[common], help="list catalog models")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = COMMANDS[args.command](args)
        code = out.meta.pop("_exit", EXIT_OK)
        _write(out.render(args.format), args.output)
        return code
    except DomainError as exc:
        print(f"tb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"tb: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"tb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
