"""Command-line front end.

Every command prints one JSON object (or JSON lines for reports) on standard
output.  Rationals travel as ``"p/q"`` strings.  Exit status is 0 on success,
2 on a validation error and 1 on an internal failure; errors are reported as
``{"schema": 1, "error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import geometry as geo
from .combinatorics import eulerian, factorial
from .errors import CubeSliceError
from .geometry import Cube, SectionQuery, SlabQuery, SliceQuery, as_rational, normalize_weights
from .polynomial import (
    MultiPoly,
    integrate_monomial_simplex,
    integrate_poly_section,
    integrate_poly_slice,
)
from .probability import BetaProductDensity, UniformSumDistribution, beta_cdf, cdf, pdf, quantile, sample
from .verify import (
    QuadratureConfig,
    RegionSpec,
    borwein_report,
    grid_check,
    mc_check,
    sinc_check,
)

SCHEMA = 1


class MalformedInput(CubeSliceError):
    code = "malformed_json"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise CubeSliceError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# argument helpers


def _rational_list(text) -> list[Fraction]:
    if isinstance(text, list):
        return [as_rational(x) for x in text]
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise CubeSliceError("expected a comma-separated list of rationals")
    return [as_rational(p) for p in parts]


def _int_list(text) -> list[int]:
    if isinstance(text, list):
        vals = text
    else:
        vals = [p for p in str(text).split(",") if p.strip()]
    try:
        return [int(v) for v in vals]
    except (TypeError, ValueError):
        raise CubeSliceError(f"expected a comma-separated list of integers, got {text!r}") from None


def _load_json(text: str) -> Any:
    try:
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                return json.load(fh)
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"malformed JSON: {exc}") from None
    except OSError as exc:
        raise CubeSliceError(f"cannot read {text[1:]!r}: {exc.strerror}") from None


def _merged(args: argparse.Namespace) -> dict:
    """Command-line values layered over the optional ``--input`` JSON file."""
    base: dict = {}
    if getattr(args, "input", None):
        data = _load_json("@" + args.input)
        if not isinstance(data, dict):
            raise MalformedInput("--input must contain a JSON object")
        base.update(data)
    for key, value in vars(args).items():
        if value is not None and key not in ("input", "command", "kind", "handler"):
            base[key] = value
    return base


def _need(opts: dict, key: str):
    if opts.get(key) is None:
        raise CubeSliceError(f"missing required parameter '{key}'")
    return opts[key]


def _weights(opts: dict):
    return normalize_weights(_rational_list(_need(opts, "weights")))


def _envelope(payload: dict, meta: dict) -> dict:
    return {"schema": SCHEMA, **payload, "meta": meta}


def _volume_payload(v: geo.VolumeValue) -> dict:
    return v.to_dict()


# ---------------------------------------------------------------------------
# command handlers


def cmd_volume(args, opts) -> dict:
    kind = args.kind
    w, record = _weights(opts)
    cube = opts.get("cube", "unit")
    float_only = bool(opts.get("float_only"))
    meta: dict = {"command": f"volume {kind}", "reduction": record.to_dict()}
    if kind == "slice":
        q = SliceQuery(w, as_rational(_need(opts, "level")), cube)
        v = geo.slice_volume(q, float_only=float_only)
        meta["query"] = q.to_dict()
        meta["reflected"] = geo.reflect_to_positive(q.on_unit_cube()).to_dict()
    elif kind == "slab":
        if opts.get("theta") is not None:
            q = SlabQuery(w, as_rational(opts["theta"]))
            variant = opts.get("variant") or "polya"
            v = geo.slab_volume_centered(q, variant, float_only=float_only)
            meta["query"] = {**q.to_dict(), "variant": variant, "cube": "centered"}
        else:
            z1, z2 = _rational_list(_need(opts, "levels"))[:2] if opts.get("levels") else (None, None)
            if z1 is None:
                raise CubeSliceError("slab needs --theta (central slab) or --levels z1,z2")
            v = geo.slab_between(w, z1, z2, cube, float_only=float_only)
            meta["query"] = {"weights": [str(c) for c in w], "levels": [str(z1), str(z2)], "cube": Cube(cube).value}
    elif kind == "section":
        q = SectionQuery(w, as_rational(_need(opts, "level")), cube)
        v = geo.section_volume(q, float_only=float_only)
        meta["query"] = q.to_dict()
    else:
        variant = opts.get("variant") or "full"
        v = geo.central_section_volume(w, variant, float_only=float_only)
        meta["query"] = {"weights": [str(c) for c in w], "variant": variant, "cube": "centered"}
    return _envelope(_volume_payload(v), meta)


def cmd_eulerian(args, opts) -> dict:
    n, k = int(_need(opts, "n")), int(_need(opts, "k"))
    out: dict = {"eulerian": str(eulerian(n, k))}
    if opts.get("check_volume"):
        vol = geo.eulerian_slab_volume(n, k)
        out["volume"] = str(vol)
        out["match"] = vol == Fraction(eulerian(n, k), factorial(n))
    return _envelope(out, {"command": "eulerian", "query": {"n": n, "k": k}})


def cmd_identity(args, opts) -> dict:
    ws = _rational_list(_need(opts, "weights"))
    lam = as_rational(_need(opts, "lam"))
    p = int(_need(opts, "p"))
    res = geo.identity_residual(ws, lam, p)
    query = {"weights": [str(x) for x in ws], "lambda": str(lam), "p": p}
    return _envelope({"residual": str(res), "holds": res == 0}, {"command": "identity-check", "query": query})


def _poly(opts: dict) -> MultiPoly:
    raw = _need(opts, "poly")
    data = raw if isinstance(raw, dict) else _load_json(raw)
    return MultiPoly.from_dict(data)


def cmd_integrate(args, opts) -> dict:
    kind = args.kind
    meta: dict = {"command": f"integrate {kind}"}
    if kind == "simplex":
        ws = _rational_list(_need(opts, "weights"))
        c = as_rational(_need(opts, "c"))
        alpha = _int_list(_need(opts, "alpha"))
        r = integrate_monomial_simplex(ws, c, alpha)
        meta["query"] = {"weights": [str(x) for x in ws], "c": str(c), "alpha": alpha}
        return _envelope(geo.VolumeValue.unit(r).to_dict(), meta)
    w, record = _weights(opts)
    f = _poly(opts)
    if record.dropped:
        raise CubeSliceError("integration weights must be nonzero; zero components are not dropped here")
    level = as_rational(_need(opts, "level"))
    cube = opts.get("cube", "unit")
    if kind == "slice":
        q = SliceQuery(w, level, cube)
        v = geo.VolumeValue.unit(integrate_poly_slice(f, q))
    else:
        q = SectionQuery(w, level, cube)
        v = integrate_poly_section(f, q)
    meta["query"] = {**q.to_dict(), "poly": f.to_dict()}
    return _envelope(v.to_dict(), meta)


def _distribution(opts: dict) -> UniformSumDistribution:
    if opts.get("dist") is not None:
        raw = opts["dist"]
        data = raw if isinstance(raw, dict) else _load_json(raw)
        for key in ("coeffs", "lowers", "uppers", "alphas", "betas"):
            if key in data and key not in opts:
                opts[key] = data[key]
    coeffs = _rational_list(_need(opts, "coeffs"))
    lowers = _rational_list(opts["lowers"]) if opts.get("lowers") is not None else None
    uppers = _rational_list(opts["uppers"]) if opts.get("uppers") is not None else None
    return UniformSumDistribution(tuple(coeffs), lowers and tuple(lowers), uppers and tuple(uppers))


def cmd_cdf(args, opts) -> dict:
    d = _distribution(opts)
    z = as_rational(_need(opts, "level"))
    meta = {"command": "cdf", "query": {**d.to_dict(), "level": str(z)}}
    if opts.get("alphas") is not None or opts.get("betas") is not None:
        b = BetaProductDensity(tuple(_int_list(_need(opts, "alphas"))), tuple(_int_list(_need(opts, "betas"))))
        if d.lowers != (0,) * d.dimension or d.uppers != (1,) * d.dimension:
            raise CubeSliceError("beta variables live on [0, 1]; lowers/uppers are not supported")
        r = beta_cdf(d.weights, b, z)
        meta["query"].update(alphas=list(b.alphas), betas=list(b.betas))
    else:
        r = cdf(d, z)
    return _envelope(geo.VolumeValue.unit(r).to_dict(), meta)


def cmd_pdf(args, opts) -> dict:
    d = _distribution(opts)
    z = as_rational(_need(opts, "level"))
    r = pdf(d, z)
    return _envelope(geo.VolumeValue.unit(r).to_dict(), {"command": "pdf", "query": {**d.to_dict(), "level": str(z)}})


def cmd_quantile(args, opts) -> dict:
    d = _distribution(opts)
    q = as_rational(_need(opts, "q"))
    tol = as_rational(opts.get("tol") or "1/1000000")
    z = quantile(d, q, tol)
    meta = {"command": "quantile", "query": {**d.to_dict(), "q": str(q), "tol": str(tol)}}
    return _envelope({"exact": str(z), "float": float(z)}, meta)


def cmd_sample(args, opts) -> dict:
    d = _distribution(opts)
    seed, count = int(_need(opts, "seed")), int(_need(opts, "count"))
    values = sample(d, seed, count)
    meta = {"command": "sample", "generator": "numpy PCG64", "query": {**d.to_dict(), "seed": seed, "count": count}}
    return _envelope({"values": values.tolist()}, meta)


def _region(args, opts) -> RegionSpec:
    kind = opts.get("region") or "slice"
    ws = _rational_list(_need(opts, "weights"))
    cube = opts.get("cube", "unit")
    if kind == "slice":
        return RegionSpec.slice(ws, _need(opts, "level"), cube)
    if kind == "slab":
        z1, z2 = _rational_list(_need(opts, "levels"))[:2]
        return RegionSpec.slab(ws, z1, z2, cube)
    if kind == "centered-slab":
        return RegionSpec.centered_slab(ws, _need(opts, "theta"))
    if kind == "section-slab":
        return RegionSpec.section_slab(ws, _need(opts, "level"), _need(opts, "width"), cube)
    raise CubeSliceError(f"unknown region kind {kind!r}")


def cmd_mc_check(args, opts) -> list[dict]:
    r = _region(args, opts)
    rec = mc_check(r, int(opts.get("samples") or 1_000_000), int(opts.get("seed") or 0))
    return [{"schema": SCHEMA, **rec.to_dict()}]


def cmd_grid_check(args, opts) -> list[dict]:
    r = _region(args, opts)
    rec = grid_check(r, int(opts.get("resolution") or 256))
    return [{"schema": SCHEMA, **rec.to_dict()}]


def _qcfg(opts: dict, default_tol: float) -> QuadratureConfig:
    return QuadratureConfig(
        abs_tol=float(opts.get("tol") or default_tol),
        tail=opts.get("tail") or "auto",
        max_panels=int(opts.get("max_panels") or 4_000_000),
    )


def cmd_sinc_check(args, opts) -> list[dict]:
    ws = _rational_list(_need(opts, "weights"))
    rec = sinc_check(ws, as_rational(_need(opts, "theta")), _qcfg(opts, 1e-10))
    return [{"schema": SCHEMA, **rec.to_dict()}]


def cmd_borwein(args, opts) -> list[dict]:
    rows = borwein_report(int(_need(opts, "max_prime")), _qcfg(opts, 1e-13))
    return [{"schema": SCHEMA, **row.to_dict()} for row in rows]


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, *, weights=True, level=False, cube=False) -> None:
    p.add_argument("--input", help="JSON file whose keys supply default parameter values")
    if weights:
        p.add_argument("--weights", help="comma-separated rationals, e.g. 1,-1/2,3")
    if level:
        p.add_argument("--level", help="hyperplane level z")
    if cube:
        p.add_argument("--cube", choices=["unit", "centered"], default=None)


def _dist_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="JSON file with coeffs/lowers/uppers (and alphas/betas)")
    p.add_argument("--dist", help="distribution spec as JSON text or @file")
    p.add_argument("--coeffs")
    p.add_argument("--lowers")
    p.add_argument("--uppers")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cubeslice", description="Exact volumes of slices, slabs and sections of the unit cube.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    vol = sub.add_parser("volume", help="slice, slab, section and central-section volumes")
    vol.add_argument("kind", choices=["slice", "slab", "section", "central-section"])
    _common(vol, level=True, cube=True)
    vol.add_argument("--levels", help="z1,z2 for a slab between two levels")
    vol.add_argument("--theta", help="thickness of a central slab of the centred cube")
    vol.add_argument("--variant", help="slab: polya|altA|altB; central-section: full|reduced")
    vol.add_argument("--float-only", action="store_true", default=None, help="approximate float path")
    vol.set_defaults(handler=cmd_volume)

    eul = sub.add_parser("eulerian", help="Eulerian number A(n, k)")
    eul.add_argument("--input")
    eul.add_argument("--n", type=int)
    eul.add_argument("--k", type=int)
    eul.add_argument("--check-volume", action="store_true", default=None)
    eul.set_defaults(handler=cmd_eulerian, kind=None)

    ident = sub.add_parser("identity-check", help="alternating power-sum identity residual")
    _common(ident)
    ident.add_argument("--lambda", dest="lam")
    ident.add_argument("--p", type=int)
    ident.set_defaults(handler=cmd_identity, kind=None)

    integ = sub.add_parser("integrate", help="exact polynomial integrals")
    integ.add_argument("kind", choices=["slice", "section", "simplex"])
    _common(integ, level=True, cube=True)
    integ.add_argument("--poly", help="polynomial JSON text or @file")
    integ.add_argument("--c", help="simplex level for 'simplex'")
    integ.add_argument("--alpha", help="comma-separated exponents for 'simplex'")
    integ.set_defaults(handler=cmd_integrate)

    for name, handler in (("cdf", cmd_cdf), ("pdf", cmd_pdf)):
        p = sub.add_parser(name, help=f"exact {name} of a weighted uniform sum")
        _dist_args(p)
        p.add_argument("--level")
        if name == "cdf":
            p.add_argument("--alphas", help="integer beta parameters (beta cdf)")
            p.add_argument("--betas")
        p.set_defaults(handler=handler, kind=None)

    qp = sub.add_parser("quantile", help="bisection quantile on the exact cdf")
    _dist_args(qp)
    qp.add_argument("--q")
    qp.add_argument("--tol")
    qp.set_defaults(handler=cmd_quantile, kind=None)

    sp = sub.add_parser("sample", help="seeded samples of a weighted uniform sum")
    _dist_args(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int)
    sp.set_defaults(handler=cmd_sample, kind=None)

    for name, handler in (("mc-check", cmd_mc_check), ("grid-check", cmd_grid_check)):
        p = sub.add_parser(name, help="compare an oracle estimate with the exact volume")
        _common(p, level=True, cube=True)
        p.add_argument("--region", choices=["slice", "slab", "centered-slab", "section-slab"])
        p.add_argument("--levels")
        p.add_argument("--theta")
        p.add_argument("--width")
        if name == "mc-check":
            p.add_argument("--samples", type=int)
            p.add_argument("--seed", type=int)
        else:
            p.add_argument("--resolution", type=int)
        p.set_defaults(handler=handler, kind=None)

    sc = sub.add_parser("sinc-check", help="sinc-integral quadrature against the exact central slab")
    _common(sc)
    sc.add_argument("--theta")
    sc.add_argument("--tol", type=float)
    sc.add_argument("--tail", choices=["auto", "bound", "asymptotic"])
    sc.add_argument("--max-panels", type=int)
    sc.set_defaults(handler=cmd_sinc_check, kind=None)

    bw = sub.add_parser("borwein", help="odd-prime reciprocal slabs and their sinc integrals")
    bw.add_argument("--input")
    bw.add_argument("--max-prime", type=int)
    bw.add_argument("--tol", type=float)
    bw.add_argument("--tail", choices=["auto", "bound", "asymptotic"])
    bw.add_argument("--max-panels", type=int)
    bw.set_defaults(handler=cmd_borwein, kind=None)
    return parser


def _emit(obj, out) -> None:
    out.write(json.dumps(obj) + "\n")


_NEGATIVE_VALUE = re.compile(r"^-[0-9.]")


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--opt -1,2`` into ``--opt=-1,2`` so argparse reads a value, not a flag."""
    out: list[str] = []
    for tok in argv:
        if out and _NEGATIVE_VALUE.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser()
        args = parser.parse_args(_glue_negative_values(argv))
        opts = _merged(args)
        result = args.handler(args, opts)
        text = "".join(json.dumps(obj) + "\n" for obj in (result if isinstance(result, list) else [result]))
    except CubeSliceError as exc:
        _emit({"schema": SCHEMA, "error": {"code": exc.code, "message": str(exc)}}, out)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        _emit({"schema": SCHEMA, "error": {"code": "internal_error", "message": f"{type(exc).__name__}: {exc}"}}, out)
        return 1
    out.write(text)
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
