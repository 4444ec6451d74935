"""Command-line driver.

``curvecap analyze|cheb|fekete|verify|transform --spec FILE --out DIR``

The job spec is one JSON document, parsed and validated completely before
any computation.  Exit codes: 0 pass, 1 input error, 2 hypothesis
violation, 3 verification tolerance unmet, 4 internal numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .chebyshev import chebyshev_table, estimate_limit, tau_Q, transform_check, write_csv
from .curve import Tolerances, build_ring, check_hypotheses, directions, infinity_points, mul_matrix
from .errors import CurvecapError, InputError, RankDeficiencyError
from .exactnum import parse_gauss
from .fekete import (
    diameter_ladder,
    monomial_equivalence_check,
    transform_law_check,
    write_ladder_csv,
)
from .groebner import Ideal
from .poly import parse_poly
from .sampler import (
    DEDUP_TOL,
    RESIDUAL_TOL,
    AffineMap,
    CompactSet,
    apply_affine,
    build_set,
    load_points,
    rational_circle,
    save_points,
)

log = logging.getLogger("curvecap")

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_TOLERANCE, EXIT_NUMERIC = 0, 1, 2, 3, 4

# ---------------------------------------------------------------------------
# job spec

_TOP_KEYS = {"nvars", "generators", "sampling", "analysis", "transform", "outputs"}
_SAMPLING_KEYS = {"circle", "base_values", "file", "r_max", "residual_tol", "dedup_tol"}
_CIRCLE_KEYS = {"radius", "count", "max_den"}
_ANALYSIS_KEYS = {"s_min", "s_max", "n_max", "families", "Q", "tolerances", "seed", "refine_passes"}
_TOL_KEYS = {"cheb_tol", "max_iters", "gap_tol", "diagnostic_tol", "transform_tol", "eigen_tol", "eig_sep_tol", "vanish_tol"}
_TRANSFORM_KEYS = {"matrix", "shift", "s", "n_max"}
_OUTPUT_KEYS = {"analyze", "points", "cheb", "cheb_summary", "fekete", "fekete_summary", "verify", "transform"}

DEFAULT_OUTPUTS = {
    "analyze": "analyze.json",
    "points": "points.txt",
    "cheb": "cheb.csv",
    "cheb_summary": "cheb.json",
    "fekete": "fekete.csv",
    "fekete_summary": "fekete.json",
    "verify": "verify.json",
    "transform": "transform.json",
}

DEFAULT_TOLS = {
    "cheb_tol": 1e-10,
    "max_iters": 500,
    "gap_tol": 0.05,
    "diagnostic_tol": 0.02,
    "transform_tol": 0.05,
    "eigen_tol": 1e-9,
    "eig_sep_tol": 1e-7,
    "vanish_tol": 1e-8,
}


def _check_keys(block: dict, allowed: set, where: str) -> None:
    if not isinstance(block, dict):
        raise InputError(f"{where} must be a JSON object")
    extra = sorted(set(block) - allowed)
    if extra:
        raise InputError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _int(v, where: str, lo: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise InputError(f"{where} must be an integer >= {lo}")
    return v


def _float(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        raise InputError(f"{where} must be a positive number")
    return float(v)


@dataclass
class JobSpec:
    nvars: int
    generators: list
    ideal: Ideal
    sampling: dict
    s_min: int | None = None
    s_max: int = 20
    n_max: int = 10
    families: tuple = ("tau", "t")
    Q: list = field(default_factory=list)  # (Poly, text)
    tols: dict = field(default_factory=lambda: dict(DEFAULT_TOLS))
    seed: int = 0
    refine_passes: int = 8
    transform: dict | None = None
    outputs: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUTS))
    base_dir: Path = Path(".")

    @property
    def curve_tols(self) -> Tolerances:
        return Tolerances(self.tols["eigen_tol"], self.tols["eig_sep_tol"], self.tols["vanish_tol"])


def parse_spec(data: dict, base_dir: Path = Path(".")) -> JobSpec:
    """Validate a decoded job spec; raises :class:`InputError` on any problem."""
    _check_keys(data, _TOP_KEYS, "spec")
    for key in ("nvars", "generators", "sampling"):
        if key not in data:
            raise InputError(f"spec is missing required key {key!r}")
    nvars = _int(data["nvars"], "nvars", 2)
    gens_text = data["generators"]
    if not isinstance(gens_text, list) or not gens_text or not all(isinstance(g, str) for g in gens_text):
        raise InputError("generators must be a non-empty list of strings")
    try:
        gens = [parse_poly(g, nvars) for g in gens_text]
        ideal = Ideal(tuple(gens), nvars)
    except ValueError as exc:
        raise InputError(f"bad generator: {exc}") from exc

    samp = data["sampling"]
    _check_keys(samp, _SAMPLING_KEYS, "sampling")
    sources = [k for k in ("circle", "base_values", "file") if k in samp]
    if len(sources) != 1:
        raise InputError("sampling needs exactly one of circle, base_values, file")
    sampling = {
        "r_max": _float(samp["r_max"], "sampling.r_max") if samp.get("r_max") is not None else math.inf,
        "residual_tol": _float(samp.get("residual_tol", RESIDUAL_TOL), "sampling.residual_tol"),
        "dedup_tol": _float(samp.get("dedup_tol", DEDUP_TOL), "sampling.dedup_tol"),
    }
    if "circle" in samp:
        c = samp["circle"]
        _check_keys(c, _CIRCLE_KEYS, "sampling.circle")
        if "count" not in c:
            raise InputError("sampling.circle needs count")
        radius = parse_gauss(str(c.get("radius", "1")))
        if radius.im or radius.re <= 0:
            raise InputError("sampling.circle.radius must be a positive rational")
        sampling["circle"] = {
            "radius": radius.re,
            "count": _int(c["count"], "sampling.circle.count", 1),
            "max_den": _int(c.get("max_den", 10**6), "sampling.circle.max_den", 1),
        }
    elif "base_values" in samp:
        vals = samp["base_values"]
        if not isinstance(vals, list) or not vals:
            raise InputError("sampling.base_values must be a non-empty list")
        try:
            sampling["base_values"] = [parse_gauss(str(v)) for v in vals]
        except ValueError as exc:
            raise InputError(f"bad base value: {exc}") from exc
    else:
        if not isinstance(samp["file"], str):
            raise InputError("sampling.file must be a path string")
        p = Path(samp["file"])
        sampling["file"] = p if p.is_absolute() else base_dir / p

    spec = JobSpec(nvars, list(gens_text), ideal, sampling, base_dir=base_dir)

    ana = data.get("analysis", {})
    _check_keys(ana, _ANALYSIS_KEYS, "analysis")
    if "s_min" in ana:
        spec.s_min = _int(ana["s_min"], "analysis.s_min", 0)
    spec.s_max = _int(ana.get("s_max", spec.s_max), "analysis.s_max", 0)
    spec.n_max = _int(ana.get("n_max", spec.n_max), "analysis.n_max", 1)
    fam = ana.get("families", list(spec.families))
    if not isinstance(fam, list) or not fam or any(f not in ("tau", "t") for f in fam):
        raise InputError("analysis.families must be a non-empty list drawn from 'tau', 't'")
    spec.families = tuple(fam)
    for q in ana.get("Q", []):
        if not isinstance(q, dict) or set(q) - {"poly", "n_max"} or "poly" not in q:
            raise InputError("analysis.Q entries must be objects with 'poly' and optional 'n_max'")
        try:
            poly = parse_poly(q["poly"], nvars)
        except ValueError as exc:
            raise InputError(f"bad Q polynomial: {exc}") from exc
        spec.Q.append((poly, q["poly"], _int(q.get("n_max", 10), "analysis.Q.n_max", 1)))
    tols = ana.get("tolerances", {})
    _check_keys(tols, _TOL_KEYS, "analysis.tolerances")
    for k, v in tols.items():
        spec.tols[k] = _int(v, f"tolerances.{k}", 1) if k == "max_iters" else _float(v, f"tolerances.{k}")
    spec.seed = _int(ana.get("seed", 0), "analysis.seed", 0)
    spec.refine_passes = _int(ana.get("refine_passes", 8), "analysis.refine_passes", 0)

    if "transform" in data:
        tr = data["transform"]
        _check_keys(tr, _TRANSFORM_KEYS, "transform")
        if "matrix" not in tr:
            raise InputError("transform needs matrix")
        try:
            T = AffineMap(
                tuple(tuple(parse_gauss(str(x)) for x in row) for row in tr["matrix"]),
                tuple(parse_gauss(str(x)) for x in tr.get("shift", [])),
            )
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InputError(f"bad transform: {exc}") from exc
        if T.dim != nvars:
            raise InputError(f"transform has dimension {T.dim}, curve has {nvars} variables")
        spec.transform = {
            "map": T,
            "s": _int(tr.get("s", spec.s_max), "transform.s", 1),
            "n_max": _int(tr.get("n_max", spec.n_max), "transform.n_max", 1),
            "text": {"matrix": [[str(x) for x in r] for r in tr["matrix"]], "shift": [str(x) for x in tr.get("shift", [])]},
        }

    outs = data.get("outputs", {})
    _check_keys(outs, _OUTPUT_KEYS, "outputs")
    for k, v in outs.items():
        if not isinstance(v, str) or not v or os.path.isabs(v) or ".." in Path(v).parts:
            raise InputError(f"outputs.{k} must be a relative file name inside the output directory")
        spec.outputs[k] = v
    return spec


def load_spec(path) -> JobSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"spec {path} is not valid JSON: {exc}") from exc
    return parse_spec(data, path.parent)


# ---------------------------------------------------------------------------
# shared pipeline


@dataclass
class Context:
    spec: JobSpec
    out: Path
    threads: int
    seed: int

    def path(self, key: str) -> Path:
        return self.out / self.spec.outputs[key]

    def stamp(self) -> dict:
        """Tolerances and seed attached to every numeric output."""
        return {"seed": self.seed, **{k: self.spec.tols[k] for k in ("cheb_tol", "max_iters")}}


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    return str(x)


def _ring(ctx: Context, require: bool = True):
    R = build_ring(ctx.spec.ideal)
    rep = check_hypotheses(R, ctx.spec.curve_tols, ctx.seed)
    if require:
        rep.require()
    return R, rep


def _sample(ctx: Context, R, half: bool = False):
    """The configured sample; ``half`` keeps every other base value (or file point) instead."""
    s = ctx.spec.sampling
    if "file" in s:
        K = load_points(s["file"], R.G, s["residual_tol"], R.nvars)
        if half:
            return CompactSet(K.points[::2], {**K.source, "subsample": 2}, K.residual_tol)
    else:
        if "circle" in s:
            c = s["circle"]
            base = rational_circle(c["count"], c["radius"], max_den=c["max_den"])
        else:
            base = s["base_values"]
        if half:
            base = base[::2]
        K = build_set(R.G, base, s["r_max"], s["residual_tol"], s["dedup_tol"], ctx.threads, ctx.seed)
        if half:
            return K
    save_points(ctx.path("points"), K)
    return K


def _half_density(ctx: Context, R, dirs, row) -> dict:
    """Rerun the ladder on half the sample; a report, not a pass criterion."""
    K = _sample(ctx, R, half=True)
    try:
        rep = diameter_ladder(
            K, ctx.spec.n_max, R, dirs, refine=True, passes=ctx.spec.refine_passes, with_t=False,
            cheb_tol=ctx.spec.tols["cheb_tol"], threads=ctx.threads,
        )
    except (InputError, RankDeficiencyError) as exc:
        return {"sample_size": len(K), "skipped": str(exc)}
    half = rep.row(ctx.spec.n_max)
    return {
        "sample_size": len(K),
        "d_n": half.d_n,
        "cheb_side": half.cheb_side,
        "gap": half.gap,
        "d_n_change": abs(half.d_n - row.d_n) / row.d_n,
        "cheb_side_change": abs(half.cheb_side - row.cheb_side) / row.cheb_side,
    }


def _s_range(ctx: Context, dirs) -> list[int]:
    a = dirs[0].degree
    lo = max(a, 1) if ctx.spec.s_min is None else ctx.spec.s_min
    if lo < a or ctx.spec.s_max < max(a, 1):
        raise InputError(f"s must be at least {max(a, 1)} (the directional degree is {a})")
    return list(range(lo, ctx.spec.s_max + 1))


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(ctx: Context) -> int:
    R, rep = _ring(ctx, require=False)
    G = R.G
    out = {
        "nvars": R.nvars,
        "generators": ctx.spec.generators,
        "groebner_basis": [str(g) for g in G.elements],
        "leading_monomials": [list(a) for a in G.lt_exponents],
        "hilbert": {"dims": list(R.hilbert.dims), "d": R.hilbert.d, "c": R.hilbert.c, "s0": R.hilbert.s0},
        "d": R.d,
        "n0": R.n0,
        "graded_basis": [list(a) for a in R.hom_basis(R.n0)],
        "graded_basis_shape": R.basis_shape(),
        "multiplication_matrices": {
            f"z{j}": mul_matrix(R, j).to_fraction_strings() for j in range(1, R.nvars + 1)
        },
        "hypotheses": rep.as_dict(),
        "seed": ctx.seed,
        "tolerances": {k: ctx.spec.tols[k] for k in ("eigen_tol", "eig_sep_tol", "vanish_tol")},
    }
    code = EXIT_OK
    if rep.all_pass:
        pts = infinity_points(R, ctx.spec.curve_tols, ctx.seed)
        dirs = directions(R, ctx.spec.curve_tols, ctx.seed)
        out["infinity_points"] = [[[z.real, z.imag] for z in p.coords] for p in pts]
        out["directional_polynomials"] = [v.form.to_poly_str() for v in dirs]
        out["directional_degree"] = dirs[0].degree
    else:
        code = EXIT_HYPOTHESIS
        failed = [k for k in ("lt_powers", "z1_identity", "degree_independent", "simple_eigenvalues",
                              "distinct_coordinates") if not getattr(rep, k)]
        out["error"] = {"type": "HypothesisViolation", "check": failed[0], "exit_code": code}
    _write_json(ctx.path("analyze"), out)
    return code


def cmd_cheb(ctx: Context) -> int:
    R, _ = _ring(ctx)
    dirs = directions(R, ctx.spec.curve_tols, ctx.seed)
    s_values = _s_range(ctx, dirs)
    K = _sample(ctx, R)
    tol, iters = ctx.spec.tols["cheb_tol"], ctx.spec.tols["max_iters"]
    results = chebyshev_table(R, K, dirs, s_values, ctx.spec.families, ctx.threads, tol, iters)
    for Q, _text, nq in ctx.spec.Q:
        results += [tau_Q(R, K, Q, n, dirs, tol, iters) for n in range(1, nq + 1)]
    write_csv(ctx.path("cheb"), results, ctx.stamp())
    summary = {"sample_size": len(K), "limits": {}, **ctx.stamp()}
    for fam in ctx.spec.families:
        for j in range(len(dirs)):
            seq = [(r.degree, r.normalized_constant) for r in results if r.family == fam and r.direction == j]
            if len(seq) >= 3:
                summary["limits"][f"{fam}[{j}]"] = estimate_limit(seq).__dict__
    summary["unconverged"] = [[r.direction, r.degree, r.family] for r in results if not r.converged]
    _write_json(ctx.path("cheb_summary"), summary)
    return EXIT_OK


def _ladder(ctx: Context, with_t: bool = True):
    R, _ = _ring(ctx)
    dirs = directions(R, ctx.spec.curve_tols, ctx.seed)
    K = _sample(ctx, R)
    rep = diameter_ladder(
        K, ctx.spec.n_max, R, dirs, refine=True, passes=ctx.spec.refine_passes, with_t=with_t,
        cheb_tol=ctx.spec.tols["cheb_tol"], threads=ctx.threads,
    )
    return R, dirs, K, rep


def cmd_fekete(ctx: Context) -> int:
    R, dirs, K, rep = _ladder(ctx)
    write_ladder_csv(ctx.path("fekete"), rep, ctx.stamp())
    data = rep.summary()
    data["equivalence"] = monomial_equivalence_check(rep, K, R, dirs)
    data.update(ctx.stamp(), sample_size=len(K))
    _write_json(ctx.path("fekete_summary"), data)
    return EXIT_OK


def cmd_verify(ctx: Context) -> int:
    R, dirs, K, rep = _ladder(ctx, with_t=False)
    write_ladder_csv(ctx.path("fekete"), rep, ctx.stamp())
    row = rep.row(ctx.spec.n_max)
    diags = {str(j): lim["diagnostic"] for j, lim in rep.limits.items()}
    gap_ok = row.gap <= ctx.spec.tols["gap_tol"]
    diag_ok = all(v <= ctx.spec.tols["diagnostic_tol"] for v in diags.values())
    conv_ok = all(r.converged for r in rep.tau.values())
    passed = gap_ok and diag_ok and conv_ok
    out = {
        "n": row.n,
        "d_n": row.d_n,
        "cheb_side": row.cheb_side,
        "gap": row.gap,
        "gap_tol": ctx.spec.tols["gap_tol"],
        "diagnostics": diags,
        "diagnostic_tol": ctx.spec.tols["diagnostic_tol"],
        "all_converged": conv_ok,
        "sample_size": len(K),
        "sample_warning": rep.sample_warning,
        "half_density": _half_density(ctx, R, dirs, row),
        "pass": passed,
        **ctx.stamp(),
    }
    _write_json(ctx.path("verify"), out)
    return EXIT_OK if passed else EXIT_TOLERANCE


def cmd_transform(ctx: Context) -> int:
    tr = ctx.spec.transform
    if tr is None:
        raise InputError("the transform command needs a 'transform' block in the spec")
    R, _ = _ring(ctx)
    dirs = directions(R, ctx.spec.curve_tols, ctx.seed)
    K = _sample(ctx, R)
    T = tr["map"]
    I2, K2 = apply_affine(T, K, R.G)
    R2 = build_ring(I2)
    check_hypotheses(R2, ctx.spec.curve_tols, ctx.seed).require()
    dirs2 = directions(R2, ctx.spec.curve_tols, ctx.seed)
    tol, iters = ctx.spec.tols["cheb_tol"], ctx.spec.tols["max_iters"]
    rows = transform_check(R, K, dirs, T, R2, K2, dirs2, tr["s"], tol, iters)
    law = transform_law_check(K, K2, T, tr["n_max"], R, dirs, R2, dirs2)
    ttol = ctx.spec.tols["transform_tol"]
    cheb_ok = all(r.gap <= ttol for r in rows)
    out = {
        "transform": tr["text"],
        "image_generators": [str(g) for g in R2.G.elements],
        "chebyshev": [dict(r.__dict__, first_coordinate=[r.first_coordinate.real, r.first_coordinate.imag])
                      for r in rows],
        "diameter": law,
        "transform_tol": ttol,
        "pass": cheb_ok and law["root_gap"] <= ttol,
        **ctx.stamp(),
    }
    _write_json(ctx.path("transform"), out)
    return EXIT_OK if out["pass"] else EXIT_TOLERANCE


COMMANDS = {
    "analyze": cmd_analyze,
    "cheb": cmd_cheb,
    "fekete": cmd_fekete,
    "verify": cmd_verify,
    "transform": cmd_transform,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvecap", description="Chebyshev constants and transfinite diameter on algebraic curves")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--spec", required=True, help="JSON job spec")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--seed", type=int, default=None, help="overrides analysis.seed")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _error_payload(exc: BaseException, code: int) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if hasattr(exc, "check"):
        out["check"] = exc.check
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    out = Path(args.out)
    code = EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        spec = load_spec(args.spec)
        if args.threads is not None and args.threads < 1:
            raise InputError("--threads must be at least 1")
        threads = args.threads or os.cpu_count() or 1
        seed = spec.seed if args.seed is None else args.seed
        if seed < 0:
            raise InputError("--seed must be non-negative")
        code = COMMANDS[args.command](Context(spec, out, threads, seed))
    except CurvecapError as exc:
        code = exc.exit_code
        payload = _error_payload(exc, code)
    except (ValueError, ZeroDivisionError) as exc:  # parse-level failures that slipped through
        code = EXIT_INPUT
        payload = _error_payload(exc, code)
    except (ArithmeticError, FloatingPointError, MemoryError, RuntimeError) as exc:
        code = EXIT_NUMERIC
        payload = _error_payload(exc, code)
    else:
        return code
    print(json.dumps(payload), file=sys.stderr)
    try:
        _write_json(out / "error.json", payload)
    except OSError:
        pass
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
