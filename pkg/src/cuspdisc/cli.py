"""Deterministic experiment runner.

    cuspdisc run --config exp.json [--set key=value ...]
    cuspdisc list

A config is a flat JSON object with an "experiment" key plus parameters; flags
override the file.  Each run writes report.json (and CSV tables) into "output".
Exit codes: 0 success, 1 computational error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bishop import (BumpSpec, bump_response, closed_form_disc, smoothing_sweep, solve,
                     translation_sweep, transversality_certificate)
from .circle import BoundarySamples, CircleGrid, hilbert_T1
from .errors import ParameterError
from .funcpair import FunctionPair
from .hypersurface import (Holomorphic, RePart, check_growth_hypotheses, model_from_params,
                           sector_property)
from .levi import (ConeBumpSpec, build_bump, check_condition_2_2, compare_bump, cone_samples,
                   finite_type_thresholds, laplacian_grid, max_admissible_eta, region_grid,
                   write_threshold_csv)
from .sector import (SectorSpec, asymptotic_fit, boundary_trace, default_theta_grid,
                     doubleexp_profile_check)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# -- parameter groups ---------------------------------------------------------------

PAIR = {"pair": "power", "pair_m": 2, "pair_a": 1.0, "epsilon": 0.1}
MODEL = {"model": "finite_type", "m": 2, "p": 1, "c": -2.0, "a": 1.0, "b": 1.5, "alpha_cut": 1.5,
         "g_power": 1, "g_linear": None, "r_coupling": 0.0}
MODEL_KEYS = {
    "zero": (),
    "finite_type": ("m", "p", "c"),
    "inf_single_exp": ("a", "b", "alpha_cut"),
    "inf_double_exp": ("a", "b", "alpha_cut"),
    "tube_failure": ("a", "b"),
    "re_part": (),
}


def make_pair(cfg, kind_key="pair"):
    kind = cfg[kind_key]
    eps = float(cfg["epsilon"])
    if kind == "power":
        return FunctionPair.power(int(cfg["pair_m"]), eps)
    if kind == "exp":
        return FunctionPair.exp(float(cfg["pair_a"]), eps)
    if kind == "double_exp":
        if float(cfg["pair_a"]) > 2:
            # the reachable domain of F* shrinks to nothing beyond this
            raise ConfigError("double_exp experiments are restricted to pair_a <= 2")
        return FunctionPair.double_exp(float(cfg["pair_a"]), eps)
    raise ConfigError(f"unknown pair kind {kind!r}; choose power, exp or double_exp")


def make_model(cfg, pair=None):
    variant = cfg["model"]
    if variant not in MODEL_KEYS:
        raise ConfigError(f"unknown model {variant!r}; choose from {sorted(MODEL_KEYS)}")
    kw = {k: cfg[k] for k in MODEL_KEYS[variant]}
    if "m" in kw:
        kw["m"], kw["p"] = int(kw["m"]), int(kw["p"])
    kw["r_coupling"] = float(cfg["r_coupling"])
    if variant == "re_part":
        if cfg["g_linear"] is not None:
            c = cfg["g_linear"]
            kw["g"] = Holomorphic.linear(complex(*c) if isinstance(c, list) else complex(c))
        else:
            kw["g"] = Holomorphic.of_pair(pair, int(cfg["g_power"]))
    return model_from_params(variant, **kw)


def make_spec(cfg, pair):
    nu = cfg.get("nu")
    return SectorSpec(pair, float(cfg["alpha"]), None if nu is None else int(nu))


# -- experiments --------------------------------------------------------------------

@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    params: dict
    setup: object
    run: object


def _hilbert_setup(cfg):
    grid = CircleGrid(int(cfg["n"]))
    deg = cfg["degree"] if cfg["degree"] is not None else grid.n // 4
    if not 1 <= deg < grid.n // 2:
        raise ConfigError("degree must lie in [1, n/2)")
    return {"grid": grid, "degree": int(deg)}


def _hilbert_run(cfg, ctx):
    grid, deg = ctx["grid"], ctx["degree"]
    rng = np.random.default_rng(int(cfg["seed"]))
    th = grid.thetas
    k = np.arange(1, deg + 1)
    worst, worst_inv = 0.0, 0.0
    for _ in range(int(cfg["trials"])):
        a, b = rng.standard_normal(deg) / k, rng.standard_normal(deg) / k
        c0 = rng.standard_normal()
        v = c0 + np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b
        # v = Im w for w = sum (b_k - i a_k) ... : u = -a sin + b cos, minus its value at 0
        u = -np.sin(np.outer(th, k)) @ a + np.cos(np.outer(th, k)) @ b - np.sum(b)
        got = hilbert_T1(BoundarySamples(grid, v))
        worst = max(worst, float(np.max(np.abs(got.values - u))))
        twice = hilbert_T1(got)
        v1 = c0 + np.sum(a)
        worst_inv = max(worst_inv, float(np.max(np.abs(twice.values - (v1 - v)))))
    results = {"max_error": worst, "involution_error": worst_inv, "degree": deg}
    checks = {"trig_polynomials_1e-12": worst < 1e-12, "involution_1e-10": worst_inv < 1e-10}
    return results, checks, {}


def _sector_setup(cfg):
    pair = make_pair(cfg)
    spec = make_spec(cfg, pair)
    if cfg["profile"] not in ("stated", "leading"):
        raise ConfigError("profile must be 'stated' or 'leading'")
    return {"pair": pair, "spec": spec}


def _sector_run(cfg, ctx):
    spec = ctx["spec"]
    trace = boundary_trace(spec, float(cfg["theta_min"]), float(cfg["theta_max"]), int(cfg["n_points"]))
    results = {"n_points": len(trace), "n_underflow": int(np.sum(trace.underflow))}
    checks = {"trace_finite": bool(np.all(np.isfinite(trace.points)))}
    fixed = cfg["fixed_exponent"]
    fit = asymptotic_fit(trace, None if fixed is None else float(fixed))
    results["fit"] = {"exponent": fit.exponent, "coefficient": fit.coefficient, "r_squared": fit.r_squared}
    if spec.pair.kind.value == "double_exp":
        prof = doubleexp_profile_check(spec, trace, cfg["profile"])
        results["profile"] = {"kind": cfg["profile"], "constant": prof.constant, "deviation": prof.deviation,
                              "spread": prof.spread}
        checks["profile_within_factor_3"] = prof.spread <= 3
    return results, checks, {"boundary.csv": trace.to_csv}


def _disc_setup(cfg):
    pair = make_pair(cfg)
    return {"pair": pair, "spec": make_spec(cfg, pair), "model": make_model(cfg, pair),
            "grid": CircleGrid(int(cfg["n"])),
            "bump": BumpSpec(float(cfg["eta"]), float(cfg["bump_center"]), float(cfg["bump_width"]))}


def _disc_run(cfg, ctx):
    tol = float(cfg["tol"])
    disc = solve(ctx["model"], ctx["spec"], ctx["bump"], ctx["grid"], tol=tol, max_iter=int(cfg["max_iter"]),
                 damping=float(cfg["damping"]), r_shift=float(cfg["r_shift"]))
    results = disc.summary()
    results["dv_dt_quadrature"] = disc.dv_dt_quadrature()
    results["attachment_error"] = disc.attachment_error()
    results["vertex_normalization"] = disc.vertex_normalization
    results["vertex_interpolation_gap"] = disc.vertex_interpolation_gap
    checks = {"residual": disc.residual < tol, "defect_1e-8": disc.defect < 1e-8,
              "vertex_normalized": disc.vertex_normalization < 1e-10,
              "attached": results["attachment_error"] < 1e-12}
    model = ctx["model"]
    if isinstance(model, RePart) and not ctx["bump"].eta and not model.r_coupling:
        err = float(np.max(np.abs(disc.w_boundary() - closed_form_disc(model.g, ctx["spec"], ctx["grid"]))))
        results["closed_form_error"] = err
        checks["closed_form_1e-8"] = err < 1e-8
    return results, checks, {"disc.csv": disc.to_csv}


def _bump_run(cfg, ctx):
    out = []
    for w in cfg["widths"]:
        r = bump_response(ctx["model"], ctx["spec"], BumpSpec(0.0, float(cfg["bump_center"]), float(w)),
                          ctx["grid"], None if cfg["delta"] is None else float(cfg["delta"]))
        out.append({"width": float(w), "d2v_deta_dt": r.d2v_deta_dt, "predicted": r.predicted,
                    "relative_error": r.relative_error, "delta": r.delta})
    checks = {"positive_response": all(o["d2v_deta_dt"] > 0 for o in out)}
    if cfg["model"] == "zero":
        checks["matches_quadrature_2pct"] = all(o["relative_error"] < 0.02 for o in out)
    return {"responses": out}, checks, {}


def _smoothing_run(cfg, ctx):
    sw = smoothing_sweep(ctx["model"], ctx["spec"], tuple(int(v) for v in cfg["nus"]), ctx["grid"])
    cert = transversality_certificate(ctx["model"], SectorSpec(ctx["pair"], ctx["spec"].alpha), ctx["grid"])
    return ({"sweep": sw.as_dict(), "certificate": cert.as_dict()},
            {"monotone": sw.monotone, "certificate_routes_agree": cert.routes_agree}, {})


def _translation_setup(cfg):
    ctx = _disc_setup(cfg)
    if ctx["spec"].nu is None:
        raise ConfigError("translation-sweep needs nu")
    return ctx


def _translation_run(cfg, ctx):
    e, k = float(cfg["offset_extent"]), int(cfg["offset_count"])
    ticks = np.linspace(-e, e, k)
    offsets = [complex(x, y) for x in ticks for y in ticks]
    rep = translation_sweep(ctx["model"], ctx["spec"], offsets, [float(r) for r in cfg["r_shifts"]], ctx["grid"])
    d = rep.as_dict()
    centre = [c for c in rep.cells if c.offset == 0 and c.r_shift == 0]
    checks = {"all_cells_solved": d["n_errors"] == 0}
    if centre:
        checks["dips_at_unshifted_cell"] = centre[0].dipped
    return d, checks, {}


def _levi_setup(cfg):
    region = tuple(float(v) for v in cfg["region"])
    if len(region) != 4:
        raise ConfigError("region must be [x0, x1, y0, y1]")
    region_grid(region, int(cfg["n_nodes"]), cfg["method"])
    pair = make_pair(cfg)
    return {"pair": pair, "model": make_model(cfg, pair), "region": region}


def _levi_run(cfg, ctx):
    rep = laplacian_grid(ctx["model"], ctx["region"], int(cfg["n_nodes"]), float(cfg["r"]), cfg["method"])
    return rep.as_dict(), {"subharmonic_1e-8": rep.holds(1e-8)}, {}


def _cone_setup(cfg):
    ctx = _levi_setup(cfg)
    ctx["cone"] = ConeBumpSpec(ctx["pair"], float(cfg["alpha"]), float(cfg["alpha1"]))
    return ctx


def _cone_run(cfg, ctx):
    model, cone, region = ctx["model"], ctx["cone"], ctx["region"]
    n, method = int(cfg["n_nodes"]), cfg["method"]
    ann = cone_samples(cone.pair, cone.alpha, cone.alpha1)
    c22 = check_condition_2_2(model, cone.pair, cone.alpha, cone.alpha1, ann)
    eta_star = max_admissible_eta(model, cone, region, n, method)
    eta = float(cfg["eta"]) if cfg["eta"] is not None else 0.5 * eta_star
    results = {"levi_lower_constant": c22, "eta_star": eta_star, "eta": eta}
    checks = {"levi_lower_bound": c22 > 0, "eta_star_positive": eta_star > 0}
    if eta > 0:
        bumped = build_bump(model, cone.with_eta(eta), ann)
        rep = laplacian_grid(bumped, region, n, method=method)
        k = int(cfg["n_samples"])
        x0, x1, y0, y1 = region
        X, Y = np.meshgrid(np.linspace(x0, x1, k), np.linspace(y0, y1, k))
        inner = cone_samples(cone.pair, 0.0, cone.alpha, include_inner=True)
        cmp = compare_bump(bumped, (X + 1j * Y).ravel(), inner)
        results.update({"bounds": bumped.bounds, "laplacian": rep.as_dict(), "comparison": cmp.as_dict()})
        checks.update({"bumped_subharmonic_1e-8": rep.holds(1e-8), "bump_below_h": cmp.holds,
                       "cutoff_bounds_below_20": max(bumped.bounds["first"], bumped.bounds["second"]) < 20})
    return results, checks, {}


def _threshold_setup(cfg):
    m, p = int(cfg["m"]), int(cfg["p"])
    if not 1 <= p <= m:
        raise ConfigError(f"need 1 <= p <= m, got m={m}, p={p}")
    return {}


def _threshold_run(cfg, ctx):
    res = finite_type_thresholds(int(cfg["m"]), int(cfg["p"]), float(cfg["alpha"]), float(cfg["tol"]))
    checks = {"sector_threshold_found": res.c_sector is not None,
              "subharmonic_threshold_found": res.c_subharmonic is not None}
    return res.as_dict(), checks, {"thresholds.csv": lambda path: write_threshold_csv([res], path)}


def _hyp_setup(cfg):
    pair = make_pair(cfg)
    return {"pair": pair, "spec": make_spec(cfg, pair), "model": make_model(cfg, pair)}


def _hypothesis_run(cfg, ctx):
    th = default_theta_grid(int(cfg["n_theta"]), float(cfg["theta_min"]))
    spec = SectorSpec(ctx["pair"], ctx["spec"].alpha)
    r_grid = [float(r) for r in cfg["r_grid"]]
    growth = check_growth_hypotheses(ctx["model"], ctx["pair"], spec.alpha, th, r_grid)
    sp = sector_property(ctx["model"], spec, th, r_grid)
    results = {"growth": {**growth.as_dict(), "per_r": {repr(k): v for k, v in growth.per_r.items()}},
               "sector_property": {"max_h": sp.max_h, "n_strict": int(len(sp.strict_tau)),
                                   "n_samples": sp.n_samples, "argmax_tau": sp.argmax_tau}}
    bounded = all(math.isfinite(v) for v in (growth.h_over_F, growth.d1_over_dF, growth.d2_over_d2F))
    return results, {"growth_bounded": bounded, "sector_property": sp.holds}, {}


def _disc_only(keys):
    return {**PAIR, **MODEL, "alpha": 1.5, "nu": None, "n": 4096, **keys}


EXPERIMENTS = {e.name: e for e in [
    Experiment("hilbert-selftest", "T1 on random trigonometric polynomials and the involution identity",
               {"n": 4096, "degree": None, "trials": 3, "seed": 0}, _hilbert_setup, _hilbert_run),
    Experiment("sector-profile", "boundary trace of a sector with power-law fit and double-exp profile check",
               {**PAIR, "alpha": 1.5, "nu": None, "theta_min": 1e-6, "theta_max": 0.5, "n_points": 200,
                "profile": "stated", "fixed_exponent": None}, _sector_setup, _sector_run),
    Experiment("solve-disc", "Bishop solve with invariant checks and the closed-form oracle for re_part",
               _disc_only({"eta": 0.0, "bump_center": math.pi, "bump_width": 0.5, "tol": 1e-11,
                           "max_iter": 200, "damping": 1.0, "r_shift": 0.0}), _disc_setup, _disc_run),
    Experiment("bump-response", "eta-derivative of vertex transversality against its quadrature prediction",
               _disc_only({"model": "zero", "eta": 0.0, "bump_center": math.pi, "bump_width": 0.5,
                           "widths": [0.3, 0.5, 1.0], "delta": 1e-4}), _disc_setup, _bump_run),
    Experiment("smoothing-sweep", "transversality over smoothed sectors and the unsmoothed limit",
               _disc_only({"alpha": 1.2, "eta": 0.0, "bump_center": math.pi, "bump_width": 0.5,
                           "nus": [4, 8, 16, 32, 64]}), _disc_setup, _smoothing_run),
    Experiment("translation-sweep", "discs over translated smoothed sectors; records dipping below s = h",
               _disc_only({"alpha": 1.2, "nu": 32, "eta": 0.0, "bump_center": math.pi, "bump_width": 0.5,
                           "offset_extent": 0.02, "offset_count": 5, "r_shifts": [0.0]}),
               _translation_setup, _translation_run),
    Experiment("levi-check", "grid Laplacian of a model over a rectangle",
               {**PAIR, **MODEL, "model": "tube_failure", "a": 0.4, "b": 0.8,
                "region": [0.0015, 0.0615, -0.03, 0.03], "n_nodes": 201, "method": "stencil", "r": 0.0},
               _levi_setup, _levi_run),
    Experiment("cone-bump", "conical pseudoconvex bump: Levi lower bound, admissible eta, bumped checks",
               {**PAIR, **MODEL, "pair": "exp", "pair_a": 0.8, "model": "tube_failure", "a": 0.4, "b": 0.8,
                "alpha": 0.5, "alpha1": 0.8, "eta": None, "region": [0.0015, 0.0615, -0.03, 0.03],
                "n_nodes": 401, "method": "stencil9", "n_samples": 100}, _cone_setup, _cone_run),
    Experiment("thresholds", "finite-type sector and subharmonicity thresholds in c",
               {"m": 2, "p": 1, "alpha": 1.01, "tol": 1e-6}, _threshold_setup, _threshold_run),
    Experiment("hypothesis-check", "growth hypotheses and sector property of a model",
               {**PAIR, **MODEL, "alpha": 1.5, "nu": None, "n_theta": 200, "theta_min": 1e-8,
                "r_grid": [0.0]}, _hyp_setup, _hypothesis_run),
]}


# -- config handling ------------------------------------------------------------------

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_config(raw, overrides=()):
    cfg = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg[k.strip()] = _parse_value(v)
    name = cfg.pop("experiment", None)
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown or missing experiment {name!r}; run 'list' for the catalogue")
    exp = EXPERIMENTS[name]
    output = cfg.pop("output", os.path.join("cuspdisc-out", name))
    unknown = sorted(set(cfg) - set(exp.params))
    if unknown:
        raise ConfigError(f"unknown keys for {name}: {', '.join(unknown)}")
    return exp, {**exp.params, **cfg}, output


def _jsonable(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _clean(obj):
    """Non-finite floats as strings so reports stay strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return repr(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    return obj


def _atomic(path, writer):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    os.close(fd)
    try:
        writer(tmp)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def build_report(name, cfg, results, checks):
    return _clean({"schema_version": SCHEMA_VERSION, "version": __version__, "experiment": name,
                   "config": cfg, "results": results,
                   "checks": {k: bool(v) for k, v in checks.items()}, "passed": all(checks.values())})


def run(raw, overrides=(), stderr=None):
    stderr = sys.stderr if stderr is None else stderr
    try:
        exp, cfg, output = resolve_config(raw, overrides)
        ctx = exp.setup(cfg)
    except (ConfigError, ParameterError, ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=stderr)
        return 2
    try:
        results, checks, tables = exp.run(cfg, ctx)
        report = build_report(exp.name, cfg, results, checks)
        text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"
    except Exception as exc:  # computational failure: report and exit 1
        print(f"{exp.name} failed: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    os.makedirs(output, exist_ok=True)
    for fname, writer in sorted(tables.items()):
        _atomic(os.path.join(output, fname), writer)

    def write_report(path):
        with open(path, "w") as fh:
            fh.write(text)

    _atomic(os.path.join(output, "report.json"), write_report)
    failed = [k for k, v in checks.items() if not v]
    print(f"{exp.name}: {len(checks) - len(failed)}/{len(checks)} checks passed"
          + (f" (failed: {', '.join(failed)})" if failed else "") + f"; report in {output}", file=stderr)
    return 0


def list_experiments(out=None):
    out = sys.stdout if out is None else out
    for name, exp in EXPERIMENTS.items():
        print(f"{name}: {exp.summary}", file=out)
        for k, v in exp.params.items():
            print(f"    {k} = {json.dumps(v)}", file=out)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="cuspdisc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
    sub.add_parser("list", help="print the experiment catalogue")
    args = parser.parse_args(argv)
    if args.command == "list":
        list_experiments()
        return 0
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    if not isinstance(raw, dict):
        print("config error: the config must be a JSON object", file=sys.stderr)
        return 2
    return run(raw, args.set)


if __name__ == "__main__":
    sys.exit(main())
