"""Batch front door: load functions, run factorizations, emit reports.

Exit codes: 0 success, 2 precondition violations (with a machine-readable
diagnostic on stderr naming the violated bound), 1 internal invariant
failures.  Reports embed the exact constants used so runs are reproducible;
re-running with the same config and seed is byte-identical apart from the
timestamp field.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import finite as finite_mod
from . import graphs as graphs_mod
from . import probe as probe_mod
from . import scheme as scheme_mod
from .errors import OpenMultError, PreconditionViolated
from .functions import (
    GraphFunction,
    GridFunction,
    function_from_json,
    grid_function_from_csv,
    refine,
)
from .interval import PipelineConfig, open_mult_interval

# Content that is not desk-verifiable is refused explicitly.
UNSUPPORTED_MODELS = {
    "group": "group convolution algebras are not desk-verifiable here",
    "convolution": "group convolution algebras are not desk-verifiable here",
    "ultrapower": "ultrapower constructions are not desk-verifiable here",
    "bidual": "bidual algebras are not desk-verifiable here",
    "metric": "general compact metric spaces are out of scope",
    "inverse-limit": "inverse-limit spaces are out of scope",
}


def _load_input(path):
    if str(path).endswith(".csv"):
        return {"f": grid_function_from_csv(path)}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _parse_function(obj):
    return function_from_json(obj)


def _maybe_refine(fn, grid):
    if grid is None or not isinstance(fn, GridFunction):
        return fn
    n = fn.domain.n
    if grid <= n:
        return fn
    factor = math.ceil((grid - 1) / (n - 1))
    return refine(fn, factor)


def _emit(report, args, csv_rows=None, csv_header=None):
    if args.format == "csv" and csv_rows is not None:
        target = args.output or "/dev/stdout"
        with open(target, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            if csv_header:
                writer.writerow(csv_header)
            writer.writerows(csv_rows)
        return
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _base_report(args, command):
    return {
        "command": command,
        "epsilon": args.epsilon,
        "seed": args.seed,
        "timestamp": time.time(),
    }


def _cmd_factor_interval(args):
    data = _load_input(args.input)
    f = _maybe_refine(_parse_function(data["f"]), args.grid)
    g = _maybe_refine(_parse_function(data["g"]), args.grid)
    d = _maybe_refine(_parse_function(data["d"]), args.grid)
    result = open_mult_interval(f, g, d, args.epsilon)
    cfg = PipelineConfig.for_target(args.epsilon)
    report = _base_report(args, "factor-interval")
    report["constants"] = {
        "epsilon0": repr(cfg.epsilon0),
        "epsilon1": repr(cfg.epsilon1),
        "delta0": repr(cfg.delta0),
    }
    report["result"] = result.to_json()
    ts = f.domain.nodes()
    rows = [
        [t, v1.real, v1.imag, v2.real, v2.imag]
        for t, v1, v2 in zip(ts, result.d1.values, result.d2.values)
    ]
    _emit(report, args, rows, ["t", "d1_re", "d1_im", "d2_re", "d2_im"])
    return 0


def _cmd_factor_graph(args):
    data = _load_input(args.input)
    f = _parse_function(data["f"])
    g = _parse_function(data["g"])
    d = _parse_function(data["d"])
    if not isinstance(f, GraphFunction):
        raise PreconditionViolated("factor-graph expects graph-domain functions")
    result = graphs_mod.open_mult_graph(f, g, d, args.epsilon)
    cfg = PipelineConfig.for_target(args.epsilon)
    report = _base_report(args, "factor-graph")
    report["constants"] = {
        "epsilon0": repr(cfg.epsilon0),
        "epsilon1": repr(cfg.epsilon1),
        "delta0": repr(cfg.delta0),
    }
    report["result"] = result.to_json()
    rows = []
    for ei, er in enumerate(result.edge_results):
        for t, v1, v2 in zip(er.d1.domain.nodes(), er.d1.values, er.d2.values):
            rows.append([ei, t, v1.real, v1.imag, v2.real, v2.imag])
    _emit(report, args, rows, ["edge", "t", "d1_re", "d1_im", "d2_re", "d2_im"])
    return 0


def _cmd_factor_finite(args):
    data = _load_input(args.input)
    a = _parse_function(data["a"])
    b = _parse_function(data["b"])
    d = _parse_function(data["d"])
    a2, b2 = finite_mod.open_mult_finite(a, b, d, args.epsilon)
    report = _base_report(args, "factor-finite")
    report["constants"] = {
        "epsilon": repr(args.epsilon),
        "delta": repr(args.epsilon**2 / 4.0),
    }
    report["a_prime"] = a2.to_json()
    report["b_prime"] = b2.to_json()
    report["bound_a"] = repr(float(np.max(np.abs(a2.values - a.values))))
    report["bound_b"] = repr(float(np.max(np.abs(b2.values - b.values))))
    rows = [
        [i, va.real, va.imag, vb.real, vb.imag]
        for i, (va, vb) in enumerate(zip(a2.values, b2.values))
    ]
    _emit(report, args, rows, ["index", "a_re", "a_im", "b_re", "b_im"])
    return 0


def _build_model(spec_obj, sample):
    kind = spec_obj.get("type")
    if kind in UNSUPPORTED_MODELS:
        raise PreconditionViolated(UNSUPPORTED_MODELS[kind], bound="model")
    if kind == "sup":
        return scheme_mod.sup_algebra_model(sample.n)
    if kind == "diagonal":
        if not spec_obj.get("unital", True):
            raise PreconditionViolated("only the unitisation of the diagonal algebra is supported", bound="model")
        return scheme_mod.diagonal_algebra_model(np.asarray(spec_obj["weights"], dtype=float))
    raise PreconditionViolated(f"unknown model type {kind!r}", bound="model")


def _cmd_scheme(args):
    data = _load_input(args.input)
    model_obj = data.get("model", {"type": "sup"})
    if model_obj.get("type") == "diagonal":
        weights = model_obj["weights"]
        F = finite_mod.DiagonalAlgebraElement.from_json(data["F"], weights)
        G = finite_mod.DiagonalAlgebraElement.from_json(data["G"], weights)
        H = finite_mod.DiagonalAlgebraElement.from_json(data["H"], weights)
        model = _build_model(model_obj, F)
    else:
        F = _parse_function(data["F"])
        G = _parse_function(data["G"])
        H = _parse_function(data["H"])
        model = _build_model(model_obj, F)
    params = scheme_mod.scheme_params(F, G, args.epsilon, model)
    f, g, trace = scheme_mod.run_scheme(F, G, H, params, model, audit=True)
    audit = scheme_mod.audit_claims(trace, params)
    report = _base_report(args, "scheme")
    report["constants"] = params.to_json()
    report["iterations"] = len(trace)
    report["claims_pass"] = audit["pass"]
    report["final_defect_norm"] = repr(trace.records[-1].norm_h)
    report["distance_f"] = repr(model.norm(f - F))
    report["distance_g"] = repr(model.norm(g - G))
    if args.audit:
        report["audit"] = audit
    report["trace"] = [rec.to_json() for rec in trace]
    rows = [
        [rec.n, rec.norm_f, rec.norm_g, rec.norm_h, rec.inf_embed, rec.identity_residual]
        for rec in trace
    ]
    _emit(report, args, rows, ["n", "norm_f", "norm_g", "norm_h", "inf_embed", "identity_residual"])
    return 0


def _cmd_probe(args):
    data = _load_input(args.input)
    f = _maybe_refine(_parse_function(data["f"]), args.grid)
    g = _maybe_refine(_parse_function(data["g"]), args.grid)
    trials = int(data.get("trials", 8))
    rep = probe_mod.probe_pipeline(f, g, args.epsilon, trials, args.seed)
    report = _base_report(args, "probe")
    report["constants"] = {
        "epsilon0": repr(args.epsilon),
        "delta0": repr(rep.delta_constructive),
    }
    report["result"] = rep.to_json()
    rows = [[repr(r), rate] for r, rate in rep.curve]
    _emit(report, args, rows, ["r", "success_rate"])
    return 0


def _cmd_nondeg_approx(args):
    data = _load_input(args.input)
    f = _parse_function(data["f"])
    g = _parse_function(data["g"])
    f2, g2 = finite_mod.nondeg_approx(f, g, args.epsilon)
    report = _base_report(args, "nondeg-approx")
    report["constants"] = {"epsilon": repr(args.epsilon)}
    report["f_prime"] = f2.to_json()
    report["g_prime"] = g2.to_json()
    report["distance_f"] = repr(float(np.max(np.abs(f2.values - f.values))))
    report["distance_g"] = repr(float(np.max(np.abs(g2.values - g.values))))
    report["min_joint_modulus_sq"] = repr(
        float(np.min(np.abs(f2.values) ** 2 + np.abs(g2.values) ** 2))
    )
    rows = [
        [i, va.real, va.imag, vb.real, vb.imag]
        for i, (va, vb) in enumerate(zip(f2.values, g2.values))
    ]
    _emit(report, args, rows, ["index", "f_re", "f_im", "g_re", "g_im"])
    return 0


COMMANDS = {
    "factor-interval": _cmd_factor_interval,
    "factor-graph": _cmd_factor_graph,
    "factor-finite": _cmd_factor_finite,
    "scheme": _cmd_scheme,
    "probe": _cmd_probe,
    "nondeg-approx": _cmd_nondeg_approx,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openmult",
        description="Factor perturbed products in discretized function algebras with certified bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="input JSON (or CSV for a single grid function)")
        p.add_argument("--epsilon", type=float, required=True, help="target bound in (0, 1)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid", type=int, default=None, help="refine grid inputs to at least this many nodes")
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--audit", action="store_true", help="embed the per-iteration claim audit")
    return parser


def _diagnostic(exc) -> str:
    diag = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("bound", "value", "limit"):
        val = getattr(exc, attr, None)
        if val is not None:
            diag[attr] = val
    return json.dumps(diag, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0.0 < args.epsilon < 1.0:
        print(_diagnostic(PreconditionViolated("epsilon must lie in (0, 1)", bound="epsilon")), file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except PreconditionViolated as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 2
    except OpenMultError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 2 if _is_input_error(exc) else 1
    except (RuntimeError, AssertionError) as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 1


def _is_input_error(exc) -> bool:
    from .errors import (
        BoundaryMismatch,
        CoverInfeasible,
        DegeneratePair,
        DomainMismatch,
        EqualModulusRoots,
        NonUnimodularInput,
        NormBudgetExceeded,
        ZeroArgument,
    )

    return isinstance(
        exc,
        (
            BoundaryMismatch,
            CoverInfeasible,
            DegeneratePair,
            DomainMismatch,
            EqualModulusRoots,
            NonUnimodularInput,
            NormBudgetExceeded,
            ZeroArgument,
        ),
    )


if __name__ == "__main__":
    sys.exit(main())
