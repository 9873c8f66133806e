"""Batch front-end: JSON problem configs in, JSON/CSV reports out.

Exit codes for ``classify``: 0 feasible and certified, 2 inconclusive,
3 certified infeasible, 1 input error.  ``QTRACE_THREADS`` caps the
thread pools of the numerical backend and must be handled before numpy
is imported, which is why this module does its heavy imports lazily.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _cap_threads() -> None:
    cap = os.environ.get("QTRACE_THREADS")
    if cap:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)


_cap_threads()

import numpy as np  # noqa: E402

from .laurent import LaurentPoly  # noqa: E402
from .qweyl_algebra import AlgebraParams  # noqa: E402
from .serialize import dumps  # noqa: E402


class ConfigError(ValueError):
    pass


DEFAULTS = {"W": 32, "samples": 4096, "gram_m": 8, "gram_m_u": 6, "seed": 42}


def _parse_poly(node) -> LaurentPoly:
    if not isinstance(node, dict):
        raise ConfigError("P must be a JSON object")
    if "roots" in node:
        roots = [complex(r[0], r[1]) for r in node["roots"]]
        leading = node.get("leading", [1.0, 0.0])
        return LaurentPoly.from_roots(
            roots,
            leading=complex(leading[0], leading[1]),
            min_exp=int(node.get("min_exp", 0)),
        )
    try:
        return LaurentPoly.from_json_dict(node)
    except (TypeError, ValueError, IndexError, KeyError) as exc:
        raise ConfigError(f"malformed P coefficient map: {exc}") from exc


def load_config(path: str) -> dict:
    """Parse and validate a problem configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from exc

    if "q" not in raw:
        raise ConfigError("config is missing 'q'")
    q = raw["q"]
    if not isinstance(q, (int, float)) or not 0.0 < q < 1.0:
        raise ConfigError("q must lie in (0,1)")
    if "P" not in raw:
        raise ConfigError("config is missing 'P'")
    P = _parse_poly(raw["P"])
    k = raw.get("k", 0)
    if not isinstance(k, int):
        raise ConfigError("k must be an integer (half-integer twists are rejected)")
    l = raw.get("l")
    if l is not None and not isinstance(l, int):
        raise ConfigError("l must be an integer when given")
    W = int(raw.get("W", DEFAULTS["W"]))
    if W < 8:
        raise ConfigError("W must be at least 8")
    samples = int(raw.get("samples", max(DEFAULTS["samples"], 8 * W)))
    if samples < 8 * W or samples & (samples - 1) != 0:
        raise ConfigError("samples must be a power of two with samples >= 8W")
    cfg = {
        "q": float(q),
        "P": P,
        "k": k,
        "l": l,
        "W": W,
        "samples": samples,
        "gram_m": int(raw.get("gram_m", DEFAULTS["gram_m"])),
        "gram_m_u": int(raw.get("gram_m_u", DEFAULTS["gram_m_u"])),
        "seed": int(raw.get("seed", DEFAULTS["seed"])),
        "tolerances": raw.get("tolerances", {}),
    }
    try:
        cfg["params"] = AlgebraParams(q=cfg["q"], P=P, k=k, l=l)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _write_out(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_ansatz(cfg):
    from .positivity import build_paired_ansatz, prepare_configuration
    from .trace_engine import moments

    gauged, poles, _sol, oriented, _phase = prepare_configuration(cfg["params"])
    ansatz = build_paired_ansatz(gauged, poles)
    raw = moments(ansatz, cfg["W"], cfg["samples"])
    mt = raw.normalize()
    ansatz = ansatz.scaled(1.0 / raw.get(0))
    return oriented, ansatz, mt


def cmd_classify(args) -> int:
    from .positivity import classify

    cfg = load_config(args.config)
    report = classify(
        cfg["params"],
        window=cfg["W"],
        samples=cfg["samples"],
        gram_m=cfg["gram_m"],
        gram_m_u=cfg["gram_m_u"],
        trials=args.trials,
        seed=args.seed if args.seed is not None else cfg["seed"],
        tolerances=cfg["tolerances"],
    )
    _write_out(dumps(report.to_json_dict()), args.out)
    return report.exit_code


def cmd_moments(args) -> int:
    cfg = load_config(args.config)
    _, _, mt = _build_ansatz(cfg)
    max_index = args.max_index if args.max_index is not None else cfg["W"]
    if max_index > mt.W:
        raise ConfigError(f"--max-index {max_index} exceeds window {mt.W}")
    if args.format == "json":
        sub = {
            "W": max_index,
            "normalized": mt.normalized,
            "c": {
                str(i): [mt.get(i).real, mt.get(i).imag]
                for i in range(-max_index, max_index + 1)
            },
        }
        _write_out(dumps(sub), args.out)
    else:
        lines = ["i,re,im,abs"]
        for i in range(-max_index, max_index + 1):
            c = mt.get(i)
            lines.append(
                f"{i},{c.real:.17g},{c.imag:.17g},{abs(c):.17g}"
            )
        _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    from .positivity import DEFAULT_TOLERANCES
    from .trace_engine import (
        moments_by_linear_system,
        oracle_agreement,
        verify_quasiperiodicity,
        verify_twisted_trace,
    )

    cfg = load_config(args.config)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg["tolerances"])
    oriented, ansatz, mt = _build_ansatz(cfg)
    seed = args.seed if args.seed is not None else cfg["seed"]
    rep_trace = verify_twisted_trace(mt, oriented, args.trials, seed)
    rep_quasi = verify_quasiperiodicity(ansatz)
    ls = moments_by_linear_system(oriented, max(48, 2 * cfg["W"]))
    agreement, _kind = oracle_agreement(mt, oriented, ls)
    ok = (
        rep_trace.max_residual <= tol["twisted_trace"]
        and rep_quasi.max_residual <= tol["quasiperiodicity"]
        and agreement <= tol["oracle_agreement"]
    )
    doc = {
        "twisted_trace": rep_trace.to_json_dict(),
        "quasiperiodicity": rep_quasi.to_json_dict(),
        "oracle_agreement_max": agreement,
        "nullspace_dim": ls.nullspace_dim,
        "tolerances": {
            "twisted_trace": tol["twisted_trace"],
            "quasiperiodicity": tol["quasiperiodicity"],
            "oracle_agreement": tol["oracle_agreement"],
        },
        "all_residuals_within_tolerance": ok,
    }
    _write_out(dumps(doc), args.out)
    return 0 if ok else 2


def cmd_emit_circle(args) -> int:
    from .theta import EvaluationSingularityError

    cfg = load_config(args.config)
    oriented, ansatz, _ = _build_ansatz(cfg)
    S = cfg["samples"]
    q = oriented.q
    phis = 2.0 * np.pi * np.arange(S) / S
    lines = ["phi,re,im"]
    bad = 0
    for phi in phis:
        z = complex(np.cos(phi), np.sin(phi))
        try:
            if args.function == "w":
                val = ansatz.evaluate(z)
            else:
                val = z ** oriented.k * oriented.P.evaluate(z) * ansatz.evaluate(q * z)
            lines.append(f"{phi:.17g},{val.real:.17g},{val.imag:.17g}")
        except EvaluationSingularityError:
            bad += 1
            lines.append(f"{phi:.17g},nan,nan")
    if bad:
        print(
            f"warning: {bad} of {S} samples fell within 1e-9 of a pole orbit",
            file=sys.stderr,
        )
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtrace",
        description=(
            "construct, verify and certify twisted traces on generalized"
            " q-Weyl algebras"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="problem config JSON")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("classify", help="full classification pipeline")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("moments", help="emit the moment table")
    common(p)
    p.add_argument("--max-index", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", help="run the trace oracles")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit-circle", help="sample a circle function to CSV")
    common(p)
    p.add_argument("--function", choices=("w", "wP"), default="w")
    p.set_defaults(func=cmd_emit_circle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
