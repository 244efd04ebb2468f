"""Config ingestion, subcommands, and report rendering.

Configs are single JSON documents describing the driving kernel, the fiber
space, the family, and optionally a stationary vector and a named test
function. Reports are plain text with stable line prefixes (IRREDUCIBLE:,
STRICT:, SKEW_ERGODIC:, ...) so scripts can grep them. The simulate
subcommand emits the convergence-trace CSV defined in the ergodic module
and is byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from dataclasses import dataclass

import numpy as np

from . import ergodic
from .dynamics import (
    FiniteMeasureSpace,
    TransformationFamily,
    family_invariant_partition,
    is_family_ergodic,
)
from .errors import NotApplicable, ParseError, ValidationError
from .kernels import (
    MarkovSpec,
    ProbVector,
    StochasticMatrix,
    deterministic_sets,
    dual_sim_classes,
    is_irreducible,
    is_strictly_irreducible,
    reverse_kernel,
    sim_classes,
    stationary_distribution,
    strict_irreducibility_routes,
    validate_spec,
)
from .skew import (
    SkewSystem,
    build_base_counterexample,
    build_counterexample_family,
    check_product_structure,
    counterexample_invariant_set,
    is_skew_ergodic,
)

DEFAULT_HORIZONS = (100, 1_000, 10_000, 100_000)
DEFAULT_TRIALS = 200


@dataclass(frozen=True)
class SystemConfig:
    """Validated shape of a config document (values still unchecked)."""

    states: tuple[str, ...]
    kernel: tuple[tuple[float, ...], ...]
    stationary: tuple[float, ...] | None
    points: tuple[str, ...]
    mu: tuple[float, ...]
    family: tuple[tuple[str, tuple[str, ...]], ...]
    function: tuple[str, tuple[float, ...]] | None


def _require(doc: dict, field: str, kind, where: str = ""):
    label = f"{where}{field}"
    if field not in doc:
        raise ParseError(label, "missing")
    value = doc[field]
    if kind is list and not isinstance(value, list):
        raise ParseError(label, "must be a list")
    if kind is dict and not isinstance(value, dict):
        raise ParseError(label, "must be an object")
    return value


def _floats(values, field: str) -> tuple[float, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(field, f"expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _labels(values, field: str) -> tuple[str, ...]:
    if not values or not all(isinstance(v, str) for v in values):
        raise ParseError(field, "must be a non-empty list of strings")
    if len(set(values)) != len(values):
        raise ParseError(field, "labels must be unique")
    return tuple(values)


def parse_config(text: str) -> SystemConfig:
    """Parse and shape-check a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("document", f"invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("document", "top level must be an object")
    states = _labels(_require(doc, "states", list), "states")
    kernel_rows = _require(doc, "kernel", list)
    if len(kernel_rows) != len(states):
        raise ParseError("kernel", f"expected {len(states)} rows")
    kernel = []
    for i, row in enumerate(kernel_rows):
        if not isinstance(row, list) or len(row) != len(states):
            raise ParseError(f"kernel[{i}]", f"expected a list of {len(states)} numbers")
        kernel.append(_floats(row, f"kernel[{i}]"))
    stationary = None
    if doc.get("stationary") is not None:
        stat = _require(doc, "stationary", list)
        if len(stat) != len(states):
            raise ParseError("stationary", f"expected {len(states)} entries")
        stationary = _floats(stat, "stationary")
    space = _require(doc, "space", dict)
    points = _labels(_require(space, "points", list, "space."), "space.points")
    mu = _floats(_require(space, "mu", list, "space."), "space.mu")
    if len(mu) != len(points):
        raise ParseError("space.mu", f"expected {len(points)} entries")
    fam_doc = _require(doc, "family", dict)
    missing = [s for s in states if s not in fam_doc]
    if missing:
        raise ParseError("family", f"missing maps for states {missing}")
    extra = [s for s in fam_doc if s not in states]
    if extra:
        raise ParseError("family", f"maps for unknown states {extra}")
    family = []
    for s in states:
        images = fam_doc[s]
        if not isinstance(images, list) or len(images) != len(points):
            raise ParseError(f"family.{s}", f"expected a list of {len(points)} point labels")
        bad = [p for p in images if p not in points]
        if bad:
            raise ParseError(f"family.{s}", f"unknown point labels {bad}")
        family.append((s, tuple(images)))
    function = None
    if doc.get("function") is not None:
        fn = _require(doc, "function", dict)
        name = fn.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError("function.name", "must be a non-empty string")
        values = _require(fn, "values", list, "function.")
        if len(values) != len(points):
            raise ParseError("function.values", f"expected {len(points)} entries")
        function = (name, _floats(values, "function.values"))
    return SystemConfig(
        states=states,
        kernel=tuple(kernel),
        stationary=stationary,
        points=points,
        mu=mu,
        family=tuple(family),
        function=function,
    )


def render_config(cfg: SystemConfig) -> str:
    """Canonical JSON for a config; parse_config . render_config == id."""
    doc: dict = {
        "states": list(cfg.states),
        "kernel": [list(row) for row in cfg.kernel],
    }
    if cfg.stationary is not None:
        doc["stationary"] = list(cfg.stationary)
    doc["space"] = {"points": list(cfg.points), "mu": list(cfg.mu)}
    doc["family"] = {s: list(images) for s, images in cfg.family}
    if cfg.function is not None:
        doc["function"] = {"name": cfg.function[0], "values": list(cfg.function[1])}
    return json.dumps(doc, indent=2) + "\n"


def config_spec(cfg: SystemConfig) -> MarkovSpec:
    kernel = StochasticMatrix.from_rows(cfg.kernel)
    if cfg.stationary is not None:
        m = ProbVector.from_values(cfg.stationary)
    else:
        m = stationary_distribution(kernel)
    return validate_spec(kernel, m)


def config_system(cfg: SystemConfig) -> SkewSystem:
    spec = config_spec(cfg)
    space = FiniteMeasureSpace.create(cfg.points, cfg.mu)
    at = {p: i for i, p in enumerate(cfg.points)}
    tables = [[at[img] for img in images] for _, images in cfg.family]
    family = TransformationFamily.create(space, tables)
    return SkewSystem.create(spec, family)


def _set_str(labels, indices) -> str:
    return "{" + ",".join(labels[i] for i in sorted(indices)) + "}"


def _bool(b) -> str:
    return "true" if b else "false"


def cmd_check(cfg: SystemConfig) -> str:
    """Kernel-level report: invariance, reachability classes, reversal."""
    spec = config_spec(cfg)
    labels = cfg.states
    dev = float(np.abs(spec.m.values @ spec.kernel.values - spec.m.values).max())
    routes = strict_irreducibility_routes(spec)
    lines = [
        f"STATES: {spec.n} support={_set_str(labels, spec.support)}",
        f"STATIONARY: {' '.join(repr(float(v)) for v in spec.m.values)}",
        f"INVARIANT: ok max_deviation={dev:.3e}",
        f"IRREDUCIBLE: {_bool(is_irreducible(spec))}",
        f"STRICT: {_bool(is_strictly_irreducible(spec))}",
        "STRICT_ROUTES: "
        + " ".join(f"{k}={_bool(v)}" for k, v in routes.items()),
        "SIM_CLASSES: "
        + " ".join(_set_str(labels, b) for b in sim_classes(spec).blocks),
        "DUAL_SIM_CLASSES: "
        + " ".join(_set_str(labels, b) for b in dual_sim_classes(spec).blocks),
    ]
    family = deterministic_sets(spec)
    shown = family.sets[:64]
    tag = "complete" if family.complete else "blocks-only"
    suffix = " ..." if len(family.sets) > len(shown) else ""
    lines.append(
        f"DETERMINISTIC_SETS ({tag}): "
        + " ".join(_set_str(labels, s) for s in shown)
        + suffix
    )
    rev = reverse_kernel(spec)
    lines.append("REVERSE_KERNEL:")
    for i, label in enumerate(labels):
        lines.append(f"  {label}: " + " ".join(repr(float(v)) for v in rev.values[i]))
    return "\n".join(lines) + "\n"


def _pair_str(cfg: SystemConfig, pair) -> str:
    y, x = pair
    return f"({cfg.states[y]},{cfg.points[x]})"


def cmd_skew(cfg: SystemConfig) -> str:
    """Skew-product report: family invariants, classes, product structure."""
    sys_ = config_system(cfg)
    spec = sys_.spec
    active = spec.support
    sigma = family_invariant_partition(sys_.family, active)
    report = is_skew_ergodic(sys_)
    lines = [
        f"FAMILY_ERGODIC: {_bool(is_family_ergodic(sys_.family, active))}",
        "SIGMA_PARTITION: "
        + " ".join(_set_str(cfg.points, b) for b in sigma.blocks),
        f"SKEW_ERGODIC: {_bool(report.ergodic)}",
        f"CLASSES: {len(report.classes.blocks)}",
    ]
    for block, mass in zip(report.classes.blocks, report.class_masses):
        members = ",".join(_pair_str(cfg, report.pair_states[i]) for i in sorted(block))
        lines.append(f"CLASS: {{{members}}} mass={float(mass)!r}")
    lines.append(f"PRODUCT_STRUCTURE: {_bool(check_product_structure(sys_))}")
    lines.extend(_counterexample_lines(cfg, spec))
    return "\n".join(lines) + "\n"


def _counterexample_lines(cfg: SystemConfig, spec: MarkovSpec) -> list[str]:
    try:
        counter = build_counterexample_family(spec)
    except NotApplicable:
        counter = None
    if counter is not None:
        swaps = [
            y
            for y in spec.support
            if list(counter.family.maps[int(y)].table) == [1, 0]
        ]
        witness = counterexample_invariant_set(spec)
        mass = sum(
            spec.m.values[y] * counter.family.space.mu.values[x] for y, x in witness
        )
        verdict = is_skew_ergodic(counter)
        return [
            "COUNTEREXAMPLE: ergodic two-point family with non-ergodic skew product",
            f"COUNTEREXAMPLE_SWAP_STATES: {_set_str(cfg.states, swaps)}",
            f"COUNTEREXAMPLE_SKEW_ERGODIC: {_bool(verdict.ergodic)}",
            f"COUNTEREXAMPLE_WITNESS_MASS: {float(mass)!r}",
        ]
    try:
        base = build_base_counterexample(spec)
    except NotApplicable:
        return ["COUNTEREXAMPLE: none (kernel is strictly irreducible)"]
    verdict = is_skew_ergodic(base)
    swaps = [
        y for y in spec.support if list(base.family.maps[int(y)].table) == [1, 0]
    ]
    return [
        "COUNTEREXAMPLE: reducible base; two-point system with non-product invariant structure",
        f"COUNTEREXAMPLE_SWAP_STATES: {_set_str(cfg.states, swaps)}",
        f"COUNTEREXAMPLE_SKEW_ERGODIC: {_bool(verdict.ergodic)}",
        f"COUNTEREXAMPLE_PRODUCT_STRUCTURE: {_bool(verdict.product_structured)}",
    ]


def _resolve_function(cfg: SystemConfig, name: str | None) -> tuple[str, np.ndarray]:
    k = len(cfg.points)
    if name is None:
        if cfg.function is not None:
            return cfg.function[0], np.asarray(cfg.function[1], dtype=float)
        name = f"indicator:{cfg.points[0]}"
    if cfg.function is not None and name == cfg.function[0]:
        return name, np.asarray(cfg.function[1], dtype=float)
    if name.startswith("indicator:"):
        label = name.split(":", 1)[1]
        if label not in cfg.points:
            raise ValidationError(f"unknown point label {label!r} in --f")
        f = np.zeros(k)
        f[cfg.points.index(label)] = 1.0
        return name, f
    raise ValidationError(
        f"unknown function {name!r}; use the config function name or indicator:<point>"
    )


def cmd_simulate(
    cfg: SystemConfig,
    seed: int = 0,
    horizons=DEFAULT_HORIZONS,
    trials: int = DEFAULT_TRIALS,
    f_name: str | None = None,
    x_label: str | None = None,
) -> str:
    """Run the convergence experiment and return its CSV."""
    sys_ = config_system(cfg)
    label, f = _resolve_function(cfg, f_name)
    if x_label is None:
        x = int(sys_.family.space.support[0])
    else:
        if x_label not in cfg.points:
            raise ValidationError(f"unknown point label {x_label!r} in --x")
        x = sys_.family.space.index_of(x_label)
    trace = ergodic.convergence_report(
        sys_,
        f,
        x,
        seed=seed,
        horizons=horizons,
        trials=trials,
        f_label=label,
        x_label=cfg.points[x],
    )
    return trace.to_csv()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stepskew",
        description=(
            "Decide irreducibility, strict irreducibility, and skew-product "
            "ergodicity for finite Markov-driven systems, and run ergodic-"
            "average experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="kernel-level structure report")
    p_check.add_argument("file")

    p_skew = sub.add_parser("skew", help="skew-product structure report")
    p_skew.add_argument("file")

    p_sim = sub.add_parser("simulate", help="convergence experiment CSV")
    p_sim.add_argument("file")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument(
        "--horizons",
        default=",".join(str(h) for h in DEFAULT_HORIZONS),
        help="comma-separated increasing horizons",
    )
    p_sim.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p_sim.add_argument("--f", dest="f_name", default=None)
    p_sim.add_argument("--x", dest="x_label", default=None)
    p_sim.add_argument("--out", default=None)

    p_gal = sub.add_parser("gallery", help="emit a built-in example config")
    p_gal.add_argument("name")
    p_gal.add_argument("--emit", default=None)

    args = parser.parse_args(argv)
    from .gallery import gallery_config

    try:
        if args.command == "gallery":
            try:
                cfg = gallery_config(args.name)
            except KeyError as e:
                print(str(e.args[0]), file=_sys.stderr)
                return 1
            text = render_config(cfg)
            if args.emit:
                with open(args.emit, "w") as fh:
                    fh.write(text)
            else:
                _sys.stdout.write(text)
            return 0
        with open(args.file) as fh:
            cfg = parse_config(fh.read())
        if args.command == "check":
            _sys.stdout.write(cmd_check(cfg))
        elif args.command == "skew":
            _sys.stdout.write(cmd_skew(cfg))
        elif args.command == "simulate":
            horizons = [int(h) for h in str(args.horizons).split(",") if h]
            csv = cmd_simulate(
                cfg,
                seed=args.seed,
                horizons=horizons,
                trials=args.trials,
                f_name=args.f_name,
                x_label=args.x_label,
            )
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(csv)
            else:
                _sys.stdout.write(csv)
        return 0
    except (ParseError, ValidationError) as e:
        print(f"error: {e}", file=_sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
