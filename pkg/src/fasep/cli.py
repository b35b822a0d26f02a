"""Command-line entry point.

Every output file carries the artifact version and a hash of the resolved
experiment settings, and contains no timestamps, so identical settings give
byte-identical files.

Exit codes: 0 ok, 2 invalid settings, 3 dynamics error, 4 capacity error,
5 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .coupling import run_coupled, cylinder_probability
from .dynamics import (ClockScheme, Model, run_for_time, run_to_frozen,
                       sample_bernoulli_window, sample_uniform_ring, spawn_seeds,
                       stationary_snapshots)
from .errors import FasepError, MaxEventsExceeded, NotAbsorbing, SpecError, TooLarge
from .exact import (ExactDistribution, absorption_distribution, build_generator,
                    enumerate_states, stationary_distribution)
from .lattice import LatticeConfig, Topology, is_no_adjacent_holes
from .stats import TestVerdict, cylinder_counts, multinomial_band, pool_tail, tv_distance, verdicts_to_json
from .tasep import gap_law_table
from .verify import Scale, all_passed, gap_experiment, run_suite, valid_patterns

EXIT_OK, EXIT_SPEC, EXIT_DYNAMICS, EXIT_CAPACITY, EXIT_VERIFY = 0, 2, 3, 4, 5


@dataclass
class ExperimentSpec:
    command: str
    model: str = "fasep"
    topology: str = "ring"
    L: Optional[int] = None
    N: Optional[int] = None
    rho: Optional[float] = None
    p: list[str] = field(default_factory=lambda: ["0.5"])
    scheme: str = "site"
    seeds: list[int] = field(default_factory=lambda: [0])
    t_end: Optional[float] = None
    to_frozen: bool = False
    max_events: Optional[int] = None
    snapshot_every: Optional[float] = None
    init: Optional[str] = None
    quick: bool = False
    burn_in: Optional[int] = None
    snapshots: int = 200
    spacing: Optional[int] = None
    stride: int = 10
    min_gaps: int = 100_000
    criteria: Optional[list[int]] = None
    out_dir: str = "out"

    def validate(self) -> None:
        if not self.seeds:
            raise SpecError("seed list is empty")
        if self.model not in ("fasep", "asep"):
            raise SpecError(f"unknown model {self.model!r}")
        if self.topology not in ("ring", "window"):
            raise SpecError(f"unknown topology {self.topology!r}")
        try:
            ClockScheme(self.scheme)
            ps = [Fraction(p) for p in self.p]
        except (ValueError, ZeroDivisionError) as e:
            raise SpecError(str(e)) from None
        if not self.p or any(not 0 <= p <= 1 for p in ps):
            raise SpecError("p values must lie in [0, 1]")
        if self.L is not None and self.L < 1:
            raise SpecError("L must be positive")
        if self.N is not None and self.rho is not None:
            raise SpecError("give N or rho, not both")
        if self.N is not None and self.L is not None and not 0 <= self.N <= self.L:
            raise SpecError(f"need 0 <= N <= L, got N={self.N}, L={self.L}")
        if self.t_end is not None and self.to_frozen:
            raise SpecError("give t_end or to_frozen, not both")

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        return d

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _header(spec: ExperimentSpec) -> dict:
    return {"version": __version__, "spec_hash": spec.hash()}


def _csv_header(spec: ExperimentSpec) -> str:
    return f"# version={__version__} spec_hash={spec.hash()}\n"


def _write(spec: ExperimentSpec, name: str, text: str) -> Path:
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _need(spec: ExperimentSpec, *names: str) -> None:
    missing = [n for n in names if getattr(spec, n) is None]
    if missing:
        raise SpecError(f"{spec.command} needs {', '.join(missing)}")


def _initial(spec: ExperimentSpec, seed: int) -> LatticeConfig:
    if spec.init:
        return LatticeConfig.parse(spec.init, Topology(spec.topology))
    _need(spec, "L")
    if spec.topology == "ring":
        _need(spec, "N")
        return sample_uniform_ring(spec.L, spec.N, seed)
    _need(spec, "rho")
    return sample_bernoulli_window(spec.L, spec.rho, seed)


def _verdict_file(spec: ExperimentSpec, name: str, verdicts: list[TestVerdict]) -> None:
    doc = dict(_header(spec), verdicts=json.loads(verdicts_to_json(verdicts)))
    _write(spec, name, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_simulate(spec: ExperimentSpec) -> int:
    if spec.t_end is None and not spec.to_frozen:
        raise SpecError("simulate needs t_end or to_frozen")
    model = Model(spec.model)
    lines = []
    for p in spec.p:
        for seed in spec.seeds:
            init_seed, dyn_seed = spawn_seeds(seed, 2)
            cfg = _initial(spec, init_seed)
            if spec.to_frozen:
                if model is not Model.FASEP:
                    raise SpecError("to_frozen applies to the facilitated model only")
                rec = run_to_frozen(cfg, float(Fraction(p)), spec.scheme, dyn_seed,
                                    spec.max_events, snapshot_every=spec.snapshot_every)
            else:
                rec = run_for_time(cfg, float(Fraction(p)), spec.scheme, dyn_seed, spec.t_end,
                                   snapshot_every=spec.snapshot_every, model=model)
            rec.seed = seed
            lines.append(json.dumps(dict(_header(spec), **rec.to_dict()), sort_keys=True))
    path = _write(spec, "runs.jsonl", "\n".join(lines) + "\n")
    print(f"wrote {len(lines)} runs to {path}")
    return EXIT_OK


def cmd_exact(spec: ExperimentSpec) -> int:
    _need(spec, "L", "N")
    space = enumerate_states(spec.L, spec.N)
    model = Model(spec.model)
    verdicts = []
    if 2 * spec.N < spec.L:
        init = ExactDistribution.uniform(space)
        laws = []
        for p in spec.p:
            law = absorption_distribution(init, build_generator(space, p, model))
            laws.append(law)
            _write(spec, f"absorption_L{spec.L}_N{spec.N}_p{Fraction(p)}.csv".replace("/", "-"),
                   _csv_header(spec) + law.to_csv())
        bad = sum(law != laws[0] for law in laws[1:])
        verdicts.append(TestVerdict("p-independence", bad, 0, len(laws),
                                    f"frozen laws differing from p={spec.p[0]}", strict=False))
    else:
        for p in spec.p:
            pi = stationary_distribution(build_generator(space, p, model))
            _write(spec, f"stationary_L{spec.L}_N{spec.N}_p{Fraction(p)}.csv".replace("/", "-"),
                   _csv_header(spec) + pi.to_csv())
            if model is Model.FASEP:
                G = [k for k, c in enumerate(space) if is_no_adjacent_holes(c)]
                bad = pi != ExactDistribution.uniform(space, G)
                verdicts.append(TestVerdict(f"uniform on G, p={p}", int(bad), 0, len(G),
                                            "stationary law differs from uniform", strict=False))
    _verdict_file(spec, "exact_report.json", verdicts)
    for v in verdicts:
        print(v.line())
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERIFY


def cmd_couple(spec: ExperimentSpec) -> int:
    if spec.t_end is None and spec.max_events is None:
        raise SpecError("couple needs t_end or max_events")
    lines = []
    viol = 0
    for p in spec.p:
        for seed in spec.seeds:
            init_seed, dyn_seed = spawn_seeds(seed, 2)
            cfg = _initial(spec, init_seed)
            run = run_coupled(cfg, float(Fraction(p)), dyn_seed, spec.t_end, spec.max_events,
                              spec.snapshot_every)
            run.seed = seed
            viol += run.violations
            lines.append(json.dumps(dict(_header(spec), **json.loads(run.to_json())),
                                    sort_keys=True))
    path = _write(spec, "coupled.jsonl", "\n".join(lines) + "\n")
    print(f"wrote {len(lines)} coupled runs to {path}; invariant violations: {viol}")
    return EXIT_OK if viol == 0 else EXIT_DYNAMICS


def cmd_gaps(spec: ExperimentSpec) -> int:
    _need(spec, "rho")
    scale = dataclasses.replace(Scale.full(), min_gaps=spec.min_gaps,
                                gap_window=spec.L or Scale.full().gap_window)
    model = gap_law_table(spec.rho, 20)
    verdicts = []
    for p in spec.p:
        hist, viol = gap_experiment(spec.rho, float(Fraction(p)), scale, spec.seeds[0])
        pooled = pool_tail(hist, 20)
        _write(spec, f"gaps_rho{spec.rho}_p{Fraction(p)}.csv".replace("/", "-"),
               _csv_header(spec) + hist.to_csv())
        verdicts.append(TestVerdict(f"gap law p={p}", tv_distance(pooled, model), 0.02,
                                    hist.total, f"TV to Catalan law; violations={viol}"))
    _verdict_file(spec, "gaps_report.json", verdicts)
    for v in verdicts:
        print(v.line())
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERIFY


def cmd_cylinders(spec: ExperimentSpec) -> int:
    _need(spec, "L", "rho")
    N = round(spec.rho * spec.L)
    verdicts = []
    for p in spec.p:
        rec = stationary_snapshots(sample_uniform_ring(spec.L, N, spec.seeds[0]),
                                   float(Fraction(p)), spec.scheme, spec.seeds[0],
                                   spec.burn_in, spec.snapshots, spec.spacing)
        for m in range(1, 5):
            emp = cylinder_counts(rec.snapshots, m, spec.stride)
            _write(spec, f"cylinders_m{m}_p{Fraction(p)}.csv".replace("/", "-"),
                   _csv_header(spec) + emp.to_csv())
            model = {th: cylinder_probability(th, spec.rho) for th in valid_patterns(m)}
            verdicts.append(multinomial_band(emp, model, 3.0, f"cylinders m={m}, p={p}"))
    _verdict_file(spec, "cylinders_report.json", verdicts)
    for v in verdicts:
        print(v.line())
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_VERIFY


def cmd_verify(spec: ExperimentSpec) -> int:
    scale = Scale.quick() if spec.quick else Scale.full()
    verdicts = run_suite(scale, spec.seeds[0], spec.criteria)
    _verdict_file(spec, "report.json", verdicts)
    for v in verdicts:
        print(v.line())
    return EXIT_OK if all_passed(verdicts) else EXIT_VERIFY


COMMANDS = {"simulate": cmd_simulate, "exact": cmd_exact, "couple": cmd_couple,
            "gaps": cmd_gaps, "cylinders": cmd_cylinders, "verify": cmd_verify}


def load_config(path: str) -> dict:
    text = Path(path).read_text()
    try:
        if path.endswith(".json"):
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise SpecError(f"cannot parse {path}: {e}") from None
    if not isinstance(data, dict):
        raise SpecError(f"{path} must hold a table of settings")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", help="TOML or JSON settings file; flags override it")
    g.add_argument("--seed", type=int, action="append", dest="seeds",
                   help="RNG seed (repeatable)")
    g.add_argument("--out-dir")
    g.add_argument("--quick", action="store_true", default=None)
    e = common.add_argument_group("experiment")
    e.add_argument("--model", choices=["fasep", "asep"])
    e.add_argument("--topology", choices=["ring", "window"])
    e.add_argument("--L", "-L", type=int, dest="L")
    e.add_argument("--N", "-N", type=int, dest="N")
    e.add_argument("--rho", type=float)
    e.add_argument("--p", action="append", help="rate of right jumps (repeatable, e.g. 1/4)")
    e.add_argument("--scheme", choices=[s.value for s in ClockScheme])
    e.add_argument("--init", help="explicit initial configuration, e.g. ring:110100")
    stop = e.add_mutually_exclusive_group()
    stop.add_argument("--t-end", type=float)
    stop.add_argument("--to-frozen", action="store_true", default=None)
    e.add_argument("--max-events", type=int)
    e.add_argument("--snapshot-every", type=float)
    e.add_argument("--burn-in", type=int)
    e.add_argument("--snapshots", type=int)
    e.add_argument("--spacing", type=int)
    e.add_argument("--stride", type=int)
    e.add_argument("--min-gaps", type=int)
    e.add_argument("--criteria", type=int, nargs="+")

    parser = argparse.ArgumentParser(prog="fasep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_spec(args: argparse.Namespace) -> ExperimentSpec:
    settings = load_config(args.config) if args.config else {}
    for k, v in vars(args).items():
        if k not in ("config", "command") and v is not None:
            settings[k] = v
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = set(settings) - known
    if unknown:
        raise SpecError(f"unknown settings: {', '.join(sorted(unknown))}")
    if "p" in settings:
        settings["p"] = [str(x) for x in (settings["p"] if isinstance(settings["p"], list)
                                          else [settings["p"]])]
    if "seeds" in settings and not isinstance(settings["seeds"], list):
        settings["seeds"] = [settings["seeds"]]
    try:
        spec = ExperimentSpec(command=args.command, **settings)
    except TypeError as e:
        raise SpecError(str(e)) from None
    spec.validate()
    return spec


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = resolve_spec(args)
        return COMMANDS[spec.command](spec)
    except TooLarge as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (MaxEventsExceeded, NotAbsorbing) as e:
        print(f"dynamics error: {e}", file=sys.stderr)
        return EXIT_DYNAMICS
    except (SpecError, OSError) as e:
        print(f"invalid settings: {e}", file=sys.stderr)
        return EXIT_SPEC
    except FasepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DYNAMICS


if __name__ == "__main__":
    sys.exit(main())
