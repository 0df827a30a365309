"""Command-line entry point: ``mixedflow run --mode MODE [options]``.

Each run writes into its own directory: ``--out`` if given, otherwise
``$MIXEDFLOW_OUTPUT_ROOT/<mode>`` (root defaults to ``./runs``). A
non-empty directory is only reused with ``--force``.

Exit status: 0 when the gap tolerance was met or the Gaussian checks
passed, 2 when ``t_max`` ran out first (or a Gaussian check failed), 1 on
any input error, in which case no numeric output is written.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend, gaussian, monotonicity, oracle
from .errors import InvalidInputError
from .flow import FlowConfig, default_step, integrate
from .game import MixedStrategy, StrategyProfile
from .io import load_game, load_meanfield, write_csv, write_gaps, write_trajectory
from .meanfield import SymmetricGameView, mf_integrate, symmetric_flow

MODES = ("nplayer", "meanfield", "symmetric", "appendix-b", "gaussian-check")
OUTPUT_ROOT_ENV = "MIXEDFLOW_OUTPUT_ROOT"
EXIT_OK, EXIT_INPUT, EXIT_UNMET = 0, 1, 2


@dataclass
class RunSpec:
    mode: str
    input: Path | None = None
    scheme: str = "projected-euler"
    h: float | None = None
    t_max: float = 100.0
    gap_tol: float = 1e-3
    record_every: int = 10
    inner_tol: float = 1e-12
    inner_max: int = 1000
    x0: str | None = None
    v0: tuple = (0.8, 2.0 / 3.0)
    out: Path | None = None
    force: bool = False
    seed: int = 0
    check_monotone: bool = True
    samples: int = 10**6
    states: int = 3
    pairs: int = 20
    backend: str | None = None

    def validate(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mode in ("nplayer", "meanfield", "symmetric") and self.input is None:
            raise InvalidInputError(f"mode {self.mode} needs --input")
        if self.mode == "gaussian-check" and (self.samples < 2 or self.states < 1 or self.pairs < 1):
            raise InvalidInputError("gaussian-check needs --samples >= 2, --states >= 1, --pairs >= 1")

    def flow_config(self, default_h: float) -> FlowConfig:
        return FlowConfig(
            scheme=self.scheme, h=self.h if self.h is not None else default_h,
            t_max=self.t_max, gap_tol=self.gap_tol, record_every=self.record_every,
            inner_tol=self.inner_tol, inner_max=self.inner_max,
        )


def parse_blocks(text: str) -> list:
    """``"0.5,0.5;1,0"`` -> one array per player."""
    try:
        return [np.array([float(v) for v in block.split(",")]) for block in text.split(";")]
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse initial strategies {text!r}") from exc


def _output_dir(spec: RunSpec) -> Path:
    if spec.out is not None:
        out = Path(spec.out)
    else:
        root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
        stem = f"-{spec.input.stem}" if spec.input is not None else ""
        out = root / f"{spec.mode}{stem}"
    if out.exists() and any(out.iterdir()) and not spec.force:
        raise InvalidInputError(f"output directory {out} is not empty; pass --force to overwrite")
    return out


def _profile_lines(flat, counts, label="player") -> list:
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return [
        f"  {label} {j + 1}: " + " ".join(format(v, ".6f") for v in flat[offsets[j]:offsets[j + 1]])
        for j in range(len(counts))
    ]


def _flow_report(spec, cfg, result, checks, extra=()) -> list:
    lines = [
        f"mode: {spec.mode}",
        f"scheme: {cfg.scheme}  h: {cfg.h:g}  t_max: {cfg.t_max:g}  gap_tol: {cfg.gap_tol:g}",
        f"backend: {spec.backend or _backend.DEFAULT}",
        "monotonicity:",
    ]
    lines += [f"  {name}: {rep.summary()}" for name, rep in checks] or ["  skipped"]
    lines += [
        f"stop reason: {result.stop_reason}",
        f"final time: {result.final_time:.6g}",
        "final Cesaro mean:",
        *_profile_lines(result.cesaro[-1], result.action_counts),
        f"final gap: {result.final_gap:.6g}",
    ]
    if result.fallback_steps:
        lines.append(f"rk4 fallback steps: {result.fallback_steps}")
    if result.nonconverged_steps:
        lines.append(f"implicit steps without inner convergence: {result.nonconverged_steps} "
                     f"(worst residual {result.max_inner_residual:.3g})")
    return lines + list(extra)


def _tensor_run(spec: RunSpec, game, x0):
    cfg = spec.flow_config(default_step(game))
    checks = []
    if spec.check_monotone:
        checks.append(("pure", monotonicity.pure_monotonicity_check(game, seed=spec.seed)))
        checks.append(("variational", monotonicity.variational_monotonicity_check(game, seed=spec.seed)))
    return cfg, checks, integrate(game, x0, cfg, backend=spec.backend)


def _prepare(spec: RunSpec):
    """Load and validate all inputs; returns a closure that computes and writes."""
    spec.validate()
    mode = spec.mode

    if mode == "gaussian-check":
        def execute(out: Path) -> int:
            return _gaussian_check(spec, out)
        return execute

    if mode in ("nplayer", "appendix-b"):
        if mode == "nplayer":
            game = load_game(spec.input)
            x0 = parse_blocks(spec.x0) if spec.x0 else game.uniform_profile()
        else:
            game = oracle.appendix_game()
            v0 = oracle.ReducedState(*spec.v0)
            x0 = parse_blocks(spec.x0) if spec.x0 else oracle.lift(v0)
        x0 = StrategyProfile(tuple(x0))
        if x0.action_counts != game.action_counts:
            raise InvalidInputError(
                f"initial strategies have sizes {x0.action_counts}, game has {game.action_counts}"
            )
        spec.flow_config(default_step(game))

        def execute(out: Path) -> int:
            cfg, checks, result = _tensor_run(spec, game, x0)
            extra = []
            if mode == "appendix-b":
                red = oracle.reduce(result.cesaro_profile())
                dist = np.abs(result.cesaro[-1] - oracle.EQUILIBRIUM.flat()).max()
                extra = [f"reduced Cesaro mean: ({red.v1:.6f}, {red.v2:.6f})",
                         f"distance to equilibrium (max-norm): {dist:.6g}"]
                v0 = oracle.reduce(x0)
                if v0.radius() <= oracle.limit_circle_radius():
                    rows = []
                    for t, s in zip(result.times, result.states):
                        exact = oracle.analytic_solution(v0, t)
                        rows.append((float(t), float(s[0]), float(s[2]), exact.v1, exact.v2))
                    write_csv(out / "analytic.csv", ("t", "v1", "v2", "v1_exact", "v2_exact"), rows)
            _write_flow(out, _flow_report(spec, cfg, result, checks, extra), result)
            return EXIT_OK if result.stop_reason == "gap_tol-met" else EXIT_UNMET
        return execute

    if mode == "meanfield":
        cost = load_meanfield(spec.input)
        mu0 = _single_block(spec, cost.m)
        spec.flow_config(1e-2)

        def execute(out: Path) -> int:
            cfg = spec.flow_config(1e-2)
            checks = []
            if spec.check_monotone:
                checks.append(("mean-field", monotonicity.mf_monotonicity_check(cost, seed=spec.seed)))
            result = mf_integrate(cost, mu0, cfg)
            mean = result.cesaro[-1]
            support = [str(k + 1) for k in np.nonzero(mean > 1e-3)[0]]
            extra = [f"dominant state: {int(np.argmax(mean)) + 1}",
                     f"support (mass > 1e-3): {' '.join(support)}"]
            _write_flow(out, _flow_report(spec, cfg, result, checks, extra), result)
            return EXIT_OK if result.stop_reason == "gap_tol-met" else EXIT_UNMET
        return execute

    view = SymmetricGameView(load_game(spec.input))
    mu0 = _single_block(spec, view.m)
    spec.flow_config(default_step(view.base))

    def execute(out: Path) -> int:
        cfg = spec.flow_config(default_step(view.base))
        checks = []
        if spec.check_monotone:
            checks.append(("pure", monotonicity.pure_monotonicity_check(view.base, seed=spec.seed)))
        result = symmetric_flow(view, mu0, cfg)
        _write_flow(out, _flow_report(spec, cfg, result, checks), result)
        return EXIT_OK if result.stop_reason == "gap_tol-met" else EXIT_UNMET
    return execute


def _single_block(spec: RunSpec, m: int) -> np.ndarray:
    if not spec.x0:
        return MixedStrategy.uniform(m).probs
    blocks = parse_blocks(spec.x0)
    if len(blocks) != 1 or blocks[0].size != m:
        raise InvalidInputError(f"initial distribution must have {m} entries")
    return MixedStrategy(blocks[0]).probs


def _write_flow(out: Path, report_lines, result) -> None:
    write_trajectory(out / "trajectory.csv", result)
    write_gaps(out / "gaps.csv", result)
    (out / "report.txt").write_text("\n".join(report_lines) + "\n")


def _gaussian_check(spec: RunSpec, out: Path) -> int:
    m, n = spec.states, spec.samples
    samples = gaussian.sample_gamma(m, n, spec.seed)
    coef_rng = np.random.Generator(np.random.PCG64(spec.seed + 1))
    ok = True
    rows = []
    for k in range(spec.pairs):
        mu, nu = coef_rng.standard_normal((2, m))
        est = gaussian.estimate_inner(mu, nu, samples)
        exact = float(mu @ nu)
        tol = gaussian.inner_tolerance(mu, nu, n)
        passed = abs(est - exact) <= tol
        ok &= passed
        rows.append((k + 1, est, exact, tol, "pass" if passed else "FAIL"))
    write_csv(out / "inner_products.csv", ("pair", "estimate", "exact", "tolerance", "status"), rows)

    push_rows = []
    directions = [np.eye(m)[0]]
    if m >= 2:
        directions.insert(0, np.array([3.0, 4.0] + [0.0] * (m - 2)))
    for c in directions:
        est = gaussian.pushforward_variance(c, samples)
        exact = float(c @ c)
        tol = gaussian.variance_tolerance(c, n)
        passed = abs(est - exact) <= tol
        ok &= passed
        push_rows.append((" ".join(format(v, "g") for v in c), est, exact, tol,
                          "pass" if passed else "FAIL"))
    write_csv(out / "pushforward.csv", ("direction", "estimate", "exact", "tolerance", "status"),
              push_rows)

    nu = coef_rng.standard_normal(m)
    jay_est = gaussian.estimate_jay(nu, samples)
    jay_tol = gaussian.jay_tolerance(nu, n)
    jay_ok = bool(np.all(np.abs(jay_est - gaussian.jay_map(nu)) <= jay_tol))
    ok &= jay_ok
    write_csv(out / "jay.csv", ("coord", "estimate", "exact", "tolerance"),
              [(k + 1, float(jay_est[k]), float(nu[k]), float(jay_tol[k])) for k in range(m)])
    lines = [
        "mode: gaussian-check",
        f"states: {m}  samples: {n}  seed: {spec.seed}",
        f"inner products: {sum(r[-1] == 'pass' for r in rows)}/{len(rows)} within 4 sigma",
        f"pushforward variances: {sum(r[-1] == 'pass' for r in push_rows)}/{len(push_rows)} within 4 sigma",
        f"duality map estimate: {'pass' if jay_ok else 'FAIL'}",
        f"result: {'check-passed' if ok else 'check-failed'}",
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_UNMET


def run(spec: RunSpec) -> int:
    try:
        execute = _prepare(spec)
        out = _output_dir(spec)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.mkdir(parents=True, exist_ok=True)
    status = execute(out)
    print((out / "report.txt").read_text(), end="")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="integrate a flow or run the Gaussian checks")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--input", type=Path, help="game (.game) or mean field (.mfg) file")
    p.add_argument("--scheme", default="projected-euler",
                   choices=("projected-euler", "proximal-implicit", "interior-rk4"))
    p.add_argument("--h", type=float, default=None, help="step size (default 0.1/L)")
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--gap-tol", type=float, default=1e-3)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--inner-tol", type=float, default=1e-12)
    p.add_argument("--inner-max", type=int, default=1000)
    p.add_argument("--x0", help='initial strategies, e.g. "0.5,0.5;1,0"')
    p.add_argument("--v0", type=float, nargs=2, default=(0.8, 2.0 / 3.0),
                   metavar=("V1", "V2"), help="appendix-b reduced start (x11, x21)")
    p.add_argument("--out", type=Path)
    p.add_argument("--force", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check-monotone", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--samples", type=int, default=10**6, help="gaussian-check sample count")
    p.add_argument("--states", type=int, default=3, help="gaussian-check dimension")
    p.add_argument("--pairs", type=int, default=20, help="gaussian-check coefficient pairs")
    p.add_argument("--backend", choices=_backend.AVAILABLE, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = RunSpec(
            mode=args.mode, input=args.input, scheme=args.scheme, h=args.h,
            t_max=args.t_max, gap_tol=args.gap_tol, record_every=args.record_every,
            inner_tol=args.inner_tol, inner_max=args.inner_max, x0=args.x0,
            v0=tuple(args.v0), out=args.out, force=args.force, seed=args.seed,
            check_monotone=args.check_monotone, samples=args.samples,
            states=args.states, pairs=args.pairs, backend=args.backend,
        )
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
