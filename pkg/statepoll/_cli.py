""" CLI for StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License

Usage: statepoll {verb} model.json [options]

Verbs:
    solve       stationary server position and necessary conditions
    classify    ergodicity verdict with face and certificate evidence
    symmetric   eigenvalues and mean queue lengths of a symmetric model
    wait        mean waiting time, optionally for a switchover strategy
    simulate    Monte-Carlo estimates beside the analytic values
    compare     rank Markovian routing strategies by mean waiting time
    oracle      exact marginals of the chain with capped queues

Exit codes: 0 success, 2 invalid input, 3 analysis error. Errors are
printed as `    ERROR: message` even with --quiet.
"""
__all__ = ["main"]

import argparse
import json
import logging
from collections.abc import Callable, Mapping, Sequence
from typing import Any

import numpy as np
from frozendict import frozendict

from . import _io
from ._constants import DEFAULT_REPLICATIONS, MAX_FACES, VERSION
from .ergodicity import classify
from .errors import AssumptionViolated, MissingMoments, ModelValidationError
from .laws import TRAVEL_LAWS
from .model import load_model
from .oracle import truncated_chain_oracle
from .server import necessary_conditions, solve_server_distribution
from .simulator import sim_config, simulate
from .symmetric import (
    charpoly_eigen_sum,
    check_assumptions,
    circulant_eigenvalues,
    eigen_sum,
    empty_probability,
    mean_queue_arbitrary,
    mean_queue_at_polling,
    routing_distances,
)
from .types import FaceVerdict, PollingModel, RunManifest
from .utilities import str_number, str_vector
from .waiting import (
    head_of_line_defect,
    mean_wait,
    mean_wait_bernoulli,
    mean_wait_exhaustive,
    mean_wait_state_independent,
    profile_from_model,
    spec_from_model,
    strategy_compare,
)

INVALID = 2
FAILED = 3
STRATEGIES = ("state-independent", "bernoulli", "exhaustive")
CONJECTURE = " [conjecture]"

Command = Callable[[argparse.Namespace, PollingModel, Mapping], int]


class _BadOption(ValueError):
    """A flag value the analysis cannot accept"""


def _cell(value: Any) -> str:
    if isinstance(value, (float, complex, np.floating, np.complexfloating)):
        return str_number(value.item() if hasattr(value, "item") else value)
    return str(value)


def _table(header: Sequence[str], rows: Sequence[Sequence[Any]]):
    cells = [list(header)] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    for row in cells:
        _io.notify_user(
            "  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip()
        )
    _io.notify_user("")


def _manifest(args: argparse.Namespace, seed: int | None = None):
    skip = {"command", "file", "csv", "quiet", "verbose", "seed"}
    options = frozendict(
        {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in skip and v is not None
        }
    )
    if seed is None:
        seed = args.seed
    manifest = RunManifest(args.command, args.file, options, VERSION, seed)
    for line in _io.manifest_lines(manifest):
        _io.notify_user(f"# {line}")
    _io.notify_user("")
    return manifest


def _dump(args, manifest, header, rows):
    if args.csv:
        _io.write_csv(args.csv, manifest, header, rows)
        _io.notify_user(f"wrote {args.csv}")


def cmd_solve(args, m, doc) -> int:
    manifest = _manifest(args)
    d = solve_server_distribution(m)
    header = ["station", "f", "f_tilde", "cycle"]
    rows = [
        [i + 1, float(d.f[i]), float(d.f_tilde[i]), float(d.cycle[i])]
        for i in range(m.n)
    ]
    _table(header, rows)
    _io.notify_user(f"sum F = {str_number(float(d.f.sum()))}")
    _io.notify_user(f"tau_bar = {str_number(d.tau_bar)}")
    _io.notify_user(f"rho_hat = {str_number(d.rho_hat)}")
    _io.notify_user("")
    report = necessary_conditions(m, d)
    _table(
        ["condition", "margin", "holds"],
        [[c.name, c.margin, c.passed] for c in report.conditions],
    )
    _dump(args, manifest, header, rows)
    return 0


def cmd_classify(args, m, doc) -> int:
    manifest = _manifest(args)
    result = classify(m, args.max_faces)
    tag = CONJECTURE if result.conjecture_based else ""
    _io.notify_user(f"verdict: {result.verdict.value}{tag}")
    _io.notify_user("")
    _table(
        ["condition", "margin", "holds"],
        [[c.name, c.margin, c.passed] for c in result.conditions.conditions],
    )
    if result.sweep is not None:
        _table(
            ["face", "v_station"],
            [[str(face), value] for face, value in result.sweep.trajectory],
        )
        for note in result.sweep.notes:
            _io.notify_user(note)
    header = ["face", "rho_hat", "tau_bar", "flag", "v"]
    rows = []
    for face, sol in result.faces.items():
        flag = sol.ergodic_flag.value
        if sol.ergodic_flag == FaceVerdict.CONJECTURED_ERGODIC:
            flag += CONJECTURE
        rows.append(
            [str(face), sol.rho_hat_l, sol.tau_bar_l, flag, str_vector(sol.v)]
        )
    if rows:
        _table(header, rows)
    if (cert := result.certificate) is not None:
        _io.notify_user(f"certificate u = {str_vector(cert.u)}")
        _io.notify_user(f"epsilon = {str_number(cert.epsilon)}")
        _io.notify_user(
            f"certificate holds: {cert.valid}"
            + (CONJECTURE if cert.conjecture_based else "")
        )
        _io.notify_user("")
        _table(
            ["face", "f(v)"],
            [[str(f), v.total] for f, v in cert.face_values.items()],
        )
    for note in result.notes:
        _io.notify_user(note)
    _dump(args, manifest, header, rows)
    return 0


def _require_symmetric(m: PollingModel):
    report = check_assumptions(m)
    for check in (report.a1, report.a2, report.a3):
        if not check.passed:
            raise AssumptionViolated(
                f"{check.name} fails (defect {check.defect:.3g}) "
                f"{check.detail}".rstrip()
            )


def cmd_symmetric(args, m, doc) -> int:
    manifest = _manifest(args)
    report = check_assumptions(m)
    _table(
        ["assumption", "holds", "defect", "detail"],
        [[c.name, c.passed, c.defect, c.detail] for c in report],
    )
    _require_symmetric(m)
    prof = profile_from_model(m)
    header = ["k", "mu", "mu_tilde"]
    rows = [
        [k + 1, complex(prof.mu[k]), complex(prof.mu_tilde[k])]
        for k in range(m.n)
    ]
    _table(header, rows)
    quantities = [
        ["eigen sum", eigen_sum(prof.mu_tilde)],
        ["eigen sum (charpoly)", charpoly_eigen_sum(m.p_tilde)],
        ["P(X_m = 0 | S = m)", empty_probability(prof)],
        ["E[X_m | S = m]", mean_queue_at_polling(prof)],
        ["E[X_m]", mean_queue_arbitrary(prof)],
    ]
    _table(["quantity", "value"], quantities)
    _dump(args, manifest, ["quantity", "value"], quantities)
    return 0


def cmd_wait(args, m, doc) -> int:
    manifest = _manifest(args)
    _require_symmetric(m)
    spec = spec_from_model(m, doc.get("switchover"))
    p_dist = routing_distances(m.p)
    p_tilde_dist = routing_distances(m.p_tilde)
    if args.strategy is None:
        prof = profile_from_model(m)
        rows = [
            ["E[W]", mean_wait(spec, prof.mu, prof.mu_tilde)],
            [
                "head-of-line defect",
                head_of_line_defect(spec, p_dist, p_tilde_dist),
            ],
        ]
    elif args.strategy == "state-independent":
        mu = circulant_eigenvalues(p_dist)
        rows = [["E[W]", mean_wait_state_independent(spec, mu)]]
    elif args.strategy == "bernoulli":
        if args.pi is None:
            raise _BadOption("--strategy bernoulli needs --pi")
        rows = [["E[W]", mean_wait_bernoulli(spec, p_tilde_dist, args.pi)]]
    else:
        rows = [["E[W]", mean_wait_exhaustive(spec, p_tilde_dist)]]
    _table(["quantity", "value"], rows)
    _dump(args, manifest, ["quantity", "value"], rows)
    return 0


def _analytic(m: PollingModel) -> dict[str, Any]:
    """Closed forms to print beside the estimates, where they exist"""
    values: dict[str, Any] = {}
    try:
        d = solve_server_distribution(m)
    except ValueError:
        return values
    values |= {
        "f": d.f,
        "f_tilde": d.f_tilde,
        "empty_probability": d.f_tilde / d.f,
        "cycle": d.cycle,
        "tau_bar": d.tau_bar,
    }
    try:
        _require_symmetric(m)
        prof = profile_from_model(m)
        spec = spec_from_model(m)
        found = mean_queue_at_polling(prof)
        values["queue_at_polling"] = np.full(m.n, found)
        values["queue_mean"] = np.full(m.n, mean_queue_arbitrary(prof))
        values["wait"] = mean_wait(spec, prof.mu, prof.mu_tilde)
    except ValueError:
        pass
    return values


def cmd_simulate(args, m, doc) -> int:
    try:
        cfg = sim_config(
            args.events,
            seed=0 if args.seed is None else args.seed,
            replications=args.reps,
            travel_law=args.travel,
        )
    except ValueError as err:
        raise _BadOption(*err.args) from err
    manifest = _manifest(args, cfg.seed)
    estimate = simulate(m, cfg)
    analytic = _analytic(m)
    rows = []
    for name in (
        "f",
        "f_tilde",
        "empty_probability",
        "queue_at_polling",
        "queue_mean",
        "cycle",
    ):
        field = getattr(estimate, name)
        for i in range(m.n):
            exact = analytic[name][i] if name in analytic else "-"
            rows.append(
                [f"{name}_{i + 1}", field.mean[i], field.se[i], exact]
            )
    for name in ("wait", "tau_bar"):
        field = getattr(estimate, name)
        rows.append([name, field.mean, field.se, analytic.get(name, "-")])
    _table(["quantity", "estimate", "se", "analytic"], rows)
    if estimate.unstable:
        _io.notify_user(
            "unstable: total queue drifts by "
            f"{str_number(estimate.drift)} per polling event"
        )
    _dump(args, manifest, *estimate.rows())
    return 0


def _candidate(name: str, n: int) -> np.ndarray:
    """Routing distances of a named Markovian strategy"""
    dist = np.zeros(n)
    if name == "cyclic":
        dist[0] = 1.0
    elif name == "random":
        dist[:] = 1 / n
    elif name == "random-other":
        dist[:-1] = 1 / (n - 1)
    elif name.startswith("shift"):
        try:
            step = int(name[5:])
        except ValueError as err:
            raise _BadOption(f"unknown strategy '{name}'") from err
        if not 1 <= step <= n:
            raise _BadOption(f"shift {step} outside 1..{n}")
        dist[step - 1] = 1.0
    else:
        raise _BadOption(f"unknown strategy '{name}'")
    return dist


def cmd_compare(args, m, doc) -> int:
    manifest = _manifest(args)
    spec = spec_from_model(m)
    names = [s for s in args.strategies.split(",") if s]
    table = strategy_compare(spec, {s: _candidate(s, m.n) for s in names})
    header = ["rank", "strategy", "mean_wait", "eigen_sum", "cyclic"]
    rows = [
        [rank + 1, row.name, row.mean_wait, row.eigen_sum, row.cyclic]
        for rank, row in enumerate(table.rows)
    ]
    _table(header, rows)
    if table.cyclic_is_minimal is not None:
        _io.notify_user(f"cyclic is minimal: {table.cyclic_is_minimal}")
    _dump(args, manifest, header, rows)
    return 0


def cmd_oracle(args, m, doc) -> int:
    manifest = _manifest(args)
    result = truncated_chain_oracle(m, args.cap, args.travel)
    header = ["station", "f", "f_tilde", "queue_at_polling", "queue_mean"]
    rows = [
        [
            i + 1,
            float(result.f[i]),
            float(result.f_tilde[i]),
            float(result.queue_at_polling[i]),
            float(result.queue_mean[i]),
        ]
        for i in range(m.n)
    ]
    _table(header, rows)
    _io.notify_user(f"states = {result.states}")
    _io.notify_user(f"tail bound = {str_number(result.tail_bound)}")
    _dump(args, manifest, header, rows)
    return 0


COMMANDS: frozendict[str, Command] = frozendict(
    {
        "solve": cmd_solve,
        "classify": cmd_classify,
        "symmetric": cmd_symmetric,
        "wait": cmd_wait,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "oracle": cmd_oracle,
    }
)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="model document (JSON)")
    common.add_argument("--csv", help="also write the table to this path")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--verbose", action="store_true")
    common.add_argument(
        "--seed", type=int, help="random seed; only simulate draws from it"
    )
    parser = argparse.ArgumentParser(
        prog="statepoll", description="Analysis of state-dependent polling"
    )
    verbs = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "symmetric"):
        verbs.add_parser(name, parents=[common])
    verbs.add_parser("classify", parents=[common]).add_argument(
        "--max-faces", type=int, default=MAX_FACES
    )
    wait = verbs.add_parser("wait", parents=[common])
    wait.add_argument("--strategy", choices=STRATEGIES)
    wait.add_argument("--pi", type=float, help="exit probability")
    sim = verbs.add_parser("simulate", parents=[common])
    sim.add_argument("--events", type=int, default=100_000)
    sim.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS)
    sim.add_argument(
        "--travel", choices=TRAVEL_LAWS, default=TRAVEL_LAWS[0]
    )
    verbs.add_parser("compare", parents=[common]).add_argument(
        "--strategies", default="cyclic,random"
    )
    oracle = verbs.add_parser("oracle", parents=[common])
    oracle.add_argument("--cap", type=int, default=40)
    oracle.add_argument(
        "--travel", choices=TRAVEL_LAWS, default=TRAVEL_LAWS[0]
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    previous = _io.notify_user
    if args.quiet:
        _io.io_inject(lambda _: None)
    try:
        m, doc = load_model(args.file)
        return COMMANDS[args.command](args, m, doc)
    except (
        ModelValidationError,
        MissingMoments,
        _BadOption,
        json.JSONDecodeError,
        OSError,
    ) as err:
        print(f"    ERROR: {err}")
        return INVALID
    except (ValueError, RuntimeError) as err:
        print(f"    ERROR: {err.args[0] if err.args else err}")
        return FAILED
    finally:
        _io.io_inject(previous)
