"""Command-line front end.

Subcommands: ``verify`` (run a named check suite), ``kernel`` (evolution
kernels of the worked Hamiltonians with pairwise errors), ``converge``
(refinement table of one tracked number with a Richardson extrapolate),
``moments`` (low-order path moments).  Options may also be supplied as a
JSON config file; explicit flags win.  Reports are deterministic for a
fixed configuration, except for the timestamp field of JSON reports.
Suite exit status is nonzero when any checked tolerance fails.  The
environment variable BEREZIN_THREADS sets the worker count for multi-grid
runs; nothing else is read from the environment.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .algebra import ONE, element_to_json, gen
from .feynman_kac import (
    EXAMPLE_NAMES,
    OperatorMatrix,
    closed_form_kernel,
    element_coordinates,
    example_hamiltonian,
    fk_evolve,
    kernel_extract,
    monomial_basis,
    oracle_kernel,
    state_variables,
)
from .verify import SUITE_NAMES, ratio_deviation, run_suite, RATIO_SLACK
from .wiener import Partition, WienerSpace, brownian_moment_rows

PARAM_KEYS = ("t", "r", "c", "b", "lam")


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _jobs() -> int:
    try:
        return max(1, int(os.environ.get("BEREZIN_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(tasks: Sequence[Callable], jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _parse_grid_list(text: str) -> tuple[int, ...]:
    grids = tuple(int(part) for part in text.split(","))
    if any(n < 1 for n in grids) or any(b <= a for a, b in zip(grids, grids[1:])):
        raise SystemExit("grid list must be strictly increasing positive integers")
    return grids


def _merge_config(args: argparse.Namespace, keys: Sequence[str], defaults: dict) -> dict:
    """Resolve options: explicit flag, then config file entry, then default."""
    config = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as handle:
            config = json.load(handle)
        if not isinstance(config, dict):
            raise SystemExit("the config file must hold a JSON object")
    resolved = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in config:
            resolved[key] = config[key]
        else:
            resolved[key] = defaults.get(key)
    return resolved


# -- verify ---------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    options = _merge_config(args, ("suite", "seed", "format", "out"), {"seed": 2024, "format": "text"})
    checks = run_suite(options["suite"], seed=int(options["seed"]))
    failed = [c for c in checks if not c.passed]
    if options["format"] == "json":
        payload = {
            "command": "verify",
            "suite": options["suite"],
            "seed": int(options["seed"]),
            "checks": [
                {"name": c.name, "value": c.value, "tolerance": c.tolerance, "passed": c.passed}
                for c in checks
            ],
            "failed": len(failed),
            "timestamp": _timestamp(),
        }
        _emit(_dump_json(payload), options["out"])
    else:
        lines = [c.line() for c in checks]
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        _emit("\n".join(lines) + "\n", options["out"])
    return 1 if failed else 0


# -- kernel ---------------------------------------------------------------


def _fk_operator(name: str, params: dict, steps: int) -> OperatorMatrix:
    h = example_hamiltonian(name, r=params["r"], c=params["c"], b=params["b"], lam=params["lam"])
    partition = Partition.uniform(params["t"], steps)
    basis = monomial_basis(2)
    variables = state_variables(2)
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, subset in enumerate(basis):
        image = fk_evolve(h, _basis_element(variables, subset), partition)
        matrix[:, col] = element_coordinates(image, variables, basis)
    return OperatorMatrix(matrix, variables, basis)


def _basis_element(variables, subset):
    out = ONE
    for i in subset:
        out = out * gen(variables[i])
    return out


def cmd_kernel(args: argparse.Namespace) -> int:
    keys = ("hamiltonian", "n", "tol", "format", "out") + PARAM_KEYS
    defaults = {"t": 1.0, "r": 1.0, "c": 1.0, "b": 1.0, "lam": 0.0, "n": "16", "tol": 1e-9, "format": "json"}
    options = _merge_config(args, keys, defaults)
    name = options["hamiltonian"]
    params = {k: float(options[k]) for k in PARAM_KEYS}
    grids = _parse_grid_list(str(options["n"]))
    tol = float(options["tol"])

    h = example_hamiltonian(name, r=params["r"], c=params["c"], b=params["b"], lam=params["lam"])
    oracle = oracle_kernel(h, params["t"])
    closed = closed_form_kernel(
        name, params["t"], r=params["r"], c=params["c"], b=params["b"], lam=params["lam"]
    )
    jobs = _jobs()
    fk_ops = _map_ordered([lambda n=n: _fk_operator(name, params, n) for n in grids], jobs)
    fk_kernels = [kernel_extract(op) for op in fk_ops]

    fk_vs_oracle = [float((k.body - oracle.body).norm()) for k in fk_kernels]
    oracle_vs_closed = float((oracle.body - closed.body).norm())
    fk_vs_closed = float((fk_kernels[-1].body - closed.body).norm())

    checks = []
    if name == "quartic":
        expected_gap = float(abs(1.0 - np.exp(-2.0 * params["b"] * params["t"])))
        checks.append(
            {
                "name": "reference closed form differs from the oracle by the known top-slot gap",
                "value": abs(oracle_vs_closed - expected_gap),
                "tolerance": tol,
            }
        )
    else:
        checks.append(
            {"name": "oracle matches the reference closed form", "value": oracle_vs_closed, "tolerance": tol}
        )
    if len(grids) > 1:
        checks.append(
            {
                "name": "fk-vs-oracle error halves per grid doubling",
                "value": ratio_deviation(fk_vs_oracle),
                "tolerance": RATIO_SLACK,
            }
        )
    else:
        checks.append(
            {
                "name": "fk kernel within first-order error of the oracle",
                "value": fk_vs_oracle[-1],
                "tolerance": max(tol, 10.0 * params["t"] / grids[-1]),
            }
        )
    for check in checks:
        check["passed"] = check["value"] <= check["tolerance"]

    payload = {
        "command": "kernel",
        "hamiltonian": name,
        "t": params["t"],
        "params": {k: params[k] for k in ("r", "c", "b", "lam")},
        "N": list(grids),
        "kernel_coefficients": element_to_json(fk_kernels[-1].body),
        "oracle_coefficients": element_to_json(oracle.body),
        "closed_form_coefficients": element_to_json(closed.body),
        "max_abs_error": {
            "fk_vs_oracle": fk_vs_oracle,
            "oracle_vs_closed_form": oracle_vs_closed,
            "fk_vs_closed_form": fk_vs_closed,
        },
        "checks": checks,
        "timestamp": _timestamp(),
    }
    if name == "quartic":
        payload["known_discrepancy"] = {
            "slot": "top monomial of the output variables",
            "reference_minus_oracle": float(abs(1.0 - np.exp(-2.0 * params["b"] * params["t"]))),
            "note": "the reference closed form carries a unit top-slot weight where the "
            "operator exponential decays; reported as-is",
        }

    if options["format"] == "csv":
        rows = [
            (n, params["t"] / n, "fk_vs_oracle", err) for n, err in zip(grids, fk_vs_oracle)
        ]
        _emit(_csv_text(("N", "dt", "comparison", "max_abs_error"), rows), options["out"])
    else:
        _emit(_dump_json(payload), options["out"])
    return 0 if all(c["passed"] for c in checks) else 1


# -- converge -------------------------------------------------------------


QUANTITIES = ("ou_xx", "oscillator_c0", "flat_c0", "quartic_xx")


def _tracked_value(quantity: str, params: dict, steps: int) -> complex:
    t = params["t"]
    partition = Partition.uniform(t, steps)
    variables = state_variables(2)
    top = gen(variables[0]) * gen(variables[1])
    if quantity == "ou_xx":
        from .algebra import ZERO
        from .stochastic import picard_solve
        from .verify import ou_drift_spec
        from .wiener import BrownianMotion

        spec = ou_drift_spec(params["r"], params["c"], (ZERO, ZERO))
        space = WienerSpace(2)
        solution = picard_solve(spec, space, partition).process
        motion = BrownianMotion(space, partition)
        value = motion.expect(solution.final[0] * solution.final[1])
        return complex(value)
    h = example_hamiltonian(
        {"oscillator_c0": "oscillator", "flat_c0": "flat", "quartic_xx": "quartic"}[quantity],
        r=params["r"],
        c=params["c"],
        b=params["b"],
        lam=params["lam"],
    )
    image = fk_evolve(h, top, partition)
    if quantity == "quartic_xx":
        return image.coefficient(variables)
    return image.constant


def cmd_converge(args: argparse.Namespace) -> int:
    keys = ("quantity", "n", "format", "out") + PARAM_KEYS
    defaults = {"t": 1.0, "r": 1.0, "c": 1.0, "b": 1.0, "lam": 0.0, "n": "8,16,32,64", "format": "csv"}
    options = _merge_config(args, keys, defaults)
    quantity = options["quantity"]
    if quantity not in QUANTITIES:
        raise SystemExit(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    params = {k: float(options[k]) for k in PARAM_KEYS}
    grids = _parse_grid_list(str(options["n"]))

    values = _map_ordered(
        [lambda n=n: _tracked_value(quantity, params, n) for n in grids], _jobs()
    )
    extrapolate = 2 * values[-1] - values[-2] if len(values) > 1 else values[-1]
    rows = [
        (n, params["t"] / n, quantity, v.real, v.imag, abs(v - extrapolate))
        for n, v in zip(grids, values)
    ]
    rows.append(("extrapolate", "", quantity, extrapolate.real, extrapolate.imag, 0.0))

    if options["format"] == "json":
        payload = {
            "command": "converge",
            "quantity": quantity,
            "params": params,
            "N": list(grids),
            "values": [[v.real, v.imag] for v in values],
            "extrapolate": [extrapolate.real, extrapolate.imag],
            "timestamp": _timestamp(),
        }
        _emit(_dump_json(payload), options["out"])
    else:
        _emit(
            _csv_text(("N", "dt", "quantity", "value_re", "value_im", "error_vs_extrapolate"), rows),
            options["out"],
        )
    return 0


# -- moments --------------------------------------------------------------


def cmd_moments(args: argparse.Namespace) -> int:
    options = _merge_config(
        args, ("times", "m", "format", "out"), {"times": "0.25,0.5,1.0", "m": 2, "format": "csv"}
    )
    times = tuple(float(part) for part in str(options["times"]).split(","))
    if any(t <= 0 for t in times):
        raise SystemExit("times must be positive")
    rows = brownian_moment_rows(WienerSpace(int(options["m"])), times)
    if options["format"] == "json":
        payload = {
            "command": "moments",
            "m": int(options["m"]),
            "rows": [
                {"time": t, "monomial": mono, "re": re, "im": im} for t, mono, re, im in rows
            ],
            "timestamp": _timestamp(),
        }
        _emit(_dump_json(payload), options["out"])
    else:
        _emit(_csv_text(("time", "monomial", "re", "im"), rows), options["out"])
    return 0


# -- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="berezin",
        description="Exact anticommuting stochastic calculus and its evolution kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a named verification suite")
    p_verify.add_argument("suite", choices=SUITE_NAMES + ("all",))
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--format", choices=("text", "json"), default=None)
    p_verify.add_argument("--out", default=None)
    p_verify.add_argument("--config", default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_kernel = sub.add_parser("kernel", help="evolution kernel vs oracle and closed form")
    p_kernel.add_argument("hamiltonian", choices=EXAMPLE_NAMES)
    p_kernel.add_argument("--t", type=float, default=None)
    p_kernel.add_argument("--n", default=None, help="comma-separated grid sizes")
    p_kernel.add_argument("--r", type=float, default=None)
    p_kernel.add_argument("--c", type=float, default=None)
    p_kernel.add_argument("--b", type=float, default=None)
    p_kernel.add_argument("--lam", type=float, default=None)
    p_kernel.add_argument("--tol", type=float, default=None)
    p_kernel.add_argument("--format", choices=("json", "csv"), default=None)
    p_kernel.add_argument("--out", default=None)
    p_kernel.add_argument("--config", default=None)
    p_kernel.set_defaults(func=cmd_kernel)

    p_conv = sub.add_parser("converge", help="refinement table with a Richardson extrapolate")
    p_conv.add_argument("--quantity", choices=QUANTITIES, default="ou_xx")
    p_conv.add_argument("--n", default=None, help="comma-separated grid sizes")
    p_conv.add_argument("--t", type=float, default=None)
    p_conv.add_argument("--r", type=float, default=None)
    p_conv.add_argument("--c", type=float, default=None)
    p_conv.add_argument("--b", type=float, default=None)
    p_conv.add_argument("--lam", type=float, default=None)
    p_conv.add_argument("--format", choices=("csv", "json"), default=None)
    p_conv.add_argument("--out", default=None)
    p_conv.add_argument("--config", default=None)
    p_conv.set_defaults(func=cmd_converge)

    p_mom = sub.add_parser("moments", help="low-order path moments as a table")
    p_mom.add_argument("--times", default=None, help="comma-separated positive times")
    p_mom.add_argument("--m", type=int, default=None)
    p_mom.add_argument("--format", choices=("csv", "json"), default=None)
    p_mom.add_argument("--out", default=None)
    p_mom.add_argument("--config", default=None)
    p_mom.set_defaults(func=cmd_moments)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
