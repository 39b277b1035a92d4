"""Command-line front end.

Every subcommand builds an experiment record (config echo, results, the
closed-form values where they exist, a flat ``table``) and writes it as JSON
or CSV. Option values come from three layers, later ones winning: built-in
defaults, ``--config FILE``, explicit flags. A config file is ``key = value``
lines (``#`` starts a comment; keys are option names with ``-`` or ``_``) or
a previously written JSON record, whose ``config`` block is replayed.

Exit status: 0 success, 1 usage error, 2 model error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .apps import counting, notgate, orderfind
from .errors import ModelError
from .pea import closed_form_success, exact_phase_spec, phase_integer, run_pea
from .qubit_model import DelaySchedule, PhysicalQubit, total_delay
from .scheduler import (
    classify_delay,
    matching_delay,
    schedule_for_policy,
    schedule_for_register,
    success_probability,
    worst_case_delay,
)
from .statevec import format_bits

OUTPUT_DIR_ENV = "QDELAY_OUTPUT_DIR"


class UsageError(Exception):
    pass


# -- value converters: accept flag strings or already-typed config values --

def _float(v):
    return float(v)


def _int(v):
    return int(v)


def _float_list(v):
    if isinstance(v, str):
        return [float(x) for x in v.replace(" ", "").split(",") if x]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in v]


def _int_list(v):
    if isinstance(v, str):
        return [int(x) for x in v.replace(" ", "").split(",") if x]
    if isinstance(v, int):
        return [v]
    return [int(x) for x in v]


def _bits(v):
    s = str(v).strip()
    if not s or any(c not in "01" for c in s):
        raise ValueError(f"phase bits must be a string of 0/1, got {v!r}")
    return s


def _str(v):
    return str(v)


def _sign(v):
    s = int(str(v).replace("+", ""))
    if s not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return s


def _delays(v):
    """``t`` or ``t1:t2`` per qubit, comma separated; a list is passed through."""
    if not isinstance(v, str):
        return [list(map(float, x)) if isinstance(x, (list, tuple)) else float(x) for x in v]
    out = []
    for part in v.replace(" ", "").split(","):
        if not part:
            continue
        out.append([float(x) for x in part.split(":")] if ":" in part else float(part))
    return out


def _opt_int(v):
    return None if v in (None, "", "none", "None") else int(v)


_SCHEDULE_OPTS = [
    ("delays", _delays, None, "per-qubit delays, 't' total or 't1:t2' pair, comma separated"),
    ("policy", _str, "zero", "zero | matched | worst (ignored when --delays is given)"),
    ("l", _int, 0, "period index for matched/worst policies"),
    ("split", _float, 0.5, "fraction of each total delay placed before the controlled gate"),
]

COMMANDS = {
    "pea": [
        ("n", _int, None, "index register size (default: length of --phase-bits)"),
        ("phase-bits", _bits, "1", "ideal readout, highest qubit leftmost"),
        ("delta", _float_list, [1.0], "level splitting per index qubit (one value broadcasts)"),
        ("e0", _float_list, [0.0], "ground energy per index qubit"),
        *_SCHEDULE_OPTS,
        ("mode", _str, "exact", "exact | sample"),
        ("seed", _opt_int, None, "seed for sample mode"),
    ],
    "notgate": [
        ("sign", _sign, 1, "target eigenstate |+> (+1) or |-> (-1)"),
        ("delta", _float, 1.0, "index qubit splitting"),
        ("e0", _float, 0.0, "index qubit ground energy"),
        ("tau", _float, None, "total delay (overrides --policy)"),
        ("policy", _str, "zero", "zero | matched | worst"),
        ("l", _int, 0, "period index for matched/worst"),
        ("split", _float, 0.5, "fraction of the delay before the controlled gate"),
    ],
    "orderfind": [
        ("y", _int, 7, "base"),
        ("N", _int, 15, "modulus"),
        ("n", _int, 2, "index qubits"),
        ("m", _int, 4, "target qubits"),
        ("delta", _float_list, [1.0], "level splitting per index qubit"),
        *_SCHEDULE_OPTS,
        ("seed", _opt_int, None, "seed for collapsing the target and sampling the index"),
        ("condition-k", _opt_int, None, "also report the index readout given target collapse onto |u_k>"),
    ],
    "count": [
        ("m", _int, 4, "target qubits"),
        ("solutions", _int_list, [0, 1, 2, 3], "solution set of the search predicate"),
        ("k", _int, 6, "controlled-Grover repetitions"),
        ("delta", _float, 1.0, "index qubit splitting"),
        ("delays", _float_list, None, "one delay per repetition"),
        ("policy", _str, "zero", "per-repetition delay policy: zero | matched | worst"),
        ("l", _int, 0, "period index for matched/worst"),
        ("k-max", _opt_int, None, "sweep k = 1..k_max and fit the solution count"),
    ],
    "sweep": [
        ("experiment", _str, "pea", "pea | notgate | count"),
        ("delta", _float, 1.0, "splitting of the delayed qubit"),
        ("tau-min", _float, 0.0, "first delay"),
        ("tau-max", _float, 4 * math.pi, "last delay"),
        ("points", _int, 49, "number of sweep points"),
        ("phase-bits", _bits, "1", "pea: ideal readout, highest qubit leftmost"),
        ("qubit", _int, 0, "pea: physical index qubit whose delay is swept"),
        ("sign", _sign, 1, "notgate: target eigenstate sign"),
        ("m", _int, 4, "count: target qubits"),
        ("solutions", _int_list, [0, 1, 2, 3], "count: solution set"),
        ("k", _int, 6, "count: repetitions"),
        ("jobs", _int, 1, "worker threads; rows stay in sweep order"),
    ],
    "schedule": [
        ("delta", _float_list, [1.0], "level splitting per qubit"),
        ("min-delay", _float_list, [0.0], "minimum total delay per qubit (one value broadcasts)"),
        ("segment-minima", _float_list, None, "minimum (before, after) delay segments"),
        ("l-max", _int, 10_000, "largest period index tried"),
    ],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdelay", description="Phase estimation with delays between gates.")
    parser.add_argument("--version", action="version", version=f"qdelay {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file or a JSON record to replay")
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--output", help=f"output file (default: ${OUTPUT_DIR_ENV}/<command>.<format> or stdout)")
        for opt, conv, default, help_ in opts:
            p.add_argument(f"--{opt}", dest=opt.replace("-", "_"), default=None, help=help_)
    return parser


def load_config(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        record = json.loads(text)
        return dict(record.get("config", record))
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key] = value
    return cfg


def resolve_options(command: str, args: argparse.Namespace) -> dict:
    table = {opt.replace("-", "_"): (conv, default) for opt, conv, default, _ in COMMANDS[command]}
    values = {key: default for key, (_, default) in table.items()}
    layers = []
    if args.config:
        cfg = load_config(args.config)
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for key in ("format",):
            if key in cfg and args.format is None:
                args.format = cfg[key]
        layers.append({k: v for k, v in cfg.items() if k in table})
    layers.append({k: getattr(args, k) for k in table if getattr(args, k) is not None})
    for layer in layers:
        for key, raw in layer.items():
            conv = table[key][0]
            try:
                values[key] = None if raw is None else conv(raw)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for --{key.replace('_', '-')}: {raw!r} ({exc})") from None
    return values


# -- shared helpers -------------------------------------------------------

def _broadcast(values: list, n: int, name: str) -> list:
    if len(values) == 1:
        return values * n
    if len(values) != n:
        raise UsageError(f"--{name} has {len(values)} entries for {n} qubits")
    return values


def _schedule(opts: dict, qubits) -> DelaySchedule:
    n = len(qubits)
    if opts.get("delays") is not None:
        delays = _broadcast(list(opts["delays"]), n, "delays")
        pairs = []
        for d in delays:
            if isinstance(d, list):
                if len(d) != 2:
                    raise UsageError("each delay pair must be 't1:t2'")
                pairs.append(tuple(d))
            else:
                pairs.append((opts["split"] * d, d - opts["split"] * d))
        return DelaySchedule.from_pairs(pairs)
    if opts["policy"] not in ("zero", "matched", "worst"):
        raise UsageError(f"unknown policy {opts['policy']!r}")
    return schedule_for_policy(qubits, opts["policy"], opts["l"], opts["split"])


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else v


def write_csv(rows: list[dict], fh) -> None:
    if not rows:
        return
    fields = list(rows[0])
    w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fields})


# -- commands -------------------------------------------------------------

def cmd_pea(opts: dict) -> dict:
    bits_label = opts["phase_bits"]
    n = opts["n"] if opts["n"] is not None else len(bits_label)
    if len(bits_label) != n:
        raise UsageError(f"--phase-bits has {len(bits_label)} digits for --n {n}")
    bits = [int(c) for c in reversed(bits_label)]
    deltas = _broadcast(opts["delta"], n, "delta")
    e0 = _broadcast(opts["e0"], n, "e0")
    spec = exact_phase_spec(bits, deltas, e0)
    schedule = _schedule(opts, spec.index_qubits)
    if opts["mode"] not in ("exact", "sample"):
        raise UsageError("--mode must be exact or sample")
    if opts["mode"] == "sample" and opts["seed"] is None:
        raise UsageError("--mode sample needs --seed")
    res = run_pea(spec, schedule, mode=opts["mode"], seed=opts["seed"])
    oracle = closed_form_success(spec, schedule)
    dist = res.index_distribution
    expected = phase_integer(bits)
    rows = []
    for j, q in enumerate(spec.index_qubits):
        tau = total_delay(schedule, j)
        rows.append({
            "qubit": j,
            "delta": q.delta,
            "tau_before": schedule.segments[j][0],
            "tau_after": schedule.segments[j][1],
            "tau_total": tau,
            "expected_bit": bits[j],
            "simulated_success": float(res.per_qubit_success[j]),
            "closed_form_success": float(oracle[j]),
            "delay_class": classify_delay(q.delta, tau).kind,
        })
    results = {
        "distribution": dist.as_dict(),
        "expected_outcome": format_bits(expected, n),
        "expected_probability": dist[expected],
        "most_likely": dist.label(dist.most_likely()),
        "per_qubit_success": res.per_qubit_success,
    }
    if res.collapsed is not None:
        results["sampled_outcome"] = res.collapsed[0]
    return {"results": results, "oracle": {"per_qubit_success": oracle}, "table": rows, "n": n}


def _notgate_tau(opts: dict) -> float:
    if opts["tau"] is not None:
        return opts["tau"]
    policy = opts["policy"]
    if policy == "zero":
        return 0.0
    if policy == "matched":
        return matching_delay(opts["delta"], opts["l"])
    if policy == "worst":
        return worst_case_delay(opts["delta"], opts["l"])
    raise UsageError(f"unknown policy {policy!r}")


def cmd_notgate(opts: dict) -> dict:
    tau = _notgate_tau(opts)
    p0, p1 = notgate.run_not_gate_demo(opts["sign"], opts["delta"], tau, opts["split"], opts["e0"])
    phi = 0.0 if opts["sign"] == 1 else math.pi
    c0, c1 = notgate.not_gate_closed_form(phi, opts["delta"], tau)
    row = {"tau": tau, "delta_tau": opts["delta"] * tau, "P0": p0, "P1": p1, "closed_form_P0": c0, "closed_form_P1": c1}
    return {"results": {"P0": p0, "P1": p1, "tau": tau, "phi": phi}, "oracle": {"P0": c0, "P1": c1}, "table": [row]}


def cmd_orderfind(opts: dict) -> dict:
    n = opts["n"]
    deltas = _broadcast(opts["delta"], n, "delta")
    qubits = tuple(PhysicalQubit.from_delta(d) for d in deltas)
    schedule = _schedule(opts, qubits)
    spec = orderfind.OrderFindingSpec(opts["y"], opts["N"], n, opts["m"], qubits, schedule)
    res = orderfind.run_order_finding(spec, seed=opts["seed"])
    dist = res.index_distribution
    rows = [
        {"k": k, "bits": dist.label(k), "probability": dist[k], "verified_order": orderfind.verify_order(spec.y, spec.N, k, n)}
        for k in range(1 << n)
    ]
    results = {"distribution": dist.as_dict(), "order": orderfind.multiplicative_order(spec.y, spec.N)}
    if opts["seed"] is not None:
        results.update(
            target_label=res.target_label,
            measured_k=res.measured_k,
            verified_order=res.verified_order,
            failed=res.failed,
        )
    if opts["condition_k"] is not None:
        cond = orderfind.conditional_index_distribution(res.final_state, spec, opts["condition_k"])
        results["conditional_distribution"] = cond.as_dict()
    oracle = {
        "per_qubit_success": [success_probability(q.delta, total_delay(schedule, j)) for j, q in enumerate(qubits)]
    }
    return {"results": results, "oracle": oracle, "table": rows}


def cmd_count(opts: dict) -> dict:
    qubit = PhysicalQubit.from_delta(opts["delta"])
    m = opts["m"]
    if opts["policy"] not in ("zero", "matched", "worst"):
        raise UsageError(f"unknown policy {opts['policy']!r}")
    if opts["k_max"] is not None:
        sweep = counting.estimate_count_sweep(opts["solutions"], m, opts["k_max"], opts["policy"], qubit)
        results = {
            "omega": sweep.omega,
            "rms_residual": sweep.rms_residual,
            "confident": sweep.confident,
            "count_estimate": sweep.count_estimate,
            "true_count": len(set(opts["solutions"])),
        }
        return {"results": results, "oracle": {}, "table": sweep.rows}
    k = opts["k"]
    if opts["delays"] is not None:
        delays = tuple(opts["delays"])
    else:
        delays = counting.policy_delays(opts["policy"], k, qubit, opts["l"])
    spec = counting.CountingSpec(m, tuple(opts["solutions"]), k, delays, qubit)
    value = counting.run_counting(spec)
    N = 1 << m
    omega = counting.omega_for_count(len(spec.solutions), N)
    forms = counting.counting_closed_forms(omega, k, qubit.delta * spec.total_delay)
    row = {"k": k, "tau_total": spec.total_delay, "delta_tau": qubit.delta * spec.total_delay, "sigma_z": value,
           "closed_form_product": forms["product"], "closed_form_shifted": forms["shifted"]}
    return {"results": {"sigma_z": value, "omega": omega, "tau_total": spec.total_delay},
            "oracle": forms, "table": [row]}


def _sweep_point(opts: dict, tau: float) -> dict:
    delta = opts["delta"]
    exp = opts["experiment"]
    row = {"tau": tau, "delta_tau": delta * tau}
    if exp == "pea":
        label = opts["phase_bits"]
        bits = [int(c) for c in reversed(label)]
        n = len(bits)
        j = opts["qubit"]
        if not 0 <= j < n:
            raise UsageError(f"--qubit {j} out of range for {n} index qubits")
        deltas = [delta if i == j else 0.0 for i in range(n)]
        spec = exact_phase_spec(bits, deltas)
        schedule = DelaySchedule.from_totals([tau if i == j else 0.0 for i in range(n)])
        res = run_pea(spec, schedule)
        row["simulated"] = float(res.per_qubit_success[j])
        row["closed_form"] = success_probability(delta, tau)
    elif exp == "notgate":
        p0, _ = notgate.run_not_gate_demo(opts["sign"], delta, tau)
        phi = 0.0 if opts["sign"] == 1 else math.pi
        row["simulated"] = p0
        row["closed_form"] = notgate.not_gate_closed_form(phi, delta, tau)[0]
    elif exp == "count":
        k = opts["k"]
        if k < 1:
            raise UsageError("count sweep needs --k >= 1")
        qubit = PhysicalQubit.from_delta(delta)
        spec = counting.CountingSpec(opts["m"], tuple(opts["solutions"]), k, (tau,) + (0.0,) * (k - 1), qubit)
        omega = counting.omega_for_count(len(spec.solutions), 1 << opts["m"])
        forms = counting.counting_closed_forms(omega, k, delta * tau)
        row["simulated"] = counting.run_counting(spec)
        row["closed_form"] = forms["product"]
        row["closed_form_shifted"] = forms["shifted"]
    else:
        raise UsageError(f"unknown sweep experiment {exp!r}")
    return row


def cmd_sweep(opts: dict) -> dict:
    if opts["points"] < 1:
        raise UsageError("--points must be positive")
    taus = np.linspace(opts["tau_min"], opts["tau_max"], opts["points"])
    if taus.min() < 0:
        raise UsageError("sweep delays must be nonnegative")
    jobs = max(1, opts["jobs"])
    if jobs == 1:
        rows = [_sweep_point(opts, float(t)) for t in taus]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda t: _sweep_point(opts, float(t)), taus))
    for i, r in enumerate(rows):
        r["index"] = i
    rows = [{"index": r.pop("index"), **r} for r in rows]
    err = max(abs(r["simulated"] - r["closed_form"]) for r in rows)
    return {"results": {"points": len(rows), "max_abs_deviation": err}, "oracle": {}, "table": rows}


def cmd_schedule(opts: dict) -> dict:
    deltas = opts["delta"]
    n = len(deltas)
    qubits = [PhysicalQubit.from_delta(d) for d in deltas]
    floors = _broadcast(opts["min_delay"], n, "min-delay")
    minima = opts["segment_minima"]
    if minima is not None and len(minima) != 2:
        raise UsageError("--segment-minima takes two values: before,after")
    schedule = schedule_for_register(qubits, floors, minima, opts["l_max"])
    rows = []
    for j, q in enumerate(qubits):
        tau = total_delay(schedule, j)
        rows.append({
            "qubit": j,
            "delta": q.delta,
            "min_delay": floors[j],
            "tau_total": tau,
            "tau_before": schedule.segments[j][0],
            "tau_after": schedule.segments[j][1],
            "l": int(round(tau * abs(q.delta) / (2 * math.pi))) - 1,
            "success_probability": success_probability(q.delta, tau),
        })
    return {"results": {"totals": schedule.totals()}, "oracle": {}, "table": rows}


HANDLERS = {
    "pea": cmd_pea,
    "notgate": cmd_notgate,
    "orderfind": cmd_orderfind,
    "count": cmd_count,
    "sweep": cmd_sweep,
    "schedule": cmd_schedule,
}


def run_command(command: str, opts: dict) -> dict:
    out = HANDLERS[command](opts)
    record = {
        "experiment": command,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": opts,
        "results": out["results"],
        "oracle": out["oracle"],
        "table": out["table"],
    }
    if opts.get("seed") is not None:
        record["seed"] = opts["seed"]
    return record


def render(record: dict, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        write_csv(record["table"], buf)
        return buf.getvalue()
    return json.dumps(record, indent=2, default=_json_default) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = resolve_options(args.command, args)
        fmt = args.format or "json"
        if fmt not in ("json", "csv"):
            raise UsageError(f"unknown format {fmt!r}")
        record = run_command(args.command, opts)
    except UsageError as exc:
        print(f"qdelay: error: {exc}", file=sys.stderr)
        return 1
    except ModelError as exc:
        print(f"qdelay: model error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, OSError) as exc:
        print(f"qdelay: error: {exc}", file=sys.stderr)
        return 1

    text = render(record, fmt)
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{args.command}.{fmt}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
        print(path, file=sys.stderr)
    return 0
