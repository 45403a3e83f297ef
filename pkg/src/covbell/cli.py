"""Batch command-line front end.

Subcommands: tomography, chsh, check-covariance, reduce, enumerate,
frame-order. Config is accepted both as flags and as a JSON file
(``--config``); flags override file values. Every output embeds the full
resolved config and seed. Exit codes: 0 success, 1 usage error, 2 domain
error (e.g. a non-covariant model passed to ``reduce``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .core import MeasurementSetting, QuantumState, TimeOrdering, setting_grid, tsirelson_settings
from .covariance import (NotCovariantError, check_covariance, enumerate_finite,
                         reduce_to_local, strategies_to_csv)
from .models import make_model
from .spacetime import Boost, Event, SimultaneousEventsError, boost_event, is_spacelike, time_order
from .stats import (SeedSpec, chsh, estimate_joint, exact_joint, joint_record,
                    records_to_csv, records_to_json, sample_lambda)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_DEFAULTS = {
    "model": "gisin-singlet",
    "ordering": "AB",
    "settings": "grid:5",
    "mode": "mc",
    "n": 1_000_000,
    "grid": 2000,
    "seed": 0,
    "stream": 0,
    "workers": os.cpu_count() or 1,
    "probes": 10_000,
    "witness_cap": 32,
    "output": None,
    "format": "csv",
    "event_a": "0,-1",
    "event_b": "0,1",
    "velocities": "-0.5,0,0.5",
}


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--model")
    p.add_argument("--ordering", choices=["AB", "BA"])
    p.add_argument("--settings", help="'tsirelson', 'grid:N', or inline JSON vectors")
    p.add_argument("--mode", choices=["mc", "exact"])
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--probes", type=int)
    p.add_argument("--witness-cap", dest="witness_cap", type=int)
    p.add_argument("--output")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--event-a", dest="event_a", help="'t,x'")
    p.add_argument("--event-b", dest="event_b", help="'t,x'")
    p.add_argument("--velocities", help="comma-separated boost velocities")


def build_parser() -> _Parser:
    parser = _Parser(prog="covbell", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name in ("tomography", "chsh", "check-covariance", "reduce",
                 "enumerate", "frame-order"):
        _add_common(sub.add_parser(name))
    return parser


def _resolve_config(args) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    if cfg["n"] < 1:
        raise UsageError("n must be at least 1")
    if cfg["grid"] < 2:
        raise UsageError("grid must be at least 2")
    return cfg


def _parse_vec(v) -> MeasurementSetting:
    return MeasurementSetting.from_array(v)


def _setting_pairs(spec: str):
    """List of (a, b) pairs from a settings spec."""
    if spec == "tsirelson":
        a, ap, b, bp = tsirelson_settings()
        return [(a, b), (a, bp), (ap, b), (ap, bp)]
    if spec.startswith("grid:"):
        n = int(spec.split(":", 1)[1])
        g = setting_grid(n)
        return [(ga, gb) for ga in g for gb in g]
    if spec.startswith("["):
        return [(_parse_vec(pa), _parse_vec(pb)) for pa, pb in json.loads(spec)]
    raise UsageError(f"cannot parse settings spec {spec!r}")


def _setting_quad(spec: str):
    """CHSH quadruple (a, a', b, b') from a settings spec."""
    if spec == "tsirelson":
        return tsirelson_settings()
    if spec.startswith("["):
        vecs = json.loads(spec)
        if len(vecs) != 4:
            raise UsageError("chsh needs exactly 4 setting vectors (a, a', b, b')")
        return tuple(_parse_vec(v) for v in vecs)
    raise UsageError(f"cannot parse settings spec {spec!r} for chsh")


def _emit(text: str, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _provenance(cfg: dict) -> dict:
    """Config as embedded in outputs. Worker count and destination path are
    execution details that cannot affect results, so they are excluded; this
    keeps outputs byte-identical across worker counts."""
    return {k: v for k, v in cfg.items() if k not in ("workers", "output")}


def _json_doc(payload: dict, cfg: dict) -> str:
    return json.dumps({"config": _provenance(cfg), **payload},
                      sort_keys=True, indent=2) + "\n"


def _cmd_tomography(cfg) -> int:
    model = make_model(cfg["model"])
    ordering = TimeOrdering(cfg["ordering"])
    state = QuantumState.SINGLET
    seed = SeedSpec(cfg["seed"], cfg["stream"])
    records = []
    for i, (a, b) in enumerate(_setting_pairs(cfg["settings"])):
        if cfg["mode"] == "exact":
            table = exact_joint(model, ordering, state, a, b, cfg["grid"],
                                workers=cfg["workers"])
            n_or_grid = cfg["grid"]
        else:
            table = estimate_joint(model, ordering, state, a, b, cfg["n"],
                                   SeedSpec(seed.seed, seed.stream + i),
                                   workers=cfg["workers"])
            n_or_grid = cfg["n"]
        records.append(joint_record(ordering, a, b, table, n_or_grid, cfg["seed"]))
    writer = records_to_json if cfg["format"] == "json" else records_to_csv
    text = writer(records, _provenance(cfg))
    _emit(text, cfg["output"])
    return 0


def _cmd_chsh(cfg) -> int:
    model = make_model(cfg["model"])
    quad = _setting_quad(cfg["settings"])
    res = chsh(model, TimeOrdering(cfg["ordering"]), QuantumState.SINGLET, quad,
               mode=cfg["mode"], n=cfg["n"], grid=cfg["grid"],
               seed=SeedSpec(cfg["seed"], cfg["stream"]), workers=cfg["workers"])
    doc = _json_doc({
        "S": res.value,
        "stderr": res.stderr,
        "terms": [{"E": t.value, "stderr": t.stderr, "n": t.n} for t in res.terms],
    }, cfg)
    _emit(doc, cfg["output"])
    if cfg["output"]:
        print(f"S = {res.value:.17g} +/- {res.stderr:.17g}")
    return 0


def _probe_lambdas(model, cfg):
    pairs = _setting_pairs(cfg["settings"])
    n_lams = max(1, cfg["probes"] // len(pairs))
    lams = sample_lambda(model.lambda_dim, n_lams, SeedSpec(cfg["seed"], cfg["stream"]))
    return pairs, lams


def _cmd_check_covariance(cfg) -> int:
    model = make_model(cfg["model"])
    pairs, lams = _probe_lambdas(model, cfg)
    report = check_covariance(model, QuantumState.SINGLET, pairs, lams,
                              witness_cap=cfg["witness_cap"])
    _emit(_json_doc(report.to_dict(), cfg), cfg["output"])
    return 0


def _cmd_reduce(cfg) -> int:
    model = make_model(cfg["model"])
    pairs, lams = _probe_lambdas(model, cfg)
    try:
        view = reduce_to_local(model, QuantumState.SINGLET, pairs, lams,
                               witness_cap=cfg["witness_cap"])
    except NotCovariantError as err:
        doc = _json_doc({
            "reduced": False,
            "witness": err.witness.to_dict(),
            "checked": err.report.checked,
            "violations": err.report.violations,
            "violation_fraction": err.report.violation_fraction,
        }, cfg)
        sys.stdout.write(doc)
        print(str(err), file=sys.stderr)
        return 2
    correlators = []
    for a, b in pairs:
        prod = view.responds_alice_values(a, lams) * view.responds_bob_values(b, lams)
        correlators.append({
            "a": [a.x, a.y, a.z], "b": [b.x, b.y, b.z],
            "E": float(np.mean(prod)),
        })
    _emit(_json_doc({"reduced": True, "correlators": correlators}, cfg), cfg["output"])
    return 0


def _cmd_enumerate(cfg) -> int:
    summary = enumerate_finite()
    print(f"total={summary.total} covariant={summary.covariant} "
          f"max_S={summary.max_abs_s} max_S_covariant={summary.max_abs_s_covariant}")
    if cfg["output"]:
        if cfg["format"] == "json":
            rows = [{"id": r.index, "covariant": r.covariant,
                     "S_AB": r.s_ab, "S_BA": r.s_ba} for r in summary.rows]
            text = _json_doc({**summary.to_dict(), "strategies": rows}, cfg)
        else:
            text = ("# config = " + json.dumps(_provenance(cfg), sort_keys=True) + "\n"
                    + strategies_to_csv(summary))
        _emit(text, cfg["output"])
    return 0


def _parse_event(spec: str) -> Event:
    t, x = (float(part) for part in spec.split(","))
    return Event(t, x)


def _cmd_frame_order(cfg) -> int:
    ea = _parse_event(cfg["event_a"])
    eb = _parse_event(cfg["event_b"])
    velocities = [float(v) for v in str(cfg["velocities"]).split(",")]
    rows = []
    for v in velocities:
        boost = Boost(v)  # |v| >= 1 raises, handled as a domain error
        ta = boost_event(ea, boost).t
        tb = boost_event(eb, boost).t
        try:
            ordering = time_order(ea, eb, boost).value
        except SimultaneousEventsError:
            ordering = "simultaneous"
        rows.append({"v": v, "tA": ta, "tB": tb, "ordering": ordering})
    if cfg["format"] == "json":
        text = _json_doc({"spacelike": is_spacelike(ea, eb), "rows": rows}, cfg)
    else:
        lines = ["# config = " + json.dumps(_provenance(cfg), sort_keys=True),
                 f"# spacelike = {is_spacelike(ea, eb)}",
                 "v,tA,tB,ordering"]
        for r in rows:
            lines.append(f"{r['v']:.17g},{r['tA']:.17g},{r['tB']:.17g},{r['ordering']}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg["output"])
    return 0


_COMMANDS = {
    "tomography": _cmd_tomography,
    "chsh": _cmd_chsh,
    "check-covariance": _cmd_check_covariance,
    "reduce": _cmd_reduce,
    "enumerate": _cmd_enumerate,
    "frame-order": _cmd_frame_order,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required (see --help)")
        cfg = _resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as err:
        print(f"covbell: {err}", file=sys.stderr)
        return 1
    except KeyError as err:
        # unknown model name and similar lookup failures are usage errors
        print(f"covbell: {err.args[0]}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"covbell: {err}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
