"""Command-line front end.

Every command reads an optional JSON scenario and writes a JSON document
(or CSV for sweeps) to ``--out`` or stdout.  Exit codes: 0 success,
2 solver failure, 3 invalid input.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .config import DEFAULT
from .errors import (CapacityError, DomainError, Inconclusive, NotSteerable, NumericalFailure,
                     ShapeError, SolverError, ThermosteerError, ValidationError)
from .objects import (InstrumentFamily, ThermalContext, apply_instrument, choi_of_map,
                      compatible_family, family_from_json, lueders_family, mat_from_json,
                      measure_prepare_family, pauli_xz_family, thermal_state, xz_measure_prepare)
from .resource import Lf1Filter, monotone_audit, random_dao, random_lf1
from .steering import sr_gamma, sr_gamma_dual
from .thermo import Schedule, envelope_evolution, find_t_star, t_min_from_sr
from .work import certificate_hamiltonians, delta_bar, pauli_example

EXIT_OK, EXIT_SOLVER, EXIT_INVALID = 0, 2, 3

NV_DELTA = 1.59976e-7


# --------------------------------------------------------------------------
# deterministic serialisation


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent=0):
    """JSON with sorted keys and floats written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# --------------------------------------------------------------------------
# scenarios


class Scenario:
    """Parsed scenario file.

    Keys: ``system`` (``dim``, ``hamiltonian``, ``temperature``),
    ``instruments``, ``schedule``, ``evolution`` and ``outputs``.
    """

    def __init__(self, obj):
        if not isinstance(obj, dict):
            raise ValidationError("scenario must be a JSON object")
        self.raw = obj
        sysd = obj.get("system", {})
        self.dim = int(sysd.get("dim", 2))
        H = sysd.get("hamiltonian")
        H = np.zeros((self.dim, self.dim)) if H is None else mat_from_json(H)
        if H.shape != (self.dim, self.dim):
            raise ValidationError("hamiltonian does not match system dim")
        self.ctx = ThermalContext(H, sysd.get("temperature", 300.0))
        self.gamma = thermal_state(self.ctx)
        self.family = build_family(obj.get("instruments", {"kind": "pauli-xz"}), self.dim)
        if self.family.d_in != self.dim or self.family.d_out != self.dim:
            raise ValidationError("instrument dimensions do not match the system")
        self.schedule = Schedule.from_json(obj.get("schedule", {"kind": "partial", "t0": 1.0}))
        self.evolution = obj.get("evolution", {})
        self.outputs = obj.get("outputs", {})

    @classmethod
    def load(cls, path):
        if path is None:
            return cls({})
        with open(path) as fh:
            return cls(json.load(fh))


def build_family(desc, dim):
    kind = desc.get("kind")
    if kind == "pauli-xz":
        return pauli_xz_family()
    if kind == "xz-measure-prepare":
        return xz_measure_prepare()
    if kind == "projective":
        povms = [[mat_from_json(E) for E in row] for row in desc["povms"]]
        return lueders_family(povms)
    if kind == "measure-prepare":
        povms = [[mat_from_json(E) for E in row] for row in desc["povms"]]
        st = desc.get("state")
        state = np.eye(dim) / dim if st is None else mat_from_json(st)
        return measure_prepare_family(povms, state)
    if kind == "kraus":
        kraus = {}
        for key, ks in desc["kraus"].items():
            a, x = (int(t) for t in key.split("|"))
            kraus[(a, x)] = [mat_from_json(k) for k in ks]
        return InstrumentFamily.from_kraus(kraus, desc["n_outcomes"], desc["n_settings"])
    if kind == "choi":
        return family_from_json(desc)
    if kind == "compatible":
        parent = [choi_of_map([mat_from_json(k) for k in ks]) for ks in desc["parent"]]
        return compatible_family(parent, desc["postprocessing"], desc["n_outcomes"], desc["n_settings"])
    raise ValidationError(f"unknown instrument kind {kind!r}")


def _tol_overrides(text):
    if not text:
        return DEFAULT
    try:
        vals = json.loads(text)
    except json.JSONDecodeError:
        vals = {}
        for part in text.split(","):
            k, _, v = part.partition("=")
            vals[k.strip()] = float(v)
    allowed = set(DEFAULT.__dataclass_fields__) - {"trace"}
    bad = set(vals) - allowed
    if bad:
        raise ValidationError(f"unknown tolerance keys: {sorted(bad)}")
    for k in ("max_iters", "stagnation_iters", "strategy_cap"):
        if k in vals:
            vals[k] = int(vals[k])
    return DEFAULT.with_overrides(**vals)


# --------------------------------------------------------------------------
# commands


def cmd_sr(args, sc, cfg):
    sigma = apply_instrument(sc.family, sc.gamma)
    res = sr_gamma(sigma, sc.gamma, cfg)
    wit = sr_gamma_dual(sigma, sc.gamma, cfg)
    member = res.sr <= cfg.tol_member
    return {"sr": 0.0 if member else res.sr, "q_star": res.q_star, "lhs_member": member,
            "witness": wit.to_json()}


def cmd_tmin(args, sc, cfg):
    sigma = apply_instrument(sc.family, sc.gamma)
    sr = sr_gamma(sigma, sc.gamma, cfg).sr
    if sr <= cfg.tol_member:
        sr = 0.0
    return {"t_min": t_min_from_sr(sr, sc.schedule, cfg.tol_member),
            "schedule": sc.schedule.to_json(), "sr": sr}


CSV_COLUMNS = ["delta", "classical_bound", "quantum_value", "ratio", "sr", "t_min_over_t0"]


def _sweep(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ValidationError("--sweep expects lo:hi:n") from exc
    if n < 1:
        raise ValidationError("--sweep needs at least one point")
    return np.linspace(lo, hi, n)


def cmd_work(args, sc, cfg):
    T = sc.ctx.temperature
    if args.nv:
        args.delta = NV_DELTA
    if args.sweep:
        rows = [pauli_example(float(d), T, cfg) for d in _sweep(args.sweep)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
        return buf.getvalue()
    if args.delta is not None:
        r = pauli_example(args.delta, T, cfg)
        kT = sc.ctx.kT
        r["temperature"] = T
        r["classical_bound_over_kT"] = r["classical_bound"] / kT
        r["quantum_value_over_kT"] = r["quantum_value"] / kT
        r["difference"] = r["quantum_value"] - r["classical_bound"]
        return r
    sigma = apply_instrument(sc.family, sc.gamma)
    try:
        cert = certificate_hamiltonians(sigma, sc.gamma, T, cfg)
    except NotSteerable as exc:
        return {"steerable": False, "message": str(exc)}
    report = delta_bar(sigma, sc.gamma, cert.hamiltonians, T)
    return {"steerable": True, "certificate": cert.to_json(), "report": report.to_json()}


def violating_filter():
    """Qubit filter that shifts population towards |0> (breaks condition ii for I/2)."""
    return Lf1Filter(np.diag([1.0, 0.5]))


def cmd_audit(args, sc, cfg):
    rng = np.random.default_rng(args.seed)
    fam, g = sc.family, sc.gamma
    ops = [random_dao(fam.n_outcomes, fam.n_settings, g, rng) for _ in range(args.n)]
    filters = [random_lf1(g, rng) for _ in range(args.n)]
    if args.permissive and sc.dim == 2:
        filters.append(violating_filter())
    report = monotone_audit(fam, g, sc.schedule, ops, filters, permissive=args.permissive, cfg=cfg)
    sys.stderr.write(report.table() + "\n")
    out = report.to_json()
    out["n"] = args.n
    out["seed"] = args.seed
    return out


ENVELOPES = {
    "oscillatory": lambda t: math.exp(-t) * (1 + math.cos(10 * t)) / 2,
}


def cmd_tstar(args, sc, cfg):
    ev = sc.evolution
    env = ev.get("envelope", "schedule")
    if env == "schedule":
        c = sc.schedule.h
    elif env in ENVELOPES:
        c = ENVELOPES[env]
    else:
        raise ValidationError(f"unknown envelope {env!r}")
    sigma = apply_instrument(sc.family, sc.gamma)
    t_max = float(ev.get("t_max", 50.0 * sc.schedule.scale))
    res = find_t_star(sigma, sc.gamma, envelope_evolution(sc.gamma, c, env), t_max,
                      grid=int(ev.get("grid", 200)), tol=ev.get("tol"), cfg=cfg)
    return {"t_star": res.t_star, "crossings": res.crossings, "t_max": t_max, "envelope": env}


COMMANDS = {"sr": cmd_sr, "tmin": cmd_tmin, "work": cmd_work, "audit": cmd_audit, "tstar": cmd_tstar}


def _add_common(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--scenario", default=d(None), help="scenario JSON file")
    p.add_argument("--out", default=d(None), help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=d(7))
    p.add_argument("--tol-overrides", default=d(None),
                   help='JSON object or k=v list, e.g. "gap_tol=1e-9"')


def build_parser():
    # global flags are accepted before or after the command name
    p = argparse.ArgumentParser(prog="thermosteer",
                                description="Thermalisation steering robustness toolkit")
    _add_common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    cmds = {
        "sr": "steering robustness of the scenario family",
        "tmin": "survival time under the scenario schedule",
        "work": "work-extraction figures of merit",
        "audit": "monotonicity suites",
        "tstar": "finite-time vanishing under an evolution",
    }
    subs = {}
    for name, help_ in cmds.items():
        subs[name] = sub.add_parser(name, help=help_)
        _add_common(subs[name], suppress=True)
    w = subs["work"]
    w.add_argument("--delta", type=float)
    w.add_argument("--sweep", help="lo:hi:n grid of delta values (CSV output)")
    w.add_argument("--nv", action="store_true", help="use the NV energy scale delta")
    a = subs["audit"]
    a.add_argument("--n", type=int, default=200)
    a.add_argument("--permissive", action="store_true")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _tol_overrides(args.tol_overrides)
        sc = Scenario.load(args.scenario)
        result = COMMANDS[args.command](args, sc, cfg)
    except (SolverError, NumericalFailure, Inconclusive) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER
    except (ValidationError, ShapeError, DomainError, CapacityError, ThermosteerError,
            OSError, KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    text = result if isinstance(result, str) else dumps(result) + "\n"
    out = args.out or sc.outputs.get(args.command)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
