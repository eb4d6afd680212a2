"""Command-line driver: ``gmix <command> [options]``.

Exit status is 0 on success, 1 when inputs fail validation and 2 when a
numerical guard trips.  Settings resolve as flags > ``--config`` file
(``key=value`` lines) > defaults.  Artifacts are written atomically.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_INVALID, EXIT_GUARD = 0, 1, 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# settings


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


# (type, default) per setting; every subcommand reads the ones it needs
SETTINGS = {
    "seed": (int, 0),
    "out": (str, "."),
    "j_max": (int, None),
    "samples": (int, None),
    "n": (int, None),
    "beta": (float, 0.5),
    "n0": (int, 3),
    "j": (int, 4),
    "l": (int, 0),
    "k1": (int, 0),
    "k2": (int, 0),
    "m": (int, 108),
    "r0": (float, 6.0),
    "order": (int, 2),
    "grid": (str, "tight"),
    "ramp": (str, "exp"),
    "ramp_order": (int, 0),
    "coeffs": (str, None),
    "profile": (str, "power"),
    "alpha": (float, 1.5),
    "n_list": (_int_list, [256, 512, 1024, 2048, 4096, 8192]),
    "j_cap": (int, 6),
    "k_max": (int, 16),
    "length": (int, None),
    "quad_step": (float, None),
    "oversample": (float, 1.0),
    "radius": (float, 64.0),
    "row_radius": (float, 40.0),
    "no_timing": (bool, False),
}

COMMAND_DEFAULTS = {
    "frame-check": {"j_max": 8, "samples": 100000},
    "bessel-audit": {"j_max": 40, "samples": 10000},
    "approx": {"n": 1024},
    "budget": {"n": 256},
}


def read_config(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _convert(key, val)
    return values


def _convert(key, val):
    kind = SETTINGS[key][0]
    try:
        if kind is bool:
            if str(val).lower() in ("1", "true", "yes", "on"):
                return True
            if str(val).lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(val)
        return kind(val)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {val!r}") from exc


_CHECKS = [
    ("n", lambda v: v is None or v >= 1, "n must be >= 1"),
    ("beta", lambda v: 0 < v < 1, "beta must lie in (0, 1)"),
    ("n0", lambda v: v >= 1, "n0 must be >= 1"),
    ("r0", lambda v: v > 0, "r0 must be positive"),
    ("order", lambda v: v >= 1, "order must be >= 1"),
    ("j", lambda v: v >= 0, "j must be >= 0"),
    ("m", lambda v: v >= 1, "m must be >= 1"),
    ("grid", lambda v: v in ("tight", "narrow"), "grid must be tight or narrow"),
    ("ramp", lambda v: v in ("exp", "poly"), "ramp must be exp or poly"),
    ("j_max", lambda v: v is None or v >= 0, "j_max must be >= 0"),
    ("samples", lambda v: v is None or v >= 1, "samples must be >= 1"),
    ("alpha", lambda v: v > 0.5, "alpha must exceed 1/2"),
    ("n_list", lambda v: len(v) >= 2 and min(v) >= 1, "n_list needs two or more budgets"),
    ("j_cap", lambda v: v >= 0, "j_cap must be >= 0"),
    ("k_max", lambda v: v >= 0, "k_max must be >= 0"),
    ("length", lambda v: v is None or v >= 1, "length must be >= 1"),
    ("quad_step", lambda v: v is None or v > 0, "quad_step must be positive"),
    ("oversample", lambda v: v > 0, "oversample must be positive"),
    ("radius", lambda v: v > 0, "radius must be positive"),
    ("row_radius", lambda v: v > 0, "row_radius must be positive"),
]


def validate(conf):
    for key, ok, message in _CHECKS:
        if not ok(conf[key]):
            raise UsageError(message)
    return conf


def resolve(command, flags, config_path):
    conf = {key: default for key, (_, default) in SETTINGS.items()}
    conf.update(COMMAND_DEFAULTS.get(command, {}))
    if config_path:
        conf.update(read_config(config_path))
    conf.update({k: v for k, v in flags.items() if v is not None and k in SETTINGS})
    return validate(conf)


# ---------------------------------------------------------------------------
# output


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload):
    atomic_write(path, json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")


def _g17(x):
    return format(float(x), ".17g")


def mixture_json(mixture):
    """Mixture as a JSON array of terms, floats at 17 significant digits."""
    rows = []
    for w, L, c in zip(mixture.weights, mixture.L, mixture.centers):
        mat = ", ".join(_g17(v) for v in L.ravel())
        rows.append(f'  {{"weight": {_g17(w)}, "l_matrix": [{mat}], '
                    f'"center": [{_g17(c[0])}, {_g17(c[1])}]}}')
    return "[\n" + ",\n".join(rows) + ("\n]\n" if rows else "]\n")


def read_mixture(path):
    from .gaussmix import GaussianMixture

    data = json.loads(Path(path).read_text())
    return GaussianMixture([d["weight"] for d in data],
                           [d["l_matrix"] for d in data], [d["center"] for d in data])


def read_coefficients(path):
    from .frame import CurveletIndex

    try:
        data = json.loads(Path(path).read_text())
        return [(float(d["omega"]), CurveletIndex(int(d["j"]), int(d["l"]), int(d["k1"]), int(d["k2"])))
                for d in data]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad coefficient file {path}: {exc}") from exc


def envelope(command, conf, body):
    return {"tool": "gmixcurve", "version": __version__, "command": command,
            "config": conf, **body}


# ---------------------------------------------------------------------------
# commands


def _scheme_config(conf):
    from .frame import Ramp
    from .gaussmix import SchemeConfig

    return SchemeConfig(r0=conf["r0"], order=conf["order"], grid=conf["grid"],
                        ramp=Ramp(conf["ramp"], conf["ramp_order"]))


def _quadrature(conf):
    from .field import QuadratureConfig

    return QuadratureConfig(step=conf["quad_step"], oversample=conf["oversample"])


def cmd_frame_check(conf):
    from .field import SpectralFunction, frame_energy, l2_norm
    from .frame import CurveletIndex, Ramp, WindowSet, pu_total

    windows = WindowSet(Ramp(conf["ramp"], conf["ramp_order"]))
    rng = np.random.default_rng(conf["seed"])
    n, jm = conf["samples"], conf["j_max"]
    r = np.sqrt(rng.uniform(0, 1, n)) * (2 * np.pi / 3) * 2**jm
    th = rng.uniform(-np.pi, np.pi, n)
    xi = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    pu = float(np.abs(pu_total(xi, jm, windows) - 1).max())
    rr = rng.uniform(0, 2**jm, n)
    radial = windows.w0(rr) ** 2 + sum(windows.w(rr / 2**j) ** 2 for j in range(1, jm + 2))
    tt = rng.uniform(-np.pi, np.pi, n)
    angular = windows.nu(tt) ** 2 + windows.nu(tt - np.pi) ** 2 + windows.nu(tt + np.pi) ** 2
    idx = CurveletIndex(4, 1, 3, -2)
    f = SpectralFunction([(1.0, idx)], grid=conf["grid"], windows=windows)
    parseval = frame_energy(f, conf["radius"]) / l2_norm(f) ** 2
    checks = {
        "partition_max_dev": pu,
        "radial_max_dev": float(np.abs(radial - 1).max()),
        "angular_max_dev": float(np.abs(angular - 1).max()),
        "parseval_ratio": parseval,
        "parseval_index": list(idx.key()),
    }
    ok = pu <= 1e-8 and checks["radial_max_dev"] <= 1e-10 and \
        checks["angular_max_dev"] <= 1e-10 and abs(parseval - 1) <= 1e-3
    write_json(Path(conf["out"]) / "frame_check.json", envelope("frame-check", conf, {**checks, "pass": ok}))
    return checks, ok


def cmd_budget(conf):
    from .budget import sub_budgets, validate_plan

    plan = sub_budgets(conf["n"], conf["beta"], conf["n0"])
    ok, why = validate_plan(plan)
    body = {**plan.to_dict(), "sequence": plan.sequence(), "spend": plan.spend(),
            "valid": ok, "reason": why}
    write_json(Path(conf["out"]) / "budget.json", envelope("budget", conf, body))
    return body, ok


def cmd_gen_approx(conf):
    from .gaussmix import approximate_generator, budget_to_h, sample_box, weighted_error

    cfg = _scheme_config(conf)
    j, M = conf["j"], conf["m"]
    mix = approximate_generator(j, M, cfg)
    pts = sample_box(j, cfg)
    werr = weighted_error(j, mix, pts, cfg)
    pick = np.linspace(0, len(pts) - 1, 16).astype(int)
    body = {"j": j, "m": M, "h": budget_to_h(M, j, cfg), "term_count": len(mix),
            "sup_weighted_error": float(np.nanmax(werr)),
            "weighted_error_samples": [{"xi": pts[i].tolist(),
                                        "value": None if np.isnan(werr[i]) else float(werr[i])}
                                       for i in pick]}
    out = Path(conf["out"])
    atomic_write(out / "generator_mixture.json", mixture_json(mix))
    write_json(out / "gen_approx.json", envelope("gen-approx", conf, body))
    return body, len(mix) <= M


def cmd_curvelet_approx(conf):
    from .frame import CurveletIndex
    from .gaussmix import approximate_curvelet

    cfg = _scheme_config(conf)
    idx = CurveletIndex(conf["j"], conf["l"], conf["k1"], conf["k2"])
    mix = approximate_curvelet(idx, conf["m"], cfg)
    out = Path(conf["out"])
    atomic_write(out / "curvelet_mixture.json", mixture_json(mix))
    body = {"index": list(idx.key()), "m": conf["m"], "term_count": len(mix)}
    write_json(out / "curvelet_approx.json", envelope("curvelet-approx", conf, body))
    return body, len(mix) <= conf["m"]


def cmd_approx(conf):
    from .scheme import all_errors, approximate, rearrange

    if not conf["coeffs"]:
        raise UsageError("approx needs --coeffs")
    cfg = _scheme_config(conf)
    seq = rearrange(read_coefficients(conf["coeffs"]))
    mix, plan, rep = approximate(seq, conf["n"], conf["beta"], cfg, conf["n0"])
    q = _quadrature(conf)
    if len(seq):
        rep.i_plus, rep.i_minus, rep.total_error = all_errors(seq, mix, plan, q, cfg.grid)
    else:
        rep.i_plus = rep.i_minus = rep.total_error = 0.0
    if conf["no_timing"]:
        rep.seconds = 0.0
    out = Path(conf["out"])
    atomic_write(out / "mixture.json", mixture_json(mix))
    body = {"report": rep.to_dict(), "plan": plan.to_dict()}
    write_json(out / "approx_report.json", envelope("approx", conf, body))
    return body, rep.terms_used <= conf["n"]


RATE_COLUMNS = ["n_budget", "terms_used", "m_star", "i_plus", "i_minus", "total_error", "seconds"]


def cmd_rate(conf):
    from .scheme import rate_study

    if conf["profile"] not in ("power", "cartoon"):
        raise UsageError("profile must be power or cartoon")
    cfg = _scheme_config(conf)
    rows, slope, ideal = rate_study(conf["profile"], conf["n_list"], conf["beta"], conf["seed"],
                                    cfg, conf["alpha"], conf["j_cap"], conf["k_max"],
                                    conf["length"], _quadrature(conf), conf["n0"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RATE_COLUMNS)
    for r in rows:
        secs = 0.0 if conf["no_timing"] else r.seconds
        writer.writerow([r.n_budget, r.terms_used, r.m_star, _g17(r.i_plus), _g17(r.i_minus),
                         _g17(r.total_error), _g17(secs)])
    out = Path(conf["out"])
    atomic_write(out / f"rate_{conf['profile']}.csv", buf.getvalue())
    lo, hi = (-1.25, -0.75) if conf["profile"] == "cartoon" else (-1.2, -0.8)
    body = {"slope": slope, "ideal_slope": ideal, "target": [lo, hi],
            "all_within_budget": all(r.terms_used <= r.n_budget for r in rows),
            "csv": f"rate_{conf['profile']}.csv"}
    ok = lo <= slope <= hi and body["all_within_budget"]
    write_json(out / f"rate_{conf['profile']}.json", envelope("rate", conf, {**body, "pass": ok}))
    return body, ok


def cmd_bessel_audit(conf):
    from . import bessel

    jm, n, seed = conf["j_max"], conf["samples"], conf["seed"]
    reports = [
        bessel.audit_star(min(n, 1000), 20, jm, seed),
        bessel.audit_sectors(n, jm, seed),
        bessel.audit_separation(jm, conf["grid"]),
        bessel.audit_rho(n, jm, seed),
        bessel.audit_rowsum(min(n, 100), min(jm, 20), conf["row_radius"], seed),
    ]
    body = {"audits": [r.to_dict() for r in reports]}
    ok = all(r.passed for r in reports)
    write_json(Path(conf["out"]) / "bessel_audit.json", envelope("bessel-audit", conf, {**body, "pass": ok}))
    return body, ok


COMMANDS = {
    "frame-check": cmd_frame_check,
    "budget": cmd_budget,
    "gen-approx": cmd_gen_approx,
    "curvelet-approx": cmd_curvelet_approx,
    "approx": cmd_approx,
    "rate": cmd_rate,
    "bessel-audit": cmd_bessel_audit,
}


def build_parser():
    parser = _Parser(prog="gmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)

    def add(name, *flags):
        p = sub.add_parser(name, parents=[common])
        for flag in flags:
            key = flag.lstrip("-").replace("-", "_")
            kind = SETTINGS[key][0]
            if kind is bool:
                p.add_argument(flag, action="store_true", default=None)
            else:
                p.add_argument(flag, type=kind)
        return p

    scheme = ("--r0", "--order", "--grid", "--ramp", "--ramp-order")
    quad = ("--quad-step", "--oversample", "--no-timing")
    add("frame-check", "--j-max", "--samples", "--grid", "--ramp", "--ramp-order", "--radius")
    add("budget", "--n", "--beta", "--n0")
    add("gen-approx", "--j", "--m", *scheme)
    add("curvelet-approx", "--j", "--l", "--k1", "--k2", "--m", *scheme)
    add("approx", "--coeffs", "--n", "--beta", "--n0", *scheme, *quad)
    add("rate", "--profile", "--alpha", "--beta", "--n0", "--n-list", "--j-cap", "--k-max",
        "--length", *scheme, *quad)
    add("bessel-audit", "--j-max", "--samples", "--grid", "--row-radius")
    sub.add_parser("version", parents=[common])
    return parser


def run(argv=None):
    """Execute one command; returns the exit status."""
    from .budget import BudgetError
    from .field import QuadratureError
    from .frame import FrameError
    from .gaussmix import GuardError, SchemeError
    from .scheme import SequenceError

    try:
        args = build_parser().parse_args(argv)
        if args.command == "version":
            print(f"gmixcurve {__version__}")
            return EXIT_OK
        conf = resolve(args.command, vars(args), args.config)
        body, ok = COMMANDS[args.command](conf)
    except (GuardError, ArithmeticError) as exc:
        print(f"gmix: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, BudgetError, SchemeError, FrameError, QuadratureError,
            SequenceError, ValueError, OSError) as exc:
        print(f"gmix: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(_clean({"command": args.command, "pass": ok}), sort_keys=True))
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
