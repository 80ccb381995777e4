"""Command-line driver.

Every command resolves one configuration tree (built-in defaults, then a
TOML file given with --config, then explicit flags), validates it against
SCHEMA, runs, and writes a CSV or JSON report that embeds the resolved
config.  Exit codes: 0 success / all criteria pass, 1 criterion failure,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .decaylab import (DecayFitError, UnsupportedCombination, check_envelope, envelope_predict,
                       fit_decay, scenario_classify)
from .eigenpair import (EigenpairSpec, decay_class, eigenfunction_value, lp_membership,
                        potential_value, sign_at_infinity)
from .fraclap import QuadConfig, QuadratureError, residual
from .levysim import (CensoringError, PathConfig, ProcessSpec, exit_law_check,
                      extrapolated_exit_time, fk_functional, getoor_mean_exit, lifetime_lambda,
                      mean_exit_time, survival_prob)
from .potentials import PotentialModel
from .specfun import HypergeometricConvergenceError, PoleError

log = logging.getLogger("zeroenergy")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

Vector = list  # schema marker: list of floats

SCHEMA = {
    "run": {"seed": int, "workers": int, "log_level": str, "out": str, "format": str},
    "eigenpair": {"d": int, "alpha": float, "l": int, "kappa": float, "axis": int,
                  "grid": str, "direction": Vector, "classify": bool, "p": float},
    "process": {"family": str, "d": int, "alpha": float, "gamma": float, "cutoff": float},
    "potential": {"family": str, "beta": float, "delta": float, "r0": float, "lam": float},
    "quad": {"inner_radius": float, "outer_radius": float, "nodes_per_decade": int,
             "angular_nodes": int, "tail_order": int, "feature_scale": float},
    "paths": {"dt": float, "horizon": float, "n_paths": int, "rho": float,
              "kill_log_weight": float, "censor_threshold": float},
    "simulate": {"radius": float, "center": Vector, "x": Vector, "domain": str,
                 "payoff": str, "eta": float, "extrapolate": bool},
    "predict": {"traits": str, "p": float},
    "fit": {"input": str, "model": str, "grid": str, "source": str},
    "verify": {"suite": str, "family": str, "paths": int},
}

DEFAULTS = {
    "run": {"seed": 0, "workers": 1, "log_level": "WARNING", "format": "json"},
    "eigenpair": {"d": 1, "alpha": 1.0, "l": 0, "kappa": 1.0, "axis": 1,
                  "grid": "log:1e-1:1e4:50", "classify": False},
    "process": {"family": "isotropic", "d": 1, "alpha": 1.0, "cutoff": 1e-3},
    "potential": {"family": "hypergeometric", "r0": 1.0},
    "quad": {},
    "paths": {"dt": 1e-3, "horizon": 100.0, "n_paths": 10_000},
    "simulate": {"radius": 1.0, "domain": "ball", "payoff": "phi", "extrapolate": False},
    "predict": {"traits": "positive"},
    "fit": {},
    "verify": {"suite": "all"},
}

# flag dest -> config locations it sets
FLAG_TARGETS = {
    "seed": [("run", "seed")],
    "workers": [("run", "workers")],
    "log_level": [("run", "log_level")],
    "out": [("run", "out")],
    "format": [("run", "format")],
    "d": [("eigenpair", "d"), ("process", "d")],
    "alpha": [("eigenpair", "alpha"), ("process", "alpha")],
    "l": [("eigenpair", "l")],
    "kappa": [("eigenpair", "kappa")],
    "axis": [("eigenpair", "axis")],
    "grid": [("eigenpair", "grid"), ("fit", "grid")],
    "direction": [("eigenpair", "direction")],
    "classify": [("eigenpair", "classify")],
    "process": [("process", "family")],
    "gamma": [("process", "gamma")],
    "cutoff": [("process", "cutoff")],
    "potential": [("potential", "family")],
    "beta": [("potential", "beta")],
    "delta": [("potential", "delta")],
    "r0": [("potential", "r0")],
    "lam": [("potential", "lam")],
    "inner_radius": [("quad", "inner_radius")],
    "outer_radius": [("quad", "outer_radius")],
    "nodes_per_decade": [("quad", "nodes_per_decade")],
    "angular_nodes": [("quad", "angular_nodes")],
    "tail_order": [("quad", "tail_order")],
    "dt": [("paths", "dt")],
    "horizon": [("paths", "horizon")],
    "n_paths": [("paths", "n_paths")],
    "rho": [("paths", "rho")],
    "radius": [("simulate", "radius")],
    "center": [("simulate", "center")],
    "x": [("simulate", "x")],
    "domain": [("simulate", "domain")],
    "payoff": [("simulate", "payoff")],
    "eta": [("simulate", "eta")],
    "extrapolate": [("simulate", "extrapolate")],
    "traits": [("predict", "traits")],
    "p": [("predict", "p"), ("eigenpair", "p")],
    "input": [("fit", "input")],
    "model": [("fit", "model")],
    "source": [("fit", "source")],
    "suite": [("verify", "suite")],
    "family": [("verify", "family")],
    "paths": [("verify", "paths"), ("paths", "n_paths")],
}


class ConfigError(ValueError):
    pass


# -- configuration ----------------------------------------------------------


def _load_toml(path: str) -> dict:
    try:
        import tomllib as toml  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as toml
    try:
        with open(path, "rb") as fh:
            return toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except toml.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def _coerce(section: str, key: str, value):
    kind = SCHEMA[section][key]
    where = f"{section}.{key}"
    if kind is Vector:
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where} must be a list of numbers")
        try:
            return [float(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where} must be a list of numbers") from exc
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string")
    return value


def _merge(base: dict, tree: dict, origin: str) -> None:
    for section, body in tree.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section {section!r} in {origin}")
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be a table")
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key} in {origin}")
            base[section][key] = _coerce(section, key, value)


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        _merge(cfg, _load_toml(args.config), args.config)
    flags = {}
    for dest, targets in FLAG_TARGETS.items():
        if dest in vars(args):
            for section, key in targets:
                flags.setdefault(section, {})[key] = getattr(args, dest)
    _merge(cfg, flags, "command line")
    run = cfg["run"]
    if run["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not 0 <= run["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if run["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def parse_grid(text: str) -> np.ndarray:
    """``log:lo:hi:n``, ``lin:lo:hi:n`` or a comma-separated list of radii."""
    parts = text.split(":")
    try:
        if parts[0] in ("log", "lin"):
            if len(parts) != 4:
                raise ConfigError(f"grid {text!r} must look like {parts[0]}:lo:hi:n")
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
            if n < 1 or (parts[0] == "log" and (lo <= 0 or hi <= 0)):
                raise ConfigError(f"bad grid {text!r}")
            return np.geomspace(lo, hi, n) if parts[0] == "log" else np.linspace(lo, hi, n)
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _spec(cfg: dict) -> EigenpairSpec:
    e = cfg["eigenpair"]
    return EigenpairSpec(e["d"], e["alpha"], e["l"], e["kappa"], e["axis"])


def _points(cfg: dict, spec: EigenpairSpec, radii: np.ndarray) -> np.ndarray:
    direction = cfg["eigenpair"].get("direction")
    if direction is None:
        u = np.zeros(spec.d)
        u[spec.axis - 1] = 1.0
    else:
        u = np.asarray(direction, dtype=float)
        if u.size != spec.d or not np.linalg.norm(u) > 0:
            raise ConfigError(f"direction must be a nonzero vector of length {spec.d}")
        u = u / np.linalg.norm(u)
    return radii[:, None] * u[None, :]


def _process(cfg: dict) -> ProcessSpec:
    p = cfg["process"]
    if p["family"] == "isotropic":
        return ProcessSpec.isotropic(p["alpha"], p["d"])
    if p["family"] == "layered":
        if "gamma" not in p:
            raise ConfigError("layered process needs gamma")
        return ProcessSpec.layered(p["alpha"], p["gamma"], p["d"], p["cutoff"])
    raise ConfigError(f"unknown process family {p['family']!r}")


def _potential(cfg: dict) -> PotentialModel:
    v = cfg["potential"]
    fam = v["family"]
    if fam == "hypergeometric":
        return PotentialModel.hypergeometric(_spec(cfg))
    need = {"power": ("beta",), "power_log": ("beta", "delta"), "constant": ("lam",)}
    if fam not in need:
        raise ConfigError(f"unknown potential family {fam!r}")
    missing = [k for k in need[fam] if k not in v]
    if missing:
        raise ConfigError(f"{fam} potential needs {', '.join(missing)}")
    if fam == "power":
        return PotentialModel.power(v["beta"], v["r0"])
    if fam == "power_log":
        return PotentialModel.power_log(v["beta"], v["delta"], max(v["r0"], math.e))
    return PotentialModel.constant(v["lam"])


def _path_cfg(cfg: dict) -> PathConfig:
    return PathConfig(seed=cfg["run"]["seed"], workers=cfg["run"]["workers"], **cfg["paths"])


def _relevant(cfg: dict, sections) -> dict:
    return {s: cfg[s] for s in ("run",) + tuple(sections)}


# -- commands: each returns (header dict, rows or None, exit code) ------------


def cmd_eigenpair(cfg: dict):
    spec = _spec(cfg)
    header = {"spec": spec.to_dict()}
    if spec.kappa < spec.kappa_max:
        header["decay_class"] = decay_class(spec).to_dict()
        header["sign_at_infinity"] = sign_at_infinity(spec)
    else:
        # the closed-form boundary pair: tabulated, but outside the decay table
        header["decay_class"] = None
    if "p" in cfg["eigenpair"]:
        header["lp_member"] = lp_membership(spec, cfg["eigenpair"]["p"])
    radii = parse_grid(cfg["eigenpair"]["grid"])
    pts = _points(cfg, spec, radii)
    phi = np.atleast_1d(eigenfunction_value(spec, pts if spec.d > 1 else pts[:, 0]))
    v = np.atleast_1d(potential_value(spec, pts if spec.d > 1 else pts[:, 0]))
    rows = [{"r": float(r), "phi": float(f), "V": float(w)} for r, f, w in zip(radii, phi, v)]
    if spec.d > 1:
        for row, p in zip(rows, pts):
            row.update({f"x_{k + 1}": float(c) for k, c in enumerate(p)})
    return header, rows, EXIT_OK, ("eigenpair",)


def cmd_residual(cfg: dict):
    spec = _spec(cfg)
    qc = QuadConfig(**cfg["quad"])
    radii = parse_grid(cfg["eigenpair"]["grid"])
    rep = residual(spec, _points(cfg, spec, radii), qc, workers=cfg["run"]["workers"])
    rows = []
    for r, pt in zip(radii, rep["points"]):
        row = {"r": float(r)}
        row.update({f"x_{k + 1}": c for k, c in enumerate(pt["x"])})
        row.update({k: pt[k] for k in ("frac_laplacian", "v_phi", "residual", "rel")})
        rows.append(row)
    header = {"spec": spec.to_dict(), "max_abs": rep["max_abs"], "max_rel": rep["max_rel"]}
    return header, rows, EXIT_OK, ("eigenpair", "quad")


def cmd_classify(cfg: dict):
    proc, pot = _process(cfg), _potential(cfg)
    _check_pair(proc, pot)
    a, delta = pot.tail_exponents()
    header = {"process": proc.to_dict(), "potential": pot.to_dict(),
              "sign_at_infinity": pot.sign_at_infinity(), "tail_exponent": a,
              "tail_log_power": delta}
    if pot.sign_at_infinity() == "positive":
        header["scenario"] = scenario_classify(proc, pot)
    if pot.family == "hypergeometric":
        header["decay_class"] = decay_class(pot.spec).to_dict()
    return header, None, EXIT_OK, ("eigenpair", "process", "potential")


def cmd_predict(cfg: dict):
    proc, pot = _process(cfg), _potential(cfg)
    _check_pair(proc, pot)
    pred = envelope_predict(proc, pot, cfg["predict"]["traits"], cfg["predict"].get("p"))
    header = {"process": proc.to_dict(), "potential": pot.to_dict(),
              "prediction": pred.to_dict()}
    return header, None, EXIT_OK, ("eigenpair", "process", "potential", "predict")


def _check_pair(proc: ProcessSpec, pot: PotentialModel) -> None:
    if pot.family == "hypergeometric":
        s = pot.spec
        if proc.family != "isotropic_stable" or s.d != proc.d or s.alpha != proc.alpha:
            raise ConfigError("the hypergeometric potential belongs to the isotropic "
                              "stable process with the same d and alpha")


def _payoff(cfg: dict, pot: PotentialModel):
    kind = cfg["simulate"]["payoff"]
    if kind == "one":
        return lambda y: np.ones(len(y))
    if kind == "phi":
        if pot.family != "hypergeometric":
            raise ConfigError("payoff 'phi' needs the hypergeometric potential")
        spec = pot.spec
        return lambda y: eigenfunction_value(spec, y if spec.d > 1 else y[:, 0])
    raise ConfigError("payoff must be 'phi' or 'one'")


def _vec(cfg: dict, key: str, d: int, default=None) -> np.ndarray:
    v = cfg["simulate"].get(key, default)
    if v is None:
        raise ConfigError(f"simulate.{key} is required")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and d > 1:
        v = np.concatenate([v, np.zeros(d - 1)])
    if v.size != d:
        raise ConfigError(f"simulate.{key} must have {d} components")
    return v


def cmd_simulate(cfg: dict, what: str):
    proc = _process(cfg)
    pc = _path_cfg(cfg)
    sim = cfg["simulate"]
    header = {"process": proc.to_dict(), "seed": pc.seed, "n": pc.n_paths, "dt": pc.dt}
    sections = ["process", "paths", "simulate"]
    r = sim["radius"]
    if what == "exit":
        if "eta" in sim:
            est = survival_prob(proc, r, sim["eta"], pc)
            header.update(quantity="survival_probability", radius=r, eta=sim["eta"],
                          estimate=est.to_dict())
        elif sim["extrapolate"]:
            ext = extrapolated_exit_time(proc, r, pc)
            header.update(quantity="mean_exit_time", radius=r, estimate=ext["fine"].to_dict(),
                          extrapolated=ext["extrapolated"],
                          extrapolation_error=ext["extrapolation_error"],
                          combined_error=ext["combined_error"],
                          by_dt={repr(k): v for k, v in ext["by_dt"].items()})
        else:
            est = mean_exit_time(proc, r, pc)
            header.update(quantity="mean_exit_time", radius=r, estimate=est.to_dict())
        if proc.family == "isotropic_stable" and "eta" not in sim:
            header["getoor"] = getoor_mean_exit(proc.d, proc.alpha, r)
    elif what == "fk":
        pot = _potential(cfg)
        _check_pair(proc, pot)
        center = _vec(cfg, "center", proc.d, [0.0])
        x = _vec(cfg, "x", proc.d)
        est = fk_functional(proc, pot, (sim["domain"], center, r), x, _payoff(cfg, pot), pc)
        header.update(quantity="feynman_kac", potential=pot.to_dict(), domain=sim["domain"],
                      center=center.tolist(), radius=r, x=x.tolist(), estimate=est.to_dict())
        if sim["payoff"] == "phi":
            header["phi_x"] = float(np.atleast_1d(
                eigenfunction_value(pot.spec, x if proc.d > 1 else x[0]))[0])
        sections += ["eigenpair", "potential"]
    elif what == "lambda":
        pot = _potential(cfg)
        _check_pair(proc, pot)
        x = _vec(cfg, "x", proc.d)
        est = lifetime_lambda(proc, pot, x, pc)
        scale = max(est.meta["v_star"], est.meta["psi_inv_x"])
        header.update(quantity="mean_lifetime", potential=pot.to_dict(), x=x.tolist(),
                      estimate=est.to_dict(), scaled=est.mean * scale)
        sections += ["eigenpair", "potential"]
    elif what == "exitlaw":
        rep = exit_law_check(proc, r, pc)
        header.update(quantity="exit_law", radius=r, report=rep)
    else:
        raise ConfigError(f"unknown simulate target {what!r}")
    est = header.get("estimate")
    if est is not None:
        header["censored_fraction"] = est["censored"] / est["n"]
    return header, None, EXIT_OK, tuple(sections)


def _read_samples(path: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from exc
    rows = list(csv.reader(lines))
    if rows and not _is_number(rows[0][0]):
        head = [h.strip() for h in rows[0]]
        rows = rows[1:]
        ri = head.index("r") if "r" in head else 0
        vi = next((head.index(k) for k in ("value", "phi", "V") if k in head), 1)
    else:
        ri, vi = 0, 1
    try:
        data = np.array([[float(row[ri]), float(row[vi])] for row in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"samples in {path} must be numeric (r, value) pairs") from exc
    if data.size == 0:
        raise ConfigError(f"no samples in {path}")
    return data[:, 0], data[:, 1]


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_fit(cfg: dict):
    f = cfg["fit"]
    sections = ["fit"]
    if "input" in f:
        r, vals = _read_samples(f["input"])
        source = f["input"]
    else:
        # sample |phi| or |V| of the configured eigenpair along its axis
        spec = _spec(cfg)
        r = parse_grid(f.get("grid", "log:1e2:1e6:41"))
        pts = _points(cfg, spec, r)
        which = f.get("source", "phi")
        fn = {"phi": eigenfunction_value, "V": potential_value}.get(which)
        if fn is None:
            raise ConfigError("fit.source must be 'phi' or 'V'")
        vals = np.abs(np.atleast_1d(fn(spec, pts if spec.d > 1 else pts[:, 0])))
        source = {"spec": spec.to_dict(), "sampled": which}
        sections.append("eigenpair")
    fit = fit_decay(r, vals, f.get("model"))
    header = {"source": source, "fit": fit.to_dict()}
    if cfg["predict"].get("traits") and "potential" in cfg and "input" not in f \
            and cfg["potential"]["family"] == "hypergeometric" and f.get("source", "phi") == "phi":
        proc, pot = _process(cfg), _potential(cfg)
        try:
            pred = envelope_predict(proc, pot, cfg["predict"]["traits"], cfg["predict"].get("p"))
            header["envelope_check"] = check_envelope(r, vals, pred)
        except UnsupportedCombination as exc:
            header["envelope_check"] = {"skipped": str(exc)}
    return header, None, EXIT_OK, tuple(sections)


def cmd_verify(cfg: dict):
    from .verify import ConfigError as VerifyConfigError, VerifyConfig, run

    v = cfg["verify"]
    try:
        vc = VerifyConfig(suite=v["suite"], seed=cfg["run"]["seed"],
                          workers=cfg["run"]["workers"], paths=v.get("paths", 100_000),
                          family=v.get("family"), quad=dict(cfg["quad"]))
    except VerifyConfigError as exc:
        raise ConfigError(str(exc)) from exc
    report = run(vc)
    rows = [{"id": c["id"], "title": c["title"], "pass": c["pass"]} for c in report["criteria"]]
    return report, rows, (EXIT_OK if report["all_pass"] else EXIT_FAIL), ()


# -- output -----------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip decimal
    return str(v)


def render(report: dict, rows, fmt: str) -> str:
    if fmt == "json":
        body = dict(report)
        if rows is not None and "criteria" not in report:
            body["rows"] = rows
        return json.dumps(_jsonable(body), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    meta = {k: v for k, v in report.items() if k not in ("criteria",)}
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=False)}\n")
    w = csv.writer(buf, lineterminator="\n")
    if rows:
        cols = list(rows[0])
        w.writerow(cols)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in cols])
    return buf.getvalue()


# -- argument parsing -------------------------------------------------------


def _global_options(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", default=S, help="TOML configuration file")
    g.add_argument("--out", metavar="PATH", default=S, help="write the report here (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=S)
    g.add_argument("--seed", type=int, default=S, help="64-bit unsigned seed")
    g.add_argument("--workers", type=int, default=S)
    g.add_argument("--log-level", dest="log_level", default=S,
                   choices=("DEBUG", "INFO", "WARNING", "ERROR"))


def _spec_options(p, with_grid=True) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--d", type=int, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--l", type=int, default=S)
    p.add_argument("--kappa", type=float, default=S)
    p.add_argument("--axis", type=int, default=S)
    if with_grid:
        p.add_argument("--grid", default=S, help="log:lo:hi:n, lin:lo:hi:n or r1,r2,...")
        p.add_argument("--direction", default=S, help="comma-separated direction for the radii")


def _process_options(p) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--process", choices=("isotropic", "layered"), default=S)
    p.add_argument("--gamma", type=float, default=S, help="large-jump index of the layered process")
    p.add_argument("--cutoff", type=float, default=S)


def _potential_options(p) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--potential", choices=("hypergeometric", "power", "power_log", "constant"),
                   default=S)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--r0", type=float, default=S)
    p.add_argument("--lam", type=float, default=S)


def _path_options(p) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--dt", type=float, default=S)
    p.add_argument("--horizon", type=float, default=S)
    p.add_argument("--paths", dest="n_paths", type=int, default=S)
    p.add_argument("--rho", type=float, default=S, help="adaptive step fraction (0 = fixed dt)")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="zeroenergy", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_options(sp)
        return sp

    sp = add("eigenpair", "tabulate phi and V for an explicit eigenpair")
    _spec_options(sp)
    sp.add_argument("--classify", action="store_true", default=S,
                    help="require kappa in range and report the decay class")
    sp.add_argument("--p", type=float, default=S, help="also report L^p membership")

    sp = add("residual", "zero-energy residual on a grid")
    _spec_options(sp)
    sp.add_argument("--nodes-per-decade", dest="nodes_per_decade", type=int, default=S)
    sp.add_argument("--angular-nodes", dest="angular_nodes", type=int, default=S)
    sp.add_argument("--inner-radius", dest="inner_radius", type=float, default=S)
    sp.add_argument("--outer-radius", dest="outer_radius", type=float, default=S)
    sp.add_argument("--tail-order", dest="tail_order", type=int, default=S)

    for name, help_ in (("classify", "scenario of a process/potential pair"),
                        ("predict", "predicted decay envelopes")):
        sp = add(name, help_)
        _spec_options(sp, with_grid=False)
        _process_options(sp)
        _potential_options(sp)
        if name == "predict":
            sp.add_argument("--traits", choices=("positive", "antisymmetric", "negative_potential"),
                            default=S)
            sp.add_argument("--p", type=float, default=S)

    sp = add("simulate", "Monte Carlo path functionals")
    sims = sp.add_subparsers(dest="target", required=True)
    for name, help_ in (("exit", "mean exit time (or survival probability with --eta)"),
                        ("fk", "Feynman-Kac functional"),
                        ("lambda", "mean lifetime"),
                        ("exitlaw", "exit-law goodness of fit")):
        t = sims.add_parser(name, help=help_)
        _global_options(t)
        _spec_options(t, with_grid=False)
        _process_options(t)
        _path_options(t)
        t.add_argument("--radius", type=float, default=S)
        if name == "exit":
            t.add_argument("--eta", type=float, default=S)
            t.add_argument("--extrapolate", action="store_true", default=S)
        if name in ("fk", "lambda"):
            _potential_options(t)
            t.add_argument("--x", default=S, help="start point, comma-separated")
        if name == "fk":
            t.add_argument("--center", default=S)
            t.add_argument("--domain", choices=("ball", "complement"), default=S)
            t.add_argument("--payoff", choices=("phi", "one"), default=S)

    sp = add("fit", "fit a decay rate to samples")
    _spec_options(sp)
    sp.add_argument("--input", default=S, help="CSV of (r, value) samples")
    sp.add_argument("--model", choices=("power", "power_log", "stretched"), default=S)
    sp.add_argument("--source", choices=("phi", "V"), default=S,
                    help="without --input, sample this function of the eigenpair")

    sp = add("verify", "run acceptance suites")
    sp.add_argument("--suite", default=S,
                    choices=("residual", "exit", "scenarios", "envelopes", "iterations", "all"))
    sp.add_argument("--family", default=S)
    sp.add_argument("--paths", type=int, default=S, help="paths for the exit-time oracles")
    return parser


COMMANDS = {
    "eigenpair": cmd_eigenpair,
    "residual": cmd_residual,
    "classify": cmd_classify,
    "predict": cmd_predict,
    "fit": cmd_fit,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        logging.basicConfig(level=cfg["run"]["log_level"],
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "eigenpair" and cfg["eigenpair"]["classify"]:
            spec = _spec(cfg)
            if spec.kappa > spec.kappa_max:
                raise ConfigError(f"kappa must lie in ({spec.l}, {spec.kappa_max})")
        if args.command == "simulate":
            header, rows, code, sections = cmd_simulate(cfg, args.target)
        else:
            header, rows, code, sections = COMMANDS[args.command](cfg)
    except (DecayFitError, PoleError, QuadratureError, HypergeometricConvergenceError,
            CensoringError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UnsupportedCombination, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "verify":
        report = header
    else:
        report = {"command": args.command if args.command != "simulate"
                  else f"simulate {args.target}",
                  "config": _relevant(cfg, sections), **header,
                  "metadata": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                               "version": __version__}}
    text = render(report, rows, cfg["run"]["format"])
    out = cfg["run"].get("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
