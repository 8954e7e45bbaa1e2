"""Command-line front end.

Every subcommand reads a :class:`RunConfig` assembled from built-in
defaults, an optional INI file (section ``[run]``, keys named like the
long flags with underscores) and command-line flags, in increasing
precedence. Results go to the output directory as JSON (single results),
CSV (scan tables) and SVG (plots), and one summary line is printed.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import configparser
from dataclasses import asdict, dataclass, field, fields
import json
import math
import os
import sys
from importlib import resources

import jsonschema
from referencing import Registry, Resource

from . import _accel
from . import entropy_functions as ef
from . import matrix_checks as mc
from . import thermo
from .finite_size import ee_estimate, hs_oracle_quadratic, scaling_scan, trace_d
from .quadrature import ConvergenceError, QuadratureSpec
from .regions import half_plane, region_from_tag
from .widom import b_coefficient, b_parseval_quadratic, sigma_series

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
OUTPUT_ENV = "RENYIGAS_OUTPUT_DIR"
SUBCOMMANDS = ("coeff", "sigma", "density", "solve-mu", "scan-finite", "scan-temp",
               "ee", "checks")
COEFF_METHODS = ("pv", "parseval", "oracle")
SUITE_GAMMAS = (0.5, 1.0, 1.5, 2.0, 3.0)


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending key."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _default_output_dir():
    return os.environ.get(OUTPUT_ENV) or "renyigas_out"


@dataclass
class RunConfig:
    """All inputs of one run; serializable and validated by a JSON schema."""

    subcommand: str = "coeff"
    d: int = 2
    symbol: str = "gaussian"
    region: str = "ball:1"
    f: str = None
    gamma: list = field(default_factory=lambda: [1.0])
    method: str = "auto"
    hamiltonian: str = "quadratic"
    alpha: list = field(default_factory=lambda: [4.0])
    T: list = field(default_factory=lambda: [1.0])
    rho: float = None
    mu: float = 0.0
    level: float = None
    mode: str = "fixed_mu"
    tol: float = 1e-8
    pv_cutoff: float = 0.02
    nodes_t: int = 8
    nodes_x: int = 64
    nodes_perp: int = 32
    spacing: float = None
    output_dir: str = field(default_factory=_default_output_dir)
    seed: int = 0
    threads: int = 1
    trials: int = 1000
    n: int = 8
    budget: int = 100_000
    plot: bool = True

    def to_dict(self):
        return asdict(self)

    @property
    def quad(self):
        return QuadratureSpec(pv_cutoff=self.pv_cutoff, nodes_t=self.nodes_t,
                              nodes_x=self.nodes_x, nodes_perp=self.nodes_perp,
                              tolerance=min(self.tol, 1e-8))


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt(conv):
    def parse(text):
        return None if str(text).strip().lower() in ("", "none", "null") else conv(text)
    return parse


FIELD_TYPES = {
    "d": int, "symbol": str, "region": str, "f": _opt(str), "gamma": _floats,
    "method": str, "hamiltonian": str, "alpha": _floats, "T": _floats,
    "rho": _opt(float), "mu": float, "level": _opt(float), "mode": str, "tol": float,
    "pv_cutoff": float, "nodes_t": int, "nodes_x": int, "nodes_perp": int,
    "spacing": _opt(float), "output_dir": str, "seed": int, "threads": int,
    "trials": int, "n": int, "budget": int, "plot": _bool,
}

HELP = {
    "d": "dimension, 2 or 3",
    "symbol": "symbol tag, e.g. gaussian, boltzmann-quadratic, fermi-quadratic:T=1:mu=0",
    "region": "region tag: ball:R, box:Lx,Ly, annulus:Rin:Rout, half_plane",
    "f": "test function tag, e.g. quadratic, linear, renyi:0.5 (default eta_gamma)",
    "gamma": "comma-separated Renyi indices",
    "method": "coeff: pv, parseval, oracle, all; traces: auto, pixel, sector",
    "hamiltonian": "quadratic, quartic, perturbed or anisotropic:w1,w2",
    "alpha": "comma-separated length scales",
    "T": "comma-separated temperatures",
    "rho": "particle density (solve-mu, fixed_rho scans)",
    "mu": "chemical potential",
    "level": "energy level for the integrated density of states (default mu)",
    "mode": "scan-temp mode: fixed_mu or fixed_rho",
    "tol": "target tolerance",
    "pv_cutoff": "principal value cutoff",
    "nodes_t": "Gauss points per shift panel",
    "nodes_x": "Gauss points per line",
    "nodes_perp": "Gauss points per transverse axis",
    "spacing": "lattice spacing of the pixel discretization",
    "output_dir": f"output directory (default ${OUTPUT_ENV} or ./renyigas_out)",
    "seed": "random seed",
    "threads": "worker threads",
    "trials": "random trials per matrix check",
    "n": "matrix dimension for the checks (at most 16)",
    "budget": "trial budget of the midpoint concavity search",
}


# ------------------------------------------------------------- schemas

def _schema(name):
    text = resources.files("renyigas").joinpath("schemas", name).read_text()
    return json.loads(text)


def _registry():
    reg = Registry()
    for name in ("config.schema.json", "output.schema.json"):
        s = _schema(name)
        reg = reg.with_resource(s["$id"], Resource.from_contents(s))
    return reg


def _validator(name):
    s = _schema(name)
    cls = jsonschema.validators.validator_for(s)
    return cls(s, registry=_registry())


def validate_config(data):
    """Raise :class:`ConfigError` with the JSON path of the first violation."""
    v = _validator("config.schema.json")
    errors = sorted(v.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.json_path, e.message)


def validate_output(data):
    _validator("output.schema.json").validate(data)


def load_output(path):
    """Read an emitted JSON file and check it against the output schema."""
    with open(path) as fh:
        data = json.load(fh)
    validate_output(data)
    return data


# -------------------------------------------------------------- config

def read_config_file(path):
    """Key-value pairs of the ``[run]`` section, coerced to their types."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError("$", f"cannot read config file {path}: {exc}") from None
    if not cp.has_section("run"):
        raise ConfigError("$", "config file needs a [run] section")
    out = {}
    for key, text in cp.items("run"):
        if key not in FIELD_TYPES:
            raise ConfigError(f"$.{key}", "unknown key")
        try:
            out[key] = FIELD_TYPES[key](text)
        except ValueError as exc:
            raise ConfigError(f"$.{key}", str(exc)) from None
    return out


def build_config(subcommand, file_values=None, flag_values=None):
    """Defaults, then file values, then flags; validated against the schema."""
    data = RunConfig().to_dict()
    data.update(file_values or {})
    data.update(flag_values or {})
    data["subcommand"] = subcommand
    validate_config(data)
    return RunConfig(**data)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with a [run] section")
    for f in fields(RunConfig):
        if f.name in ("subcommand", "plot"):
            continue
        common.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name,
                            type=FIELD_TYPES[f.name], default=argparse.SUPPRESS,
                            help=HELP.get(f.name))
    common.add_argument("--plot", dest="plot", action=argparse.BooleanOptionalAction,
                        default=argparse.SUPPRESS, help="write SVG plots for scans")
    p = argparse.ArgumentParser(prog="renyigas", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return p


# ------------------------------------------------------------- helpers

def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _scalar(quantity, value, **params):
    return {"quantity": quantity, "value": _clean(float(value)),
            "parameters": {k: _clean(v) for k, v in params.items()}}


def _write_json(cfg, name, records):
    data = {"command": cfg.subcommand, "config": cfg.to_dict(), "results": records}
    validate_output(data)
    path = os.path.join(cfg.output_dir, name)
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def _write_scan(cfg, stem, report):
    paths = []
    path = os.path.join(cfg.output_dir, stem + ".csv")
    with open(path, "w", newline="") as fh:
        report.to_csv(fh)
    paths.append(path)
    if cfg.plot:
        svg = os.path.join(cfg.output_dir, stem + ".svg")
        emit_plot(report, svg)
        paths.append(svg)
    return paths


def emit_plot(report, path):
    """SVG of normalized traces against the inverse scale, with target lines."""
    report.plot_svg(path)
    return path


def _objects(cfg, symbol=True, region=True):
    """Parse tags; a bad tag is a configuration error."""
    out = {}
    try:
        if symbol:
            out["a"] = thermo.symbol_from_tag(cfg.symbol, cfg.d)
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError("$.symbol", str(exc)) from None
    try:
        if region:
            out["region"] = region_from_tag(cfg.region, cfg.d)
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError("$.region", str(exc)) from None
    if cfg.f is not None:
        try:
            out["f"] = ef.from_tag(cfg.f)
        except ValueError as exc:
            raise ConfigError("$.f", str(exc)) from None
    return out


def _hamiltonian(cfg):
    try:
        return thermo.hamiltonian_from_tag(cfg.hamiltonian, cfg.d)
    except (ValueError, IndexError) as exc:
        raise ConfigError("$.hamiltonian", str(exc)) from None


def _trace_method(cfg):
    if cfg.method in COEFF_METHODS + ("all",):
        raise ConfigError("$.method", f"{cfg.method!r} is not a trace method")
    return cfg.method


# ------------------------------------------------------------ commands

def cmd_coeff(cfg):
    obj = _objects(cfg)
    a, region = obj["a"], obj["region"]
    f = obj.get("f") or ef.renyi(cfg.gamma[0])
    method = "pv" if cfg.method == "auto" else cfg.method
    if method in ("pixel", "sector"):
        raise ConfigError("$.method", f"{method!r} is not a coefficient method")
    wanted = list(COEFF_METHODS) if method == "all" else [method]
    c = f.quadratic_coefficient
    tags = (a.tag, region.tag, f.tag)
    recs = []
    skipped = []
    for m in wanted:
        if m == "pv":
            recs.append(b_coefficient(a, region, f, cfg.quad).to_record(*tags))
        elif c is None or (m == "oracle" and not a.radial):
            if method != "all":
                raise ConfigError("$.method", f"{m} needs a quadratic test function"
                                  + (" and a radial symbol" if m == "oracle" else ""))
            skipped.append(m)
        elif m == "parseval":
            recs.append(b_parseval_quadratic(a, region, c, cfg.quad).to_record(*tags))
        else:
            if c == 0.0:
                val = 0.0
            else:
                hp = half_plane(tuple([1.0] + [0.0] * (cfg.d - 1)))
                val = c * hs_oracle_quadratic(a, hp, 1.0) * region.boundary_measure
            recs.append({"value": float(val), "error_estimate": 1e-3 * abs(val),
                         "method": "hs_oracle", "symbol_tag": tags[0],
                         "region_tag": tags[1], "f_tag": tags[2]})
    path = _write_json(cfg, "coeff.json", recs)
    vals = [r["value"] for r in recs]
    spread = max(vals) - min(vals)
    parts = " ".join(f"{r['method']}={r['value']:.10g}" for r in recs)
    note = f" skipped={','.join(skipped)}" if skipped else ""
    return [path], f"coeff {f.tag} {parts} spread={spread:.2g}{note}"


def cmd_sigma(cfg):
    tol = min(cfg.tol, 1e-5)
    val = sigma_series(cfg.d, tol)
    path = _write_json(cfg, "sigma.json", [_scalar("sigma", val, d=cfg.d, tol=tol)])
    return [path], f"sigma d={cfg.d} value={val:.8f} tol={tol:g}"


def cmd_density(cfg):
    h = _hamiltonian(cfg)
    recs = []
    level = cfg.mu if cfg.level is None else cfg.level
    for T in cfg.T:
        recs.append(_scalar("rho", thermo.particle_density(h, T, cfg.mu, cfg.quad), T=T, mu=cfg.mu))
        for g in cfg.gamma:
            s = thermo.entropy_density(h, T, cfg.mu, g, cfg.quad)
            recs.append(_scalar("s_gamma", s, T=T, mu=cfg.mu, gamma=g))
    recs.append(_scalar("integrated_dos", thermo.integrated_dos(h, level), level=level))
    path = _write_json(cfg, "density.json", recs)
    first = recs[0]["value"]
    return [path], (f"density {cfg.hamiltonian} T={cfg.T[0]:g} mu={cfg.mu:g} "
                    f"rho={first:.10g} N={recs[-1]['value']:.10g}")


def cmd_solve_mu(cfg):
    if cfg.rho is None:
        raise ConfigError("$.rho", "solve-mu needs a density")
    h = _hamiltonian(cfg)
    recs = []
    for T in cfg.T:
        mu = thermo.solve_mu(h, T, cfg.rho, tol=cfg.tol)
        res = abs(thermo.particle_density(h, T, mu) - cfg.rho)
        fug = thermo.fugacity_diagnostic(h, T, cfg.rho, mu)
        recs.append(_scalar("mu", mu, T=T, rho=cfg.rho, residual=res, fugacity=fug))
    path = _write_json(cfg, "solve_mu.json", recs)
    return [path], "solve-mu " + " ".join(f"T={r['parameters']['T']:g}:mu={r['value']:.12g}"
                                          for r in recs)


def cmd_scan_finite(cfg):
    obj = _objects(cfg)
    report = scaling_scan("fixed_symbol", obj["region"], cfg.alpha, symbol=obj["a"],
                          f=obj.get("f"), gammas=cfg.gamma, method=_trace_method(cfg),
                          spacing=cfg.spacing, quad=cfg.quad)
    paths = _write_scan(cfg, "scan_finite", report)
    last = report.rows[-1]
    return paths, (f"scan-finite rows={len(report.rows)} last normalized={last['normalized']:.6g} "
                   f"target={last['target']:.6g} deviation={last['deviation']:.3g}")


def cmd_scan_temp(cfg):
    obj = _objects(cfg, symbol=False)
    h = _hamiltonian(cfg)
    if cfg.mode == "fixed_rho" and cfg.rho is None:
        raise ConfigError("$.rho", "fixed_rho needs a density")
    report = scaling_scan(cfg.mode, obj["region"], cfg.alpha, cfg.T, h=h, gammas=cfg.gamma,
                          rho=cfg.rho, mu=cfg.mu, method=_trace_method(cfg),
                          spacing=cfg.spacing, quad=cfg.quad)
    paths = _write_scan(cfg, "scan_temp", report)
    last = report.rows[-1]
    return paths, (f"scan-temp {cfg.mode} rows={len(report.rows)} "
                   f"last deviation={last['deviation']:.3g}")


def cmd_ee(cfg):
    obj = _objects(cfg)
    recs = []
    for alpha in cfg.alpha:
        for g in cfg.gamma:
            est = ee_estimate(obj["a"], obj["region"], alpha, g, spacing=cfg.spacing,
                              method=_trace_method(cfg), quad=cfg.quad)
            recs.append(_scalar("H_gamma", est.value, alpha=alpha, gamma=g, inside=est.inside,
                                outside=est.outside, margin=est.margin,
                                relative_change=est.relative_change))
    path = _write_json(cfg, "ee.json", recs)
    return [path], "ee " + " ".join(
        f"alpha={r['parameters']['alpha']:g}:gamma={r['parameters']['gamma']:g}:H={r['value']:.8g}"
        for r in recs)


def cmd_checks(cfg):
    spec = mc.RandomEnsembleSpec(cfg.n, cfg.trials, cfg.seed)
    recs = mc.run_suite(spec, budget=cfg.budget, threads=cfg.threads)
    for g in SUITE_GAMMAS:
        cls = ef.concavity_classify(g)
        recs.append({"check": "concavity_classify", "gamma": g, "trials": 0,
                     "worst_margin": None, "passed": cls == ("concave" if g <= 2 else "neither"),
                     "status": cls})
    obj = _objects(cfg)
    tr = trace_d(obj["a"], obj["region"], cfg.alpha[0], ef.renyi(1.5), quad=cfg.quad)
    recs.append({"check": "trace_sign", "gamma": 1.5, "trials": 1, "worst_margin": tr.value,
                 "passed": True, "note": "empirical sign only, no inequality asserted"})
    path = _write_json(cfg, "checks.json", recs)
    failed = [r for r in recs if not r["passed"]]
    summary = f"checks {len(recs) - len(failed)}/{len(recs)} passed"
    if failed:
        detail = "; ".join(f"{r['check']} gamma={r['gamma']:g} margin={r['worst_margin']}"
                           for r in failed)
        raise ChecksFailed(summary + ": " + detail, [path])
    return [path], summary


class ChecksFailed(RuntimeError):
    def __init__(self, message, artifacts):
        super().__init__(message)
        self.artifacts = artifacts


COMMANDS = {
    "coeff": cmd_coeff, "sigma": cmd_sigma, "density": cmd_density,
    "solve-mu": cmd_solve_mu, "scan-finite": cmd_scan_finite,
    "scan-temp": cmd_scan_temp, "ee": cmd_ee, "checks": cmd_checks,
}


@dataclass
class RunResult:
    status: int
    artifacts: list
    summary: str


def run(cfg):
    """Execute one configured run.

    Returns
    -------
    RunResult
        Exit status, written files and the summary line. Configuration
        errors give status 2, numerical failures status 3.
    """
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
    except OSError as exc:
        return RunResult(EXIT_CONFIG, [], f"config error at $.output_dir: {exc}")
    _accel.set_threads(cfg.threads)
    try:
        artifacts, summary = COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        return RunResult(EXIT_CONFIG, [], f"config error at {exc}")
    except ChecksFailed as exc:
        return RunResult(EXIT_NUMERICAL, exc.artifacts, f"numerical failure: {exc}")
    except ConvergenceError as exc:
        hist = f" history={exc.history[-3:]}" if exc.history else ""
        return RunResult(EXIT_NUMERICAL, [],
                         f"numerical failure: {exc} (residual={exc.residual:.3g}){hist}")
    except (ValueError, ArithmeticError) as exc:
        return RunResult(EXIT_NUMERICAL, [], f"numerical failure: {exc}")
    except OSError as exc:
        return RunResult(EXIT_CONFIG, [], f"config error at $.output_dir: {exc}")
    return RunResult(EXIT_OK, artifacts, summary)


def main(argv=None):
    args = vars(_parser().parse_args(argv))
    sub = args.pop("subcommand")
    path = args.pop("config", None)
    try:
        file_values = read_config_file(path) if path else {}
        cfg = build_config(sub, file_values, args)
    except ConfigError as exc:
        print(f"config error at {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = run(cfg)
    print(res.summary, file=sys.stdout if res.status == EXIT_OK else sys.stderr)
    return res.status


if __name__ == "__main__":
    sys.exit(main())
