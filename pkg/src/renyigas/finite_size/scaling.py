"""Scaling scans in alpha and temperature with normalized traces."""
from dataclasses import dataclass, field
import csv
import io
import json

import numpy as np

from .. import entropy_functions as ef
from .. import thermo
from ..quadrature import QuadratureSpec
from ..widom import b_coefficient
from . import sector
from .operator import build_w, trace_d, _auto_method, NODE_CAP

MODES = ("fixed_symbol", "fixed_mu", "fixed_rho")
COLUMNS = ("alpha", "T", "mode", "gamma", "raw_trace", "normalization",
           "normalized", "target", "deviation")


@dataclass
class ScalingReport:
    """Rows of a scan; ``deviation`` is relative to the target."""

    mode: str
    rows: list = field(default_factory=list)

    def column(self, name, gamma=None):
        rows = self.rows if gamma is None else [r for r in self.rows if r["gamma"] == gamma]
        return np.array([r[name] for r in rows], dtype=float)

    def to_csv(self, stream=None):
        out = stream or io.StringIO()
        w = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r[k] for k in COLUMNS})
        return out.getvalue() if stream is None else None

    def to_json(self):
        return json.dumps({"mode": self.mode, "rows": [{k: r[k] for k in COLUMNS}
                                                       for r in self.rows]},
                          sort_keys=True, indent=1)

    def plot_svg(self, path):
        """Normalized value against 1/(alpha T**(1/2m)) with the target line."""
        from ..plotting import convergence_plot
        convergence_plot(self, path)


def _pairs(alpha_list, T_list):
    alpha_list = list(alpha_list)
    T_list = list(T_list)
    if len(alpha_list) == 1:
        alpha_list = alpha_list * len(T_list)
    if len(T_list) == 1:
        T_list = T_list * len(alpha_list)
    if len(alpha_list) != len(T_list):
        raise ValueError("alpha_list and T_list must have equal length or length 1")
    return list(zip(alpha_list, T_list))


def _traces(b, region, L, fs, method, spacing, quad):
    """trace_d for several test functions sharing one spectrum."""
    if method == "auto":
        method = _auto_method(b, region, L, spacing, NODE_CAP)
    if method == "sector":
        sp = sector.sector_spectrum(b, region, L,
                                    hoelder=min(f.hoelder_exponent for f in fs))
        return [trace_d(b, region, L, f, spectrum=sp, quad=quad) for f in fs]
    W = build_w(b, region, L, spacing)
    return [trace_d(b, region, L, f, operator=W, quad=quad) for f in fs]


def _deviation(value, target):
    if target == 0.0:
        return abs(value)
    return abs(value - target) / abs(target)


def scaling_scan(mode, region, alpha_list, T_list=(1.0,), h=None, gammas=(1.0,),
                 rho=None, mu=0.0, symbol=None, f=None, method="auto",
                 spacing=None, quad=None):
    """Trace defects along an (alpha, T) path, normalized by the predicted growth.

    Parameters
    ----------
    mode : {"fixed_symbol", "fixed_mu", "fixed_rho"}
        fixed_symbol: ``symbol`` and ``f`` fixed; trace / alpha**(d-1)
        against B(symbol; f). fixed_mu: Fermi symbol of ``h`` at chemical
        potential ``mu``; trace / (alpha T**(1/2m))**(d-1) against
        B(limit Fermi; eta_gamma). fixed_rho: mu solved per T from the
        density ``rho``; trace / ((alpha T**(1/2m))**(d-1) lambda_T**delta)
        against B(exp(-h_inf); eta_eff).
    alpha_list, T_list : sequences
        Zipped; a length-one list is broadcast, so alpha may stay fixed
        while T grows.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    quad = quad or QuadratureSpec()
    d = region.dimension
    report = ScalingReport(mode)
    if mode == "fixed_symbol":
        if symbol is None:
            raise ValueError("fixed_symbol needs a symbol")
        fs = [f] if f is not None else [ef.renyi(g) for g in gammas]
        tags = [f.tag] if f is not None else list(gammas)
        targets = [b_coefficient(symbol, region, fk, quad).value for fk in fs]
        for alpha in alpha_list:
            trs = _traces(symbol, region, float(alpha), fs, method, spacing, quad)
            norm = float(alpha) ** (d - 1)
            for tag, tr, tgt in zip(tags, trs, targets):
                val = tr.value / norm
                report.rows.append(dict(alpha=float(alpha), T=float("nan"), mode=mode,
                                        scale=float(alpha),
                                        gamma=tag, raw_trace=tr.value, normalization=norm,
                                        normalized=val, target=tgt,
                                        deviation=_deviation(val, tgt)))
        return report

    if h is None:
        raise ValueError(f"{mode} needs a Hamiltonian")
    m = h.degree_half
    h_inf = h.limit_part
    gammas = list(gammas)
    if mode == "fixed_mu":
        fs = [ef.renyi(g) for g in gammas]
        ref = thermo.limit_fermi(h_inf)
        targets = [b_coefficient(ref, region, fk, quad).value for fk in fs]
    else:
        if rho is None:
            raise ValueError("fixed_rho needs a density")
        fs = [ef.linear_shifted(g) for g in gammas]
        ref = thermo.boltzmann(h_inf)
        targets = [b_coefficient(ref, region, ef.effective(g), quad).value for g in gammas]
    for alpha, T in _pairs(alpha_list, T_list):
        T = float(T)
        L = float(alpha) * T ** (1.0 / (2.0 * m))
        if mode == "fixed_mu":
            mu_T = float(mu)
        else:
            mu_T = thermo.solve_mu(h, T, rho)
        b = thermo.rescaled_fermi(h, T, mu_T)
        trs = _traces(b, region, L, fs, method, spacing, quad)
        for g, tr, tgt in zip(gammas, trs, targets):
            norm = L ** (d - 1)
            if mode == "fixed_rho":
                norm *= thermo.lambda_T(rho, T, h_inf) ** ef.delta_gamma(g)
            val = tr.value / norm
            report.rows.append(dict(alpha=float(alpha), T=T, mode=mode, gamma=g, scale=L,
                                    raw_trace=tr.value, normalization=norm,
                                    normalized=val, target=tgt,
                                    deviation=_deviation(val, tgt)))
    return report


def fit_slope(x, y):
    """Least-squares slope of log|y| against log x."""
    return float(np.polyfit(np.log(np.asarray(x, float)),
                            np.log(np.abs(np.asarray(y, float))), 1)[0])
