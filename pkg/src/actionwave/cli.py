"""Command line front end: one experiment per invocation, delimited data out.

Every run writes either a JSON report (schema field inside) or a CSV
table whose column order is versioned in a leading comment line. Wall
time goes to stderr only, so identical invocations produce identical
files. Exit codes: 0 success, 1 config problem, 2 numerical failure,
3 violated invariant. A figure is rendered only when --figure is passed;
the data files never depend on it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .bohm_compare import (
    MOMENTUM_LABELS,
    bohm_velocity,
    make_box,
    quantum_potential,
    sample_box_momenta,
)
from .core import TWO_PI
from .correlations import (
    SINGLET_CELLS,
    PairSourceConfig,
    SingletConfig,
    chsh_statistic,
    lhv_baseline_correlation,
    simulate_chsh,
    simulate_pair,
    simulate_singlet,
    singlet_correlation,
    singlet_joint_probabilities,
    source_averaged_visibility,
    visibility_with_mixing,
)
from .dirac_form import (
    WELL_LABELS,
    DiracFormConfig,
    build_hamiltonian,
    component_ratio_fit,
    simulate_tunneling,
    spectrum,
    split_energy,
    tunneling_evolution,
    verify_clifford,
)
from .event_engine import BranchSet, NonUnitaryError, Pipeline, born_convergence
from .interferometry import (
    SQ2,
    X_LABELS,
    MzConfig,
    SgConfig,
    mz_exit_probability,
    sg_transition_probability,
    simulate_mz,
    simulate_sg,
)
from .neutrino import (
    FLAVOR_LABELS,
    NeutrinoConfig,
    appearance_probability,
    simulate_neutrinos,
    survival_probability,
)
from .schrodinger import (
    Grid1D,
    evolve,
    free_gaussian_width,
    free_potential,
    gaussian_packet,
    harmonic_potential,
    madelung_decompose,
    packet_moments,
    stable_dt,
    term_decomposition_residual,
)

SCHEMA_REPORT = "actionwave-report/1"
SCHEMA_SCAN = "actionwave-scan/1"
SCHEMA_TABLE = "actionwave-table/1"


class ConfigError(Exception):
    """Bad flags, bad config file, or parameter values out of range."""


class InvariantError(RuntimeError):
    """An exact structural check failed on otherwise finite numbers."""


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".actionwave-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _csv_text(schema: str, columns: list[str], rows: list[list], comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# {schema} columns: {','.join(columns)}\n")
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------- config file


def _load_config_file(path: str) -> dict[str, tuple[str, int]]:
    """Parse 'key = value' lines; '#' starts a comment; blanks skipped.

    All problems are collected and reported together, each with its line
    number, so one pass over the message fixes the file.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    entries: dict[str, tuple[str, int]] = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            problems.append(f"line {lineno}: empty key")
            continue
        if not value:
            problems.append(f"line {lineno}: no value for {key!r}")
            continue
        if key in entries:
            problems.append(
                f"line {lineno}: duplicate key {key!r} (first set on line {entries[key][1]})"
            )
            continue
        entries[key] = (value, lineno)
    if problems:
        raise ConfigError(f"in {path}:\n  " + "\n  ".join(problems))
    return entries


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p.strip()) for p in text.split(",") if p.strip())


# ------------------------------------------------------------ invariants


def _inv(name: str, residual: float, tolerance: float, hard: bool = True) -> dict:
    return {
        "name": name,
        "residual": float(residual),
        "tolerance": float(tolerance),
        "passed": bool(residual <= tolerance),
        "hard": hard,
    }


def _event_invariants(probs: dict[str, float], stats) -> list[dict]:
    psum = abs(sum(probs.values()) - 1.0)
    fsum = abs(float(np.sum(stats.frequencies)) - 1.0)
    worst = 0.0
    for lab in stats.labels:
        pa = probs[lab]
        f = stats.frequency(lab)
        se = math.sqrt(pa * (1.0 - pa) / stats.total)
        if se == 0.0:
            sigma = 0.0 if f == pa else math.inf
        else:
            sigma = abs(f - pa) / se
        worst = max(worst, sigma)
    return [
        _inv("probability_sum", psum, 1e-12),
        _inv("frequency_sum", fsum, 1e-9),
        _inv("born_deviation_sigma", worst, 5.0, hard=False),
    ]


def _enforce(invariants: list[dict]) -> None:
    failed = [
        f"{i['name']} (residual {_fmt(i['residual'])} > {_fmt(i['tolerance'])})"
        for i in invariants
        if i["hard"] and not i["passed"]
    ]
    if failed:
        raise InvariantError("; ".join(failed))


def _freq_block(stats) -> dict:
    return {
        "labels": list(stats.labels),
        "frequencies": [float(f) for f in stats.frequencies],
        "std_errors": [float(s) for s in stats.std_errors],
        "N": stats.total,
    }


# ------------------------------------------------------- single-run paths
# Each runner returns {"config", "analytic", "empirical", "invariants",
# "table": (columns, rows, comments), "figure": plot-description dict}.


def _run_sg(p: dict, events: int, seed: int) -> dict:
    cfg = SgConfig(mu_B=p["mu_B"], t=p["t"], input_state=p["input_state"])
    stats = simulate_sg(cfg, events, seed)
    p_flip = sg_transition_probability(cfg)
    flipped = X_LABELS[1] if cfg.input_state == X_LABELS[0] else X_LABELS[0]
    probs = {lab: (p_flip if lab == flipped else 1.0 - p_flip) for lab in stats.labels}
    labels = list(stats.labels)
    table_rows = [
        [lab, probs[lab], stats.frequency(lab), float(stats.std_errors[i])]
        for i, lab in enumerate(labels)
    ]
    return {
        "config": {"mu_B": cfg.mu_B, "t": cfg.t, "input_state": cfg.input_state},
        "analytic": {
            "precession_phase": float(cfg.precession_phase),
            "p_flip": float(p_flip),
            "probabilities": probs,
        },
        "empirical": _freq_block(stats),
        "invariants": _event_invariants(probs, stats),
        "table": (["label", "p_analytic", "p_empirical", "std_err"], table_rows, []),
        "figure": {
            "kind": "frequency",
            "labels": labels,
            "analytic": [probs[lab] for lab in labels],
            "empirical": [stats.frequency(lab) for lab in labels],
            "std_err": [float(s) for s in stats.std_errors],
            "title": f"sg, phase={cfg.precession_phase:.4g}",
        },
    }


def _mz_config(p: dict) -> MzConfig:
    r = p["r"]
    if not 0.0 < r < 1.0:
        raise ConfigError(f"splitter reflectivity r must lie in (0, 1), got {r}")
    return MzConfig(phi1=p["phi1"], phi2=p["phi2"], splitter_ratio=(r, math.sqrt(1.0 - r * r)))


def _run_mz(p: dict, events: int, seed: int) -> dict:
    cfg = _mz_config(p)
    stats = simulate_mz(cfg, events, seed)
    p1, p2 = mz_exit_probability(cfg)
    probs = {"port1": float(p1), "port2": float(p2)}
    labels = list(stats.labels)
    table_rows = [
        [lab, probs[lab], stats.frequency(lab), float(stats.std_errors[i])]
        for i, lab in enumerate(labels)
    ]
    return {
        "config": {"phi1": cfg.phi1, "phi2": cfg.phi2, "r": cfg.splitter_ratio[0]},
        "analytic": {"phase": float(cfg.phi1 - cfg.phi2), "probabilities": probs},
        "empirical": _freq_block(stats),
        "invariants": _event_invariants(probs, stats),
        "table": (["label", "p_analytic", "p_empirical", "std_err"], table_rows, []),
        "figure": {
            "kind": "frequency",
            "labels": labels,
            "analytic": [probs[lab] for lab in labels],
            "empirical": [stats.frequency(lab) for lab in labels],
            "std_err": [float(s) for s in stats.std_errors],
            "title": f"mz, dphi={cfg.phi1 - cfg.phi2:.4g}",
        },
    }


def _run_singlet(p: dict, events: int, seed: int) -> dict:
    cfg = SingletConfig(theta1=p["theta1"], theta2=p["theta2"], delta_s=p["delta_s"])
    run = simulate_singlet(cfg, events, seed)
    p_opp, p_same = singlet_joint_probabilities(cfg)
    cell_probs = {
        SINGLET_CELLS[0]: 0.5 * p_opp,
        SINGLET_CELLS[1]: 0.5 * p_opp,
        SINGLET_CELLS[2]: 0.5 * p_same,
        SINGLET_CELLS[3]: 0.5 * p_same,
    }
    c_ana = float(singlet_correlation(cfg))
    freqs = run.frequencies
    m_se = math.sqrt(0.25 / run.total)
    ns_sigma = max(abs(run.marginal1_plus - 0.5), abs(run.marginal2_plus - 0.5)) / m_se
    worst = 0.0
    for i, cell in enumerate(SINGLET_CELLS):
        pa = cell_probs[cell]
        se = math.sqrt(pa * (1.0 - pa) / run.total)
        if se == 0.0:
            sigma = 0.0 if freqs[i] == pa else math.inf
        else:
            sigma = abs(freqs[i] - pa) / se
        worst = max(worst, sigma)
    invariants = [
        _inv("probability_sum", abs(sum(cell_probs.values()) - 1.0), 1e-12),
        _inv("frequency_sum", abs(float(freqs.sum()) - 1.0), 1e-9),
        _inv("born_deviation_sigma", worst, 5.0, hard=False),
        _inv("no_signaling_sigma", ns_sigma, 5.0, hard=False),
    ]
    table_rows = [
        [cell, cell_probs[cell], float(freqs[i]), math.sqrt(float(freqs[i] * (1 - freqs[i])) / run.total)]
        for i, cell in enumerate(SINGLET_CELLS)
    ]
    comments = [
        f"C_analytic={_fmt(c_ana)}",
        f"C_empirical={_fmt(run.correlation)}",
        f"C_std_err={_fmt(run.correlation_std_err)}",
    ]
    return {
        "config": {"theta1": cfg.theta1, "theta2": cfg.theta2, "delta_s": cfg.delta_s},
        "analytic": {
            "correlation": c_ana,
            "p_opposite": float(p_opp),
            "cell_probabilities": cell_probs,
        },
        "empirical": {
            "cells": list(SINGLET_CELLS),
            "frequencies": [float(f) for f in freqs],
            "correlation": run.correlation,
            "correlation_std_err": run.correlation_std_err,
            "opposite_fraction": run.opposite_fraction,
            "marginal1_plus": run.marginal1_plus,
            "marginal2_plus": run.marginal2_plus,
            "N": run.total,
        },
        "invariants": invariants,
        "table": (["cell", "p_analytic", "p_empirical", "std_err"], table_rows, comments),
        "figure": {
            "kind": "frequency",
            "labels": list(SINGLET_CELLS),
            "analytic": [cell_probs[c] for c in SINGLET_CELLS],
            "empirical": [float(f) for f in freqs],
            "std_err": [math.sqrt(float(f * (1 - f)) / run.total) for f in freqs],
            "title": f"singlet, dtheta={cfg.theta1 - cfg.theta2:.4g}",
        },
    }


_CHSH_PAIR_NAMES = ("(a,b)", "(a,b')", "(a',b)", "(a',b')")


def _run_chsh(p: dict, events: int, seed: int) -> dict:
    ds = p["delta_s"]

    def c_quantum(t1: float, t2: float) -> float:
        return float(singlet_correlation(SingletConfig(theta1=t1, theta2=t2, delta_s=ds)))

    def c_lhv(t1: float, t2: float) -> float:
        return lhv_baseline_correlation(t1, t2, SingletConfig(theta1=t1, theta2=t2, delta_s=ds))

    angles = (p["a"], p["a_prime"], p["b"], p["b_prime"])
    run = simulate_chsh(*angles, events, seed, delta_s=ds)
    s_ana = chsh_statistic(*angles, c_quantum)
    s_lhv = chsh_statistic(*angles, c_lhv)
    c_anas = [c_quantum(t1, t2) for t1, t2 in run.settings]
    sigma = (
        abs(run.statistic - s_ana) / run.statistic_std_err
        if run.statistic_std_err > 0
        else 0.0
    )
    invariants = [
        _inv("quantum_bound", max(0.0, s_ana - 2.0 * math.sqrt(2.0)), 1e-9),
        _inv("statistic_deviation_sigma", sigma, 5.0, hard=False),
    ]
    table_rows = [
        [
            _CHSH_PAIR_NAMES[i],
            run.settings[i][0],
            run.settings[i][1],
            c_anas[i],
            run.correlations[i],
            run.std_errors[i],
            run.n_per_setting[i],
        ]
        for i in range(4)
    ]
    comments = [
        f"S_analytic={_fmt(s_ana)}",
        f"S_empirical={_fmt(run.statistic)}",
        f"S_std_err={_fmt(run.statistic_std_err)}",
        f"S_lhv_baseline={_fmt(s_lhv)}",
    ]
    return {
        "config": {
            "a": p["a"],
            "a_prime": p["a_prime"],
            "b": p["b"],
            "b_prime": p["b_prime"],
            "delta_s": ds,
        },
        "analytic": {
            "S": float(s_ana),
            "S_lhv_baseline": float(s_lhv),
            "correlations": c_anas,
        },
        "empirical": {
            "settings": [list(s) for s in run.settings],
            "correlations": list(run.correlations),
            "std_errors": list(run.std_errors),
            "n_per_setting": list(run.n_per_setting),
            "S": run.statistic,
            "S_std_err": run.statistic_std_err,
        },
        "invariants": invariants,
        "table": (
            ["pair", "angle1", "angle2", "C_analytic", "C_empirical", "std_err", "N"],
            table_rows,
            comments,
        ),
        "figure": {
            "kind": "frequency",
            "labels": list(_CHSH_PAIR_NAMES),
            "analytic": c_anas,
            "empirical": list(run.correlations),
            "std_err": list(run.std_errors),
            "title": f"chsh, S={run.statistic:.4f}",
        },
    }


def _neutrino_config(p: dict) -> NeutrinoConfig:
    have_dm2 = p["delta_m2"] is not None
    have_e = p["energy"] is not None
    if have_dm2 != have_e:
        raise ConfigError("delta_m2 and energy must be given together")
    if have_dm2:
        return NeutrinoConfig.from_mass_split(p["theta_mix"], p["delta_m2"], p["energy"])
    return NeutrinoConfig(theta_mix=p["theta_mix"], omega1=p["omega1"], omega2=p["omega2"])


def _run_neutrino(p: dict, events: int, seed: int) -> dict:
    cfg = _neutrino_config(p)
    t = p["t"]
    stats = simulate_neutrinos(cfg, t, events, seed)
    p_mu = float(appearance_probability(cfg, t))
    p_e = float(survival_probability(cfg, t))
    probs = {FLAVOR_LABELS[0]: p_e, FLAVOR_LABELS[1]: p_mu}
    labels = list(stats.labels)
    table_rows = [
        [lab, probs[lab], stats.frequency(lab), float(stats.std_errors[i])]
        for i, lab in enumerate(labels)
    ]
    return {
        "config": {
            "theta_mix": cfg.theta_mix,
            "omega1": cfg.omega1,
            "omega2": cfg.omega2,
            "t": t,
        },
        "analytic": {
            "oscillation_phase": float(cfg.oscillation_phase(t)),
            "P_ee": p_e,
            "P_emu": p_mu,
        },
        "empirical": _freq_block(stats),
        "invariants": _event_invariants(probs, stats),
        "table": (["label", "p_analytic", "p_empirical", "std_err"], table_rows, []),
        "figure": {
            "kind": "frequency",
            "labels": labels,
            "analytic": [probs[lab] for lab in labels],
            "empirical": [stats.frequency(lab) for lab in labels],
            "std_err": [float(s) for s in stats.std_errors],
            "title": f"neutrino, phase={cfg.oscillation_phase(t):.4g}",
        },
    }


def _pair_config(p: dict) -> PairSourceConfig:
    return PairSourceConfig(delta_k=p["delta_k"], source_extent=p["source_extent"])


def _run_pair(p: dict, events: int, seed: int) -> dict:
    cfg = _pair_config(p)
    q = p["mixing"]
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"mixing must lie in [0, 1], got {q}")
    run = simulate_pair(cfg, events, seed, mixing=q)
    vis_ana = 1.0 - 0.5 * q
    vis_numeric = visibility_with_mixing(q, cfg)
    singles_ana = source_averaged_visibility(cfg)
    sigma = (
        abs(run.coincidence_visibility - vis_ana) / run.coincidence_visibility_std_err
        if run.coincidence_visibility_std_err > 0
        else 0.0
    )
    invariants = [
        _inv("mixture_law_consistency", abs(vis_ana - vis_numeric), 1e-4),
        _inv("visibility_deviation_sigma", sigma, 5.0, hard=False),
    ]
    table_rows = [
        ["coincidence_visibility", vis_ana, run.coincidence_visibility, run.coincidence_visibility_std_err],
        ["singles_visibility_1", singles_ana, run.singles_visibility_1, float("nan")],
        ["singles_visibility_2", singles_ana, run.singles_visibility_2, float("nan")],
    ]
    return {
        "config": {
            "delta_k": cfg.delta_k,
            "source_extent": cfg.source_extent,
            "mixing": q,
        },
        "analytic": {
            "coincidence_visibility": vis_ana,
            "coincidence_visibility_numeric": vis_numeric,
            "singles_visibility": singles_ana,
            "extent_times_delta_k": cfg.source_extent * cfg.delta_k,
        },
        "empirical": {
            "coincidence_visibility": run.coincidence_visibility,
            "coincidence_visibility_std_err": run.coincidence_visibility_std_err,
            "singles_visibility_1": run.singles_visibility_1,
            "singles_visibility_2": run.singles_visibility_2,
            "N": run.total,
        },
        "invariants": invariants,
        "table": (["quantity", "analytic", "empirical", "std_err"], table_rows, []),
        "figure": {
            "kind": "frequency",
            "labels": ["coincidence", "singles 1", "singles 2"],
            "analytic": [vis_ana, singles_ana, singles_ana],
            "empirical": [
                run.coincidence_visibility,
                run.singles_visibility_1,
                run.singles_visibility_2,
            ],
            "std_err": [run.coincidence_visibility_std_err, 0.0, 0.0],
            "title": f"pair, mixing={q:.3g}",
        },
    }


def _schrodinger_setup(p: dict):
    grid = Grid1D(x_min=p["x_min"], x_max=p["x_max"], n_points=p["n_points"])
    if p["potential"] == "free":
        pot = free_potential(grid)
    elif p["potential"] == "harmonic":
        pot = harmonic_potential(grid, p["omega"])
    else:
        raise ConfigError(
            f"potential must be 'free' or 'harmonic', got {p['potential']!r}"
        )
    w0 = gaussian_packet(grid, x0=p["x0"], sigma0=p["sigma0"], k0=p["k0"])
    dt = p["dt"] if p["dt"] is not None else stable_dt(grid)
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if p["steps"] < 0:
        raise ConfigError(f"steps must be >= 0, got {p['steps']}")
    return grid, pot, w0, dt


def _run_schrodinger(p: dict, events: int, seed: int) -> dict:
    grid, pot, w0, dt = _schrodinger_setup(p)
    steps = p["steps"]
    w1 = evolve(w0, pot, dt, steps)
    total_t = dt * steps
    norm0, norm1 = w0.norm, w1.norm
    drift = abs(norm1 - norm0)
    mean0, var0 = packet_moments(w0)
    mean1, var1 = packet_moments(w1)
    decomp = term_decomposition_residual(w1)
    fields = madelung_decompose(w1)
    analytic = {"total_time": total_t, "dt": dt, "steps": steps}
    invariants = [_inv("norm_drift", drift, 1e-10)]
    if p["potential"] == "free":
        sigma_pred = float(free_gaussian_width(p["sigma0"], total_t))
        sigma_meas = math.sqrt(var1)
        analytic["predicted_width"] = sigma_pred
        invariants.append(
            _inv(
                "dispersion_relative_error",
                abs(sigma_meas - sigma_pred) / sigma_pred,
                1e-3,
                hard=False,
            )
        )
    table_rows = [
        [float(x), float(re), float(im), float(a), float(s)]
        for x, re, im, a, s in zip(
            grid.x, w1.psi.real, w1.psi.imag, fields.amplitude, fields.action
        )
    ]
    return {
        "config": {
            "potential": p["potential"],
            "omega": p["omega"],
            "x_min": grid.x_min,
            "x_max": grid.x_max,
            "n_points": grid.n_points,
            "x0": p["x0"],
            "sigma0": p["sigma0"],
            "k0": p["k0"],
            "dt": dt,
            "steps": steps,
        },
        "analytic": analytic,
        "empirical": {
            "norm_initial": norm0,
            "norm_final": norm1,
            "norm_drift": drift,
            "mean_initial": mean0,
            "mean_final": mean1,
            "width_initial": math.sqrt(var0),
            "width_final": math.sqrt(var1),
            "decomposition_residual_max": decomp.residual_max,
            "decomposition_term_norms": decomp.term_norms,
        },
        "invariants": invariants,
        "table": (["x", "re_psi", "im_psi", "A", "S"], table_rows, []),
        "figure": {
            "kind": "snapshot",
            "x": grid.x,
            "amplitude": fields.amplitude,
            "re_psi": w1.psi.real,
            "action": fields.action,
            "title": f"schrodinger, t={total_t:.4g}",
        },
    }


_RATIO_LADDER = np.linspace(1e-4, 1e-3, 8)


def _run_dirac(p: dict, events: int, seed: int) -> dict:
    cfg = DiracFormConfig(omega=p["omega"], B=(p["bx"], p["by"], p["bz"]), mu0=p["mu0"])
    e_split = float(split_energy(cfg))
    eigs = spectrum(build_hamiltonian(cfg))
    eig_expected = np.array([-e_split, -e_split, e_split, e_split])
    eig_residual = float(np.max(np.abs(eigs - eig_expected)))
    cliff = verify_clifford()
    analytic = {
        "split_energy": e_split,
        "eigenvalues": eig_expected,
        "clifford_residual_expected": 0.0,
    }
    ratio_block = None
    if cfg.omega > 0:
        hbar_omega = cfg.constants.hbar * cfg.omega
        fields = _RATIO_LADDER * hbar_omega / p["mu0"]
        fit = component_ratio_fit(cfg.omega, p["mu0"], fields)
        limit = 1.0 / (2.0 * hbar_omega)
        ratio_block = {
            "fit_slope": float(fit),
            "small_field_limit": limit,
            "relative_error": abs(fit - limit) / limit,
        }
    cfg0 = DiracFormConfig(omega=p["omega"], B=(0.0, 0.0, 0.0), mu0=p["mu0"])
    ts = tunneling_evolution(cfg0, p["t"])
    stats = simulate_tunneling(cfg0, p["t"], events, seed)
    probs = {WELL_LABELS[0]: ts.p_stay, WELL_LABELS[1]: ts.p_swap}
    invariants = [
        _inv("eigenvalue_residual", eig_residual, 1e-12 * max(1.0, e_split)),
        _inv("clifford_residual", cliff, 0.0),
    ] + _event_invariants(probs, stats)
    table_rows = [
        [i, float(eig_expected[i]), float(eigs[i])] for i in range(4)
    ]
    comments = [f"clifford_residual={_fmt(cliff)}"]
    if ratio_block is not None:
        comments.append(f"ratio_fit_slope={_fmt(ratio_block['fit_slope'])}")
    return {
        "config": {
            "omega": cfg.omega,
            "B": list(cfg.B),
            "mu0": cfg.mu0,
            "t": p["t"],
        },
        "analytic": analytic,
        "empirical": {
            "eigenvalues": eigs,
            "eigenvalue_residual": eig_residual,
            "clifford_residual": cliff,
            "component_ratio": ratio_block,
            "tunneling": {
                "p_swap_analytic": ts.p_swap,
                **_freq_block(stats),
            },
        },
        "invariants": invariants,
        "table": (["index", "e_analytic", "e_computed"], table_rows, comments),
        "figure": {
            "kind": "frequency",
            "labels": list(stats.labels),
            "analytic": [probs[lab] for lab in stats.labels],
            "empirical": [stats.frequency(lab) for lab in stats.labels],
            "std_err": [float(s) for s in stats.std_errors],
            "title": f"dirac tunneling, t={p['t']:.4g}",
        },
    }


def _bohm_fields(s, n_points: int, n_eval: int) -> dict:
    xs = np.linspace(-0.999 * s.half_width, 0.999 * s.half_width, n_eval)
    vf = bohm_velocity(s, xs)
    v_max = float(np.max(np.abs(vf.values[vf.defined]))) if vf.defined.any() else 0.0
    # largest window holding whole periods of cos(a x); keeps the spectral
    # Laplacian exact so the constancy check is not polluted by leakage
    periods = int(math.floor(s.a * s.half_width / np.pi))
    if periods < 1:
        raise ConfigError("al_over_pi too small to host a commensurate window")
    half_window = np.pi * periods / s.a
    wgrid = Grid1D(x_min=-half_window, x_max=half_window, n_points=n_points)
    r = np.cos(s.a * wgrid.x)
    vq = quantum_potential(wgrid, r)
    vq_analytic = s.constants.hbar**2 * s.a**2 / (2.0 * s.constants.mass)
    kept = vq.values[vq.defined]
    vq_dev = float(np.max(np.abs(kept - vq_analytic)))
    return {
        "n_eval": n_eval,
        "n_nodes": int(np.count_nonzero(~vf.defined)),
        "velocity_max_abs": v_max,
        "vq_analytic": vq_analytic,
        "vq_mean": float(np.mean(kept)),
        "vq_max_dev": vq_dev,
        "window_periods": periods,
    }


def _run_bohm(p: dict, events: int, seed: int) -> dict:
    s = make_box(half_width=p["half_width"], al_over_pi=p["al_over_pi"])
    fields = _bohm_fields(s, p["n_points"], p["n_eval"])
    stats = sample_box_momenta(s, events, seed)
    probs = {MOMENTUM_LABELS[0]: 0.5, MOMENTUM_LABELS[1]: 0.5}
    f_plus = stats.frequency(MOMENTUM_LABELS[0])
    p_mean = (2.0 * f_plus - 1.0) * s.momentum_magnitude
    p_mean_se = 2.0 * s.momentum_magnitude * math.sqrt(f_plus * (1.0 - f_plus) / stats.total)
    invariants = [
        _inv("velocity_zero", fields["velocity_max_abs"], 0.0),
        _inv("vq_relative_deviation", fields["vq_max_dev"] / fields["vq_analytic"], 1e-10),
    ] + _event_invariants(probs, stats)
    table_rows = [
        [lab, 0.5, stats.frequency(lab), float(stats.std_errors[i])]
        for i, lab in enumerate(stats.labels)
    ]
    comments = [
        f"velocity_max_abs={_fmt(fields['velocity_max_abs'])}",
        f"vq_analytic={_fmt(fields['vq_analytic'])}",
        f"vq_max_dev={_fmt(fields['vq_max_dev'])}",
    ]
    return {
        "config": {
            "half_width": s.half_width,
            "al_over_pi": p["al_over_pi"],
            "a": s.a,
            "omega": s.omega,
            "n_points": p["n_points"],
            "n_eval": p["n_eval"],
        },
        "analytic": {
            "quantum_potential": fields["vq_analytic"],
            "momentum_magnitude": s.momentum_magnitude,
            "momentum_probabilities": probs,
            "guiding_velocity": 0.0,
        },
        "empirical": {
            "velocity_max_abs": fields["velocity_max_abs"],
            "velocity_nodes_skipped": fields["n_nodes"],
            "vq_mean": fields["vq_mean"],
            "vq_max_dev": fields["vq_max_dev"],
            "vq_window_periods": fields["window_periods"],
            "momentum": {
                **_freq_block(stats),
                "mean": p_mean,
                "mean_std_err": p_mean_se,
            },
        },
        "invariants": invariants,
        "table": (["label", "p_analytic", "p_empirical", "std_err"], table_rows, comments),
        "figure": {
            "kind": "frequency",
            "labels": list(stats.labels),
            "analytic": [0.5, 0.5],
            "empirical": [stats.frequency(lab) for lab in stats.labels],
            "std_err": [float(se) for se in stats.std_errors],
            "title": f"box momenta, |p|={s.momentum_magnitude:.4g}",
        },
    }


def _born_pipeline(p_hit: float) -> Pipeline:
    if not 0.0 < p_hit < 1.0:
        raise ConfigError(f"p must lie strictly inside (0, 1), got {p_hit}")
    return Pipeline(
        initial=BranchSet([("hit", math.sqrt(p_hit)), ("miss", math.sqrt(1.0 - p_hit))])
    )


def _run_born(p: dict, events: int, seed: int) -> dict:
    sizes = p["sizes"]
    if not sizes:
        raise ConfigError("sizes must name at least one ensemble size")
    if any(n < 1 for n in sizes):
        raise ConfigError(f"sizes must be positive, got {sizes}")
    if p["replicates"] < 1:
        raise ConfigError(f"replicates must be >= 1, got {p['replicates']}")
    result = born_convergence(_born_pipeline(p["p"]), sizes, seed, replicates=p["replicates"])
    invariants = []
    if result.slope is not None:
        invariants.append(
            _inv("slope_offset_from_minus_half", abs(result.slope + 0.5), 0.15, hard=False)
        )
    table_rows = [
        [n, e, result.replicates] for n, e in zip(result.sizes, result.errors)
    ]
    comments = [f"slope={_fmt(result.slope) if result.slope is not None else 'none'}"]
    ref = [result.errors[0] * math.sqrt(result.sizes[0] / n) for n in result.sizes]
    return {
        "config": {"p": p["p"], "sizes": list(sizes), "replicates": p["replicates"]},
        "analytic": {"expected_slope": -0.5},
        "empirical": {
            "sizes": list(result.sizes),
            "mean_abs_errors": list(result.errors),
            "slope": result.slope,
            "replicates": result.replicates,
        },
        "invariants": invariants,
        "table": (["N", "mean_abs_error", "replicates"], table_rows, comments),
        "figure": {
            "kind": "ladder",
            "x": list(result.sizes),
            "x_label": "N",
            "y_label": "mean |frequency - p|",
            "series": [
                {"label": "measured", "y": list(result.errors), "kind": "points"},
                {"label": "slope -1/2 reference", "y": ref, "kind": "line"},
            ],
            "title": f"frequency convergence, slope={result.slope:.3f}"
            if result.slope is not None
            else "frequency convergence",
        },
    }


# ------------------------------------------------------------- scan paths


def _scan_columns(experiment: str, scanned: str) -> list[str]:
    if experiment in ("sg", "mz"):
        return ["phase", "p_analytic", "p_empirical", "std_err", "N"]
    if experiment == "singlet":
        return ["delta_theta", "C_analytic", "C_empirical", "std_err", "N"]
    if experiment == "chsh":
        return [scanned, "S_analytic", "S_empirical", "std_err", "N"]
    if experiment == "neutrino":
        return [scanned, "P_ee", "P_emu", "freq_e", "freq_mu", "std_err", "N"]
    if experiment == "pair":
        return [scanned, "vis_analytic", "vis_coincidence", "std_err",
                "vis_singles_1", "vis_singles_2", "N"]
    if experiment == "schrodinger":
        return ["n_points", "residual_max"]
    if experiment == "dirac":
        return ["t", "p_swap_analytic", "p_swap_empirical", "std_err", "N"]
    if experiment == "bohm":
        return ["al_over_pi", "velocity_max_abs", "vq_max_dev", "freq_p_plus",
                "std_err", "N"]
    raise ConfigError(f"experiment {experiment} does not support --scan")


def _scan_point(
    experiment: str, params: dict, events: int, seed: int, name: str, value
) -> list:
    p = dict(params)
    if not (experiment == "neutrino" and name in ("phi", "L")) and not (
        experiment == "singlet" and name == "delta_theta"
    ):
        p[name] = value

    if experiment == "sg":
        cfg = SgConfig(mu_B=p["mu_B"], t=p["t"], input_state=p["input_state"])
        stats = simulate_sg(cfg, events, seed)
        p_flip = float(sg_transition_probability(cfg))
        flipped = X_LABELS[1] if cfg.input_state == X_LABELS[0] else X_LABELS[0]
        i = list(stats.labels).index(flipped)
        return [float(cfg.precession_phase), p_flip, stats.frequency(flipped),
                float(stats.std_errors[i]), stats.total]

    if experiment == "mz":
        cfg = _mz_config(p)
        stats = simulate_mz(cfg, events, seed)
        p1 = float(mz_exit_probability(cfg)[0])
        i = list(stats.labels).index("port1")
        return [float(cfg.phi1 - cfg.phi2), p1, stats.frequency("port1"),
                float(stats.std_errors[i]), stats.total]

    if experiment == "singlet":
        theta2 = p["theta1"] + value if name == "delta_theta" else p["theta2"]
        cfg = SingletConfig(theta1=p["theta1"], theta2=theta2, delta_s=p["delta_s"])
        run = simulate_singlet(cfg, events, seed)
        return [float(cfg.theta2 - cfg.theta1), float(singlet_correlation(cfg)),
                run.correlation, run.correlation_std_err, run.total]

    if experiment == "chsh":
        ds = p["delta_s"]
        angles = (p["a"], p["a_prime"], p["b"], p["b_prime"])
        run = simulate_chsh(*angles, events, seed, delta_s=ds)
        s_ana = chsh_statistic(
            *angles,
            lambda t1, t2: float(singlet_correlation(SingletConfig(t1, t2, ds))),
        )
        return [value, float(s_ana), run.statistic, run.statistic_std_err, events]

    if experiment == "neutrino":
        cfg = _neutrino_config(p)
        if name == "phi":
            domega = cfg.omega2 - cfg.omega1
            if domega == 0.0:
                raise ConfigError("scanning phi needs omega2 != omega1")
            t = 2.0 * value / domega
        elif name == "L":
            t = value
        else:
            t = p["t"]
        stats = simulate_neutrinos(cfg, t, events, seed)
        i_e = list(stats.labels).index(FLAVOR_LABELS[0])
        return [value, float(survival_probability(cfg, t)),
                float(appearance_probability(cfg, t)),
                stats.frequency(FLAVOR_LABELS[0]), stats.frequency(FLAVOR_LABELS[1]),
                float(stats.std_errors[i_e]), stats.total]

    if experiment == "pair":
        cfg = _pair_config(p)
        q = p["mixing"]
        if not 0.0 <= q <= 1.0:
            raise ConfigError(f"mixing must lie in [0, 1], got {q}")
        run = simulate_pair(cfg, events, seed, mixing=q)
        return [value, 1.0 - 0.5 * q, run.coincidence_visibility,
                run.coincidence_visibility_std_err, run.singles_visibility_1,
                run.singles_visibility_2, run.total]

    if experiment == "schrodinger":
        _, _, w0, _ = _schrodinger_setup(p)
        decomp = term_decomposition_residual(w0)
        return [p["n_points"], decomp.residual_max]

    if experiment == "dirac":
        cfg0 = DiracFormConfig(omega=p["omega"], B=(0.0, 0.0, 0.0), mu0=p["mu0"])
        ts = tunneling_evolution(cfg0, value)
        stats = simulate_tunneling(cfg0, value, events, seed)
        i = list(stats.labels).index(WELL_LABELS[1])
        return [value, ts.p_swap, stats.frequency(WELL_LABELS[1]),
                float(stats.std_errors[i]), stats.total]

    if experiment == "bohm":
        s = make_box(half_width=p["half_width"], al_over_pi=value)
        fields = _bohm_fields(s, p["n_points"], p["n_eval"])
        stats = sample_box_momenta(s, events, seed)
        i = list(stats.labels).index(MOMENTUM_LABELS[0])
        return [value, fields["velocity_max_abs"], fields["vq_max_dev"],
                stats.frequency(MOMENTUM_LABELS[0]), float(stats.std_errors[i]),
                stats.total]

    raise ConfigError(f"experiment {experiment} does not support --scan")


# --------------------------------------------------------------- registry


def _float_or_none(text: str) -> float:
    return float(text)


@dataclass(frozen=True)
class _Experiment:
    params: dict[str, tuple[Callable, object]]
    default_events: int
    run: Callable[[dict, int, int], dict]
    scannable: tuple[str, ...]


EXPERIMENTS = {
    "sg": _Experiment(
        params={"mu_B": (float, 1.0), "t": (float, 1.0), "input_state": (str, "x+")},
        default_events=100_000,
        run=_run_sg,
        scannable=("t", "mu_B"),
    ),
    "mz": _Experiment(
        params={"phi1": (float, 0.0), "phi2": (float, 0.0), "r": (float, SQ2)},
        default_events=100_000,
        run=_run_mz,
        scannable=("phi1", "phi2"),
    ),
    "singlet": _Experiment(
        params={"theta1": (float, 0.0), "theta2": (float, 0.0), "delta_s": (float, 1.0)},
        default_events=100_000,
        run=_run_singlet,
        scannable=("delta_theta", "theta2"),
    ),
    "chsh": _Experiment(
        params={
            "a": (float, 0.0),
            "a_prime": (float, math.pi / 2.0),
            "b": (float, math.pi / 4.0),
            "b_prime": (float, 3.0 * math.pi / 4.0),
            "delta_s": (float, 1.0),
        },
        default_events=400_000,
        run=_run_chsh,
        scannable=("a", "a_prime", "b", "b_prime"),
    ),
    "neutrino": _Experiment(
        params={
            "theta_mix": (float, math.pi / 4.0),
            "omega1": (float, 0.0),
            "omega2": (float, 1.0),
            "t": (float, 1.0),
            "delta_m2": (_float_or_none, None),
            "energy": (_float_or_none, None),
        },
        default_events=100_000,
        run=_run_neutrino,
        scannable=("t", "L", "phi"),
    ),
    "pair": _Experiment(
        params={
            "delta_k": (float, 1.0),
            "source_extent": (_float_or_none, None),
            "mixing": (float, 0.0),
        },
        default_events=200_000,
        run=_run_pair,
        scannable=("mixing", "delta_k"),
    ),
    "schrodinger": _Experiment(
        params={
            "potential": (str, "free"),
            "omega": (float, 1.0),
            "x_min": (float, -20.0),
            "x_max": (float, 20.0),
            "n_points": (int, 1024),
            "x0": (float, 0.0),
            "sigma0": (float, 1.0),
            "k0": (float, 0.0),
            "dt": (_float_or_none, None),
            "steps": (int, 1000),
        },
        default_events=1,
        run=_run_schrodinger,
        scannable=("n_points",),
    ),
    "dirac": _Experiment(
        params={
            "omega": (float, 1.0),
            "bx": (float, 0.0),
            "by": (float, 0.0),
            "bz": (float, 0.0),
            "mu0": (float, 1.0),
            "t": (float, 1.0),
        },
        default_events=100_000,
        run=_run_dirac,
        scannable=("t",),
    ),
    "bohm": _Experiment(
        params={
            "half_width": (float, 1.0),
            "al_over_pi": (float, 100.5),
            # ~10 grid points per cos period: exact for the single mode while
            # keeping the k^2 roundoff amplification well under the vq check
            "n_points": (int, 1024),
            "n_eval": (int, 1001),
        },
        default_events=100_000,
        run=_run_bohm,
        scannable=("al_over_pi",),
    ),
    "born-convergence": _Experiment(
        params={
            "p": (float, 0.5),
            "sizes": (_int_list, (1_000, 3_162, 10_000, 31_623, 100_000)),
            "replicates": (int, 4),
        },
        default_events=1,
        run=_run_born,
        scannable=(),
    ),
}

_SCAN_INT_PARAMS = {"n_points"}


# --------------------------------------------------------------- figures


def _render_figure(fig: dict, path: str) -> None:
    from . import plotting

    fig = dict(fig)
    kind = fig.pop("kind")
    if kind == "frequency":
        plotting.frequency_figure(path, **fig)
    elif kind == "snapshot":
        plotting.snapshot_figure(path, **fig)
    elif kind == "ladder":
        plotting.scan_figure(path, log=True, **fig)
    else:
        raise ValueError(f"unknown figure kind {kind!r}")


def _render_scan_figure(
    experiment: str, scanned: str, columns: list[str], rows: list[list], path: str
) -> None:
    from . import plotting

    data = {c: [row[i] for row in rows] for i, c in enumerate(columns)}
    x = data[columns[0]]
    series = []
    log = False
    if experiment in ("sg", "mz"):
        series = [
            {"label": "analytic", "y": data["p_analytic"], "kind": "line"},
            {"label": "empirical", "y": data["p_empirical"], "yerr": data["std_err"]},
        ]
        y_label = "probability"
    elif experiment == "singlet":
        series = [
            {"label": "analytic", "y": data["C_analytic"], "kind": "line"},
            {"label": "empirical", "y": data["C_empirical"], "yerr": data["std_err"]},
        ]
        y_label = "correlation"
    elif experiment == "chsh":
        series = [
            {"label": "analytic", "y": data["S_analytic"], "kind": "line"},
            {"label": "empirical", "y": data["S_empirical"], "yerr": data["std_err"]},
        ]
        y_label = "S"
    elif experiment == "neutrino":
        series = [
            {"label": "P_ee", "y": data["P_ee"], "kind": "line"},
            {"label": "P_emu", "y": data["P_emu"], "kind": "line"},
            {"label": "freq e", "y": data["freq_e"], "yerr": data["std_err"]},
            {"label": "freq mu", "y": data["freq_mu"], "yerr": data["std_err"]},
        ]
        y_label = "probability"
    elif experiment == "pair":
        series = [
            {"label": "analytic", "y": data["vis_analytic"], "kind": "line"},
            {"label": "coincidence", "y": data["vis_coincidence"], "yerr": data["std_err"]},
            {"label": "singles 1", "y": data["vis_singles_1"]},
            {"label": "singles 2", "y": data["vis_singles_2"]},
        ]
        y_label = "visibility"
    elif experiment == "schrodinger":
        series = [{"label": "residual max", "y": data["residual_max"]}]
        y_label = "residual"
        log = True
    elif experiment == "dirac":
        series = [
            {"label": "analytic", "y": data["p_swap_analytic"], "kind": "line"},
            {"label": "empirical", "y": data["p_swap_empirical"], "yerr": data["std_err"]},
        ]
        y_label = "P(swap)"
    elif experiment == "bohm":
        series = [
            {"label": "max |v|", "y": data["velocity_max_abs"]},
            {"label": "V_q max deviation", "y": data["vq_max_dev"]},
        ]
        y_label = "residual"
    else:
        return
    plotting.scan_figure(
        path, x, columns[0], series,
        title=f"{experiment} scan over {scanned}", y_label=y_label, log=log,
    )


# ------------------------------------------------------------ resolution


def _resolve(args) -> tuple[str, dict, int, int]:
    entries = _load_config_file(args.config) if args.config else {}
    meta = {k: entries.pop(k) for k in ("experiment", "seed", "events") if k in entries}
    experiment = args.experiment
    if experiment is None and "experiment" in meta:
        experiment = meta["experiment"][0]
    if experiment is None:
        raise ConfigError(
            "no experiment selected; pass --experiment or set 'experiment = ...' "
            "in the config file"
        )
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choices: {', '.join(sorted(EXPERIMENTS))}"
        )
    known = EXPERIMENTS[experiment].params
    params = {k: default for k, (_, default) in known.items()}
    problems = []
    for key, (value, lineno) in entries.items():
        if key not in known:
            problems.append(
                f"line {lineno}: unknown parameter {key!r} for {experiment} "
                f"(known: {', '.join(sorted(known))})"
            )
            continue
        conv = known[key][0]
        try:
            params[key] = conv(value)
        except (TypeError, ValueError):
            problems.append(f"line {lineno}: cannot parse {key} = {value!r}")
    seed = args.seed
    if seed is None and "seed" in meta:
        try:
            seed = int(meta["seed"][0])
        except ValueError:
            problems.append(f"line {meta['seed'][1]}: seed must be an integer")
    if seed is None:
        seed = 0
    events = args.events
    if events is None and "events" in meta:
        try:
            events = int(meta["events"][0])
        except ValueError:
            problems.append(f"line {meta['events'][1]}: events must be an integer")
    if events is None:
        events = EXPERIMENTS[experiment].default_events
    if problems:
        where = f"in {args.config}:\n  " if args.config else ""
        raise ConfigError(where + "\n  ".join(problems))
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must fit in 64 bits, got {seed}")
    if events < 1:
        raise ConfigError(f"events must be >= 1, got {events}")
    return experiment, params, events, seed


def _parse_scan(text: str, experiment: str) -> tuple[str, list]:
    if "=" not in text:
        raise ConfigError("--scan expects PARAM=V1,V2,...")
    name, _, tail = text.partition("=")
    name = name.strip()
    allowed = EXPERIMENTS[experiment].scannable
    if name not in allowed:
        raise ConfigError(
            f"experiment {experiment} cannot scan {name!r} "
            f"(scannable: {', '.join(allowed) if allowed else 'none'})"
        )
    conv = int if name in _SCAN_INT_PARAMS else float
    values = []
    for piece in tail.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            values.append(conv(piece))
        except ValueError:
            raise ConfigError(f"--scan value {piece!r} does not parse as {conv.__name__}")
    return name, values


# -------------------------------------------------------------- top level


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="actionwave",
        description=(
            "Event-by-event quantum experiment runs with analytic cross-checks. "
            "Reads ACTIONWAVE_THREADS for worker count (0 = all cores)."
        ),
    )
    p.add_argument(
        "--experiment",
        choices=sorted(EXPERIMENTS),
        help="which experiment to run (or set 'experiment = ...' in --config)",
    )
    p.add_argument("--config", metavar="PATH", help="'key = value' parameter file, '#' comments")
    p.add_argument("--seed", type=int, default=None, help="64-bit ensemble seed (default 0)")
    p.add_argument("--events", type=int, default=None, help="ensemble size (per-experiment default)")
    p.add_argument("--out", metavar="PATH", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default: json for single runs, csv for scans)")
    p.add_argument("--scan", metavar="PARAM=V1,V2,...", default=None,
                   help="rerun over comma-separated values of one parameter, emit a table")
    p.add_argument("--figure", metavar="PATH", default=None,
                   help="also render a figure of the same numbers to this file")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _run(args) -> None:
    experiment, params, events, seed = _resolve(args)
    if args.scan is not None:
        name, values = _parse_scan(args.scan, experiment)
        columns = _scan_columns(experiment, name)
        rows = [_scan_point(experiment, params, events, seed, name, v) for v in values]
        fmt = args.format or "csv"
        if fmt == "csv":
            comment = f"experiment={experiment} parameter={name} seed={seed} events={events}"
            _write_text(args.out, _csv_text(SCHEMA_SCAN, columns, rows, [comment]))
        else:
            report = {
                "schema": SCHEMA_SCAN,
                "experiment": experiment,
                "parameter": name,
                "version": __version__,
                "seed": seed,
                "events": events,
                "columns": columns,
                "rows": rows,
            }
            _write_text(args.out, json.dumps(_jsonable(report), indent=2) + "\n")
        if args.figure:
            if rows:
                _render_scan_figure(experiment, name, columns, rows, args.figure)
            else:
                print("actionwave: empty scan, no figure rendered", file=sys.stderr)
        return

    bundle = EXPERIMENTS[experiment].run(params, events, seed)
    fmt = args.format or "json"
    if fmt == "json":
        report = {
            "schema": SCHEMA_REPORT,
            "experiment": experiment,
            "version": __version__,
            "seed": seed,
            "events": events,
            "config": bundle["config"],
            "analytic": bundle["analytic"],
            "empirical": bundle["empirical"],
            "invariants": bundle["invariants"],
        }
        _write_text(args.out, json.dumps(_jsonable(report), indent=2) + "\n")
    else:
        columns, rows, comments = bundle["table"]
        _write_text(args.out, _csv_text(SCHEMA_TABLE, columns, rows, comments))
    if args.figure:
        _render_figure(bundle["figure"], args.figure)
    # report is written first so a violation still leaves the numbers on disk
    _enforce(bundle["invariants"])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        _run(args)
    except ConfigError as e:
        print(f"actionwave: config error: {e}", file=sys.stderr)
        return 1
    except InvariantError as e:
        print(f"actionwave: invariant violated: {e}", file=sys.stderr)
        return 3
    except NonUnitaryError as e:
        print(f"actionwave: invariant violated: {e}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as e:
        print(f"actionwave: numerical failure: {e}", file=sys.stderr)
        return 2
    except (FloatingPointError, OverflowError, ZeroDivisionError) as e:
        print(f"actionwave: numerical failure: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"actionwave: config error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"actionwave: cannot write output: {e}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started
    print(f"actionwave: done in {elapsed:.3f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
