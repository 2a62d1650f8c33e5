"""Command-line pipeline: synth | fit | dispersion | reproduce.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure.  Every artifact embeds the resolved configuration so a run can
be reproduced from its outputs alone.
"""

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from .config import ScenarioConfig, default_config, load_config
from .curves import DispersionCurve
from .dispersion import compare_to_oracle, sweep_and_aggregate
from .errors import ConfigError, DispersimError
from .vecfit import RationalModel, fit_full, rel_l2_error
from .waveguide import FrfDataset, analytic_group_velocity, synthesize_frfs

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load(config_path):
    return load_config(config_path) if config_path else default_config()


def _run(task):
    try:
        task()
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except DispersimError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


def _synth(cfg, out, paper_grid):
    out.mkdir(parents=True, exist_ok=True)
    spec = cfg.waveguide_spec()
    grid = cfg.freq_grid(paper_grid=paper_grid)
    t0 = time.time()
    ds = synthesize_frfs(spec, grid)
    ds.metadata["config"] = cfg.to_dict()
    ds.metadata["scenario"] = cfg.name
    path = out / f"frf_{cfg.excitation}.json"
    ds.to_json(path)
    click.echo(
        f"synth: {grid.size} bins x {ds.n_channels} channels "
        f"in {time.time() - t0:.1f}s -> {path}"
    )
    return path


def _fit(cfg, out, data_path):
    out.mkdir(parents=True, exist_ok=True)
    data_path = Path(data_path) if data_path else out / f"frf_{cfg.excitation}.json"
    ds = FrfDataset.from_json(data_path)
    t0 = time.time()
    model = fit_full(
        ds, cfg.band_plan(),
        prominence_db=cfg.sections["vf"]["prominence_db"],
    )
    model.metadata["config"] = cfg.to_dict()
    model.metadata["scenario"] = cfg.name
    path = out / f"model_{cfg.excitation}.json"
    model.to_json(path)

    report = {
        "scenario": cfg.name,
        "excitation": cfg.excitation,
        "degree": model.degree,
        "rel_l2_error": model.metadata["rel_l2_error"],
        "elapsed_s": time.time() - t0,
        "bands": [],
    }
    for info, err in zip(
        model.metadata["bands"], model.metadata["per_band_rel_l2_error"]
    ):
        report["bands"].append({**info, "rel_l2_error": err})
    rpath = out / f"fit_report_{cfg.excitation}.json"
    with open(rpath, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)

    click.echo(f"fit: {model.degree} poles, E_rel {report['rel_l2_error']:.3e}")
    click.echo(f"{'band (Hz)':>18} {'peaks':>6} {'budget':>7} {'E_rel':>10}")
    for b in report["bands"]:
        lo, hi = b["band_hz"]
        click.echo(
            f"{lo:8.0f}-{hi:8.0f} {b['n_peaks']:>6} {b['budget']:>7} "
            f"{b['rel_l2_error']:>10.2e}"
        )
    return path


def _dispersion(cfg, out, model_path):
    out.mkdir(parents=True, exist_ok=True)
    model_path = Path(model_path) if model_path else out / f"model_{cfg.excitation}.json"
    model = RationalModel.from_json(model_path)
    spec = cfg.waveguide_spec()
    n_cycles, fs, kappa, gamma = cfg.burst_params()
    sw = cfg.sections["sweep"]
    centers = cfg.sweep_centers()
    t0 = time.time()
    curve = sweep_and_aggregate(
        model,
        np.asarray(spec.sensor_positions),
        centers,
        n_cycles=n_cycles,
        sample_rate=fs,
        kappa=kappa,
        gamma=gamma,
        out_step_hz=sw["out_step_hz"],
        f_min_hz=sw["f_min_hz"],
        spread_rel_limit=sw["spread_rel_limit"],
        domain_bounds=(0.0, spec.length),
        source_pos=spec.actuator_edges[1],
    )
    curve.metadata["config"] = cfg.to_dict()
    curve.metadata["scenario"] = cfg.name
    curve.to_csv(out / f"curve_{cfg.excitation}.csv")
    curve.to_json(out / f"curve_{cfg.excitation}.json")

    mode = "flexural" if cfg.excitation == "flexural" else "longitudinal"
    o_grid = 2.0 * np.pi * np.arange(
        max(500.0, sw["f_min_hz"] / 2), cfg.sections["grid"]["f_stop_hz"] + 50.0, 50.0
    )
    oracle = analytic_group_velocity(spec, mode, o_grid)
    oracle.metadata["scenario"] = cfg.name
    oracle.to_csv(out / f"oracle_{cfg.excitation}.csv")
    report = compare_to_oracle(curve, oracle)
    with open(out / f"comparison_{cfg.excitation}.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
    click.echo(
        f"dispersion: {curve.freq_hz.size} bins in {time.time() - t0:.1f}s; "
        f"vs analytic curve: median dev {report['median_rel_dev']:.2%}, "
        f"max {report['max_rel_dev']:.2%}"
    )
    return curve


@click.group()
def main():
    """FRF synthesis, rational fitting, and dispersion-curve estimation."""


_config_opt = click.option("--config", "config_path", type=click.Path(exists=True),
                           default=None, help="Scenario TOML (defaults to the reference beam).")
_out_opt = click.option("--out", "out_dir", type=click.Path(), default="out",
                        help="Output directory.")
_paper_opt = click.option("--paper-grid", is_flag=True,
                          help="Use the full-resolution 0.25 Hz frequency grid.")


@main.command()
@_config_opt
@_out_opt
@_paper_opt
def synth(config_path, out_dir, paper_grid):
    """Synthesize reference FRFs for the configured scenario."""
    _run(lambda: _synth(_load(config_path), Path(out_dir), paper_grid))


@main.command()
@_config_opt
@_out_opt
@click.option("--data", "data_path", type=click.Path(exists=True), default=None,
              help="FRF dataset JSON (defaults to the synth output in --out).")
def fit(config_path, out_dir, data_path):
    """Fit a rational model to an FRF dataset."""
    _run(lambda: _fit(_load(config_path), Path(out_dir), data_path))


@main.command()
@_config_opt
@_out_opt
@click.option("--model", "model_path", type=click.Path(exists=True), default=None,
              help="Model JSON (defaults to the fit output in --out).")
def dispersion(config_path, out_dir, model_path):
    """Estimate dispersion curves from a fitted model."""
    _run(lambda: _dispersion(_load(config_path), Path(out_dir), model_path))


_SCENARIOS = {
    "free-free": {},
    "clamped-free": {
        "scenario": {"name": "clamped-free", "bc_left": "clamped", "bc_right": "free"},
        "geometry": {"n_sensors": 16, "sensor_stop_in": 34.0},
    },
    "pinned-pinned": {
        "scenario": {"name": "pinned-pinned", "bc_left": "pinned", "bc_right": "pinned"},
        "geometry": {"n_sensors": 16, "sensor_stop_in": 34.0},
    },
    "free-free-inplane": {
        "scenario": {"name": "free-free-inplane", "excitation": "longitudinal"},
        "sweep": {"f_center_stop_hz": 45000.0},
    },
}


def _scenario_config(name):
    base = {k: dict(v) for k, v in _SCENARIOS[name].items()}
    return default_config(**base)


def _pass(label, ok, detail):
    click.echo(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    return ok


def _reproduce(scenario_id, out, paper_grid):
    out = out / scenario_id
    checks = []
    if scenario_id == "table1":
        cfg = _scenario_config("free-free")
        _synth(cfg, out, paper_grid)
        _fit(cfg, out, None)
        rep = json.load(open(out / "fit_report_flexural.json"))
        checks.append(_pass("total poles ~212", abs(rep["degree"] - 212) <= 4,
                            f"{rep['degree']}"))
        worst = max(b["rel_l2_error"] for b in rep["bands"])
        checks.append(_pass("per-band E_rel <= 1e-5", worst <= 1e-5, f"worst {worst:.2e}"))
    elif scenario_id == "table2":
        rows = []
        for name in ("free-free", "clamped-free", "pinned-pinned", "free-free-inplane"):
            cfg = _scenario_config(name)
            sub = out / name
            _synth(cfg, sub, paper_grid)
            _fit(cfg, sub, None)
            rep = json.load(open(sub / f"fit_report_{cfg.excitation}.json"))
            rows.append((name, rep["degree"], rep["rel_l2_error"]))
        with open(out / "table2.json", "w") as fh:
            json.dump([{"scenario": n, "degree": d, "rel_l2_error": e}
                       for n, d, e in rows], fh, indent=1)
        targets = {"free-free": 212, "clamped-free": 214, "pinned-pinned": 212,
                   "free-free-inplane": 48}
        for name, deg, err in rows:
            checks.append(_pass(f"{name} order ~{targets[name]}",
                                abs(deg - targets[name]) <= 4, f"{deg}, E_rel {err:.2e}"))
    elif scenario_id in ("fig4", "fig6"):
        name = "free-free" if scenario_id == "fig4" else "free-free-inplane"
        cfg = _scenario_config(name)
        _synth(cfg, out, paper_grid)
        _fit(cfg, out, None)
        curve = _dispersion(cfg, out, None)
        spec = cfg.waveguide_spec()
        mode = "flexural" if cfg.excitation == "flexural" else "longitudinal"
        oracle = analytic_group_velocity(
            spec, mode, 2.0 * np.pi * np.arange(1000.0, 50001.0, 50.0)
        )
        rep = compare_to_oracle(curve, oracle, band_hz=(2000.0, 40000.0))
        lim = 0.02 if scenario_id == "fig4" else 0.01
        checks.append(_pass(f"median dev <= {lim:.0%} over 2-40 kHz",
                            rep["median_rel_dev"] <= lim,
                            f"{rep['median_rel_dev']:.2%}"))
    elif scenario_id == "fig8":
        curves = {}
        for name in ("free-free", "clamped-free", "pinned-pinned"):
            cfg = _scenario_config(name)
            sub = out / name
            _synth(cfg, sub, paper_grid)
            _fit(cfg, sub, None)
            curves[name] = _dispersion(cfg, sub, None)
        names = list(curves)
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                a, b = curves[names[i]], curves[names[j]]
                rep = compare_to_oracle(a, b, band_hz=(2000.0, 40000.0))
                checks.append(_pass(
                    f"{names[i]} vs {names[j]} median <= 1%",
                    rep["median_rel_dev"] <= 0.01, f"{rep['median_rel_dev']:.2%}"))
    else:
        raise ConfigError(
            f"unknown scenario id {scenario_id!r}; "
            "expected one of table1, table2, fig4, fig6, fig8"
        )
    if checks and not all(checks):
        raise DispersimError(f"{scenario_id}: {checks.count(False)} check(s) failed")
    click.echo(f"{scenario_id}: all checks passed" if checks else f"{scenario_id}: done")


@main.command()
@click.argument("scenario_id")
@_out_opt
@_paper_opt
def reproduce(scenario_id, out_dir, paper_grid):
    """Regenerate all artifacts for one benchmark scenario.

    SCENARIO_ID is one of: table1, table2, fig4, fig6, fig8.
    """
    _run(lambda: _reproduce(scenario_id, Path(out_dir), paper_grid))


if __name__ == "__main__":
    main()
