"""Command-line interface.

Subcommands cover the full pipeline: generate a random state, simulate its
measurement dataset, reconstruct from a dataset CSV, run fidelity campaigns
and purity sweeps, export optics intensity profiles, and validate projector
families. Domain errors exit 1 with a message; usage errors exit 2.
"""

from __future__ import annotations

import json
import sys
from functools import wraps

import click
import numpy as np

from . import __version__
from .campaign import (
    CampaignConfig,
    NoiseSpec,
    campaign_config_from_json,
    purity_sweep,
    run_campaign,
)
from .forward_model import (
    dataset_from_state,
    export_csv_path,
    family_from_sidecar,
    ingest_csv,
)
from .hilbert import as_state, fidelity, haar_random_state, is_normalized
from .optics import default_geometry, far_field_intensity, near_field_intensity
from .pie import PieConfig, reconstruct
from .projectors import FamilyKind, build_family, family_to_json, validate_set


def state_to_json(psi: np.ndarray) -> str:
    return json.dumps(
        {"dim": len(psi), "amplitudes": [[z.real, z.imag] for z in psi]}, indent=2
    )


def state_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return as_state(amps, dim=int(doc["dim"]))


def load_state(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_json(fh.read())


def _domain_errors(fn):
    """Map domain exceptions to exit status 1 with a readable message."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


family_option = click.option(
    "--family",
    "family_kind",
    type=click.Choice(["family_i", "family_ii"]),
    default="family_ii",
    show_default=True,
)


@click.group()
@click.version_option(__version__)
def main():
    """Ptychographic pure-state reconstruction toolkit."""


@main.command()
@click.option("-d", "--dim", type=int, required=True, help="State dimension.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(), default=None, help="State JSON file (default: stdout).")
@_domain_errors
def generate(dim, seed, output):
    """Draw a Haar-random pure state and write it as JSON."""
    psi = haar_random_state(dim, np.random.default_rng(seed))
    text = state_to_json(psi)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.option("--state", "state_path", type=click.Path(exists=True), required=True)
@family_option
@click.option("--noise", type=click.Choice(["none", "shot"]), default="none", show_default=True)
@click.option("--exposure", type=float, default=1e5, show_default=True,
              help="Mean photons per projector preparation (shot noise).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", type=click.Path(), required=True, help="Dataset CSV path.")
@click.option("--family-json", type=click.Path(), default=None,
              help="Also write the projector-family JSON sidecar here.")
@_domain_errors
def simulate(state_path, family_kind, noise, exposure, seed, output, family_json):
    """Simulate the measurement dataset for a state file."""
    psi = load_state(state_path)
    if not is_normalized(psi):
        raise ValueError("input state is not normalized")
    family = build_family(len(psi), FamilyKind(family_kind))
    ds = dataset_from_state(
        psi, family, exposure=exposure if noise == "shot" else None, seed=seed
    )
    export_csv_path(ds, output)
    if family_json:
        with open(family_json, "w", encoding="utf-8") as fh:
            fh.write(family_to_json(family) + "\n")
    click.echo(f"wrote {family.n}x{family.dim} dataset to {output}")


@main.command("reconstruct")
@click.option("--data", "data_path", type=click.Path(exists=True), required=True,
              help="Dataset CSV produced by `simulate` or an external pipeline.")
@click.option("--family-json", type=click.Path(exists=True), default=None,
              help="Projector-family sidecar (required for custom families).")
@click.option("--source", "source_path", type=click.Path(exists=True), default=None,
              help="Reference state JSON; prints fidelity when given.")
@click.option("--calibration", type=float, default=None,
              help="Override the dataset scale constant.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--beta", type=float, default=1.6, show_default=True)
@click.option("--tolerance", type=float, default=1e-5, show_default=True)
@click.option("--max-sweeps", type=int, default=25, show_default=True)
@click.option("--max-restarts", type=int, default=100, show_default=True)
@click.option("--output", type=click.Path(), default=None, help="Estimate JSON file.")
@_domain_errors
def reconstruct_cmd(data_path, family_json, source_path, calibration, seed, beta,
                    tolerance, max_sweeps, max_restarts, output):
    """Reconstruct a pure state from a dataset CSV."""
    family = family_from_sidecar(family_json) if family_json else None
    ds = ingest_csv(data_path, family=family, calibration=calibration, source_id=data_path)
    config = PieConfig(beta=beta, distance_tolerance=tolerance,
                       max_sweeps=max_sweeps, max_restarts=max_restarts, seed=seed)
    result = reconstruct(ds, config=config)
    click.echo(
        f"converged={result.converged} sweeps={result.sweeps_used} "
        f"restarts={result.restarts_used} D={result.final_distance:.3e} "
        f"residual={result.residual:.3e}"
    )
    if source_path:
        psi_src = load_state(source_path)
        click.echo(f"fidelity={fidelity(result.estimate, psi_src):.6f}")
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(state_to_json(result.estimate) + "\n")


@main.command("campaign")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="CampaignConfig JSON document.")
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--output", type=click.Path(), default=None, help="Override the output directory.")
@click.option("--threads", type=int, default=None, help="Override the worker count.")
@_domain_errors
def campaign_cmd(config_path, seed, output, threads):
    """Run a fidelity campaign from a JSON config."""
    from dataclasses import replace

    with open(config_path, "r", encoding="utf-8") as fh:
        config = campaign_config_from_json(fh.read())
    if seed is not None:
        config = replace(config, master_seed=seed)
    if output is not None:
        config = replace(config, output=output)
    if threads is not None:
        config = replace(config, threads=threads)
    result = run_campaign(config)
    for cell, stats in result.summary["cells"].items():
        click.echo(
            f"{cell}: median F={stats['median_fidelity']:.6f} "
            f"mean F={stats['mean_fidelity']:.6f} "
            f"converged={stats['convergence_rate']:.0%} "
            f"t={stats['mean_t_pie_ms']:.2f} ms"
        )
    if "timing_fit_exponent" in result.summary:
        click.echo(f"timing fit exponent: {result.summary['timing_fit_exponent']:.2f}")


@main.command("purity-sweep")
@click.option("-d", "--dim", type=int, default=6, show_default=True)
@family_option
@click.option("--p-values", default="1.0,0.95,0.9,0.8,0.6,0.4",
              show_default=True, help="Comma-separated mixture weights.")
@click.option("--trials", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--output", type=click.Path(), default=None, help="CSV output (default: stdout).")
@_domain_errors
def purity_sweep_cmd(dim, family_kind, p_values, trials, seed, threads, output):
    """Reconstruction quality against source purity."""
    ps = [float(p) for p in p_values.split(",")]
    rows = purity_sweep(dim, FamilyKind(family_kind), ps, trials,
                        master_seed=seed, threads=threads)
    lines = ["p,purity,mean_fidelity,convergence_rate"]
    lines += [
        f"{r['p']},{r['purity']:.6f},{r['mean_fidelity']:.6f},{r['convergence_rate']:.3f}"
        for r in rows
    ]
    text = "\n".join(lines)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@main.command("optics-profile")
@click.option("--state", "state_path", type=click.Path(exists=True), required=True)
@click.option("--points", type=int, default=2000, show_default=True)
@click.option("--span", type=float, default=None,
              help="Half-width of the x range in meters (default: first envelope minimum).")
@click.option("--output", type=click.Path(), required=True,
              help="CSV of x, near-field and far-field intensities.")
@_domain_errors
def optics_profile(state_path, points, span, output):
    """Export near- and far-field intensity profiles for plotting."""
    psi = load_state(state_path)
    d = len(psi)
    geom = default_geometry(d)
    if span is None:
        span = geom.wavelength * geom.focal_length / geom.slit_width
    x_far = np.linspace(-span, span, points)
    x_near = np.linspace(-geom.pitch, d * geom.pitch, points)
    far = far_field_intensity(psi, geom, x_far)
    near = near_field_intensity(psi, geom, x_near)
    with open(output, "w", encoding="utf-8") as fh:
        fh.write("x_near,I_near,x_far,I_far\n")
        for xn, un, xf, uf in zip(x_near, near, x_far, far):
            fh.write(f"{xn!r},{un!r},{xf!r},{uf!r}\n")
    click.echo(f"wrote {points} profile points to {output}")


@main.command("validate-family")
@click.option("-d", "--dim", type=int, default=None, help="Dimension (with --family).")
@family_option
@click.option("--family-json", type=click.Path(exists=True), default=None,
              help="Validate a custom family from its JSON document.")
@_domain_errors
def validate_family(dim, family_kind, family_json):
    """Check coverage and overlap of a projector family."""
    if family_json:
        family = family_from_sidecar(family_json)
    elif dim is not None:
        family = build_family(dim, FamilyKind(family_kind))
    else:
        raise ValueError("provide either --dim or --family-json")
    report = validate_set(family)
    click.echo(f"family: kind={family.kind.value} d={family.dim} n={family.n}")
    click.echo(f"coverage per level: {list(report.coverage)}")
    click.echo(f"overlap partners per projector: {list(report.overlap_partners)}")
    click.echo(f"ok: {report.ok}")
    for problem in report.problems:
        click.echo(f"problem: {problem}")
    if not report.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
