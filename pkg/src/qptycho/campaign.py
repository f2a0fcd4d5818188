"""Monte Carlo fidelity campaigns: draw Haar-random source states, simulate
their measurement data under a chosen noise model, reconstruct, and tabulate
fidelities and timings across dimensions and projector families.

Seed discipline: every trial owns an independent random stream derived from
the master seed and the cell coordinates (family, d, trial index), never from
scheduling order, so results are identical for any thread count.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .forward_model import (
    Provenance,
    assemble_dataset,
    ideal_probabilities,
    mixed_probabilities,
    sample_counts,
)
from .hilbert import (
    fidelity,
    haar_random_state,
    mix_with_white_noise,
    white_noise_purity,
)
from .optics import default_geometry, measurement_probabilities
from .pie import PieConfig, reconstruct, warm_up
from .projectors import FamilyKind, apply_projector, build_family

PAPER_TRIALS = "paper"

RESULTS_COLUMNS = "d,family,trial,seed,fidelity,converged,sweeps,restarts,t_pie_ms"

_FAMILY_CODE = {FamilyKind.FAMILY_I: 1, FamilyKind.FAMILY_II: 2}


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"              # "none" | "shot" | "purity" | "envelope"
    exposure: float | None = None   # mean photons per projector preparation
    p: float | None = None          # pure-component weight of the white-noise mixture

    def __post_init__(self):
        if self.kind not in ("none", "shot", "purity", "envelope"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "shot" and (self.exposure is None or self.exposure <= 0):
            raise ValueError("shot noise requires a positive exposure")
        if self.kind == "purity" and (self.p is None or not 0 < self.p <= 1):
            raise ValueError("purity noise requires p in (0, 1]")


@dataclass(frozen=True)
class CampaignConfig:
    dims: tuple[int, ...]
    families: tuple[FamilyKind, ...] = (FamilyKind.FAMILY_II,)
    trials_per_dim: int | str = 20
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    master_seed: int = 0
    pie: PieConfig = field(default_factory=PieConfig)
    output: str | None = None
    threads: int = 1

    def __post_init__(self):
        if any(not 3 <= d <= 64 for d in self.dims):
            raise ValueError("campaign dims must lie in {3, ..., 64}")
        if isinstance(self.trials_per_dim, int) and self.trials_per_dim < 1:
            raise ValueError("trials_per_dim must be >= 1")

    def trials_for(self, d: int) -> int:
        if self.trials_per_dim == PAPER_TRIALS:
            if d <= 10:
                return 100
            if d <= 17:
                return 50
            return 13
        return int(self.trials_per_dim)


@dataclass(frozen=True)
class TrialRecord:
    d: int
    family: FamilyKind
    trial: int
    seed: int
    fidelity: float
    converged: bool
    sweeps: int
    restarts: int
    t_pie_ms: float


def trial_seed_sequence(master_seed: int, kind: FamilyKind, d: int, trial: int):
    """The documented seed-splitting rule: one stream per campaign cell."""
    return np.random.SeedSequence([int(master_seed), _FAMILY_CODE[kind], int(d), int(trial)])


def _generate_data(psi, family, noise: NoiseSpec, rng: np.random.Generator, seed: int):
    if noise.kind == "none":
        return assemble_dataset(ideal_probabilities(psi, family), family)
    if noise.kind == "shot":
        counts = sample_counts(ideal_probabilities(psi, family), noise.exposure, rng)
        prov = Provenance(kind="sampled", seed=seed, exposure=noise.exposure)
        return assemble_dataset(counts, family, prov)
    if noise.kind == "purity":
        rho = mix_with_white_noise(psi, noise.p)
        return assemble_dataset(mixed_probabilities(rho, family), family)
    if noise.kind == "envelope":
        geom = default_geometry(family.dim)
        rows = [
            measurement_probabilities(apply_projector(p, psi), geom, envelope_on=True)
            for p in family.projectors
        ]
        return assemble_dataset(np.asarray(rows), family)
    raise AssertionError(noise.kind)


def run_trial(
    d: int,
    kind: FamilyKind,
    noise: NoiseSpec,
    master_seed: int,
    trial: int,
    pie: PieConfig | None = None,
) -> TrialRecord:
    """One campaign cell: draw source, simulate data, reconstruct, score."""
    if pie is None:
        pie = PieConfig()
    seq = trial_seed_sequence(master_seed, kind, d, trial)
    state_seed, pie_seed = (int(s) for s in seq.generate_state(2))
    rng = np.random.default_rng(state_seed)
    psi_src = haar_random_state(d, rng)
    family = build_family(d, kind)
    data = _generate_data(psi_src, family, noise, rng, state_seed)
    result = reconstruct(data, family, replace(pie, seed=pie_seed))
    return TrialRecord(
        d=d,
        family=kind,
        trial=trial,
        seed=pie_seed,
        fidelity=fidelity(result.estimate, psi_src),
        converged=result.converged,
        sweeps=result.sweeps_used,
        restarts=result.restarts_used,
        t_pie_ms=result.wall_time * 1e3,
    )


def _cell_summary(records: list[TrialRecord]) -> dict:
    fids = sorted(r.fidelity for r in records)
    qs = statistics.quantiles(fids, n=4) if len(fids) >= 2 else [fids[0]] * 3
    return {
        "trials": len(records),
        "mean_fidelity": statistics.fmean(fids),
        "median_fidelity": statistics.median(fids),
        "q1_fidelity": qs[0],
        "q3_fidelity": qs[2],
        "min_fidelity": fids[0],
        "max_fidelity": fids[-1],
        "convergence_rate": sum(r.converged for r in records) / len(records),
        "mean_t_pie_ms": statistics.fmean(r.t_pie_ms for r in records),
    }


def timing_fit_exponent(mean_times_by_dim: dict[int, float]) -> float:
    """Least-squares slope of log(mean t) against log(d)."""
    dims = sorted(mean_times_by_dim)
    if len(dims) < 2:
        raise ValueError("timing fit needs at least two dimensions")
    x = np.log([float(d) for d in dims])
    y = np.log([mean_times_by_dim[d] for d in dims])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class CampaignResult:
    records: tuple[TrialRecord, ...]
    summary: dict


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Execute all (d, family, trial) cells and optionally persist results.

    Writes `results.csv` (one row per trial) and `summary.json` (derived
    statistics) under config.output when set; rows are flushed as each cell
    completes so partial results survive an abort.
    """
    warm_up()  # JIT compile outside the timed region
    # round-robin over cells so slow system periods hit every (d, family)
    # equally and the timing comparison across d stays fair
    tasks = sorted(
        (
            (d, kind, trial)
            for kind in config.families
            for d in config.dims
            for trial in range(config.trials_for(d))
        ),
        key=lambda t: (t[2], t[0]),
    )

    def _run(task):
        d, kind, trial = task
        return run_trial(d, kind, config.noise, config.master_seed, trial, config.pie)

    out_dir = Path(config.output) if config.output else None
    csv_fh = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_fh = open(out_dir / "results.csv", "w", encoding="utf-8")
        csv_fh.write(RESULTS_COLUMNS + "\n")
    records: list[TrialRecord] = []
    try:
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                results = list(pool.map(_run, tasks))
        else:
            results = [_run(t) for t in tasks]
        results.sort(key=lambda r: (r.family.value, r.d, r.trial))
        for rec in results:
            records.append(rec)
            if csv_fh is not None:
                csv_fh.write(
                    f"{rec.d},{rec.family.value},{rec.trial},{rec.seed},"
                    f"{rec.fidelity!r},{int(rec.converged)},{rec.sweeps},"
                    f"{rec.restarts},{rec.t_pie_ms:.3f}\n"
                )
                csv_fh.flush()
    finally:
        if csv_fh is not None:
            csv_fh.close()

    summary: dict = {"cells": {}}
    for kind in config.families:
        for d in config.dims:
            cell = [r for r in records if r.family == kind and r.d == d]
            summary["cells"][f"{kind.value}:d={d}"] = _cell_summary(cell)
    if FamilyKind.FAMILY_II in config.families and len(config.dims) >= 2:
        means = {
            d: statistics.fmean(
                r.t_pie_ms for r in records if r.family == FamilyKind.FAMILY_II and r.d == d
            )
            for d in config.dims
        }
        summary["timing_fit_exponent"] = timing_fit_exponent(means)
    summary["config"] = {
        "dims": list(config.dims),
        "families": [k.value for k in config.families],
        "trials_per_dim": config.trials_per_dim,
        "noise": asdict(config.noise),
        "master_seed": config.master_seed,
        "pie": asdict(config.pie),
    }
    if out_dir is not None:
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return CampaignResult(records=tuple(records), summary=summary)


def campaign_config_from_json(text: str) -> CampaignConfig:
    """Parse the JSON campaign-config document used by the CLI."""
    doc = json.loads(text)
    try:
        dims = tuple(int(d) for d in doc["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"campaign config needs a 'dims' list: {exc}") from exc
    families = tuple(FamilyKind(k) for k in doc.get("families", ["family_ii"]))
    noise = NoiseSpec(**doc.get("noise", {}))
    pie = PieConfig(**doc.get("pie", {}))
    trials = doc.get("trials_per_dim", 20)
    if trials != PAPER_TRIALS:
        trials = int(trials)
    return CampaignConfig(
        dims=dims,
        families=families,
        trials_per_dim=trials,
        noise=noise,
        master_seed=int(doc.get("master_seed", 0)),
        pie=pie,
        output=doc.get("output"),
        threads=int(doc.get("threads", 1)),
    )


def purity_sweep(
    d: int,
    kind: FamilyKind,
    p_values,
    trials: int,
    master_seed: int = 0,
    pie: PieConfig | None = None,
    threads: int = 1,
) -> list[dict]:
    """Reconstruction quality against source purity.

    For each mixture weight p, generates exact mixed-state data and scores the
    estimate against the pure component. Returns one row per p with the
    resulting purity, mean fidelity, and convergence rate.
    """
    warm_up()
    rows = []
    for p in p_values:
        noise = NoiseSpec(kind="purity", p=float(p))
        cfg = CampaignConfig(
            dims=(d,),
            families=(kind,),
            trials_per_dim=trials,
            noise=noise,
            master_seed=master_seed,
            pie=pie if pie is not None else PieConfig(),
            threads=threads,
        )
        result = run_campaign(cfg)
        cell = result.summary["cells"][f"{kind.value}:d={d}"]
        rows.append(
            {
                "p": float(p),
                "purity": white_noise_purity(float(p), d),
                "mean_fidelity": cell["mean_fidelity"],
                "convergence_rate": cell["convergence_rate"],
            }
        )
    return rows
