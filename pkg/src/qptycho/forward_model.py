"""Measurement-data generation and dataset assembly.

The forward model produces, for each projector P_l, the Fourier-basis
probabilities of the sliced state P_l |psi>, optionally degraded by photon
shot noise or computed from a mixed input. The reconstruction engine consumes
the square roots of those intensities, assembled into a PtychographicDataset.

All intensities live on the probability scale (counts are divided by the
exposure on assembly), so a normalized initial estimate matches the data
scale by construction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import as_state, check_density_matrix, dft_matrix, qft_inverse
from .projectors import (
    FamilyKind,
    ProjectorFamily,
    build_family,
    family_from_json,
)

CSV_MAGIC = "# ptycho-dataset v1"


@dataclass(frozen=True)
class Provenance:
    kind: str                      # "exact" | "sampled" | "ingested"
    seed: int | None = None
    exposure: float | None = None
    source: str | None = None
    clamped: int = 0               # negative raw values clamped to zero
    scale: float = 1.0             # calibration applied to raw intensities


@dataclass(frozen=True)
class PtychographicDataset:
    amplitudes: np.ndarray         # n x d, a_{lj} = I_{lj}^{1/2}
    family: ProjectorFamily
    provenance: Provenance

    def __post_init__(self):
        a = self.amplitudes
        if a.shape != (self.family.n, self.family.dim):
            raise ValueError(
                f"amplitude grid shape {a.shape} does not match family "
                f"(n={self.family.n}, d={self.family.dim})"
            )
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValueError("amplitudes must be finite and nonnegative")

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def dim(self) -> int:
        return self.family.dim


def ideal_probabilities(psi: np.ndarray, family: ProjectorFamily) -> np.ndarray:
    """Exact Fourier-basis probabilities p_{lk} = |(F^dag P_l psi)_k|^2.

    Row sums equal ||P_l psi||^2, so the grid total for FAMILY_II is exactly
    the rank r = ceil(d/2) for any normalized input.
    """
    psi = as_state(psi, dim=family.dim)
    masks = family.masks()
    sliced = np.where(masks, psi[np.newaxis, :], 0.0)
    Fh = dft_matrix(family.dim).conj().T
    return np.abs(sliced @ Fh.T) ** 2


def mixed_probabilities(rho: np.ndarray, family: ProjectorFamily) -> np.ndarray:
    """Born-rule probabilities p_{lk} = <f_k| P_l rho P_l |f_k> for mixed inputs.

    Reduces to ideal_probabilities when rho is the rank-1 projector onto psi.
    """
    rho = check_density_matrix(rho)
    d = family.dim
    if rho.shape[0] != d:
        raise ValueError(f"density matrix dim {rho.shape[0]} != family dim {d}")
    F = dft_matrix(d)
    masks = family.masks()
    out = np.empty((family.n, d))
    for ell, m in enumerate(masks):
        sliced = np.where(np.outer(m, m), rho, 0.0)
        out[ell] = np.einsum("jk,jl,lk->k", F.conj(), sliced, F).real
    return out


def sample_counts(
    probabilities: np.ndarray, exposure: float, rng: np.random.Generator
) -> np.ndarray:
    """Independent Poisson counts with mean exposure * p_{lk} per detector bin.

    Each projector preparation is its own sub-ensemble, so per-bin Poisson
    statistics also absorb the probability mass lost to the projection.
    """
    if exposure <= 0:
        raise ValueError(f"exposure must be positive, got {exposure}")
    probabilities = np.asarray(probabilities, dtype=float)
    return rng.poisson(exposure * probabilities)


def assemble_dataset(
    raw: np.ndarray,
    family: ProjectorFamily,
    provenance: Provenance | None = None,
    exposure: float | None = None,
) -> PtychographicDataset:
    """Turn raw intensities (probabilities or counts) into amplitude data.

    Counts are divided by the exposure first so exact and sampled datasets
    share the probability scale. Negative values (possible in ingested,
    background-subtracted data) are clamped to zero and counted.
    """
    raw = np.asarray(raw, dtype=float)
    if provenance is None:
        provenance = Provenance(kind="exact")
    if provenance.kind == "sampled":
        if exposure is None:
            exposure = provenance.exposure
        if exposure is None:
            raise ValueError("sampled datasets require an exposure")
        raw = raw / exposure
        provenance = replace(provenance, exposure=float(exposure))
    negatives = int(np.count_nonzero(raw < 0))
    if negatives:
        raw = np.clip(raw, 0.0, None)
        provenance = replace(provenance, clamped=provenance.clamped + negatives)
    return PtychographicDataset(np.sqrt(raw), family, provenance)


def dataset_from_state(
    psi: np.ndarray,
    family: ProjectorFamily,
    exposure: float | None = None,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> PtychographicDataset:
    """Convenience: exact dataset for psi, or shot-noise sampled if exposure set."""
    probs = ideal_probabilities(psi, family)
    if exposure is None:
        return assemble_dataset(probs, family, Provenance(kind="exact"))
    if rng is None:
        rng = np.random.default_rng(seed)
    counts = sample_counts(probs, exposure, rng)
    prov = Provenance(kind="sampled", seed=seed, exposure=float(exposure))
    return assemble_dataset(counts, family, prov, exposure=exposure)


# ---------------------------------------------------------------------------
# CSV interchange
#
# Header: "# ptycho-dataset v1, d=<d>, n=<n>, family=<kind>, scale=<float>"
# followed by n rows of d comma-separated intensities (row = projector,
# column = detector). Amplitudes are derived on ingest, never stored.
# ---------------------------------------------------------------------------

class DatasetParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def export_csv(dataset: PtychographicDataset, stream) -> None:
    """Write the dataset intensities; round-trips amplitudes bit-exactly."""
    kind = dataset.family.kind.value
    scale = dataset.provenance.scale
    stream.write(f"{CSV_MAGIC}, d={dataset.dim}, n={dataset.n}, family={kind}, scale={scale!r}\n")
    for row in dataset.amplitudes:
        stream.write(",".join(repr(float(a * a)) for a in row) + "\n")


def export_csv_path(dataset: PtychographicDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        export_csv(dataset, fh)


def _parse_header(line: str) -> dict:
    if not line.startswith(CSV_MAGIC):
        raise DatasetParseError(
            f"missing dataset header (expected a line starting with {CSV_MAGIC!r})", line=1
        )
    fields = {}
    for part in line[len(CSV_MAGIC):].split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DatasetParseError(f"malformed header field {part!r}", line=1)
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        return {
            "d": int(fields["d"]),
            "n": int(fields["n"]),
            "family": fields["family"],
            "scale": float(fields.get("scale", "1.0")),
        }
    except (KeyError, ValueError) as exc:
        raise DatasetParseError(f"bad header: {exc}", line=1) from exc


def ingest_csv(
    source,
    family: ProjectorFamily | None = None,
    calibration: float | None = None,
    source_id: str = "csv",
) -> PtychographicDataset:
    """Read a dataset CSV (path, text, or stream).

    The projector family is rebuilt from the header for the two canonical
    kinds; custom families must be supplied explicitly (e.g., from their JSON
    sidecar). `calibration` overrides the header scale; intensities are
    multiplied by the final scale before the square root.
    """
    if isinstance(source, str) and "\n" in source:
        stream = io.StringIO(source)
    elif isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        stream = open(source, "r", encoding="utf-8")
    else:
        stream = source
    try:
        lines = stream.read().splitlines()
    finally:
        if hasattr(stream, "close"):
            stream.close()
    if not lines:
        raise DatasetParseError("empty input", line=1)
    header = _parse_header(lines[0])
    d, n = header["d"], header["n"]
    kind = header["family"]
    if family is None:
        try:
            family_kind = FamilyKind(kind)
        except ValueError:
            raise DatasetParseError(f"unknown family kind {kind!r}", line=1) from None
        if family_kind is FamilyKind.CUSTOM:
            raise DatasetParseError(
                "custom families need an explicit family argument (JSON sidecar)", line=1
            )
        family = build_family(d, family_kind)
    if family.dim != d or family.n != n:
        raise DatasetParseError(
            f"family (n={family.n}, d={family.dim}) does not match header (n={n}, d={d})",
            line=1,
        )
    rows = []
    data_lines = [(i + 1, ln) for i, ln in enumerate(lines) if i > 0 and ln.strip()]
    if len(data_lines) != n:
        raise DatasetParseError(f"expected {n} data rows, found {len(data_lines)}")
    for lineno, line in data_lines:
        cells = line.split(",")
        if len(cells) != d:
            raise DatasetParseError(
                f"expected {d} columns, found {len(cells)}", line=lineno
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DatasetParseError(f"non-numeric value: {exc}", line=lineno) from exc
    raw = np.asarray(rows)
    scale = header["scale"] if calibration is None else float(calibration)
    prov = Provenance(kind="ingested", source=source_id, scale=scale)
    return assemble_dataset(raw * scale, family, prov)


def family_from_sidecar(path) -> ProjectorFamily:
    with open(path, "r", encoding="utf-8") as fh:
        return family_from_json(fh.read())
