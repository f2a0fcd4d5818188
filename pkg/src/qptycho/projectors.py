"""Rank-r diagonal projector families and their validation.

A projector is stored as its support set (the selected basis levels), never
as a matrix: application is just masking. Two built-in families are provided,
both with rank r = ceil(d/2):

  FAMILY_I  : n = 5 projectors, shifts s_l = l * floor(d/5)   (d >= 5)
  FAMILY_II : n = d projectors, shifts s_l = l                (d >= 3)

Custom families go through the same validation gate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import ceil

import numpy as np

from .hilbert import as_state


class FamilyKind(str, Enum):
    FAMILY_I = "family_i"
    FAMILY_II = "family_ii"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RankProjector:
    """Diagonal binary projector selecting `support` out of d basis levels."""

    dim: int
    support: tuple[int, ...]
    shift: int = 0

    def __post_init__(self):
        if len(set(self.support)) != len(self.support):
            raise ValueError("projector support contains duplicate indices")
        if any(not 0 <= j < self.dim for j in self.support):
            raise ValueError("projector support index out of range")
        if not 1 < len(self.support) < self.dim:
            raise ValueError(
                f"projector rank must satisfy 1 < r < d, got r={len(self.support)}, d={self.dim}"
            )

    @property
    def rank(self) -> int:
        return len(self.support)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[list(self.support)] = True
        return m


@dataclass(frozen=True)
class ProjectorFamily:
    dim: int
    kind: FamilyKind
    projectors: tuple[RankProjector, ...]

    def __post_init__(self):
        if any(p.dim != self.dim for p in self.projectors):
            raise ValueError("projector dimension does not match family dimension")

    @property
    def n(self) -> int:
        return len(self.projectors)

    def masks(self) -> np.ndarray:
        """n x d boolean mask matrix, row l = support of projector l."""
        return _family_masks(self)


@lru_cache(maxsize=None)
def _family_masks(family: ProjectorFamily) -> np.ndarray:
    m = np.stack([p.mask() for p in family.projectors])
    m.setflags(write=False)
    return m


def _window(d: int, shift: int, r: int) -> tuple[int, ...]:
    return tuple((j + shift) % d for j in range(r))


def build_family(d: int, kind: FamilyKind) -> ProjectorFamily:
    """Build one of the two canonical families at dimension d.

    FAMILY_I is rejected for d < 5: floor(d/5) = 0 would collapse all five
    projectors onto the same support, destroying data diversity.
    """
    kind = FamilyKind(kind)
    if d < 3:
        raise ValueError(f"projector families require d >= 3, got {d}")
    r = ceil(d / 2)
    if kind is FamilyKind.FAMILY_I:
        if d < 5:
            raise ValueError(f"FAMILY_I requires d >= 5 (floor(d/5) >= 1), got {d}")
        skip = d // 5
        shifts = [ell * skip for ell in range(5)]
    elif kind is FamilyKind.FAMILY_II:
        shifts = list(range(d))
    else:
        raise ValueError("build_family only constructs FAMILY_I and FAMILY_II")
    projs = tuple(RankProjector(d, _window(d, s, r), shift=s) for s in shifts)
    return ProjectorFamily(d, kind, projs)


def apply_projector(p: RankProjector, psi: np.ndarray) -> np.ndarray:
    """P |psi>: keep amplitudes on the support, zero elsewhere (unnormalized)."""
    psi = as_state(psi, dim=p.dim)
    out = np.zeros_like(psi)
    idx = list(p.support)
    out[idx] = psi[idx]
    return out


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    coverage: tuple[int, ...]          # times each level appears in a support
    overlap_partners: tuple[int, ...]  # per projector, count of overlapping partners
    problems: tuple[str, ...] = field(default=())


@lru_cache(maxsize=None)
def validate_set(family: ProjectorFamily) -> ValidationReport:
    """Check the two structural requirements on a projector set.

    (a) every level of the space is addressed by at least one projector;
    (b) every projector overlaps (shares a level) with at least one other.
    """
    d = family.dim
    masks = family.masks()
    coverage = masks.sum(axis=0)
    problems = []
    uncovered = np.flatnonzero(coverage == 0)
    if uncovered.size:
        problems.append(f"levels never addressed: {uncovered.tolist()}")
    partners = np.zeros(family.n, dtype=int)
    for i in range(family.n):
        for j in range(family.n):
            if i != j and bool(np.any(masks[i] & masks[j])):
                partners[i] += 1
    isolated = np.flatnonzero(partners == 0)
    if family.n < 2:
        problems.append("a family needs at least two projectors")
    elif isolated.size:
        problems.append(f"projectors with no overlapping partner: {isolated.tolist()}")
    return ValidationReport(
        ok=not problems,
        coverage=tuple(int(c) for c in coverage),
        overlap_partners=tuple(int(c) for c in partners),
        problems=tuple(problems),
    )


# ---------------------------------------------------------------------------
# JSON serialization: pins the exact projector set used by a campaign or an
# ingested experimental dataset.
# ---------------------------------------------------------------------------

def family_to_dict(family: ProjectorFamily) -> dict:
    return {
        "dim": family.dim,
        "kind": family.kind.value,
        "supports": [list(p.support) for p in family.projectors],
        "shifts": [p.shift for p in family.projectors],
    }


def family_from_dict(doc: dict) -> ProjectorFamily:
    try:
        dim = int(doc["dim"])
        kind = FamilyKind(doc["kind"])
        supports = doc["supports"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"malformed projector-family document: {exc}") from exc
    shifts = doc.get("shifts", [0] * len(supports))
    projs = tuple(
        RankProjector(dim, tuple(int(j) for j in sup), shift=int(sh))
        for sup, sh in zip(supports, shifts)
    )
    return ProjectorFamily(dim, kind, projs)


def family_to_json(family: ProjectorFamily) -> str:
    return json.dumps(family_to_dict(family), indent=2)


def family_from_json(text: str) -> ProjectorFamily:
    return family_from_dict(json.loads(text))
