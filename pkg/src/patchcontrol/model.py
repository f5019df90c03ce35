"""Domain model: zones, patch layouts, staged systems, verdicts.

A layout describes a one-dimensional habitat split into a beneficial zone
of width ``R`` and a control zone of width ``r``, repeated ``K`` times for
periodic boundaries.  Zones are either scalar (one diffusion coefficient,
one net growth rate) or staged (diagonal diffusion matrix plus a square
reaction matrix coupling the life stages).

All types are immutable after validation and safe to share across threads.
The core is dimensionless; presets document their units (km, month or year).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

MAX_STAGES = 8

#: Default half-width of the marginal band around a zero margin, in the
#: natural units of the deciding inequality.
MARGINAL_TOL = 1e-9


class LayoutError(ValueError):
    """Invalid layout or scenario.  ``code`` names the violated invariant."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class BoundaryCondition(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, name: str) -> "BoundaryCondition":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise LayoutError(
                "UnknownBoundaryCondition",
                f"expected one of dirichlet|neumann|periodic, got {name!r}",
            ) from None


class VerdictStatus(Enum):
    ERADICATION = "Eradication"
    SURVIVAL = "Survival"
    MARGINAL = "Marginal"


class SpectralMethod(Enum):
    DISPERSION_ROOT = "DispersionRoot"
    FINITE_DIFFERENCE = "FiniteDifference"
    SIMULATION_SLOPE = "SimulationSlope"


@dataclass(frozen=True)
class ScalarZone:
    """Homogeneous zone with scalar diffusion and signed net growth.

    ``growth`` is positive in a beneficial zone and negative (``-mu``) in a
    control zone; storing the signed rate avoids double-negation mistakes
    between the scalar and staged criteria.
    """

    diffusion: float
    growth: float

    @property
    def dimension(self) -> int:
        return 1


@dataclass(frozen=True)
class StageZone:
    """Homogeneous zone of a staged system: diagonal diffusion + reaction matrix."""

    diffusion_diag: np.ndarray
    reaction: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "diffusion_diag", np.atleast_1d(np.asarray(self.diffusion_diag, dtype=float))
        )
        object.__setattr__(self, "reaction", np.atleast_2d(np.asarray(self.reaction, dtype=float)))

    @property
    def dimension(self) -> int:
        return len(self.diffusion_diag)


Zone = Union[ScalarZone, StageZone]


@dataclass(frozen=True)
class BirthDeathParams:
    """Per-stage death rates and maturation/fecundity rates of a cyclic life cycle."""

    deaths: np.ndarray
    births: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "deaths", np.atleast_1d(np.asarray(self.deaths, dtype=float)))
        object.__setattr__(self, "births", np.atleast_1d(np.asarray(self.births, dtype=float)))
        if len(self.deaths) != len(self.births):
            raise LayoutError("DimensionMismatch", "deaths and births must have equal length")
        if len(self.deaths) < 1 or len(self.deaths) > MAX_STAGES:
            raise LayoutError("StageCountOutOfRange", f"need 1..{MAX_STAGES} stages")
        if np.any(self.deaths <= 0) or np.any(self.births <= 0):
            raise LayoutError("NonpositiveRate", "all death and birth rates must be > 0")

    @property
    def dimension(self) -> int:
        return len(self.deaths)


@dataclass(frozen=True)
class PatchLayout:
    """Full arrangement: beneficial/control zone pair, widths, repetitions, boundary."""

    beneficial: Zone
    control: Zone
    R: float
    r: float
    K: int = 1
    bc: BoundaryCondition = BoundaryCondition.PERIODIC

    @property
    def dimension(self) -> int:
        return self.beneficial.dimension

    @property
    def is_scalar(self) -> bool:
        return isinstance(self.beneficial, ScalarZone)

    @property
    def period(self) -> float:
        return self.R + self.r

    @property
    def total_length(self) -> float:
        if self.bc is BoundaryCondition.PERIODIC:
            return self.K * (self.R + self.r)
        return self.R + self.r


@dataclass(frozen=True)
class Verdict:
    """Trichotomy outcome with the signed slack of the deciding inequality.

    ``margin > 0`` means strictly inside the eradication region;
    ``status`` is Marginal when ``abs(margin) <= marginal_tol``.
    """

    status: VerdictStatus
    margin: float
    deciding_rule: str

    @staticmethod
    def from_margin(margin: float, deciding_rule: str, marginal_tol: float = MARGINAL_TOL) -> "Verdict":
        if abs(margin) <= marginal_tol:
            status = VerdictStatus.MARGINAL
        elif margin > 0:
            status = VerdictStatus.ERADICATION
        else:
            status = VerdictStatus.SURVIVAL
        return Verdict(status=status, margin=float(margin), deciding_rule=deciding_rule)


@dataclass(frozen=True)
class SpectralReport:
    """Top-eigenvalue estimate with a method tag and a refinement error bound."""

    top_eigenvalue: float
    method: SpectralMethod
    error_estimate: float
    grid_or_step: str = ""

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be >= 0")


def _validate_zone(zone: Zone, which: str) -> None:
    if isinstance(zone, ScalarZone):
        if not np.isfinite(zone.diffusion) or zone.diffusion <= 0:
            raise LayoutError("NonpositiveDiffusion", f"{which} zone diffusion must be > 0")
        if not np.isfinite(zone.growth):
            raise LayoutError("NonfiniteGrowth", f"{which} zone growth must be finite")
        return
    if isinstance(zone, StageZone):
        n = zone.dimension
        if n < 1 or n > MAX_STAGES:
            raise LayoutError("StageCountOutOfRange", f"{which} zone needs 1..{MAX_STAGES} stages")
        if zone.reaction.shape != (n, n):
            raise LayoutError(
                "DimensionMismatch",
                f"{which} zone reaction matrix must be {n}x{n}, got {zone.reaction.shape}",
            )
        if not np.all(np.isfinite(zone.diffusion_diag)) or np.any(zone.diffusion_diag <= 0):
            raise LayoutError("NonpositiveDiffusion", f"{which} zone diffusion entries must be > 0")
        if not np.all(np.isfinite(zone.reaction)):
            raise LayoutError("NonfiniteGrowth", f"{which} zone reaction matrix must be finite")
        return
    raise LayoutError("UnknownZoneType", f"{which} zone has unsupported type {type(zone)!r}")


def validate_layout(layout: PatchLayout) -> PatchLayout:
    """Check all layout invariants; return the layout unchanged if they hold.

    Raises ``LayoutError`` with a distinct ``code`` for each violated invariant.
    Idempotent: validating a validated layout is a no-op.
    """
    _validate_zone(layout.beneficial, "beneficial")
    _validate_zone(layout.control, "control")
    if type(layout.beneficial) is not type(layout.control):
        raise LayoutError("MixedZoneKinds", "beneficial and control zones must be both scalar or both staged")
    if layout.beneficial.dimension != layout.control.dimension:
        raise LayoutError(
            "DimensionMismatch",
            f"beneficial dimension {layout.beneficial.dimension} != control dimension {layout.control.dimension}",
        )
    if not np.isfinite(layout.R) or layout.R <= 0:
        raise LayoutError("NonpositiveWidth", "beneficial width R must be > 0")
    if not np.isfinite(layout.r) or layout.r < 0:
        raise LayoutError("NegativeWidth", "control width r must be >= 0")
    if int(layout.K) != layout.K or layout.K < 1:
        raise LayoutError("InvalidPatchCount", "K must be an integer >= 1")
    if layout.bc is not BoundaryCondition.PERIODIC and layout.K != 1:
        raise LayoutError("InvalidPatchCount", "Dirichlet/Neumann layouts require K = 1")
    return layout


# ---------------------------------------------------------------------------
# Scenario files (JSON)
# ---------------------------------------------------------------------------

_TOP_KEYS = {"model", "beneficial", "control", "R", "r", "K", "bc"}
_SCALAR_ZONE_KEYS = {"diffusion", "growth"}
_STAGED_ZONE_KEYS = {"A_diag", "M", "births", "deaths"}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise LayoutError("UnknownKey", f"unknown key(s) {sorted(unknown)} in {where}")


def _zone_from_dict(d: dict, model: str, which: str) -> Zone:
    if not isinstance(d, dict):
        raise LayoutError("InvalidScenario", f"{which} must be an object")
    if model == "scalar":
        _reject_unknown(d, _SCALAR_ZONE_KEYS, f"{which} zone")
        try:
            return ScalarZone(diffusion=float(d["diffusion"]), growth=float(d["growth"]))
        except KeyError as exc:
            raise LayoutError("MissingKey", f"{which} zone missing {exc}") from None
    _reject_unknown(d, _STAGED_ZONE_KEYS, f"{which} zone")
    if "A_diag" not in d:
        raise LayoutError("MissingKey", f"{which} zone missing 'A_diag'")
    if "M" in d:
        if "births" in d or "deaths" in d:
            raise LayoutError("InvalidScenario", f"{which} zone: give either 'M' or births/deaths, not both")
        reaction = np.asarray(d["M"], dtype=float)
    elif "births" in d and "deaths" in d:
        from .staged import build_stage_matrix  # local import avoids a cycle

        reaction = build_stage_matrix(BirthDeathParams(deaths=d["deaths"], births=d["births"]))
    else:
        raise LayoutError("MissingKey", f"{which} zone needs 'M' or both 'births' and 'deaths'")
    return StageZone(diffusion_diag=np.asarray(d["A_diag"], dtype=float), reaction=reaction)


def scenario_from_dict(data: dict) -> PatchLayout:
    """Build and validate a layout from a parsed scenario document."""
    if not isinstance(data, dict):
        raise LayoutError("InvalidScenario", "scenario must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario")
    model = str(data.get("model", "scalar")).lower()
    if model not in ("scalar", "staged"):
        raise LayoutError("InvalidScenario", f"model must be 'scalar' or 'staged', got {model!r}")
    try:
        beneficial = _zone_from_dict(data["beneficial"], model, "beneficial")
        control = _zone_from_dict(data["control"], model, "control")
        R = float(data["R"])
        r = float(data["r"])
    except KeyError as exc:
        raise LayoutError("MissingKey", f"scenario missing {exc}") from None
    layout = PatchLayout(
        beneficial=beneficial,
        control=control,
        R=R,
        r=r,
        K=int(data.get("K", 1)),
        bc=BoundaryCondition.parse(data.get("bc", "periodic")),
    )
    return validate_layout(layout)


def _zone_to_dict(zone: Zone) -> dict:
    if isinstance(zone, ScalarZone):
        return {"diffusion": zone.diffusion, "growth": zone.growth}
    return {"A_diag": zone.diffusion_diag.tolist(), "M": zone.reaction.tolist()}


def scenario_to_dict(layout: PatchLayout) -> dict:
    """Serialize a layout to the scenario document structure."""
    return {
        "model": "scalar" if layout.is_scalar else "staged",
        "beneficial": _zone_to_dict(layout.beneficial),
        "control": _zone_to_dict(layout.control),
        "R": layout.R,
        "r": layout.r,
        "K": int(layout.K),
        "bc": layout.bc.value,
    }


def load_scenario(path: str) -> PatchLayout:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def dump_scenario(layout: PatchLayout, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(layout), fh, indent=2, sort_keys=True)
        fh.write("\n")


def layouts_equal(x: PatchLayout, y: PatchLayout) -> bool:
    """Field-by-field equality, exact on every numeric entry."""
    if x.is_scalar != y.is_scalar or x.bc is not y.bc:
        return False
    if (x.R, x.r, x.K) != (y.R, y.r, y.K):
        return False
    if x.is_scalar:
        return (
            x.beneficial.diffusion == y.beneficial.diffusion
            and x.beneficial.growth == y.beneficial.growth
            and x.control.diffusion == y.control.diffusion
            and x.control.growth == y.control.growth
        )
    return (
        np.array_equal(x.beneficial.diffusion_diag, y.beneficial.diffusion_diag)
        and np.array_equal(x.beneficial.reaction, y.beneficial.reaction)
        and np.array_equal(x.control.diffusion_diag, y.control.diffusion_diag)
        and np.array_equal(x.control.reaction, y.control.reaction)
    )
