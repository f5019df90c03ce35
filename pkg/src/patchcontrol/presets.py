"""Built-in scenario presets from published field estimates.

``lone-star``: the lone star tick of the southern US; units km and month
(diffusion 16.67 km^2/month from deer-ride displacement, net growth
0.65/month), with a 14 km beneficial zone and a 1 km control zone.

``taiga-one-stage``: the taiga tick averaged over its life cycle; units km
and year (diffusion 50 km^2/year, net growth 2/year).

``taiga-two-stage``: the taiga tick split into pre-adult and adult stages;
units km and year.  The stage matrix is stored in diffusion-normalized form
(per-stage rates divided by the stage diffusion 1.1 resp. 50 km^2/year,
rounded to the published two decimals), so the diffusion diagonal is the
identity.  The default control zone applies a proportional birth reduction
(factor 0.25) with raised death rates (1.7, 0.8), strong enough to eradicate
at the default 40 km / 1 km patch pair.
"""

from __future__ import annotations

from .model import PatchLayout, scenario_from_dict

_PRESETS: dict[str, dict] = {
    "lone-star": {
        "model": "scalar",
        "beneficial": {"diffusion": 16.67, "growth": 0.65},
        "control": {"diffusion": 16.67, "growth": -10.0},
        "R": 14.0,
        "r": 1.0,
        "K": 1,
        "bc": "periodic",
    },
    "taiga-one-stage": {
        "model": "scalar",
        "beneficial": {"diffusion": 50.0, "growth": 2.0},
        "control": {"diffusion": 50.0, "growth": -10.0},
        "R": 14.0,
        "r": 1.0,
        "K": 1,
        "bc": "periodic",
    },
    "taiga-two-stage": {
        "model": "staged",
        "beneficial": {
            "A_diag": [1.0, 1.0],
            "M": [[-0.91, 2.24], [0.01, -0.02]],
        },
        "control": {
            "A_diag": [1.0, 1.0],
            "M": [[-1.7, 0.56], [0.0025, -0.8]],
        },
        "R": 40.0,
        "r": 1.0,
        "K": 1,
        "bc": "periodic",
    },
}

PRESET_NAMES = tuple(_PRESETS)


def preset_scenario(name: str) -> dict:
    """Deep copy of the named preset's scenario document."""
    try:
        base = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    import copy

    return copy.deepcopy(base)


def get_preset(name: str) -> PatchLayout:
    """Validated layout for the named preset."""
    return scenario_from_dict(preset_scenario(name))
