"""Access to the scenario files bundled with the package.

The bundles cover both robot models in the plane, the spatial double
integrator, and a four-landmark square layout suited to median queries
and isonormal traces.  Initial-state sets were tuned empirically: every
bundled start converges without FOV violations under the shipped gains
and timing.  No basin-of-attraction guarantee is implied.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .sim import Scenario, load_scenario

BUNDLED = ("di_planar", "di_spatial", "unicycle_planar", "square_trace")


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a bundled scenario JSON."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled scenario {name!r}; have {BUNDLED}")
    return Path(str(resources.files("homingvf").joinpath("data", f"{name}.json")))


def load_bundled_scenario(name: str) -> Scenario:
    return load_scenario(bundled_scenario_path(name))
