"""Bundled test cases.

three fixtures ship with the package:

* ``two_bus``  - pedagogical 2-bus, 1-line, 2-unit case, 12 periods.
* ``six_bus``  - 6 buses, 7 lines, 8 units, 96 quarter-hour periods with
  one line rated just above its evening-peak flow.
* ``tight``    - 2-bus case engineered so aggregated commitments violate
  the network limit at original resolution (exercises the correction loop).
"""

from importlib import resources
from pathlib import Path

FIXTURES = ("two_bus", "six_bus", "tight")


def fixture_path(name: str) -> tuple[Path, Path]:
    """(case file, demand file) for a bundled fixture."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; have {FIXTURES}")
    root = resources.files("flexuc") / "fixtures"
    return Path(str(root / f"{name}.case")), Path(str(root / f"{name}.demand.csv"))


def load_fixture(name: str):
    from .caseio import load_case
    case_file, demand_file = fixture_path(name)
    return load_case(case_file, demand_file)
