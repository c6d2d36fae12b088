from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict

from core.field_grid import PropagationReport
from core.units_params import DerivedParams


class ExitCode(int, Enum):
    OK = 0
    CHECK_FAILED = 1
    CONFIG_ERROR = 2


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


class ReportKV(BaseModel):
    """key=value summary written as report.kv (sorted keys)"""
    entries: Dict[str, str] = {}

    def add(self, values: Dict[str, object], prefix: str = ""):
        for key, value in values.items():
            if value is None:
                continue
            self.entries[f"{prefix}{key}"] = format_value(value)
        return self

    def add_report(self, report: PropagationReport):
        return self.add(report.model_dump())

    def add_derived(self, derived: DerivedParams):
        keys = ("d", "d_b", "d_B", "z_b", "z_B", "v_g", "g2n")
        return self.add({k: getattr(derived, k) for k in keys})

    def lines(self) -> List[str]:
        return [f"{key}={self.entries[key]}" for key in sorted(self.entries)]

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.lines()) + "\n")
        return path


def read_report(path: Union[str, Path]) -> Dict[str, str]:
    entries = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            entries[key] = value
    return entries


class CounterAnalyticRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    d_B: float
    phi_analytic: float
    phi_numeric: float
    eta_analytic: float
    eta_numeric: float


COUNTER_ANALYTIC_COLUMNS = ("d_B", "phi_analytic", "phi_numeric", "eta_analytic", "eta_numeric")


class CheckOutcome(BaseModel):
    passed: bool
    failures: List[str] = []
    detail: Optional[str] = None

    @property
    def exit_code(self) -> ExitCode:
        return ExitCode.OK if self.passed else ExitCode.CHECK_FAILED
