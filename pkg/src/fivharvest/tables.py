"""CSV tables with round-trip exact number formatting."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

SCHEMAS = {
    "timeseries": ("T", "X", "V", "Q", "I", "mode", "U", "P"),
    "equilibria": ("X_star", "stability", "local_stiffness"),
    "bifurcation": ("set", "alpha", "beta"),
    "amplitude": ("Omega", "branch", "A_X", "source"),
    "sweep": ("case", "param", "value", "Q_rms", "I_rms", "U_rms", "P_avg"),
    "portrait": ("X", "V", "H"),
    "force": ("X", "F_s", "K"),
    "friction": ("V_r", "F_lo", "F_hi"),
    "potential": ("X", "PEN"),
    "codim2": ("plane_value", "xi", "region"),
    "cycles": ("cycle", "period", "amplitude", "mean_X", "X_min", "X_max", "stick_fraction"),
}


def format_value(v) -> str:
    if isinstance(v, str):
        if any(c in v for c in ',"\n\r'):
            raise ValueError(f"cell {v!r} needs quoting; not allowed in numeric tables")
        return v
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


@dataclass
class CsvTable:
    schema: str
    rows: list[tuple] = field(default_factory=list)

    @property
    def header(self) -> tuple[str, ...]:
        return SCHEMAS[self.schema]

    def __post_init__(self) -> None:
        if self.schema not in SCHEMAS:
            raise ValueError(f"unknown schema {self.schema!r}")

    def append(self, *row) -> None:
        if len(row) != len(self.header):
            raise ValueError(f"{self.schema} row has {len(row)} cells, header has {len(self.header)}")
        self.rows.append(row)

    def render(self) -> str:
        lines = [",".join(self.header)]
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(f"{self.schema} row has {len(row)} cells, header has {len(self.header)}")
            lines.append(",".join(format_value(v) for v in row))
        return "\n".join(lines) + "\n"


def write_csv(table: CsvTable, path: str | os.PathLike) -> Path:
    path = Path(path)
    data = table.render().encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path: str | os.PathLike) -> tuple[tuple[str, ...], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")[:-1]
    return tuple(lines[0].split(",")), [ln.split(",") for ln in lines[1:]]
