"""Run configuration, grid parsing and CSV/JSON emitters."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import numpy as np

from ._validation import DomainError, check_half_integer
from .dynamics import TimeGrid
from .states import TruncationPolicy

__all__ = [
    "RunConfig",
    "SIMULATE_HEADER",
    "SWEEP_HEADER",
    "fmt_float",
    "parse_grid",
    "load_config_file",
    "rows_to_csv",
    "read_csv_rows",
    "rows_to_json",
    "atomic_write",
]

SIMULATE_HEADER = ("tau", "S_ion", "xi_R", "xi_q", "Jz_mean")
SWEEP_HEADER = ("param", "S_avg", "S_amp", "dxi_R", "dxi_q", "dJz", "xi_R_min", "xi_q_min")


@dataclass(frozen=True)
class RunConfig:
    n_ions: int = 2
    eta: float = 0.36
    m0: float = 0
    xi_q0: float = 0.6
    tau_max: float = 40.0
    d_tau: float = 0.02
    trunc_eps: float = TruncationPolicy.epsilon
    trunc_cap: int = TruncationPolicy.hard_cap
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        # re-validate everything the physics modules would reject later
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise DomainError(f"n_ions={self.n_ions!r} must be a positive integer")
        object.__setattr__(self, "n_ions", int(self.n_ions))
        m0 = check_half_integer(self.m0, "m0")
        j = Fraction(self.n_ions, 2)
        if m0 == 0 and j.denominator != 1:
            raise DomainError("m0 = 0 requires an even number of ions")
        if (j - m0).denominator != 1 or abs(m0) > j:
            raise DomainError(f"m0={self.m0} must be one of j, j-1, ..., -j with j={j}")
        object.__setattr__(self, "m0", int(m0) if m0.denominator == 1 else float(m0))
        if not 0.0 < float(self.eta) < 1.0:
            raise DomainError(f"eta={self.eta!r} must lie in (0, 1)")
        if not (float(self.xi_q0) > 0.0 and math.isfinite(self.xi_q0)):
            raise DomainError(f"xi_q={self.xi_q0!r} must be positive")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        TimeGrid(float(self.tau_max), float(self.d_tau))
        TruncationPolicy(float(self.trunc_eps), int(self.trunc_cap))

    @property
    def j(self) -> Fraction:
        return Fraction(self.n_ions, 2)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(float(self.tau_max), float(self.d_tau))

    @property
    def trunc(self) -> TruncationPolicy:
        return TruncationPolicy(float(self.trunc_eps), int(self.trunc_cap))

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_types(cls) -> dict[str, type]:
        types = {"n_ions": int, "trunc_cap": int, "output_path": str, "format": str}
        return {f.name: types.get(f.name, float) for f in fields(cls)}


def fmt_float(x: float) -> str:
    """17 significant digits; round-trips every double through ``float()``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def parse_grid(spec: str) -> np.ndarray:
    """``"min:max:step"`` to an inclusive uniform grid.

    Values are rounded to 12 decimals so ``0.05:0.95:0.01`` hits 0.36 exactly.
    """
    try:
        lo, hi, step = (float(p) for p in spec.split(":"))
    except ValueError as exc:
        raise DomainError(f"grid must look like min:max:step, got {spec!r}") from exc
    if not step > 0:
        raise DomainError("grid step must be positive")
    if hi < lo:
        raise DomainError("empty grid")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


_KEY_ALIASES = {"xi_q": "xi_q0", "output": "output_path", "trunc_epsilon": "trunc_eps"}


def load_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys allowed."""
    types = RunConfig.field_types()
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            key = _KEY_ALIASES.get(key, key)
            if key not in types:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = types[key](value)
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def read_csv_rows(text: str) -> tuple[list[str], list[tuple[float, ...]]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [tuple(float(v) for v in row) for row in reader]


def rows_to_json(meta: dict, header, rows) -> str:
    doc = {"meta": meta, "columns": list(header), "rows": [[float(v) for v in r] for r in rows]}
    return json.dumps(doc, indent=1) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".squeeze_dyn-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
