"""Problem and result containers shared by all solvers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class SensingProblem:
    """A linear measurement model y = C x (+ noise of known sigma)."""

    c: np.ndarray
    y: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.complex128)
        y = np.asarray(self.y, dtype=np.complex128)
        if c.ndim != 2:
            raise DimensionMismatch(f"matrix must be 2-D, got ndim={c.ndim}")
        if y.ndim != 1 or y.shape[0] != c.shape[0]:
            raise DimensionMismatch(
                f"measurements must be 1-D of length {c.shape[0]}, got {y.shape}"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(y))):
            raise ValueError("non-finite problem data")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def n(self) -> int:
        return self.c.shape[1]


@dataclass
class RecoveryResult:
    """Outcome of one solver run on one problem instance."""

    solver: str
    n: int
    m: int
    x_hat: np.ndarray
    iterations: int
    termination: str
    wall_time_ms: float
    l1_trace: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "solver": self.solver,
            "n": int(self.n),
            "m": int(self.m),
            "iterations": int(self.iterations),
            "termination": self.termination,
            "wall_time_ms": float(self.wall_time_ms),
            "l1_trace": [float(v) for v in self.l1_trace],
            "x_hat": [[float(v.real), float(v.imag)] for v in self.x_hat],
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    def save_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json(indent=2))
            fh.write("\n")
