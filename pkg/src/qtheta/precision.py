"""Evaluation precision modes: binary64 (default) or mpmath extended."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import mpmath as mp


@dataclass(frozen=True)
class Precision:
    mode: str = "standard"
    dps: int = 30

    def __post_init__(self):
        if self.mode not in ("standard", "extended"):
            raise ValueError(f"unknown precision mode {self.mode!r}")

    @property
    def extended(self) -> bool:
        return self.mode == "extended"

    @contextmanager
    def ctx(self):
        if self.extended:
            with mp.workdps(self.dps):
                yield
        else:
            yield


STANDARD = Precision()
EXTENDED = Precision("extended", 30)


def from_name(name: str) -> Precision:
    return EXTENDED if name == "extended" else STANDARD
