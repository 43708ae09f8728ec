"""DC network model: buses, lines, PTDF shift factors, line flows.

Losses are ignored (pure DC). The PTDF matrix maps bus injections to line
flows: k = diag(1/x) @ A @ B^-1 on non-slack buses with the slack column
fixed at zero, where A is the line-bus incidence and B the reduced nodal
susceptance matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError, TopologyError


@dataclass(frozen=True)
class Bus:
    index: int
    load_share: float = 0.0
    name: str = ""


@dataclass(frozen=True)
class Line:
    index: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    limit_mw: float = np.inf

    def __post_init__(self):
        if self.reactance_pu <= 0:
            raise DomainError(f"line {self.index}: reactance must be positive")


@dataclass
class NetworkModel:
    """Buses, lines, slack designation and cached PTDF matrix."""

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    slack: int
    name: str = "network"
    ptdf: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        ids = [b.index for b in self.buses]
        if sorted(ids) != list(range(len(ids))):
            raise TopologyError("bus indices must be 0..n_buses-1")
        if self.slack not in ids:
            raise TopologyError(f"slack bus {self.slack} does not exist")
        for ln in self.lines:
            if ln.from_bus not in ids or ln.to_bus not in ids:
                raise TopologyError(f"line {ln.index}: endpoint bus missing")
        shares = sum(b.load_share for b in self.buses)
        if shares > 0 and abs(shares - 1.0) > 1e-9:
            raise TopologyError(f"bus load shares sum to {shares}, expected 1")
        self._check_connected()

    def _check_connected(self):
        n = len(self.buses)
        adj: list[set[int]] = [set() for _ in range(n)]
        for ln in self.lines:
            adj[ln.from_bus].add(ln.to_bus)
            adj[ln.to_bus].add(ln.from_bus)
        seen = {self.slack}
        stack = [self.slack]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise TopologyError(f"network is disconnected; unreachable buses {missing}")

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def load_shares(self) -> np.ndarray:
        return np.array([b.load_share for b in self.buses])

    def monitored_lines(self) -> list[Line]:
        """Lines with a finite MW limit (enter dispatch constraints)."""
        return [ln for ln in self.lines if np.isfinite(ln.limit_mw)]

    # -- DC machinery ------------------------------------------------------

    def compute_ptdf(self) -> np.ndarray:
        """Standard DC PTDF (line x bus); cached on the model."""
        if self.ptdf is not None:
            return self.ptdf
        n, m = self.n_buses, self.n_lines
        b_line = np.array([1.0 / ln.reactance_pu for ln in self.lines])
        incidence = np.zeros((m, n))
        for i, ln in enumerate(self.lines):
            incidence[i, ln.from_bus] = 1.0
            incidence[i, ln.to_bus] = -1.0
        b_bus = incidence.T @ (b_line[:, None] * incidence)
        keep = [b for b in range(n) if b != self.slack]
        reduced = b_bus[np.ix_(keep, keep)]
        try:
            inv = np.linalg.inv(reduced)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular reduced susceptance matrix: {exc}")
        ptdf = np.zeros((m, n))
        ptdf[:, keep] = (b_line[:, None] * incidence[:, keep]) @ inv
        self.ptdf = ptdf
        return ptdf

    def line_flow(self, injections) -> np.ndarray:
        """Per-line MW flows for a per-bus MW injection vector."""
        inj = np.asarray(injections, dtype=float)
        if inj.shape[-1] != self.n_buses:
            raise DomainError(
                f"expected {self.n_buses} injections, got shape {inj.shape}"
            )
        return inj @ self.compute_ptdf().T

    def plant_shift_factors(self, line: Line, plants) -> np.ndarray:
        """PTDF entries of each plant's bus on one line."""
        ptdf = self.compute_ptdf()
        return np.array([ptdf[line.index, p.bus] for p in plants])

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "slack": self.slack,
            "buses": [
                {"index": b.index, "load_share": b.load_share, "name": b.name}
                for b in self.buses
            ],
            "lines": [
                {
                    "index": ln.index,
                    "from": ln.from_bus,
                    "to": ln.to_bus,
                    "reactance_pu": ln.reactance_pu,
                    "limit_mw": None if np.isinf(ln.limit_mw) else ln.limit_mw,
                }
                for ln in self.lines
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkModel":
        buses = tuple(
            Bus(
                index=int(b["index"]),
                load_share=float(b.get("load_share", 0.0)),
                name=b.get("name", ""),
            )
            for b in d["buses"]
        )
        lines = tuple(
            Line(
                index=int(ln["index"]),
                from_bus=int(ln["from"]),
                to_bus=int(ln["to"]),
                reactance_pu=float(ln["reactance_pu"]),
                limit_mw=np.inf if ln.get("limit_mw") is None else float(ln["limit_mw"]),
            )
            for ln in d["lines"]
        )
        return cls(buses=buses, lines=lines, slack=int(d["slack"]), name=d.get("name", "network"))

    @classmethod
    def from_json_file(cls, path) -> "NetworkModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_json_file(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def compute_ptdf(net: NetworkModel) -> np.ndarray:
    """Module-level alias of :meth:`NetworkModel.compute_ptdf`."""
    return net.compute_ptdf()


def line_flow(net: NetworkModel, injections) -> np.ndarray:
    """Module-level alias of :meth:`NetworkModel.line_flow`."""
    return net.line_flow(injections)
