"""Solve outcome shared by the exact and heuristic methods."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .model import Partition

STATUSES = ("optimal", "feasible", "infeasible", "inconclusive")

TIMING_FIELDS = ("wall_time", "separation_time", "stage_times")


def _num(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x):
    if isinstance(x, str):
        return float(x)
    return x


@dataclass
class SolveResult:
    status: str
    objective: Optional[float]
    lower_bound: Optional[float]
    partition: Optional[Partition]
    wall_time: float = 0.0
    separation_time: float = 0.0
    cuts_added: int = 0
    nodes: int = 0
    settings: dict = field(default_factory=dict)
    instance_name: str = ""
    method: str = "exact"
    restarts: Optional[int] = None
    stage_times: Optional[dict] = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    def to_dict(self, timings: bool = True) -> dict:
        parts, roots = (None, None) if self.partition is None else self.partition.to_lists()
        doc = {
            "status": self.status,
            "objective": _num(self.objective),
            "lower_bound": _num(self.lower_bound),
            "parts": parts,
            "roots": roots,
            "wall_time": self.wall_time,
            "separation_time": self.separation_time,
            "cuts_added": self.cuts_added,
            "nodes": self.nodes,
            "settings": self.settings,
            "instance_name": self.instance_name,
            "method": self.method,
        }
        if self.method == "heuristic":
            doc["restarts"] = self.restarts
            doc["stage_times"] = self.stage_times
        if not timings:
            for key in TIMING_FIELDS:
                doc.pop(key, None)
        return doc

    def to_json(self, timings: bool = True) -> str:
        """Canonical JSON; with ``timings=False`` the wall-clock fields are dropped."""
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "SolveResult":
        partition = None
        if doc.get("parts") is not None:
            partition = Partition(tuple(frozenset(p) for p in doc["parts"]), tuple(doc["roots"]))
        return cls(
            status=doc["status"],
            objective=_unnum(doc.get("objective")),
            lower_bound=_unnum(doc.get("lower_bound")),
            partition=partition,
            wall_time=doc.get("wall_time", 0.0),
            separation_time=doc.get("separation_time", 0.0),
            cuts_added=doc.get("cuts_added", 0),
            nodes=doc.get("nodes", 0),
            settings=doc.get("settings", {}),
            instance_name=doc.get("instance_name", ""),
            method=doc.get("method", "exact"),
            restarts=doc.get("restarts"),
            stage_times=doc.get("stage_times"),
        )
