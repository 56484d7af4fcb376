"""Request and response models of the HTTP service.

Scenario documents travel as plain mappings and are validated by the
scenario parser on the server, so file-based and HTTP clients share one
validation path. ``T2`` uses the string ``"inf"`` for ideal memories
(JSON has no infinity literal).
"""

from __future__ import annotations

from pydantic import BaseModel, Field

__all__ = [
    "ScenarioRequest",
    "SlotModel",
    "RowModel",
    "TablesResponse",
    "SweepRequest",
    "SweepResponse",
    "ScheduleEntry",
    "RouteRequest",
    "EventModel",
    "RouteResponse",
    "ValidateRequest",
    "ValidationLineModel",
    "ValidateResponse",
    "FidelityRequest",
    "FidelityResponse",
    "QosResponse",
]


class ScenarioRequest(BaseModel):
    scenario: dict


class SlotModel(BaseModel):
    configuration: str
    degeneracy: int
    needs_memory: bool


class RowModel(BaseModel):
    slots: list[SlotModel]
    served_users: int
    channel_usage: list[int]


class TablesResponse(BaseModel):
    rows: list[RowModel]


class SweepRequest(BaseModel):
    scenario: dict
    figure: str


class SweepResponse(BaseModel):
    columns: list[str]
    rows: list[list[float | None]]


class ScheduleEntry(BaseModel):
    slot: int = Field(ge=0)
    user_id: str
    coding: str  # e.g. "n7" (QRS length 7) or "u7" (dimension-7 qudits)
    packet_size: int
    destination: str = "R"
    regime: str = "greedy"
    min_fidelity: float | None = None


class RouteRequest(BaseModel):
    scenario: dict
    schedule: list[ScheduleEntry]


class EventModel(BaseModel):
    slot: int
    kind: str
    user_id: str
    configuration: str | None = None
    fidelity: float | None = None
    reason: str | None = None


class RouteResponse(BaseModel):
    events: list[EventModel]


class ValidateRequest(BaseModel):
    scenario: dict
    trials: int = 1_000_000
    seed: int = 0


class ValidationLineModel(BaseModel):
    configuration: str
    analytic: float
    mc_mean: float
    std_error: float
    z_score: float
    trials: int
    seed: int


class ValidateResponse(BaseModel):
    passed: bool
    max_z: float
    threshold: float
    generator: str
    lines: list[ValidationLineModel]


class FidelityRequest(BaseModel):
    configuration: str  # label such as "5+2/n7" or "4+1/u7"
    p: list[float]
    dwell_s: list[float] | None = None
    T2: float | str = "inf"


class FidelityResponse(BaseModel):
    configuration: str
    fidelity: float
    loss: float
    needs_memory: bool


class QosResponse(BaseModel):
    bandwidth_per_slot: int
    delay_s: list[float]
    jitter_s: float
    dwell_s: list[float]
    transmission_p: list[float]
