"""HTTP service wrapping the assignment toolkit.

Endpoints mirror the CLI subcommands (tables, sweep, route, validate)
plus unit operations for fidelity and QoS lookups. Scenario validation
errors map to 400; all computation is deterministic given the request.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..fidelity import (
    FidelityParams,
    configuration_fidelity,
    configuration_needs_memory,
    loss_metric,
    parse_coding_label,
    parse_config_label,
)
from ..montecarlo import GENERATOR_NAME
from ..netmodel import (
    ParameterError,
    aggregate_bandwidth,
    dwell_times,
    path_delay,
    transmission_probability,
)
from ..routersim import RouterState, UserRequest, event_record, run
from ..scenario import ScenarioError, parse_scenario, _parse_regime, _parse_t2
from ..sweeps import figure_table, tables_rows
from ..validate import run_validation
from . import schemas

__all__ = ["create_app", "app"]


def _scenario_or_400(doc: dict):
    try:
        return parse_scenario(doc)
    except (ScenarioError, ParameterError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(
        title="aqnet",
        version=__version__,
        description="QoS-aware channel assignment for aggregated quantum networks",
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/tables", response_model=schemas.TablesResponse)
    def tables(req: schemas.ScenarioRequest) -> schemas.TablesResponse:
        scn = _scenario_or_400(req.scenario)
        try:
            rows = tables_rows(scn)
        except (ScenarioError, ParameterError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.TablesResponse(
            rows=[
                schemas.RowModel(
                    slots=[
                        schemas.SlotModel(
                            configuration=cfg.label,
                            degeneracy=deg,
                            needs_memory=flag,
                        )
                        for (cfg, deg), flag in zip(row.slots, row.memory_flags)
                    ],
                    served_users=row.served_users,
                    channel_usage=list(row.channel_usage()),
                )
                for row in rows
            ]
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        scn = _scenario_or_400(req.scenario)
        try:
            table = figure_table(scn, req.figure)
        except (ScenarioError, ParameterError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.SweepResponse(
            columns=list(table.columns), rows=[list(r) for r in table.rows]
        )

    @app.post("/route", response_model=schemas.RouteResponse)
    def route(req: schemas.RouteRequest) -> schemas.RouteResponse:
        scn = _scenario_or_400(req.scenario)
        try:
            schedule = [
                (
                    entry.slot,
                    UserRequest(
                        user_id=entry.user_id,
                        destination=entry.destination,
                        coding=parse_coding_label(entry.coding),
                        packet_size=entry.packet_size,
                        regime=_parse_regime(entry.regime),
                        min_fidelity=entry.min_fidelity,
                    ),
                )
                for entry in req.schedule
            ]
            state = RouterState(
                route=scn.route, capacity=scn.capacity, receiver_T2_s=scn.T2_s
            )
            horizon = max([1] + [s + 1 for s, _ in schedule])
            events = run(state, schedule, slots=horizon)
        except (ScenarioError, ParameterError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.RouteResponse(
            events=[schemas.EventModel(**event_record(e)) for e in events]
        )

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        scn = _scenario_or_400(req.scenario)
        try:
            report = run_validation(scn, trials=req.trials, seed=req.seed)
        except (ScenarioError, ParameterError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.ValidateResponse(
            passed=report.passed,
            max_z=report.max_z,
            threshold=report.threshold,
            generator=GENERATOR_NAME,
            lines=[schemas.ValidationLineModel(**vars(line)) for line in report.lines],
        )

    @app.post("/fidelity", response_model=schemas.FidelityResponse)
    def fidelity(req: schemas.FidelityRequest) -> schemas.FidelityResponse:
        try:
            config = parse_config_label(req.configuration)
            dwell = req.dwell_s if req.dwell_s is not None else [0.0] * len(req.p)
            params = FidelityParams(
                p=tuple(req.p), dwell_s=tuple(dwell), T2_s=_parse_t2(req.T2)
            )
            fid = configuration_fidelity(config, params)
        except (ScenarioError, ParameterError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.FidelityResponse(
            configuration=config.label,
            fidelity=fid,
            loss=loss_metric(fid),
            needs_memory=configuration_needs_memory(config),
        )

    @app.post("/qos", response_model=schemas.QosResponse)
    def qos(req: schemas.ScenarioRequest) -> schemas.QosResponse:
        scn = _scenario_or_400(req.scenario)
        delays = [path_delay(p) for p in scn.route.paths]
        return schemas.QosResponse(
            bandwidth_per_slot=aggregate_bandwidth(scn.route),
            delay_s=delays,
            jitter_s=max(delays) - min(delays),
            dwell_s=list(dwell_times(scn.route)),
            transmission_p=[transmission_probability(p) for p in scn.route.paths],
        )

    return app


app = create_app()
