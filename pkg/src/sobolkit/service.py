"""HTTP facade over a campaign directory for the interactive console.

Read endpoints serve snapshots of the last committed campaign state; the
single mutating endpoint runs one second-stage step at a time (stepping is
strictly single-flight, concurrent requests get 409).  Every transition is
also appended to the campaign's event log, which the console polls.
"""

from __future__ import annotations

import threading
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .campaign import (CampaignState, candidates, close_campaign, exit_hint,
                       load_campaign, stage_two_step)
from .errors import PreconditionError
from .estimators import SobolEstimate
from .runner import CampaignStore


class StepRequest(BaseModel):
    index: int


def _estimate_json(est: SobolEstimate, reestimated: bool, name: str) -> dict:
    return {**est.to_json(), "name": name, "reestimated": reestimated}


def snapshot(state: CampaignState, stepping: bool) -> dict:
    names = state.spec.input_names
    done = set(state.reestimated)
    pool = candidates(state) if state.stage in ("stage1_done", "stage2_active") else []
    n = state.spec.n
    return {
        "stage": state.stage,
        "n": n,
        "d": state.spec.d,
        "seed": state.spec.seed,
        "input_names": names,
        "estimates": [
            _estimate_json(state.current(i), i in done, names[i - 1])
            for i in sorted(state.estimates)],
        "totals": [_estimate_json(est, True, names[i - 1])
                   for i, est in sorted(state.totals.items())],
        "candidates": pool,
        "reestimated": list(state.reestimated),
        "exit_hint": exit_hint(state),
        "thresholds": state.thresholds.to_json(),
        "ledger": {
            "total": state.ledger.total,
            "step_cost": n,
            "saltelli_bound": n * (state.spec.d + 2),
            "projected_if_all_candidates": state.ledger.total + n * len(pool),
        },
        "step_count": state.step_count,
        "stepping": stepping,
    }


def create_app(campaign_dir) -> FastAPI:
    store = CampaignStore(campaign_dir)
    state = load_campaign(store)
    app = FastAPI(title="sobolkit campaign console")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    step_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/state")
    def get_state():
        return snapshot(state, stepping=step_lock.locked())

    @app.post("/step")
    def post_step(body: StepRequest):
        if state.stage == "closed":
            return JSONResponse(status_code=409,
                                content={"detail": "campaign is closed"})
        if not step_lock.acquire(blocking=False):
            return JSONResponse(status_code=409,
                                content={"detail": "a step is already in flight"})
        try:
            if body.index not in candidates(state):
                return JSONResponse(
                    status_code=422,
                    content={"detail": f"input {body.index} is not a candidate"})
            stage_two_step(state, body.index)
        finally:
            step_lock.release()
        return snapshot(state, stepping=False)

    @app.post("/exit")
    def post_exit():
        try:
            close_campaign(state)
        except PreconditionError as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        return snapshot(state, stepping=False)

    @app.get("/events")
    def get_events(after: int = -1, wait: float = 0.0):
        deadline = time.monotonic() + min(wait, 30.0)
        while True:
            events = store.read_events(after)
            if events or time.monotonic() >= deadline:
                next_seq = events[-1]["seq"] if events else after
                return {"events": events, "next": next_seq}
            time.sleep(0.1)

    return app
