"""HTTP facade over the study service.

Endpoints (JSON, documented in docs/API.md):

* ``POST /api/pair``        issue a puzzle pair, returns the session token
* ``GET  /api/board/{slot}``current board view (``token`` query parameter)
* ``POST /api/guess``       submit four words for a slot
* ``POST /api/shuffle``     reshuffle a slot's remaining words
* ``POST /api/survey``      store the six-question survey
* ``GET  /api/health``      liveness probe

All game state lives server-side; responses never contain category names or
group membership that the play session has not yet revealed.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .engine import SessionClosedError
from .study import (
    DuplicateSurveyError,
    EmptyPoolError,
    PairIncompleteError,
    StudyService,
    UnknownSlotError,
    UnknownTokenError,
)

__all__ = ["create_app"]


class PairBody(BaseModel):
    token: str | None = None


class GuessBody(BaseModel):
    token: str
    slot: str
    words: list[str] = Field(min_length=4, max_length=4)


class ShuffleBody(BaseModel):
    token: str
    slot: str


class SurveyBody(BaseModel):
    token: str
    english_proficiency: str = ""
    play_frequency: str = ""
    seen_before: bool = False
    q_creative: str
    q_harder: str
    q_liked: str
    free_text: dict[str, str] = Field(default_factory=dict)
    username: str = ""


def _http(exc: Exception) -> HTTPException:
    mapping = {
        UnknownTokenError: 404,
        UnknownSlotError: 404,
        EmptyPoolError: 503,
        SessionClosedError: 409,
        PairIncompleteError: 409,
        DuplicateSurveyError: 409,
        ValueError: 422,
    }
    for exc_type, status in mapping.items():
        if isinstance(exc, exc_type):
            return HTTPException(status_code=status, detail=str(exc))
    raise exc


def create_app(service: StudyService, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="connectgen study server")

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/pair")
    def pair(body: PairBody):
        try:
            return service.issue_pair(token=body.token)
        except Exception as e:  # noqa: BLE001 - mapped to HTTP statuses
            raise _http(e) from e

    @app.get("/api/board/{slot}")
    def board(slot: str, token: str):
        try:
            return service.board_view(token, slot)
        except Exception as e:  # noqa: BLE001
            raise _http(e) from e

    @app.post("/api/guess")
    def guess(body: GuessBody):
        try:
            return service.post_guess(body.token, body.slot, body.words)
        except Exception as e:  # noqa: BLE001
            raise _http(e) from e

    @app.post("/api/shuffle")
    def shuffle(body: ShuffleBody):
        try:
            return service.post_shuffle(body.token, body.slot)
        except Exception as e:  # noqa: BLE001
            raise _http(e) from e

    @app.post("/api/survey")
    def survey(body: SurveyBody):
        answers = body.model_dump()
        answers.pop("token")
        try:
            return service.post_survey(body.token, answers)
        except KeyError as e:
            raise HTTPException(status_code=422, detail=f"missing answer: {e}") from e
        except Exception as e:  # noqa: BLE001
            raise _http(e) from e

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
