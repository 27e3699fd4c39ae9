"""FastAPI application exposing the four model endpoints.

Wire format (shared with the client package):

* POST /parse    {"sentences": [...]}        -> {"graphs": [...]}
* POST /generate {"graphs": [...]}           -> {"sentences": [...]}
* POST /nli      {"pairs": [[p, h], ...]}    -> {"probs": [[c, n, e], ...]}
* POST /embed    {"texts": [...], "model": m} -> {"vectors": [[...], ...]}
* GET  /healthz                              -> model inventory

Handling is stateless; batching happens within a request only. Malformed
request bodies answer 400, invalid graphs 422, and missing models 503.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .capabilities import CapabilitySet, InvalidGraph
from .config import ServerConfig


class ParseRequest(BaseModel):
    sentences: list[str] = Field(min_length=1)


class GenerateRequest(BaseModel):
    graphs: list[str] = Field(min_length=1)


class NliRequest(BaseModel):
    pairs: list[tuple[str, str]] = Field(min_length=1)


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    model: str


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    capabilities = CapabilitySet(config)
    app = FastAPI(title="semfoil model server", version="0.1.0")
    app.state.capabilities = capabilities
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def check_batch(n: int):
        if n > config.max_batch_size:
            return JSONResponse(
                status_code=400,
                content={
                    "detail": f"batch of {n} exceeds max_batch_size="
                    f"{config.max_batch_size}"
                },
            )
        return None

    def unavailable(name: str):
        return JSONResponse(
            status_code=503, content={"detail": f"{name} model not loaded"}
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "models": capabilities.inventory()}

    @app.post("/parse")
    def parse(body: ParseRequest):
        if (err := check_batch(len(body.sentences))) is not None:
            return err
        if not capabilities.parser.loaded:
            return unavailable("parser")
        for sentence in body.sentences:
            if not sentence.strip():
                return JSONResponse(
                    status_code=400, content={"detail": "empty sentence"}
                )
        return {"graphs": capabilities.parser.run(body.sentences)}

    @app.post("/generate")
    def generate(body: GenerateRequest):
        if (err := check_batch(len(body.graphs))) is not None:
            return err
        if not capabilities.generator.loaded:
            return unavailable("generator")
        try:
            return {"sentences": capabilities.generator.run(body.graphs)}
        except InvalidGraph as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/nli")
    def nli(body: NliRequest):
        if (err := check_batch(len(body.pairs))) is not None:
            return err
        if not capabilities.nli.loaded:
            return unavailable("nli")
        for premise, hypothesis in body.pairs:
            if not premise.strip() or not hypothesis.strip():
                return JSONResponse(
                    status_code=400, content={"detail": "empty NLI text"}
                )
        return {"probs": capabilities.nli.run(body.pairs)}

    @app.post("/embed")
    def embed(body: EmbedRequest):
        if (err := check_batch(len(body.texts))) is not None:
            return err
        capability = capabilities.embedders.get(body.model)
        if capability is None or not capability.loaded:
            return unavailable(f"embedding {body.model!r}")
        return {"vectors": capability.run(body.texts)}

    return app
