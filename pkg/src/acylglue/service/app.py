"""FastAPI front end wrapping the service handlers.

Domain validation errors map to 422, hypothesis violations to 409, and the
remaining library errors to 400; negative verdicts are ordinary 200
responses (the verdict field carries the result).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import (
    AcylGlueError,
    HypothesisViolatedError,
    InvalidInputError,
    NoContractionStartError,
)
from . import handlers
from . import schemas as sc
from ..gluer.experiments import PRESET_NAMES

app = FastAPI(
    title="acylglue",
    version=__version__,
    description="Indicial roots, weighted index calculus, gluing hypothesis "
    "checks and neck-stretching model experiments.",
)


def _run(fn, *args):
    try:
        return fn(*args)
    except (InvalidInputError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except (HypothesisViolatedError, NoContractionStartError) as exc:
        raise HTTPException(status_code=409, detail=str(exc)) from exc
    except AcylGlueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health", response_model=sc.HealthResponse)
def health() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", version=__version__)


@app.get("/presets")
def presets() -> dict:
    return {"glue_presets": list(PRESET_NAMES), "lattice_presets": ["square2pi", "hex-first2"]}


@app.post("/spectrum", response_model=sc.SpectrumResponse)
def spectrum(req: sc.SpectrumRequest) -> sc.SpectrumResponse:
    return _run(handlers.spectrum, req)


@app.post("/index", response_model=sc.IndexResponse)
def index(req: sc.IndexRequest) -> sc.IndexResponse:
    return _run(handlers.index, req)


@app.post("/curve", response_model=sc.CurveResponse)
def curve(req: sc.CurveRequest) -> sc.CurveResponse:
    return _run(handlers.curve, req)


@app.post("/hypothesis", response_model=sc.HypothesisResponse)
def hypothesis(req: sc.HypothesisRequest) -> sc.HypothesisResponse:
    return _run(handlers.hypothesis, req)


@app.post("/catalog/records", response_model=sc.CatalogResponse)
def catalog_records(req: sc.CatalogQuery) -> sc.CatalogResponse:
    return _run(handlers.catalog_records, req)


@app.get("/catalog/pairs", response_model=sc.PairsResponse)
def catalog_pairs() -> sc.PairsResponse:
    return _run(handlers.catalog_pairs)


@app.get("/catalog/examples", response_model=sc.ExamplesResponse)
def catalog_examples() -> sc.ExamplesResponse:
    return _run(handlers.catalog_examples)


@app.post("/glue", response_model=sc.GlueResponse)
def glue(req: sc.GlueRequest) -> sc.GlueResponse:
    return _run(handlers.glue, req)
