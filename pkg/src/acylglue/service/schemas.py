"""Pydantic request/response models of the HTTP service.

The CLI builds the same request models and calls the handlers in process;
responses serialize to the documented JSON wire formats.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class LatticeSpec(BaseModel):
    """Either a named preset or an explicit 2x2 basis (columns)."""

    preset: Optional[str] = None
    basis: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.preset is None) == (self.basis is None):
            raise ValueError("give exactly one of preset or basis")
        return self


class SpectrumRequest(BaseModel):
    lattice: LatticeSpec
    cutoff: float = Field(ge=0)
    indicial: bool = True


class SpectrumResponse(BaseModel):
    spectrum: dict
    indicial: Optional[dict] = None


class EndSpec(BaseModel):
    """One cylinder end: a torus lattice, SL Betti data, or explicit roots."""

    kind: Literal["torus", "sl", "explicit"]
    lattice: Optional[LatticeSpec] = None
    spectrum_cutoff: Optional[float] = None
    b0_sigma: Optional[int] = None
    b1_sigma: Optional[int] = None
    roots: Optional[list[tuple[float, int]]] = None
    d0: Optional[int] = None
    cutoff: Optional[float] = None


class IndexRequest(BaseModel):
    ends: list[EndSpec]
    variant: Literal["full", "fixed", "varying"] = "full"
    rates: Optional[list[float]] = None

    @model_validator(mode="after")
    def _rates_needed(self):
        if self.variant in ("full", "fixed") and self.rates is None:
            raise ValueError(f"variant {self.variant!r} needs rates")
        return self


class IndexResponse(BaseModel):
    index: int
    per_end: Optional[list[dict]] = None
    variant: str


class CurveRequest(BaseModel):
    m: Optional[int] = None
    k: Optional[int] = None
    m_range: Optional[tuple[int, int]] = None
    k_range: Optional[tuple[int, int]] = None

    @model_validator(mode="after")
    def _grid_or_point(self):
        if (self.m is None) != (self.m_range is not None):
            raise ValueError("give m or m_range")
        if (self.k is None) != (self.k_range is not None):
            raise ValueError("give k or k_range")
        return self


class CurveRow(BaseModel):
    m: int
    k: int
    h0_N: int
    h1_N: int
    h0_N_minus_xbar: int
    rigid: bool
    euler: int
    dim_ker_rate_mu: int
    dim_ker_rate_0: int


class CurveResponse(BaseModel):
    rows: list[CurveRow]


class HoloSide(BaseModel):
    m: int
    k: int
    ev_image: list[list[float]]
    point_labels: Optional[list[str]] = None


class SLSide(BaseModel):
    b0_L: int
    b1_L: int
    b2_L: int
    b0_sigma: int
    b1_sigma: int


class HypothesisRequest(BaseModel):
    kind: Literal["holo", "sl"]
    holo_plus: Optional[HoloSide] = None
    holo_minus: Optional[HoloSide] = None
    matching: Optional[dict[str, str]] = None
    rotation: Optional[list[list[float]]] = None
    sl_plus: Optional[SLSide] = None
    sl_minus: Optional[SLSide] = None
    matched_sections: bool = True
    k_map_images: Optional[tuple[list[list[float]], list[list[float]]]] = None

    @model_validator(mode="after")
    def _sides(self):
        if self.kind == "holo":
            if self.holo_plus is None or self.holo_minus is None or self.rotation is None:
                raise ValueError("holo check needs holo_plus, holo_minus and rotation")
        else:
            if self.sl_plus is None or self.sl_minus is None:
                raise ValueError("sl check needs sl_plus and sl_minus")
        return self


class HypothesisResponse(BaseModel):
    matched: bool
    injective_plus: bool
    injective_minus: bool
    transverse: bool
    verdict: bool
    details: dict


class CatalogQuery(BaseModel):
    very_ample: Optional[bool] = None
    line_candidate: Optional[bool] = None
    source: Optional[str] = None


class CatalogResponse(BaseModel):
    count: int
    records: list[dict]
    warnings: list[str]


class PairsResponse(BaseModel):
    count: int
    pairs: list[tuple[tuple[int, int], tuple[int, int]]]


class ExamplesResponse(BaseModel):
    records: list[dict]


class GlueRequest(BaseModel):
    preset: str
    tmin: float = 3.0
    tmax: float = 12.0
    tstep: float = 1.0
    experiment: Literal["full", "error", "linear"] = "full"
    seed: int = 0
    restricted: bool = True
    lam: Optional[float] = None
    mode_cutoff: Optional[int] = None
    points_per_unit: Optional[int] = None


class GlueResponse(BaseModel):
    report: dict


class HealthResponse(BaseModel):
    status: str
    version: str
