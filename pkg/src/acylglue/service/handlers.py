"""Service-layer handlers: request model in, response model out.

Both the HTTP routes and the CLI call these functions; all domain errors
propagate as acylglue exceptions and are mapped to status codes (or exit
codes) by the caller.
"""

from __future__ import annotations

import numpy as np

from .. import catalog as cat
from .. import curves as cv
from .. import fredholm as fr
from .. import spectral as sp
from ..errors import InvalidInputError
from ..gluer import experiments as gx
from . import schemas as sc


def _lattice(spec: sc.LatticeSpec) -> sp.LatticeTorus:
    if spec.preset is not None:
        return sp.lattice_preset(spec.preset)
    return sp.LatticeTorus(np.asarray(spec.basis, dtype=float))


def spectrum(req: sc.SpectrumRequest) -> sc.SpectrumResponse:
    lat = _lattice(req.lattice)
    table = sp.laplace_spectrum_torus(lat, req.cutoff)
    resp = sc.SpectrumResponse(spectrum=table.to_json_dict())
    if req.indicial:
        resp.indicial = sp.torus_indicial_data(table).to_json_dict()
    return resp


def _end(spec: sc.EndSpec) -> sp.IndicialData:
    if spec.kind == "torus":
        if spec.lattice is None or spec.spectrum_cutoff is None:
            raise InvalidInputError("torus end needs lattice and spectrum_cutoff")
        table = sp.laplace_spectrum_torus(_lattice(spec.lattice), spec.spectrum_cutoff)
        return sp.torus_indicial_data(table)
    if spec.kind == "sl":
        if spec.b0_sigma is None or spec.b1_sigma is None:
            raise InvalidInputError("sl end needs b0_sigma and b1_sigma")
        return sp.sl_indicial_zero_data(spec.b0_sigma, spec.b1_sigma)
    if spec.roots is None or spec.d0 is None or spec.cutoff is None:
        raise InvalidInputError("explicit end needs roots, d0 and cutoff")
    return sp.IndicialData(roots=tuple(map(tuple, spec.roots)), d0=spec.d0, cutoff=spec.cutoff)


def index(req: sc.IndexRequest) -> sc.IndexResponse:
    ends = fr.EndSpectrum(ends=tuple(_end(e) for e in req.ends))
    if req.variant == "varying":
        return sc.IndexResponse(index=fr.index_varying_cross_section(ends), variant="varying")
    rates = fr.RateVector(tuple(req.rates))
    if req.variant == "fixed":
        report = fr.index_fixed_cross_section(ends, rates)
    else:
        report = fr.index_full(ends, rates)
    d = report.to_json_dict()
    return sc.IndexResponse(index=d["index"], per_end=d["per_end"], variant=req.variant)


def curve(req: sc.CurveRequest) -> sc.CurveResponse:
    ms = [req.m] if req.m is not None else list(range(req.m_range[0], req.m_range[1] + 1))
    ks = [req.k] if req.k is not None else list(range(req.k_range[0], req.k_range[1] + 1))
    rows = []
    for m in ms:
        for k in ks:
            c = cv.CurveData(m=m, k=k)
            h0, h1, h0m = cv.normal_cohomology(c)
            dmu, d0 = cv.acyl_kernel_ladder(c)
            rows.append(
                sc.CurveRow(
                    m=m,
                    k=k,
                    h0_N=h0,
                    h1_N=h1,
                    h0_N_minus_xbar=h0m,
                    rigid=cv.rigidity_criterion(c),
                    euler=h0 - h1,
                    dim_ker_rate_mu=dmu,
                    dim_ker_rate_0=d0,
                )
            )
    return sc.CurveResponse(rows=rows)


def hypothesis(req: sc.HypothesisRequest) -> sc.HypothesisResponse:
    if req.kind == "holo":
        plus = cv.CurveData(
            m=req.holo_plus.m,
            k=req.holo_plus.k,
            ev_image=np.asarray(req.holo_plus.ev_image, dtype=float),
            point_labels=tuple(req.holo_plus.point_labels or ()),
        )
        minus = cv.CurveData(
            m=req.holo_minus.m,
            k=req.holo_minus.k,
            ev_image=np.asarray(req.holo_minus.ev_image, dtype=float),
            point_labels=tuple(req.holo_minus.point_labels or ()),
        )
        matching = req.matching
        if matching is None:
            matching = dict(zip(plus.point_labels, minus.point_labels))
        report = cv.check_holo_gluing_hypothesis(
            plus, minus, matching, np.asarray(req.rotation, dtype=float)
        )
    else:
        images = None
        if req.k_map_images is not None:
            images = (
                np.asarray(req.k_map_images[0], dtype=float),
                np.asarray(req.k_map_images[1], dtype=float),
            )
        report = cv.check_sl_gluing_hypothesis(
            cv.SLBettiData(**req.sl_plus.model_dump()),
            cv.SLBettiData(**req.sl_minus.model_dump()),
            matched_sections=req.matched_sections,
            k_map_images=images,
        )
    d = report.to_json_dict()
    return sc.HypothesisResponse(**d)


def catalog_records(req: sc.CatalogQuery) -> sc.CatalogResponse:
    loaded = cat.load_catalog(req.source)
    records = list(loaded.records)
    if req.very_ample is not None:
        records = [r for r in records if r.very_ample == req.very_ample]
    if req.line_candidate is not None:
        records = [r for r in records if r.line_candidate == req.line_candidate]
    return sc.CatalogResponse(
        count=len(records),
        records=[r.to_json_dict() for r in records],
        warnings=list(loaded.warnings),
    )


def catalog_pairs(source: str | None = None) -> sc.PairsResponse:
    loaded = cat.load_catalog(source)
    pairs = cat.enumerate_sphere_pairs(loaded)
    return sc.PairsResponse(count=len(pairs), pairs=[(p.key, q.key) for p, q in pairs])


def catalog_examples() -> sc.ExamplesResponse:
    return sc.ExamplesResponse(records=[r.to_json_dict() for r in cat.example_records()])


def glue(req: sc.GlueRequest) -> sc.GlueResponse:
    kwargs = {}
    if req.mode_cutoff is not None:
        kwargs["mode_cutoff"] = req.mode_cutoff
    if req.points_per_unit is not None:
        kwargs["points_per_unit"] = req.points_per_unit
    p = gx.problem_preset(req.preset, **kwargs)
    if req.tstep <= 0:
        raise InvalidInputError("tstep must be positive")
    n = int(round((req.tmax - req.tmin) / req.tstep))
    grid = [req.tmin + i * req.tstep for i in range(n + 1)]
    if req.experiment == "error":
        report = gx.error_norm_experiment(p, grid)
    elif req.experiment == "linear":
        report = gx.linear_estimate_experiment(p, grid, lam=req.lam, restricted=req.restricted)
    else:
        report = gx.run_glue_experiment(p, grid, seed=req.seed)
    return sc.GlueResponse(report=report.to_json_dict())
