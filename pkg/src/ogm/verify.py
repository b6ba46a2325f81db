"""Sampled certification of the embedding inequalities.

Every sampled pair gets the solver distance d and the embedded distance
e = |phi(x)phi(y)| (sum metric over T0 and the T_c), and each proved
inequality is checked at its stated tolerance; TRUNCATED pairs never count.
Per-pair work is deterministic in (seed, index), so reports are bit-for-bit
reproducible regardless of worker count or scheduling.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Optional

from . import curves as cv
from . import geodesics as geo
from . import hexagon as hx
from . import trees as tr
from .cover import CoverComplex, CoverError, explore, make_stream
from .manifold import GraphManifoldSpec, check_irreducible, validate


def constant_c(n: int, delta: float) -> float:
    """The quasi-isometry constant max{2*delta+1, 2*delta*(n-1)+1}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return max(2.0 * delta + 1.0, 2.0 * delta * (n - 1) + 1.0)


@dataclass
class RunConfig:
    t0_depth: int = 2
    hex_depth: int = 4
    samples: int = 500
    seed: int = 0
    tol: float = 1e-6
    fiber_range: float = 3.0
    wall_comp_depth: Optional[int] = 0
    workers: int = 0  # 0 = available parallelism

    def __post_init__(self):
        if self.t0_depth < 1 or self.hex_depth < 1:
            raise ValueError("depths must be >= 1")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")

    def epsilon(self) -> float:
        return 4.0 * tr.PROFILE_H + 10.0 * self.tol

    def to_dict(self) -> dict:
        return {
            "t0_depth": self.t0_depth,
            "hex_depth": self.hex_depth,
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
            "fiber_range": self.fiber_range,
            "wall_comp_depth": self.wall_comp_depth,
        }


@dataclass
class InequalityStat:
    checked: int = 0
    violations: int = 0
    worst_margin: float = -math.inf  # max of (lhs - allowed); <= 0 passes
    witness: Optional[dict] = None

    def update(self, margin: float, witness: dict) -> None:
        self.checked += 1
        if margin > self.worst_margin:
            self.worst_margin = margin
            self.witness = witness
        if margin > 0:
            self.violations += 1

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin if self.checked else None,
            "witness": self.witness,
        }


@dataclass
class VerificationReport:
    kind: str
    spec_digest: str
    n: int
    config: RunConfig
    constants: dict
    usable: int = 0
    truncated: int = 0
    inequalities: dict[str, InequalityStat] = field(default_factory=dict)
    retraction_lipschitz: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.usable == 0:
            return "FAIL"
        if any(s.violations for s in self.inequalities.values()):
            return "FAIL"
        return "PASS"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "spec_digest": self.spec_digest,
            "n": self.n,
            "config": self.config.to_dict(),
            "constants": self.constants,
            "usable_samples": self.usable,
            "truncated_samples": self.truncated,
            "inequalities": {k: v.to_dict() for k, v in sorted(self.inequalities.items())},
            "retraction_lipschitz": self.retraction_lipschitz,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


# -- per-pair evaluation ------------------------------------------------------

_STATE: dict = {}


def _set_state(cplx: CoverComplex, ts: tr.TreeSystem, cfg: RunConfig) -> None:
    _STATE["cplx"] = cplx
    _STATE["ts"] = ts
    _STATE["cfg"] = cfg


def _pair_record(index: int) -> dict:
    cplx: CoverComplex = _STATE["cplx"]
    ts: tr.TreeSystem = _STATE["ts"]
    cfg: RunConfig = _STATE["cfg"]
    x = cplx.sample_point(make_stream(cfg.seed, 2 * index))
    y = cplx.sample_point(make_stream(cfg.seed, 2 * index + 1))
    rec: dict = {"index": index}
    res = geo.distance(cplx, x, y, tol=cfg.tol)
    if res.truncated:
        rec["truncated"] = True
        return rec
    rec["truncated"] = False
    rec["d"] = res.distance
    rec["t0"] = ts.t0_distance(ts.phi0(x), ts.phi0(y))
    rec["tc"] = {}
    for lab in ts.class_labels:
        rec["tc"][lab] = ts.tc_distance(lab, ts.phi_c(lab, x), ts.phi_c(lab, y))
    rec["e"] = rec["t0"] + sum(rec["tc"].values())
    rec["x"] = cplx.format_point(x)
    rec["y"] = cplx.format_point(y)
    try:
        path = cv.build_special_curve(cplx, ts, x, y)
        rec["curve_length"] = cv.curve_length(cplx, path)
        rec["curve_hop_max"] = max(
            (
                geo.block_distance(cplx, s.points[0], s.points[1])
                for s in path.segments
                if s.role == "hop"
            ),
            default=0.0,
        )
    except cv.CurveTruncationError:
        rec["curve_length"] = None
    return rec


def _collect_records(
    cplx: CoverComplex, ts: tr.TreeSystem, cfg: RunConfig
) -> list[dict]:
    _set_state(cplx, ts, cfg)
    indices = range(cfg.samples)
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    if workers > 1 and hasattr(os, "fork"):
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            records = pool.map(_pair_record, indices, chunksize=16)
    else:
        records = [_pair_record(i) for i in indices]
    return records


def _prepare(spec: GraphManifoldSpec, cfg: RunConfig):
    bad = validate(spec)
    if bad:
        raise CoverError("invalid spec: " + "; ".join(bad))
    irr = check_irreducible(spec, cfg.t0_depth)
    if not irr.irreducible:
        raise CoverError(f"spec rejected (not irreducible): {irr.reason}")
    cplx = explore(
        spec,
        cfg.t0_depth,
        cfg.hex_depth,
        fiber_range=cfg.fiber_range,
        wall_comp_depth=cfg.wall_comp_depth,
    )
    ts = tr.TreeSystem(cplx)
    if len(ts.class_labels) != spec.n - 1:
        raise CoverError(
            f"explored complex has {len(ts.class_labels)} classes, expected {spec.n - 1}"
        )
    return cplx, ts


def measure_retraction_lipschitz(
    model: hx.HexModel, pairs: int = 100_000, seed: int = 1
) -> float:
    """Sampled Lipschitz constant of the retraction over same-hexagon and
    adjacent-hexagon pairs."""
    rng = make_stream(seed, 0)
    worst = 0.0
    nhex = len(model.hexagons)
    for i in range(pairs):
        a = model.hexagons[int(rng.integers(0, nhex))]
        p = hx.H0Point(a, model.sample_local(rng))
        if i % 2 == 0:
            q = hx.H0Point(a, model.sample_local(rng))
        else:
            q = hx.H0Point(hx.extend(a, int(rng.integers(0, 3))), model.sample_local(rng))
        d = hx.h0_distance(p, q)
        if d < 1e-9:
            continue
        dt = hx.tbin_distance(hx.retract(p), hx.retract(q))
        worst = max(worst, dt / d)
    return worst


def base_constants(n: int) -> dict:
    g = hx.hexagon_constants()
    return {
        "s": g.side_unit_curvature,
        "kappa": g.kappa,
        "rho": g.rho,
        "delta": g.delta,
        "C": constant_c(n, g.delta),
        "half_edge_embedded": hx.HALF_EDGE_EMBEDDED,
    }


def verify_qi(
    spec: GraphManifoldSpec, cfg: RunConfig, records: Optional[list[dict]] = None
) -> VerificationReport:
    """The sandwich d/C - 1 - eps <= e <= C d + 1 + eps plus the explicit
    upper Lipschitz sub-check, over non-truncated sampled pairs."""
    cplx, ts = _prepare(spec, cfg)
    if records is None:
        records = _collect_records(cplx, ts, cfg)
    consts = base_constants(spec.n)
    delta, big_c = consts["delta"], consts["C"]
    eps = cfg.epsilon()
    rep = VerificationReport(
        "qi", spec.digest(), spec.n, cfg, consts
    )
    up = InequalityStat()
    lo = InequalityStat()
    sub = InequalityStat()
    for rec in records:
        if rec["truncated"]:
            rep.truncated += 1
            continue
        rep.usable += 1
        d, e = rec["d"], rec["e"]
        wit = {"index": rec["index"], "d": d, "e": e, "x": rec["x"], "y": rec["y"]}
        up.update(e - (big_c * d + 1.0 + eps), wit)
        lo.update((d / big_c - 1.0 - eps) - e, wit)
        sub.update(e - ((2.0 * delta * (spec.n - 1) + 1.0) * d + 1.0 + eps), wit)
    rep.inequalities = {
        "upper_sandwich": up,
        "lower_sandwich": lo,
        "upper_lipschitz_sub": sub,
    }
    return rep


def verify_lipschitz(
    spec: GraphManifoldSpec, cfg: RunConfig, records: Optional[list[dict]] = None
) -> VerificationReport:
    """Per-class 2*delta bounds, the phi0 +1 bound, and the measured
    retraction constant (must stay below 2*delta)."""
    cplx, ts = _prepare(spec, cfg)
    if records is None:
        records = _collect_records(cplx, ts, cfg)
    consts = base_constants(spec.n)
    delta = consts["delta"]
    eps = cfg.epsilon()
    rep = VerificationReport("lipschitz", spec.digest(), spec.n, cfg, consts)
    cls = {lab: InequalityStat() for lab in ts.class_labels}
    phi0 = InequalityStat()
    for rec in records:
        if rec["truncated"]:
            rep.truncated += 1
            continue
        rep.usable += 1
        d = rec["d"]
        wit = {"index": rec["index"], "d": d, "x": rec["x"], "y": rec["y"]}
        for lab, dtc in rec["tc"].items():
            cls[lab].update(dtc - (2.0 * delta * d + eps), {**wit, "tc": dtc})
        phi0.update(rec["t0"] - (d + 1.0 + 1e-9), {**wit, "t0": rec["t0"]})
    rep.inequalities = {f"class_{lab}_2delta": s for lab, s in cls.items()}
    rep.inequalities["phi0_plus_one"] = phi0
    lip = measure_retraction_lipschitz(cplx.model, pairs=20_000, seed=cfg.seed + 1)
    rep.retraction_lipschitz = lip
    stat = InequalityStat()
    stat.update(lip - 2.0 * delta, {"measured": lip})
    rep.inequalities["retraction_2delta"] = stat
    if hx.HALF_EDGE_EMBEDDED > hx.RHO:
        rep.notes.append(
            f"WARN embedded half-edge {hx.HALF_EDGE_EMBEDDED} exceeds rho {hx.RHO}"
        )
    return rep


def verify_curves(
    spec: GraphManifoldSpec, cfg: RunConfig, records: Optional[list[dict]] = None
) -> VerificationReport:
    """Witness-curve bound: length within [d - tol, (2*delta+1) e + 2*delta + eps]
    and every inductive hop within delta."""
    cplx, ts = _prepare(spec, cfg)
    if records is None:
        records = _collect_records(cplx, ts, cfg)
    consts = base_constants(spec.n)
    delta = consts["delta"]
    eps = cfg.epsilon()
    rep = VerificationReport("curves", spec.digest(), spec.n, cfg, consts)
    upper = InequalityStat()
    witness = InequalityStat()
    hops = InequalityStat()
    for rec in records:
        if rec["truncated"] or rec.get("curve_length") is None:
            rep.truncated += 1
            continue
        rep.usable += 1
        d, e, length = rec["d"], rec["e"], rec["curve_length"]
        wit = {"index": rec["index"], "d": d, "e": e, "length": length}
        upper.update(length - ((2.0 * delta + 1.0) * e + 2.0 * delta + eps), wit)
        witness.update(d - (length + 10.0 * cfg.tol), wit)
        hops.update(rec["curve_hop_max"] - (delta + 1e-9), wit)
    rep.inequalities = {
        "curve_upper": upper,
        "curve_dominates_distance": witness,
        "curve_hops_delta": hops,
    }
    return rep


def dump_pairs_csv(records: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,truncated,d,e\n")
        for rec in records:
            if rec["truncated"]:
                fh.write(f"{rec['index']},1,,\n")
            else:
                fh.write(f"{rec['index']},0,{rec['d']!r},{rec['e']!r}\n")


def collect_records(spec: GraphManifoldSpec, cfg: RunConfig) -> list[dict]:
    """Shared sample evaluation for the verify_* reports."""
    cplx, ts = _prepare(spec, cfg)
    return _collect_records(cplx, ts, cfg)
