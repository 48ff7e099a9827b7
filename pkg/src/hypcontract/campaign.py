"""Campaign configuration and the driver that runs every check over a corpus.

Configuration is YAML. Every key is optional::

    seed: 20121016            # unsigned 64-bit
    rng: PCG64                # numpy bit generator name
    pair_count: 10000         # random pairs per half-plane model
    disc_pair_count: 1000     # random pairs per disc model
    grid_resolution: 32       # n x n grid for pointwise checks
    tolerance: 1.0e-9         # shorthand: same tolerance for every check
    tolerances: {contraction: 1.0e-9, pushforward: 1.0e-6}
    halfplane_box: [-5, 5, 0.05, 5]   # xmin, xmax, ymin, ymax
    disc_radius: 0.9
    corpus: default           # or a list of model descriptors
    checks: [schwarz_pick, gradient_bound, contraction, kv_gradient, kv_lipschitz, pushforward]
    output: {path: reports, format: json}
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from . import corpus as corpus_mod
from .core import HALFPLANE_DENSITY, RAY_DENSITY, Domain, MobiusH, halfplane_geodesic_bbox
from .errors import HypContractError
from .paths import Region, lipschitz_modulus, pushforward_distance_check, wavy_test_function
from .report import JSON_FIELDS, VerificationReport
from .verify import (check_contraction, check_gradient_bound_halfplane, check_kv_gradient,
                     check_kv_lipschitz, check_schwarz_pick_halfplane, disc_grid, equality_pairs,
                     halfplane_grid, sample_pairs)

HALFPLANE_CHECKS = ("schwarz_pick", "gradient_bound", "contraction")
DISC_CHECKS = ("kv_gradient", "kv_lipschitz")
ALL_CHECKS = HALFPLANE_CHECKS + DISC_CHECKS + ("pushforward",)

DEFAULT_TOLERANCES = {
    "schwarz_pick": 1e-9,
    "gradient_bound": 1e-9,
    "contraction": 1e-9,
    "kv_gradient": 1e-9,
    "kv_lipschitz": 1e-9,
    "pushforward": 1e-6,
}


class ConfigError(HypContractError, ValueError):
    """Invalid campaign configuration."""


@dataclass
class CampaignConfig:
    seed: int = 20121016
    rng: str = "PCG64"
    pair_count: int = 10000
    disc_pair_count: int = 1000
    grid_resolution: int = 32
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    halfplane_box: Tuple[float, float, float, float] = (-5.0, 5.0, 0.05, 5.0)
    disc_radius: float = 0.9
    corpus: object = "default"
    checks: Tuple[str, ...] = ALL_CHECKS
    output_path: str = "reports"
    output_format: str = "json"

    def __post_init__(self):
        self.validate()

    @property
    def box(self) -> Region:
        return Region(*self.halfplane_box)

    def validate(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not hasattr(np.random, str(self.rng)) or not isinstance(getattr(np.random, str(self.rng)), type):
            raise ConfigError(f"unknown rng algorithm {self.rng!r}")
        for key in ("pair_count", "disc_pair_count", "grid_resolution"):
            val = getattr(self, key)
            if not isinstance(val, int) or isinstance(val, bool) or val <= 0:
                raise ConfigError(f"{key} must be a positive integer, got {val!r}")
        for name, tol in self.tolerances.items():
            if name not in ALL_CHECKS:
                raise ConfigError(f"tolerance given for unknown check {name!r}")
            if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not (tol >= 0 and math.isfinite(tol)):
                raise ConfigError(f"tolerance for {name} must be a nonnegative real, got {tol!r}")
        box = self.halfplane_box
        if len(box) != 4 or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in box):
            raise ConfigError("halfplane_box must be four finite numbers")
        if not (box[0] < box[1] and 0 < box[2] < box[3]):
            raise ConfigError("halfplane_box needs xmin < xmax and 0 < ymin < ymax")
        if not (isinstance(self.disc_radius, (int, float)) and 0 < self.disc_radius < 1):
            raise ConfigError("disc_radius must lie in (0, 1)")
        unknown = [c for c in self.checks if c not in ALL_CHECKS]
        if unknown or not self.checks:
            raise ConfigError(f"unknown checks {unknown}; choose from {', '.join(ALL_CHECKS)}")
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"output format must be json or csv, got {self.output_format!r}")
        if not (self.corpus == "default" or isinstance(self.corpus, list)):
            raise ConfigError("corpus must be 'default' or a list of model descriptors")

    def generator(self, *key: int) -> np.random.Generator:
        """Independent stream for one (check, model) slot, keyed on the campaign seed."""
        bitgen = getattr(np.random, self.rng)
        return np.random.Generator(bitgen(np.random.SeedSequence([self.seed, *key])))

    def build_corpus(self) -> List[Tuple[str, object]]:
        try:
            if self.corpus == "default":
                return corpus_mod.default_corpus(self.generator(0))
            return corpus_mod.build(self.corpus)
        except corpus_mod.CorpusSpecError as exc:
            raise ConfigError(str(exc)) from None


_KEYS = {"seed", "rng", "pair_count", "disc_pair_count", "grid_resolution", "tolerance", "tolerances",
         "halfplane_box", "disc_radius", "corpus", "checks", "output"}


def config_from_mapping(raw) -> CampaignConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    kwargs = {k: copy.deepcopy(raw[k]) for k in raw if k not in ("tolerance", "tolerances", "output")}
    tolerances = dict(DEFAULT_TOLERANCES)
    if "tolerance" in raw:
        tolerances = {k: raw["tolerance"] for k in tolerances}
    if "tolerances" in raw:
        if not isinstance(raw["tolerances"], dict):
            raise ConfigError("tolerances must be a mapping")
        tolerances.update(raw["tolerances"])
    kwargs["tolerances"] = tolerances
    out = raw.get("output", {}) or {}
    if not isinstance(out, dict):
        raise ConfigError("output must be a mapping")
    if "path" in out:
        kwargs["output_path"] = str(out["path"])
    if "format" in out:
        kwargs["output_format"] = out["format"]
    if "halfplane_box" in kwargs:
        kwargs["halfplane_box"] = tuple(kwargs["halfplane_box"])
    if "checks" in kwargs:
        checks = kwargs["checks"]
        kwargs["checks"] = tuple(checks.split(",") if isinstance(checks, str) else checks)
    try:
        return CampaignConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> CampaignConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return config_from_mapping(raw)


# --------------------------------------------------------------------------
# running


@dataclass
class CampaignResult:
    reports: List[VerificationReport]
    failures: List[Tuple[str, str, str]]  # (check, model, message) for evaluation errors

    @property
    def exit_code(self) -> int:
        if self.failures:
            return 3
        return 0 if all(r.passed for r in self.reports) else 1


def geodesic_pairs_inside(box: Region, n: int, rng: np.random.Generator, max_tries: int = 100):
    """Random pairs from ``box`` whose half-plane geodesic stays inside it."""
    out = []
    for _ in range(max_tries):
        cand = sample_pairs(Domain.HALFPLANE, 4 * n, rng, box)
        for z, w in cand:
            x0, x1, y0, y1 = halfplane_geodesic_bbox(z, w)
            if x0 >= box.xmin and x1 <= box.xmax and y0 >= box.ymin and y1 <= box.ymax:
                out.append((z, w))
                if len(out) == n:
                    return np.array(out)
    raise ConfigError("could not find enough pairs with geodesics inside the sampling box")


def run_check(cfg: CampaignConfig, check: str, name: str, model, slot: int) -> VerificationReport:
    tol = cfg.tolerances[check]
    rng = cfg.generator(1, slot, ALL_CHECKS.index(check))
    grid_hp = halfplane_grid(cfg.grid_resolution, cfg.box)
    if check == "schwarz_pick":
        pairs = sample_pairs(Domain.HALFPLANE, cfg.pair_count, rng, cfg.box)
        return check_schwarz_pick_halfplane(model.completion(), pairs, tol, name, cfg.seed)
    if check == "gradient_bound":
        return check_gradient_bound_halfplane(model, grid_hp, tol, name, cfg.seed)
    if check == "contraction":
        pairs = sample_pairs(Domain.HALFPLANE, cfg.pair_count, rng, cfg.box)
        f = model.completion()
        if isinstance(f, MobiusH):
            pairs = np.concatenate([pairs, equality_pairs(f, max(cfg.pair_count // 10, 1), rng)])
        return check_contraction(model, pairs, tol, name, cfg.seed)
    if check == "kv_gradient":
        return check_kv_gradient(model, disc_grid(cfg.grid_resolution, cfg.disc_radius), tol, name, cfg.seed)
    if check == "kv_lipschitz":
        pairs = sample_pairs(Domain.DISC, cfg.disc_pair_count, rng, radius=cfg.disc_radius)
        return check_kv_lipschitz(model, pairs, tol, name, cfg.seed)
    if check == "pushforward":
        mod = lipschitz_modulus(model, HALFPLANE_DENSITY, RAY_DENSITY, cfg.box,
                                n=max(cfg.grid_resolution ** 2, 1024), seed=cfg.seed)
        pairs = geodesic_pairs_inside(cfg.box, min(cfg.pair_count, 1000), rng)
        rep = pushforward_distance_check(model, HALFPLANE_DENSITY, RAY_DENSITY, pairs, mod.sup_estimate,
                                         tol, name, cfg.seed)
        rep.details["modulus_witness"] = [mod.witness.real, mod.witness.imag]
        return rep
    raise ConfigError(f"unknown check {check!r}")


def planned_runs(cfg: CampaignConfig, models):
    """``(check, name, model, slot)`` in a fixed order."""
    runs = []
    for slot, (name, model) in enumerate(models):
        domain = model.domain
        for check in cfg.checks:
            if (check in HALFPLANE_CHECKS and domain is Domain.HALFPLANE) or \
                    (check in DISC_CHECKS and domain is Domain.DISC):
                runs.append((check, name, model, slot))
    if "pushforward" in cfg.checks:
        fn = wavy_test_function()
        runs.append(("pushforward", fn.name, fn, len(models)))
    return runs


def run_campaign(cfg: CampaignConfig, log=None) -> CampaignResult:
    models = cfg.build_corpus()
    reports, failures = [], []
    for check, name, model, slot in planned_runs(cfg, models):
        try:
            rep = run_check(cfg, check, name, model, slot)
        except ConfigError:
            raise
        except (HypContractError, ArithmeticError, FloatingPointError) as exc:
            failures.append((check, name, f"{type(exc).__name__}: {exc}"))
            if log:
                log(f"{check:15s} {name:24s} ERROR {exc}")
            continue
        reports.append(rep)
        if log:
            log(f"{check:15s} {name:24s} {rep.verdict:4s} max_ratio={rep.max_ratio!r}")
    return CampaignResult(reports, failures)


# --------------------------------------------------------------------------
# report files


def report_json(rep: VerificationReport) -> str:
    doc = rep.to_json_dict()
    if isinstance(doc["max_ratio"], float) and not math.isfinite(doc["max_ratio"]):
        doc["max_ratio"] = None
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def report_filename(rep: VerificationReport) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in rep.model)
    return f"{rep.check}__{safe}.json"


def csv_rows(docs) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "model", "n", "max_ratio", "witness_z_re", "witness_z_im",
                     "witness_w_re", "witness_w_im", "tolerance", "verdict", "seed"])
    for d in docs:
        wz = d["witness_z"] or ["", ""]
        ww = d["witness_w"] or ["", ""]
        writer.writerow([d["check"], d["model"], d["n"], _num(d["max_ratio"]), _num(wz[0]), _num(wz[1]),
                         _num(ww[0]), _num(ww[1]), _num(d["tolerance"]), d["verdict"],
                         "" if d["seed"] is None else d["seed"]])
    return buf.getvalue()


def _num(x):
    return "" if x is None or x == "" else repr(float(x))


def read_report_dir(path) -> list:
    import pathlib

    docs = []
    for p in sorted(pathlib.Path(path).glob("*.json")):
        with open(p) as fh:
            d = json.load(fh)
        if not isinstance(d, dict) or not set(JSON_FIELDS) <= set(d):
            raise ConfigError(f"{p} is not a verification report")
        docs.append(d)
    return docs
