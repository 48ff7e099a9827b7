"""Model descriptors, the default corpus, and JSON-lines serialisation.

A descriptor is a plain dict with a ``type`` tag and the model parameters,
for example ``{"name": "atom1", "type": "PoissonAtom", "k": 2.0, "t": 1.5}``.
Complex numbers are written as ``[re, im]``; floats use Python's shortest
round-trip representation.
"""

from __future__ import annotations

import json
import math
import re
from typing import Dict, Iterable, List, Tuple

import numpy as np

from .core import MobiusD, MobiusH
from .errors import DomainError, HypContractError
from .harmonic import (BoundaryData, DiscLogExtremal, DiscPoissonData, HerglotzMix, ImMobius,
                       LinearIm, Piece, PoissonAtom)


class CorpusSpecError(HypContractError, ValueError):
    """A corpus entry could not be turned into a valid model."""


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _uc(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def to_descriptor(model) -> Dict:
    if isinstance(model, LinearIm):
        return {"type": "LinearIm", "k": model.k}
    if isinstance(model, PoissonAtom):
        return {"type": "PoissonAtom", "k": model.k, "t": model.t}
    if isinstance(model, ImMobius):
        m = model.m
        return {"type": "ImMobius", "m": [m.a, m.b, m.c, m.d], "k": model.k}
    if isinstance(model, HerglotzMix):
        d = {"type": "HerglotzMix", "c": model.c, "atoms": [[k, t] for k, t in model.atoms]}
        if model.ac_part is not None:
            d["ac_part"] = model.ac_part.to_dict()
        return d
    if isinstance(model, DiscLogExtremal):
        return {"type": "DiscLogExtremal", "rotation": _c(model.b.rotation), "center": _c(model.b.center),
                "scale": model.scale}
    if isinstance(model, DiscPoissonData):
        return {"type": "DiscPoissonData", "boundary": model.boundary.to_dict()}
    raise CorpusSpecError(f"cannot serialise {type(model).__name__}")


def from_descriptor(d: Dict):
    """Build a model from a descriptor; errors name the offending entry."""
    label = d.get("name", d.get("type", "?"))
    try:
        kind = d["type"]
        if kind == "LinearIm":
            return LinearIm(d.get("k", 1.0))
        if kind == "PoissonAtom":
            return PoissonAtom(d.get("k", 1.0), d.get("t", 0.0))
        if kind == "ImMobius":
            return ImMobius(MobiusH(*d["m"]), d.get("k", 1.0))
        if kind == "HerglotzMix":
            ac = d.get("ac_part")
            return HerglotzMix(d.get("c", 0.0), tuple(tuple(a) for a in d.get("atoms", ())),
                               None if ac is None else BoundaryData.from_dict(ac))
        if kind == "DiscLogExtremal":
            return DiscLogExtremal(MobiusD(_uc(d.get("rotation", 1.0)), _uc(d.get("center", 0.0))),
                                   d.get("scale", 1.0))
        if kind == "DiscPoissonData":
            return DiscPoissonData(BoundaryData.from_dict({"circle": True, **d["boundary"]}))
        raise CorpusSpecError(f"corpus entry {label!r}: unknown model type {kind!r}")
    except CorpusSpecError:
        raise
    except KeyError as exc:
        raise CorpusSpecError(f"corpus entry {label!r}: missing field {exc.args[0]!r}") from None
    except (DomainError, TypeError, ValueError) as exc:
        raise CorpusSpecError(f"corpus entry {label!r}: {exc}") from None


_INLINE = re.compile(r"^\s*(\w+)\s*\{(.*)\}\s*$", re.S)
_POSITIONAL = {"LinearIm": ("k",), "PoissonAtom": ("k", "t"), "DiscLogExtremal": ("scale",)}


def parse_inline(text: str) -> Dict:
    """Parse ``Name{k=2, t=1.5}``, ``Name{2, 1.5}`` or a JSON object into a descriptor."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusSpecError(f"bad JSON descriptor: {exc}") from None
    m = _INLINE.match(text)
    if not m:
        raise CorpusSpecError(f"cannot parse model descriptor {text!r}")
    d = {"type": m.group(1)}
    body = m.group(2).strip()
    if body:
        names = _POSITIONAL.get(d["type"], ())
        for pos, item in enumerate(body.split(",")):
            if "=" in item:
                key, val = (s.strip() for s in item.split("=", 1))
            elif pos < len(names):
                key, val = names[pos], item.strip()
            else:
                raise CorpusSpecError(f"expected key=value in {text!r}, got {item.strip()!r}")
            try:
                d[key] = float(val)
            except ValueError:
                raise CorpusSpecError(f"{key}={val!r} is not a number") from None
    return d


def dumps(entries: Iterable[Tuple[str, object]]) -> str:
    """One JSON document per line, ``name`` first."""
    lines = []
    for name, model in entries:
        lines.append(json.dumps({"name": name, **to_descriptor(model)}))
    return "\n".join(lines) + "\n"


def loads(text: str) -> List[Tuple[str, object]]:
    out = []
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusSpecError(f"line {i}: {exc}") from None
        out.append((d.get("name", f"model{i}"), from_descriptor(d)))
    return out


def build(descriptors: List[Dict]) -> List[Tuple[str, object]]:
    """Turn a list of descriptors into ``(name, model)`` pairs."""
    entries = []
    for i, d in enumerate(descriptors):
        if not isinstance(d, dict):
            raise CorpusSpecError(f"corpus entry {i} is not a mapping")
        entries.append((str(d.get("name", f"model{i}")), from_descriptor(d)))
    names = [n for n, _ in entries]
    if len(set(names)) != len(names):
        raise CorpusSpecError("corpus entry names must be unique")
    return entries


def _random_mobius(rng) -> MobiusH:
    a, b, c, d = rng.normal(size=4)
    if a * d - b * c < 0:
        a, b = -a, -b
    return MobiusH(a, b, c, d)


def tent(center: float, height: float) -> BoundaryData:
    """``height (1 - |t - center|)`` on ``[center - 1, center + 1]``."""
    return BoundaryData((
        Piece(center - 1.0, center, (height * (1.0 - center), height)),
        Piece(center, center + 1.0, (height * (1.0 + center), -height)),
    ))


def default_descriptors(rng: np.random.Generator) -> List[Dict]:
    """The default corpus; the list of names and types does not depend on the seed."""
    u = rng.uniform
    atoms = [(u(0.5, 3.0), u(-3.0, 3.0)) for _ in range(3)]
    t1 = u(-3.0, -0.5)
    ms = [_random_mobius(rng) for _ in range(2)]
    center = u(-2.0, 2.0)
    disc_angle = u(0.0, 2.0 * math.pi)
    disc_center = 0.5 * math.sqrt(u()) * np.exp(2j * math.pi * u())
    return [
        {"name": "linear", "type": "LinearIm", "k": u(0.5, 3.0)},
        *({"name": f"atom{i + 1}", "type": "PoissonAtom", "k": k, "t": t} for i, (k, t) in enumerate(atoms)),
        {"name": "mix_two_atoms", "type": "HerglotzMix", "c": 0.0,
         "atoms": [[u(0.5, 2.0), t1], [u(0.5, 2.0), t1 + u(1.0, 4.0)]]},
        {"name": "mix_z_minus_inv_z", "type": "HerglotzMix", "c": 1.0, "atoms": [[math.pi, 0.0]]},
        {"name": "mix_linear_three_atoms", "type": "HerglotzMix", "c": u(0.2, 1.0),
         "atoms": [[u(0.2, 2.0), u(-4.0, 4.0)] for _ in range(3)]},
        {"name": "integral_tent", "type": "HerglotzMix", "c": 0.0, "atoms": [],
         "ac_part": tent(center, u(0.5, 2.0)).to_dict()},
        *({"name": f"mobius{i + 1}", "type": "ImMobius", "m": [m.a, m.b, m.c, m.d], "k": u(0.5, 2.0)}
          for i, m in enumerate(ms)),
        {"name": "disc_extremal", "type": "DiscLogExtremal", "rotation": [1.0, 0.0], "center": [0.0, 0.0],
         "scale": 1.0},
        {"name": "disc_extremal_moved", "type": "DiscLogExtremal",
         "rotation": [math.cos(disc_angle), math.sin(disc_angle)], "center": _c(disc_center), "scale": 1.0},
        {"name": "disc_half_extremal", "type": "DiscLogExtremal", "rotation": [1.0, 0.0],
         "center": [0.0, 0.0], "scale": 0.5},
        {"name": "disc_step", "type": "DiscPoissonData",
         "boundary": {"pieces": [[0.0, math.pi, [0.8]], [math.pi, 2.0 * math.pi, [-0.8]]], "delta": 0.2}},
    ]


def default_corpus(rng: np.random.Generator) -> List[Tuple[str, object]]:
    return build(default_descriptors(rng))
