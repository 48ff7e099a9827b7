"""Command-line entry point: ``hypcontract {verify,corpus,geodesic,certify,report}``.

Exit codes: 0 every verdict passed, 1 an inequality was violated,
2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

from . import corpus as corpus_mod
from .campaign import (ALL_CHECKS, CampaignConfig, ConfigError, csv_rows, config_from_mapping,
                       load_config, read_report_dir, report_filename, report_json, run_campaign)
from .core import HYPERBOLIC_DENSITIES, Domain, contains
from .errors import DomainError, HypContractError, QuadratureError, UnsupportedModelError
from .paths import rho_distance
from .verify import certify_extremal_disc, certify_extremal_halfplane

EXIT_PASS, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _err(msg):
    print(f"hypcontract: {msg}", file=sys.stderr)


def _config(args) -> CampaignConfig:
    cfg = load_config(args.config) if args.config else config_from_mapping({})
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["output_path"] = args.out
    if getattr(args, "format", None) is not None:
        overrides["output_format"] = args.format
    if getattr(args, "check", None):
        overrides["checks"] = tuple(c.strip() for c in args.check.split(",") if c.strip())
    if overrides:
        fields = dict(cfg.__dict__)
        fields.update(overrides)
        cfg = CampaignConfig(**fields)
    return cfg


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def cmd_verify(args) -> int:
    cfg = _config(args)
    log = None if args.quiet else (lambda line: print(line, file=sys.stderr))
    result = run_campaign(cfg, log=log)
    docs = [r.to_json_dict() for r in result.reports]
    if cfg.output_format == "json":
        for rep in result.reports:
            _write_atomic(os.path.join(cfg.output_path, report_filename(rep)), report_json(rep))
    else:
        _write_atomic(os.path.join(cfg.output_path, "reports.csv"), csv_rows(docs))
    for check, model, msg in result.failures:
        _err(f"{check} on {model} could not be evaluated: {msg}")
    for rep in result.reports:
        if not rep.passed:
            print(f"FAIL {rep.check} {rep.model} max_ratio={rep.max_ratio!r} "
                  f"witness_z={rep.witness_z!r} witness_w={rep.witness_w!r}")
    passed = sum(r.passed for r in result.reports)
    print(f"{passed}/{len(result.reports)} reports passed, {len(result.failures)} evaluation failures; "
          f"written to {cfg.output_path}")
    return result.exit_code


def cmd_corpus(args) -> int:
    cfg = _config(args)
    text = corpus_mod.dumps(cfg.build_corpus())
    if args.out:
        path = args.out if args.out.endswith(".jsonl") else os.path.join(args.out, "corpus.jsonl")
        _write_atomic(path, text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


_DOMAINS = {d.value: d for d in Domain}


def _parse_point(text: str, domain: Domain):
    s = text.strip().replace(" ", "")
    try:
        value = complex(s.replace("i", "j")) if ("i" in s or "j" in s) else complex(float(s))
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}") from None
    if not domain.is_planar:
        if value.imag != 0:
            raise UsageError(f"point {text!r} must be real in the {domain.value}")
        value = value.real
    if not bool(contains(domain, value)):
        raise UsageError(f"point {text!r} is not in the {domain.value}")
    return value


def cmd_geodesic(args) -> int:
    domain = _DOMAINS[args.domain]
    z, w = _parse_point(args.z, domain), _parse_point(args.w, domain)
    density = HYPERBOLIC_DENSITIES[domain]
    closed = rho_distance(z, w, density)
    if domain.is_planar:
        numeric = 0.0 if z == w else rho_distance(z, w, density, variational=True)
        label = "variational"
    else:
        numeric = rho_distance(z, w, dataclasses.replace(density, closed_form_distance=None))
        label = "segment"
    gap = 0.0 if closed == numeric else abs(numeric - closed) / max(abs(closed), 1e-300)
    print(f"closed {closed:.7f}  {label} {numeric:.7f}  relative_gap {gap:.3e}")
    return EXIT_PASS


def _load_model(text: str):
    if os.path.exists(text):
        with open(text) as fh:
            entries = corpus_mod.loads(fh.read())
        if len(entries) != 1:
            raise UsageError(f"{text} holds {len(entries)} models; certify takes one")
        return entries[0][1]
    return corpus_mod.from_descriptor(corpus_mod.parse_inline(text))


def cmd_certify(args) -> int:
    model = _load_model(args.model)
    if model.domain is Domain.DISC:
        verdict = certify_extremal_disc(model, resolution=args.resolution)
    else:
        verdict = certify_extremal_halfplane(model, resolution=args.resolution)
    print(verdict)
    return EXIT_PASS


def cmd_report(args) -> int:
    docs = read_report_dir(args.directory)
    if args.format == "csv":
        text = csv_rows(docs)
    else:
        lines = []
        for d in docs:
            ratio = "null" if d["max_ratio"] is None else repr(d["max_ratio"])
            lines.append(f"{d['verdict']:4s} {d['check']:15s} {d['model']:24s} n={d['n']} max_ratio={ratio}")
        fails = sum(d["verdict"] != "pass" for d in docs)
        lines.append(f"{len(docs) - fails}/{len(docs)} pass")
        text = "\n".join(lines) + "\n"
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_VIOLATION if any(d["verdict"] != "pass" for d in docs) else EXIT_PASS


def _u64(text):
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypcontract", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def campaign_flags(p):
        p.add_argument("--config", help="YAML campaign configuration")
        p.add_argument("--seed", type=_u64, help="override the configured seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("verify", help="run the inequality checks over the corpus")
    campaign_flags(p)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--check", help=f"comma-separated subset of: {','.join(ALL_CHECKS)}")
    p.add_argument("--quiet", action="store_true", help="no per-report progress lines")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="write the model corpus as JSON lines")
    campaign_flags(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("geodesic", help="closed-form and numerical distance between two points")
    p.add_argument("z")
    p.add_argument("w")
    p.add_argument("domain", choices=sorted(_DOMAINS))
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("certify", help="classify a model against the extremal forms")
    p.add_argument("model", help="inline descriptor such as 'PoissonAtom{2, 1.5}', JSON, or a corpus file")
    p.add_argument("--resolution", type=int, default=32)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("report", help="aggregate a directory of JSON reports")
    p.add_argument("directory")
    p.add_argument("--format", choices=("summary", "csv"), default="summary")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError, corpus_mod.CorpusSpecError, DomainError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (QuadratureError, UnsupportedModelError, ArithmeticError, HypContractError) as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except (OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
