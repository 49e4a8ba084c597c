"""Command-line entry point: ``pathsampler sample | bench | verify``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Optional

from . import __version__, engine, metrics, oracles
from .paths import ContractError, Model
from .randomness import BitSource, parse_seed

MODELS = ("motzkin", "motzkin-colored", "schroeder", "schroeder-little")
KINDS = ("positive", "excursion")
SUITES = ("lemmas", "uniformity-exact", "uniformity-empirical", "counts", "limits")

_SAMPLER = {
    ("motzkin", "positive"): "motzkin-positive",
    ("motzkin", "excursion"): "motzkin-excursion",
    ("motzkin-colored", "positive"): "colored-positive",
    ("motzkin-colored", "excursion"): "colored-excursion",
    ("schroeder", "positive"): "schroeder-positive",
    ("schroeder", "excursion"): "schroeder-excursion",
    ("schroeder-little", "positive"): "little-positive",
    ("schroeder-little", "excursion"): "little-excursion",
}
_FLORENTINE = {"motzkin": "florentine-motzkin", "schroeder": "florentine-schroeder"}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one line, no usage dump
        raise CliError(message)


def parse_weight(text: str) -> Fraction:
    try:
        num, _, den = text.partition("/")
        c = Fraction(int(num), int(den) if den else 1)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"invalid weight {text!r}: expected p/q with positive integers") from None
    if c <= 0:
        raise CliError(f"invalid weight {text!r}: must be positive")
    return c


def resolve_sampler(args) -> tuple[str, Optional[Fraction]]:
    """Map ``--model/--kind/--baseline/--weight`` to a registered sampler and weight."""
    if args.weight is not None and args.model != "motzkin-colored":
        raise CliError("--weight only applies to --model motzkin-colored")
    c = None
    if args.model == "motzkin-colored":
        c = parse_weight(args.weight) if args.weight is not None else Fraction(1)
    if getattr(args, "baseline", "recovery") == "florentine":
        if args.model not in _FLORENTINE or args.kind != "positive":
            raise CliError("the florentine baseline covers positive motzkin and schroeder paths")
        name = _FLORENTINE[args.model]
    else:
        name = _SAMPLER[args.model, args.kind]
    spec = engine.get_spec(name)
    n = args.length
    if spec.parity == 0 and n % 2:
        raise CliError(f"{args.model} {args.kind} paths need even length, got {n}")
    spec.validate(n, c)
    return name, c


# -- commands ---------------------------------------------------------------------------


def cmd_sample(args) -> int:
    name, c = resolve_sampler(args)
    seed = parse_seed(args.seed)
    paths = [engine.sample(name, args.length, BitSource(seed, trial=i), c) for i in range(args.count)]
    out = sys.stdout
    if args.format == "steps":
        for p in paths:
            out.write(p.text + "\n")
    elif args.format == "json":
        json.dump([p.to_json() for p in paths], out)
        out.write("\n")
    else:
        out.write("index,length,steps,reads,writes,restarts\n")
        for i, p in enumerate(paths):
            out.write(f"{i},{p.geo_len},{p.text},{p.reads},{p.writes},{p.restarts}\n")
    return 0


def cmd_bench(args) -> int:
    name, c = resolve_sampler(args)
    report = metrics.run_metered(name, args.length, args.trials, parse_seed(args.seed), c,
                                 backend=args.backend, workers=args.workers)
    summary = report.summary()
    print(f"{report.trials} trials in {report.seconds:.2f} s ({report.backend})", file=sys.stderr)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            report.write_csv(fh)
    if args.summary_out:
        with open(args.summary_out, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    if args.format == "csv":
        report.write_csv(sys.stdout)
    else:
        json.dump(summary, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def _check(name: str, ok: bool, **detail) -> dict:
    return {"check": name, "ok": bool(ok), **detail}


def suite_lemmas(max_len: int) -> list[dict]:
    out = []
    for n in range(1, max_len + 1):
        out.append(_check(f"motzkin recover n={n}", oracles.lemma_motzkin_recover(n)))
    for c in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)):
        for n in range(1, min(max_len, 8) + 1):
            out.append(_check(f"colored recover c={c} n={n}", oracles.lemma_motzkin_recover(n, c)))
    for m in range(0, max_len + 1):
        out.append(_check(f"extend l={m}", oracles.lemma_extend(m)))
        out.append(_check(f"little extend l={m}", oracles.lemma_extend(m, little=True)))
    for m in range(1, max_len + 1, 2):
        out.append(_check(f"schroeder recover l={m}", oracles.lemma_schroeder_recover(m)))
    return out


def _exact_targets(max_len: int):
    for name, spec in engine.SAMPLERS.items():
        if name.startswith("florentine") or name == "schroeder-approx":
            continue
        for c in ((Fraction(1, 2), Fraction(2)) if spec.colored else (None,)):
            top = min(max_len, 5) if spec.colored else max_len
            for n in range(top + 1):
                try:
                    spec.validate(n, c)
                except ContractError:
                    continue
                yield name, n, c


def suite_uniformity_exact(max_len: int) -> list[dict]:
    out = []
    for name, n, c in _exact_targets(max_len):
        d = oracles.exact_sampler_dist(name, n, c)
        kind = metrics._OUTPUT_CLASS[name]
        support = [p.text for p in oracles.enumerate_paths(engine.get_spec(name).model, kind, n)]
        if c is None:
            ok = d.is_uniform_over(support)
        else:
            z = sum(oracles._fc_weight(t, c) for t in support)
            ok = set(d.entries) == set(support) and all(
                d.entries[t] == oracles._fc_weight(t, c) / z for t in support)
        label = f"{name} n={n}" + ("" if c is None else f" c={c}")
        out.append(_check(label, ok, support=len(support)))
    return out


def suite_uniformity_empirical(max_len: int, draws: int = 20000, seed: int = 0, alpha: float = 1e-3) -> list[dict]:
    out = []
    for name, spec in engine.SAMPLERS.items():
        if name in ("schroeder-approx", "florentine-schroeder"):
            continue  # length n or n - 1 by design
        c = Fraction(2) if spec.colored else None
        n = max_len if spec.parity is None or max_len % 2 == spec.parity else max_len - 1
        chi2, p, dof = metrics.empirical_uniformity(name, n, draws, seed, c)
        out.append(_check(f"{name} n={n}", p > alpha, chi2=chi2, pvalue=p, dof=dof))
    return out


KNOWN_SEQUENCES = {
    ("motzkin", "excursion"): [1, 1, 2, 4, 9, 21, 51, 127],
    ("schroeder", "excursion"): [1, 0, 2, 0, 6, 0, 22, 0, 90],
    ("schroeder", "little-excursion"): [1, 0, 1, 0, 3, 0, 11, 0, 45],
}


def suite_counts(max_len: int) -> list[dict]:
    out = []
    for model in (Model.MOTZKIN, Model.SCHROEDER):
        kinds = ("positive", "excursion") + (("little-positive", "little-excursion") if model is Model.SCHROEDER else ())
        for kind in kinds:
            seq = [oracles.count(model, kind, n) for n in range(max_len + 1)]
            dp = [oracles.count_dp(model, kind, n) for n in range(max_len + 1)]
            enum = [len(oracles.enumerate_paths(model, kind, n)) for n in range(min(max_len, oracles.MAX_ENUM) + 1)]
            ok = seq == dp and seq[: len(enum)] == enum
            known = KNOWN_SEQUENCES.get((model.value, kind))
            if known:
                ok = ok and seq[: len(known)] == known[: len(seq)]
            out.append(_check(f"{model.value} {kind}", ok, sequence=seq))
    return out


def suite_limits(length: int = 10_000, trials: int = 200, seed: int = 0) -> list[dict]:
    out = []
    for n in (100, 1000, 10_000):
        s = oracles.success_probability_exact(Model.MOTZKIN, n)[1]
        out.append(_check(f"motzkin success n={n}", 0.86 < s < 0.90, value=s,
                          limit=oracles.MOTZKIN_SUCCESS_LIMIT))
    for n in (100, 1000):
        s = oracles.success_probability_exact(Model.SCHROEDER, n)[1]
        out.append(_check(f"schroeder success n={n}", s > 0.94, value=s,
                          limit=oracles.schroeder_success_limit()))
    # finite-trial means: a 4-sigma band around the limiting value
    for name, target in (("motzkin-positive", 1.25), ("motzkin-excursion", 1.75),
                         ("schroeder-positive", 1.25), ("schroeder-excursion", 1.75)):
        r = metrics.run_metered(name, length, trials, seed)
        band = 4 * r.std_time_factor / math.sqrt(trials)
        out.append(_check(f"{name} mean time factor n={length}", abs(r.mean_time_factor - target) < band,
                          value=r.mean_time_factor, target=target, band=band))
    law = metrics.simulate_limit_law(100_000, seed=seed)
    out.append(_check("limit law E[S]", abs(law.s.mean() - 0.25) < 0.01, value=float(law.s.mean()), target=0.25))
    out.append(_check("limit law Var[S]", abs(law.s.var() - 1 / 12) < 0.01, value=float(law.s.var()), target=1 / 12))
    return out


def cmd_verify(args) -> int:
    suite = args.suite
    if suite == "lemmas":
        checks = suite_lemmas(args.max_length or 9)
    elif suite == "uniformity-exact":
        checks = suite_uniformity_exact(args.max_length or 6)
    elif suite == "uniformity-empirical":
        checks = suite_uniformity_empirical(args.max_length or 6, seed=parse_seed(args.seed))
    elif suite == "counts":
        checks = suite_counts(args.max_length or 12)
    else:
        checks = suite_limits(args.length or 10_000, args.trials, parse_seed(args.seed))
    ok = all(c["ok"] for c in checks)
    report = {"suite": suite, "passed": ok, "checks": checks}
    if args.format == "json":
        json.dump(report, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    else:
        for c in checks:
            extra = " ".join(f"{k}={v}" for k, v in c.items() if k not in ("check", "ok"))
            print(f"{'PASS' if c['ok'] else 'FAIL'}  {c['check']}" + (f"  {extra}" if extra else ""))
        print(f"{suite}: {sum(c['ok'] for c in checks)}/{len(checks)} passed")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, default=str)
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, length_required: bool = True) -> None:
    p.add_argument("--model", choices=MODELS, default="motzkin")
    p.add_argument("--kind", choices=KINDS, default="positive")
    p.add_argument("--length", "-n", type=int, required=length_required,
                   help="path length; geometric length for Schröder models (a flat step counts 2)")
    p.add_argument("--weight", help="weight c = p/q of the colored flat step (motzkin-colored only)")
    p.add_argument("--seed", default="0", help="decimal or 0x-prefixed hex")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pathsampler", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw uniform random paths")
    _common(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--format", choices=("steps", "json", "csv"), default="steps")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bench", help="measure time and entropy factors")
    _common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--baseline", choices=("recovery", "florentine"), default="recovery")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="json prints the summary, csv prints per-trial rows")
    p.add_argument("--csv-out", help="also write per-trial rows to this file")
    p.add_argument("--summary-out", help="also write the JSON summary to this file")
    p.add_argument("--backend", choices=("python", "cython"), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--max-length", type=int, default=None)
    p.add_argument("--length", "-n", type=int, default=None, help="length for the limits suite")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", default="0")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--json-out", help="also write the JSON report to this file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        for k in ("length", "count", "trials", "workers"):
            v = getattr(args, k, None)
            if v is not None and v < (0 if k == "length" else 1):
                raise CliError(f"--{k} must be {'nonnegative' if k == 'length' else 'positive'}")
        return args.func(args)
    except (CliError, ContractError, ValueError) as e:
        print(f"pathsampler: error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
