"""Command-line front end: ``kla compute|analyze|table|oracle``.

Exit codes: 0 success, 1 usage or parse error, 2 no applicable theorem or
failed hypothesis, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import replace

from . import assembly, groupcat as gc, oracles
from . import formalgroups as fg
from .errors import HypothesisError, KLAError, ValidationError
from .formalgroups import RingSpec

RESULT_SCHEMA = "kla.result/1"
ANALYSIS_SCHEMA = "kla.analysis/1"
TABLE_SCHEMA = "kla.table/1"
ORACLE_SCHEMA = "kla.oracle/1"

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_ORACLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing


def _load_json_arg(text: str):
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return json.load(fh)
    if text.lstrip().startswith("{"):
        return json.loads(text)
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return json.load(fh)
    return None


def _micy(text: str) -> fg.Card:
    key, _, val = text.partition("=")
    if key != "micy" or not val:
        raise ValidationError(f"expected micy=omega|N, got {text!r}")
    return fg.OMEGA if val in ("omega", "oo", "w") else fg.Card(int(val))


def parse_group(text: str) -> gc.GroupDesc:
    """Group shorthand, inline JSON, or a path (optionally prefixed with @)."""
    obj = _load_json_arg(text)
    if obj is not None:
        return gc.from_json(obj)
    kind, _, rest = text.partition(":")
    try:
        if kind == "zd":
            return gc.validate(gc.Zd(int(rest)))
        if kind == "free":
            return gc.validate(gc.Free(int(rest)))
        if kind == "surface":
            return gc.validate(gc.Surface(int(rest)))
        if kind == "tfhyp":
            betti_s, _, micy_s = rest.partition(":")
            betti = tuple(int(b) for b in betti_s.split(","))
            micy = _micy(micy_s) if micy_s else fg.OMEGA
            return gc.validate(gc.TFHyperbolic(betti, micy))
        if kind == "hyp":
            return gc.validate(gc.Hyperbolic(_micy(rest)))
        if kind == "crystZp":
            obj = json.loads(rest)
            obj["type"] = "crystZp"
            return gc.from_json(obj)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad JSON in group descriptor: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad group descriptor {text!r}: {exc}") from exc
    raise ValidationError(f"unknown group descriptor {text!r}")


def parse_ring(text: str) -> RingSpec:
    if text in fg.PRESETS:
        return fg.PRESETS[text]
    obj = _load_json_arg(text)
    if obj is None:
        raise ValidationError(f"unknown ring {text!r}; presets are {', '.join(fg.PRESETS)}")
    return RingSpec.from_config(obj)


def parse_range(text: str) -> tuple[int, ...]:
    """``a..b`` (inclusive), a single integer, or a comma list."""
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad range {text!r}") from exc


def parse_family(text: str) -> list[tuple[str, gc.GroupDesc]]:
    kind, _, rng = text.partition(":")
    if kind not in ("zd", "free", "surface"):
        raise ValidationError(f"table families are zd, free and surface, got {kind!r}")
    return [(f"{kind}:{k}", parse_group(f"{kind}:{k}")) for k in parse_range(rng)]


def _with_jcard(g: gc.GroupDesc, jcard: str | None) -> gc.GroupDesc:
    if jcard is None:
        return g
    if not isinstance(g, gc.CrystZp):
        raise ValidationError("--jcard only applies to crystZp groups")
    c = fg.OMEGA if jcard in ("omega", "oo") else fg.Card(int(jcard))
    return gc.validate(replace(g, j_card=c))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _query(args, group) -> assembly.Query:
    if args.structure_set_preset and args.theory != "Sper":
        raise ValidationError("--structure-set-preset only applies to --theory Sper")
    return assembly.Query(group, parse_ring(args.ring), args.theory, parse_range(args.n),
                          args.decoration, args.localize2, args.structure_set_preset)


# --------------------------------------------------------------- subcommands


def _render_rows(rows, fmt: str) -> list[str]:
    out = []
    for r in rows:
        hyps = ", ".join(f"{h.name} [{h.kind}{'' if h.satisfied else ', FAILED'}]"
                         for h in r.hypotheses) or "none"
        if fmt == "latex":
            out.append(f"{r.degree} & ${fg.render(r.expr, 'latex')}$ \\\\")
        else:
            tag = " (conditional)" if r.conditional else ""
            out.append(f"n={r.degree}: {fg.render(r.expr)}")
            out.append(f"    theorem: {r.theorem}{tag}")
            out.append(f"    hypotheses: {hyps}")
        for note in r.notes:
            out.append(("% note: " if fmt == "latex" else "    note: ") + note)
    return out


def run_compute(args, out) -> int:
    group = _with_jcard(parse_group(args.group), args.jcard)
    q = _query(args, group)
    rows = assembly.evaluate(q)
    if args.format == "json":
        out.write(_dumps({"schema": RESULT_SCHEMA, "group": gc.to_json(group),
                          "ring": q.ring.to_config(), "theory": q.theory,
                          "decoration": q.decoration, "localize2": q.localize2,
                          "rows": [r.to_json() for r in rows]}) + "\n")
        return EXIT_OK
    lines = []
    if args.format == "latex":
        lines += ["\\begin{tabular}{r|l}", "$n$ & value \\\\ \\hline"]
        lines += _render_rows(rows, "latex")
        lines.append("\\end{tabular}")
    else:
        lines.append(f"# {args.theory} of {args.group} over {q.ring.name}"
                     + (f", decoration {q.decoration}" if q.decoration else ""))
        lines += _render_rows(rows, "text")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _applicable(group, ring) -> dict[str, str]:
    res = {}
    for theory in assembly.THEORIES:
        try:
            theorem = assembly._plan(assembly.Query(group, ring, theory, (0,)))[0]
            res[theory] = theorem
        except HypothesisError as exc:
            res[theory] = f"not covered: {exc}"
    return res


def run_analyze(args, out) -> int:
    group = _with_jcard(parse_group(args.group), args.jcard)
    if not isinstance(group, gc.CrystZp):
        raise ValidationError("analyze needs a crystZp group")
    a = gc.analyze(group)
    applies = _applicable(group, parse_ring(args.ring))
    if args.format == "json":
        out.write(_dumps({"schema": ANALYSIS_SCHEMA, "analysis": a.to_json(),
                          "theorems": applies}) + "\n")
        return EXIT_OK

    def c(x):
        return "n/a" if x is None else str(x)
    lines = [f"d = {a.d}", f"p = {a.p}", f"e = {a.e}", f"free away from 0: {a.free}",
             f"H^1 = {a.h1} (order {a.h1.order})", f"|J| = {c(a.j_card)}",
             f"|MICY(A^Q)| = {c(a.micy_fixed_card)}", f"|I1| = {c(a.i1_card)}",
             f"|I2| = {c(a.i2_card)}", f"|J_C| = {c(a.jc_size)}"]
    lines += [f"{t}: {v}" for t, v in applies.items()]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def run_table(args, out) -> int:
    family = parse_family(args.family)
    ring = parse_ring(args.ring)
    degrees = parse_range(args.n)
    cells: list[tuple[str, list]] = []
    for label, group in family:
        try:
            rows = assembly.evaluate(assembly.Query(group, ring, args.theory, degrees,
                                                    args.decoration, args.localize2))
            cells.append((label, [r.expr for r in rows]))
        except KLAError:
            cells.append((label, [None] * len(degrees)))
    deg_sorted = sorted(set(degrees))
    if args.format == "json":
        out.write(_dumps({
            "schema": TABLE_SCHEMA, "family": args.family, "ring": ring.to_config(),
            "theory": args.theory, "degrees": deg_sorted,
            "rows": [{"group": label, "cells": [None if e is None else fg.to_json(e) for e in exprs]}
                     for label, exprs in cells]}) + "\n")
        return EXIT_OK
    fmt = "latex" if args.format == "latex" else "text"

    def show(e):
        if e is None:
            return "ERR"
        return f"${fg.render(e, 'latex')}$" if fmt == "latex" else fg.render(e)
    grid = [["group"] + [f"n={n}" for n in deg_sorted]]
    grid += [[label] + [show(e) for e in exprs] for label, exprs in cells]
    if fmt == "latex":
        lines = ["\\begin{tabular}{l" + "|l" * len(deg_sorted) + "}"]
        lines += [" & ".join(row) + " \\\\" for row in grid]
        lines.append("\\end{tabular}")
    else:
        widths = [max(len(row[i]) for row in grid) for i in range(len(grid[0]))]
        lines = ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in grid]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def run_oracle(args, out) -> int:
    reports = oracles.run_suite(args.seed, args.quick, args.inject_bug)
    bad = [r for r in reports if not r.agree]
    if args.format == "json":
        out.write(_dumps({"schema": ORACLE_SCHEMA, "seed": args.seed, "quick": args.quick,
                          "total": len(reports), "disagreements": len(bad),
                          "reports": [r.to_json() for r in reports]}) + "\n")
    else:
        names: dict[str, list[int]] = {}
        for r in reports:
            s = names.setdefault(r.name, [0, 0])
            s[0] += 1
            s[1] += int(r.agree)
        for name, (n, ok) in names.items():
            out.write(f"{name}: {ok}/{n} agree\n")
        for r in bad[:5]:
            out.write(f"DISAGREE {r.name} {r.input_digest}: main={r.main_value} "
                      f"oracle={r.oracle_value}\n")
    return EXIT_ORACLE if bad else EXIT_OK


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kla", description="Exact K- and L-theory decompositions for "
                "selected infinite groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, group=True):
        if group:
            sp.add_argument("--group", required=True,
                            help="zd:D, free:R, surface:G, tfhyp:1,b1,..[:micy=omega|N], "
                                 "hyp:micy=.., crystZp:JSON, inline JSON or a file")
        sp.add_argument("--ring", default="Z", help="preset (Z, regular, regularQ, dedekind0, "
                                                    "generic) or a RingSpec JSON file")
        sp.add_argument("--format", choices=("text", "latex", "json"), default="text")

    c = sub.add_parser("compute", help="evaluate one group over a degree range")
    common(c)
    c.add_argument("--theory", choices=assembly.THEORIES, default="K")
    c.add_argument("--decoration", default=None)
    c.add_argument("--n", default="0", help="degree range a..b, or a comma list")
    c.add_argument("--localize2", action="store_true", help="invert 2")
    c.add_argument("--structure-set-preset", action="store_true")
    c.add_argument("--jcard", default=None, help="count of maximal finite subgroups (non-split)")

    a = sub.add_parser("analyze", help="invariants of a crystZp action")
    common(a)
    a.add_argument("--jcard", default=None)

    t = sub.add_parser("table", help="degrees x groups table for a family")
    common(t, group=False)
    t.add_argument("--family", required=True, help="zd:a..b, free:a..b or surface:a..b")
    t.add_argument("--theory", choices=assembly.THEORIES, default="K")
    t.add_argument("--decoration", default=None)
    t.add_argument("--n", default="0")
    t.add_argument("--localize2", action="store_true")

    o = sub.add_parser("oracle", help="cross-check against brute-force oracles")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--quick", action="store_true")
    o.add_argument("--format", choices=("text", "json"), default="text")
    o.add_argument("--inject-bug", choices=("h1",), default=None,
                   help="corrupt the main H^1 values to self-test the harness")
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    """Allow ``--n -2..6`` by gluing option values that start with '-'."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--n", "--family", "--group") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        handler = {"compute": run_compute, "analyze": run_analyze,
                   "table": run_table, "oracle": run_oracle}[args.command]
        return handler(args, out)
    except UsageError as exc:
        err.write(f"kla: usage error: {exc}\n")
        return EXIT_USAGE
    except HypothesisError as exc:
        err.write(f"kla: {type(exc).__name__}: {exc}\n")
        return EXIT_HYPOTHESIS
    except (KLAError, ValueError, OSError) as exc:
        err.write(f"kla: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
