"""Command-line interface.

Exit codes: 0 success, 1 user error (parse, type, bad arguments), 2 internal
error.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import algebra, geometry, infer, lang
from .algebra import ProbAssignment
from .infer import Config
from .lang import LangError


class CliError(click.ClickException):
    exit_code = 1


def _load(path: str) -> tuple:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            source = handle.read()
    except OSError as exc:
        raise CliError(str(exc))
    try:
        program = lang.parse(source)
    except LangError as exc:
        raise CliError(str(exc))
    return program, source


def _parse_probs(text: str, k: int) -> ProbAssignment:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        ps = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad probability list: {exc}")
    if len(ps) != k:
        raise CliError(f"expected {k} probabilities, got {len(ps)}")
    try:
        return ProbAssignment(ps)
    except algebra.AlgebraError as exc:
        raise CliError(str(exc))


def _analyze(program, source, target, window, max_rounds):
    try:
        return infer.analyze(
            program,
            target,
            Config(window=window, max_rounds=max_rounds),
            source=source,
        )
    except (LangError, infer.InferError) as exc:
        raise CliError(str(exc))


@click.group()
def main():
    """Static analysis of probabilistic programs with parametric choice."""


@main.command()
@click.argument("path", type=click.Path())
def check(path):
    """Parse and type-check a program."""
    program, _ = _load(path)
    try:
        ty = lang.type_check(program.term)
    except LangError as exc:
        raise CliError(str(exc))
    click.echo(f"ok: {lang.type_to_text(ty)} with {program.params} parameter(s)")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--budget", default=200, show_default=True, help="Total step budget per path.")
@click.option("--target", type=int, default=None, help="Only show paths reaching this numeral.")
def enumerate(path, budget, target):
    """List reduction paths with their choice words and weights."""
    program, _ = _load(path)
    try:
        lang.type_check(program.term)
        trajectories = lang.enumerate_trajectories(program, budget)
    except LangError as exc:
        raise CliError(str(exc))
    for tr in trajectories:
        if target is not None and tr.normal_form != target:
            continue
        outcome = "unfinished" if tr.normal_form is None else f"-> {tr.normal_form}"
        word = lang.word_to_text(tr.word) or "(empty)"
        click.echo(
            f"{word}  {algebra.mono_to_text(tr.monomial)}  {outcome}  [{tr.steps} steps]"
        )


def _report_text(report):
    lines = []
    lines.append(f"target: {report.target}")
    lines.append(f"stable: {str(report.stable).lower()}  rounds: {report.rounds}")
    if not report.stable:
        lines.append(
            "note: bounds did not stabilize; results are relative to the "
            "explored trajectory space"
        )
    lines.append(f"polynomial: {algebra.poly_to_text(report.poly)}")
    lines.append(f"degree: {report.degree_estimate}")
    for sel in report.selected:
        lines.append(
            f"  {algebra.mono_to_text(sel.monomial)}  word={lang.word_to_text(sel.word) or '(empty)'}"
        )
        for row in sel.cone.rows:
            terms = " + ".join(
                f"{a}*{name}"
                for a, name in zip(row, algebra.var_names(sel.cone.dim))
                if a != 0
            )
            lines.append(f"    {terms or '0'} <= 0")
    return "\n".join(lines)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--target", default=1, show_default=True, help="Ground numeral to reach.")
@click.option("--window", default=2, show_default=True)
@click.option("--max-rounds", default=16, show_default=True)
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
def analyze(path, target, window, max_rounds, output):
    """Compute the stabilized minimal weight polynomial and certificates."""
    program, source = _load(path)
    report = _analyze(program, source, target, window, max_rounds)
    if output == "json":
        click.echo(json.dumps(infer.report_to_json(report), indent=2))
    else:
        click.echo(_report_text(report))


@main.command()
@click.argument("path", type=click.Path())
@click.option("--probs", required=True, help="Comma-separated branch probabilities, one per parameter.")
@click.option("--target", default=1, show_default=True)
@click.option("--window", default=2, show_default=True)
@click.option("--max-rounds", default=16, show_default=True)
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
def i1(path, probs, target, window, max_rounds, output):
    """Most likely trajectory class at the given probabilities."""
    program, source = _load(path)
    p = _parse_probs(probs, program.params)
    report = _analyze(program, source, target, window, max_rounds)
    try:
        res = infer.solve_i1(report, p)
    except infer.InferError as exc:
        raise CliError(str(exc))
    if output == "json":
        click.echo(
            json.dumps(
                {
                    "schema": infer.SCHEMA,
                    "query": "i1",
                    "value": None if res.value == algebra.INF else res.value,
                    "probability": str(res.probability),
                    "winners": [list(m) for m in res.winners],
                    "stable": report.stable,
                },
                indent=2,
            )
        )
    else:
        value = "inf" if res.value == algebra.INF else f"{res.value:.12f}"
        winners = ", ".join(algebra.mono_to_text(m) for m in res.winners)
        click.echo(f"value: {value}")
        click.echo(f"probability: {res.probability}")
        click.echo(f"winners: {winners}")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--monomial", required=True, help="Comma-separated exponents, layout X1,~X1,X2,~X2,...")
@click.option("--probs", default=None, help="Optional probabilities to test for membership.")
@click.option("--target", default=1, show_default=True)
@click.option("--window", default=2, show_default=True)
@click.option("--max-rounds", default=16, show_default=True)
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
def i2(path, monomial, probs, target, window, max_rounds, output):
    """Region of probabilities where a trajectory class is most likely."""
    program, source = _load(path)
    try:
        mu = tuple(int(e) for e in monomial.split(","))
    except ValueError as exc:
        raise CliError(f"bad monomial: {exc}")
    report = _analyze(program, source, target, window, max_rounds)
    try:
        res = infer.solve_i2(report, mu)
    except infer.InferError as exc:
        raise CliError(str(exc))
    member = None
    if probs is not None:
        p = _parse_probs(probs, program.params)
        member = infer.i2_contains(res, p)
    if output == "json":
        obj = {
            "schema": infer.SCHEMA,
            "query": "i2",
            "monomial": list(res.monomial),
            "cone": geometry.cone_to_json(res.cone, res.witness),
            "stable": report.stable,
        }
        if member is not None:
            obj["member"] = member
        click.echo(json.dumps(obj, indent=2))
    else:
        click.echo(f"monomial: {algebra.mono_to_text(res.monomial)}")
        names = algebra.var_names(res.cone.dim)
        for row in res.cone.rows:
            terms = " + ".join(f"{a}*{n}" for a, n in zip(row, names) if a != 0)
            click.echo(f"  {terms or '0'} <= 0")
        if res.witness is not None:
            click.echo(f"witness: {[str(w) for w in res.witness]}")
        if member is not None:
            click.echo(f"member: {str(member).lower()}")


def run():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(1)
    except Exception as exc:  # internal error
        print(f"internal error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    run()
