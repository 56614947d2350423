import pytest

from tropinf.algebra import Poly, mono_to_text, poly_to_text
from tropinf.geometry import np_min
from tropinf.lang import (
    BOOL,
    NAT,
    Arrow,
    Choice,
    TypeCheckError,
    enumerate_trajectories,
    parse,
)
from tropinf.typesys import (
    Entry,
    IAtom,
    IArrow,
    TypesysError,
    apply_rule,
    bound_schedule,
    conclusion_entry,
    conclusion_poly,
    ctx_sum,
    iarrow,
    itype_to_text,
    merge,
    refinements,
    search,
    stabilize,
    traj_poly,
)

from conftest import load, load_source, random_program

import itertools


class TestRefinements:
    def test_counts(self):
        assert len(refinements(BOOL, 1)) == 2
        assert len(refinements(NAT, 1)) == 2
        assert len(refinements(NAT, 3)) == 4
        # multisets of size <= 1 over {0,1} give 3 argument choices, times 2
        # result atoms
        assert len(refinements(Arrow(BOOL, BOOL), 1)) == 6
        assert len(refinements(Arrow(BOOL, BOOL), 2)) == 12

    def test_atom_bound(self):
        atoms = {it.n for it in refinements(NAT, 2)}
        assert atoms == {0, 1, 2}

    def test_text(self):
        assert itype_to_text(IAtom(3)) == "3"
        assert itype_to_text(iarrow([IAtom(0), IAtom(0)], IAtom(1))) == "[0, 0] -o 1"
        assert itype_to_text(iarrow([], IAtom(1))) == "[] -o 1"


class TestMerge:
    def unit(self, mono, fixes=0, word=None):
        p = Poly.monomial(mono)
        traces = {tuple(mono): word} if word is not None else {}
        return Entry(ctx=(), itype=IAtom(1), poly=p, full=p, fixes=fixes, traces=traces)

    def test_same_key_summed(self):
        out = merge([self.unit((1, 0)), self.unit((0, 1))])
        assert len(out) == 1
        assert poly_to_text(out[0].poly) == "~X1 + X1"

    def test_fix_counts_kept_separate(self):
        a, b = self.unit((1, 0), fixes=0), self.unit((1, 0), fixes=1)
        assert len(merge([a, b])) == 2
        assert len(merge([a, b], split_fixes=False)) == 1

    def test_dominated_monomial_dropped(self):
        out = merge([self.unit((1, 0)), self.unit((2, 1))])
        assert out[0].poly.support() == [(1, 0)]

    def test_trace_kept_for_surviving_monomials(self):
        out = merge(
            [
                self.unit((1, 0), word=((1, 0),)),
                self.unit((0, 1), word=((1, 1),)),
            ]
        )
        assert out[0].traces == {(1, 0): ((1, 0),), (0, 1): ((1, 1),)}

    def test_trace_tie_is_lex_smallest(self):
        a = self.unit((1, 1))
        a = Entry(a.ctx, a.itype, a.poly, a.full, 0, {(1, 1): ((1, 1), (1, 0))})
        b = Entry(a.ctx, a.itype, a.poly, a.full, 0, {(1, 1): ((1, 0), (1, 1))})
        out = merge([a, b])
        assert out[0].traces[(1, 1)] == ((1, 0), (1, 1))


class TestApplyRule:
    def test_choice_shifts_weight(self):
        unit = Entry((), IAtom(1), Poly.unit(2), Poly.unit(2), 0, {(0, 0): ()})
        site = parse("0 +[X1] 1").term
        assert isinstance(site, Choice)
        out = apply_rule("Oplus", [[unit], [unit]], site, dim=2)
        assert len(out) == 1
        assert out[0].poly.support() == [(0, 1), (1, 0)]
        assert out[0].traces == {(1, 0): ((1, 0),), (0, 1): ((1, 1),)}

    def test_unknown_rule(self):
        with pytest.raises(TypesysError):
            apply_rule("Nope", [], parse("0").term, dim=2)

    def test_ifz_selects_on_scrutinee_atom(self):
        z = Entry((), IAtom(0), Poly.monomial((1, 0)), Poly.monomial((1, 0)), 0, {(1, 0): ((1, 0),)})
        nz = Entry((), IAtom(2), Poly.monomial((0, 1)), Poly.monomial((0, 1)), 0, {(0, 1): ((1, 1),)})
        then = Entry((), IAtom(1), Poly.unit(2), Poly.unit(2), 0, {(0, 0): ()})
        orelse = Entry((), IAtom(0), Poly.unit(2), Poly.unit(2), 0, {(0, 0): ()})
        site = parse("ifz 0 then 1 else 0").term
        out = apply_rule("Ifz", [[z, nz], [then], [orelse]], site, dim=2)
        got = {(e.itype.n, e.poly.support()[0]) for e in out}
        assert got == {(1, (1, 0)), (0, (0, 1))}


class TestCtx:
    def test_ctx_sum_merges_multisets(self):
        a = (("x", (IAtom(0),)),)
        b = (("x", (IAtom(0), IAtom(1))), ("y", (IAtom(1),)))
        out = ctx_sum(a, b)
        d = dict(out)
        assert d["x"] == (IAtom(0), IAtom(0), IAtom(1))
        assert d["y"] == (IAtom(1),)


class TestSearchGoldens:
    def test_loop_small_budget(self):
        deriv = search(parse(load_source("m3")), 1, n=1, p=1)
        assert poly_to_text(conclusion_poly(deriv, 1)) == "~X1"

    def test_three_choice_program(self):
        deriv = search(load("m1"), 1, n=1, p=1)
        assert poly_to_text(conclusion_poly(deriv, 1)) == "~X1^3 + X1^2"
        assert poly_to_text(conclusion_poly(deriv, 0)) == "X1*~X1"

    def test_duplicating_towers(self):
        for height in (2, 3, 4):
            deriv = search(load(f"m4_{height}"), 1, n=1, p=1)
            assert conclusion_poly(deriv, 1).support() == [
                (0, height),
                (height, 0),
            ]

    def test_traj_poly_refines_to_conclusion(self):
        for name in ("m1", "m4_2", "tower2"):
            deriv = search(load(name), 1, n=2, p=2)
            full = traj_poly(deriv, 1)
            assert np_min(full)[1] == conclusion_poly(deriv, 1)

    def test_conclusion_matches_enumeration(self):
        for name, budget in (("m1", 40), ("m4_2", 40), ("tower2", 60)):
            program = load(name)
            deriv = search(program, 1, n=2, p=3)
            trajs = [
                t
                for t in enumerate_trajectories(program, budget)
                if t.normal_form is not None and t.normal_form == 1
            ]
            dim = 2 * max(program.params, 1)
            oracle = np_min(Poly.from_support(dim, [t.monomial for t in trajs]))[1]
            assert conclusion_poly(deriv, 1) == oracle

    def test_arrow_program_rejected(self):
        with pytest.raises(TypeCheckError):
            search(parse(r"\x. x +[X1] succ x"), 1, n=1, p=1)


class TestStabilize:
    def test_schedule(self):
        assert list(itertools.islice(bound_schedule(), 6)) == [
            (1, 1),
            (2, 1),
            (2, 2),
            (3, 2),
            (3, 3),
            (4, 3),
        ]

    def test_goldens(self):
        expect = {
            ("m1", 1): "~X1^3 + X1^2",
            ("m1", 0): "X1*~X1",
            ("m3", 1): "~X1",
            ("m4_2", 1): "~X1^2 + X1^2",
            ("m4_3", 1): "~X1^3 + X1^3",
            ("tower2", 1): "~X1*X3 + X1*X2",
        }
        for (name, target), text in expect.items():
            res = stabilize(load(name), target)
            assert res.stable, (name, target)
            assert res.rounds == [(1, 1), (2, 1), (2, 2)]
            assert poly_to_text(res.poly) == text

    def test_recursive_sampler(self):
        res = stabilize(load("m2"), 1)
        assert res.stable and res.rounds == [(1, 1), (2, 1), (2, 2), (3, 2)]
        assert poly_to_text(res.poly) == (
            "~X1*~X3*~X5 + ~X1*X3*~X4 + ~X1*~X2*X3*X4*~X5"
            " + X1*~X2*~X5 + X1*~X2*X3*~X4*X5 + X1*X2*~X4"
        )

    def test_stability_requires_both_bound_increases(self):
        # The target is only reachable with multisets of size 2, so the first
        # two rounds (both at p=1) agree on an empty polynomial.  Stability
        # must not be declared from rounds that never grew p.
        from tropinf.lang import App, Choice, Ifz, Lam, Program, Succ, Var, Zero

        prog = Program(
            Succ(
                App(
                    Lam("v", Ifz(Var("v"), Var("v"), Var("v"))),
                    Choice(2, Succ(Zero()), Zero()),
                )
            ),
            2,
        )
        res = stabilize(prog, 1)
        assert res.stable
        assert res.poly.support() == [(0, 0, 0, 2), (0, 0, 1, 1)]

    def test_budget_exhaustion_reported(self):
        res = stabilize(load("m3"), 1, max_rounds=1)
        assert not res.stable and res.rounds == [(1, 1)]

    def test_traces_replay_to_conclusion(self):
        res = stabilize(load("m4_3"), 1)
        entry = conclusion_entry(res.derivation, 1)
        words = {mono_to_text(m): w for m, w in entry.traces.items()}
        assert words["X1^3"] == ((1, 0), (1, 0), (1, 0))
        assert words["~X1^3"] == ((1, 1), (1, 1), (1, 1))

    def test_random_programs_match_enumeration(self, rng):
        for _ in range(15):
            program = random_program(rng, max_nodes=10)
            trajs = enumerate_trajectories(program, 60)
            if any(t.normal_form is None for t in trajs):
                continue
            res = stabilize(program, 1)
            if not res.stable:
                continue
            dim = 2 * max(program.params, 1)
            support = [t.monomial for t in trajs if t.normal_form == 1]
            if support:
                oracle = np_min(Poly.from_support(dim, support))[1]
            else:
                oracle = Poly.zero(dim)
            assert res.poly == oracle, program
