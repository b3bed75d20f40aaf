import numpy as np
import pytest

from nickalgebra.errors import BudgetExceeded
from nickalgebra.gates import join, transducer
from nickalgebra.kinetics import (
    Crn,
    CrnReaction,
    REFERENCE_CIRCUIT_COUNTS,
    SimSettings,
    counts_report,
    crn_json,
    eval_plots,
    extract_crn,
    instantiate_privates,
    simulate_ode,
    simulate_ssa,
    species_domain_counts,
    trace_csv,
)
from nickalgebra.rewrite import EXCHANGE_FWD, EXCHANGE_REV
from nickalgebra.syntax import PlotSpec, elaborate, parse_dsd_script, parse_soup_term
from nickalgebra.terms import TX, XT, cosignal, parallel, public_domains, signal, soup


def two_species_crn(rate=1.0):
    """A + B -> C with mass-action rate, as a hand-built network."""
    return Crn(
        species=[("sig", "A"), ("sig", "B"), ("cos", "C")],
        reactions=[
            CrnReaction(reactants=((0, 1), (1, 1)), products=((2, 1),), rate=rate,
                        rule="left_coverage")
        ],
        init={0: 1.0, 1: 1.0},
        index={},
    )


class TestExtractCrn:
    def test_single_left_coverage_system(self):
        crn = extract_crn(parse_soup_term("t^:[x] | <t^ x>"))
        assert len(crn.species) == 3
        assert len(crn.reactions) == 1
        rxn = crn.reactions[0]
        assert rxn.rule == "left_coverage"
        assert rxn.rate == 1.0
        assert len(rxn.products) == 1

    def test_privates_become_fresh_publics(self):
        t = transducer("x", "y", 1)
        inst = instantiate_privates(t)
        assert inst.n_priv == 0
        assert public_domains(inst) == {"x", "y", "a"}

    def test_exchange_pairs_reversible_with_equal_rates(self):
        init = parallel(transducer("x", "y", 1), soup([signal("x")]))
        crn = extract_crn(init)
        fwd = [r for r in crn.reactions if r.rule == EXCHANGE_FWD]
        rev = [r for r in crn.reactions if r.rule == EXCHANGE_REV]
        assert fwd and len(fwd) == len(rev)
        rev_set = {(r.reactants, r.products, r.rate) for r in rev}
        for r in fwd:
            assert (r.products, r.reactants, r.rate) in rev_set

    def test_strand_discovery_reenables_sites(self):
        # the cosignal enabling the second site only appears after the first fires
        init = parse_soup_term("t^:[x t^]:[a t^]:[a] | <t^ x> | [b]:t^")
        crn = extract_crn(init)
        rules = {r.rule for r in crn.reactions}
        assert EXCHANGE_FWD in rules
        # <x t^> produced by the exchange never matches [b]:t^, so no coverage
        assert "right_coverage" not in rules

    def test_species_budget(self):
        init = parallel(transducer("x", "y", 1), soup([signal("x")]))
        with pytest.raises(BudgetExceeded):
            extract_crn(init, max_species=3)

    def test_two_step_cooperation_adds_intermediate(self):
        init = parse_soup_term("t^:[b y]:t^ | <t^ b> | <y t^>")
        tri = extract_crn(init)
        two = extract_crn(init, cooperation="two-step")
        assert len(tri.reactions) == 1
        assert len(two.reactions) == 3
        assert len(two.species) == len(tri.species) + 1
        rates = sorted(r.rate for r in two.reactions)
        assert rates == [1.0, 1.0, 1.0]

    def test_eager_waste_drops_inert_products(self):
        init = parse_soup_term("t^:[x] | <t^ x>")
        crn = extract_crn(init, eager_waste=True)
        assert len(crn.species) == 2  # the covered duplex is swept
        assert crn.reactions[0].products == ()

    def test_ghost_tracking_balances_domains(self):
        init = parse_soup_term("t^:[b y]:t^ | <t^ b> | <y t^>")
        crn = extract_crn(init, track_waste=True)
        (rxn,) = crn.reactions
        for dom in ("b", "y"):
            before = sum(
                s * species_domain_counts(crn.species[i]).get(dom, 0)
                for i, s in rxn.reactants
            )
            after = sum(
                s * species_domain_counts(crn.species[i]).get(dom, 0)
                for i, s in rxn.products
            )
            assert before == after

    def test_init_counts_follow_multiset(self):
        init = parse_soup_term("3 * t^:[x] | 2 * <t^ x>")
        crn = extract_crn(init)
        by_label = dict(zip(crn.labels(), (crn.init.get(i, 0) for i in range(3))))
        assert by_label["t^:[x]"] == 3
        assert by_label["<t^ x>"] == 2


class TestSimulateOde:
    def test_bimolecular_closed_form(self):
        # c(t) = t / (1 + t) solves dc/dt = (1-c)^2 with c(0) = 0
        settings = SimSettings(end_time=1.0, points=101)
        trace = simulate_ode(two_species_crn(), settings=settings)
        c = trace.values[:, 2]
        expected = trace.times / (1.0 + trace.times)
        assert np.abs(c - expected).max() < 1e-6
        assert abs(c[-1] - 0.5) < 1e-6

    def test_empty_crn_constant(self):
        crn = Crn(species=[("sig", "A")], reactions=[], init={0: 2.0}, index={})
        trace = simulate_ode(crn, settings=SimSettings(end_time=5.0, points=10))
        assert np.allclose(trace.values[:, 0], 2.0)

    def test_grid_shape(self):
        settings = SimSettings(end_time=2.0, points=7)
        trace = simulate_ode(two_species_crn(), settings=settings)
        assert trace.times[0] == 0.0 and trace.times[-1] == 2.0
        assert len(trace.times) == 7
        assert (np.diff(trace.times) > 0).all()
        assert trace.values.min() >= 0.0

    def test_explicit_init_overrides(self):
        settings = SimSettings(end_time=1.0, points=5)
        trace = simulate_ode(two_species_crn(), init={0: 0.0, 1: 0.0}, settings=settings)
        assert np.allclose(trace.values, 0.0)


class TestSimulateSsa:
    def test_single_firing(self):
        crn = Crn(
            species=[("sig", "A"), ("sig", "B")],
            reactions=[CrnReaction(reactants=((0, 1),), products=((1, 1),), rate=1.0,
                                   rule="left_coverage")],
            init={0: 1},
            index={},
        )
        trace = simulate_ssa(crn, settings=SimSettings(end_time=100.0, points=5,
                                                       method="ssa", seed=3))
        assert trace.values[-1].tolist() == [0.0, 1.0]

    def test_deterministic_given_seed(self):
        settings = SimSettings(end_time=1.0, points=20, method="ssa", seed=11)
        a = simulate_ssa(two_species_crn(1e-3), init={0: 1000, 1: 1000}, settings=settings)
        b = simulate_ssa(two_species_crn(1e-3), init={0: 1000, 1: 1000}, settings=settings)
        assert np.array_equal(a.values, b.values)

    def test_law_of_large_numbers_agreement(self):
        # counts n = volume * concentration with volume 1000, so the
        # bimolecular propensity scales by rate / volume
        volume = 1000
        settings = SimSettings(end_time=1.0, points=11, method="ssa", seed=5)
        ssa = simulate_ssa(
            two_species_crn(1.0 / volume), init={0: volume, 1: volume},
            settings=settings,
        )
        ode = simulate_ode(two_species_crn(), settings=SimSettings(end_time=1.0, points=11))
        assert abs(ssa.values[-1][2] / volume - ode.values[-1][2]) < 0.05

    def test_fractional_counts_rejected(self):
        with pytest.raises(ValueError):
            simulate_ssa(two_species_crn(), init={0: 0.5, 1: 1},
                         settings=SimSettings(method="ssa"))

    def test_identical_reactant_propensity(self):
        # 2A -> B: propensity uses n(n-1); from a single A nothing can fire
        crn = Crn(
            species=[("sig", "A"), ("sig", "B")],
            reactions=[CrnReaction(reactants=((0, 2),), products=((1, 1),), rate=1.0,
                                   rule="cooperation")],
            init={0: 1},
            index={},
        )
        trace = simulate_ssa(crn, settings=SimSettings(end_time=10.0, points=3,
                                                       method="ssa", seed=0))
        assert trace.values[-1].tolist() == [1.0, 0.0]

    def test_crosstalk_residual_small_at_steady_state(self):
        from nickalgebra.terms import replicate

        t_xay = parse_soup_term(
            "t^:[x t^]:[a t^]:[a] | <t^ a> | [x]:[t^ y]:[t^ a]:t^ | <y t^>"
        )
        t_yax = parse_soup_term(
            "t^:[y t^]:[a t^]:[a] | <t^ a> | [y]:[t^ x]:[t^ a]:t^ | <x t^>"
        )
        pop = parallel(
            replicate(t_xay, 100), replicate(t_yax, 100), soup([(signal("x"), 100)])
        )
        crn = extract_crn(pop)
        settings = SimSettings(end_time=1000.0, points=20, method="ssa", seed=0)
        trace = simulate_ssa(crn, settings=settings)
        residual = trace.values[-1][crn.index[signal("a")]]
        recovered = trace.values[-1][crn.index[signal("x")]]
        assert residual <= 10  # small relative to the population of 100
        assert recovered >= 90


class TestEvalPlots:
    def test_exact_column(self):
        settings = SimSettings(end_time=1.0, points=5)
        crn = two_species_crn()
        trace = simulate_ode(crn, settings=settings)
        proj = eval_plots(trace, crn, [PlotSpec(kind="exact", mol=("cos", "C"))])
        assert proj.labels == ["<C t^>"]
        assert np.array_equal(proj.values[:, 0], trace.values[:, 2])

    def test_sum_pattern_on_join_garbage(self):
        init = parallel(
            join(["x", "y"], "z", 1), soup([signal("x"), signal("y")])
        )
        settings = SimSettings(end_time=500.0, points=40)
        crn = extract_crn(init, settings=settings)
        trace = simulate_ode(crn, settings=settings)
        spec = PlotSpec(kind="sum", pattern=((TX, None), (XT, None)))
        proj = eval_plots(trace, crn, [spec])
        garbage = proj.values[:, 0]
        assert (np.diff(garbage) >= -1e-9).all()  # monotone accumulation
        assert garbage[-1] > 0.9  # the collector has fired on most gates

    def test_no_match_warns_and_zeroes(self):
        settings = SimSettings(end_time=1.0, points=5)
        crn = two_species_crn()
        trace = simulate_ode(crn, settings=settings)
        with pytest.warns(UserWarning):
            proj = eval_plots(trace, crn, [PlotSpec(kind="exact", mol=("sig", "q"))])
        assert np.allclose(proj.values, 0.0)


class TestReports:
    def test_counts_report_includes_reference_and_flags(self, circuit_script_text):
        initial, settings, _plots = elaborate(parse_dsd_script(circuit_script_text))
        report = counts_report(initial, settings=settings)
        assert report["reference"] == REFERENCE_CIRCUIT_COUNTS
        assert set(report["modes"]) == {"trimolecular", "two-step"}
        for mode in report["modes"]:
            counts = report["modes"][mode]
            assert counts["odes"] == counts["single_strand_species"] + counts[
                "double_strand_species"
            ] + counts.get("intermediate_species", 0)
            assert set(report["match"][mode]) == set(REFERENCE_CIRCUIT_COUNTS)

    def test_crn_json_shape(self):
        crn = extract_crn(parse_soup_term("t^:[x] | <t^ x>"))
        payload = crn_json(crn)
        assert payload["species"] == crn.labels()
        (rxn,) = payload["reactions"]
        assert sorted(rxn) == ["products", "rate", "reactants", "rule"]
        assert len(rxn["reactants"]) == 2  # indices expanded by stoichiometry

    def test_trace_csv_format(self):
        settings = SimSettings(end_time=1.0, points=3)
        trace = simulate_ode(two_species_crn(), settings=settings)
        text = trace_csv(trace)
        lines = text.strip().split("\n")
        assert lines[0] == "time,<t^ A>,<t^ B>,<C t^>"
        assert len(lines) == 4
        assert lines[1].startswith("0,1,1,0")


class TestDomainConservation:
    """With displaced tops tracked, the total occurrence count of every
    public long domain is constant along a trajectory (1e-6 relative)."""

    @staticmethod
    def _domain_totals(crn, trace):
        import numpy as np

        totals = {}
        doms = set()
        for sp in crn.species:
            doms.update(species_domain_counts(sp))
        for d in sorted(doms):
            w = np.array(
                [species_domain_counts(sp).get(d, 0) for sp in crn.species],
                dtype=float,
            )
            totals[d] = trace.values @ w
        return totals

    def test_circuit_ode_trajectory(self, circuit_script_text):
        initial, settings, _plots = elaborate(parse_dsd_script(circuit_script_text))
        settings.end_time = 30.0
        settings.points = 60
        crn = extract_crn(initial, settings=settings, track_waste=True)
        trace = simulate_ode(crn, settings=settings)
        for dom, series in self._domain_totals(crn, trace).items():
            drift = abs(series - series[0]).max()
            assert drift <= 1e-6 * max(series[0], 1.0), dom

    def test_join_ssa_trajectory(self):
        init = parallel(
            join(["x", "y"], "z", 5), soup([(signal("x"), 5), (signal("y"), 5)])
        )
        crn = extract_crn(init, track_waste=True)
        settings = SimSettings(end_time=200.0, points=30, method="ssa", seed=4)
        trace = simulate_ssa(crn, settings=settings)
        for dom, series in self._domain_totals(crn, trace).items():
            assert (series == series[0]).all(), dom


class TestCircuitOde:
    def test_endpoint_and_garbage(self, circuit_script_text):
        initial, settings, plots = elaborate(parse_dsd_script(circuit_script_text))
        settings.end_time = 30.0
        settings.points = 100
        crn = extract_crn(initial, settings=settings)
        trace = simulate_ode(crn, settings=settings)
        proj = eval_plots(trace, crn, plots)
        finals = proj.values[-1]
        assert all(0.2 < v <= 0.5 for v in finals[:4])  # mid-run: past t=30
        garbage = proj.values[:, 4]
        assert (np.diff(garbage) >= -1e-9).all()

    def test_two_step_endpoint_matches_trimolecular(self, circuit_script_text):
        initial, settings, plots = elaborate(parse_dsd_script(circuit_script_text))
        settings.end_time = 30.0
        settings.points = 50
        results = []
        for mode in ("trimolecular", "two-step"):
            crn = extract_crn(initial, settings=settings, cooperation=mode)
            proj = eval_plots(simulate_ode(crn, settings=settings), crn, plots)
            results.append(proj.values[-1][:4])
        assert np.abs(results[0] - results[1]).max() < 1e-3
