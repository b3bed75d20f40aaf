"""Mass-action reaction networks extracted from soups, and their simulation.

Extraction instantiates every private domain as a globally fresh public
name, then closes the species set under the reduction rules: a rule
instance whose side strands are all available species adds its products
and one mass-action reaction.  Unreactive duplexes are kept as inert
species by default so garbage can be plotted; there are no degradation
reactions.  Options:

* ``cooperation="two-step"`` expands the trimolecular cooperation step
  into a reversible first binding (an explicit intermediate species) at
  the bind/unbind rates followed by an irreversible completion.
* ``track_waste=True`` adds inert bookkeeping species for displaced top
  strands (bare long domains and two-domain tops), which makes the total
  occurrence count of every long domain an exact invariant of the
  dynamics.
* ``eager_waste=True`` drops unreactive duplex products instead of
  keeping them as inert species.

Deterministic simulation integrates the mass-action rate equations with
an adaptive fourth/fifth order Runge-Kutta scheme; stochastic simulation
is the direct Gillespie method with falling-factorial propensities for
repeated reactants, reproducible for a fixed seed.
"""

from dataclasses import dataclass
import json
import warnings

import numpy as np
from scipy.integrate import solve_ivp

from . import rewrite, syntax, terms
from .errors import BudgetExceeded, NickError
from .syntax import PlotSpec, SimSettings  # re-exported for callers

GHOST = "ghost"
COOPI = "coopi"

# Species and reaction counts reported for this benchmark circuit by the
# reference DSD compiler; reproduced for side-by-side comparison only (the
# compilation abstraction level differs, so a mismatch is expected and the
# report flags rather than hides it).
REFERENCE_CIRCUIT_COUNTS = {
    "single_strand_species": 54,
    "double_strand_species": 108,
    "reactions": 172,
    "odes": 162,
}


def species_label(sp):
    tag = sp[0]
    if tag == GHOST:
        return "waste(" + " ".join(sp[1:]) + ")"
    if tag == COOPI:
        return f"coop({syntax.print_molecule(sp[1])}@{sp[2]})"
    return syntax.print_molecule(sp)


def species_domain_counts(sp):
    """Occurrences of each long domain in a species (bookkeeping included)."""
    out = {}

    def add(d):
        out[d] = out.get(d, 0) + 1

    tag = sp[0]
    if tag == GHOST:
        for d in sp[1:]:
            add(d)
    elif tag == COOPI:
        for d in terms.molecule_domains(sp[1]):
            add(d)
        add(sp[1][1][sp[2] + 1][1])  # the signal domain bound at the site
    else:
        for d in terms.molecule_domains(sp):
            add(d)
    return out


@dataclass(frozen=True)
class CrnReaction:
    reactants: tuple  # ((species index, stoichiometry), ...)
    products: tuple
    rate: float
    rule: str


@dataclass
class Crn:
    species: list  # species tuples in discovery order
    reactions: list  # CrnReaction
    init: dict  # species index -> initial count (multiset multiplicity)
    index: dict  # species tuple -> index

    def labels(self):
        return [species_label(sp) for sp in self.species]


def instantiate_privates(u):
    """Replace nu-slots by fresh public names (distinct from all others)."""
    u = terms.canonicalize(u)
    mapping = syntax.surface_names(u)
    mols = [(terms._map_mol(m, mapping), c) for m, c in u.mols]
    return terms.soup(mols, 0)


def extract_crn(
    initial,
    settings=None,
    max_species=10_000,
    cooperation="trimolecular",
    track_waste=False,
    eager_waste=False,
):
    """Fixed-point closure of species and reactions reachable from *initial*."""
    if cooperation not in ("trimolecular", "two-step"):
        raise ValueError(f"unknown cooperation mode {cooperation!r}")
    settings = settings or SimSettings()
    bind, unbind = settings.bind_rate, settings.unbind_rate

    inst = instantiate_privates(initial)
    species = []
    index = {}
    init = {}

    def intern(sp):
        i = index.get(sp)
        if i is None:
            if len(species) >= max_species:
                raise BudgetExceeded(f"species budget of {max_species} exceeded")
            i = len(species)
            index[sp] = i
            species.append(sp)
        return i

    for mol, count in inst.mols:
        if eager_waste and mol[0] == terms.DUP and not rewrite.is_reactive(mol):
            continue
        init[intern(mol)] = init.get(intern(mol), 0) + count

    reactions = {}

    def emit(reactants, products, rate, rule):
        # identical channels from distinct sites add up mass-action flux
        r = _multiset(intern(sp) for sp in reactants)
        p = _multiset(intern(sp) for sp in products)
        key = (r, p, rule)
        reactions[key] = reactions.get(key, 0.0) + rate

    def duplex_products(dup):
        if dup is None:
            return []
        if eager_waste and not rewrite.is_reactive(dup):
            return []
        return [dup]

    fired_sites = set()  # each enabled site contributes its flux exactly once
    changed = True
    while changed:
        before = (len(reactions), len(species))
        for sp in list(species):
            if sp[0] != terms.DUP:
                continue
            for offset in range(len(sp[1])):
                for rule, consumed, produced, _repl in rewrite._site_matches(
                    sp[1], offset
                ):
                    site = (sp, offset, rule)
                    if site in fired_sites:
                        continue
                    strands = [s for s, c in consumed for _ in range(c)]
                    if not all(s in index for s in strands):
                        continue
                    fired_sites.add(site)
                    repl_dup = rewrite.rewrite_duplex(sp, rule, offset)
                    prods = duplex_products(repl_dup)
                    prods += [s for s, c in produced for _ in range(c)]
                    if track_waste:
                        prods += _displaced_tops(sp, rule, offset)
                    if rule == rewrite.COOPERATION and cooperation == "two-step":
                        inter = (COOPI, sp, offset)
                        sig, cos = strands
                        emit([sp, sig], [inter], bind, rule)
                        emit([inter], [sp, sig], unbind, rule)
                        emit([inter, cos], prods, bind, rule)
                    else:
                        emit([sp] + strands, prods, bind, rule)
        changed = (len(reactions), len(species)) != before

    out = Crn(species=species, reactions=[], init=init, index=index)
    for (r, p, rule), rate in sorted(reactions.items()):
        out.reactions.append(CrnReaction(reactants=r, products=p, rate=rate, rule=rule))
    return out


def _multiset(idxs):
    acc = {}
    for i in idxs:
        acc[i] = acc.get(i, 0) + 1
    return tuple(sorted(acc.items()))


def _displaced_tops(dup, rule, offset):
    segs = dup[1]
    if rule in (rewrite.LEFT_COVERAGE, rewrite.RIGHT_COVERAGE):
        seg = segs[offset + 1] if rule == rewrite.LEFT_COVERAGE else segs[offset]
        return [(GHOST, seg[1])]
    if rule == rewrite.COOPERATION:
        seg = segs[offset + 1]
        return [(GHOST, seg[1], seg[2])]
    return []


# ---------------------------------------------------------------------------
# traces

@dataclass
class SimTrace:
    times: np.ndarray  # (points,)
    values: np.ndarray  # (points, quantities)
    labels: list

    def column(self, label):
        return self.values[:, self.labels.index(label)]


def trace_csv(trace):
    """CSV text: header then one row per sample, floats at 9 significant digits."""
    lines = ["time," + ",".join(trace.labels)]
    for i, t in enumerate(trace.times):
        row = [f"{t:.9g}"] + [f"{v:.9g}" for v in trace.values[i]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# deterministic simulation

def simulate_ode(crn, init=None, settings=None):
    """Integrate the mass-action rate equations on an even sample grid."""
    settings = settings or SimSettings()
    n = len(crn.species)
    y0 = np.zeros(n)
    for i, v in (init if init is not None else crn.init).items():
        y0[i] = float(v)

    n_react = len(crn.reactions)
    stoich_r = np.zeros((n_react, n))
    delta = np.zeros((n_react, n))
    rates = np.zeros(n_react)
    for j, rxn in enumerate(crn.reactions):
        rates[j] = rxn.rate
        for i, s in rxn.reactants:
            stoich_r[j, i] = s
            delta[j, i] -= s
        for i, s in rxn.products:
            delta[j, i] += s

    def rhs(_t, y):
        yc = np.maximum(y, 0.0)
        flux = rates * np.prod(yc[None, :] ** stoich_r, axis=1)
        return flux @ delta

    t_eval = np.linspace(0.0, settings.end_time, settings.points)
    first_step = settings.ode_step or settings.end_time / 1e4
    sol = solve_ivp(
        rhs,
        (0.0, settings.end_time),
        y0,
        method="RK45",
        t_eval=t_eval,
        rtol=1e-6,
        atol=1e-9,
        first_step=first_step,
    )
    if not sol.success:
        reached = sol.t[-1] if len(sol.t) else 0.0
        raise NickError(f"integrator failed at t={reached:.6g}: {sol.message}")
    values = sol.y.T
    if values.min() < -1e-6:
        raise NickError(f"integration went negative ({values.min():.3g})")
    values = np.maximum(values, 0.0)
    return SimTrace(times=t_eval, values=values, labels=crn.labels())


# ---------------------------------------------------------------------------
# stochastic simulation

def simulate_ssa(crn, init=None, settings=None):
    """Direct-method stochastic simulation sampled on the settings grid.

    Absorbing states end the run early; remaining samples repeat the final
    counts.  The trajectory is a deterministic function of the seed.
    """
    settings = settings or SimSettings()
    n = len(crn.species)
    counts = np.zeros(n, dtype=np.int64)
    for i, v in (init if init is not None else crn.init).items():
        if v != int(v):
            raise ValueError("stochastic simulation needs integer counts")
        counts[i] = int(v)

    react_list = [
        (list(rxn.reactants), np.array(_delta_vec(rxn, n), dtype=np.int64), rxn.rate)
        for rxn in crn.reactions
    ]
    rng = np.random.default_rng(settings.seed)
    grid = np.linspace(0.0, settings.end_time, settings.points)
    out = np.zeros((settings.points, n))
    gi = 0
    t = 0.0
    while gi < settings.points:
        props = np.array(
            [rate * _falling(counts, parts) for parts, _d, rate in react_list]
        )
        total = props.sum()
        if total <= 0.0:
            break
        dt = rng.exponential(1.0 / total)
        if t + dt > settings.end_time:
            break
        while gi < settings.points and grid[gi] <= t + dt:
            out[gi] = counts
            gi += 1
        t += dt
        j = int(np.searchsorted(np.cumsum(props), rng.random() * total))
        counts = counts + react_list[j][1]
    while gi < settings.points:
        out[gi] = counts
        gi += 1
    return SimTrace(times=grid, values=out, labels=crn.labels())


def _delta_vec(rxn, n):
    d = [0] * n
    for i, s in rxn.reactants:
        d[i] -= s
    for i, s in rxn.products:
        d[i] += s
    return d


def _falling(counts, parts):
    prop = 1.0
    for i, s in parts:
        c = counts[i]
        for k in range(s):
            prop *= c - k
        if prop <= 0.0:
            return 0.0
    return prop


# ---------------------------------------------------------------------------
# plots

def eval_plots(trace, crn, specs):
    """Project a full trace onto plot specs (sum patterns add columns)."""
    if not specs:
        return SimTrace(
            times=trace.times, values=np.zeros((len(trace.times), 0)), labels=[]
        )
    cols = []
    labels = []
    for spec in specs:
        idxs = [i for i, sp in enumerate(crn.species) if _spec_matches(spec, sp)]
        if not idxs:
            warnings.warn(f"plot spec {spec.label()} matches no species")
            cols.append(np.zeros(len(trace.times)))
        else:
            cols.append(trace.values[:, idxs].sum(axis=1))
        labels.append(spec.label())
    return SimTrace(times=trace.times, values=np.column_stack(cols), labels=labels)


def _spec_matches(spec, sp):
    if sp[0] in (GHOST, COOPI):
        return False
    return spec.matches(sp)


# ---------------------------------------------------------------------------
# reports and exports

def crn_counts(crn):
    singles = sum(1 for sp in crn.species if sp[0] in (terms.SIG, terms.COS))
    doubles = sum(1 for sp in crn.species if sp[0] == terms.DUP)
    other = len(crn.species) - singles - doubles
    counts = {
        "single_strand_species": singles,
        "double_strand_species": doubles,
        "reactions": len(crn.reactions),
        "odes": len(crn.species),
    }
    if other:
        counts["intermediate_species"] = other
    return counts


def counts_report(initial, settings=None):
    """Our species/reaction counts in both cooperation modes, next to the
    reference DSD compilation of this circuit, with match/mismatch flags."""
    report = {"modes": {}, "reference": dict(REFERENCE_CIRCUIT_COUNTS), "match": {}}
    for mode in ("trimolecular", "two-step"):
        crn = extract_crn(initial, settings=settings, cooperation=mode)
        counts = crn_counts(crn)
        report["modes"][mode] = counts
        report["match"][mode] = {
            key: counts.get(key) == ref for key, ref in REFERENCE_CIRCUIT_COUNTS.items()
        }
    return report


def crn_json(crn):
    return {
        "species": crn.labels(),
        "reactions": [
            {
                "reactants": [i for i, s in r.reactants for _ in range(s)],
                "products": [i for i, s in r.products for _ in range(s)],
                "rate": r.rate,
                "rule": r.rule,
            }
            for r in crn.reactions
        ],
        "init": {str(i): v for i, v in sorted(crn.init.items())},
    }


def json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
