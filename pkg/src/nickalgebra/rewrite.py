"""The reduction relation: rule matching and single-step application.

The five rule shapes match consecutive segments of a duplex:

    exchange_fwd    (t, x.t)      + <t^ x>          ->  (t.x, t)      + <x t^>
    exchange_rev    (t.x, t)      + <x t^>          ->  (t, x.t)      + <t^ x>
    left_coverage   (t, x)        + <t^ x>          ->  (t.x,)
    right_coverage  (x, t)        + <x t^>          ->  (x.t,)
    cooperation     (t, x.y, t)   + <t^ x> + <y t^> ->  (t.x, y.t)

plus ``waste``, which deletes a duplex admitting none of the above in any
context.  Displaced tops that are bare long domains or two-long-domain
strands are inert and are never materialized.  Waste is an explicit
transition by default so state graphs count pre- and post-cleanup states
separately; pass ``eager_waste=True`` to fold the cleanup into every step.
"""

from dataclasses import dataclass

from . import terms
from .errors import InapplicableReaction

EXCHANGE_FWD = "exchange_fwd"
EXCHANGE_REV = "exchange_rev"
LEFT_COVERAGE = "left_coverage"
RIGHT_COVERAGE = "right_coverage"
COOPERATION = "cooperation"
WASTE = "waste"

RULES = (EXCHANGE_FWD, EXCHANGE_REV, LEFT_COVERAGE, RIGHT_COVERAGE, COOPERATION, WASTE)


@dataclass(frozen=True)
class Reaction:
    """One applicable rule instance.

    ``duplex_index`` locates the target duplex in the soup's sorted entry
    list, ``offset`` the leftmost matched segment.  ``consumed`` and
    ``produced`` are multisets (tuples of (strand, count)) of free single
    strands.  Waste instances consume and produce nothing.
    """

    rule: str
    duplex: tuple
    duplex_index: int
    offset: int
    consumed: tuple = ()
    produced: tuple = ()

    def sort_key(self):
        return (self.duplex_index, self.offset, RULES.index(self.rule))


def _site_matches(segs, i):
    """Yield (rule, consumed, produced, replacement) for the site at *i*."""
    a = segs[i]
    b = segs[i + 1] if i + 1 < len(segs) else None
    if b is None:
        return
    if a[0] == terms.T and b[0] == terms.XT:
        x = b[1]
        yield (
            EXCHANGE_FWD,
            (((terms.SIG, x), 1),),
            (((terms.COS, x), 1),),
            ((terms.TX, x), (terms.T,)),
        )
    if a[0] == terms.TX and b[0] == terms.T:
        x = a[1]
        yield (
            EXCHANGE_REV,
            (((terms.COS, x), 1),),
            (((terms.SIG, x), 1),),
            ((terms.T,), (terms.XT, x)),
        )
    if a[0] == terms.T and b[0] == terms.X:
        x = b[1]
        yield (LEFT_COVERAGE, (((terms.SIG, x), 1),), (), ((terms.TX, x),))
    if a[0] == terms.X and b[0] == terms.T:
        x = a[1]
        yield (RIGHT_COVERAGE, (((terms.COS, x), 1),), (), ((terms.XT, x),))
    if (
        a[0] == terms.T
        and b[0] == terms.XY
        and i + 2 < len(segs)
        and segs[i + 2][0] == terms.T
    ):
        x, y = b[1], b[2]
        yield (
            COOPERATION,
            (((terms.SIG, x), 1), ((terms.COS, y), 1)),
            (),
            ((terms.TX, x), (terms.XT, y)),
        )


def _match_width(rule):
    return 3 if rule == COOPERATION else 2


def is_reactive(dup):
    """True when the duplex can react in some context."""
    segs = dup[1]
    for i in range(len(segs)):
        for _ in _site_matches(segs, i):
            return True
    return False


def applicable_reactions(u):
    """All rule instances enabled in *u*, one per (duplex kind, site, rule).

    Availability of consumed strands in the multiset is respected; several
    identical duplex copies contribute a single instance (its multiplicity
    is reported by :func:`successors`).
    """
    counts = dict(u.mols)
    out = []
    for idx, (mol, _count) in enumerate(u.mols):
        if mol[0] != terms.DUP:
            continue
        segs = mol[1]
        reactive = False
        for i in range(len(segs)):
            for rule, consumed, produced, _repl in _site_matches(segs, i):
                reactive = True
                if all(counts.get(s, 0) >= c for s, c in consumed):
                    out.append(
                        Reaction(
                            rule=rule,
                            duplex=mol,
                            duplex_index=idx,
                            offset=i,
                            consumed=consumed,
                            produced=produced,
                        )
                    )
        if not reactive:
            out.append(Reaction(rule=WASTE, duplex=mol, duplex_index=idx, offset=0))
    return out


def rewrite_duplex(dup, rule, offset):
    """The duplex left behind when *rule* fires at *offset* (None for waste)."""
    if rule == WASTE:
        return None
    segs = dup[1]
    for cand, _cons, _prod, repl in _site_matches(segs, offset):
        if cand == rule:
            width = _match_width(rule)
            return (terms.DUP, segs[:offset] + repl + segs[offset + width :])
    raise InapplicableReaction(f"{rule} does not match {dup!r} at offset {offset}")


def apply_reaction(u, r):
    """Successor soup after firing *r* in *u*, canonicalized.

    Raises :class:`InapplicableReaction` unless *r* is enabled in *u*.
    """
    counts = dict(u.mols)
    if (
        r.duplex_index >= len(u.mols)
        or u.mols[r.duplex_index][0] != r.duplex
        or counts.get(r.duplex, 0) < 1
    ):
        raise InapplicableReaction(f"duplex {r.duplex!r} not at index {r.duplex_index}")
    for s, c in r.consumed:
        if counts.get(s, 0) < c:
            raise InapplicableReaction(f"missing consumed strand {s!r}")

    replacement = rewrite_duplex(r.duplex, r.rule, r.offset)
    counts[r.duplex] -= 1
    if replacement is not None:
        counts[replacement] = counts.get(replacement, 0) + 1
    for s, c in r.consumed:
        counts[s] -= c
    for s, c in r.produced:
        counts[s] = counts.get(s, 0) + c

    succ = terms.canonicalize(terms.Soup(tuple(sorted(counts.items())), u.n_priv))
    assert _well_formed(succ), "reduction produced an ill-formed soup"
    return succ


def _well_formed(u):
    try:
        terms.validate_soup(u)
    except ValueError:
        return False
    return True


def strip_unreactive(u):
    """Erase every unreactive duplex (the eager form of the waste rule)."""
    kept = [(m, c) for m, c in u.mols if m[0] != terms.DUP or is_reactive(m)]
    return terms.canonicalize(terms.Soup(tuple(kept), u.n_priv))


def successors(u, eager_waste=False):
    """Distinct one-step successors of *u* up to algebraic equality.

    Returns a list of (reaction, successor, multiplicity) triples in a
    deterministic order; instances leading to the same canonical successor
    are merged, keeping the first instance and summing the copy counts of
    their target duplexes.
    """
    counts = dict(u.mols)
    merged = {}
    order = []
    for r in sorted(applicable_reactions(u), key=Reaction.sort_key):
        if eager_waste and r.rule == WASTE:
            continue
        succ = apply_reaction(u, r)
        if eager_waste:
            succ = strip_unreactive(succ)
        mult = counts[r.duplex]
        if succ in merged:
            prev_r, prev_m = merged[succ]
            merged[succ] = (prev_r, prev_m + mult)
        else:
            merged[succ] = (r, mult)
            order.append(succ)
    return [(merged[s][0], s, merged[s][1]) for s in order]
