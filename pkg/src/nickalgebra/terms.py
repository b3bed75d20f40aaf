"""Core data model for two-domain strand displacement soups.

A soup is a finite multiset of molecules together with a prenex list of
private (nu-bound) long-domain slots.  Molecules are either two-domain
single strands (signal ``t.x`` / cosignal ``x.t``) or top-nicked double
strands, stored as a sequence of segments.  Only the five segment shapes
``t``, ``x``, ``t.x``, ``x.t`` and ``x.y`` are constructible, so every
representable value satisfies the structural restrictions of the calculus;
forbidden strands (``xty``, three-domain singles, ...) have no
representation at all.

Molecules are plain nested tuples: they hash, compare and dedupe cheaply,
which matters because canonicalization sits in the inner loop of state
space exploration.  Use the constructor functions (``signal``, ``duplex``,
``seg_tx``...) rather than building tuples by hand; they validate shapes.

Private domains are stored as opaque slot tokens ``%000``, ``%001``...
so a soup value never contains binder names; surface names are resolved
by the parser and re-synthesized by the printer.  Alpha-equivalence is
therefore decided purely by slot renumbering.
"""

from dataclasses import dataclass
from itertools import permutations
import re

TOEHOLD = "t"

# molecule tags
SIG = "sig"
COS = "cos"
DUP = "dup"

# segment tags (first tuple element)
T = "t"
X = "x"
TX = "tx"
XT = "xt"
XY = "xy"

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")
_PRIV_PREFIX = "%"
_MAX_PRIVATES = 1000


def private(slot):
    """Opaque token for nu-slot *slot*; zero-padded so tokens sort numerically."""
    if not 0 <= slot < _MAX_PRIVATES:
        raise ValueError(f"private slot out of range: {slot}")
    return f"%{slot:03d}"


def is_private(dom):
    return dom.startswith(_PRIV_PREFIX)


def private_slot(dom):
    return int(dom[1:])


def check_public(name):
    """Validate a public long-domain name; the toehold token is reserved."""
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise ValueError(f"not a valid long-domain name: {name!r}")
    if name == TOEHOLD:
        raise ValueError("the toehold token 't' is reserved and cannot name a long domain")
    return name


def _check_dom(dom):
    if isinstance(dom, str) and is_private(dom):
        return dom
    return check_public(dom)


# ---------------------------------------------------------------------------
# constructors

def signal(x):
    """Single strand t.x (information flowing forward)."""
    return (SIG, _check_dom(x))


def cosignal(x):
    """Single strand x.t (information flowing backward)."""
    return (COS, _check_dom(x))


def seg_t():
    return (T,)


def seg_x(x):
    return (X, _check_dom(x))


def seg_tx(x):
    return (TX, _check_dom(x))


def seg_xt(x):
    return (XT, _check_dom(x))


def seg_xy(x, y):
    return (XY, _check_dom(x), _check_dom(y))


def duplex(*segs):
    """Top-nicked double strand from a segment sequence (empty = inert blank)."""
    for s in segs:
        if not (isinstance(s, tuple) and s and s[0] in (T, X, TX, XT, XY)):
            raise ValueError(f"not a segment: {s!r}")
    return (DUP, tuple(segs))


EMPTY_DUPLEX = (DUP, ())


def is_duplex(mol):
    return mol[0] == DUP


def is_single(mol):
    return mol[0] in (SIG, COS)


def molecule_domains(mol):
    """Yield every long-domain token occurring in *mol* (with repetition)."""
    if mol[0] == DUP:
        for seg in mol[1]:
            yield from seg[1:]
    else:
        yield mol[1]


# ---------------------------------------------------------------------------
# soups

@dataclass(frozen=True)
class Soup:
    """Multiset of molecules plus the number of prenex nu-slots.

    ``mols`` is a sorted tuple of (molecule, count) pairs with positive
    counts.  Structural equality of two Soup values is only meaningful
    after :func:`canonicalize`; use :func:`alg_equal` otherwise.

    Instances are immutable values and safe to share between workers.
    """

    mols: tuple = ()
    n_priv: int = 0

    def count(self, mol):
        for m, c in self.mols:
            if m == mol:
                return c
        return 0

    def molecule_count(self):
        return sum(c for _, c in self.mols)

    def molecules(self):
        """Iterate molecules with multiplicity expanded."""
        for m, c in self.mols:
            for _ in range(c):
                yield m

    def __str__(self):
        from . import syntax

        return syntax.print_soup(self)


EMPTY_SOUP = Soup()


def soup(mol_counts, n_priv=0):
    """Normalized multiset constructor.

    *mol_counts* is an iterable of molecules or (molecule, count) pairs.
    Equal molecules are merged, zero counts dropped, entries sorted.  The
    result is deterministic but not canonical (slot numbering and blank
    duplexes are untouched); see :func:`canonicalize`.
    """
    acc = {}
    for item in mol_counts:
        if (
            isinstance(item, tuple)
            and len(item) == 2
            and isinstance(item[1], int)
            and not isinstance(item[0], str)
        ):
            mol, count = item
        else:
            mol, count = item, 1
        if count < 0:
            raise ValueError(f"negative multiplicity for {mol!r}")
        if count:
            acc[mol] = acc.get(mol, 0) + count
    return Soup(tuple(sorted(acc.items())), n_priv)


def parallel(*soups):
    """Multiset union; private slots of later soups are shifted to stay disjoint."""
    mols = []
    offset = 0
    for u in soups:
        if offset:
            shift = {private(i): private(i + offset) for i in range(u.n_priv)}
            mols.extend((_map_mol(m, shift), c) for m, c in u.mols)
        else:
            mols.extend(u.mols)
        offset += u.n_priv
    return soup(mols, offset)


def replicate(u, n):
    """n parallel copies sharing the same private slots."""
    if n < 0:
        raise ValueError("copy count must be nonnegative")
    return soup(((m, c * n) for m, c in u.mols), u.n_priv)


def _map_mol(mol, mapping):
    tag = mol[0]
    if tag == DUP:
        return (
            DUP,
            tuple((s[0],) + tuple(mapping.get(d, d) for d in s[1:]) for s in mol[1]),
        )
    return (tag, mapping.get(mol[1], mol[1]))


def _map_mol_fn(mol, fn):
    tag = mol[0]
    if tag == DUP:
        return (DUP, tuple((s[0],) + tuple(fn(d) for d in s[1:]) for s in mol[1]))
    return (tag, fn(mol[1]))


def validate_soup(u):
    """Check structural invariants; raises ValueError on any violation."""
    if not isinstance(u, Soup):
        raise ValueError(f"not a soup: {u!r}")
    last = None
    for m, c in u.mols:
        if c <= 0:
            raise ValueError(f"nonpositive count for {m!r}")
        if last is not None and not last < m:
            raise ValueError("molecule entries not strictly sorted")
        last = m
        validate_molecule(m)
        for d in molecule_domains(m):
            if is_private(d) and private_slot(d) >= u.n_priv:
                raise ValueError(f"private slot {d} outside nu-list of length {u.n_priv}")
    return u


def validate_molecule(mol):
    if not isinstance(mol, tuple) or not mol:
        raise ValueError(f"not a molecule: {mol!r}")
    tag = mol[0]
    if tag in (SIG, COS):
        if len(mol) != 2:
            raise ValueError(f"bad single strand: {mol!r}")
        _check_dom(mol[1])
    elif tag == DUP:
        for s in mol[1]:
            shape = {T: 1, X: 2, TX: 2, XT: 2, XY: 3}.get(s[0])
            if shape is None or len(s) != shape:
                raise ValueError(f"bad segment: {s!r}")
            for d in s[1:]:
                _check_dom(d)
    else:
        raise ValueError(f"unknown molecule tag: {tag!r}")
    return mol


# ---------------------------------------------------------------------------
# public domains / substitution / fresh privates

def public_domains(u):
    """The set of long-domain names occurring in *u* and not nu-bound."""
    out = set()
    for m, _ in u.mols:
        for d in molecule_domains(m):
            if not is_private(d):
                out.add(d)
    return out


def substitute(u, x, y):
    """Replace free occurrences of public domain *x* by public *y*.

    Private slots are nameless, so binder capture cannot arise; binder
    renaming happens once and for all when surface syntax is resolved.
    """
    check_public(x)
    check_public(y)
    if x == y:
        return u
    mapping = {x: y}
    return soup(((_map_mol(m, mapping), c) for m, c in u.mols), u.n_priv)


def fresh_private(u, hint="a"):
    """Extend the nu-list by one unused slot; returns (new soup, new domain).

    *hint* does not affect the value (slots are nameless); printers pick
    display names independently.
    """
    dom = private(u.n_priv)
    return Soup(u.mols, u.n_priv + 1), dom


# ---------------------------------------------------------------------------
# canonicalization

# Full permutation search is exact and cheap for the handful of privates a
# gate soup carries; beyond this we first split slots by an occurrence-
# profile refinement and only permute within still-symmetric groups.
_FULL_SEARCH_MAX = 5
_MAX_CANDIDATES = 100_000


def canonicalize(u):
    """Normal form modulo the algebraic equality axioms.

    Blank duplexes are erased, unused nu-slots dropped, molecules sorted
    under a fixed total order, and private slots renumbered so that two
    soups have equal canonical forms exactly when they are related by the
    monoid, commutative-monoid and scoping laws (including alpha-renaming
    of privates).  Idempotent.
    """
    entries = [(m, c) for m, c in u.mols if c > 0 and m != EMPTY_DUPLEX]
    used = sorted(
        {d for m, _ in entries for d in molecule_domains(m) if is_private(d)}
    )
    if not used:
        return Soup(tuple(sorted(entries)), 0)

    if len(used) <= _FULL_SEARCH_MAX:
        orders = permutations(used)
    else:
        orders = _refined_orders(entries, used)

    best = None
    for order in orders:
        mapping = {old: private(i) for i, old in enumerate(order)}
        cand = tuple(sorted((_map_mol(m, mapping), c) for m, c in entries))
        if best is None or cand < best:
            best = cand
    return Soup(best, len(used))


def alg_equal(u1, u2):
    """Algebraic equality: equal canonical forms."""
    return canonicalize(u1) == canonicalize(u2)


def _refined_orders(entries, used):
    """Candidate slot orderings from iterated occurrence-profile refinement.

    A slot's profile records, up to renaming of the other slots (replaced by
    their current colors), in which molecule shapes and positions it occurs.
    Profiles are invariant under slot renaming, so ordering the color groups
    by their profile keys is canonical.  Within a group, members that never
    share a molecule with any member of a multi-slot group are freely
    interchangeable (every assignment renders the same sorted multiset), so
    one fixed order suffices; only cross-linked groups, where profiles
    cannot see which same-colored partner a slot is tied to, fall back to
    permutation search.
    """
    colors = {p: 0 for p in used}
    while True:
        profiles = {}
        for p in used:
            sig = []
            for m, c in entries:
                shaped = _profile_shape(m, p, colors)
                if shaped is not None:
                    sig.append((shaped, c))
            profiles[p] = (colors[p], tuple(sorted(sig)))
        ranked = sorted(set(profiles.values()))
        new_colors = {p: ranked.index(profiles[p]) for p in used}
        if new_colors == colors:
            break
        colors = new_colors

    groups = {}
    for p in used:
        groups.setdefault(colors[p], []).append(p)
    group_list = [sorted(groups[c]) for c in sorted(groups)]

    multi = {p for g in group_list if len(g) > 1 for p in g}
    linked = set()
    for m, _c in entries:
        touched = {d for d in molecule_domains(m) if d in multi}
        if len(touched) > 1:
            linked.update(touched)

    total = 1
    for g in group_list:
        if g[0] in linked:
            for k in range(2, len(g) + 1):
                total *= k
        if total > _MAX_CANDIDATES:
            raise ValueError(
                f"too many symmetric private domains to canonicalize ({len(used)} slots)"
            )

    def gen(idx):
        if idx == len(group_list):
            yield ()
            return
        heads = (
            permutations(group_list[idx])
            if group_list[idx][0] in linked
            else (tuple(group_list[idx]),)
        )
        for head in heads:
            for tail in gen(idx + 1):
                yield head + tail

    return gen(0)


def _profile_shape(mol, p, colors):
    """Molecule shape with *p* marked and other privates replaced by color."""
    found = False

    def conv(d):
        nonlocal found
        if d == p:
            found = True
            return ("self",)
        if is_private(d):
            return ("col", colors[d])
        return ("pub", d)

    tag = mol[0]
    if tag == DUP:
        shaped = (
            DUP,
            tuple((s[0],) + tuple(conv(d) for d in s[1:]) for s in mol[1]),
        )
    else:
        shaped = (tag, conv(mol[1]))
    return shaped if found else None
