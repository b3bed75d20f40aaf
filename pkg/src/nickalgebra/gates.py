"""Constructors for transducer, fork, catalyst and join gate populations.

Each constructor returns a canonical soup of n parallel copies sharing one
nu-slot per private letter, since a private domain can only be private to
a population, not to an individual molecule.  Output domains in a fork are
stacked in reverse inside the output duplex so they are released in list
order; a join's collector duplex reclaims the second input's cosignal only
after the private unlock strand has been released, so the gate commits to
nothing until every input has arrived.
"""

from dataclasses import dataclass

from . import terms
from .terms import cosignal, duplex, seg_t, seg_tx, seg_xt, seg_x, seg_xy, signal

KINDS = ("transducer", "fork", "catalyst", "join")


@dataclass(frozen=True)
class GateSpec:
    """A gate family instance: kind, input/output domains, copy count."""

    kind: str
    inputs: tuple
    outputs: tuple
    copies: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.copies < 1:
            raise ValueError("copy count must be at least 1")
        n_in, n_out = len(self.inputs), len(self.outputs)
        if self.kind == "transducer" and (n_in, n_out) != (1, 1):
            raise ValueError("a transducer has one input and one output")
        if self.kind == "fork" and (n_in != 1 or n_out < 2):
            raise ValueError("a fork has one input and at least two outputs")
        if self.kind == "catalyst":
            if n_in != 2 or n_out != 2 or self.outputs[0] != self.inputs[1]:
                raise ValueError(
                    "a catalyst has inputs (x, y) and outputs (y, z)"
                )
        if self.kind == "join":
            if n_in not in (2, 3) or n_out != 1:
                raise ValueError("a join has two or three inputs and one output")


def build(spec):
    if spec.kind == "transducer":
        return transducer(spec.inputs[0], spec.outputs[0], spec.copies)
    if spec.kind == "fork":
        return fork(spec.inputs[0], list(spec.outputs), spec.copies)
    if spec.kind == "catalyst":
        return catalyst(spec.inputs[0], spec.inputs[1], spec.outputs[1], spec.copies)
    return join(list(spec.inputs), spec.outputs[0], spec.copies)


def _population(mols, n_priv, n):
    u = terms.replicate(terms.soup(mols, n_priv), n)
    return terms.canonicalize(u)


def transducer(x, y, n=1):
    """Population converting <t^ x> into <t^ y>."""
    terms.check_public(x)
    terms.check_public(y)
    if n < 1:
        raise ValueError("copy count must be at least 1")
    a = terms.private(0)
    mols = [
        duplex(seg_t(), seg_xt(x), seg_xt(a), seg_x(a)),
        signal(a),
        duplex(seg_x(x), seg_tx(y), seg_tx(a), seg_t()),
        cosignal(y),
    ]
    return _population(mols, 1, n)


def fork(x, outs, n=1):
    """Population converting <t^ x> into one signal per domain in *outs*."""
    terms.check_public(x)
    for o in outs:
        terms.check_public(o)
    if len(outs) < 2:
        raise ValueError("a fork needs at least two outputs")
    if n < 1:
        raise ValueError("copy count must be at least 1")
    a = terms.private(0)
    right = [seg_x(x)]
    right.extend(seg_tx(o) for o in reversed(outs))
    right.append(seg_tx(a))
    right.append(seg_t())
    mols = [
        duplex(seg_t(), seg_xt(x), seg_xt(a), seg_x(a)),
        signal(a),
        duplex(*right),
    ]
    mols.extend(cosignal(o) for o in outs)
    return _population(mols, 1, n)


def catalyst(x, y, z, n=1):
    """Population converting <t^ x> + <t^ y> into <t^ y> + <t^ z>.

    The fork's output half with the y cosignal omitted: the input half
    releases <y t^> itself, and with only the first input present every
    step is reversible, so the input is returned to the soup.
    """
    for d in (x, y, z):
        terms.check_public(d)
    if n < 1:
        raise ValueError("copy count must be at least 1")
    a = terms.private(0)
    mols = [
        duplex(seg_t(), seg_xt(x), seg_xt(y), seg_xt(a), seg_x(a)),
        signal(a),
        duplex(seg_x(x), seg_tx(z), seg_tx(y), seg_tx(a), seg_t()),
        cosignal(z),
    ]
    return _population(mols, 1, n)


def join(inputs, z, n=1):
    """Population absorbing one signal per input domain and emitting <t^ z>.

    Binary joins use one collector ``t^:[b y]:t^``; the ternary form chains
    two unlock domains and two collectors so every intermediate cosignal is
    reclaimed.
    """
    for d in inputs:
        terms.check_public(d)
    terms.check_public(z)
    if n < 1:
        raise ValueError("copy count must be at least 1")
    if len(inputs) == 2:
        x, y = inputs
        a, b = terms.private(0), terms.private(1)
        mols = [
            duplex(seg_t(), seg_xt(x), seg_xt(y), seg_xt(a), seg_x(a)),
            signal(a),
            duplex(seg_x(x), seg_tx(b), seg_tx(z), seg_tx(a), seg_t()),
            cosignal(b),
            cosignal(z),
            duplex(seg_t(), seg_xy(b, y), seg_t()),
        ]
        return _population(mols, 2, n)
    if len(inputs) == 3:
        w, x, y = inputs
        a, b, c = terms.private(0), terms.private(1), terms.private(2)
        mols = [
            duplex(seg_t(), seg_xt(w), seg_xt(x), seg_xt(y), seg_xt(a), seg_x(a)),
            signal(a),
            duplex(seg_x(w), seg_tx(b), seg_tx(c), seg_tx(z), seg_tx(a), seg_t()),
            cosignal(b),
            cosignal(c),
            cosignal(z),
            duplex(seg_t(), seg_xy(b, x), seg_t()),
            duplex(seg_t(), seg_xy(c, y), seg_t()),
        ]
        return _population(mols, 3, n)
    raise ValueError("joins support two or three inputs")
