"""HTTP service exposing parsing, gate construction, verification,
reduction networks and simulation.

Run with ``nick serve`` or ``uvicorn nickalgebra.service:app``.  Request
and response bodies mirror the library surface; malformed terms and
scripts come back as 400 with the parser message, exceeded budgets as 422
with an explicit inconclusive marker.
"""

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import gates, kinetics, syntax, terms, verify
from .errors import BudgetExceeded, ElaborationError, NickError, ParseError


class ParseRequest(BaseModel):
    text: str
    style: Literal["core", "pictogram"] = "core"


class ParseResponse(BaseModel):
    canonical: str
    rendered: str
    molecules: int
    public_domains: list[str]
    private_domains: int


class GateRequest(BaseModel):
    kind: Literal["transducer", "fork", "catalyst", "join"]
    inputs: list[str]
    outputs: list[str]
    copies: int = Field(default=1, ge=1)


class GateResponse(BaseModel):
    term: str


class VerifyRequest(BaseModel):
    mode: Literal["may", "will"]
    init: str
    target: str
    max_states: int = Field(default=verify.DEFAULT_MAX_STATES, ge=1)
    eager_waste: bool = False


class TraceStep(BaseModel):
    rule: str
    consumed: list[str]
    produced: list[str]


class VerifyResponse(BaseModel):
    verdict: Literal["holds", "fails", "inconclusive"]
    states: int
    edges: int
    witness: Optional[list[TraceStep]] = None
    counterexample: Optional[str] = None


class GraphRequest(BaseModel):
    init: str
    max_states: int = Field(default=verify.DEFAULT_MAX_STATES, ge=1)
    eager_waste: bool = False
    format: Literal["json", "dot"] = "json"


class GraphResponse(BaseModel):
    states: int
    edges: int
    terminals: list[int]
    graph: Optional[dict] = None
    dot: Optional[str] = None


class CrnRequest(BaseModel):
    script: Optional[str] = None
    term: Optional[str] = None
    cooperation: Literal["trimolecular", "two-step"] = "trimolecular"
    eager_waste: bool = False
    max_species: int = Field(default=10_000, ge=1)


class CrnResponse(BaseModel):
    crn: dict
    counts: dict
    report: dict


class SimulateRequest(BaseModel):
    script: Optional[str] = None
    term: Optional[str] = None
    method: Literal["ode", "ssa"] = "ode"
    end_time: Optional[float] = None
    points: Optional[int] = None
    seed: int = 0
    cooperation: Literal["trimolecular", "two-step"] = "trimolecular"
    plots: list[str] = Field(default_factory=list)


class SimulateResponse(BaseModel):
    labels: list[str]
    times: list[float]
    values: list[list[float]]


app = FastAPI(title="nick algebra workbench", version="0.1.0")


def _bad_request(exc):
    raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/parse", response_model=ParseResponse)
def parse(req: ParseRequest):
    try:
        u = terms.canonicalize(syntax.parse_soup_term(req.text))
    except (ParseError, ValueError) as exc:
        _bad_request(exc)
    return ParseResponse(
        canonical=syntax.print_soup(u),
        rendered=syntax.print_soup(u, style=req.style),
        molecules=u.molecule_count(),
        public_domains=sorted(terms.public_domains(u)),
        private_domains=u.n_priv,
    )


@app.post("/gate", response_model=GateResponse)
def gate(req: GateRequest):
    try:
        spec = gates.GateSpec(
            kind=req.kind,
            inputs=tuple(req.inputs),
            outputs=tuple(req.outputs),
            copies=req.copies,
        )
        u = gates.build(spec)
    except ValueError as exc:
        _bad_request(exc)
    return GateResponse(term=syntax.print_soup(u))


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(req: VerifyRequest):
    try:
        initial = syntax.parse_soup_term(req.init)
        target = syntax.parse_soup_term(req.target)
    except ParseError as exc:
        _bad_request(exc)
    fn = verify.may_reach if req.mode == "may" else verify.will_reach
    result = fn(initial, target, max_states=req.max_states, eager_waste=req.eager_waste)
    witness = None
    if result.witness is not None:
        witness = [TraceStep(**verify.trace_step_json(r)) for r, _ in result.witness]
    counterexample = None
    if result.counterexample is not None:
        counterexample = syntax.print_soup(result.counterexample)
    return VerifyResponse(
        verdict=result.verdict,
        states=result.states,
        edges=result.edges,
        witness=witness,
        counterexample=counterexample,
    )


@app.post("/states", response_model=GraphResponse)
def states(req: GraphRequest):
    try:
        initial = syntax.parse_soup_term(req.init)
    except ParseError as exc:
        _bad_request(exc)
    try:
        graph = verify.build_state_graph(
            initial, max_states=req.max_states, eager_waste=req.eager_waste
        )
    except BudgetExceeded as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    terminals = verify.terminal_states(graph)
    if req.format == "dot":
        return GraphResponse(
            states=len(graph.states),
            edges=len(graph.edges),
            terminals=terminals,
            dot=verify.export_dot(graph),
        )
    return GraphResponse(
        states=len(graph.states),
        edges=len(graph.edges),
        terminals=terminals,
        graph=verify.graph_json(graph),
    )


def _request_soup(script, term):
    if (script is None) == (term is None):
        raise HTTPException(
            status_code=400, detail="provide exactly one of 'script' or 'term'"
        )
    if script is not None:
        program = syntax.parse_dsd_script(script)
        return syntax.elaborate(program)
    initial = terms.canonicalize(syntax.parse_soup_term(term))
    return initial, syntax.SimSettings(), []


@app.post("/crn", response_model=CrnResponse)
def crn_endpoint(req: CrnRequest):
    try:
        initial, settings, _plots = _request_soup(req.script, req.term)
        crn = kinetics.extract_crn(
            initial,
            settings=settings,
            max_species=req.max_species,
            cooperation=req.cooperation,
            eager_waste=req.eager_waste,
        )
        report = kinetics.counts_report(initial, settings=settings)
    except (ParseError, ElaborationError, ValueError) as exc:
        _bad_request(exc)
    except BudgetExceeded as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return CrnResponse(
        crn=kinetics.crn_json(crn), counts=kinetics.crn_counts(crn), report=report
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest):
    try:
        initial, settings, plots = _request_soup(req.script, req.term)
        if req.end_time is not None:
            settings.end_time = req.end_time
        if req.points is not None:
            settings.points = req.points
        settings.seed = req.seed
        settings.method = req.method
        for text in req.plots:
            stream = syntax._Stream(text)
            plots.append(syntax._parse_plot_spec(stream))
        crn = kinetics.extract_crn(
            initial, settings=settings, cooperation=req.cooperation
        )
        if req.method == "ode":
            trace = kinetics.simulate_ode(crn, settings=settings)
        else:
            trace = kinetics.simulate_ssa(crn, settings=settings)
        if plots:
            trace = kinetics.eval_plots(trace, crn, plots)
    except (ParseError, ElaborationError, ValueError) as exc:
        _bad_request(exc)
    except BudgetExceeded as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except NickError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return SimulateResponse(
        labels=trace.labels,
        times=[float(t) for t in trace.times],
        values=[[float(v) for v in row] for row in trace.values],
    )
