"""Sectioned text format describing (Gamma, v, mu) and run options.

Example::

    # sparse nodes, unit weights, one atom
    [sequence]
    gamma = 2^n
    [weights]
    v = 1
    [measure]
    atom z=3i w=1
    atoms n=2..40 z=2^n+1 w=4^(-n)
    circle r=3 w=1
    radial a=3 b=6 alpha=0 c=1
    [options]
    truncate = 64
    tail_monotone = false

``gamma`` and ``v`` take either an expression in ``n`` or a bracketed list
``[e1, e2, ...]``. ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from . import expr as ex
from . import measure as mm
from .criteria import CheckOptions
from .errors import EvaluationError, InvalidInstanceError, ParseError
from .space import DEFAULT_TRUNCATION, GammaSequence, SpacePair, WeightSequence

SECTIONS = ("sequence", "weights", "measure", "options")
SEQUENCE_KEYS = {"sequence": "gamma", "weights": "v"}
COMPONENT_FIELDS = {
    "atom": ("z", "w"),
    "atoms": ("n", "z", "w"),
    "circle": ("r", "w"),
    "radial": ("a", "b", "alpha", "c"),
}
OPTION_TYPES = {
    "truncate": int,
    "tol": float,
    "window": int,
    "discretize": int,
    "tail_monotone": bool,
    "decay_margin": float,
    "liminf_floor": float,
}


@dataclass(frozen=True)
class SequenceSpec:
    """Either a generator expression or an explicit list of expressions."""

    expr: Optional[ex.Node] = None
    items: Optional[tuple] = None
    line: int = field(default=0, compare=False)

    def text(self) -> str:
        if self.expr is not None:
            return ex.to_text(self.expr)
        return "[" + ", ".join(ex.to_text(e) for e in self.items) + "]"


@dataclass(frozen=True)
class ComponentDecl:
    kind: str
    fields: tuple  # ((key, Node), ...) in canonical order; "n" holds (lo, hi)
    line: int = field(default=0, compare=False)

    def get(self, key):
        return dict(self.fields)[key]


@dataclass(frozen=True)
class InstanceFile:
    gamma: SequenceSpec
    v: SequenceSpec
    measure: tuple = ()
    options: tuple = ()  # ((key, value), ...) in canonical order

    def option(self, key, default=None):
        return dict(self.options).get(key, default)


# ---------------------------------------------------------------------------
# parsing

_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_FIELD = re.compile(r"(?<![A-Za-z0-9_.])([A-Za-z_][A-Za-z0-9_]*)\s*=")
_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$")


def _strip_comment(line):
    k = line.find("#")
    return line if k < 0 else line[:k]


def _expr_at(text, line, col):
    """Parse a sub-string that starts at 1-based column ``col``."""
    lead = len(text) - len(text.lstrip())
    body = text.strip()
    if not body:
        raise ParseError("missing value", line, col)
    return ex.parse_expr(body, line, col + lead)


def _parse_sequence(value, line, col):
    stripped = value.strip()
    lead = len(value) - len(value.lstrip())
    if not stripped.startswith("["):
        return SequenceSpec(expr=_expr_at(value, line, col), line=line)
    if not stripped.endswith("]"):
        raise ParseError("unterminated list, expected ']'", line, col + lead + len(stripped))
    inner_col = col + lead + 1
    inner = stripped[1:-1]
    items, start = [], 0
    for part in inner.split(","):
        items.append(_expr_at(part, line, inner_col + start))
        start += len(part) + 1
    return SequenceSpec(items=tuple(items), line=line)


def _parse_component(text, line, col):
    m = re.match(r"\s*([A-Za-z_]+)", text)
    if m is None:
        raise ParseError("expected a component keyword", line, col)
    kind = m.group(1)
    if kind not in COMPONENT_FIELDS:
        raise ParseError(f"unknown measure component {kind!r} "
                         f"(expected one of {', '.join(COMPONENT_FIELDS)})",
                         line, col + m.start(1))
    rest_off = m.end()
    rest = text[rest_off:]
    keys = list(_FIELD.finditer(rest))
    if not keys:
        raise ParseError(f"{kind}: expected key=value fields", line, col + rest_off)
    gap = rest[:keys[0].start()]
    if gap.strip():
        raise ParseError(f"unexpected text {gap.strip()!r}", line,
                         col + rest_off + len(gap) - len(gap.lstrip()))
    allowed = COMPONENT_FIELDS[kind]
    got = {}
    for i, km in enumerate(keys):
        key = km.group(1)
        kcol = col + rest_off + km.start(1)
        if key not in allowed:
            raise ParseError(f"unknown field {key!r} for {kind} "
                             f"(expected {', '.join(allowed)})", line, kcol)
        if key in got:
            raise ParseError(f"duplicate field {key!r}", line, kcol)
        end = keys[i + 1].start() if i + 1 < len(keys) else len(rest)
        vtext = rest[km.end():end]
        vcol = col + rest_off + km.end()
        if key == "n":
            rm = _RANGE.match(vtext)
            if rm is None:
                raise ParseError("index range must look like lo..hi", line, vcol)
            got[key] = (int(rm.group(1)), int(rm.group(2)))
        else:
            got[key] = _expr_at(vtext, line, vcol)
    missing = [k for k in allowed if k not in got]
    if missing:
        raise ParseError(f"{kind}: missing field(s) {', '.join(missing)}", line, col)
    return ComponentDecl(kind, tuple((k, got[k]) for k in allowed), line)


def _parse_option(key, value, line, col):
    kind = OPTION_TYPES[key]
    v = value.strip()
    try:
        if kind is bool:
            if v.lower() not in ("true", "false"):
                raise ValueError
            return v.lower() == "true"
        if kind is int:
            if not re.fullmatch(r"[+-]?\d+", v):
                raise ValueError
            return int(v)
        out = float(v)
        if not math.isfinite(out):
            raise ValueError
        return out
    except ValueError:
        raise ParseError(f"malformed {kind.__name__} {v!r} for option {key!r}",
                         line, col) from None


def parse(text: str) -> InstanceFile:
    section = None
    seen = set()
    seqs = {}
    components = []
    options = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        col = indent + 1
        hm = _HEADER.match(body)
        if hm:
            name = hm.group(1)
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, col)
            if name in seen:
                raise ParseError(f"duplicate section [{name}]", lineno, col)
            seen.add(name)
            section = name
            continue
        if body.startswith("["):
            raise ParseError("malformed section header", lineno, col)
        if section is None:
            raise ParseError("content before the first section header", lineno, col)
        if section == "measure":
            components.append(_parse_component(body, lineno, col))
            continue
        am = _ASSIGN.match(body)
        if am is None:
            raise ParseError("expected key = value", lineno, col)
        key, value = am.group(1), am.group(2)
        vcol = col + am.start(2)
        if section in SEQUENCE_KEYS:
            want = SEQUENCE_KEYS[section]
            if key != want:
                raise ParseError(f"unknown key {key!r} in [{section}] (expected {want!r})",
                                 lineno, col)
            if section in seqs:
                raise ParseError(f"duplicate key {key!r}", lineno, col)
            seqs[section] = _parse_sequence(value, lineno, vcol)
        else:
            if key not in OPTION_TYPES:
                raise ParseError(f"unknown option {key!r}", lineno, col)
            if key in options:
                raise ParseError(f"duplicate option {key!r}", lineno, col)
            options[key] = _parse_option(key, value, lineno, vcol)
    eof = max(len(text.splitlines()), 1)
    for section, key in SEQUENCE_KEYS.items():
        if section not in seen:
            raise ParseError(f"missing [{section}] section", eof, 1)
        if section not in seqs:
            raise ParseError(f"[{section}] section has no '{key} = ...' line", eof, 1)
    opts = tuple((k, options[k]) for k in OPTION_TYPES if k in options)
    return InstanceFile(seqs["sequence"], seqs["weights"], tuple(components), opts)


# ---------------------------------------------------------------------------
# printing

def _format_option(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_text(inst: InstanceFile) -> str:
    lines = ["[sequence]", f"gamma = {inst.gamma.text()}",
             "[weights]", f"v = {inst.v.text()}"]
    if inst.measure:
        lines.append("[measure]")
        for comp in inst.measure:
            parts = [comp.kind]
            for key, val in comp.fields:
                if key == "n":
                    parts.append(f"n={val[0]}..{val[1]}")
                else:
                    parts.append(f"{key}={ex.to_text(val)}")
            lines.append(" ".join(parts))
    if inst.options:
        lines.append("[options]")
        lines.extend(f"{k} = {_format_option(v)}" for k, v in inst.options)
    return "\n".join(lines) + "\n"


def with_option(inst: InstanceFile, key: str, value) -> InstanceFile:
    if key not in OPTION_TYPES:
        raise KeyError(key)
    opts = dict(inst.options)
    opts[key] = OPTION_TYPES[key](value)
    return replace(inst, options=tuple((k, opts[k]) for k in OPTION_TYPES if k in opts))


def with_field(inst: InstanceFile, index: int, key: str, value: float) -> InstanceFile:
    """Replace one numeric field of the ``index``-th measure component."""
    comps = list(inst.measure)
    comp = comps[index]
    if key not in dict(comp.fields) or key == "n":
        raise KeyError(f"{comp.kind} has no numeric field {key!r}")
    fields = tuple((k, ex.literal(value) if k == key else v) for k, v in comp.fields)
    comps[index] = replace(comp, fields=fields)
    return replace(inst, measure=tuple(comps))


# ---------------------------------------------------------------------------
# building engine objects

@dataclass(frozen=True)
class RunOptions:
    truncate: Optional[int] = None
    tol: float = 1e-10
    window: Optional[int] = None
    discretize: int = 64
    tail_monotone: bool = False
    decay_margin: float = 1e-3
    liminf_floor: float = 1e-9

    def check_options(self) -> CheckOptions:
        return CheckOptions(self.window, self.decay_margin, self.liminf_floor,
                            self.tail_monotone)


@dataclass(frozen=True)
class Instance:
    space: SpacePair
    measure: mm.Measure
    options: RunOptions
    source: InstanceFile


def _real_value(node, n, what):
    val = ex.evaluate(node, n)
    if isinstance(val, complex):
        if val.imag != 0:
            raise EvaluationError(f"{what} must be real, got {val!r}", node.line, node.column)
        val = val.real
    if not math.isfinite(val):
        raise EvaluationError(f"{what} is not finite", node.line, node.column)
    return float(val)


def _sequence_values(spec: SequenceSpec, N: Optional[int], real: bool, what: str):
    if spec.items is not None:
        items = spec.items
        if N is not None:
            if N > len(items):
                raise InvalidInstanceError(
                    f"{what} lists {len(items)} entries but truncate = {N}")
            items = items[:N]
        nodes = list(enumerate(items, start=1))
    else:
        nodes = [(n, spec.expr) for n in range(1, (N or DEFAULT_TRUNCATION) + 1)]
    out = []
    for n, node in nodes:
        if real:
            out.append(_real_value(node, n, f"{what}_{n}"))
        else:
            z = ex.eval_expr(node, n)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise EvaluationError(f"{what}_{n} is not finite", node.line, node.column)
            out.append(z)
    return out


def _component(decl: ComponentDecl):
    f = dict(decl.fields)
    if decl.kind == "atoms":
        lo, hi = f["n"]
        return mm.AtomFamily(lo, hi, f["z"], f["w"])
    if decl.kind == "atom":
        return mm.Atom(ex.eval_expr(f["z"]), _real_value(f["w"], None, "w"))
    vals = {k: _real_value(v, None, k) for k, v in f.items()}
    if decl.kind == "circle":
        return mm.CircleUniform(vals["r"], vals["w"])
    return mm.RadialPower(vals["a"], vals["b"], vals["alpha"], vals["c"])


def build(inst: InstanceFile, **overrides) -> Instance:
    """Evaluate the file into a validated (space, measure, options) triple."""
    opts = {k: v for k, v in inst.options}
    opts.update({k: v for k, v in overrides.items() if v is not None})
    run = RunOptions(**opts)
    N = run.truncate
    if N is not None and N < 1:
        raise InvalidInstanceError(f"truncate must be >= 1, got {N}")
    if N is None and inst.gamma.items is not None:
        N = len(inst.gamma.items)
    with _located(inst.gamma.line):
        gamma = _sequence_values(inst.gamma, N, False, "gamma")
    with _located(inst.v.line):
        v = _sequence_values(inst.v, len(gamma), True, "v")
    if len(v) != len(gamma):
        raise InvalidInstanceError(
            f"line {inst.v.line}: gamma has {len(gamma)} entries but v has {len(v)}")
    gen_g = inst.gamma.text() if inst.gamma.expr is not None else None
    gen_v = inst.v.text() if inst.v.expr is not None else None
    with _located(inst.gamma.line):
        gseq = GammaSequence(gamma, gen_g)
    with _located(inst.v.line):
        wseq = WeightSequence(v, gen_v)
    space = SpacePair(gseq, wseq, run.window)
    run = replace(run, truncate=space.N)
    comps = []
    for decl in inst.measure:
        with _located(decl.line):
            comp = _component(decl)
            mm.Measure((comp,)).check_against(space)
        comps.append(comp)
    return Instance(space, mm.Measure(tuple(comps)), run, inst)


@contextmanager
def _located(line):
    """Prefix structural errors with the source line they come from."""
    try:
        yield
    except InvalidInstanceError as err:
        if line and not str(err).startswith("line "):
            raise InvalidInstanceError(f"line {line}: {err}") from err
        raise


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return build(parse(fh.read()))
