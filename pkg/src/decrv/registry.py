"""Named monitors attached to components: parsing, validation, hierarchy.

Spec files are line-oriented (``#`` comments):

    component <name> { <ap>, <ap>, ... }
    monitor <label> @ <component> := <formula>
    monitor <label> @ <component> := <formula> trigger { T(x) | F(y) }
    monitor <label> @ <component> := <formula> trigger wildcard

A monitor's formula may mention its component's propositions and other
monitor labels; references form a DAG whose depth drives verdict latency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

from . import ltl
from .ehe import EAGER, WILDCARD, Trigger, TriggerAnd, TriggerLit, TriggerOr

Expansion = Union[str, Trigger]  # EAGER, WILDCARD, or an explicit trigger


class SpecError(ValueError):
    pass


class DuplicateLabelError(SpecError):
    pass


class UnknownComponentError(SpecError):
    pass


class AlphabetError(SpecError):
    pass


class CycleError(SpecError):
    def __init__(self, cycle: list[str]):
        super().__init__("reference cycle: " + " -> ".join(cycle))
        self.cycle = cycle


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    aps: frozenset[str]


@dataclass(frozen=True)
class MonitorDecl:
    label: str
    component: str
    formula: ltl.Formula
    expansion: Expansion = EAGER


@dataclass
class Registry:
    """Validated spec: components, monitors, and the reference DAG."""

    components: dict[str, ComponentDecl]
    monitors: dict[str, MonitorDecl]
    depths: dict[str, int] = field(default_factory=dict)
    _inlined: dict[str, ltl.Formula] = field(default_factory=dict, repr=False)

    def references(self, label: str) -> frozenset[str]:
        """Monitor labels mentioned by the labeled monitor's formula."""
        return ltl.propositions(self.monitors[label].formula) & self.monitors.keys()

    def own_props(self, label: str) -> frozenset[str]:
        return ltl.propositions(self.monitors[label].formula) - self.monitors.keys()

    def ref_only(self, label: str) -> bool:
        """True when the alphabet consists solely of monitor references."""
        return bool(self.references(label)) and not self.own_props(label)

    def depth(self, label: str) -> int:
        return self.depths[label]

    def edges(self) -> list[tuple[str, str]]:
        """(source, dependent) pairs: source's verdicts feed the dependent."""
        out = []
        for label in self.monitors:
            for ref in sorted(self.references(label)):
                out.append((ref, label))
        return out

    def dependents(self, label: str) -> list[str]:
        return sorted(l for l in self.monitors if label in self.references(l))

    def inline(self, label: str) -> ltl.Formula:
        """Formula with every reference recursively replaced."""
        got = self._inlined.get(label)
        if got is None:
            mapping = {ref: self.inline(ref) for ref in self.references(label)}
            got = ltl.substitute(self.monitors[label].formula, mapping)
            self._inlined[label] = got
        return got

    def ap_counts(self, label: str) -> tuple[int, int]:
        """(decentralized, centralized) proposition counts for the label."""
        decentralized = len(ltl.propositions(self.monitors[label].formula))
        centralized = len(ltl.propositions(self.inline(label)))
        return decentralized, centralized

    def horizon(self, label: str) -> Optional[int]:
        """X-nesting depth of the inlined formula; None when unbounded."""
        return ltl.bounded_horizon(self.inline(label))

    def restrict(self, labels: list[str]) -> "Registry":
        """Sub-registry with the given monitors plus transitive references."""
        keep: set[str] = set()
        frontier = list(labels)
        while frontier:
            label = frontier.pop()
            if label in keep:
                continue
            if label not in self.monitors:
                raise SpecError(f"unknown monitor {label!r}")
            keep.add(label)
            frontier.extend(self.references(label))
        monitors = {l: d for l, d in self.monitors.items() if l in keep}
        return _validate(dict(self.components), monitors)


def _validate(
    components: dict[str, ComponentDecl], monitors: dict[str, MonitorDecl]
) -> Registry:
    seen_aps: dict[str, str] = {}
    for comp in components.values():
        if not comp.aps:
            raise SpecError(f"component {comp.name!r} has no propositions")
        for ap in comp.aps:
            if ap in seen_aps:
                raise SpecError(
                    f"proposition {ap!r} in both {seen_aps[ap]!r} and {comp.name!r}"
                )
            seen_aps[ap] = comp.name
    labels = set(monitors)
    for decl in monitors.values():
        if decl.component not in components:
            raise UnknownComponentError(
                f"monitor {decl.label!r} attached to unknown component {decl.component!r}"
            )
        allowed = components[decl.component].aps | (labels - {decl.label})
        for name in sorted(ltl.propositions(decl.formula) - allowed):
            raise AlphabetError(
                f"monitor {decl.label!r} uses {name!r}, which is neither a "
                f"proposition of component {decl.component!r} nor another monitor"
            )
        if not isinstance(decl.expansion, str):
            from .ehe import trigger_labels

            for name in sorted(trigger_labels(decl.expansion) - labels):
                raise SpecError(f"trigger of {decl.label!r} names unknown monitor {name!r}")

    registry = Registry(components, monitors)
    depths: dict[str, int] = {}
    in_progress: list[str] = []

    def visit(label: str) -> int:
        if label in depths:
            return depths[label]
        if label in in_progress:
            cycle = in_progress[in_progress.index(label) :] + [label]
            raise CycleError(cycle)
        in_progress.append(label)
        refs = registry.references(label)
        depths[label] = 1 + max(visit(r) for r in refs) if refs else 0
        in_progress.pop()
        return depths[label]

    for label in monitors:
        visit(label)
    registry.depths = depths
    return registry


# --- parsing --------------------------------------------------------------


def _parse_trigger(text: str, lineno: int) -> Trigger:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "&|()":
            tokens.append(c)
            i += 1
        elif text[i : i + 2] in ("T(", "F("):
            close = text.find(")", i)
            if close < 0:
                raise SpecError(f"line {lineno}: unclosed trigger literal")
            tokens.append(text[i : close + 1])
            i = close + 1
        else:
            raise SpecError(f"line {lineno}: bad trigger syntax near {text[i:]!r}")
    pos = 0

    def peek() -> Optional[str]:
        return tokens[pos] if pos < len(tokens) else None

    def disjunction() -> Trigger:
        nonlocal pos
        node = conjunction()
        while peek() == "|":
            pos += 1
            node = TriggerOr(node, conjunction())
        return node

    def conjunction() -> Trigger:
        nonlocal pos
        node = atom()
        while peek() == "&":
            pos += 1
            node = TriggerAnd(node, atom())
        return node

    def atom() -> Trigger:
        nonlocal pos
        tok = peek()
        if tok == "(":
            pos += 1
            node = disjunction()
            if peek() != ")":
                raise SpecError(f"line {lineno}: expected ')' in trigger")
            pos += 1
            return node
        if tok and tok[0] in "TF" and tok.endswith(")"):
            pos += 1
            return TriggerLit(tok[2:-1].strip(), tok[0] == "T")
        raise SpecError(f"line {lineno}: bad trigger token {tok!r}")

    node = disjunction()
    if pos != len(tokens):
        raise SpecError(f"line {lineno}: trailing trigger tokens")
    return node


def load_registry(text: str) -> Registry:
    components: dict[str, ComponentDecl] = {}
    monitors: dict[str, MonitorDecl] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("component "):
            rest = line[len("component ") :]
            if "{" not in rest or not rest.endswith("}"):
                raise SpecError(f"line {lineno}: expected 'component <name> {{ ... }}'")
            name, body = rest.split("{", 1)
            name = name.strip()
            aps = frozenset(
                ap.strip() for ap in body[:-1].split(",") if ap.strip()
            )
            if name in components:
                raise SpecError(f"line {lineno}: duplicate component {name!r}")
            components[name] = ComponentDecl(name, aps)
        elif line.startswith("monitor "):
            rest = line[len("monitor ") :]
            if "@" not in rest or ":=" not in rest:
                raise SpecError(
                    f"line {lineno}: expected 'monitor <label> @ <component> := <formula>'"
                )
            label, rest = rest.split("@", 1)
            component, rest = rest.split(":=", 1)
            label = label.strip()
            component = component.strip()
            expansion: Expansion = EAGER
            if " trigger " in rest:
                rest, trig = rest.rsplit(" trigger ", 1)
                trig = trig.strip()
                if trig == "wildcard":
                    expansion = WILDCARD
                elif trig.startswith("{") and trig.endswith("}"):
                    expansion = _parse_trigger(trig[1:-1], lineno)
                else:
                    raise SpecError(f"line {lineno}: bad trigger clause {trig!r}")
            try:
                formula = ltl.parse(rest.strip())
            except ltl.ParseError as exc:
                raise SpecError(f"line {lineno}: {exc}") from exc
            if label in monitors:
                raise DuplicateLabelError(f"line {lineno}: duplicate label {label!r}")
            monitors[label] = MonitorDecl(label, component, formula, expansion)
        else:
            raise SpecError(f"line {lineno}: unrecognized declaration {line!r}")
    return _validate(components, monitors)


def load_registry_file(path) -> Registry:
    with open(path, encoding="utf-8") as handle:
        return load_registry(handle.read())


def light_switch_family(rooms: int) -> Registry:
    """n-room switch/lamp spec: per-room sc_light plus the sc_ok conjunction."""
    if rooms < 1:
        raise SpecError("need at least one room")
    lines = []
    for i in range(rooms):
        lines.append(f"component switch_{i} {{ s{i} }}")
        lines.append(f"component lamp_{i} {{ l{i} }}")
        lines.append(f"monitor light_{i} @ lamp_{i} := l{i}")
        lines.append(
            f"monitor sc_light_{i} @ switch_{i} := G(s{i} -> X(light_{i} U !s{i}))"
        )
    conjunction = " & ".join(f"sc_light_{i}" for i in range(rooms))
    lines.append(f"monitor sc_ok @ switch_0 := {conjunction}")
    return load_registry("\n".join(lines))


def bundled(name: str) -> Registry:
    """Load a spec file shipped with the package (e.g. ``amiqual``)."""
    text = resources.files("decrv.specs").joinpath(f"{name}.dspec").read_text()
    return load_registry(text)
