"""Qualitative plant knowledge: signed influence rules, diagnosis, planning.

The knowledge base is a signed directed graph parsed from a plain-text rule
file.  Each line is one cause->effect rule; walking rule chains backward
from deviated sensors yields root-cause candidates, and walking forward
from manipulable elements to a deviated target yields a recovery plan whose
every step can be explained by quoting the rules and their source
documents.

Rule file grammar, one statement per line ('#' starts a comment):

    IF <variable> <inc|dec> THEN <variable> <inc|dec> [KIND process|control] [SRC "<doc ref>"]
    NODE <variable> <sensed|manipulable|latent>

Variables may contain spaces; `inc`/`dec` are reserved words.  Untagged
variables default to latent.
"""

import json
import re
import warnings
from dataclasses import dataclass
from importlib import resources

SENSED = "sensed"
MANIPULABLE = "manipulable"
LATENT = "latent"

INC = "inc"
DEC = "dec"

MAX_PATH_DEPTH = 10  # control loops create cycles; simple paths only, bounded

_RULE_RE = re.compile(
    r"^IF\s+(?P<avar>.+?)\s+(?P<adir>inc|dec)\s+"
    r"THEN\s+(?P<cvar>.+?)\s+(?P<cdir>inc|dec)"
    r"(?:\s+KIND\s+(?P<kind>process|control))?"
    r"(?:\s+SRC\s+\"(?P<src>[^\"]*)\")?\s*$"
)
_NODE_RE = re.compile(
    r"^NODE\s+(?P<var>.+?)\s+(?P<tag>sensed|manipulable|latent)\s*$"
)


class RuleSyntaxError(ValueError):
    def __init__(self, line_no: int, line: str, reason: str = "cannot parse"):
        super().__init__(f"line {line_no}: {reason}: {line!r}")
        self.line_no = line_no


class UnknownVariableError(KeyError):
    pass


class ContradictionError(ValueError):
    """The same variable was reported as deviating in both directions."""


class PlanningError(RuntimeError):
    """No manipulable element has a counteracting influence path to the goal."""


def _sign_of(direction: str) -> int:
    if direction in ("+", INC):
        return 1
    if direction in ("-", DEC):
        return -1
    raise ValueError(f"direction must be one of +, -, inc, dec; got {direction!r}")


def _dir_of(sign: int) -> str:
    return INC if sign > 0 else DEC


@dataclass(frozen=True)
class InfluenceRule:
    antecedent: str
    antecedent_dir: str   # inc | dec
    consequent: str
    consequent_dir: str
    kind: str = "process"
    source: str = ""
    line_no: int = 0

    @property
    def sign(self) -> int:
        """+1 when both move together, -1 when they oppose."""
        return _sign_of(self.antecedent_dir) * _sign_of(self.consequent_dir)

    @property
    def text(self) -> str:
        return (f"IF {self.antecedent} {self.antecedent_dir} "
                f"THEN {self.consequent} {self.consequent_dir}")

    def to_dict(self) -> dict:
        return {
            "antecedent": self.antecedent,
            "antecedent_dir": self.antecedent_dir,
            "consequent": self.consequent,
            "consequent_dir": self.consequent_dir,
            "kind": self.kind,
            "source": self.source,
        }


class InfluenceGraph:
    """Immutable signed digraph over plant variables; queries are read-only."""

    def __init__(self, rules, tags=None):
        self.rules = tuple(rules)
        tags = dict(tags or {})
        self._edges = {}   # (src, dst) -> InfluenceRule
        nodes = set(tags)
        for rule in self.rules:
            key = (rule.antecedent, rule.consequent)
            if key in self._edges:
                warnings.warn(
                    f"duplicate rule for {rule.antecedent} -> {rule.consequent} "
                    f"(line {rule.line_no}); keeping the first occurrence",
                    stacklevel=2)
                continue
            self._edges[key] = rule
            nodes.add(rule.antecedent)
            nodes.add(rule.consequent)
        self.tags = {n: tags.get(n, LATENT) for n in sorted(nodes)}
        self._succ = {n: [] for n in self.tags}
        self._pred = {n: [] for n in self.tags}
        for (src, dst), rule in sorted(self._edges.items()):
            self._succ[src].append(dst)
            self._pred[dst].append(src)

    @property
    def nodes(self) -> tuple:
        return tuple(self.tags)

    @property
    def edges(self) -> tuple:
        return tuple(sorted(self._edges))

    @property
    def manipulables(self) -> tuple:
        return tuple(n for n, t in self.tags.items() if t == MANIPULABLE)

    @property
    def sensed(self) -> tuple:
        return tuple(n for n, t in self.tags.items() if t == SENSED)

    def edge(self, src: str, dst: str) -> InfluenceRule:
        return self._edges[(src, dst)]

    def edge_sign(self, src: str, dst: str) -> int:
        return self._edges[(src, dst)].sign

    def __eq__(self, other):
        if not isinstance(other, InfluenceGraph):
            return NotImplemented
        return self.tags == other.tags and self._edges == other._edges

    def require_node(self, name: str) -> None:
        if name not in self.tags:
            raise UnknownVariableError(f"variable {name!r} is not in the graph")

    def simple_paths(self, src: str, dst: str, max_depth: int = MAX_PATH_DEPTH):
        """All simple paths src->dst as node tuples, at most max_depth edges."""
        self.require_node(src)
        self.require_node(dst)
        paths = []

        def walk(node, path):
            if len(path) - 1 > max_depth:
                return
            if node == dst and len(path) > 1:
                paths.append(tuple(path))
                return
            for nxt in self._succ[node]:
                if nxt not in path:
                    path.append(nxt)
                    walk(nxt, path)
                    path.pop()

        if src == dst:
            return []
        walk(src, [src])
        return paths

    def path_sign(self, path) -> int:
        sign = 1
        for a, b in zip(path, path[1:]):
            sign *= self.edge_sign(a, b)
        return sign

    def ancestors(self, node: str, max_depth: int = MAX_PATH_DEPTH) -> set:
        self.require_node(node)
        seen = set()
        frontier = [(node, 0)]
        while frontier:
            cur, depth = frontier.pop()
            if depth >= max_depth:
                continue
            for prev in self._pred[cur]:
                if prev not in seen:
                    seen.add(prev)
                    frontier.append((prev, depth + 1))
        seen.discard(node)
        return seen


def parse_rules(text: str) -> InfluenceGraph:
    """Parse the rule grammar; raises RuleSyntaxError with the line number."""
    rules = []
    tags = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _NODE_RE.match(line)
        if m:
            tags[m.group("var").strip()] = m.group("tag")
            continue
        m = _RULE_RE.match(line)
        if m:
            rules.append(InfluenceRule(
                antecedent=m.group("avar").strip(),
                antecedent_dir=m.group("adir"),
                consequent=m.group("cvar").strip(),
                consequent_dir=m.group("cdir"),
                kind=m.group("kind") or "process",
                source=m.group("src") or "",
                line_no=line_no,
            ))
            continue
        raise RuleSyntaxError(line_no, raw)
    return InfluenceGraph(rules, tags)


def load_rules(path) -> InfluenceGraph:
    with open(path) as fh:
        return parse_rules(fh.read())


def default_rules_path():
    """The feed-section knowledge base shipped with the package."""
    return resources.files("procrl") / "rules" / "feed_section.rules"


def load_default_rules() -> InfluenceGraph:
    return parse_rules(default_rules_path().read_text())


@dataclass(frozen=True)
class RootCause:
    variable: str
    direction: str        # inc | dec
    explained: tuple      # deviated variables this cause accounts for
    path_length: int      # shortest chain to any explained deviation

    def to_dict(self) -> dict:
        return {"variable": self.variable, "direction": self.direction,
                "explained": list(self.explained), "path_length": self.path_length}


def _normalize_deviations(deviations):
    pairs = deviations.items() if hasattr(deviations, "items") else deviations
    result = {}
    for var, direction in pairs:
        sign = _sign_of(direction)
        if var in result and result[var] != sign:
            raise ContradictionError(
                f"variable {var!r} reported deviating in both directions")
        result[var] = sign
    return result


def diagnose(g: InfluenceGraph, deviations) -> list:
    """Rank root-cause candidates for a set of observed deviations.

    A candidate is a non-sensed ancestor of at least one deviated variable
    such that, for every deviated variable it reaches, every influence path
    implies the observed direction consistently.  Candidates are ranked by
    the number of deviations explained, then shortest chain, then name.
    """
    observed = _normalize_deviations(deviations)
    for var in observed:
        g.require_node(var)
    if not observed:
        return []

    candidates = set()
    for var in observed:
        candidates |= g.ancestors(var)
    candidates -= set(observed)
    candidates -= {n for n in candidates if g.tags[n] == SENSED}

    causes = []
    for cand in sorted(candidates):
        # The cause direction must be consistent across all paths to all
        # reachable deviations; any mismatch disqualifies the candidate.
        cause_sign = None
        explained = []
        best_len = None
        consistent = True
        for var, dev_sign in sorted(observed.items()):
            paths = g.simple_paths(cand, var)
            if not paths:
                continue
            implied = {dev_sign * g.path_sign(p) for p in paths}
            if len(implied) > 1:
                consistent = False
                break
            implied_sign = implied.pop()
            if cause_sign is None:
                cause_sign = implied_sign
            elif cause_sign != implied_sign:
                consistent = False
                break
            explained.append(var)
            shortest = min(len(p) - 1 for p in paths)
            best_len = shortest if best_len is None else min(best_len, shortest)
        if consistent and explained:
            causes.append(RootCause(
                variable=cand, direction=_dir_of(cause_sign),
                explained=tuple(explained), path_length=best_len))

    causes.sort(key=lambda c: (-len(c.explained), c.path_length, c.variable))
    return causes


@dataclass(frozen=True)
class PlanStep:
    target: str
    direction: str        # inc | dec, the move to apply to the target
    chain: tuple          # InfluenceRules along the path target -> goal

    def to_dict(self) -> dict:
        return {"target": self.target, "direction": self.direction,
                "chain": [r.to_dict() for r in self.chain]}


@dataclass(frozen=True)
class Plan:
    goal_variable: str
    goal_direction: str   # the restore direction for the goal variable
    steps: tuple

    @property
    def targets(self) -> tuple:
        return tuple(s.target for s in self.steps)

    def to_dict(self) -> dict:
        return {"goal_variable": self.goal_variable,
                "goal_direction": self.goal_direction,
                "steps": [s.to_dict() for s in self.steps]}


def plan(g: InfluenceGraph, goal, manipulables=None) -> Plan:
    """Select manipulation targets that can push the goal variable back.

    goal is (variable, restore direction).  Every manipulable with an
    influence path to the goal contributes one step, moved in the direction
    whose propagated effect equals the restore direction; steps are ordered
    by path length, ties broken by target name.
    """
    goal_var, goal_dir = goal
    if not g.nodes:
        raise PlanningError("the knowledge base is empty")
    g.require_node(goal_var)
    restore_sign = _sign_of(goal_dir)
    if manipulables is None:
        manipulables = g.manipulables
    manipulables = tuple(manipulables)
    if not manipulables:
        raise PlanningError("no manipulable elements declared")
    for m in manipulables:
        g.require_node(m)

    found = []
    for target in sorted(manipulables):
        paths = g.simple_paths(target, goal_var)
        if not paths:
            continue
        # Prefer the shortest chain; among equals pick the lexicographically
        # smallest node sequence so output is deterministic.
        best = min(paths, key=lambda p: (len(p), p))
        move_sign = restore_sign * g.path_sign(best)
        chain = tuple(g.edge(a, b) for a, b in zip(best, best[1:]))
        found.append((len(best) - 1, target, PlanStep(
            target=target, direction=_dir_of(move_sign), chain=chain)))

    if not found:
        raise PlanningError(
            f"no manipulable element has an influence path to {goal_var!r}")
    found.sort(key=lambda item: (item[0], item[1]))
    return Plan(goal_variable=goal_var, goal_direction=_dir_of(restore_sign),
                steps=tuple(step for _, _, step in found))


@dataclass(frozen=True)
class Explanation:
    lines: tuple

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    def to_dict(self) -> dict:
        return {"lines": list(self.lines)}


def explain(p: Plan, g: InfluenceGraph) -> Explanation:
    """Render the plan as an operator-readable chain of rule applications.

    Each step lists the propagated effect of every rule on its path and
    quotes the rule's source document, in path order.
    """
    lines = []
    if not p.steps:
        return Explanation(lines=())
    lines.append(f"Goal: drive {p.goal_variable} {p.goal_direction}.")
    for i, step in enumerate(p.steps, start=1):
        lines.append(f"Step {i}: move {step.target} {step.direction}.")
        sign = _sign_of(step.direction)
        current = step.target
        for rule in step.chain:
            in_dir = _dir_of(sign)
            sign *= rule.sign
            src = f" [{rule.source}]" if rule.source else ""
            lines.append(f"  {current} {in_dir} -> {rule.consequent} {_dir_of(sign)}"
                         f"  (rule: {rule.text}){src}")
            current = rule.consequent
        lines.append(
            f"  Net effect: {p.goal_variable} moves {_dir_of(sign)}, "
            f"counteracting the deviation.")
    return Explanation(lines=tuple(lines))


def plan_report_json(p: Plan, e: Explanation) -> str:
    return json.dumps({"plan": p.to_dict(), "explanation": e.to_dict()}, indent=2)
