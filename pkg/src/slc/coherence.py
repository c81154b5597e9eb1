"""Coherence policies and definition-site checking.

Four strategies are supported:

  * use-site         detect ambiguity where a goal is resolved; definitions
                     are only rejected when indistinguishable by head.
  * def-site-strict  one model per (concept, Self head constructor); no
                     blanket Self variables at all.
  * def-site-disjoint overlapping heads allowed only when the bounds are
                     provably uninhabitable together; orphan rules; at most
                     one blanket model per concept.
  * scoped           models are named values; resolution is scope-stratified
                     and no global uniqueness is enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

from .decls import CheckedModule, ModelDecl, ModelWorld
from .diagnostics import Diagnostic, Related
from .types import (
    App,
    Con,
    Conf,
    Eq,
    Substitution,
    TypeTerm,
    Var,
    freshen,
    is_ground,
    match_many,
    normalize,
    render,
    unify_many,
)

POLICY_KINDS = ("use-site", "def-site-strict", "def-site-disjoint", "scoped")


@dataclass(frozen=True)
class CoherencePolicy:
    kind: str = "use-site"
    prioritize_specific: bool = False
    incoherent_ok: bool = False

    def __post_init__(self):
        assert self.kind in POLICY_KINDS, self.kind

    @property
    def is_uniqueness(self) -> bool:
        return self.kind != "scoped"

    def flagless(self) -> "CoherencePolicy":
        return CoherencePolicy(self.kind)


@dataclass
class OverlapWitness:
    models: tuple[str, str]  # uids
    subst: Substitution  # over the freshened heads
    inst_context1: list
    inst_context2: list


def outermost_con(t: TypeTerm) -> Con | None:
    if isinstance(t, Con):
        return t
    if isinstance(t, App) and isinstance(t.head, Con):
        return t.head
    return None


def is_blanket_self(m: ModelDecl) -> bool:
    return isinstance(m.head[0], Var)


def heads_overlap(m1: ModelDecl, m2: ModelDecl) -> OverlapWitness | None:
    """MGU of the two head vectors, contexts ignored."""
    assert m1.concept == m2.concept
    (h1, c1), _, _ = freshen((tuple(m1.head), tuple(m1.context)))
    (h2, c2), _, _ = freshen((tuple(m2.head), tuple(m2.context)))
    mgu = unify_many(list(zip(h1, h2)))
    if mgu is None:
        return None
    return OverlapWitness(
        (m1.uid, m2.uid),
        mgu,
        [mgu.apply(c) for c in c1],
        [mgu.apply(c) for c in c2],
    )


def is_duplicate(m1: ModelDecl, m2: ModelDecl) -> bool:
    """Heads equal up to variable renaming; contexts never examined."""
    assert m1.concept == m2.concept
    h1, _, _ = freshen(tuple(m1.head))
    h2, _, _ = freshen(tuple(m2.head))
    return (
        match_many(list(zip(h1, h2))) is not None
        and match_many(list(zip(h2, h1))) is not None
    )


def _provable(goal: Conf, visible: ModelWorld, depth: int) -> bool:
    """Overapproximate provability; anything uncertain counts as provable."""
    if depth <= 0:
        return True
    subjects = tuple(normalize(s, (), visible) for s in goal.subjects)
    if not all(is_ground(s) for s in subjects):
        return True
    for model in visible.models_of(goal.concept):
        fresh_head, sub, _ = freshen(tuple(model.head))
        match = match_many(list(zip(fresh_head, subjects)))
        if match is None:
            continue
        ok = True
        for c in model.context:
            inst = match.apply(sub.apply(c))
            if isinstance(inst, Conf):
                if not _provable(inst, visible, depth - 1):
                    ok = False
                    break
            elif isinstance(inst, Eq):
                lhs = normalize(inst.lhs, (), visible)
                rhs = normalize(inst.rhs, (), visible)
                if is_ground(lhs) and is_ground(rhs) and lhs != rhs:
                    ok = False
                    break
        if ok:
            return True
    return False


def disjoint_by_bounds(
    w: OverlapWitness, m1: ModelDecl, m2: ModelDecl, visible: ModelWorld
) -> bool:
    """True when some instantiated ground bound is refutable in `visible`.

    Constraints that still contain variables after the overlap substitution
    are conservatively assumed satisfiable.
    """
    for c in w.inst_context1 + w.inst_context2:
        if isinstance(c, Conf) and all(is_ground(s) for s in c.subjects):
            if not _provable(c, visible, depth=16):
                return True
    return False


def _conflict_kind(policy_kind: str, m1: ModelDecl, m2: ModelDecl, visible: ModelWorld) -> str | None:
    """Shared pairwise rule, used per module at definition sites and globally at link."""
    if m1.concept != m2.concept:
        return None
    if policy_kind == "use-site":
        if is_duplicate(m1, m2):
            return "duplicate heads (identical up to renaming)"
        return None
    if policy_kind == "def-site-strict":
        c1, c2 = outermost_con(m1.head[0]), outermost_con(m2.head[0])
        if c1 is not None and c1 == c2:
            return f"second model for ({_short(m1.concept)}, {c1.name})"
        return None
    if policy_kind == "def-site-disjoint":
        if is_blanket_self(m1) and is_blanket_self(m2):
            return "more than one blanket model"
        w = heads_overlap(m1, m2)
        if w is not None and not disjoint_by_bounds(w, m1, m2, visible):
            return "overlapping heads with satisfiable bounds"
        return None
    return None


def _short(concept_id: str) -> str:
    return concept_id.split(".")[-1]


def check_def_site(
    module: CheckedModule, visible: ModelWorld, policy: CoherencePolicy
) -> list[Diagnostic]:
    """Definition-site obligations of `module`'s models under `policy`."""
    diags: list[Diagnostic] = []
    own = {(m.module, m.index) for m in module.models}

    def pair_diag(code: str, m: ModelDecl, other: ModelDecl, why: str):
        newer = m if (m.module, m.index) in own else other
        elder = other if newer is m else m
        diags.append(
            Diagnostic(
                code,
                f"model {newer.display} conflicts with {elder.display}: {why}",
                newer.span,
                module=module.name,
                related=(Related(elder.span, f"conflicting model {elder.display}"),),
            )
        )

    # Per-model shape rules first.
    for m in module.models:
        if policy.kind == "scoped":
            if m.name is None:
                diags.append(
                    Diagnostic(
                        "E-NEEDS-NAME",
                        "the scoped policy requires every model to be named",
                        m.span,
                        module=module.name,
                    )
                )
            continue
        if policy.kind == "def-site-strict" and is_blanket_self(m):
            diags.append(
                Diagnostic(
                    "E-BLANKET-SELF",
                    f"model {m.display} introduces an arbitrary Self type variable",
                    m.span,
                    module=module.name,
                )
            )
        if policy.kind == "def-site-disjoint":
            diags.extend(check_orphan(m, visible, module.name))

    if policy.kind == "scoped":
        return diags

    # Pairwise rules over the visible world, touching this module.
    seen: set[tuple] = set()
    for m in module.models:
        for other in visible.models_of(m.concept):
            if (other.module, other.index) == (m.module, m.index):
                continue
            key = tuple(sorted([m.uid, other.uid]))
            if key in seen:
                continue
            seen.add(key)
            if policy.kind == "def-site-strict" and (is_blanket_self(m) or is_blanket_self(other)):
                continue  # already rejected as blanket Self
            why = _conflict_kind(policy.kind, m, other, visible)
            if why is None:
                continue
            code = {
                "use-site": "E-DUPLICATE",
                "def-site-strict": "E-CONSTRUCTOR-DUP",
                "def-site-disjoint": (
                    "E-BLANKET-DUP" if "blanket" in why else "E-OVERLAP"
                ),
            }[policy.kind]
            pair_diag(code, m, other, why)
    return diags


def check_orphan(m: ModelDecl, visible: ModelWorld, module_name: str) -> list[Diagnostic]:
    """Locality of a model: its concept or an early head constructor is local.

    Scanning Self first and then the concept arguments in order, the model is
    legal if its concept is local, or if the first locally-owned outermost
    constructor appears before any bare type variable.
    """
    concept_module = m.concept.rsplit(".", 1)[0]
    if concept_module == m.module:
        return []
    for position, head in enumerate(m.head):
        if isinstance(head, Var):
            where = "Self" if position == 0 else f"argument {position}"
            return [
                Diagnostic(
                    "E-ORPHAN",
                    f"model {m.display} for foreign concept {_short(m.concept)}: "
                    f"{where} is a bare type variable before any local type "
                    f"({render(head)} could be instantiated by any downstream module)",
                    m.span,
                    module=module_name,
                )
            ]
        con = outermost_con(head)
        if con is not None and con.origin == m.module:
            return []
    heads = ", ".join(render(h) for h in m.head)
    return [
        Diagnostic(
            "E-ORPHAN",
            f"model {m.display} is an orphan: neither concept {_short(m.concept)} "
            f"nor any outermost head constructor of [{heads}] is defined in "
            f"module {m.module}",
            m.span,
            module=module_name,
        )
    ]
