"""Multi-module assembly: import graphs, per-module checking, link-time
global coherence.

Per-module definition-site checks see a module's own models plus its
transitive imports. Linking re-runs the active policy's pairwise check over
the union of all models, so a conflict between sibling modules that never
import each other still surfaces — as E-LINK-CONFLICT naming both origins.
The scoped policy skips the global check entirely: all models coexist under
their names.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from . import ast as A
from .coherence import CoherencePolicy, _conflict_kind, check_def_site
from .decls import CheckedModule, ModelWorld
from .diagnostics import Diagnostic, Related, has_errors, sort_diagnostics
from .parser import parse_module_bytes
from .resolver import DEFAULT_DEPTH
from .sema import check_module
from .types import UNIT


@dataclass
class ModuleGraph:
    order: list[str]  # topological, deterministic
    asts: dict[str, A.ModuleAST]

    @property
    def topo_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.order)}


@dataclass
class LinkedProgram:
    graph: ModuleGraph
    modules: dict[str, CheckedModule]
    world: ModelWorld  # union world
    entry: tuple[str, str] | None  # (module, function)
    policy: CoherencePolicy

    @property
    def topo_index(self) -> dict[str, int]:
        return self.graph.topo_index

    def world_for(self, module: str) -> ModelWorld:
        visible = set(transitive_imports(self.graph, module)) | {module}
        models = [m for m in self.world.models if m.module in visible]
        return ModelWorld(models, home=module)

    def concepts_table(self) -> dict:
        table = {}
        for mod in self.modules.values():
            for concept in mod.concepts.values():
                table[concept.id] = concept
        return table


def build_graph(modules: list[A.ModuleAST]) -> tuple[ModuleGraph | None, list[Diagnostic]]:
    """Deterministic topological ordering of the import DAG."""
    diags: list[Diagnostic] = []
    asts: dict[str, A.ModuleAST] = {}
    for m in modules:
        if m.name in asts:
            diags.append(
                Diagnostic(
                    "E-NAME",
                    f"module '{m.name}' is defined more than once",
                    m.span,
                    module=m.name,
                    related=(Related(asts[m.name].span, "first definition"),),
                )
            )
            continue
        asts[m.name] = m
    for m in asts.values():
        for imp, span in zip(m.imports, m.import_spans):
            if imp not in asts:
                diags.append(
                    Diagnostic(
                        "E-UNRESOLVED-IMPORT",
                        f"module '{m.name}' imports unknown module '{imp}'",
                        span,
                        module=m.name,
                    )
                )
    if has_errors(diags):
        return None, diags

    # Kahn's algorithm with an ordered frontier: the result never depends on
    # input file order.
    indegree = {name: 0 for name in asts}
    dependents: dict[str, list[str]] = {name: [] for name in asts}
    for m in asts.values():
        for imp in m.imports:
            indegree[m.name] += 1
            dependents[imp].append(m.name)
    ready = [name for name, deg in sorted(indegree.items()) if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for dep in sorted(dependents[name]):
            indegree[dep] -= 1
            if indegree[dep] == 0:
                heapq.heappush(ready, dep)
    if len(order) != len(asts):
        stuck = sorted(name for name in asts if name not in set(order))
        first = asts[stuck[0]]
        diags.append(
            Diagnostic(
                "E-CYCLE",
                f"circular imports among modules: {', '.join(stuck)}",
                first.span,
                module=first.name,
            )
        )
        return None, diags
    return ModuleGraph(order, asts), diags


def transitive_imports(graph: ModuleGraph, name: str) -> list[str]:
    """Transitive imports of `name`, in topological order, excluding itself."""
    seen: set[str] = set()
    stack = list(graph.asts[name].imports)
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        stack.extend(graph.asts[cur].imports)
    index = graph.topo_index
    return sorted(seen, key=lambda n: index[n])


def link(
    graph: ModuleGraph,
    checked: dict[str, CheckedModule],
    policy: CoherencePolicy,
) -> tuple[LinkedProgram | None, list[Diagnostic]]:
    """Assemble checked modules; global pairwise check under uniqueness policies."""
    diags: list[Diagnostic] = []
    index = graph.topo_index
    union_models = [
        m for name in graph.order for m in checked[name].models
    ]
    world = ModelWorld(union_models)

    if policy.is_uniqueness:
        by_concept: dict[str, list] = {}
        for m in union_models:
            by_concept.setdefault(m.concept, []).append(m)
        for concept, models in sorted(by_concept.items()):
            for i in range(len(models)):
                for j in range(i + 1, len(models)):
                    m1, m2 = models[i], models[j]
                    if m1.module == m2.module:
                        continue  # a definition-site concern, reported there
                    why = _conflict_kind(policy.kind, m1, m2, world)
                    if why is None:
                        continue
                    later = m2 if index[m2.module] >= index[m1.module] else m1
                    earlier = m1 if later is m2 else m2
                    diags.append(
                        Diagnostic(
                            "E-LINK-CONFLICT",
                            f"linking the whole program violates model uniqueness: "
                            f"{later.display} (module {later.module}) conflicts with "
                            f"{earlier.display} (module {earlier.module}): {why}",
                            later.span,
                            module=later.module,
                            related=(
                                Related(earlier.span, f"conflicting model {earlier.display}"),
                            ),
                        )
                    )

    # Entry points: at most one `fn main() -> Unit` across the program.
    mains: list[tuple[str, str]] = []
    for name in graph.order:
        fun = checked[name].funs.get("main")
        if fun is not None:
            mains.append((name, "main"))
    if len(mains) > 1:
        spans = [checked[m].funs[f].span for m, f in mains]
        diags.append(
            Diagnostic(
                "E-MULTI-ENTRY",
                f"multiple entry points: fn main defined in modules "
                f"{', '.join(m for m, _ in mains)}",
                spans[1],
                module=mains[1][0],
                related=tuple(Related(s, "another main") for s in spans[:1] + spans[2:]),
            )
        )
    entry = mains[0] if len(mains) == 1 else None
    if entry is not None:
        fun = checked[entry[0]].funs["main"]
        if fun.params or fun.typarams or fun.context or fun.ret != UNIT:
            diags.append(
                Diagnostic(
                    "E-NO-ENTRY",
                    "fn main must take no parameters and return Unit",
                    fun.span,
                    module=entry[0],
                )
            )
            entry = None
    if has_errors(diags):
        return None, diags
    return LinkedProgram(graph, checked, world, entry, policy), diags


# ---------------------------------------------------------------- pipeline


@dataclass
class CheckResult:
    diagnostics: list[Diagnostic]
    program: LinkedProgram | None
    modules: dict[str, CheckedModule] = field(default_factory=dict)
    graph: ModuleGraph | None = None

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)


def check_sources(
    sources: list[tuple[str, bytes]],
    policy: CoherencePolicy,
    depth: int = DEFAULT_DEPTH,
) -> CheckResult:
    """The front half of the pipeline: parse, order, check, def-site, link.

    Each phase runs only when the previous one produced no errors; the
    diagnostics of the failing phase are all collected before stopping.
    """
    diags: list[Diagnostic] = []
    asts: list[A.ModuleAST] = []
    for path, data in sources:
        result = parse_module_bytes(data, path)
        if isinstance(result, list):
            diags.extend(result)
        else:
            asts.append(result)
    if has_errors(diags):
        return CheckResult(sort_diagnostics(diags, {}), None)

    graph, graph_diags = build_graph(asts)
    diags.extend(graph_diags)
    if graph is None or has_errors(diags):
        return CheckResult(sort_diagnostics(diags, {}), None)
    topo = graph.topo_index

    checked: dict[str, CheckedModule] = {}
    for name in graph.order:
        imports = [checked[i] for i in transitive_imports(graph, name)]
        module, module_diags = check_module(graph.asts[name], imports, policy, depth)
        checked[name] = module
        diags.extend(module_diags)
    if has_errors(diags):
        return CheckResult(sort_diagnostics(diags, topo), None, checked, graph)

    union: list = []
    for name in graph.order:
        visible_names = set(transitive_imports(graph, name)) | {name}
        visible_models = [
            m
            for other in graph.order
            if other in visible_names
            for m in checked[other].models
        ]
        world = ModelWorld(visible_models, home=name)
        diags.extend(check_def_site(checked[name], world, policy))
    if has_errors(diags):
        return CheckResult(sort_diagnostics(diags, topo), None, checked, graph)

    program, link_diags = link(graph, checked, policy)
    diags.extend(link_diags)
    return CheckResult(sort_diagnostics(diags, topo), program, checked, graph)


def read_sources(paths: list[str]) -> list[tuple[str, bytes]]:
    out = []
    for path in paths:
        with open(path, "rb") as handle:
            out.append((path, handle.read()))
    return out
