"""Name resolution, declaration well-formedness, and type checking.

Checking is bidirectional and deliberately local: generics exist only at
declaration heads, applications synthesize, lambdas and match expressions
check against expected types, and type arguments of generic calls are found
by one-way matching of parameter types against argument types with
annotations filling the rest.

Every constraint discharged inside a body is recorded with its resolution
trace; the records feed the `explain` command, the stability analysis, and
dictionary-passing elaboration.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A
from .coherence import CoherencePolicy
from .decls import (
    CheckedModule,
    ConceptDecl,
    CtorDecl,
    DataDecl,
    FunDecl,
    GoalRecord,
    ModelDecl,
    ModelWorld,
    ReqSig,
    TArm,
    TBuiltinRef,
    TCall,
    TCallExpr,
    TExpr,
    TGlobalFun,
    TIf,
    TLam,
    TLet,
    TLit,
    TMatch,
    TReqCall,
    TTuple,
    TVarRef,
)
from .diagnostics import Diagnostic, Related, Span
from .resolver import DEFAULT_DEPTH, Goal, Resolver, close_givens
from .std import BUILTIN_SIGS, STD_MODULE
from .types import (
    BOOL,
    BUILTIN_CONS,
    F64,
    STRING,
    U64,
    U8,
    UNIT,
    App,
    Assoc,
    Con,
    Conf,
    ConstraintTerm,
    Eq,
    NormDiverge,
    Substitution,
    TypeTerm,
    Var,
    fn_type,
    free_vars,
    fresh_uid,
    freshen,
    is_ground,
    normalize,
    pair_type,
    render,
    render_constraint,
    split_fn_type,
)


class SemaAbort(Exception):
    """Aborts checking of one declaration after an unrecoverable diagnostic."""

    def __init__(self, diag: Diagnostic):
        self.diagnostic = diag
        super().__init__(diag.message)


def _bind_own_assocs(model: ModelDecl, t: TypeTerm) -> TypeTerm:
    """Replace projections on the model's own head with its bindings.

    Requirement signatures instantiate `Self.Member` to a projection over the
    head as written; inside the model's own bodies that projection means the
    model's binding, even when the head is generic.
    """
    if isinstance(t, Assoc):
        subjects = tuple(_bind_own_assocs(model, s) for s in t.subjects)
        if (
            t.concept == model.concept
            and t.model_path is None
            and subjects == tuple(model.head)
            and t.member in model.assoc
        ):
            return model.assoc[t.member]
        return Assoc(t.concept, t.member, subjects, t.model_path)
    if isinstance(t, App):
        return App(t.head, tuple(_bind_own_assocs(model, a) for a in t.args))
    return t


def check_module(
    ast: A.ModuleAST,
    imports: list[CheckedModule],
    policy: CoherencePolicy,
    depth: int = DEFAULT_DEPTH,
) -> tuple[CheckedModule, list[Diagnostic]]:
    """Check one module against its (already checked) imports."""
    return ModuleChecker(ast, imports, policy, depth).run()


class ModuleChecker:
    def __init__(
        self,
        ast: A.ModuleAST,
        imports: list[CheckedModule],
        policy: CoherencePolicy,
        depth: int = DEFAULT_DEPTH,
    ):
        self.ast = ast
        self.policy = policy
        self.depth = depth
        self.visible = [STD_MODULE] + list(imports)  # topo order, std first
        self.module = CheckedModule(name=ast.name, imports=list(ast.imports), span=ast.span)
        self.diags: list[Diagnostic] = []

        # Name tables over everything visible (own entries added as they form).
        self.concepts: dict[str, ConceptDecl] = {}
        self.datas: dict[str, DataDecl] = {}
        self.concept_names: dict[str, list[ConceptDecl]] = {}
        self.data_names: dict[str, list[DataDecl]] = {}
        self.fun_names: dict[str, list[FunDecl]] = {}
        self.ctor_names: dict[str, list[tuple[DataDecl, CtorDecl]]] = {}
        self.req_names: dict[str, list[tuple[ConceptDecl, ReqSig]]] = {}
        self.assoc_names: dict[str, list[ConceptDecl]] = {}
        self.model_names: dict[str, list[ModelDecl]] = {}
        self.world: ModelWorld | None = None

        for mod in self.visible:
            self._index_module(mod)

    # ------------------------------------------------------------ indexing

    def _index_module(self, mod: CheckedModule):
        for concept in mod.concepts.values():
            self._index_concept(concept)
        for data in mod.datas.values():
            self._index_data(data)
        for fun in mod.funs.values():
            self.fun_names.setdefault(fun.name, []).append(fun)
        for model in mod.models:
            if model.name:
                self.model_names.setdefault(model.name, []).append(model)

    def _index_concept(self, concept: ConceptDecl):
        self.concepts[concept.id] = concept
        self.concept_names.setdefault(concept.name, []).append(concept)
        for member in concept.assoc_names:
            self.assoc_names.setdefault(member, []).append(concept)
        for req in concept.requirements.values():
            self.req_names.setdefault(req.name, []).append((concept, req))

    def _index_data(self, data: DataDecl):
        self.datas[data.id] = data
        self.data_names.setdefault(data.name, []).append(data)
        for ctor in data.ctors:
            self.ctor_names.setdefault(ctor.name, []).append((data, ctor))

    # ------------------------------------------------------------ driver

    def run(self) -> tuple[CheckedModule, list[Diagnostic]]:
        concept_asts = [d for d in self.ast.decls if isinstance(d, A.ConceptAST)]
        data_asts = [d for d in self.ast.decls if isinstance(d, A.DataAST)]
        model_asts = [d for d in self.ast.decls if isinstance(d, A.ModelAST)]
        fun_asts = [d for d in self.ast.decls if isinstance(d, A.FunAST)]

        self._check_local_name_clashes(concept_asts, data_asts, fun_asts)

        # Headers first so declarations may refer to each other freely.
        data_decls = [self._predeclare_data(d) for d in data_asts]
        concept_decls = [self._predeclare_concept(c) for c in concept_asts]
        for decl, dast in zip(data_decls, data_asts):
            self._fill_data(decl, dast)
            self.module.datas[decl.name] = decl
        for decl, cast in zip(concept_decls, concept_asts):
            self._fill_concept(decl, cast)
            self.module.concepts[decl.name] = decl
        self._check_refinement_cycles(concept_decls)

        for index, mast in enumerate(model_asts):
            model = self._build_model_header(mast, index)
            if model is not None:
                self.module.models.append(model)
                if model.name:
                    self.model_names.setdefault(model.name, []).append(model)

        world_models = [m for mod in self.visible for m in mod.models] + self.module.models
        self.world = ModelWorld(world_models, home=self.module.name)

        fun_decls: list[FunDecl | None] = [self._build_fun_header(f) for f in fun_asts]
        for decl in fun_decls:
            if decl is not None:
                self.module.funs[decl.name] = decl
                self.fun_names.setdefault(decl.name, []).append(decl)

        for model, mast in zip(list(self.module.models), model_asts):
            self._check_model_obligations_and_bodies(model, mast)

        for decl, fast in zip(fun_decls, fun_asts):
            if decl is not None:
                self._check_fun_body(decl, fast)

        return self.module, self.diags

    def _check_local_name_clashes(self, concepts, datas, funs):
        seen_types: dict[str, Span] = {}
        for d in list(concepts) + list(datas):
            if d.name in seen_types:
                self.diags.append(
                    Diagnostic(
                        "E-NAME",
                        f"duplicate type-level name '{d.name}' in module {self.ast.name}",
                        d.span,
                        module=self.ast.name,
                        related=(Related(seen_types[d.name], "first declaration"),),
                    )
                )
            seen_types[d.name] = d.span
        seen_values: dict[str, Span] = {}
        for f in funs:
            if f.name in seen_values:
                self.diags.append(
                    Diagnostic(
                        "E-NAME",
                        f"duplicate function name '{f.name}' in module {self.ast.name}",
                        f.span,
                        module=self.ast.name,
                        related=(Related(seen_values[f.name], "first declaration"),),
                    )
                )
            seen_values[f.name] = f.span

    # ------------------------------------------------------------ declarations

    def _predeclare_data(self, dast: A.DataAST) -> DataDecl:
        params = [Var(p, fresh_uid()) for p in dast.params]
        decl = DataDecl(self.ast.name, dast.name, params, [], dast.span)
        self._index_data(decl)
        return decl

    def _predeclare_concept(self, cast: A.ConceptAST) -> ConceptDecl:
        params = [Var(p, fresh_uid()) for p in cast.params]
        decl = ConceptDecl(
            module=self.ast.name,
            name=cast.name,
            params=params,
            supers=[],
            assoc_names=list(cast.assoc_names),
            requirements={},
            req_order=[],
            span=cast.span,
        )
        self._index_concept(decl)
        return decl

    def _fill_data(self, decl: DataDecl, dast: A.DataAST):
        tyvars = {v.name: v for v in decl.params}
        seen = set()
        for ctor in dast.ctors:
            if ctor.name in seen:
                self.diags.append(
                    Diagnostic(
                        "E-NAME",
                        f"duplicate constructor '{ctor.name}'",
                        ctor.span,
                        module=self.ast.name,
                    )
                )
                continue
            seen.add(ctor.name)
            try:
                fields = [self.resolve_type(f, tyvars) for f in ctor.fields]
            except SemaAbort as exc:
                self.diags.append(exc.diagnostic)
                continue
            decl.ctors.append(CtorDecl(ctor.name, fields, ctor.span))
            self.ctor_names.setdefault(ctor.name, []).append((decl, decl.ctors[-1]))

    def _fill_concept(self, decl: ConceptDecl, cast: A.ConceptAST):
        tyvars = {v.name: v for v in decl.params}
        for sup in cast.supers:
            try:
                constraint = self.resolve_constraint(sup, tyvars)
            except SemaAbort as exc:
                self.diags.append(exc.diagnostic)
                continue
            if isinstance(constraint, Conf):
                extra = [
                    v
                    for v in free_vars(constraint)
                    if v.uid not in {p.uid for p in decl.params}
                ]
                if extra:
                    self.diags.append(
                        Diagnostic(
                            "E-NAME",
                            "superclass constraints may mention only the concept's parameters",
                            sup.span,
                            module=self.ast.name,
                        )
                    )
                    continue
            decl.supers.append(constraint)
        seen_assoc = set()
        for member in cast.assoc_names:
            if member in seen_assoc:
                self.diags.append(
                    Diagnostic(
                        "E-NAME",
                        f"duplicate associated type '{member}' in concept {decl.name}",
                        cast.span,
                        module=self.ast.name,
                    )
                )
            seen_assoc.add(member)
        for req in cast.requirements:
            if req.name in decl.requirements:
                self.diags.append(
                    Diagnostic(
                        "E-NAME",
                        f"duplicate requirement '{req.name}' in concept {decl.name}",
                        req.span,
                        module=self.ast.name,
                    )
                )
                continue
            try:
                params = [(n, self.resolve_type(t, tyvars)) for n, t in req.params]
                ret = self.resolve_type(req.ret, tyvars)
            except SemaAbort as exc:
                self.diags.append(exc.diagnostic)
                continue
            sig = ReqSig(req.name, params, ret, req.span)
            decl.requirements[req.name] = sig
            decl.req_order.append(req.name)
            self.req_names.setdefault(req.name, []).append((decl, sig))

    def _check_refinement_cycles(self, local_concepts: list[ConceptDecl]):
        def supers_of(cid: str) -> list[str]:
            c = self.concepts.get(cid)
            if c is None:
                return []
            return [s.concept for s in c.supers if isinstance(s, Conf)]

        for start in local_concepts:
            stack, visited = [start.id], set()
            while stack:
                cid = stack.pop()
                for nxt in supers_of(cid):
                    if nxt == start.id:
                        self.diags.append(
                            Diagnostic(
                                "E-NAME",
                                f"cyclic concept refinement through {start.name}",
                                start.span,
                                module=self.ast.name,
                            )
                        )
                        stack = []
                        break
                    if nxt not in visited:
                        visited.add(nxt)
                        stack.append(nxt)

    def _build_model_header(self, mast: A.ModelAST, index: int) -> ModelDecl | None:
        try:
            concept = self.lookup_concept(mast.concept, mast.span)
            if len(mast.head) != len(concept.params):
                raise SemaAbort(
                    Diagnostic(
                        "E-ARITY",
                        f"concept {concept.name} expects {len(concept.params)} head types, "
                        f"got {len(mast.head)}",
                        mast.span,
                        module=self.ast.name,
                    )
                )
            implicit: dict[str, Var] = {}
            head = [self.resolve_type(t, {}, implicit) for t in mast.head]
            head_vars = list(implicit.values())
            context = [self.resolve_constraint(c, {}, implicit) for c in mast.context]
            model = ModelDecl(
                module=self.ast.name,
                index=index,
                name=mast.name,
                concept=concept.id,
                head=head,
                vars=head_vars,
                context=context,
                assoc={},
                span=mast.span,
            )
            if self.policy.kind == "scoped" and model.name is None:
                self.diags.append(
                    Diagnostic(
                        "E-NEEDS-NAME",
                        "the scoped policy requires every model to be named",
                        mast.span,
                        module=self.ast.name,
                    )
                )
            head_uids = {v.uid for v in head_vars}
            for c in context:
                for v in free_vars(c):
                    if v.uid not in head_uids:
                        self.diags.append(
                            Diagnostic(
                                "E-NAME",
                                f"constraint variable '{v.name}' does not occur in the model head",
                                mast.span,
                                module=self.ast.name,
                            )
                        )
            # Associated-type bindings: each declared member exactly once.
            bound = set()
            for bind in mast.assoc_binds:
                if bind.member not in concept.assoc_names:
                    self.diags.append(
                        Diagnostic(
                            "E-NAME",
                            f"concept {concept.name} has no associated type '{bind.member}'",
                            bind.span,
                            module=self.ast.name,
                        )
                    )
                    continue
                if bind.member in bound:
                    self.diags.append(
                        Diagnostic(
                            "E-NAME",
                            f"associated type '{bind.member}' bound twice",
                            bind.span,
                            module=self.ast.name,
                        )
                    )
                    continue
                bound.add(bind.member)
                rhs = self.resolve_type(bind.rhs, {v.name: v for v in model.vars})
                for v in free_vars(rhs):
                    if v.uid not in head_uids:
                        self.diags.append(
                            Diagnostic(
                                "E-NAME",
                                f"binding variable '{v.name}' does not occur in the model head",
                                bind.span,
                                module=self.ast.name,
                            )
                        )
                model.assoc[bind.member] = rhs
            for member in concept.assoc_names:
                if member not in bound:
                    self.diags.append(
                        Diagnostic(
                            "E-UNBOUND-ASSOC",
                            f"model {model.display} leaves associated type "
                            f"'{member}' of {concept.name} unbound",
                            mast.span,
                            module=self.ast.name,
                        )
                    )
            # Requirement coverage by name.
            given = {b.name for b in mast.bodies}
            for req in concept.req_order:
                if req not in given:
                    self.diags.append(
                        Diagnostic(
                            "E-MISSING-REQ",
                            f"model {model.display} does not implement requirement "
                            f"'{req}' of {concept.name}",
                            mast.span,
                            module=self.ast.name,
                        )
                    )
            for b in mast.bodies:
                if b.name not in concept.requirements:
                    self.diags.append(
                        Diagnostic(
                            "E-NAME",
                            f"concept {concept.name} has no requirement '{b.name}'",
                            b.span,
                            module=self.ast.name,
                        )
                    )
            return model
        except SemaAbort as exc:
            self.diags.append(exc.diagnostic)
            return None

    def _build_fun_header(self, fast: A.FunAST) -> FunDecl | None:
        try:
            seen = set()
            typarams = []
            for p in fast.typarams:
                if p in seen:
                    raise SemaAbort(
                        Diagnostic(
                            "E-NAME",
                            f"duplicate type parameter '{p}'",
                            fast.span,
                            module=self.ast.name,
                        )
                    )
                seen.add(p)
                typarams.append(Var(p, fresh_uid()))
            tyvars = {v.name: v for v in typarams}
            params = [(n, self.resolve_type(t, tyvars)) for n, t in fast.params]
            ret = self.resolve_type(fast.ret, tyvars)
            context = [self.resolve_constraint(c, tyvars) for c in fast.context]
            return FunDecl(
                module=self.ast.name,
                name=fast.name,
                typarams=typarams,
                params=params,
                ret=ret,
                context=context,
                span=fast.span,
            )
        except SemaAbort as exc:
            self.diags.append(exc.diagnostic)
            return None

    # ------------------------------------------------------------ obligations

    def _check_model_obligations_and_bodies(self, model: ModelDecl, mast: A.ModelAST):
        concept = self.concepts[model.concept]
        inst = concept.instantiate(model.head)
        inst_supers = [inst.apply(s) for s in concept.supers]
        givens = list(model.context) + inst_supers
        rigid = frozenset(v.uid for v in model.vars)
        resolver = Resolver(self.world, self.concepts, self.policy, self.depth)
        closed = close_givens(list(model.context), self.concepts)

        for sup in inst_supers:
            res, trace, diags = resolver.resolve(Goal(sup, rigid, model.span), closed)
            record = GoalRecord(model.span, sup, trace, res, f"model:{model.uid}")
            self.module.goal_log.append(record)
            if res is None:
                self.diags.extend(
                    self._map_goal_diags(diags, sup, rigid, model.span, concept.name)
                )
            else:
                self.diags.extend(d for d in diags if d.severity == "warning")
            model.superclass_resolutions.append(res)

        tyvars = {v.name: v for v in model.vars}
        for body in mast.bodies:
            sig = concept.requirements.get(body.name)
            if sig is None:
                continue  # already reported
            inst_params = [
                (n, _bind_own_assocs(model, inst.apply(t))) for n, t in sig.params
            ]
            inst_ret = _bind_own_assocs(model, inst.apply(sig.ret))
            if len(body.params) != len(inst_params):
                self.diags.append(
                    Diagnostic(
                        "E-ARITY",
                        f"requirement '{body.name}' takes {len(inst_params)} parameters",
                        body.span,
                        module=self.ast.name,
                    )
                )
                continue
            try:
                checker = ExprChecker(
                    self,
                    tyvars=tyvars,
                    rigid=rigid,
                    givens=givens,
                    owner=f"model:{model.uid}.{body.name}",
                )
                declared = [(n, self.resolve_type(t, tyvars)) for n, t in body.params]
                for (dn, dt), (_, st) in zip(declared, inst_params):
                    checker.require_equal(dt, st, body.span, f"parameter '{dn}'")
                declared_ret = self.resolve_type(body.ret, tyvars)
                checker.require_equal(declared_ret, inst_ret, body.span, "return type")
                env = {n: t for n, t in declared}
                checked = checker.check(body.body, declared_ret, env)
                model.bodies[body.name] = TLam(body.span, checker.fn_type_of(declared, declared_ret), declared, checked)
                model.body_sigs[body.name] = ReqSig(body.name, declared, declared_ret, body.span)
                model.body_goal_records[body.name] = checker.records
            except SemaAbort as exc:
                self.diags.append(exc.diagnostic)

    def _check_fun_body(self, decl: FunDecl, fast: A.FunAST):
        tyvars = {v.name: v for v in decl.typarams}
        rigid = frozenset(v.uid for v in decl.typarams)
        try:
            checker = ExprChecker(
                self,
                tyvars=tyvars,
                rigid=rigid,
                givens=list(decl.context),
                owner=f"fn:{decl.name}",
            )
            env = {n: t for n, t in decl.params}
            decl.body = checker.check(fast.body, decl.ret, env)
            decl.goal_records = checker.records
        except SemaAbort as exc:
            self.diags.append(exc.diagnostic)

    # ------------------------------------------------------------ lookups

    def lookup_concept(self, name: str, span: Span) -> ConceptDecl:
        hits = self.concept_names.get(name, [])
        if not hits:
            raise SemaAbort(
                Diagnostic("E-NAME", f"unknown concept '{name}'", span, module=self.ast.name)
            )
        if len(hits) > 1:
            mods = ", ".join(sorted(c.module for c in hits))
            raise SemaAbort(
                Diagnostic(
                    "E-NAME",
                    f"concept name '{name}' is ambiguous (declared in {mods})",
                    span,
                    module=self.ast.name,
                )
            )
        return hits[0]

    def _unique(self, table: dict, name: str, what: str, span: Span):
        hits = table.get(name, [])
        if not hits:
            return None
        if len(hits) > 1:
            raise SemaAbort(
                Diagnostic(
                    "E-NAME", f"{what} name '{name}' is ambiguous", span, module=self.ast.name
                )
            )
        return hits[0]

    # ------------------------------------------------------------ types

    def resolve_type(
        self,
        t: A.TypeExprAST,
        tyvars: dict[str, Var],
        implicit: dict[str, Var] | None = None,
    ) -> TypeTerm:
        if isinstance(t, A.TUnit):
            return UNIT
        if isinstance(t, A.TTuple):
            return pair_type(
                self.resolve_type(t.items[0], tyvars, implicit),
                self.resolve_type(t.items[1], tyvars, implicit),
            )
        if isinstance(t, A.TFn):
            params = [self.resolve_type(p, tyvars, implicit) for p in t.params]
            return fn_type(params, self.resolve_type(t.ret, tyvars, implicit))
        if isinstance(t, A.TProj):
            base = self.resolve_type(t.base, tyvars, implicit)
            return self.make_assoc(base, t.member, t.span)
        assert isinstance(t, A.TName)
        base = self._resolve_base_name(t, tyvars, implicit)
        for member in t.projections:
            base = self.make_assoc(base, member, t.span)
        return base

    def _resolve_base_name(
        self, t: A.TName, tyvars: dict[str, Var], implicit: dict[str, Var] | None
    ) -> TypeTerm:
        name = t.base
        if name in tyvars:
            if t.args:
                raise SemaAbort(
                    Diagnostic(
                        "E-ARITY",
                        f"type variable '{name}' cannot be applied to arguments",
                        t.span,
                        module=self.ast.name,
                    )
                )
            return tyvars[name]
        con = BUILTIN_CONS.get(name)
        if con is None:
            data = self._unique(self.data_names, name, "data type", t.span)
            if data is not None:
                con = Con(data.name, len(data.params), data.module)
        if con is not None:
            args = [self.resolve_type(a, tyvars, implicit) for a in t.args]
            if len(args) != con.arity:
                raise SemaAbort(
                    Diagnostic(
                        "E-ARITY",
                        f"type constructor {con.name} expects {con.arity} arguments, "
                        f"got {len(args)}",
                        t.span,
                        module=self.ast.name,
                    )
                )
            return App(con, tuple(args)) if args else con
        # A named model as a projection path (scoped policy syntax).
        if t.projections and self.policy.kind == "scoped":
            model = self._unique(self.model_names, name, "model", t.span)
            if model is not None:
                concept = self.concepts[model.concept]
                member = t.projections[0]
                if member not in concept.assoc_names:
                    raise SemaAbort(
                        Diagnostic(
                            "E-NAME",
                            f"concept {concept.name} has no associated type '{member}'",
                            t.span,
                            module=self.ast.name,
                        )
                    )
                base = Assoc(concept.id, member, tuple(model.head), model.path)
                for extra in t.projections[1:]:
                    base = self.make_assoc(base, extra, t.span)
                return base
        if implicit is not None:
            if t.args:
                raise SemaAbort(
                    Diagnostic(
                        "E-NAME", f"unknown type constructor '{name}'", t.span, module=self.ast.name
                    )
                )
            if name not in implicit:
                implicit[name] = Var(name, fresh_uid())
            return implicit[name]
        raise SemaAbort(
            Diagnostic("E-NAME", f"unknown type '{name}'", t.span, module=self.ast.name)
        )

    def make_assoc(self, subject: TypeTerm, member: str, span: Span) -> TypeTerm:
        owners = [
            c for c in self.assoc_names.get(member, []) if len(c.params) == 1
        ]
        if not owners:
            raise SemaAbort(
                Diagnostic(
                    "E-NAME",
                    f"no visible concept declares an associated type '{member}'",
                    span,
                    module=self.ast.name,
                )
            )
        if len(owners) > 1:
            names = ", ".join(sorted(c.id for c in owners))
            raise SemaAbort(
                Diagnostic(
                    "E-NAME",
                    f"associated type '{member}' is ambiguous between {names}",
                    span,
                    module=self.ast.name,
                )
            )
        concept = owners[0]
        term = Assoc(concept.id, member, (subject,))
        return self._tag_scoped_assoc(term)

    def _tag_scoped_assoc(self, term: Assoc) -> TypeTerm:
        """Under the scoped policy, pin untagged ground projections to the
        unique named model in scope."""
        if self.policy.kind != "scoped" or term.model_path is not None:
            return term
        if self.world is None or not all(is_ground(s) for s in term.subjects):
            return term
        named = [
            m
            for m in self.world.models_of(term.concept)
            if m.name and term.member in m.assoc
        ]
        matching = []
        from .types import match_many

        for m in named:
            fresh_head, _, _ = freshen(tuple(m.head), m.vars)
            if match_many(list(zip(fresh_head, term.subjects))) is not None:
                matching.append(m)
        if not matching:
            return term
        best = min(self.world.scope_level(m) for m in matching)
        level = [m for m in matching if self.world.scope_level(m) == best]
        if len(level) == 1:
            return Assoc(term.concept, term.member, term.subjects, level[0].path)
        return term

    def resolve_constraint(
        self,
        c: A.ConstraintAST,
        tyvars: dict[str, Var],
        implicit: dict[str, Var] | None = None,
    ) -> ConstraintTerm:
        if isinstance(c, A.EqAST):
            return Eq(
                self.resolve_type(c.lhs, tyvars, implicit),
                self.resolve_type(c.rhs, tyvars, implicit),
            )
        assert isinstance(c, A.ConfAST)
        concept = self.lookup_concept(c.concept, c.span)
        if len(c.args) != len(concept.params):
            raise SemaAbort(
                Diagnostic(
                    "E-ARITY",
                    f"concept {concept.name} takes {len(concept.params)} subjects, "
                    f"got {len(c.args)}",
                    c.span,
                    module=self.ast.name,
                )
            )
        subjects = tuple(self.resolve_type(a, tyvars, implicit) for a in c.args)
        return Conf(concept.id, subjects)

    # ------------------------------------------------------------ goal plumbing

    def _map_goal_diags(
        self,
        diags: list[Diagnostic],
        constraint: ConstraintTerm,
        rigid: frozenset[int],
        span: Span,
        what: str,
    ) -> list[Diagnostic]:
        """Resolution failures on rigid subjects are missing assumptions."""
        out = []
        involves_rigid = any(v.uid in rigid for v in free_vars(constraint))
        for d in diags:
            if d.code == "E-NO-MODEL" and involves_rigid:
                out.append(
                    Diagnostic(
                        "E-TYPE-MISMATCH",
                        f"{d.message}; the constraint "
                        f"{render_constraint(constraint)} is not entailed by the "
                        f"context of {what}",
                        d.span,
                        module=self.ast.name,
                        related=d.related,
                    )
                )
            else:
                out.append(
                    Diagnostic(d.code, d.message, d.span, module=self.ast.name, related=d.related)
                )
        return out


# ---------------------------------------------------------------- expressions


@dataclass
class CalleeSig:
    kind: str  # fun | builtin | ctor | requirement
    display: str
    tyvars: list[Var]
    params: list[TypeTerm]
    ret: TypeTerm
    context: list[ConstraintTerm]
    target: tuple
    concept_id: str | None = None
    member: str | None = None


class ExprChecker:
    def __init__(
        self,
        mc: ModuleChecker,
        tyvars: dict[str, Var],
        rigid: frozenset[int],
        givens: list[ConstraintTerm],
        owner: str,
    ):
        self.mc = mc
        self.tyvars = tyvars
        self.rigid = rigid
        self.givens = givens
        self.closed = close_givens(list(givens), mc.concepts)
        self.owner = owner
        self.records: list[GoalRecord] = []
        self.resolver = Resolver(mc.world, mc.concepts, mc.policy, mc.depth)

    # ------------------------------------------------------------- utilities

    def abort(self, code: str, msg: str, span: Span):
        raise SemaAbort(Diagnostic(code, msg, span, module=self.mc.module.name))

    def fn_type_of(self, params, ret) -> TypeTerm:
        return fn_type([t for _, t in params], ret)

    def norm(self, t: TypeTerm, span: Span) -> TypeTerm:
        try:
            return normalize(t, [g for g in self.givens if isinstance(g, Eq)], self.mc.world)
        except NormDiverge:
            self.abort(
                "E-NORM-DIVERGE",
                f"normalization of {render(t)} did not terminate",
                span,
            )

    def require_equal(self, found: TypeTerm, expected: TypeTerm, span: Span, what: str):
        found_n = self.norm(found, span)
        expected_n = self.norm(expected, span)
        if found_n == expected_n:
            return
        e_txt = render(expected)
        if expected_n != expected:
            e_txt += f" (= {render(expected_n)})"
        f_txt = render(found)
        if found_n != found:
            f_txt += f" (= {render(found_n)})"
        self.abort(
            "E-TYPE-MISMATCH",
            f"type mismatch in {what}: expected {e_txt}, found {f_txt}",
            span,
        )

    def discharge(self, constraint: ConstraintTerm, span: Span):
        res, trace, diags = self.resolver.resolve(Goal(constraint, self.rigid, span), self.closed)
        record = GoalRecord(span, constraint, trace, res, self.owner)
        self.records.append(record)
        self.mc.module.goal_log.append(record)
        mapped = self.mc._map_goal_diags(diags, constraint, self.rigid, span, self.owner)
        if res is None:
            self.mc.diags.extend(mapped)
        else:
            self.mc.diags.extend(d for d in mapped if d.severity == "warning")
        return res

    # ------------------------------------------------------------- callables

    def _callee_sig(self, name: str, span: Span) -> CalleeSig | None:
        mc = self.mc
        fun = mc._unique(mc.fun_names, name, "function", span)
        req = mc._unique(mc.req_names, name, "requirement", span)
        ctor = mc._unique(mc.ctor_names, name, "constructor", span)
        hits = [x for x in (fun, req, ctor) if x is not None]
        if len(hits) > 1:
            self.abort("E-NAME", f"name '{name}' is ambiguous in this scope", span)
        builtin = BUILTIN_SIGS.get(name) if not hits else None
        if fun is not None:
            fresh, _, fresh_vars = freshen(
                (tuple(t for _, t in fun.params), fun.ret, tuple(fun.context)), fun.typarams
            )
            fparams, fret, fctx = fresh
            return CalleeSig(
                kind="fun",
                display=fun.name,
                tyvars=fresh_vars,
                params=list(fparams),
                ret=fret,
                context=list(fctx),
                target=(fun.module, fun.name),
            )
        if req is not None:
            concept, sig = req
            fresh, _, fresh_vars = freshen(
                (tuple(t for _, t in sig.params), sig.ret, tuple(concept.params)),
                concept.params,
            )
            fparams, fret, fsubjects = fresh
            return CalleeSig(
                kind="requirement",
                display=f"{concept.name}.{sig.name}",
                tyvars=fresh_vars,
                params=list(fparams),
                ret=fret,
                context=[Conf(concept.id, tuple(fsubjects))],
                target=(concept.id, sig.name),
                concept_id=concept.id,
                member=sig.name,
            )
        if ctor is not None:
            data, cdecl = ctor
            data_ty = (
                App(Con(data.name, len(data.params), data.module), tuple(data.params))
                if data.params
                else Con(data.name, 0, data.module)
            )
            fresh, _, fresh_vars = freshen(
                (tuple(cdecl.fields), data_ty), data.params
            )
            ffields, fdata = fresh
            return CalleeSig(
                kind="ctor",
                display=cdecl.name,
                tyvars=fresh_vars,
                params=list(ffields),
                ret=fdata,
                context=[],
                target=(data.id, cdecl.name),
            )
        if builtin is not None:
            typs, params, ret = builtin
            fresh, _, fresh_vars = freshen((tuple(params), ret), typs)
            fparams, fret = fresh
            return CalleeSig(
                kind="builtin",
                display=name,
                tyvars=fresh_vars,
                params=list(fparams),
                ret=fret,
                context=[],
                target=(name,),
            )
        return None

    def _is_deferred(self, e: A.ExprAST) -> bool:
        if isinstance(e, (A.ELambda, A.EMatch, A.EIf, A.ELet)):
            return True
        if isinstance(e, A.EInt) and e.width is None:
            return True
        if isinstance(e, A.EVar):
            ctor = self.mc.ctor_names.get(e.name)
            if ctor and len(ctor) == 1:
                data, cdecl = ctor[0]
                if not cdecl.fields and data.params:
                    return True
        return False

    def _match_lenient(
        self,
        pat: TypeTerm,
        tgt: TypeTerm,
        binding: Substitution,
        flexible: frozenset[int],
        span: Span,
    ) -> bool:
        """Absorb type information from an argument into the binding.

        Projections whose subjects are still undetermined yield no
        information yet; a later validation pass checks them once every
        type parameter is known.
        """
        pat = binding.apply(pat)
        if not any(v.uid in flexible for v in free_vars(pat)):
            return self.norm(pat, span) == self.norm(tgt, span)
        if isinstance(pat, Var):
            binding.bind(pat.uid, tgt)  # keep the target's original form
            return True
        if isinstance(pat, Assoc):
            return True  # undetermined projection, validated later
        if isinstance(pat, App):
            for candidate in (tgt, self.norm(tgt, span)):
                if (
                    isinstance(candidate, App)
                    and pat.head == candidate.head
                    and len(pat.args) == len(candidate.args)
                ):
                    return all(
                        self._match_lenient(a, b, binding, flexible, span)
                        for a, b in zip(pat.args, candidate.args)
                    )
        return False

    def _apply_sig(
        self,
        sig: CalleeSig,
        span: Span,
        args: list[A.ExprAST],
        env: dict[str, TypeTerm],
        expected: TypeTerm | None,
    ) -> TExpr:
        if len(args) != len(sig.params):
            self.abort(
                "E-ARITY",
                f"{sig.display} takes {len(sig.params)} arguments, got {len(args)}",
                span,
            )
        binding = Substitution()
        flexible = frozenset(v.uid for v in sig.tyvars)
        checked: list[TExpr | None] = [None] * len(args)
        synthed: list[TypeTerm | None] = [None] * len(args)

        def absorb(pattern: TypeTerm, target: TypeTerm, where: Span, what: str):
            if not self._match_lenient(pattern, target, binding, flexible, where):
                pat = binding.apply(pattern)
                e_txt = render(pat)
                pat_n = self.norm(pat, where)
                if pat_n != pat:
                    e_txt += f" (= {render(pat_n)})"
                f_txt = render(target)
                tgt_n = self.norm(target, where)
                if tgt_n != target:
                    f_txt += f" (= {render(tgt_n)})"
                self.abort(
                    "E-TYPE-MISMATCH",
                    f"type mismatch in {what}: expected {e_txt}, found {f_txt}",
                    where,
                )

        def undetermined(t: TypeTerm) -> bool:
            return any(v.uid in flexible for v in free_vars(binding.apply(t)))

        if expected is not None and undetermined(sig.ret):
            absorb(sig.ret, expected, span, f"result of {sig.display}")
        for i, arg in enumerate(args):
            if self._is_deferred(arg) or not undetermined(sig.params[i]):
                continue
            t_arg, tex = self.synth(arg, env)
            checked[i] = tex
            synthed[i] = t_arg
            absorb(sig.params[i], t_arg, arg.span, f"argument {i + 1} of {sig.display}")
        unbound = [v for v in sig.tyvars if v.uid not in binding.bindings]
        if unbound:
            names = ", ".join(v.name for v in unbound)
            self.abort(
                "E-CANNOT-INFER",
                f"cannot infer type parameter(s) {names} of {sig.display}; "
                f"add an annotation",
                span,
            )
        for i, arg in enumerate(args):
            if checked[i] is None:
                checked[i] = self.check(arg, binding.apply(sig.params[i]), env)
            else:
                # validates projections that were undetermined during matching
                self.require_equal(
                    synthed[i],
                    binding.apply(sig.params[i]),
                    arg.span,
                    f"argument {i + 1} of {sig.display}",
                )
        resolutions = []
        for c in sig.context:
            inst = binding.apply(c)
            resolutions.append(self.discharge(inst, span))
        result = binding.apply(sig.ret)
        tyargs = [binding.apply(v) for v in sig.tyvars]
        if sig.kind == "requirement":
            subjects = list(tyargs)
            return TReqCall(
                span,
                result,
                sig.concept_id,
                sig.member,
                subjects,
                resolutions[0],
                list(checked),
            )
        if sig.kind == "fun":
            return TCall(span, result, "fun", sig.target, tyargs, resolutions, list(checked))
        if sig.kind == "ctor":
            return TCall(span, result, "ctor", sig.target, tyargs, [], list(checked))
        return TCall(span, result, "builtin", sig.target, tyargs, [], list(checked))

    # ------------------------------------------------------------- synthesis

    def synth(self, e: A.ExprAST, env: dict[str, TypeTerm]) -> tuple[TypeTerm, TExpr]:
        if isinstance(e, A.EVar):
            if e.name in env:
                return env[e.name], TVarRef(e.span, env[e.name], e.name)
            return self._synth_global(e, env)
        if isinstance(e, A.EInt):
            if e.width is None:
                self.abort(
                    "E-CANNOT-INFER",
                    "integer literal needs a width (write e.g. `0:U64` or `0:U8`)",
                    e.span,
                )
            ty = U64 if e.width == "U64" else U8
            return ty, TLit(e.span, ty, "u64" if e.width == "U64" else "u8", e.value)
        if isinstance(e, A.EFloat):
            return F64, TLit(e.span, F64, "f64", e.lexeme)
        if isinstance(e, A.EString):
            return STRING, TLit(e.span, STRING, "string", e.value)
        if isinstance(e, A.EBool):
            return BOOL, TLit(e.span, BOOL, "bool", e.value)
        if isinstance(e, A.EUnit):
            return UNIT, TLit(e.span, UNIT, "unit", ())
        if isinstance(e, A.EApp):
            return self._synth_app(e, env, expected=None)
        if isinstance(e, A.ETuple):
            t1, x1 = self.synth(e.items[0], env)
            t2, x2 = self.synth(e.items[1], env)
            ty = pair_type(t1, t2)
            return ty, TTuple(e.span, ty, x1, x2)
        if isinstance(e, A.EAnnot):
            ty = self.mc.resolve_type(e.annot, self.tyvars)
            return ty, self.check(e.expr, ty, env)
        if isinstance(e, A.ELet):
            return self._synth_let(e, env)
        if isinstance(e, A.EIf):
            cond = self.check(e.cond, BOOL, env)
            t_then, x_then = self.synth(e.then, env)
            x_else = self.check(e.orelse, t_then, env)
            return t_then, TIf(e.span, t_then, cond, x_then, x_else)
        if isinstance(e, A.EMatch):
            return self._synth_match(e, env)
        if isinstance(e, A.ELambda):
            params = []
            for name, annot in e.params:
                if annot is None:
                    self.abort(
                        "E-CANNOT-INFER",
                        f"lambda parameter '{name}' needs a type annotation here",
                        e.span,
                    )
                params.append((name, self.mc.resolve_type(annot, self.tyvars)))
            inner = dict(env)
            inner.update(params)
            t_body, x_body = self.synth(e.body, inner)
            ty = fn_type([t for _, t in params], t_body)
            return ty, TLam(e.span, ty, params, x_body)
        raise AssertionError(type(e))

    def _synth_global(self, e: A.EVar, env) -> tuple[TypeTerm, TExpr]:
        mc = self.mc
        name = e.name
        ctor = mc._unique(mc.ctor_names, name, "constructor", e.span)
        if ctor is not None:
            data, cdecl = ctor
            if cdecl.fields:
                self.abort(
                    "E-ARITY",
                    f"constructor {name} takes {len(cdecl.fields)} arguments; apply it",
                    e.span,
                )
            if data.params:
                self.abort(
                    "E-CANNOT-INFER",
                    f"cannot infer the type arguments of {name}; annotate it",
                    e.span,
                )
            ty = Con(data.name, 0, data.module)
            return ty, TCall(e.span, ty, "ctor", (data.id, cdecl.name), [], [], [])
        fun = mc._unique(mc.fun_names, name, "function", e.span)
        if fun is not None:
            if fun.is_generic:
                self.abort(
                    "E-CANNOT-INFER",
                    f"generic function {name} can only be used fully applied",
                    e.span,
                )
            ty = fn_type([t for _, t in fun.params], fun.ret)
            return ty, TGlobalFun(e.span, ty, fun.module, fun.name)
        builtin = BUILTIN_SIGS.get(name)
        if builtin is not None:
            typs, params, ret = builtin
            if typs:
                self.abort(
                    "E-CANNOT-INFER",
                    f"builtin {name} is generic and must be applied directly",
                    e.span,
                )
            ty = fn_type(list(params), ret)
            return ty, TBuiltinRef(e.span, ty, name)
        if mc.req_names.get(name):
            self.abort(
                "E-NAME",
                f"requirement '{name}' must be applied to arguments",
                e.span,
            )
        self.abort("E-NAME", f"unknown name '{name}'", e.span)

    def _synth_app(
        self, e: A.EApp, env, expected: TypeTerm | None
    ) -> tuple[TypeTerm, TExpr]:
        if isinstance(e.fn, A.EVar) and e.fn.name not in env:
            sig = self._callee_sig(e.fn.name, e.fn.span)
            if sig is None:
                self.abort("E-NAME", f"unknown name '{e.fn.name}'", e.fn.span)
            tex = self._apply_sig(sig, e.span, list(e.args), env, expected)
            return tex.type, tex
        t_fn, x_fn = self.synth(e.fn, env)
        t_fn_n = self.norm(t_fn, e.span)
        split = split_fn_type(t_fn_n)
        if split is None:
            self.abort(
                "E-TYPE-MISMATCH",
                f"expression of type {render(t_fn)} is not callable",
                e.span,
            )
        params, ret = split
        if len(params) != len(e.args):
            self.abort(
                "E-ARITY",
                f"function expects {len(params)} arguments, got {len(e.args)}",
                e.span,
            )
        args = [self.check(a, p, env) for a, p in zip(e.args, params)]
        return ret, TCallExpr(e.span, ret, x_fn, args)

    def _synth_let(self, e: A.ELet, env) -> tuple[TypeTerm, TExpr]:
        bound_t, bound_x = self._check_let_bound(e, env)
        inner = dict(env)
        if e.name != "_":
            inner[e.name] = bound_t
        t_body, x_body = self.synth(e.body, inner)
        return t_body, TLet(e.span, t_body, e.name, bound_x, x_body)

    def _check_let_bound(self, e: A.ELet, env) -> tuple[TypeTerm, TExpr]:
        if e.annot is not None:
            ty = self.mc.resolve_type(e.annot, self.tyvars)
            return ty, self.check(e.bound, ty, env)
        return self.synth(e.bound, env)

    def _scrutinee_data(self, t: TypeTerm, span: Span) -> tuple[DataDecl, Substitution]:
        t_n = self.norm(t, span)
        con = None
        args: tuple[TypeTerm, ...] = ()
        if isinstance(t_n, Con):
            con = t_n
        elif isinstance(t_n, App) and isinstance(t_n.head, Con):
            con = t_n.head
            args = t_n.args
        if con is not None:
            data = self.mc.datas.get(f"{con.origin}.{con.name}")
            if data is not None:
                inst = Substitution({v.uid: a for v, a in zip(data.params, args)})
                return data, inst
        self.abort(
            "E-TYPE-MISMATCH",
            f"match scrutinee has type {render(t)}, which is not a sum type",
            span,
        )

    def _synth_match(self, e: A.EMatch, env) -> tuple[TypeTerm, TExpr]:
        t_scrut, x_scrut = self.synth(e.scrutinee, env)
        data, inst = self._scrutinee_data(t_scrut, e.scrutinee.span)
        result_t: TypeTerm | None = None
        arms: list[TArm] = []
        for arm in e.arms:
            arm_env, tarm_info = self._bind_arm(arm, data, inst, env)
            if result_t is None:
                result_t, x_body = self.synth(arm.body, arm_env)
            else:
                x_body = self.check(arm.body, result_t, arm_env)
            ctor_key, binders, btypes = tarm_info
            arms.append(TArm(ctor_key, binders, btypes, x_body))
        assert result_t is not None
        return result_t, TMatch(e.span, result_t, x_scrut, arms)

    def _bind_arm(self, arm: A.EMatchArm, data: DataDecl, inst: Substitution, env):
        if arm.ctor is None:
            return dict(env), (None, [], [])
        cdecl = data.ctor(arm.ctor)
        if cdecl is None:
            self.abort(
                "E-NAME",
                f"'{arm.ctor}' is not a constructor of {data.name}",
                arm.span,
            )
        if len(arm.binders) != len(cdecl.fields):
            self.abort(
                "E-ARITY",
                f"constructor {arm.ctor} has {len(cdecl.fields)} fields, "
                f"pattern binds {len(arm.binders)}",
                arm.span,
            )
        arm_env = dict(env)
        btypes = []
        for binder, field_t in zip(arm.binders, cdecl.fields):
            ty = inst.apply(field_t)
            btypes.append(ty)
            if binder != "_":
                arm_env[binder] = ty
        return arm_env, ((data.id, arm.ctor), list(arm.binders), btypes)

    # ------------------------------------------------------------- checking

    def check(self, e: A.ExprAST, expected: TypeTerm, env: dict[str, TypeTerm]) -> TExpr:
        if isinstance(e, A.ELambda):
            return self._check_lambda(e, expected, env)
        if isinstance(e, A.EMatch):
            t_scrut, x_scrut = self.synth(e.scrutinee, env)
            data, inst = self._scrutinee_data(t_scrut, e.scrutinee.span)
            arms = []
            for arm in e.arms:
                arm_env, info = self._bind_arm(arm, data, inst, env)
                x_body = self.check(arm.body, expected, arm_env)
                ctor_key, binders, btypes = info
                arms.append(TArm(ctor_key, binders, btypes, x_body))
            return TMatch(e.span, expected, x_scrut, arms)
        if isinstance(e, A.EIf):
            cond = self.check(e.cond, BOOL, env)
            x_then = self.check(e.then, expected, env)
            x_else = self.check(e.orelse, expected, env)
            return TIf(e.span, expected, cond, x_then, x_else)
        if isinstance(e, A.ELet):
            bound_t, bound_x = self._check_let_bound(e, env)
            inner = dict(env)
            if e.name != "_":
                inner[e.name] = bound_t
            x_body = self.check(e.body, expected, inner)
            return TLet(e.span, expected, e.name, bound_x, x_body)
        if isinstance(e, A.EInt) and e.width is None:
            expected_n = self.norm(expected, e.span)
            if expected_n == U64:
                return TLit(e.span, U64, "u64", e.value)
            if expected_n == U8:
                if e.value >= 2**8:
                    self.abort("E-TYPE-MISMATCH", "literal out of range for U8", e.span)
                return TLit(e.span, U8, "u8", e.value)
            self.abort(
                "E-TYPE-MISMATCH",
                f"integer literal cannot have type {render(expected)}",
                e.span,
            )
        if isinstance(e, A.ETuple):
            expected_n = self.norm(expected, e.span)
            if (
                isinstance(expected_n, App)
                and isinstance(expected_n.head, Con)
                and expected_n.head.name == "Pair"
            ):
                x1 = self.check(e.items[0], expected_n.args[0], env)
                x2 = self.check(e.items[1], expected_n.args[1], env)
                return TTuple(e.span, expected_n, x1, x2)
        if isinstance(e, A.EApp) and isinstance(e.fn, A.EVar) and e.fn.name not in env:
            sig = self._callee_sig(e.fn.name, e.fn.span)
            if sig is None:
                self.abort("E-NAME", f"unknown name '{e.fn.name}'", e.fn.span)
            tex = self._apply_sig(sig, e.span, list(e.args), env, expected)
            self.require_equal(tex.type, expected, e.span, "this expression")
            return tex
        if isinstance(e, A.EVar) and e.name not in env:
            ctor = self.mc.ctor_names.get(e.name)
            if ctor and len(ctor) == 1 and not ctor[0][1].fields:
                sig = self._callee_sig(e.name, e.span)
                tex = self._apply_sig(sig, e.span, [], {}, expected)
                self.require_equal(tex.type, expected, e.span, "this expression")
                return tex
        if isinstance(e, A.EAnnot):
            ty = self.mc.resolve_type(e.annot, self.tyvars)
            self.require_equal(ty, expected, e.span, "annotated expression")
            return self.check(e.expr, ty, env)
        t_found, tex = self.synth(e, env)
        self.require_equal(t_found, expected, e.span, "this expression")
        return tex

    def _check_lambda(self, e: A.ELambda, expected: TypeTerm, env) -> TExpr:
        expected_n = self.norm(expected, e.span)
        split = split_fn_type(expected_n)
        if split is None:
            self.abort(
                "E-TYPE-MISMATCH",
                f"lambda cannot have non-function type {render(expected)}",
                e.span,
            )
        want_params, want_ret = split
        if len(want_params) != len(e.params):
            self.abort(
                "E-ARITY",
                f"lambda takes {len(e.params)} parameters but its type wants "
                f"{len(want_params)}",
                e.span,
            )
        params = []
        inner = dict(env)
        for (name, annot), want in zip(e.params, want_params):
            ty = want
            if annot is not None:
                declared = self.mc.resolve_type(annot, self.tyvars)
                self.require_equal(declared, want, e.span, f"lambda parameter '{name}'")
                ty = declared
            params.append((name, ty))
            inner[name] = ty
        x_body = self.check(e.body, want_ret, inner)
        return TLam(e.span, expected_n, params, x_body)


def infer_expr(
    e: A.ExprAST,
    env: dict[str, TypeTerm],
    givens: list[ConstraintTerm],
    mc: ModuleChecker,
    owner: str = "expr",
) -> tuple[TypeTerm, TExpr]:
    """Infer one expression inside an already-checked module context."""
    rigid = frozenset(v.uid for v in free_vars(list(givens) + list(env.values())))
    tyvars = {v.name: v for t in env.values() for v in free_vars(t)}
    checker = ExprChecker(mc, tyvars=tyvars, rigid=rigid, givens=givens, owner=owner)
    return checker.synth(e, dict(env))
