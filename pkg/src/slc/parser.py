"""Recursive-descent parser for SL modules.

Grammar sketch (see README for the full version):

    module   ::= "module" IDENT import* decl*
    import   ::= "import" IDENT
    decl     ::= concept | model | fun | data
    concept  ::= "concept" IDENT "[" "Self" ("," IDENT)* "]" whereclause? "{" citem* "}"
    citem    ::= "type" IDENT | "fn" IDENT "(" tparams ")" "->" type
    model    ::= "model" (IDENT ":")? IDENT "[" type ("," type)* "]" whereclause? "{" mitem* "}"
    mitem    ::= "type" IDENT "=" type | fun
    fun      ::= "fn" IDENT ("[" IDENT ("," IDENT)* "]")? "(" tparams ")" "->" type whereclause? block
    data     ::= "data" IDENT ("[" IDENT ("," IDENT)* "]")? "{" ctor ("," ctor)* "}"
    whereclause ::= "where" constraint ("," constraint)*
    constraint  ::= type "==" type | IDENT "[" type ("," type)* "]"

Expressions are bidirectional-checker friendly: blocks are sequences of
`let`/expression statements ending in a value expression, lambdas are written
`fn(x, y) => e`, and `e : T` ascribes a type at call precedence.
"""

from __future__ import annotations

from . import ast as A
from .diagnostics import Diagnostic, Span
from .lexer import LexError, Token, tokenize


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diagnostic = diag
        super().__init__(diag.message)


class Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0

    # ------------------------------------------------------------- plumbing

    def peek(self, ahead: int = 0) -> Token:
        idx = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[idx]

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if self.pos < len(self.tokens) - 1:
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            expected = what or f"'{kind}'"
            self.fail(f"expected {expected}, found '{tok.text or 'end of file'}'", tok.span)
        return self.advance()

    def fail(self, msg: str, span: Span):
        raise ParseError(Diagnostic("E-PARSE", msg, span, module=""))

    def span_from(self, start: Span) -> Span:
        prev = self.tokens[max(self.pos - 1, 0)]
        end = prev.span.end if prev.span.end >= start.start else start.end
        return Span(self.file, start.start, end)

    # ------------------------------------------------------------- module

    def parse_module(self) -> A.ModuleAST:
        first = self.peek()
        if first.kind == "eof":
            self.fail("expected module header", first.span)
        start = self.expect("module", "module header").span
        name = self.expect("ident", "module name").text
        imports: list[str] = []
        import_spans: list[Span] = []
        while self.at("import"):
            isp = self.advance().span
            imp = self.expect("ident", "module name").text
            if imp in imports:
                self.fail(f"duplicate import of '{imp}'", self.span_from(isp))
            imports.append(imp)
            import_spans.append(self.span_from(isp))
        decls: list[A.DeclAST] = []
        while not self.at("eof"):
            decls.append(self.parse_decl())
        return A.ModuleAST(
            span=self.span_from(start),
            name=name,
            imports=tuple(imports),
            decls=tuple(decls),
            import_spans=tuple(import_spans),
        )

    def parse_decl(self) -> A.DeclAST:
        tok = self.peek()
        if tok.kind == "concept":
            return self.parse_concept()
        if tok.kind == "model":
            return self.parse_model()
        if tok.kind == "fn":
            return self.parse_fun(allow_typarams=True)
        if tok.kind == "data":
            return self.parse_data()
        self.fail(f"expected declaration, found '{tok.text or 'end of file'}'", tok.span)

    # ------------------------------------------------------------- concept

    def parse_concept(self) -> A.ConceptAST:
        start = self.expect("concept").span
        name = self.expect("ident", "concept name").text
        self.expect("[")
        first = self.expect("ident", "'Self'")
        if first.text != "Self":
            self.fail("first concept parameter must be 'Self'", first.span)
        params = [first.text]
        while self.at(","):
            self.advance()
            params.append(self.expect("ident", "type parameter").text)
        self.expect("]")
        supers = self.parse_where_clause()
        self.expect("{")
        assoc: list[str] = []
        reqs: list[A.ReqSigAST] = []
        while not self.at("}"):
            if self.at("type"):
                self.advance()
                assoc.append(self.expect("ident", "associated type name").text)
            elif self.at("fn"):
                rstart = self.advance().span
                rname = self.expect("ident", "requirement name").text
                self.expect("(")
                rparams = self.parse_typed_params()
                self.expect(")")
                self.expect("->")
                ret = self.parse_type()
                reqs.append(
                    A.ReqSigAST(self.span_from(rstart), rname, tuple(rparams), ret)
                )
            else:
                self.fail("expected 'type' or 'fn' inside concept", self.peek().span)
        self.expect("}")
        return A.ConceptAST(
            span=self.span_from(start),
            name=name,
            params=tuple(params),
            supers=tuple(supers),
            assoc_names=tuple(assoc),
            requirements=tuple(reqs),
        )

    # ------------------------------------------------------------- model

    def parse_model(self) -> A.ModelAST:
        start = self.expect("model").span
        name = None
        if self.peek().kind == "ident" and self.peek(1).kind == ":":
            name = self.advance().text
            self.advance()
        concept = self.expect("ident", "concept name").text
        self.expect("[")
        head = [self.parse_type()]
        while self.at(","):
            self.advance()
            head.append(self.parse_type())
        self.expect("]")
        context = self.parse_where_clause()
        self.expect("{")
        binds: list[A.AssocBindAST] = []
        bodies: list[A.FunAST] = []
        while not self.at("}"):
            if self.at("type"):
                bstart = self.advance().span
                member = self.expect("ident", "associated type name").text
                self.expect("=")
                rhs = self.parse_type()
                binds.append(A.AssocBindAST(self.span_from(bstart), member, rhs))
            elif self.at("fn"):
                bodies.append(self.parse_fun(allow_typarams=False))
            else:
                self.fail("expected 'type' binding or 'fn' body inside model", self.peek().span)
        self.expect("}")
        return A.ModelAST(
            span=self.span_from(start),
            name=name,
            concept=concept,
            head=tuple(head),
            context=tuple(context),
            assoc_binds=tuple(binds),
            bodies=tuple(bodies),
        )

    # ------------------------------------------------------------- fn / data

    def parse_fun(self, allow_typarams: bool) -> A.FunAST:
        start = self.expect("fn").span
        name = self.expect("ident", "function name").text
        typarams: list[str] = []
        if self.at("["):
            if not allow_typarams:
                self.fail("requirement bodies take no type parameters", self.peek().span)
            self.advance()
            typarams.append(self.expect("ident", "type parameter").text)
            while self.at(","):
                self.advance()
                typarams.append(self.expect("ident", "type parameter").text)
            self.expect("]")
        self.expect("(")
        params = self.parse_typed_params()
        self.expect(")")
        self.expect("->")
        ret = self.parse_type()
        context = self.parse_where_clause()
        body = self.parse_block()
        return A.FunAST(
            span=self.span_from(start),
            name=name,
            typarams=tuple(typarams),
            params=tuple(params),
            ret=ret,
            context=tuple(context),
            body=body,
        )

    def parse_typed_params(self) -> list[tuple[str, A.TypeExprAST]]:
        params: list[tuple[str, A.TypeExprAST]] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            pname = self.expect("ident", "parameter name").text
            self.expect(":")
            params.append((pname, self.parse_type()))
        return params

    def parse_data(self) -> A.DataAST:
        start = self.expect("data").span
        name = self.expect("ident", "data type name").text
        params: list[str] = []
        if self.at("["):
            self.advance()
            params.append(self.expect("ident", "type parameter").text)
            while self.at(","):
                self.advance()
                params.append(self.expect("ident", "type parameter").text)
            self.expect("]")
        self.expect("{")
        ctors: list[A.CtorAST] = []
        while not self.at("}"):
            if ctors:
                self.expect(",")
                if self.at("}"):
                    break
            cstart = self.peek().span
            cname = self.expect("ident", "constructor name").text
            fields: list[A.TypeExprAST] = []
            if self.at("("):
                self.advance()
                fields.append(self.parse_type())
                while self.at(","):
                    self.advance()
                    fields.append(self.parse_type())
                self.expect(")")
            ctors.append(A.CtorAST(self.span_from(cstart), cname, tuple(fields)))
        self.expect("}")
        if not ctors:
            self.fail("data type needs at least one constructor", self.span_from(start))
        return A.DataAST(self.span_from(start), name, tuple(params), tuple(ctors))

    # ------------------------------------------------------------- constraints

    def parse_where_clause(self) -> list[A.ConstraintAST]:
        if not self.at("where"):
            return []
        self.advance()
        out = [self.parse_constraint()]
        while self.at(","):
            self.advance()
            out.append(self.parse_constraint())
        return out

    def parse_constraint(self) -> A.ConstraintAST:
        start = self.peek().span
        lhs = self.parse_type()
        if self.at("=="):
            self.advance()
            rhs = self.parse_type()
            return A.EqAST(self.span_from(start), lhs, rhs)
        if not (isinstance(lhs, A.TName) and lhs.args and not lhs.projections):
            self.fail("expected a conformance constraint `Concept[T, ...]`", self.span_from(start))
        return A.ConfAST(self.span_from(start), lhs.base, lhs.args)

    # ------------------------------------------------------------- types

    def parse_type(self) -> A.TypeExprAST:
        start = self.peek().span
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                if self.at("->"):
                    self.advance()
                    ret = self.parse_type()
                    return A.TFn(self.span_from(start), (), ret)
                return A.TUnit(self.span_from(start))
            items = [self.parse_type()]
            while self.at(","):
                self.advance()
                items.append(self.parse_type())
            self.expect(")")
            if self.at("->"):
                self.advance()
                ret = self.parse_type()
                return A.TFn(self.span_from(start), tuple(items), ret)
            if len(items) == 1:
                base = items[0]
            elif len(items) == 2:
                base = A.TTuple(self.span_from(start), tuple(items))
            else:
                self.fail("tuple types have exactly two components", self.span_from(start))
            return self.parse_projections(base, start)
        name = self.expect("ident", "a type").text
        args: tuple[A.TypeExprAST, ...] = ()
        if self.at("["):
            self.advance()
            parsed = [self.parse_type()]
            while self.at(","):
                self.advance()
                parsed.append(self.parse_type())
            self.expect("]")
            args = tuple(parsed)
        projections: list[str] = []
        while self.at(".") and self.peek(1).kind == "ident":
            self.advance()
            projections.append(self.advance().text)
        return A.TName(self.span_from(start), name, args, tuple(projections))

    def parse_projections(self, base: A.TypeExprAST, start: Span) -> A.TypeExprAST:
        while self.at(".") and self.peek(1).kind == "ident":
            self.advance()
            member = self.advance().text
            base = A.TProj(self.span_from(start), base, member)
        return base

    # ------------------------------------------------------------- expressions

    def parse_block(self) -> A.ExprAST:
        start = self.expect("{").span
        stmts: list[tuple] = []  # (kind, name, annot, expr, span)
        tail: A.ExprAST | None = None
        while not self.at("}"):
            if self.at("let"):
                lstart = self.advance().span
                lname = self.expect("ident", "binding name").text
                annot = None
                if self.at(":"):
                    self.advance()
                    annot = self.parse_type()
                self.expect("=")
                bound = self.parse_expr()
                self.expect(";")
                stmts.append(("let", lname, annot, bound, self.span_from(lstart)))
                continue
            expr = self.parse_expr()
            if self.at(";"):
                self.advance()
                stmts.append(("seq", "_", None, expr, expr.span))
                continue
            tail = expr
            break
        end = self.expect("}", "'}' closing block").span
        if tail is None:
            self.fail("block must end with an expression", Span(self.file, start.start, end.end))
        result = tail
        for kind, name, annot, bound, sp in reversed(stmts):
            result = A.ELet(
                Span(self.file, sp.start, result.span.end), name, annot, bound, result
            )
        return result

    def parse_expr(self) -> A.ExprAST:
        tok = self.peek()
        if tok.kind == "fn":
            return self.parse_lambda()
        if tok.kind == "match":
            return self.parse_match()
        if tok.kind == "if":
            return self.parse_if()
        return self.parse_annotated()

    def parse_lambda(self) -> A.ExprAST:
        start = self.expect("fn").span
        self.expect("(")
        params: list[tuple[str, A.TypeExprAST | None]] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            pname = self.expect("ident", "parameter name").text
            annot = None
            if self.at(":"):
                self.advance()
                annot = self.parse_type()
            params.append((pname, annot))
        self.expect(")")
        self.expect("=>")
        body = self.parse_expr()
        return A.ELambda(self.span_from(start), tuple(params), body)

    def parse_match(self) -> A.ExprAST:
        start = self.expect("match").span
        scrutinee = self.parse_expr()
        self.expect("{")
        arms: list[A.EMatchArm] = []
        while not self.at("}"):
            if arms:
                self.expect(",")
                if self.at("}"):
                    break
            astart = self.peek().span
            if self.at("_"):
                self.advance()
                ctor = None
                binders: tuple[str, ...] = ()
            else:
                ctor = self.expect("ident", "constructor pattern").text
                names: list[str] = []
                if self.at("("):
                    self.advance()
                    while not self.at(")"):
                        if names:
                            self.expect(",")
                        if self.at("_"):
                            self.advance()
                            names.append("_")
                        else:
                            names.append(self.expect("ident", "pattern binder").text)
                    self.expect(")")
                binders = tuple(names)
            self.expect("=>")
            body = self.parse_expr()
            arms.append(A.EMatchArm(self.span_from(astart), ctor, binders, body))
        self.expect("}")
        if not arms:
            self.fail("match needs at least one arm", self.span_from(start))
        return A.EMatch(self.span_from(start), scrutinee, tuple(arms))

    def parse_if(self) -> A.ExprAST:
        start = self.expect("if").span
        cond = self.parse_expr()
        then = self.parse_block()
        self.expect("else")
        if self.at("if"):
            orelse = self.parse_if()
        else:
            orelse = self.parse_block()
        return A.EIf(self.span_from(start), cond, then, orelse)

    def parse_annotated(self) -> A.ExprAST:
        start = self.peek().span
        expr = self.parse_app()
        if self.at(":"):
            self.advance()
            annot = self.parse_type()
            if isinstance(expr, A.EInt) and expr.width is None and isinstance(annot, A.TName):
                if annot.base in ("U64", "U8") and not annot.args and not annot.projections:
                    limit = 2**64 if annot.base == "U64" else 2**8
                    if expr.value >= limit:
                        self.fail(
                            f"literal out of range for {annot.base}", self.span_from(start)
                        )
                    return A.EInt(self.span_from(start), expr.value, annot.base, expr.lexeme)
            return A.EAnnot(self.span_from(start), expr, annot)
        return expr

    def parse_app(self) -> A.ExprAST:
        start = self.peek().span
        expr = self.parse_atom()
        while self.at("("):
            self.advance()
            args: list[A.ExprAST] = []
            while not self.at(")"):
                if args:
                    self.expect(",")
                args.append(self.parse_expr())
            self.expect(")")
            expr = A.EApp(self.span_from(start), expr, tuple(args))
        return expr

    def parse_atom(self) -> A.ExprAST:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return A.EVar(tok.span, tok.text)
        if tok.kind == "int":
            self.advance()
            return A.EInt(tok.span, tok.value, None, tok.text)
        if tok.kind == "float":
            self.advance()
            return A.EFloat(tok.span, tok.value)
        if tok.kind == "string":
            self.advance()
            return A.EString(tok.span, tok.value)
        if tok.kind in ("true", "false"):
            self.advance()
            return A.EBool(tok.span, tok.kind == "true")
        if tok.kind == "(":
            start = self.advance().span
            if self.at(")"):
                self.advance()
                return A.EUnit(self.span_from(start))
            items = [self.parse_expr()]
            while self.at(","):
                self.advance()
                items.append(self.parse_expr())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            if len(items) == 2:
                return A.ETuple(self.span_from(start), tuple(items))
            self.fail("tuples have exactly two components", self.span_from(start))
        self.fail(f"expected an expression, found '{tok.text or 'end of file'}'", tok.span)


def parse_module(text: str, file: str) -> A.ModuleAST | list[Diagnostic]:
    """Parse one SL source file; diagnostics instead of an AST on failure."""
    try:
        tokens = tokenize(text, file)
        return Parser(tokens, file).parse_module()
    except (LexError, ParseError) as exc:
        return [exc.diagnostic]


def parse_module_bytes(data: bytes, file: str) -> A.ModuleAST | list[Diagnostic]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        return [
            Diagnostic(
             "E-ENCODING", f"source is not valid UTF-8: {exc.reason}", Span(file, (1, 1), (1, 1))
            )
        ]
    return parse_module(text, file)
