"""Parsing, printing, and round-trip behavior of the surface syntax."""

import pytest

from slc import ast as A
from slc.parser import parse_module
from slc.printer import ast_equal, pretty_print

ITER_SRC = """\
-- iterator demo
module demo

concept Iterator[Self] {
  type Element
  fn next(it: Self) -> Option[(Self.Element, Self)]
}

fn fold[A, B](xs: A, acc: B, f: (B, A.Element) -> B) -> B where Iterator[A] {
  match next(xs) {
    Some(p) => fold(snd(p), f(acc, fst(p)), f),
    None => acc
  }
}

model bytes64: Iterator[U64] {
  type Element = U8
  fn next(it: U64) -> Option[(U8, U64)] {
    if eq64(it, 0:U64) { None } else { Some((trunc8(band(it, 255:U64)), shr(it, 8:U64))) }
  }
}

fn main() -> Unit {
  print(show8(fold(0x2a2a:U64, 0:U8, add8)))
}
"""


def parse_ok(src, file="test.sl"):
    result = parse_module(src, file)
    assert not isinstance(result, list), result
    return result


def test_parse_iterator_module_shape():
    m = parse_ok(ITER_SRC)
    assert m.name == "demo"
    kinds = [type(d).__name__ for d in m.decls]
    assert kinds == ["ConceptAST", "FunAST", "ModelAST", "FunAST"]
    concept = m.decls[0]
    assert concept.params == ("Self",)
    assert concept.assoc_names == ("Element",)
    assert len(concept.requirements) == 1
    model = m.decls[2]
    assert model.name == "bytes64"
    assert model.assoc_binds[0].member == "Element"
    assert len(model.bodies) == 1


def test_empty_file_is_parse_error():
    result = parse_module("", "empty.sl")
    assert isinstance(result, list)
    assert result[0].code == "E-PARSE"
    assert "module header" in result[0].message


def test_assoc_binding_ast_hand_construction():
    src = "module m\nconcept C[Self] { type E }\nmodel M1: C[U64] { type E = U8 }\n"
    m = parse_ok(src)
    model = m.decls[1]
    assert isinstance(model, A.ModelAST)
    assert model.name == "M1"
    bind = model.assoc_binds[0]
    assert bind.member == "E"
    assert isinstance(bind.rhs, A.TName) and bind.rhs.base == "U8"
    # span-insensitive comparison against a hand-built binding
    expected = A.AssocBindAST(bind.span, "E", A.TName(bind.rhs.span, "U8", (), ()))
    assert ast_equal(bind, expected)


def test_duplicate_import_rejected():
    result = parse_module("module m\nimport a\nimport a\n", "x.sl")
    assert isinstance(result, list)
    assert result[0].code == "E-PARSE"


def test_parse_is_deterministic():
    a = parse_ok(ITER_SRC)
    b = parse_ok(ITER_SRC)
    assert a == b


def test_round_trip_iterator_module():
    m = parse_ok(ITER_SRC)
    printed = pretty_print(m)
    again = parse_ok(printed, "printed.sl")
    assert ast_equal(m, again)
    # printing is a fixpoint after one round
    assert pretty_print(again) == printed


@pytest.mark.parametrize(
    "src",
    [
        "module m\nconcept C[Self] { }\n",
        "module m\ndata Range[a] { UpTo(a, a) }\n",
        "module m\nfn f[T](x: T) -> T where Ord[T], T == Option[T] { x }\n",
        "module m\nfn g(x: (U64, U8)) -> U64 { fst(x) }\n",
        "module m\nfn h(f: () -> U64) -> U64 { f() }\n",
        "module m\nfn k(x: Option[(U8, U64)]) -> U64 { match x { Some(p) => snd(p), _ => 0:U64 } }\n",
        "module m\nfn s() -> String { let x = \"a\\n\"; concat(x, \"b\") }\n",
        "module m\nfn l() -> U64 { (fn(x: U64) => x)(1:U64) }\n",
        "module m\nfn c() -> String { convert(5:U64):String }\n",
        "module m\nimport other\nfn w() -> U64.Key { 7:U64 }\n",
        "module m\nfn b() -> Bool { if true { false } else { true } }\n",
        "module m\nfn e() -> Bool { if true { false } else { if false { true } else { false } } }\n",
    ],
)
def test_round_trip_fragments(src):
    m = parse_ok(src)
    printed = pretty_print(m)
    again = parse_ok(printed, "printed.sl")
    assert ast_equal(m, again)


def test_span_containment():
    m = parse_ok(ITER_SRC)

    def check(node, parent_span):
        if hasattr(node, "span"):
            assert parent_span.contains(node.span), (node, parent_span)
            parent_span = node.span
        if hasattr(node, "__dataclass_fields__"):
            for name in node.__dataclass_fields__:
                value = getattr(node, name)
                if isinstance(value, tuple):
                    for item in value:
                        if hasattr(item, "__dataclass_fields__"):
                            check(item, parent_span)
                elif hasattr(value, "__dataclass_fields__"):
                    check(value, parent_span)

    for decl in m.decls:
        check(decl, m.span)


def test_non_utf8_input():
    from slc.parser import parse_module_bytes

    result = parse_module_bytes(b"module m\n\xff\xfe", "bad.sl")
    assert isinstance(result, list)
    assert result[0].code == "E-ENCODING"


def test_self_must_come_first():
    result = parse_module("module m\nconcept C[T] { }\n", "x.sl")
    assert isinstance(result, list)
    assert "Self" in result[0].message
