"""Adversarial inputs and less-traveled semantic paths."""

import pytest

from conftest import check_inline, codes

from slc.parser import parse_module


@pytest.mark.parametrize(
    "src",
    [
        "",
        "module",
        "module m extra",
        "module m\nconcept",
        "module m\nconcept C[] { }",
        "module m\nconcept C[Self { }",
        "module m\nmodel : C[U64] { }",
        "module m\nfn f( -> U64 { }",
        "module m\nfn f() -> U64 { }",
        "module m\nfn f() -> U64 { 1:U64 ",
        "module m\nfn f() -> U64 { match x { } }",
        "module m\nfn f() -> U64 { (1:U64, 2:U64, 3:U64) }",
        "module m\ndata D { }",
        "module m\nfn f() -> U64 { \"unterminated }",
        "module m\nfn f() -> U64 { 0x:U64 }",
        "module m\n@",
        "module m\nfn f() -> U64 { let x = 1:U64 }",
    ],
)
def test_malformed_inputs_are_diagnosed_not_crashes(src):
    result = parse_module(src, "bad.sl")
    assert isinstance(result, list)
    assert result and result[0].code == "E-PARSE"


def test_refinement_chain_projects_through_two_levels():
    src = """\
module m
concept A[Self] { fn fa(x: Self) -> String }
concept B[Self] where A[Self] { fn fb(x: Self) -> String }
concept C[Self] where B[Self] { fn fc(x: Self) -> String }
model a1: A[U64] { fn fa(x: U64) -> String { "a" } }
model b1: B[U64] { fn fb(x: U64) -> String { "b" } }
model c1: C[U64] { fn fc(x: U64) -> String { "c" } }
fn useAll[T](x: T) -> String where C[T] {
  concat(fa(x), concat(fb(x), fc(x)))
}
fn main() -> Unit { print(useAll(1:U64)) }
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics
    from slc.resolver import GivenLeaf

    use_all = result.modules["m"].funs["useAll"]
    leaves = {r.constraint.concept.split(".")[-1]: r.resolution for r in use_all.goal_records}
    assert isinstance(leaves["A"], GivenLeaf) and leaves["A"].via == (0, 0)
    assert isinstance(leaves["B"], GivenLeaf) and leaves["B"].via == (0,)
    assert isinstance(leaves["C"], GivenLeaf) and leaves["C"].via == ()

    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    _, transcript = run_program(core)
    assert transcript == ["abc"]


def test_two_param_data():
    src = """\
module m
data Either[l, r] { MkLeft(l), MkRight(r) }
fn swap(e: Either[U64, U8]) -> Either[U8, U64] {
  match e {
    MkLeft(x) => MkRight(x),
    MkRight(y) => MkLeft(y)
  }
}
fn main() -> Unit {
  match swap(MkLeft(9:U64)) {
    MkLeft(x) => print(show8(x)),
    MkRight(y) => print(show64(y))
  }
}
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics
    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    assert run_program(core)[1] == ["9"]


def test_match_arms_must_agree_in_synth_mode():
    src = """\
module m
fn f(o: Option[U64]) -> U64 {
  let x = match o { Some(y) => y, None => "zero" };
  0:U64
}
"""
    result = check_inline(m=src)
    assert "E-TYPE-MISMATCH" in codes(result)


def test_annotation_must_match_expression():
    src = "module m\nfn f() -> U64 { (1:U8):U64 }\n"
    result = check_inline(m=src)
    assert "E-TYPE-MISMATCH" in codes(result)


def test_concept_subject_arity_in_where_clause():
    src = """\
module m
concept Convertible[Self, B] { fn convert(x: Self) -> B }
fn f[T](x: T) -> T where Convertible[T] { x }
"""
    result = check_inline(m=src)
    assert "E-ARITY" in codes(result)


def test_let_shadowing():
    src = """\
module m
fn f() -> U64 {
  let x = 1:U64;
  let x = add64(x, 1:U64);
  x
}
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics


def test_wrong_constructor_in_match():
    src = """\
module m
data D { MkD }
fn f(o: Option[U64]) -> U64 { match o { MkD => 0:U64, _ => 1:U64 } }
"""
    result = check_inline(m=src)
    assert "E-NAME" in codes(result)


def test_first_class_function_parameters():
    src = """\
module m
fn apply2(f: (U64, U64) -> U64, x: U64) -> U64 { f(x, x) }
fn main() -> Unit { print(show64(apply2(mul64, 6:U64))) }
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics
    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    assert run_program(core)[1] == ["36"]


def test_monomorphic_user_function_as_value():
    src = """\
module m
fn double(x: U64) -> U64 { mul64(x, 2:U64) }
fn applyIt(f: (U64) -> U64, x: U64) -> U64 { f(x) }
fn main() -> Unit { print(show64(applyIt(double, 21:U64))) }
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics
    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    assert run_program(core)[1] == ["42"]


def test_generic_function_not_first_class():
    src = """\
module m
fn id[T](x: T) -> T { x }
fn applyIt(f: (U64) -> U64, x: U64) -> U64 { f(x) }
fn main() -> Unit { print(show64(applyIt(id, 1:U64))) }
"""
    result = check_inline(m=src)
    assert "E-CANNOT-INFER" in codes(result)


def test_lambda_closure_captures_environment():
    src = """\
module m
fn main() -> Unit {
  let base = 40:U64;
  let adder = fn(x: U64) => add64(base, x);
  print(show64(adder(2:U64)))
}
"""
    result = check_inline(m=src)
    assert result.ok, result.diagnostics
    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    assert run_program(core)[1] == ["42"]


def test_deep_module_chain():
    files = {}
    prev = None
    for i in range(12):
        name = f"m{i:02d}"
        imports = f"import {prev}\n" if prev else ""
        body = (
            f"fn f{i}(x: U64) -> U64 {{ add64(x, 1:U64) }}\n"
            if prev is None
            else f"fn f{i}(x: U64) -> U64 {{ add64(f{i-1}(x), 1:U64) }}\n"
        )
        files[name] = f"module {name}\n{imports}{body}"
        prev = name
    files["top"] = (
        "module top\nimport m11\nfn main() -> Unit { print(show64(f11(0:U64))) }\n"
    )
    result = check_inline(**files)
    assert result.ok, result.diagnostics
    from slc.corekit import core_check, elaborate
    from slc.evaluator import run_program

    core = elaborate(result.program)
    assert core_check(core) == []
    assert run_program(core)[1] == ["12"]


def test_model_context_variable_must_occur_in_head():
    src = """\
module m
concept A[Self] { fn fa(x: Self) -> Self }
concept B[Self] { fn fb(x: Self) -> Self }
model bad: A[U64] where B[t] { fn fa(x: U64) -> U64 { x } }
"""
    result = check_inline(m=src)
    assert "E-NAME" in codes(result)


def test_scoped_tagging_prefers_inner_model():
    lib = """\
module lib
concept Keyed[Self] { type Key }
model libKey: Keyed[U64] { type Key = String }
fn libKeyOf() -> U64.Key { "lib" }
"""
    app = """\
module app
import lib
model appKey: Keyed[U64] { type Key = U8 }
fn appKeyOf() -> U64.Key { 7:U8 }
"""
    result = check_inline("scoped", lib=lib, app=app)
    assert result.ok, result.diagnostics
    from slc.types import render

    lib_fn = result.modules["lib"].funs["libKeyOf"]
    app_fn = result.modules["app"].funs["appKeyOf"]
    assert render(lib_fn.ret) == "lib.libKey.Key"
    assert render(app_fn.ret) == "app.appKey.Key"  # inner model shadows the import
