"""
Sample Sysmel programs shared by the test modules.
"""

from typing import NamedTuple


class Sample(NamedTuple):
    name: str
    source: str
    expected: str
    output: str = ""


# Every surface form, one after another.
SYNTAX_TOUR = r"""
## Literals
0 . -1 . 2r1101_0011 . 16rFF1F_F2F3.
2.5 . -3.5e-2.
#hello . #with:with: . #+ . ## Symbols
"Hello World\n\r".          ## Strings
'A' . '\''.                 ## Characters
#(1 2 test (2.5 3))         ## Literal array

1, 2, 3.                               ## Tuple
#{first: 1. #second : 2 . "third": 3}. ## Dictionary
#[1u8 . (2 + 3) asUInt8].              ## Byte array

## Identifiers
UInt8 . true . false . nil . void .
(RawTuple::new:) . RawTuple::slotAt:put: .

## Message sends
2 negated.             ## Unary
2 + 3 * 5.             ## Binary
Array with: 1 with: 2. ## Keyword
2 ::+ 3.               ## Low precedence binary
a := 2.                ## Assignment
with: #x with: 42.     ## Keyword without receiver
Int32[5sz].            ## #"[]:" message
doSomething{5sz}.      ## #"{}:" message
doSomething#[1u8].     ## #"#[]:"  message

## Message chain
(Array new: 3sz)
    at: 0sz put: 1;
    at: 1sz put: 2;
    yourself.

malloc(16sz). ## Function application

## Lexical block
{ let: #x with: 2 . x }.

## Block closure.
{:(Int32)x :y :: Int32 | x + y} (1i32, 3 i32)

## AST Node quote.
`'a.

## AST Node quasi-quote
``(a `,unarySelectorNode (`@callArgumentNodes)).
"""

# A class with a field and a method, a function using it and a call.
SAMPLE_CLASS_PROGRAM = """public class SampleClass
  superclass: Object; definition: {
    public field first => Int32.

    public method add: (x: Int32) ::=> Int32
        := first + x.
}.

function sampleFunction(x: Int32, y: Int32) => Int32
    := SampleClass new first: x; add: y.

printLine(sampleFunction(2i32, 3i32)).
"""

FACTORIAL = """function factorial(n: Int64) => Int64 :=
    if: n <= 1i64 then: 1i64 else: n * factorial(n - 1i64).
factorial(10i64)
"""

FIBONACCI = """function fib(n: Int32) => Int32 :=
    if: n < 2i32 then: n else: fib(n - 1i32) + fib(n - 2i32).
fib(15i32)
"""

SUM_TO = """function sumTo(n: Int32) => Int32 := {
    let total mutable := 0i32.
    let i mutable := 1i32.
    while: i <= n do: {
        total := total + i.
        i := i + 1i32
    }.
    total
}.
sumTo(10i32)
"""

POINTER_BUMP = """function bump(p: Int32 pointer) => Int32 := {
    p _ := p _ + 1i32.
    p _
}.
function run() => Int32 := {
    let x mutable := 41i32.
    bump(x address)
}.
run()
"""

GLOBAL_COUNTER = """let counter mutable := 0.
function tick() => Integer := {
    counter := counter + 1.
    counter
}.
tick(). tick(). tick()
"""

CAPTURED_ACCUMULATOR = """function accumulate() => Int32 := {
    let sum mutable := 0i32.
    let add := {:(Int32)x :: Int32 | sum := sum + x}.
    add(5i32).
    add(7i32)
}.
accumulate()
"""

COUNTER_CLASS = """public class Counter superclass: Object; definition: {
    public field count => Int32.

    public method increment ::=> Int32 := {
        count := count + 1i32.
        count
    }.
}.
function countTwice() => Int32 := {
    let counter := Counter new.
    counter count: 0i32.
    counter increment.
    counter increment
}.
countTwice()
"""

TWICE_MACRO = """macro function twice(expression) := ``(`,expression + `,expression).
twice(21)
"""

VOID_REPORT = """function report(x: Int32) => Void := if: x > 2i32 then: printLine(x).
report(3i32).
report(1i32)
"""

LOCAL_TYPED_LET = """function twiceOf(x: Int32) => Int32 := {
    let: #doubled type: Int32 with: x + x.
    doubled
}.
twiceOf(21i32)
"""

# Each iteration captures its own mutable local.
LOOP_CAPTURES = """function loopCaptures() := {
    let keepers := Array new: 2sz.
    let i mutable := 0sz.
    while: i < 2sz do: {
        let seen mutable := i.
        keepers at: i put: {:(Size)k :: Size | seen + k}.
        i := i + 1sz
    }.
    (keepers at: 0sz)(0sz) + (keepers at: 1sz)(0sz)
}.
loopCaptures()
"""

# A function nothing reachable from main calls.
DEAD_CODE_PROGRAM = """function helper(x: Int32) => Int32 := x * 2i32.
function unused(x: Int32) => Int32 := x - 1i32.
function main() => Int32 := {
    printLine(helper(21i32)).
    0i32
}.
"""

CORPUS = [
    Sample("arithmetic-precedence", "2 + 3 * 5", "25"),
    Sample("hexadecimal-radix", "16rFF1F_F2F3", "4280283891"),
    Sample("binary-radix", "2r1101_0011", "211"),
    Sample("uint8-wraparound", "255u8 + 1u8", "0"),
    Sample("int32-overflow", "2147483647i32 + 1i32", "-2147483648"),
    Sample("narrowing-conversion", "300 asUInt8", "44"),
    Sample("float-addition", "2.5 + 0.25", "2.75"),
    Sample("quotient-and-remainder", r"17 // 5, 17 \\ 5", "(3, 2)"),
    Sample("bitwise", "(12 bitAnd: 10) + (1 << 4)", "24"),
    Sample("negation", "5 negated", "-5"),
    Sample("factorial", FACTORIAL, "3628800"),
    Sample("fibonacci", FIBONACCI, "610"),
    Sample("maximum", "function max(a: Int32, b: Int32) => Int32 := if: a > b then: a else: b.\n"
                      "max(4i32, 9i32)", "9"),
    Sample("sign", "function sign(x: Int32) => Int32 := (x < 0i32) ifTrue: { -1i32 } ifFalse: { 1i32 }.\n"
                   "sign(-5i32)", "-1"),
    Sample("short-circuit-and", "(3 < 4) and: { 5 > 6 }", "false"),
    Sample("while-loop", SUM_TO, "55"),
    Sample("typed-local", LOCAL_TYPED_LET, "42"),
    Sample("cascade", "(Array new: 3sz)\n    at: 0sz put: 1;\n    at: 1sz put: 2;\n    yourself", "#(1 2 nil)"),
    Sample("array-size", "(Array new: 4sz) size", "4"),
    Sample("block-closure", "{:(Int32)x :y :: Int32 | x + y} (1i32, 3i32)", "4"),
    Sample("dynamic-block", "{:a :b | a * b}(6, 7)", "42"),
    Sample("closure-adder", "function makeAdder(x: Int32) := {:(Int32)y :: Int32 | x + y}.\n"
                            "makeAdder(5i32)(2i32)", "7"),
    Sample("captured-mutable-local", CAPTURED_ACCUMULATOR, "12"),
    Sample("pointer-bump", POINTER_BUMP, "42"),
    Sample("global-counter", GLOBAL_COUNTER, "3"),
    Sample("string-size", '"hello" size', "5"),
    Sample("dictionary-lookup", "#{first: 1. second: 2} at: #second", "2"),
    Sample("tuple", "1, 2, 3", "(1, 2, 3)"),
    Sample("literal-array", "#(1 2 test (2.5 3))", "#(1 2 #test #(2.5 3))"),
    Sample("byte-array", "#[1u8 . (2 + 3) asUInt8]", "#[1 5]"),
    Sample("array-equality", "#(1 2) = #(1 2)", "true"),
    Sample("symbol-identity", "#foo == #foo", "true"),
    Sample("nil-test", "nil isNil", "true"),
    Sample("character", "'A'", "'A'"),
    Sample("keyword-symbol", "#with:with:", "#with:with:"),
    Sample("print-string", "42 printString", '"42"'),
    Sample("print-line", 'printLine("hello").\nprintLine(3 + 4)', "void", "hello\n7\n"),
    Sample("void-function", VOID_REPORT, "void", "3\n"),
    Sample("quasi-quote-macro", TWICE_MACRO, "42"),
    Sample("metabuilder-class", SAMPLE_CLASS_PROGRAM, "void", "5\n"),
    Sample("counter-class", COUNTER_CLASS, "2"),
    Sample("loop-captures", LOOP_CAPTURES, "1"),
]
