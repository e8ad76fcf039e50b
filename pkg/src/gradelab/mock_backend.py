"""In-process language backend over a tiny C#-flavored class language.

The grammar (documented in docs/mock-language.md):

    program  := class*
    class    := "class" IDENT "{" member* "}"
    member   := field | ctor | method
    field    := access? type IDENT ("=" expr)? ";"
    ctor     := access? IDENT "(" params? ")" "{" "}"
    method   := access? "static"? type IDENT "(" params? ")" body
    body     := "{" ("return" expr ";")? "}"
    type     := "int" | "double" | "string" | "bool" | "void" | IDENT
    access   := "public" | "private" | "protected"

Expressions cover literals, parameter/field references, arithmetic with
C#-like integer semantics (truncating division, DivideByZeroException),
comparisons, boolean logic, string concatenation via ``+`` and static-style
calls ``Class.Method(args)``. ``//`` comments are skipped.

Diagnostics reuse familiar C# error codes (CS1002 "; expected", CS1513
"} expected", ...) so the compile-error feedback and hint prompts read like
the real toolchain's output.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .assignments import Literal
from .errors import InvocationFault, MemberLookup
from .harness import CompileOutcome, Diagnostic

BUILTIN_TYPES = {"int", "double", "string", "bool"}
ACCESS_KEYWORDS = {"public", "private", "protected"}
KEYWORDS = ACCESS_KEYWORDS | BUILTIN_TYPES | {"class", "static", "return", "void", "true", "false"}

_TWO_CHAR_OPS = {"==", "!=", "<=", ">=", "&&", "||"}
_ONE_CHAR_OPS = set("{}(),;=.+-*/%<>!")

MAX_CALL_DEPTH = 64


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | DOUBLE | STRING | OP | EOF
    value: str
    line: int
    col: int


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    line, col, i = 1, 1, 0
    n = len(source)

    def push(kind: str, value: str, l: int, c: int) -> None:
        tokens.append(Token(kind, value, l, c))

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            i += 1
            col += 1
            buf = []
            closed = False
            while i < n and source[i] != "\n":
                c = source[i]
                if c == "\\" and i + 1 < n:
                    esc = source[i + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    closed = True
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                diagnostics.append(Diagnostic(start_line, "CS1010", "Newline in constant"))
            push("STRING", "".join(buf), start_line, start_col)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                push("DOUBLE", source[i:j], start_line, start_col)
            else:
                push("INT", source[i:j], start_line, start_col)
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            push("IDENT", source[i:j], start_line, start_col)
            col += j - i
            i = j
            continue
        if source[i : i + 2] in _TWO_CHAR_OPS:
            push("OP", source[i : i + 2], start_line, start_col)
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            push("OP", ch, start_line, start_col)
            i += 1
            col += 1
            continue
        diagnostics.append(Diagnostic(line, "CS1056", f"Unexpected character '{ch}'"))
        i += 1
        col += 1

    tokens.append(Token("EOF", "", line, col))
    return tokens, diagnostics


# -- program model ----------------------------------------------------------


@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: str
    access: str
    line: int
    initializer: tuple | None = None


@dataclass(frozen=True)
class MethodDecl:
    name: str
    return_type: str
    access: str
    static: bool
    params: tuple[tuple[str, str], ...]  # (type, name)
    line: int
    body: tuple | None = None  # return expression AST


@dataclass(frozen=True)
class CtorDecl:
    access: str
    params: tuple[tuple[str, str], ...]
    line: int


@dataclass
class ClassDecl:
    name: str
    line: int
    fields: dict[str, FieldDecl] = dc_field(default_factory=dict)
    methods: dict[str, MethodDecl] = dc_field(default_factory=dict)
    ctors: list[CtorDecl] = dc_field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []
        self.classes: dict[str, ClassDecl] = {}

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def last_line(self) -> int:
        # Line of the most recently consumed token; where C# anchors
        # "; expected"-style messages.
        return self.tokens[max(self.pos - 1, 0)].line

    def error(self, code: str, message: str, line: int | None = None) -> None:
        self.diagnostics.append(Diagnostic(line or self.peek().line, code, message))

    def skip_to(self, *stops: str) -> None:
        """Panic-mode recovery: skip until one of the stop tokens or EOF."""
        while not self.at("EOF"):
            tok = self.peek()
            if tok.kind == "OP" and tok.value in stops:
                return
            if tok.kind == "IDENT" and tok.value in stops:
                return
            self.advance()

    # grammar

    def parse_program(self) -> None:
        while not self.at("EOF"):
            while self.at("IDENT") and self.peek().value in ACCESS_KEYWORDS:
                self.advance()
            if self.at("IDENT", "class"):
                self.parse_class()
            else:
                tok = self.peek()
                self.error(
                    "CS1022",
                    "Type or namespace definition, or end-of-file expected",
                    tok.line,
                )
                self.skip_to("class")

    def parse_class(self) -> None:
        self.advance()  # "class"
        if not self.at("IDENT") or self.peek().value in KEYWORDS:
            self.error("CS1001", "Identifier expected")
            self.skip_to("class")
            return
        name_tok = self.advance()
        decl = ClassDecl(name=name_tok.value, line=name_tok.line)
        if name_tok.value in self.classes:
            self.error(
                "CS0101",
                f"The namespace already contains a definition for '{name_tok.value}'",
                name_tok.line,
            )
        else:
            self.classes[name_tok.value] = decl
        if self.at("OP", "{"):
            self.advance()
        else:
            self.error("CS1514", "{ expected", self.last_line())
            self.skip_to("class")
            return
        while not self.at("OP", "}"):
            if self.at("EOF"):
                self.error("CS1513", "} expected", self.last_line())
                return
            self.parse_member(decl)
        self.advance()  # "}"

    def parse_member(self, decl: ClassDecl) -> None:
        access = "private"
        static = False
        while self.at("IDENT") and self.peek().value in ACCESS_KEYWORDS | {"static"}:
            word = self.advance().value
            if word == "static":
                static = True
            else:
                access = word

        tok = self.peek()
        if tok.kind != "IDENT":
            self.error(
                "CS1519",
                f"Invalid token '{tok.value}' in class, struct, or interface member declaration",
                tok.line,
            )
            self.advance()
            self.skip_to(";", "}")
            if self.at("OP", ";"):
                self.advance()
            return

        # Constructor: the class name followed directly by a parameter list.
        if tok.value == decl.name and self.peek(1).kind == "OP" and self.peek(1).value == "(":
            self.advance()
            params = self.parse_params()
            self.parse_block(expect_return=False)
            decl.ctors.append(CtorDecl(access=access, params=params, line=tok.line))
            return

        type_tok = self.advance()
        if type_tok.value in KEYWORDS - BUILTIN_TYPES - {"void"}:
            self.error(
                "CS1519",
                f"Invalid token '{type_tok.value}' in class, struct, or interface member declaration",
                type_tok.line,
            )
            self.skip_to(";", "}")
            if self.at("OP", ";"):
                self.advance()
            return
        if not self.at("IDENT") or self.peek().value in KEYWORDS:
            self.error("CS1001", "Identifier expected", self.last_line())
            self.skip_to(";", "}")
            if self.at("OP", ";"):
                self.advance()
            return
        name_tok = self.advance()

        if self.at("OP", "("):
            params = self.parse_params()
            body = self.parse_block(expect_return=True)
            self.declare(
                decl,
                name_tok,
                MethodDecl(
                    name=name_tok.value,
                    return_type=type_tok.value,
                    access=access,
                    static=static,
                    params=params,
                    line=name_tok.line,
                    body=body,
                ),
            )
            return

        initializer = None
        if self.at("OP", "="):
            self.advance()
            initializer = self.parse_expression()
        if self.at("OP", ";"):
            self.advance()
        else:
            # Report where the declaration ended; do not consume the next
            # token so the following member still parses.
            self.error("CS1002", "; expected", self.last_line())
        self.declare(
            decl,
            name_tok,
            FieldDecl(
                name=name_tok.value,
                type=type_tok.value,
                access=access,
                line=name_tok.line,
                initializer=initializer,
            ),
        )

    def declare(self, decl: ClassDecl, name_tok: Token, member) -> None:
        if name_tok.value in decl.fields or name_tok.value in decl.methods:
            self.error(
                "CS0102",
                f"The type '{decl.name}' already contains a definition for '{name_tok.value}'",
                name_tok.line,
            )
            return
        if isinstance(member, FieldDecl):
            decl.fields[name_tok.value] = member
        else:
            decl.methods[name_tok.value] = member

    def parse_params(self) -> tuple[tuple[str, str], ...]:
        self.advance()  # "("
        params: list[tuple[str, str]] = []
        if self.at("OP", ")"):
            self.advance()
            return tuple(params)
        while True:
            if not self.at("IDENT"):
                self.error("CS1001", "Identifier expected")
                break
            ptype = self.advance().value
            if not self.at("IDENT") or self.peek().value in KEYWORDS:
                self.error("CS1001", "Identifier expected", self.last_line())
                break
            pname = self.advance().value
            params.append((ptype, pname))
            if self.at("OP", ","):
                self.advance()
                continue
            break
        if self.at("OP", ")"):
            self.advance()
        else:
            self.error("CS1026", ") expected", self.last_line())
            self.skip_to("{", ";", "}")
        return tuple(params)

    def parse_block(self, expect_return: bool) -> tuple | None:
        if self.at("OP", "{"):
            self.advance()
        else:
            self.error("CS1514", "{ expected", self.last_line())
            self.skip_to(";", "}")
            if self.at("OP", ";"):
                self.advance()
            return None
        body = None
        while not self.at("OP", "}"):
            if self.at("EOF"):
                self.error("CS1513", "} expected", self.last_line())
                return body
            if self.at("OP", ";"):
                self.advance()
                continue
            if self.at("IDENT", "return"):
                self.advance()
                expr = self.parse_expression()
                if body is None:
                    body = expr
                if self.at("OP", ";"):
                    self.advance()
                else:
                    self.error("CS1002", "; expected", self.last_line())
                continue
            tok = self.peek()
            self.error("CS1519", f"Invalid token '{tok.value}' in a member body", tok.line)
            self.advance()
            self.skip_to(";", "}")
            if self.at("OP", ";"):
                self.advance()
        self.advance()  # "}"
        return body

    # expressions (precedence climbing); AST nodes are small tuples:
    # ("lit", value) ("var", name) ("un", op, e) ("bin", op, l, r)
    # ("call", class, method, [args])

    def parse_expression(self) -> tuple | None:
        return self.parse_binary(0)

    _LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%"))

    def parse_binary(self, level: int) -> tuple | None:
        if level == len(self._LEVELS):
            return self.parse_unary()
        node = self.parse_binary(level + 1)
        while node is not None and self.at("OP") and self.peek().value in self._LEVELS[level]:
            op = self.advance().value
            right = self.parse_binary(level + 1)
            if right is None:
                return None
            node = ("bin", op, node, right)
        return node

    def parse_unary(self) -> tuple | None:
        if self.at("OP") and self.peek().value in ("-", "!"):
            op = self.advance().value
            operand = self.parse_unary()
            if operand is None:
                return None
            return ("un", op, operand)
        return self.parse_primary()

    def parse_primary(self) -> tuple | None:
        tok = self.peek()
        if tok.kind == "INT":
            self.advance()
            return ("lit", int(tok.value))
        if tok.kind == "DOUBLE":
            self.advance()
            return ("lit", float(tok.value))
        if tok.kind == "STRING":
            self.advance()
            return ("lit", tok.value)
        if tok.kind == "IDENT" and tok.value in ("true", "false"):
            self.advance()
            return ("lit", tok.value == "true")
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            inner = self.parse_expression()
            if self.at("OP", ")"):
                self.advance()
            else:
                self.error("CS1026", ") expected", self.last_line())
                return None
            return inner
        if tok.kind == "IDENT" and tok.value not in KEYWORDS:
            self.advance()
            if self.at("OP", ".") and self.peek(1).kind == "IDENT":
                self.advance()
                method = self.advance().value
                if not self.at("OP", "("):
                    self.error("CS1003", "Syntax error, '(' expected", self.last_line())
                    return None
                self.advance()
                args: list[tuple] = []
                if not self.at("OP", ")"):
                    while True:
                        arg = self.parse_expression()
                        if arg is None:
                            return None
                        args.append(arg)
                        if self.at("OP", ","):
                            self.advance()
                            continue
                        break
                if self.at("OP", ")"):
                    self.advance()
                else:
                    self.error("CS1026", ") expected", self.last_line())
                    return None
                return ("call", tok.value, method, args)
            return ("var", tok.value)
        self.error("CS1525", f"Invalid expression term '{tok.value or 'end-of-file'}'", tok.line)
        return None


def _check_types(classes: dict[str, ClassDecl]) -> list[Diagnostic]:
    diagnostics = []
    known = BUILTIN_TYPES | set(classes)

    def check(type_name: str, line: int, allow_void: bool) -> None:
        if type_name == "void":
            if not allow_void:
                diagnostics.append(
                    Diagnostic(line, "CS1547", "Keyword 'void' cannot be used in this context")
                )
            return
        if type_name not in known:
            diagnostics.append(
                Diagnostic(
                    line,
                    "CS0246",
                    f"The type or namespace name '{type_name}' could not be found",
                )
            )

    for decl in classes.values():
        for fld in decl.fields.values():
            check(fld.type, fld.line, allow_void=False)
        for method in decl.methods.values():
            check(method.return_type, method.line, allow_void=True)
            for ptype, _ in method.params:
                check(ptype, method.line, allow_void=False)
        for ctor in decl.ctors:
            for ptype, _ in ctor.params:
                check(ptype, ctor.line, allow_void=False)
    return diagnostics


# -- evaluation --------------------------------------------------------------


def _csharp_str(value) -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if value is None:
        return ""
    return str(value)


_DEFAULTS = {"int": 0, "double": 0.0, "string": "", "bool": False}


class _Evaluator:
    def __init__(self, classes: dict[str, ClassDecl]):
        self.classes = classes

    def fault(self, exception_type: str, message: str) -> InvocationFault:
        return InvocationFault(exception_type, message)

    def field_env(self, decl: ClassDecl, depth: int) -> dict[str, object]:
        env: dict[str, object] = {}
        for fld in decl.fields.values():
            if fld.initializer is not None:
                env[fld.name] = self.eval(fld.initializer, {}, depth)
            else:
                env[fld.name] = _DEFAULTS.get(fld.type)
        return env

    def invoke(self, class_name: str, method_name: str, args: list, depth: int = 0):
        decl = self.classes.get(class_name)
        if decl is None:
            raise MemberLookup(f"class {class_name!r} is not defined")
        method = decl.methods.get(method_name)
        if method is None:
            raise MemberLookup(f"{class_name}.{method_name} is not defined")
        if len(args) != len(method.params):
            raise self.fault(
                "TargetParameterCountException",
                f"{class_name}.{method_name} expects {len(method.params)} argument(s)",
            )
        if depth >= MAX_CALL_DEPTH:
            raise self.fault("StackOverflowException", "call depth limit exceeded")
        env = self.field_env(decl, depth + 1)
        for (ptype, pname), value in zip(method.params, args):
            env[pname] = self._coerce(ptype, value, f"{class_name}.{method_name}({pname})")
        if method.body is None:
            return None
        return self.eval(method.body, env, depth + 1)

    def _coerce(self, ptype: str, value, where: str):
        if ptype == "double" and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        expected = {"int": int, "double": float, "string": str, "bool": bool}.get(ptype)
        if expected is None:
            return value  # class-typed parameter; carried opaquely
        if isinstance(value, bool) != (expected is bool) or not isinstance(value, expected):
            raise self.fault(
                "ArgumentException", f"{where}: cannot convert {type(value).__name__} to {ptype}"
            )
        return value

    def eval(self, node: tuple, env: dict[str, object], depth: int = 0):
        op = node[0]
        if op == "lit":
            return node[1]
        if op == "var":
            if node[1] not in env:
                raise self.fault("UnknownIdentifierException", f"'{node[1]}' is not in scope")
            return env[node[1]]
        if op == "un":
            value = self.eval(node[2], env, depth)
            if node[1] == "-":
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise self.fault("InvalidCastException", "operator '-' needs a number")
                return -value
            if not isinstance(value, bool):
                raise self.fault("InvalidCastException", "operator '!' needs a bool")
            return not value
        if op == "call":
            return self.invoke(node[1], node[2], [self.eval(a, env, depth) for a in node[3]], depth)
        return self._binary(node[1], self.eval(node[2], env, depth), self.eval(node[3], env, depth))

    def _binary(self, op: str, left, right):
        def is_num(v) -> bool:
            return isinstance(v, (int, float)) and not isinstance(v, bool)

        if op in ("&&", "||"):
            if not (isinstance(left, bool) and isinstance(right, bool)):
                raise self.fault("InvalidCastException", f"operator '{op}' needs bools")
            return (left and right) if op == "&&" else (left or right)

        if op == "+" and (isinstance(left, str) or isinstance(right, str)):
            return _csharp_str(left) + _csharp_str(right)

        if op in ("==", "!="):
            if isinstance(left, bool) != isinstance(right, bool):
                raise self.fault("InvalidCastException", "cannot compare bool with non-bool")
            if isinstance(left, str) != isinstance(right, str):
                raise self.fault("InvalidCastException", "cannot compare string with non-string")
            result = left == right
            return result if op == "==" else not result

        if not (is_num(left) and is_num(right)):
            raise self.fault("InvalidCastException", f"operator '{op}' needs numbers")

        if op in ("<", ">", "<=", ">="):
            return {"<": left < right, ">": left > right, "<=": left <= right, ">=": left >= right}[op]

        int_op = isinstance(left, int) and isinstance(right, int)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if int_op:
                if right == 0:
                    raise self.fault("DivideByZeroException", "Attempted to divide by zero.")
                quotient = abs(left) // abs(right)  # C# int division truncates toward zero
                return quotient if (left < 0) == (right < 0) else -quotient
            if right == 0:
                return float("inf") if left > 0 else float("-inf") if left < 0 else float("nan")
            return left / right
        if op == "%":
            if int_op and right == 0:
                raise self.fault("DivideByZeroException", "Attempted to divide by zero.")
            # C# remainder keeps the dividend's sign.
            import math

            return (
                left - right * math.trunc(left / right)
                if not int_op
                else left - right * int(abs(left) // abs(right)) * (1 if (left < 0) == (right < 0) else -1)
            )
        raise self.fault("InvalidOperationException", f"unsupported operator '{op}'")


class MockReflectionTarget:
    """Reflection queries over a parsed mock-language program."""

    def __init__(self, classes: dict[str, ClassDecl]):
        self._classes = classes
        self._evaluator = _Evaluator(classes)

    def is_class_defined(self, name: str) -> bool:
        return name in self._classes

    def has_member(self, class_name: str, member_name: str, access: str | None = None) -> bool:
        decl = self._classes.get(class_name)
        if decl is None:
            return False
        member = decl.fields.get(member_name) or decl.methods.get(member_name)
        if member is None:
            return False
        return access is None or member.access == access

    def has_constructor(self, class_name: str, param_types: list[str]) -> bool:
        decl = self._classes.get(class_name)
        if decl is None:
            return False
        if not decl.ctors:
            # C# supplies an implicit parameterless constructor.
            return param_types == []
        return any(list(t for t, _ in ctor.params) == list(param_types) for ctor in decl.ctors)

    def invoke(self, class_name: str, method_name: str, args: list) -> Literal | None:
        return self._evaluator.invoke(class_name, method_name, args)

    def eval_expression(self, expression: str) -> Literal | None:
        tokens, tok_diags = tokenize(expression)
        parser = _Parser(tokens)
        node = parser.parse_expression()
        if tok_diags or parser.diagnostics or node is None or not parser.at("EOF"):
            raise InvocationFault("ExpressionSyntaxException", f"cannot parse {expression!r}")
        return self._evaluator.eval(node, {})


class MockBackend:
    """Hermetic LanguageBackend: parses the mock language, no subprocesses."""

    def compile(self, code: str, timeout: float = 30.0) -> CompileOutcome:
        tokens, diagnostics = tokenize(code)
        parser = _Parser(tokens)
        parser.parse_program()
        diagnostics = diagnostics + parser.diagnostics + _check_types(parser.classes)
        if diagnostics:
            ordered = tuple(sorted(diagnostics, key=lambda d: d.line))
            return CompileOutcome(status="failed", diagnostics=ordered)
        return CompileOutcome(
            status="ok", diagnostics=(), target=MockReflectionTarget(parser.classes)
        )
