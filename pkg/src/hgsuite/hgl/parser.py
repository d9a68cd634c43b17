"""Recursive-descent parser for HGL.

Grammar::

    app       = "app" STRING decl* func* ;
    decl      = "input" IDENT ":" kind ( "title" STRING )? ;
    kind      = "device" "." IDENT | "number" | "string" | "bool"
              | "enum" "(" STRING ("," STRING)* ")" ;
    func      = "def" IDENT "(" IDENT? ")" block ;
    block     = "{" stmt* "}" ;
    stmt      = "subscribe" "(" IDENT "," STRING "," IDENT ")"
              | "runIn" "(" expr "," IDENT ")"
              | "runEvery" "(" expr "," IDENT ")"
              | IDENT "." IDENT "(" arglist? ")"
              | IDENT "=" expr ( "?" expr ":" expr )?
              | "if" "(" expr ")" block ( "else" block )?
              | "switch" "(" expr ")" "{" ("case" literal ":" block)+
                                          ("default" ":" block)? "}"
              | IDENT "(" ")" ;
    expr      = literal | IDENT | "evt" "." "value" | "state" "." IDENT
              | IDENT "." "current" "(" STRING ")"
              | expr binop expr | unop expr | "(" expr ")" ;

A ternary on an assignment's right-hand side is desugared into an
``if``/``else`` pair at parse time, so downstream passes only ever see
plain conditionals.
"""

from __future__ import annotations

from ..errors import HglSyntaxError
from . import ast
from .lexer import Token, tokenize

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # ------------------------------------------------------- plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None, code: str = "SyntaxError") -> HglSyntaxError:
        tok = tok or self.peek()
        return HglSyntaxError(code, message, line=tok.line, col=tok.col)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {what or kind}, got {tok.text or 'end of input'!r}")
        return self.next()

    def expect_name(self, what: str) -> Token:
        # Keywords double as plain names where only a name can appear
        # (capability position: device.switch, device.lock, ...).
        tok = self.peek()
        if tok.kind != "IDENT" and not tok.text.isidentifier():
            raise self.error(f"expected {what}, got {tok.text or 'end of input'!r}")
        return self.next()

    # ----------------------------------------------------------- unit

    def parse_unit(self) -> ast.SourceUnit:
        if self.peek().kind != "app":
            raise self.error("source must start with an app header", code="MissingAppHeader")
        self.next()
        name = self.expect("STRING", "app name string")
        inputs: list[ast.InputDecl] = []
        seen: set[str] = set()
        while self.peek().kind == "input":
            decl = self.parse_input()
            if decl.name in seen:
                raise self.error(
                    f"duplicate input {decl.name!r}",
                    tok=Token("IDENT", decl.name, decl.name, decl.line, decl.col),
                    code="DuplicateName",
                )
            seen.add(decl.name)
            inputs.append(decl)
        funcs: list[ast.FuncDef] = []
        fseen: set[str] = set()
        while self.peek().kind == "def":
            fn = self.parse_func()
            if fn.name in fseen or fn.name in seen:
                raise self.error(
                    f"duplicate name {fn.name!r}",
                    tok=Token("IDENT", fn.name, fn.name, fn.line, fn.col),
                    code="DuplicateName",
                )
            fseen.add(fn.name)
            funcs.append(fn)
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected {tok.text!r} at top level")
        return ast.SourceUnit(str(name.value), tuple(inputs), tuple(funcs))

    def parse_input(self) -> ast.InputDecl:
        kw = self.expect("input")
        name = self.expect("IDENT", "input name")
        self.expect(":")
        kind = self.parse_kind()
        title = None
        if self.peek().kind == "title":
            self.next()
            title = str(self.expect("STRING", "title string").value)
        return ast.InputDecl(str(name.value), kind, title, line=kw.line, col=kw.col)

    def parse_kind(self) -> ast.InputKind:
        tok = self.next()
        if tok.kind == "device":
            self.expect(".")
            cap = self.expect_name("capability name")
            return ast.DeviceKind(cap.text)
        if tok.kind == "number":
            return ast.NumberKind()
        if tok.kind == "string":
            return ast.StringKind()
        if tok.kind == "bool":
            return ast.BoolKind()
        if tok.kind == "enum":
            self.expect("(")
            values = [str(self.expect("STRING", "enum value").value)]
            while self.peek().kind == ",":
                self.next()
                values.append(str(self.expect("STRING", "enum value").value))
            self.expect(")")
            return ast.EnumKind(tuple(values))
        raise self.error(f"expected an input kind, got {tok.text!r}", tok=tok)

    def parse_func(self) -> ast.FuncDef:
        kw = self.expect("def")
        name = self.expect("IDENT", "function name")
        self.expect("(")
        param = None
        if self.peek().kind == "IDENT":
            param = str(self.next().value)
        self.expect(")")
        body = self.parse_block()
        return ast.FuncDef(str(name.value), param, body, line=kw.line, col=kw.col)

    # ----------------------------------------------------- statements

    def parse_block(self) -> tuple[ast.Stmt, ...]:
        self.expect("{")
        stmts: list[ast.Stmt] = []
        while self.peek().kind != "}":
            if self.peek().kind == "EOF":
                raise self.error("unterminated block")
            stmts.append(self.parse_stmt())
        self.next()
        return tuple(stmts)

    def parse_stmt(self) -> ast.Stmt:
        tok = self.peek()
        if tok.kind == "subscribe":
            self.next()
            self.expect("(")
            dev = self.expect("IDENT", "device variable")
            self.expect(",")
            spec = self.expect("STRING", "attribute spec")
            self.expect(",")
            handler = self.expect("IDENT", "handler name")
            self.expect(")")
            return ast.Subscribe(str(dev.value), str(spec.value), str(handler.value), line=tok.line, col=tok.col)
        if tok.kind in ("runIn", "runEvery"):
            self.next()
            self.expect("(")
            delay = self.parse_expr()
            self.expect(",")
            handler = self.expect("IDENT", "handler name")
            self.expect(")")
            node = ast.RunIn if tok.kind == "runIn" else ast.RunEvery
            return node(delay, str(handler.value), line=tok.line, col=tok.col)
        if tok.kind == "if":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse: tuple[ast.Stmt, ...] = ()
            if self.peek().kind == "else":
                self.next()
                orelse = self.parse_block()
            return ast.If(cond, then, orelse, line=tok.line, col=tok.col)
        if tok.kind == "switch":
            return self.parse_switch()
        if tok.kind == "IDENT":
            return self.parse_ident_stmt()
        raise self.error(f"expected a statement, got {tok.text or 'end of input'!r}", tok=tok)

    def parse_switch(self) -> ast.Switch:
        kw = self.expect("switch")
        self.expect("(")
        scrutinee = self.parse_expr()
        self.expect(")")
        self.expect("{")
        cases: list[tuple[ast.Lit, tuple[ast.Stmt, ...]]] = []
        default: tuple[ast.Stmt, ...] | None = None
        while self.peek().kind == "case":
            self.next()
            lit = self.parse_literal()
            self.expect(":")
            cases.append((lit, self.parse_block()))
        if not cases:
            raise self.error("switch needs at least one case")
        if self.peek().kind == "default":
            self.next()
            self.expect(":")
            default = self.parse_block()
        self.expect("}")
        return ast.Switch(scrutinee, tuple(cases), default, line=kw.line, col=kw.col)

    def parse_ident_stmt(self) -> ast.Stmt:
        name = self.next()
        tok = self.peek()
        if tok.kind == ".":
            self.next()
            member = self.expect("IDENT", "command name")
            self.expect("(")
            args: list[ast.Expr] = []
            if self.peek().kind != ")":
                args.append(self.parse_expr())
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.parse_expr())
            self.expect(")")
            return ast.CommandCall(
                str(name.value), str(member.value), tuple(args), line=name.line, col=name.col
            )
        if tok.kind == "=":
            self.next()
            expr = self.parse_expr()
            if self.peek().kind == "?":
                self.next()
                then_expr = self.parse_expr()
                self.expect(":")
                else_expr = self.parse_expr()
                target = str(name.value)
                return ast.If(
                    expr,
                    (ast.Assign(target, then_expr, line=name.line, col=name.col),),
                    (ast.Assign(target, else_expr, line=name.line, col=name.col),),
                    line=name.line,
                    col=name.col,
                )
            return ast.Assign(str(name.value), expr, line=name.line, col=name.col)
        if tok.kind == "(":
            self.next()
            self.expect(")")
            return ast.LocalCall(str(name.value), line=name.line, col=name.col)
        raise self.error(f"expected '.', '=' or '(' after {name.text!r}", tok=tok)

    # ---------------------------------------------------- expressions

    def parse_literal(self) -> ast.Lit:
        tok = self.next()
        if tok.kind == "INT":
            return ast.Lit(int(tok.value), line=tok.line, col=tok.col)
        if tok.kind == "STRING":
            return ast.Lit(str(tok.value), line=tok.line, col=tok.col)
        if tok.kind in ("true", "false"):
            return ast.Lit(tok.kind == "true", line=tok.line, col=tok.col)
        raise self.error(f"expected a literal, got {tok.text!r}", tok=tok)

    def parse_expr(self, min_prec: int = 1) -> ast.Expr:
        lhs = self.parse_unary()
        while True:
            op = self.peek().kind
            prec = _PRECEDENCE.get(op)
            if prec is None or prec < min_prec:
                return lhs
            tok = self.next()
            rhs = self.parse_expr(prec + 1)
            lhs = ast.Binary(op, lhs, rhs, line=tok.line, col=tok.col)

    def parse_unary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind in ("!", "-"):
            self.next()
            operand = self.parse_unary()
            return ast.Unary(tok.kind, operand, line=tok.line, col=tok.col)
        return self.parse_atom()

    def parse_atom(self) -> ast.Expr:
        tok = self.next()
        if tok.kind == "INT":
            return ast.Lit(int(tok.value), line=tok.line, col=tok.col)
        if tok.kind == "STRING":
            return ast.Lit(str(tok.value), line=tok.line, col=tok.col)
        if tok.kind in ("true", "false"):
            return ast.Lit(tok.kind == "true", line=tok.line, col=tok.col)
        if tok.kind == "(":
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "IDENT":
            name = str(tok.value)
            if self.peek().kind != ".":
                return ast.VarRef(name, line=tok.line, col=tok.col)
            self.next()
            member = self.expect("IDENT", "member name")
            field = str(member.value)
            if name == "evt":
                if field != "value":
                    raise self.error("the event object only exposes evt.value", tok=member)
                return ast.EventValue(line=tok.line, col=tok.col)
            if name == "state":
                return ast.StateRead(field, line=tok.line, col=tok.col)
            if field != "current":
                raise self.error(
                    f"expected current(...) after {name!r} in an expression", tok=member
                )
            self.expect("(")
            attr = self.expect("STRING", "attribute name string")
            self.expect(")")
            return ast.AttrRead(name, str(attr.value), line=tok.line, col=tok.col)
        raise self.error(f"expected an expression, got {tok.text or 'end of input'!r}", tok=tok)


def parse(source: str) -> ast.SourceUnit:
    """Parse HGL source text into a SourceUnit.

    Raises HglSyntaxError (codes SyntaxError, MissingAppHeader,
    DuplicateName) with line/col on bad input.
    """
    return _Parser(tokenize(source)).parse_unit()
