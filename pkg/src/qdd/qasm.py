"""Reader and writer for a subset of OpenQASM 2.0.

Supported: the ``OPENQASM 2.0;`` header, ``include "qelib1.inc";`` (ignored),
``qreg``/``creg`` declarations, the gates h x y z s sdg t tdg rx ry rz p cx cz
swap, ``barrier`` and trailing ``measure``. Registers are flattened in
declaration order. Angle arguments accept decimal literals, ``pi`` and the
operators ``+ - * /`` with parentheses.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import CircuitError, Gate, QuantumCircuit

GATE_NAMES = {
    "h": "H", "x": "X", "y": "Y", "z": "Z", "s": "S", "sdg": "SDG", "t": "T", "tdg": "TDG",
    "rx": "RX", "ry": "RY", "rz": "RZ", "p": "P", "cx": "CX", "CX": "CX", "cz": "CZ", "swap": "SWAP",
}
UNSUPPORTED = {"gate", "opaque", "if", "reset", "OPENQASM3"}


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


class QasmSyntaxError(QasmError):
    pass


class QasmUnsupportedError(QasmError):
    """The input uses a construct outside the supported subset."""

    def __init__(self, construct: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"unsupported construct '{construct}'", line, col)
        self.construct = construct


class QasmSemanticError(QasmError):
    pass


@dataclass
class Token:
    kind: str  # id, int, real, str, sym, arrow, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,\[\]\(\)\{\}+\-*/^=<>])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise QasmSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.ops: list[tuple[Gate, Token]] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            found = t.text or "end of input"
            line, col = t.line, t.col
            if text == ";" and self.i >= 2:
                prev = self.toks[self.i - 2]
                line, col = prev.line, prev.col + len(prev.text)
            raise QasmSyntaxError(f"expected '{text}', found '{found}'", line, col)
        return t

    def expect_kind(self, kind: str, what: str) -> Token:
        t = self.next()
        if t.kind != kind:
            found = t.text or "end of input"
            raise QasmSyntaxError(f"expected {what}, found '{found}'", t.line, t.col)
        return t

    # -- program ---------------------------------------------------------------

    def parse(self) -> QuantumCircuit:
        if self.tok.text == "OPENQASM":
            t = self.next()
            ver = self.next()
            if ver.text not in ("2.0", "2"):
                raise QasmUnsupportedError(f"OPENQASM {ver.text}", t.line, t.col)
            self.expect(";")
        while self.tok.kind != "eof":
            self.statement()
        circuit = QuantumCircuit(self.nq, self.nc)
        for gate, t in self.ops:
            try:
                circuit.append(gate)
            except CircuitError as exc:
                raise QasmSemanticError(str(exc), t.line, t.col) from None
        return circuit

    def statement(self) -> None:
        t = self.tok
        if t.kind != "id":
            raise QasmSyntaxError(f"unexpected '{t.text}'", t.line, t.col)
        word = t.text
        if word == "OPENQASM":
            raise QasmSyntaxError("header must be the first statement", t.line, t.col)
        if word == "include":
            self.next()
            path = self.expect_kind("str", "a file name")
            if path.text.strip('"') != "qelib1.inc":
                raise QasmUnsupportedError(f"include {path.text}", t.line, t.col)
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.declaration()
        elif word == "measure":
            self.measure()
        elif word == "barrier":
            self.next()
            qubits = [q for arg in self.arglist() for q in arg[0]]
            self.expect(";")
            self.emit(Gate("BARRIER", tuple(dict.fromkeys(qubits))) if qubits else None, t)
        elif word in GATE_NAMES:
            self.gate()
        elif word in UNSUPPORTED:
            raise QasmUnsupportedError(word, t.line, t.col)
        else:
            raise QasmUnsupportedError(f"gate {word}", t.line, t.col)

    def emit(self, gate: Gate | None, t: Token) -> None:
        if gate is not None:
            self.ops.append((gate, t))

    def make_gate(self, t: Token, *args, **kwargs) -> Gate:
        try:
            return Gate(*args, **kwargs)
        except CircuitError as exc:
            raise QasmSemanticError(str(exc), t.line, t.col) from None

    def declaration(self) -> None:
        kw = self.next()
        name = self.expect_kind("id", "a register name")
        self.expect("[")
        size = int(self.expect_kind("int", "a register size").text)
        self.expect("]")
        self.expect(";")
        if name.text in self.qregs or name.text in self.cregs:
            raise QasmSemanticError(f"register '{name.text}' redeclared", name.line, name.col)
        if kw.text == "qreg":
            self.qregs[name.text] = (self.nq, size)
            self.nq += size
        else:
            self.cregs[name.text] = (self.nc, size)
            self.nc += size

    def operand(self, regs: dict[str, tuple[int, int]], what: str) -> tuple[list[int], bool]:
        """Return the flattened indices of one argument and whether it was a whole register."""
        name = self.expect_kind("id", f"a {what} register")
        if name.text not in regs:
            raise QasmSemanticError(f"unknown {what} register '{name.text}'", name.line, name.col)
        offset, size = regs[name.text]
        if self.tok.text != "[":
            return list(range(offset, offset + size)), True
        self.next()
        idx_tok = self.expect_kind("int", "an index")
        self.expect("]")
        idx = int(idx_tok.text)
        if idx >= size:
            raise QasmSemanticError(
                f"index {idx} out of range for register '{name.text}' of size {size}",
                idx_tok.line, idx_tok.col,
            )
        return [offset + idx], False

    def arglist(self, regs=None, what: str = "quantum") -> list[tuple[list[int], bool]]:
        regs = self.qregs if regs is None else regs
        args = [self.operand(regs, what)]
        while self.tok.text == ",":
            self.next()
            args.append(self.operand(regs, what))
        return args

    @staticmethod
    def broadcast(args: list[tuple[list[int], bool]], t: Token) -> list[tuple[int, ...]]:
        widths = {len(a) for a, whole in args if whole}
        if len(widths) > 1:
            raise QasmSemanticError("register width mismatch in broadcast operation", t.line, t.col)
        if not widths:
            return [tuple(a[0] for a, _ in args)]
        width = widths.pop()
        return [tuple(a[i] if whole else a[0] for a, whole in args) for i in range(width)]

    def gate(self) -> None:
        t = self.next()
        kind = GATE_NAMES[t.text]
        angle = None
        if self.tok.text == "(":
            self.next()
            angle = self.expr()
            self.expect(")")
        args = self.arglist()
        self.expect(";")
        for qubits in self.broadcast(args, t):
            self.emit(self.make_gate(t, kind, qubits, angle), t)

    def measure(self) -> None:
        t = self.next()
        q_idx, q_whole = self.operand(self.qregs, "quantum")
        self.expect_kind("arrow", "'->'")
        c_idx, c_whole = self.operand(self.cregs, "classical")
        self.expect(";")
        if len(q_idx) != len(c_idx):
            raise QasmSemanticError("register width mismatch in measure", t.line, t.col)
        for q, c in zip(q_idx, c_idx):
            self.emit(self.make_gate(t, "MEASURE", (q,), clbit=c), t)

    # -- angle expressions -------------------------------------------------------

    def expr(self) -> float:
        value = self.term()
        while self.tok.text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            if op.text == "/":
                if rhs == 0:
                    raise QasmSemanticError("division by zero", op.line, op.col)
                value /= rhs
            else:
                value *= rhs
        return value

    def unary(self) -> float:
        if self.tok.text == "-":
            self.next()
            return -self.unary()
        if self.tok.text == "+":
            self.next()
            return self.unary()
        return self.atom()

    def atom(self) -> float:
        t = self.next()
        if t.kind in ("int", "real"):
            return float(t.text)
        if t.kind == "id" and t.text == "pi":
            return math.pi
        if t.text == "(":
            value = self.expr()
            self.expect(")")
            return value
        found = t.text or "end of input"
        raise QasmSyntaxError(f"expected an angle expression, found '{found}'", t.line, t.col)


def parse_qasm(text: str) -> QuantumCircuit:
    """Parse OpenQASM 2.0 source into a :class:`QuantumCircuit`.

    Raises:
        QasmSyntaxError: malformed input, with line and column.
        QasmUnsupportedError: a construct outside the supported subset.
        QasmSemanticError: bad operands, width mismatches, mid-circuit measurement.
    """
    return _Parser(text).parse()


def load_qasm(path) -> QuantumCircuit:
    with open(path, encoding="utf-8") as fh:
        circuit = parse_qasm(fh.read())
    circuit.name = str(path).rsplit("/", 1)[-1].removesuffix(".qasm")
    return circuit


def _fmt_angle(angle: float) -> str:
    return format(angle, ".17g")


def write_qasm(circuit: QuantumCircuit) -> str:
    """Serialize with one statement per line and 17 significant digits for angles."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for op in circuit.ops:
        args = ",".join(f"q[{q}]" for q in op.qubits)
        if op.kind == "MEASURE":
            lines.append(f"measure {args} -> c[{op.clbit}];")
        elif op.kind == "BARRIER":
            lines.append(f"barrier {args};")
        elif op.angle is not None:
            lines.append(f"{op.kind.lower()}({_fmt_angle(op.angle)}) {args};")
        else:
            lines.append(f"{op.kind.lower()} {args};")
    return "\n".join(lines) + "\n"
