"""Generate small Solidity contracts together with their compact ASTs.

No compiler runs here: the emitter writes source text and builds the AST
JSON side by side, so every node carries an exact ``start:length:0`` span
into the emitted bytes.  The produced documents use the same node kinds,
child attribute names and scalar attributes the compiler emits for this
fragment of the language, which is all the rest of the pipeline consumes.

Contracts follow a withdraw/deposit pattern around one fund-transfer
statement (``call`` / ``send`` / ``transfer``).  Vulnerable variants update
balances after the transfer with no lock; clean variants either update
state first or hold a lock across the transfer.  The vulnerable statements
are reported as byte spans so callers can derive line annotations.

Structure is controlled by :class:`TemplateSpec`; identifier names,
whitespace and comments are controlled by a separate naming seed and never
change the graph topology, which is what makes duplicate-detection
exercises possible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace

# Built-in declaration ids (compiler convention: negatives).
_REQUIRE_ID = -18
_REVERT_ID = -19
_MSG_ID = -15

_CONTRACT_NAMES = (
    "Vault", "Bank", "Wallet", "Treasury", "Pool", "Escrow", "Fund", "Ledger",
    "SafeBox", "Reserve", "Custody", "Depot",
)
_BALANCE_NAMES = ("balances", "credits", "deposits", "funds", "holdings", "accounts")
_AMOUNT_NAMES = ("amount", "value", "sum", "quantity", "wad")
_WITHDRAW_NAMES = ("withdraw", "redeem", "claim", "takeOut", "cashOut", "pull")
_DEPOSIT_NAMES = ("deposit", "fund", "payIn", "topUp", "add")
_GETTER_NAMES = ("balanceOf", "getBalance", "availableOf", "heldBy")
_RECEIVER_NAMES = ("to", "recipient", "target", "dest", "beneficiary")
_OK_NAMES = ("ok", "success", "sent", "done")
_LOCK_NAMES = ("locked", "busy", "inCall", "guard")
_TOTAL_NAMES = ("totalHeld", "totalDeposits", "poolSize", "supply")
_COMMENTS = (
    "// bookkeeping",
    "// see audit notes",
    "// TODO tighten checks",
    "// external interaction below",
    "// state handling",
    "/* invariants hold here */",
)


@dataclass(frozen=True)
class TemplateSpec:
    """Structural choices for one contract (the graph-shape signature)."""

    subtype: str                 # "call" | "send" | "transfer"
    vulnerable: bool
    guard: str = "require"       # "require" | "ifrevert"
    clean_style: str = "cei"     # "cei" | "lock" (clean contracts only)
    receiver: str = "sender"     # "sender" | "param"
    amount_style: str = "param"  # "param" | "full"
    capture_result: bool = True  # bind the call/send result and require it
    has_deposit: bool = True
    has_getter: bool = False
    has_total: bool = False      # second bookkeeping write after transfer
    visibility: str = "public"   # withdraw visibility (attribute only)

    def key(self) -> str:
        flags = "".join(
            "1" if f else "0"
            for f in (self.vulnerable, self.capture_result, self.has_deposit,
                      self.has_getter, self.has_total)
        )
        return (f"{self.subtype}-{flags}-{self.guard}-{self.clean_style}-"
                f"{self.receiver}-{self.amount_style}")


@dataclass(frozen=True)
class NamingStyle:
    """Cosmetic choices: identifiers, indentation, comment placement."""

    contract: str
    balances: str
    amount: str
    withdraw: str
    deposit: str
    getter: str
    receiver: str
    ok: str
    lock: str
    total: str
    indent: str
    comment_lines: tuple[int, ...]  # statement slots that get a comment above
    comment_pool: tuple[str, ...]
    pragma_patch: int

    @staticmethod
    def from_seed(seed: int) -> "NamingStyle":
        rng = random.Random(seed)
        return NamingStyle(
            contract=rng.choice(_CONTRACT_NAMES) + rng.choice(("", "V2", "X", "Plus")),
            balances=rng.choice(_BALANCE_NAMES),
            amount=rng.choice(_AMOUNT_NAMES),
            withdraw=rng.choice(_WITHDRAW_NAMES),
            deposit=rng.choice(_DEPOSIT_NAMES),
            getter=rng.choice(_GETTER_NAMES),
            receiver=rng.choice(_RECEIVER_NAMES),
            ok=rng.choice(_OK_NAMES),
            lock=rng.choice(_LOCK_NAMES),
            total=rng.choice(_TOTAL_NAMES),
            indent=rng.choice(("    ", "  ", "\t")),
            comment_lines=tuple(sorted(rng.sample(range(8), rng.randint(0, 3)))),
            comment_pool=tuple(rng.sample(_COMMENTS, 3)),
            pragma_patch=rng.choice((0, 4, 10, 17, 19)),
        )


@dataclass
class SynthContract:
    source: bytes
    ast: dict
    vulnerable_spans: list[tuple[int, int]]  # (start, length) of flagged statements
    subtype: str
    spec: TemplateSpec

    @property
    def ast_json(self) -> bytes:
        return json.dumps(self.ast).encode("utf-8")


class _Writer:
    """Accumulates source text and hands out byte offsets."""

    def __init__(self):
        self.chunks: list[str] = []
        self.pos = 0

    def emit(self, text: str) -> int:
        start = self.pos
        self.chunks.append(text)
        self.pos += len(text.encode("utf-8"))
        return start

    def src(self, start: int) -> str:
        return f"{start}:{self.pos - start}:0"

    def src_until(self, start: int, end: int) -> str:
        return f"{start}:{end - start}:0"

    def text(self) -> str:
        return "".join(self.chunks)


class _AstEmitter:
    """Writes source text while assembling the matching compact-AST nodes."""

    def __init__(self, style: NamingStyle):
        self.w = _Writer()
        self.style = style
        self._next_id = 1

    def nid(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    # -- expressions --------------------------------------------------------

    def elementary_type(self, name: str, extra: dict | None = None) -> dict:
        start = self.w.emit(name)
        node = {"id": self.nid(), "nodeType": "ElementaryTypeName",
                "src": self.w.src(start), "name": name}
        if extra:
            node.update(extra)
        return node

    def identifier(self, name: str, decl_id: int) -> dict:
        start = self.w.emit(name)
        return {
            "id": self.nid(), "nodeType": "Identifier", "src": self.w.src(start),
            "name": name, "overloadedDeclarations": [],
            "referencedDeclaration": decl_id,
        }

    def msg_member(self, member: str) -> dict:
        start = self.w.emit("")
        msg = self.identifier("msg", _MSG_ID)
        self.w.emit(".")
        self.w.emit(member)
        return {
            "id": self.nid(), "nodeType": "MemberAccess", "src": self.w.src(start),
            "expression": msg, "memberName": member,
        }

    def number(self, value: str) -> dict:
        start = self.w.emit(value)
        return {
            "id": self.nid(), "nodeType": "Literal", "src": self.w.src(start),
            "kind": "number", "value": value, "hexValue": value.encode().hex(),
        }

    def string_literal(self, value: str) -> dict:
        start = self.w.emit(f'"{value}"')
        return {
            "id": self.nid(), "nodeType": "Literal", "src": self.w.src(start),
            "kind": "string", "value": value, "hexValue": value.encode().hex(),
        }

    def bool_literal(self, value: bool) -> dict:
        start = self.w.emit("true" if value else "false")
        return {
            "id": self.nid(), "nodeType": "Literal", "src": self.w.src(start),
            "kind": "bool", "value": "true" if value else "false",
            "hexValue": "01" if value else "00",
        }

    def index_access(self, base: str, base_id: int, build_index) -> dict:
        start = self.w.emit("")
        base_node = self.identifier(base, base_id)
        self.w.emit("[")
        index_node = build_index()
        self.w.emit("]")
        return {
            "id": self.nid(), "nodeType": "IndexAccess", "src": self.w.src(start),
            "baseExpression": base_node, "indexExpression": index_node,
        }

    def binary(self, build_left, operator: str, build_right) -> dict:
        start = self.w.emit("")
        left = build_left()
        self.w.emit(f" {operator} ")
        right = build_right()
        return {
            "id": self.nid(), "nodeType": "BinaryOperation",
            "src": self.w.src(start), "operator": operator,
            "leftExpression": left, "rightExpression": right,
        }

    def unary_not(self, build_operand) -> dict:
        start = self.w.emit("!")
        operand = build_operand()
        return {
            "id": self.nid(), "nodeType": "UnaryOperation",
            "src": self.w.src(start), "operator": "!", "prefix": True,
            "subExpression": operand,
        }

    def assignment(self, build_lhs, operator: str, build_rhs) -> dict:
        start = self.w.emit("")
        lhs = build_lhs()
        self.w.emit(f" {operator} ")
        rhs = build_rhs()
        return {
            "id": self.nid(), "nodeType": "Assignment", "src": self.w.src(start),
            "operator": operator, "leftHandSide": lhs, "rightHandSide": rhs,
        }

    def call(self, build_callee, build_args, kind: str = "functionCall") -> dict:
        start = self.w.emit("")
        callee = build_callee()
        self.w.emit("(")
        args = []
        for i, build_arg in enumerate(build_args):
            if i:
                self.w.emit(", ")
            args.append(build_arg())
        self.w.emit(")")
        return {
            "id": self.nid(), "nodeType": "FunctionCall", "src": self.w.src(start),
            "expression": callee, "arguments": args, "kind": kind,
            "names": [], "tryCall": False,
        }

    def payable_conversion(self, build_inner) -> dict:
        start = self.w.emit("")
        type_start = self.w.emit("payable")
        type_name = {"id": self.nid(), "nodeType": "ElementaryTypeName",
                     "src": self.w.src_until(type_start, self.w.pos),
                     "name": "address", "stateMutability": "payable"}
        type_expr = {"id": self.nid(), "nodeType": "ElementaryTypeNameExpression",
                     "src": self.w.src_until(type_start, self.w.pos),
                     "typeName": type_name}
        self.w.emit("(")
        inner = build_inner()
        self.w.emit(")")
        return {
            "id": self.nid(), "nodeType": "FunctionCall", "src": self.w.src(start),
            "expression": type_expr, "arguments": [inner],
            "kind": "typeConversion", "names": [], "tryCall": False,
        }

    def member_access(self, build_expr, member: str) -> dict:
        start = self.w.emit("")
        expr = build_expr()
        self.w.emit(".")
        self.w.emit(member)
        return {
            "id": self.nid(), "nodeType": "MemberAccess", "src": self.w.src(start),
            "expression": expr, "memberName": member,
        }

    def call_options(self, build_expr, option_name: str, build_option) -> dict:
        start = self.w.emit("")
        expr = build_expr()
        self.w.emit("{" + option_name + ": ")
        option = build_option()
        self.w.emit("}")
        return {
            "id": self.nid(), "nodeType": "FunctionCallOptions",
            "src": self.w.src(start), "expression": expr,
            "names": [option_name], "options": [option],
        }


class ContractBuilder:
    """Emits one contract from a structural spec and a naming style."""

    def __init__(self, spec: TemplateSpec, style: NamingStyle):
        self.spec = spec
        self.style = style
        self.e = _AstEmitter(style)
        self.vulnerable_spans: list[tuple[int, int]] = []
        # declaration ids filled while emitting
        self.balances_id = 0
        self.total_id = 0
        self.lock_id = 0
        self.amount_id = 0
        self.receiver_id = 0
        self.ok_id = 0
        self._comment_slot = 0

    # -- small helpers -------------------------------------------------------

    def _line(self, depth: int) -> None:
        self.e.w.emit("\n" + self.style.indent * depth)

    def _maybe_comment(self, depth: int) -> None:
        if self._comment_slot in self.style.comment_lines:
            pool = self.style.comment_pool
            self.e.w.emit(
                "\n" + self.style.indent * depth
                + pool[self._comment_slot % len(pool)]
            )
        self._comment_slot += 1

    def _amount_ref(self):
        return lambda: self.e.identifier(self.style.amount, self.amount_id)

    def _balance_entry(self):
        # balances[msg.sender]
        return lambda: self.e.index_access(
            self.style.balances, self.balances_id,
            lambda: self.e.msg_member("sender"),
        )

    def _receiver_expr(self, needs_payable: bool):
        if self.spec.receiver == "param":
            return lambda: self.e.identifier(self.style.receiver, self.receiver_id)
        if needs_payable:
            return lambda: self.e.payable_conversion(
                lambda: self.e.msg_member("sender")
            )
        return lambda: self.e.msg_member("sender")

    # -- statements -----------------------------------------------------------

    def expression_statement(self, depth: int, build_expr) -> dict:
        self._maybe_comment(depth)
        self._line(depth)
        start = self.e.w.pos
        expr = build_expr()
        self.e.w.emit(";")
        return {"id": self.e.nid(), "nodeType": "ExpressionStatement",
                "src": self.e.w.src(start), "expression": expr}

    def guard_statement(self, depth: int) -> dict:
        """require(balances[msg.sender] >= amount)  (or the if/revert form)."""
        check = lambda: self.e.binary(self._balance_entry(), ">=", self._amount_ref())
        if self.spec.guard == "require":
            return self.expression_statement(
                depth,
                lambda: self.e.call(
                    lambda: self.e.identifier("require", _REQUIRE_ID), [check]
                ),
            )
        # if (balances[msg.sender] < amount) { revert(); }
        self._maybe_comment(depth)
        self._line(depth)
        start = self.e.w.pos
        self.e.w.emit("if (")
        condition = self.e.binary(self._balance_entry(), "<", self._amount_ref())
        self.e.w.emit(") {")
        self._line(depth + 1)
        body_start = self.e.w.pos
        revert_call = self.e.call(
            lambda: self.e.identifier("revert", _REVERT_ID), []
        )
        self.e.w.emit(";")
        revert_stmt = {"id": self.e.nid(), "nodeType": "ExpressionStatement",
                       "src": self.e.w.src(body_start), "expression": revert_call}
        self._line(depth)
        self.e.w.emit("}")
        block = {"id": self.e.nid(), "nodeType": "Block",
                 "src": self.e.w.src_until(body_start, self.e.w.pos),
                 "statements": [revert_stmt]}
        return {"id": self.e.nid(), "nodeType": "IfStatement",
                "src": self.e.w.src(start), "condition": condition,
                "trueBody": block}

    def transfer_statement(self, depth: int) -> dict:
        """The fund-transfer statement for the configured subtype."""
        spec, e, style = self.spec, self.e, self.style
        self._maybe_comment(depth)
        self._line(depth)
        start = e.w.pos

        if spec.subtype == "transfer":
            receiver = self._receiver_expr(needs_payable=True)
            expr = e.call(
                lambda: e.member_access(receiver, "transfer"), [self._amount_ref()]
            )
            e.w.emit(";")
            stmt = {"id": e.nid(), "nodeType": "ExpressionStatement",
                    "src": e.w.src(start), "expression": expr}
        elif spec.subtype == "send":
            receiver = self._receiver_expr(needs_payable=True)
            build_call = lambda: e.call(
                lambda: e.member_access(receiver, "send"), [self._amount_ref()]
            )
            if spec.capture_result:
                stmt = self._bool_capture(start, build_call)
            else:
                expr = build_call()
                e.w.emit(";")
                stmt = {"id": e.nid(), "nodeType": "ExpressionStatement",
                        "src": e.w.src(start), "expression": expr}
        else:  # call
            receiver = self._receiver_expr(needs_payable=False)
            build_call = lambda: e.call(
                lambda: e.call_options(
                    lambda: e.member_access(receiver, "call"),
                    "value", self._amount_ref(),
                ),
                [lambda: e.string_literal("")],
            )
            if spec.capture_result:
                stmt = self._tuple_capture(start, build_call)
            else:
                expr = build_call()
                e.w.emit(";")
                stmt = {"id": e.nid(), "nodeType": "ExpressionStatement",
                        "src": e.w.src(start), "expression": expr}
        if spec.vulnerable:
            self.vulnerable_spans.append((start, e.w.pos - start))
        return stmt

    def _bool_capture(self, start: int, build_call) -> dict:
        # bool ok = <call>;
        e, style = self.e, self.style
        type_node = e.elementary_type("bool")
        e.w.emit(" ")
        decl_start = e.w.pos
        e.w.emit(style.ok)
        self.ok_id = e.nid()
        decl = {"id": self.ok_id, "nodeType": "VariableDeclaration",
                "src": e.w.src_until(start, e.w.pos), "name": style.ok,
                "typeName": type_node, "storageLocation": "default",
                "stateVariable": False, "constant": False, "mutability": "mutable",
                "visibility": "internal"}
        e.w.emit(" = ")
        value = build_call()
        e.w.emit(";")
        return {"id": e.nid(), "nodeType": "VariableDeclarationStatement",
                "src": e.w.src(start), "assignments": [self.ok_id],
                "declarations": [decl], "initialValue": value}

    def _tuple_capture(self, start: int, build_call) -> dict:
        # (bool ok, ) = <call>;
        e, style = self.e, self.style
        e.w.emit("(")
        decl_start = e.w.pos
        type_node = e.elementary_type("bool")
        e.w.emit(" ")
        e.w.emit(style.ok)
        self.ok_id = e.nid()
        decl = {"id": self.ok_id, "nodeType": "VariableDeclaration",
                "src": e.w.src_until(decl_start, e.w.pos), "name": style.ok,
                "typeName": type_node, "storageLocation": "default",
                "stateVariable": False, "constant": False, "mutability": "mutable",
                "visibility": "internal"}
        e.w.emit(", ) = ")
        value = build_call()
        e.w.emit(";")
        return {"id": e.nid(), "nodeType": "VariableDeclarationStatement",
                "src": e.w.src(start), "assignments": [self.ok_id, None],
                "declarations": [decl, None], "initialValue": value}

    def result_check_statement(self, depth: int) -> dict:
        return self.expression_statement(
            depth,
            lambda: self.e.call(
                lambda: self.e.identifier("require", _REQUIRE_ID),
                [lambda: self.e.identifier(self.style.ok, self.ok_id)],
            ),
        )

    def balance_write_statement(self, depth: int, vulnerable: bool) -> dict:
        self._maybe_comment(depth)
        self._line(depth)
        start = self.e.w.pos
        expr = self.e.assignment(self._balance_entry(), "-=", self._amount_ref())
        self.e.w.emit(";")
        if vulnerable:
            self.vulnerable_spans.append((start, self.e.w.pos - start))
        return {"id": self.e.nid(), "nodeType": "ExpressionStatement",
                "src": self.e.w.src(start), "expression": expr}

    def total_write_statement(self, depth: int, vulnerable: bool) -> dict:
        self._maybe_comment(depth)
        self._line(depth)
        start = self.e.w.pos
        expr = self.e.assignment(
            lambda: self.e.identifier(self.style.total, self.total_id),
            "-=", self._amount_ref(),
        )
        self.e.w.emit(";")
        if vulnerable:
            self.vulnerable_spans.append((start, self.e.w.pos - start))
        return {"id": self.e.nid(), "nodeType": "ExpressionStatement",
                "src": self.e.w.src(start), "expression": expr}

    def lock_statement(self, depth: int, engaged: bool) -> dict:
        return self.expression_statement(
            depth,
            lambda: self.e.assignment(
                lambda: self.e.identifier(self.style.lock, self.lock_id),
                "=", lambda: self.e.bool_literal(engaged),
            ),
        )

    def lock_guard_statement(self, depth: int) -> dict:
        return self.expression_statement(
            depth,
            lambda: self.e.call(
                lambda: self.e.identifier("require", _REQUIRE_ID),
                [lambda: self.e.unary_not(
                    lambda: self.e.identifier(self.style.lock, self.lock_id)
                )],
            ),
        )

    # -- declarations ---------------------------------------------------------

    def state_mapping(self, depth: int) -> dict:
        e, style = self.e, self.style
        self._line(depth)
        start = e.w.pos
        map_start = e.w.emit("mapping(")
        key_type = e.elementary_type("address")
        e.w.emit(" => ")
        value_type = e.elementary_type("uint256")
        e.w.emit(")")
        mapping = {"id": e.nid(), "nodeType": "Mapping",
                   "src": e.w.src(map_start),
                   "keyType": key_type, "valueType": value_type}
        e.w.emit(f" private {style.balances};")
        self.balances_id = e.nid()
        return {"id": self.balances_id, "nodeType": "VariableDeclaration",
                "src": e.w.src_until(start, e.w.pos - 1), "name": style.balances,
                "typeName": mapping, "stateVariable": True, "constant": False,
                "mutability": "mutable", "storageLocation": "default",
                "visibility": "private"}

    def state_scalar(self, depth: int, type_name: str, name: str,
                     visibility: str) -> dict:
        e = self.e
        self._line(depth)
        start = e.w.pos
        type_node = e.elementary_type(type_name)
        e.w.emit(f" {visibility} {name};")
        decl_id = e.nid()
        return {"id": decl_id, "nodeType": "VariableDeclaration",
                "src": e.w.src_until(start, e.w.pos - 1), "name": name,
                "typeName": type_node, "stateVariable": True, "constant": False,
                "mutability": "mutable", "storageLocation": "default",
                "visibility": visibility}

    def parameter(self, type_name: str, name: str,
                  payable: bool = False) -> tuple[dict, int]:
        e = self.e
        start = e.w.pos
        if payable:
            type_node = e.elementary_type(
                "address payable", {"stateMutability": "payable"}
            )
            type_node["name"] = "address"
        else:
            type_node = e.elementary_type(type_name)
        e.w.emit(" ")
        e.w.emit(name)
        decl_id = e.nid()
        node = {"id": decl_id, "nodeType": "VariableDeclaration",
                "src": e.w.src(start), "name": name, "typeName": type_node,
                "stateVariable": False, "constant": False, "mutability": "mutable",
                "storageLocation": "default", "visibility": "internal"}
        return node, decl_id

    def parameter_list(self, build_params) -> dict:
        e = self.e
        start = e.w.emit("(")
        params = []
        for i, build in enumerate(build_params):
            if i:
                e.w.emit(", ")
            params.append(build())
        e.w.emit(")")
        return {"id": e.nid(), "nodeType": "ParameterList",
                "src": e.w.src(start), "parameters": params}

    def function_definition(self, depth: int, name: str, build_params,
                            mutability: str, visibility: str, build_returns,
                            build_body_statements) -> dict:
        e = self.e
        self._line(depth)
        start = e.w.pos
        e.w.emit(f"function {name}")
        params = self.parameter_list(build_params)
        e.w.emit(f" {visibility}")
        if mutability != "nonpayable":
            e.w.emit(f" {mutability}")
        if build_returns:
            e.w.emit(" returns ")
            returns = self.parameter_list(build_returns)
        else:
            ret_start = e.w.pos
            returns = {"id": e.nid(), "nodeType": "ParameterList",
                       "src": e.w.src(ret_start), "parameters": []}
        e.w.emit(" {")
        body_start = e.w.pos
        statements = build_body_statements(depth + 1)
        self._line(depth)
        e.w.emit("}")
        body = {"id": e.nid(), "nodeType": "Block",
                "src": e.w.src_until(body_start, e.w.pos),
                "statements": statements}
        return {"id": e.nid(), "nodeType": "FunctionDefinition",
                "src": e.w.src(start), "name": name, "kind": "function",
                "parameters": params, "returnParameters": returns, "body": body,
                "stateMutability": mutability, "visibility": visibility,
                "implemented": True, "virtual": False, "modifiers": []}

    # -- functions ------------------------------------------------------------

    def deposit_function(self, depth: int) -> dict:
        def body(d: int) -> list[dict]:
            statements = [self.expression_statement(
                d,
                lambda: self.e.assignment(
                    self._balance_entry(), "+=",
                    lambda: self.e.msg_member("value"),
                ),
            )]
            if self.spec.has_total:
                statements.append(self.expression_statement(
                    d,
                    lambda: self.e.assignment(
                        lambda: self.e.identifier(self.style.total, self.total_id),
                        "+=", lambda: self.e.msg_member("value"),
                    ),
                ))
            return statements

        return self.function_definition(
            depth, self.style.deposit, [], "payable", "public", None, body
        )

    def getter_function(self, depth: int) -> dict:
        who_id_holder = {}

        def param():
            node, decl_id = self.parameter("address", "who")
            who_id_holder["id"] = decl_id
            return node

        def ret():
            node, _ = self.parameter("uint256", "")
            node["name"] = ""
            return node

        def body(d: int) -> list[dict]:
            self._line(d)
            start = self.e.w.pos
            self.e.w.emit("return ")
            expr = self.e.index_access(
                self.style.balances, self.balances_id,
                lambda: self.e.identifier("who", who_id_holder["id"]),
            )
            self.e.w.emit(";")
            return [{"id": self.e.nid(), "nodeType": "Return",
                     "src": self.e.w.src(start), "expression": expr}]

        return self.function_definition(
            depth, self.style.getter, [param], "view", "public", [ret], body
        )

    def withdraw_function(self, depth: int) -> dict:
        spec, style = self.spec, self.style

        def params() -> list:
            builders = []
            if spec.receiver == "param":
                def recv():
                    node, decl_id = self.parameter("", style.receiver, payable=True)
                    self.receiver_id = decl_id
                    return node
                builders.append(recv)
            if spec.amount_style == "param":
                def amt():
                    node, decl_id = self.parameter("uint256", style.amount)
                    self.amount_id = decl_id
                    return node
                builders.append(amt)
            return builders

        def body(d: int) -> list[dict]:
            statements: list[dict] = []
            if spec.amount_style == "full":
                # uint256 amount = balances[msg.sender];
                self._line(d)
                start = self.e.w.pos
                type_node = self.e.elementary_type("uint256")
                self.e.w.emit(" ")
                self.e.w.emit(style.amount)
                self.amount_id = self.e.nid()
                decl = {"id": self.amount_id, "nodeType": "VariableDeclaration",
                        "src": self.e.w.src(start), "name": style.amount,
                        "typeName": type_node, "stateVariable": False,
                        "constant": False, "mutability": "mutable",
                        "storageLocation": "default", "visibility": "internal"}
                self.e.w.emit(" = ")
                value = self._balance_entry()()
                self.e.w.emit(";")
                statements.append({
                    "id": self.e.nid(), "nodeType": "VariableDeclarationStatement",
                    "src": self.e.w.src(start), "assignments": [self.amount_id],
                    "declarations": [decl], "initialValue": value,
                })

            if spec.vulnerable:
                statements.append(self.guard_statement(d))
                statements.append(self.transfer_statement(d))
                if spec.capture_result and spec.subtype in ("call", "send"):
                    statements.append(self.result_check_statement(d))
                statements.append(self.balance_write_statement(d, vulnerable=True))
                if spec.has_total:
                    statements.append(self.total_write_statement(d, vulnerable=True))
            elif spec.clean_style == "cei":
                statements.append(self.guard_statement(d))
                statements.append(self.balance_write_statement(d, vulnerable=False))
                if spec.has_total:
                    statements.append(self.total_write_statement(d, vulnerable=False))
                statements.append(self.transfer_statement(d))
                if spec.capture_result and spec.subtype in ("call", "send"):
                    statements.append(self.result_check_statement(d))
            else:  # lock
                statements.append(self.lock_guard_statement(d))
                statements.append(self.lock_statement(d, True))
                statements.append(self.guard_statement(d))
                statements.append(self.transfer_statement(d))
                if spec.capture_result and spec.subtype in ("call", "send"):
                    statements.append(self.result_check_statement(d))
                statements.append(self.balance_write_statement(d, vulnerable=False))
                if spec.has_total:
                    statements.append(self.total_write_statement(d, vulnerable=False))
                statements.append(self.lock_statement(d, False))
            return statements

        return self.function_definition(
            depth, style.withdraw, params(), "nonpayable", spec.visibility,
            None, body,
        )

    # -- whole contract -------------------------------------------------------

    def build(self) -> SynthContract:
        e, spec, style = self.e, self.spec, self.style
        pragma_start = e.w.emit(
            f"pragma solidity ^0.8.{style.pragma_patch};"
        )
        pragma = {"id": e.nid(), "nodeType": "PragmaDirective",
                  "src": e.w.src(pragma_start),
                  "literals": ["solidity", "^", "0.8", f".{style.pragma_patch}"]}
        e.w.emit("\n")
        contract_start = e.w.emit(f"contract {style.contract} {{")

        members: list[dict] = [self.state_mapping(1)]
        if spec.has_total:
            members.append(self.state_scalar(1, "uint256", style.total, "public"))
            self.total_id = members[-1]["id"]
        if not spec.vulnerable and spec.clean_style == "lock":
            members.append(self.state_scalar(1, "bool", style.lock, "private"))
            self.lock_id = members[-1]["id"]
        if spec.has_deposit:
            members.append(self.deposit_function(1))
        members.append(self.withdraw_function(1))
        if spec.has_getter:
            members.append(self.getter_function(1))

        e.w.emit("\n}")
        contract = {"id": e.nid(), "nodeType": "ContractDefinition",
                    "src": e.w.src(contract_start), "name": style.contract,
                    "contractKind": "contract", "abstract": False,
                    "fullyImplemented": True, "baseContracts": [],
                    "nodes": members}
        e.w.emit("\n")
        source_unit = {"id": e.nid(), "nodeType": "SourceUnit",
                       "src": f"0:{e.w.pos}:0",
                       "absolutePath": f"{style.contract}.sol",
                       "nodes": [pragma, contract]}
        return SynthContract(
            source=e.w.text().encode("utf-8"),
            ast=source_unit,
            vulnerable_spans=self.vulnerable_spans,
            subtype=spec.subtype,
            spec=spec,
        )


def build_contract(spec: TemplateSpec, naming_seed: int = 0) -> SynthContract:
    """Deterministically emit one contract for (spec, naming_seed)."""
    return ContractBuilder(spec, NamingStyle.from_seed(naming_seed)).build()


def sample_spec(rng: random.Random, vulnerable: bool,
                subtype: str | None = None) -> TemplateSpec:
    """Draw one structural configuration."""
    if subtype is None:
        subtype = rng.choice(("call", "send", "transfer"))
    return TemplateSpec(
        subtype=subtype,
        vulnerable=vulnerable,
        guard=rng.choice(("require", "ifrevert")),
        clean_style=rng.choice(("cei", "lock")),
        receiver=rng.choice(("sender", "param")),
        amount_style=rng.choice(("param", "full")),
        capture_result=(subtype != "transfer") and rng.random() < 0.7,
        has_deposit=rng.random() < 0.6,
        has_getter=rng.random() < 0.35,
        has_total=rng.random() < 0.4,
        visibility=rng.choice(("public", "external")),
    )


def generate_contracts(
    n_clean: int, n_vulnerable: int, seed: int, duplicate_rate: float = 0.45
) -> list[tuple[str, SynthContract]]:
    """Emit (contract id, contract) pairs covering all three subtypes.

    Roughly ``duplicate_rate`` of the emitted contracts reuse an earlier
    structural spec with fresh naming, so the corpus carries genuine
    duplicates for the dedup stage to find.
    """
    rng = random.Random(seed)
    out: list[tuple[str, SynthContract]] = []
    for label, count in (("clean", n_clean), ("vuln", n_vulnerable)):
        vulnerable = label == "vuln"
        specs: list[TemplateSpec] = []
        for i in range(count):
            # Cycle subtypes so every class covers call/send/transfer.
            subtype = ("call", "send", "transfer")[i % 3]
            if specs and rng.random() < duplicate_rate:
                base = rng.choice(specs)
                spec = replace(base, subtype=base.subtype)
            else:
                spec = sample_spec(rng, vulnerable, subtype)
                specs.append(spec)
            contract = build_contract(spec, naming_seed=rng.randrange(2**31))
            out.append((f"{label}_{spec.subtype}_{i:04d}", contract))
    return out


def build_scan_fixture(n_functions: int, seed: int = 7) -> SynthContract:
    """One large contract (many withdraw variants) for latency checks."""
    rng = random.Random(seed)
    spec = sample_spec(rng, vulnerable=True, subtype="call")
    style = NamingStyle.from_seed(seed)
    builder = ContractBuilder(spec, style)
    e = builder.e

    pragma_start = e.w.emit("pragma solidity ^0.8.19;")
    pragma = {"id": e.nid(), "nodeType": "PragmaDirective",
              "src": e.w.src(pragma_start),
              "literals": ["solidity", "^", "0.8", ".19"]}
    e.w.emit("\n")
    contract_start = e.w.emit(f"contract Mega{style.contract} {{")
    members = [builder.state_mapping(1)]
    builder.total_id = members[0]["id"]  # placeholder; replaced if used
    for i in range(n_functions):
        sub_spec = sample_spec(rng, vulnerable=(i % 4 == 0))
        sub_style = replace(
            NamingStyle.from_seed(rng.randrange(2**31)),
            indent=style.indent,
        )
        builder.spec = replace(
            sub_spec,
            has_total=False,
            clean_style="cei",
            has_deposit=False,
            has_getter=False,
        )
        builder.style = replace(
            sub_style,
            withdraw=f"{sub_style.withdraw}{i}",
            balances=style.balances,
        )
        members.append(builder.withdraw_function(1))
    builder.style = style
    e.w.emit("\n}")
    contract = {"id": e.nid(), "nodeType": "ContractDefinition",
                "src": e.w.src(contract_start), "name": f"Mega{style.contract}",
                "contractKind": "contract", "abstract": False,
                "fullyImplemented": True, "baseContracts": [], "nodes": members}
    e.w.emit("\n")
    source_unit = {"id": e.nid(), "nodeType": "SourceUnit",
                   "src": f"0:{e.w.pos}:0", "absolutePath": "Mega.sol",
                   "nodes": [pragma, contract]}
    return SynthContract(
        source=e.w.text().encode("utf-8"),
        ast=source_unit,
        vulnerable_spans=builder.vulnerable_spans,
        subtype="call",
        spec=spec,
    )


_YUL_SOURCE = """pragma solidity ^0.8.19;
contract ExampleYul {
  function withdrawYul(address _to, uint256 _amount) external payable {
    assembly {
    for {let i := 0} lt(i, 2) {i := add(i, 1)} {
        // loop body
    }
    }
    //other solidity text
  }
}
"""


def yul_loop_contract() -> SynthContract:
    """A contract whose body is a single inline-assembly counting loop.

    Spans are located by searching the fixed (ASCII) source text, so they
    match the emitted bytes exactly.  The Yul subtree carries no ids, as the
    compiler emits it.
    """
    src_text = _YUL_SOURCE
    counter = {"next": 1}

    def nid() -> int:
        i = counter["next"]
        counter["next"] += 1
        return i

    def span(token: str) -> str:
        return f"{src_text.index(token)}:{len(token)}:0"

    def sub_span(outer: str, token: str, skip: int = 0) -> str:
        pos = outer.index(token)
        for _ in range(skip):
            pos = outer.index(token, pos + 1)
        return f"{src_text.index(outer) + pos}:{len(token)}:0"

    pre_text = "{let i := 0}"
    cond_text = "lt(i, 2)"
    post_text = "{i := add(i, 1)}"
    body_text = "{\n        // loop body\n    }"
    loop_text = f"for {pre_text} {cond_text} {post_text} {body_text}"
    asm_text = "assembly {\n    " + loop_text + "\n    }"
    fn_text = src_text[src_text.index("function"):src_text.index("\n  }") + 4]
    block_text = src_text[src_text.index("{\n    assembly"):src_text.index("\n  }") + 4]
    contract_text = src_text[src_text.index("contract ExampleYul"):src_text.index("\n}") + 2]

    pre = {"nodeType": "YulBlock", "src": span(pre_text), "statements": [{
        "nodeType": "YulVariableDeclaration", "src": sub_span(pre_text, "let i := 0"),
        "variables": [{"nodeType": "YulTypedName",
                       "src": sub_span(pre_text, "i"), "name": "i", "type": ""}],
        "value": {"nodeType": "YulLiteral", "src": sub_span(pre_text, "0"),
                  "kind": "number", "value": "0", "type": ""},
    }]}
    condition = {"nodeType": "YulFunctionCall", "src": span(cond_text),
                 "functionName": {"nodeType": "YulIdentifier",
                                  "src": sub_span(cond_text, "lt"), "name": "lt"},
                 "arguments": [
                     {"nodeType": "YulIdentifier",
                      "src": sub_span(cond_text, "i"), "name": "i"},
                     {"nodeType": "YulLiteral", "src": sub_span(cond_text, "2"),
                      "kind": "number", "value": "2", "type": ""},
                 ]}
    post = {"nodeType": "YulBlock", "src": span(post_text), "statements": [{
        "nodeType": "YulAssignment", "src": sub_span(post_text, "i := add(i, 1)"),
        "variableNames": [{"nodeType": "YulIdentifier",
                           "src": sub_span(post_text, "i"), "name": "i"}],
        "value": {"nodeType": "YulFunctionCall",
                  "src": sub_span(post_text, "add(i, 1)"),
                  "functionName": {"nodeType": "YulIdentifier",
                                   "src": sub_span(post_text, "add"),
                                   "name": "add"},
                  "arguments": [
                      {"nodeType": "YulIdentifier",
                       "src": sub_span(post_text, "i", skip=1), "name": "i"},
                      {"nodeType": "YulLiteral", "src": sub_span(post_text, "1"),
                       "kind": "number", "value": "1", "type": ""},
                  ]},
    }]}
    loop_body = {"nodeType": "YulBlock", "src": span(body_text), "statements": []}
    yul_loop = {"nodeType": "YulForLoop", "src": span(loop_text),
                "pre": pre, "condition": condition, "post": post,
                "body": loop_body}
    yul_block = {"nodeType": "YulBlock", "src": span(loop_text),
                 "statements": [yul_loop]}
    assembly = {"id": nid(), "nodeType": "InlineAssembly", "src": span(asm_text),
                "AST": yul_block, "evmVersion": "paris", "externalReferences": []}

    param_to = {"id": nid(), "nodeType": "VariableDeclaration",
                "src": span("address _to"), "name": "_to",
                "typeName": {"id": nid(), "nodeType": "ElementaryTypeName",
                             "src": span("address"), "name": "address"},
                "stateVariable": False, "constant": False, "mutability": "mutable",
                "storageLocation": "default", "visibility": "internal"}
    param_amount = {"id": nid(), "nodeType": "VariableDeclaration",
                    "src": span("uint256 _amount"), "name": "_amount",
                    "typeName": {"id": nid(), "nodeType": "ElementaryTypeName",
                                 "src": span("uint256"), "name": "uint256"},
                    "stateVariable": False, "constant": False,
                    "mutability": "mutable", "storageLocation": "default",
                    "visibility": "internal"}
    params = {"id": nid(), "nodeType": "ParameterList",
              "src": span("(address _to, uint256 _amount)"),
              "parameters": [param_to, param_amount]}
    returns = {"id": nid(), "nodeType": "ParameterList",
               "src": f"{src_text.index(' payable {') + 9}:0:0", "parameters": []}
    body = {"id": nid(), "nodeType": "Block", "src": span(block_text),
            "statements": [assembly]}
    fn = {"id": nid(), "nodeType": "FunctionDefinition", "src": span(fn_text),
          "name": "withdrawYul", "kind": "function", "parameters": params,
          "returnParameters": returns, "body": body,
          "stateMutability": "payable", "visibility": "external",
          "implemented": True, "virtual": False, "modifiers": []}
    pragma = {"id": nid(), "nodeType": "PragmaDirective",
              "src": span("pragma solidity ^0.8.19;"),
              "literals": ["solidity", "^", "0.8", ".19"]}
    contract = {"id": nid(), "nodeType": "ContractDefinition",
                "src": span(contract_text), "name": "ExampleYul",
                "contractKind": "contract", "abstract": False,
                "fullyImplemented": True, "baseContracts": [], "nodes": [fn]}
    source_unit = {"id": nid(), "nodeType": "SourceUnit",
                   "src": f"0:{len(src_text.encode())}:0",
                   "absolutePath": "ExampleYul.sol",
                   "nodes": [pragma, contract]}
    return SynthContract(
        source=src_text.encode("utf-8"),
        ast=source_unit,
        vulnerable_spans=[],
        subtype="call",
        spec=TemplateSpec(subtype="call", vulnerable=False),
    )
