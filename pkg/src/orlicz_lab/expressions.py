"""Closed-form expression strings over domain coordinates.

Config files declare coefficient fields and data (p(x), a(x), f, psi, m)
as small arithmetic expressions in the coordinates ``x`` (and ``y`` in 2D).
The grammar covers +, -, *, /, powers (``^`` or ``**``), ``min``/``max``/
``abs``, ``exp``/``log``/``sqrt`` and trigonometric functions, plus the
constants ``pi`` and ``e``.  Parsing goes through :mod:`ast` with a strict
node whitelist, so config files cannot run arbitrary code.
"""

from __future__ import annotations

import ast
import math

import numpy as np

from .errors import ConfigurationError

_FUNCTIONS = {
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_ALLOWED_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _compile_node(node, variables):
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, variables)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ConfigurationError(
                f"non-numeric literal {node.value!r} at column {node.col_offset}"
            )
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        name = node.id
        if name in _CONSTANTS:
            value = _CONSTANTS[name]
            return lambda env: value
        if name in variables:
            return lambda env: env[name]
        raise ConfigurationError(
            f"unknown name '{name}' at column {node.col_offset}"
        )
    if isinstance(node, ast.UnaryOp):
        operand = _compile_node(node.operand, variables)
        if isinstance(node.op, ast.USub):
            return lambda env: -operand(env)
        if isinstance(node.op, ast.UAdd):
            return operand
        raise ConfigurationError(
            f"unsupported unary operator at column {node.col_offset}"
        )
    if isinstance(node, ast.BinOp):
        op = _ALLOWED_BINOPS.get(type(node.op))
        if op is None:
            raise ConfigurationError(
                f"unsupported operator at column {node.col_offset}"
            )
        left = _compile_node(node.left, variables)
        right = _compile_node(node.right, variables)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ConfigurationError(
                f"unsupported function call at column {node.col_offset}"
            )
        fn = _FUNCTIONS[node.func.id]
        if node.keywords:
            raise ConfigurationError(
                f"keyword arguments not allowed at column {node.col_offset}"
            )
        args = [_compile_node(a, variables) for a in node.args]
        if node.func.id in ("min", "max"):
            if len(args) < 2:
                raise ConfigurationError(
                    f"{node.func.id} needs at least two arguments "
                    f"at column {node.col_offset}"
                )

            def reduced(env, fn=fn, args=args):
                out = args[0](env)
                for a in args[1:]:
                    out = fn(out, a(env))
                return out

            return reduced
        if len(args) != 1:
            raise ConfigurationError(
                f"{node.func.id} takes one argument at column {node.col_offset}"
            )
        arg = args[0]
        return lambda env: fn(arg(env))
    raise ConfigurationError(
        f"unsupported syntax ({type(node).__name__}) at column "
        f"{getattr(node, 'col_offset', 0)}"
    )


class Expression:
    """A compiled coordinate expression, callable on point arrays."""

    def __init__(self, text: str, dimension: int):
        if dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {dimension}")
        self.text = text
        self.dimension = dimension
        variables = ("x",) if dimension == 1 else ("x", "y")
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(
                f"cannot parse '{text}': {exc.msg} at column {exc.offset}"
            ) from exc
        self._fn = _compile_node(tree, frozenset(variables))
        self._variables = variables

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on points of shape (m, dim); returns shape (m,)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.dimension == 1 else pts.reshape(1, -1)
        env = {name: pts[:, k] for k, name in enumerate(self._variables)}
        out = self._fn(env)
        return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()

    def __repr__(self):
        return f"Expression({self.text!r}, dim={self.dimension})"


def parse_expression(text: str, dimension: int) -> Expression:
    return Expression(text, dimension)
