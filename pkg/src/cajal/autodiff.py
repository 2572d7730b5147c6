"""Minimal reverse-mode automatic differentiation over dense arrays.

A Graph is a tape: nodes are appended in creation order, which is
already topological, so forward runs the tape left to right and backward
right to left. Activations are float64 arrays with the batch along
columns. SoftBranch realizes the compiled conditional (condition-weighted
combination of branches) and is differentiable in all three inputs;
HardBranch switches discretely on the condition's first coordinate and
propagates zero gradient to the condition.
"""

from __future__ import annotations

import numpy as np


class Node:
    __slots__ = ("id", "op", "inputs", "value", "grad", "name", "payload")

    def __init__(self, id: int, op: str, inputs: list["Node"], name: str = "",
                 payload=None):
        self.id = id
        self.op = op
        self.inputs = inputs
        self.value: np.ndarray | None = None
        self.grad: np.ndarray | None = None
        self.name = name
        self.payload = payload

    def __repr__(self) -> str:
        return f"Node({self.id}, {self.op}{', ' + self.name if self.name else ''})"


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to shape, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Graph:
    def __init__(self):
        self.nodes: list[Node] = []

    def _new(self, op: str, inputs: list[Node], name: str = "", payload=None) -> Node:
        node = Node(len(self.nodes), op, inputs, name, payload)
        self.nodes.append(node)
        return node

    # -- constructors --

    def input(self, name: str) -> Node:
        return self._new("Input", [], name)

    def param(self, name: str, value) -> Node:
        node = self._new("Param", [], name)
        node.value = np.array(value, dtype=np.float64)
        return node

    def const(self, value, name: str = "") -> Node:
        node = self._new("Const", [], name)
        node.value = np.array(value, dtype=np.float64)
        return node

    def matmul(self, a: Node, b: Node) -> Node:
        return self._new("MatMul", [a, b])

    def add(self, a: Node, b: Node) -> Node:
        return self._new("Add", [a, b])

    def scale(self, c: float, a: Node) -> Node:
        return self._new("Scale", [a], payload=float(c))

    def relu(self, a: Node) -> Node:
        return self._new("ReLU", [a])

    def soft_branch(self, cond: Node, b1: Node, b2: Node) -> Node:
        return self._new("SoftBranch", [cond, b1, b2])

    def hard_branch(self, cond: Node, b1: Node, b2: Node) -> Node:
        return self._new("HardBranch", [cond, b1, b2])

    def concat(self, a: Node, b: Node) -> Node:
        return self._new("Concat", [a, b])

    def tensor_product(self, a: Node, b: Node) -> Node:
        return self._new("TensorProduct", [a, b])

    def matmul_typed(self, f: Node, y: Node, out_rows: int, in_rows: int) -> Node:
        """Columnwise apply: column k of f, reshaped column-major to
        (out_rows, in_rows), multiplies column k of y."""
        return self._new("MatMulTyped", [f, y], payload=(out_rows, in_rows))

    def cross_entropy(self, logits: Node, labels: Node) -> Node:
        """Mean cross entropy of columnwise softmax(logits) against
        one-hot labels; produces the scalar loss root."""
        return self._new("CrossEntropyLoss", [logits, labels])

    # -- accessors --

    def params(self) -> list[Node]:
        return [n for n in self.nodes if n.op == "Param"]

    # -- execution --

    def forward(self, bindings: dict[str, np.ndarray]) -> np.ndarray:
        """Run the tape; returns the last node's value."""
        for node in self.nodes:
            ins = node.inputs
            match node.op:
                case "Input":
                    if node.name not in bindings:
                        raise KeyError(f"unbound input {node.name!r}")
                    node.value = np.asarray(bindings[node.name], dtype=np.float64)
                case "Param" | "Const":
                    pass
                case "MatMul":
                    node.value = ins[0].value @ ins[1].value
                case "Add":
                    node.value = ins[0].value + ins[1].value
                case "Scale":
                    node.value = node.payload * ins[0].value
                case "ReLU":
                    node.value = np.maximum(ins[0].value, 0.0)
                case "SoftBranch":
                    c, b1, b2 = (n.value for n in ins)
                    node.value = c[0:1, :] * b1 + c[1:2, :] * b2
                case "HardBranch":
                    c, b1, b2 = (n.value for n in ins)
                    take_first = (c[0:1, :] == 1.0)
                    node.value = np.where(take_first, b1, b2)
                case "Concat":
                    node.value = np.concatenate([ins[0].value, ins[1].value], axis=0)
                case "TensorProduct":
                    a, b = ins[0].value, ins[1].value
                    # column k is kron(a[:, k], b[:, k])
                    node.value = (a[:, None, :] * b[None, :, :]).reshape(
                        a.shape[0] * b.shape[0], a.shape[1])
                case "MatMulTyped":
                    m, n_in = node.payload
                    f, y = ins[0].value, ins[1].value
                    mats = f.reshape(m, n_in, -1, order="F")
                    node.value = np.einsum("ijk,jk->ik", mats, y)
                case "CrossEntropyLoss":
                    logits, labels = ins[0].value, ins[1].value
                    shifted = logits - logits.max(axis=0, keepdims=True)
                    log_z = np.log(np.exp(shifted).sum(axis=0, keepdims=True))
                    log_probs = shifted - log_z
                    batch = logits.shape[1]
                    node.value = np.array(
                        [[-(labels * log_probs).sum() / batch]])
                case _:
                    raise AssertionError(f"unknown op {node.op}")
        return self.nodes[-1].value

    def backward(self) -> None:
        """Reverse pass from the last node, which must be scalar."""
        root = self.nodes[-1]
        if root.value.size != 1:
            raise ValueError("backward requires a scalar root")
        for node in self.nodes:
            node.grad = None
        root.grad = np.ones_like(root.value)
        for node in reversed(self.nodes):
            if node.grad is None:
                continue
            g = node.grad
            ins = node.inputs

            def accum(target: Node, grad: np.ndarray) -> None:
                grad = _unbroadcast(grad, target.value.shape)
                if target.grad is None:
                    target.grad = grad.copy()
                else:
                    target.grad = target.grad + grad

            match node.op:
                case "Input" | "Param" | "Const":
                    pass
                case "MatMul":
                    accum(ins[0], g @ ins[1].value.T)
                    accum(ins[1], ins[0].value.T @ g)
                case "Add":
                    accum(ins[0], g)
                    accum(ins[1], g)
                case "Scale":
                    accum(ins[0], node.payload * g)
                case "ReLU":
                    accum(ins[0], g * (ins[0].value > 0.0))
                case "SoftBranch":
                    c, b1, b2 = (n.value for n in ins)
                    dc = np.vstack([(g * b1).sum(axis=0), (g * b2).sum(axis=0)])
                    accum(ins[0], dc)
                    accum(ins[1], c[0:1, :] * g)
                    accum(ins[2], c[1:2, :] * g)
                case "HardBranch":
                    c = ins[0].value
                    take_first = (c[0:1, :] == 1.0)
                    accum(ins[1], np.where(take_first, g, 0.0))
                    accum(ins[2], np.where(take_first, 0.0, g))
                case "Concat":
                    k = ins[0].value.shape[0]
                    accum(ins[0], g[:k, :])
                    accum(ins[1], g[k:, :])
                case "TensorProduct":
                    a, b = ins[0].value, ins[1].value
                    g3 = g.reshape(a.shape[0], b.shape[0], a.shape[1])
                    accum(ins[0], np.einsum("ijk,jk->ik", g3, b))
                    accum(ins[1], np.einsum("ijk,ik->jk", g3, a))
                case "MatMulTyped":
                    m, n_in = node.payload
                    f, y = ins[0].value, ins[1].value
                    mats = f.reshape(m, n_in, -1, order="F")
                    df = np.einsum("ik,jk->ijk", g, y).reshape(f.shape, order="F")
                    accum(ins[0], df)
                    accum(ins[1], np.einsum("ijk,ik->jk", mats, g))
                case "CrossEntropyLoss":
                    logits, labels = ins[0].value, ins[1].value
                    shifted = logits - logits.max(axis=0, keepdims=True)
                    expd = np.exp(shifted)
                    probs = expd / expd.sum(axis=0, keepdims=True)
                    batch = logits.shape[1]
                    accum(ins[0], g.item() * (probs - labels) / batch)
                case _:
                    raise AssertionError(f"unknown op {node.op}")


# -- optimization ----------------------------------------------------------

class AdamState:
    """Per-parameter moment estimates plus the shared step counter."""

    def __init__(self, params: list[Node], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {p.id: np.zeros_like(p.value) for p in params}
        self.v = {p.id: np.zeros_like(p.value) for p in params}


def adam_step(state: AdamState, params: list[Node]) -> None:
    """One Adam update with bias correction, in place, from .grad fields."""
    state.t += 1
    for p in params:
        g = p.grad if p.grad is not None else np.zeros_like(p.value)
        state.m[p.id] = state.beta1 * state.m[p.id] + (1 - state.beta1) * g
        state.v[p.id] = state.beta2 * state.v[p.id] + (1 - state.beta2) * g * g
        m_hat = state.m[p.id] / (1 - state.beta1 ** state.t)
        v_hat = state.v[p.id] / (1 - state.beta2 ** state.t)
        p.value = p.value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# -- oracles ---------------------------------------------------------------

def finite_diff_grad(graph: Graph, param: Node, bindings: dict[str, np.ndarray],
                     h: float = 1e-5) -> np.ndarray:
    """Central finite differences of the scalar root w.r.t. one parameter."""
    base = param.value.copy()
    out = np.zeros_like(base)
    it = np.nditer(base, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        bumped = base.copy()
        bumped[idx] = base[idx] + h
        param.value = bumped
        up = graph.forward(bindings).item()
        bumped[idx] = base[idx] - h
        param.value = bumped
        down = graph.forward(bindings).item()
        out[idx] = (up - down) / (2 * h)
    param.value = base
    graph.forward(bindings)
    return out


def grad_probe_branch(cond_init=(0.3, 0.7), mode: str = "soft") -> dict[str, float]:
    """Max-abs autodiff and finite-difference gradients of a two-branch
    loss w.r.t. the trainable condition, away from the switching boundary.

    Hard mode reports exactly zero autodiff gradient and vanishing FD;
    soft mode reports a substantial, FD-matching gradient.
    """
    g = Graph()
    cond = g.param("cond", np.array(cond_init, dtype=np.float64).reshape(2, 1))
    b1 = g.const(np.array([[5.0], [-5.0]]))
    b2 = g.const(np.array([[-5.0], [5.0]]))
    if mode == "soft":
        out = g.soft_branch(cond, b1, b2)
    elif mode == "hard":
        out = g.hard_branch(cond, b1, b2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    labels = g.input("labels")
    g.cross_entropy(out, labels)
    bindings = {"labels": np.array([[1.0], [0.0]])}
    g.forward(bindings)
    g.backward()
    auto = float(np.max(np.abs(cond.grad))) if cond.grad is not None else 0.0
    fd = float(np.max(np.abs(finite_diff_grad(g, cond, bindings))))
    return {"autodiff": auto, "fd": fd}
