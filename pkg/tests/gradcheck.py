"""Shared gradient-checking harness.

Builds random op pipelines ending in the cross-entropy root and compares
every parameter's reverse-mode gradient against central finite
differences. Graphs whose ReLU inputs sit within 1e-3 of the kink are
screened out (the caller reseeds), so the comparison never straddles a
nondifferentiable point.
"""

from __future__ import annotations

import numpy as np

from cajal import Graph, finite_diff_grad

DIFFERENTIABLE_OPS = (
    "MatMul", "Add", "Scale", "ReLU", "SoftBranch", "HardBranch",
    "Concat", "TensorProduct", "MatMulTyped", "CrossEntropyLoss",
)

_PIPELINE_OPS = (
    "MatMul", "Add", "Scale", "ReLU", "SoftBranch", "HardBranch",
    "Concat", "TensorProduct", "MatMulTyped",
)


def rel_close(ad, fd, tol: float = 1e-4) -> bool:
    """Max-abs difference within tol relative to max(1, |fd|)."""
    ad, fd = np.asarray(ad), np.asarray(fd)
    denom = max(1.0, float(np.abs(fd).max()))
    return float(np.abs(ad - fd).max()) <= tol * denom


def _draw(rng: np.random.Generator, shape) -> np.ndarray:
    # magnitudes in [0.25, 1.5] keep kinked ops off their corners
    return (rng.uniform(0.25, 1.5, size=shape)
            * rng.choice([-1.0, 1.0], size=shape))


def build_random_graph(seed: int):
    """Random pipeline over the full op set; returns (graph, bindings)."""
    rng = np.random.default_rng(seed)
    g = Graph()
    batch = int(rng.integers(1, 4))
    rows = int(rng.integers(2, 5))
    cur = g.input("x")
    bindings = {"x": _draw(rng, (rows, batch))}

    def partner(shape):
        if rng.random() < 0.6:
            return g.param(f"p{len(g.nodes)}", _draw(rng, shape))
        return g.const(_draw(rng, shape))

    for _ in range(int(rng.integers(4, 9))):
        op = str(rng.choice(_PIPELINE_OPS))
        if op == "MatMul":
            k = int(rng.integers(2, 5))
            cur = g.matmul(partner((k, rows)), cur)
            rows = k
        elif op == "Add":
            shape = (rows, 1) if rng.random() < 0.5 else (rows, batch)
            cur = g.add(cur, partner(shape))
        elif op == "Scale":
            cur = g.scale(float(rng.uniform(-2.0, 2.0)), cur)
        elif op == "ReLU":
            cur = g.relu(cur)
        elif op == "SoftBranch":
            cond = partner((2, batch))
            cur = g.soft_branch(cond, cur, partner((rows, batch)))
        elif op == "HardBranch":
            # exact ones and clear non-ones: a finite bump cannot flip
            # the switch, so differences stay valid near the constant
            row0 = rng.choice([1.0, 0.3], size=(1, batch))
            cond = g.const(np.vstack([row0, 1.0 - row0]))
            cur = g.hard_branch(cond, cur, partner((rows, batch)))
        elif op == "Concat":
            k = int(rng.integers(1, 4))
            cur = g.concat(cur, partner((k, batch)))
            rows += k
        elif op == "TensorProduct":
            cur = g.tensor_product(cur, partner((2, batch)))
            rows *= 2
        elif op == "MatMulTyped":
            m = int(rng.integers(2, 4))
            f = partner((m * rows, batch))
            cur = g.matmul_typed(f, cur, m, rows)
            rows = m
        if rows > 32:
            cur = g.matmul(g.const(_draw(rng, (3, rows))), cur)
            rows = 3

    head = g.param("head", _draw(rng, (3, rows)))
    logits = g.matmul(head, cur)
    labels = np.zeros((3, batch))
    labels[rng.integers(0, 3, size=batch), np.arange(batch)] = 1.0
    g.cross_entropy(logits, g.const(labels))
    return g, bindings


def _near_kink(g: Graph) -> bool:
    for node in g.nodes:
        if node.op == "ReLU":
            if float(np.abs(node.inputs[0].value).min()) < 1e-3:
                return True
    return False


def check_gradients(seed: int, tol: float = 1e-4):
    """None if the graph was screened out; else (ops_used, worst_rel_err)."""
    g, bindings = build_random_graph(seed)
    g.forward(bindings)
    if _near_kink(g):
        return None
    g.backward()
    worst = 0.0
    for p in g.params():
        ad = p.grad if p.grad is not None else np.zeros_like(p.value)
        fd = finite_diff_grad(g, p, bindings)
        denom = max(1.0, float(np.abs(fd).max()))
        worst = max(worst, float(np.abs(ad - fd).max()) / denom)
        if not rel_close(ad, fd, tol):
            raise AssertionError(
                f"seed {seed}: parameter {p.name} gradient off by "
                f"{float(np.abs(ad - fd).max()):.3g}")
    return {n.op for n in g.nodes}, worst
