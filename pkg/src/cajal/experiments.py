"""Conditional-classification experiments on synthetic parity-pair data.

Each sample is a pair of feature vectors drawn from one of two Gaussian
clusters (the parity classes); the label applies a boolean task (EQ,
XOR, AND, OR) to the pair of cluster parities. Four model families
share the same budget:

  I  one plain 3-layer ReLU network on the concatenated features;
  D  per-input encoders linked into the frozen compiled structure of the
     task program (conditionals become soft branches);
  C  per-input encoders producing Church encodings, linked through the
     frozen compiled hypernetwork for the task applied by typed
     matrix multiplication;
  T  per-input encoders combined by tensor product under a trainable
     randomly initialized linear head.

The compiled tensors in D and C are constants: the program logic is
frozen and only the encoders learn.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .autodiff import AdamState, Graph, Node, adam_step
from .compile import compile_closed
from .parser import parse_expr
from .syntax import App, Expr, FF, If, TT, Var
from .tensor import vec


# -- tasks -----------------------------------------------------------------

_BODY = {
    "EQ": "if x then (if y then tt else ff) else (if y then ff else tt)",
    "XOR": "if x then (if y then ff else tt) else (if y then tt else ff)",
    "AND": "if x then (if y then tt else ff) else (if y then ff else ff)",
    "OR": "if x then (if y then tt else tt) else (if y then tt else ff)",
}

# Church-encoded variants: booleans become selectors of type 2 -o 2 -o 2
# and the program becomes a higher-order function applied by the model.
_CHURCH = {
    "EQ": "\\x:2 -o 2 -o 2. \\y:2 -o 2 -o 2. "
          "if x tt ff then y tt ff else y ff tt",
    "XOR": "\\x:2 -o 2 -o 2. \\y:2 -o 2 -o 2. "
           "if x tt ff then y ff tt else y tt ff",
    "AND": "\\x:2 -o 2 -o 2. \\y:2 -o 2 -o 2. "
           "if x tt ff then y tt ff else y ff ff",
    "OR": "\\x:2 -o 2 -o 2. \\y:2 -o 2 -o 2. "
          "if x tt ff then y tt tt else y tt ff",
}

CHURCH_TT = "\\x:2. \\y:2. if y then x else x"
CHURCH_FF = "\\x:2. \\y:2. if x then y else y"


def _truth(kind: str, p1: bool, p2: bool) -> bool:
    match kind:
        case "EQ":
            return p1 == p2
        case "XOR":
            return p1 != p2
        case "AND":
            return p1 and p2
        case "OR":
            return p1 or p2
    raise ValueError(f"unknown task {kind!r}")


@dataclass(frozen=True)
class Task:
    kind: str

    @property
    def body(self) -> Expr:
        """The task program body over free boolean variables x and y."""
        return parse_expr(_BODY[self.kind])

    @property
    def church(self) -> Expr:
        """The closed Church-encoded task program."""
        return parse_expr(_CHURCH[self.kind])

    def truth_table(self) -> dict[tuple[bool, bool], bool]:
        return {(p1, p2): _truth(self.kind, p1, p2)
                for p1 in (True, False) for p2 in (True, False)}


TASK_KINDS = tuple(_BODY)


# -- data ------------------------------------------------------------------

@dataclass
class SyntheticDataset:
    """Pairs of cluster-drawn feature vectors with task labels.

    Arrays hold the batch along columns; labels are one-hot with row 0
    as the accepting class. Parities are stored for fidelity probes.
    """

    task: str
    seed: int
    d: int
    train_x1: np.ndarray
    train_x2: np.ndarray
    train_labels: np.ndarray
    test_x1: np.ndarray
    test_x2: np.ndarray
    test_labels: np.ndarray
    test_parities: np.ndarray  # shape (2, n_test), booleans


def _pairs(n: int) -> list[tuple[bool, bool]]:
    # Exact quarters keep the parity pairs (hence the classes of every
    # task) balanced by construction.
    combos = [(True, True), (True, False), (False, True), (False, False)]
    out = []
    for i, combo in enumerate(combos):
        out += [combo] * (n // 4 + (1 if i < n % 4 else 0))
    return out


def gen_task_data(task: Task, seed: int, train_size: int = 4096,
                  test_size: int = 1024, d: int = 16) -> SyntheticDataset:
    if min(train_size, test_size) < 100:
        raise ValueError("sizes must be at least 100")
    rng = np.random.default_rng(seed)
    mu_even = rng.normal(0.0, 1.0, size=d)
    direction = rng.normal(0.0, 1.0, size=d)
    mu_odd = mu_even + 6.0 * direction / np.linalg.norm(direction)

    def draw(parities: list[tuple[bool, bool]]):
        n = len(parities)
        x1 = np.empty((d, n))
        x2 = np.empty((d, n))
        labels = np.zeros((2, n))
        for k, (p1, p2) in enumerate(parities):
            x1[:, k] = (mu_even if p1 else mu_odd) + rng.normal(0.0, 1.0, size=d)
            x2[:, k] = (mu_even if p2 else mu_odd) + rng.normal(0.0, 1.0, size=d)
            labels[0 if _truth(task.kind, p1, p2) else 1, k] = 1.0
        return x1, x2, labels, np.array(parities).T

    train_parities = _pairs(train_size)
    test_parities = _pairs(test_size)
    rng.shuffle(train_parities)
    rng.shuffle(test_parities)
    tr_x1, tr_x2, tr_y, _ = draw(train_parities)
    te_x1, te_x2, te_y, te_p = draw(test_parities)
    return SyntheticDataset(task.kind, seed, d, tr_x1, tr_x2, tr_y,
                            te_x1, te_x2, te_y, te_p)


# -- models ----------------------------------------------------------------

@dataclass
class ModelConfig:
    kind: str  # I | D | C | T
    hidden: int = 32
    lr: float = 0.01
    batch: int = 64
    steps: int = 2000
    seed: int = 0
    eval_every: int = 50


@dataclass
class Model:
    kind: str
    graph: Graph
    logits: Node
    loss: Node
    param_count: int
    # Parameter-free copy of the frozen logic for D and C, fed by the
    # inputs "bx"/"by" instead of the encoders; None for I and T.
    logic_probe: Graph | None = None


def _he(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / shape[1]), size=shape)


def _encoder(g: Graph, name: str, rng: np.random.Generator, d: int,
             hidden: int, out_dim: int) -> Node:
    x = g.input(name)
    w1 = g.param(f"{name}_w1", _he(rng, (hidden, d)))
    b1 = g.param(f"{name}_b1", np.zeros((hidden, 1)))
    w2 = g.param(f"{name}_w2", _he(rng, (out_dim, hidden)))
    b2 = g.param(f"{name}_b2", np.zeros((out_dim, 1)))
    h = g.relu(g.add(g.matmul(w1, x), b1))
    return g.add(g.matmul(w2, h), b2)


def _link_structure(g: Graph, e: Expr, var_nodes: dict[str, Node]) -> Node:
    """Wire the conditional fragment of a program into the graph: boolean
    literals become frozen basis constants and conditionals become soft
    branches over the linked inputs."""
    match e:
        case Var(name):
            return var_nodes[name]
        case TT():
            return g.const(np.array([[1.0], [0.0]]))
        case FF():
            return g.const(np.array([[0.0], [1.0]]))
        case If(c, t, f):
            return g.soft_branch(_link_structure(g, c, var_nodes),
                                 _link_structure(g, t, var_nodes),
                                 _link_structure(g, f, var_nodes))
    raise ValueError(f"cannot link expression {e!r}")


def build_model(cfg: ModelConfig, task: Task, d: int = 16) -> Model:
    rng = np.random.default_rng([cfg.seed, 1])
    g = Graph()
    probe: Graph | None = None

    if cfg.kind == "I":
        x1, x2 = g.input("x1"), g.input("x2")
        joint = g.concat(x1, x2)
        h = 24
        w1 = g.param("w1", _he(rng, (h, 2 * d)))
        b1 = g.param("b1", np.zeros((h, 1)))
        w2 = g.param("w2", _he(rng, (h, h)))
        b2 = g.param("b2", np.zeros((h, 1)))
        w3 = g.param("w3", _he(rng, (2, h)))
        b3 = g.param("b3", np.zeros((2, 1)))
        a1 = g.relu(g.add(g.matmul(w1, joint), b1))
        a2 = g.relu(g.add(g.matmul(w2, a1), b2))
        logits = g.add(g.matmul(w3, a2), b3)
    elif cfg.kind == "D":
        enc_x = _encoder(g, "x1", rng, d, cfg.hidden, 2)
        enc_y = _encoder(g, "x2", rng, d, cfg.hidden, 2)
        logits = _link_structure(g, task.body, {"x": enc_x, "y": enc_y})
        probe = Graph()
        _link_structure(probe, task.body,
                        {"x": probe.input("bx"), "y": probe.input("by")})
    elif cfg.kind == "C":
        m = compile_closed(task.church)  # 16 x 8, frozen
        enc_x = _encoder(g, "x1", rng, d, cfg.hidden, 8)
        enc_y = _encoder(g, "x2", rng, d, cfg.hidden, 8)
        hyper = g.matmul(g.const(m.array, "church"), enc_x)
        logits = g.matmul_typed(hyper, enc_y, 2, 8)
        probe = Graph()
        ph = probe.matmul(probe.const(m.array, "church"), probe.input("bx"))
        probe.matmul_typed(ph, probe.input("by"), 2, 8)
    elif cfg.kind == "T":
        enc_x = _encoder(g, "x1", rng, d, cfg.hidden, 2)
        enc_y = _encoder(g, "x2", rng, d, cfg.hidden, 2)
        tp = g.tensor_product(enc_x, enc_y)
        head = g.param("head", _he(rng, (2, 4)))
        logits = g.matmul(head, tp)
    else:
        raise ValueError(f"unknown model kind {cfg.kind!r}")

    labels = g.input("labels")
    loss = g.cross_entropy(logits, labels)
    count = sum(p.value.size for p in g.params())
    return Model(cfg.kind, g, logits, loss, count, probe)


# -- fidelity probe --------------------------------------------------------

def _basis_encoding(kind: str, parity: bool) -> np.ndarray:
    """Exact encoder output for a parity class: the compiled boolean for
    D, the vec'd compiled Church boolean for C."""
    if kind == "D":
        return np.array([1.0, 0.0]) if parity else np.array([0.0, 1.0])
    if kind == "C":
        src = CHURCH_TT if parity else CHURCH_FF
        return vec(compile_closed(parse_expr(src)))
    raise ValueError(f"no basis encoding for model {kind!r}")


def basis_fidelity(model: Model, task: Task) -> float:
    """Truth-table accuracy of the frozen logic on exact basis encodings."""
    if model.logic_probe is None:
        raise ValueError(f"model {model.kind} has no frozen logic to probe")
    combos = [(True, True), (True, False), (False, True), (False, False)]
    bx = np.column_stack([_basis_encoding(model.kind, p1) for p1, _ in combos])
    by = np.column_stack([_basis_encoding(model.kind, p2) for _, p2 in combos])
    logits = model.logic_probe.forward({"bx": bx, "by": by})
    correct = 0
    for k, (p1, p2) in enumerate(combos):
        predicted = bool(logits[0, k] >= logits[1, k])
        if predicted == _truth(task.kind, p1, p2):
            correct += 1
    return correct / len(combos)


# -- training --------------------------------------------------------------

@dataclass
class MetricSeries:
    task: str
    model: str
    lr: float
    batch: int
    seed: int
    steps: list[int] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    param_count: int = 0

    def final_accuracy(self) -> float:
        return self.accuracy[-1] if self.accuracy else float("nan")


def _accuracy(model: Model, x1: np.ndarray, x2: np.ndarray,
              labels: np.ndarray) -> float:
    model.graph.forward({"x1": x1, "x2": x2, "labels": labels})
    logits = model.logits.value
    predicted = logits[0, :] >= logits[1, :]
    actual = labels[0, :] == 1.0
    return float(np.mean(predicted == actual))


def train_one(task: Task, cfg: ModelConfig, data: SyntheticDataset) -> MetricSeries:
    model = build_model(cfg, task, d=data.d)
    params = model.graph.params()
    opt = AdamState(params, lr=cfg.lr)
    shuffle_rng = np.random.default_rng([cfg.seed, 2])
    n = data.train_x1.shape[1]
    series = MetricSeries(task.kind, cfg.kind, cfg.lr, cfg.batch, cfg.seed,
                          param_count=model.param_count)
    series.steps.append(0)
    series.accuracy.append(_accuracy(model, data.test_x1, data.test_x2,
                                     data.test_labels))
    order = shuffle_rng.permutation(n)
    cursor = 0
    for step in range(1, cfg.steps + 1):
        if cursor + cfg.batch > n:
            order = shuffle_rng.permutation(n)
            cursor = 0
        idx = order[cursor:cursor + cfg.batch]
        cursor += cfg.batch
        bindings = {
            "x1": data.train_x1[:, idx],
            "x2": data.train_x2[:, idx],
            "labels": data.train_labels[:, idx],
        }
        model.graph.forward(bindings)
        model.graph.backward()
        adam_step(opt, params)
        if step % cfg.eval_every == 0 or step == cfg.steps:
            series.steps.append(step)
            series.accuracy.append(_accuracy(model, data.test_x1, data.test_x2,
                                             data.test_labels))
    return series


@dataclass
class Sweep:
    lrs: list[float] = field(default_factory=lambda: [0.003, 0.01])
    batch_sizes: list[int] = field(default_factory=lambda: [32, 64])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])


FULL_SWEEP = Sweep(lrs=[0.001, 0.003, 0.01, 0.03],
                   batch_sizes=[16, 32, 64, 128])


def _run_key(task_kind: str, model: str, lr: float, batch: int, seed: int):
    return (task_kind, model, lr, batch, seed)


def _run_config(args) -> MetricSeries:
    task_kind, model, lr, batch, seed, steps, hidden = args
    task = Task(task_kind)
    data = gen_task_data(task, seed)
    cfg = ModelConfig(kind=model, hidden=hidden, lr=lr, batch=batch,
                      steps=steps, seed=seed)
    return train_one(task, cfg, data)


def run_experiment(task: Task, models: list[str], sweep: Sweep | None = None,
                   steps: int = 2000, hidden: int = 32,
                   workers: int = 1) -> list[MetricSeries]:
    """Train every (model, lr, batch, seed) configuration; results are
    ordered by configuration key regardless of worker scheduling."""
    sweep = sweep or Sweep()
    configs = sorted(
        (task.kind, m, lr, b, s, steps, hidden)
        for m in models for lr in sweep.lrs for b in sweep.batch_sizes
        for s in sweep.seeds)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_config, configs))
    else:
        results = [_run_config(c) for c in configs]
    return sorted(results, key=lambda s: _run_key(s.task, s.model, s.lr,
                                                  s.batch, s.seed))


# -- export ----------------------------------------------------------------

def export_metrics(series: list[MetricSeries], out_dir: str) -> dict[str, str]:
    """Write metrics.csv and summary.json; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "metrics.csv")
    rows = sorted(series, key=lambda s: _run_key(s.task, s.model, s.lr,
                                                 s.batch, s.seed))
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "seed", "lr", "batch", "model", "accuracy"])
        for s in rows:
            for step, acc in zip(s.steps, s.accuracy):
                writer.writerow([step, s.seed, s.lr, s.batch, s.model,
                                 f"{acc:.6f}"])

    groups: dict[tuple, list[MetricSeries]] = {}
    for s in rows:
        groups.setdefault((s.task, s.model, s.lr, s.batch), []).append(s)
    summary = []
    for (task_kind, model, lr, batch), members in sorted(groups.items()):
        finals = [m.final_accuracy() for m in members]
        summary.append({
            "task": task_kind,
            "model": model,
            "lr": lr,
            "batch": batch,
            "seeds": len(members),
            "param_count": members[0].param_count,
            "final_accuracy_mean": round(float(np.mean(finals)), 6),
            "final_accuracy_std": round(float(np.std(finals)), 6),
        })
    json_path = os.path.join(out_dir, "summary.json")
    with open(json_path, "w") as fh:
        json.dump({"groups": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": csv_path, "json": json_path}


def render_figures(series: list[MetricSeries], out_dir: str) -> list[str]:
    """One accuracy-vs-step figure per task: per-model mean curves with
    standard-deviation ribbons, aggregated over seeds."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "cajal"

    os.makedirs(out_dir, exist_ok=True)
    by_task: dict[str, list[MetricSeries]] = {}
    for s in series:
        by_task.setdefault(s.task, []).append(s)
    paths = []
    for task_kind, members in sorted(by_task.items()):
        fig, ax = plt.subplots(figsize=(6, 4))
        groups: dict[tuple, list[MetricSeries]] = {}
        for s in members:
            groups.setdefault((s.model, s.lr, s.batch), []).append(s)
        for (model, lr, batch), runs in sorted(groups.items()):
            steps = runs[0].steps
            curves = np.array([r.accuracy for r in runs])
            mean = curves.mean(axis=0)
            std = curves.std(axis=0)
            label = f"{model} lr={lr} b={batch}"
            ax.plot(steps, mean, label=label)
            ax.fill_between(steps, mean - std, mean + std, alpha=0.2)
        ax.set_xlabel("step")
        ax.set_ylabel("test accuracy")
        ax.set_ylim(0.0, 1.05)
        ax.set_title(task_kind)
        ax.legend(fontsize=7)
        path = os.path.join(out_dir, f"accuracy_{task_kind}.svg")
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
