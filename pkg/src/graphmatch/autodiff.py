"""Minimal reverse-mode autodiff over dense float64 numpy arrays.

Each operation records its parents and a backward closure on the output
tensor; :func:`backward` replays the tape in reverse topological order and
accumulates (+=) into leaf gradients, so shared inputs sum their path
gradients. Everything is float64 and the replay order is fixed by
construction order, which keeps training bitwise reproducible.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

BCE_EPS = 1e-7
LAYER_NORM_EPS = 1e-5
_NORM_EPS = 1e-12


class ShapeError(ValueError):
    """Operand shapes incompatible for an op; names the op and both shapes."""


class Tensor:
    """Dense float64 value with an optional gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], tuple] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __mul__(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)


def _result(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def backward(loss: Tensor) -> None:
    """Populate gradients of every reachable leaf from a scalar loss.

    Leaf grads accumulate across calls (callers zero them per batch); interior
    node grads are transient.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.shape}")
    topo: list[Tensor] = []
    state: dict[int, int] = {}  # 0 = on stack, 1 = done
    stack: list[Tensor] = [loss]
    while stack:
        node = stack[-1]
        mark = state.get(id(node))
        if mark is None:
            state[id(node)] = 0
            for p in node._parents:
                if p.requires_grad and id(p) not in state:
                    stack.append(p)
        else:
            stack.pop()
            if mark == 0:
                state[id(node)] = 1
                topo.append(node)

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            if node.requires_grad:
                if node.grad is None:
                    node.grad = np.zeros_like(node.data)
                node.grad += g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            if id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + pg
            else:
                grads[id(parent)] = pg


def zero_grads(tensors: Iterable[Tensor]) -> None:
    for t in tensors:
        t.grad = None


# ---------------------------------------------------------------------------
# Forward op set
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    out = a.data @ b.data
    return _result(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")
    return _result(a.data.T, (a,), lambda g: (g.T,))


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.data + b.data
    except ValueError as exc:
        raise ShapeError(f"add: incompatible shapes {a.shape} + {b.shape}") from exc
    return _result(
        out,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.data * b.data
    except ValueError as exc:
        raise ShapeError(f"mul: incompatible shapes {a.shape} * {b.shape}") from exc
    return _result(
        out,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def scale(a: Tensor, s: float) -> Tensor:
    return _result(a.data * s, (a,), lambda g: (g * s,))


def add_scalar(a: Tensor, s: float) -> Tensor:
    return _result(a.data + s, (a,), lambda g: (g,))


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the last axis."""
    if a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"concat: incompatible shapes {a.shape} | {b.shape}")
    out = np.concatenate([a.data, b.data], axis=-1)
    split = a.shape[-1]
    return _result(
        out, (a, b), lambda g: (g[..., :split], g[..., split:])
    )


def row_gather(table: Tensor, indices: Sequence[int]) -> Tensor:
    """Embedding lookup: stack ``table`` rows at ``indices``."""
    idx = np.asarray(indices, dtype=np.intp)
    if table.data.ndim != 2:
        raise ShapeError(f"row_gather: table must be a matrix, got {table.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise IndexError(
            f"row_gather: index out of range for table with {table.shape[0]} rows"
        )

    def backward_fn(g):
        acc = np.zeros_like(table.data)
        np.add.at(acc, idx, g)
        return (acc,)

    return _result(table.data[idx], (table,), backward_fn)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _result(a.data * mask, (a,), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-a.data))
    return _result(out, (a,), lambda g: (g * out * (1.0 - out),))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _result(out, (a,), lambda g: (g * out,))


def reciprocal(a: Tensor) -> Tensor:
    out = 1.0 / a.data
    return _result(out, (a,), lambda g: (-g * out * out,))


def softmax_rows(a: Tensor, pre_scale: Tensor | float | None = None) -> Tensor:
    """Row-wise softmax, optionally multiplying logits first (temperature)."""
    if pre_scale is not None:
        a = mul(a, pre_scale) if isinstance(pre_scale, Tensor) else scale(a, pre_scale)
    if a.data.ndim != 2:
        raise ShapeError(f"softmax: expected a matrix, got shape {a.shape}")
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def backward_fn(g):
        dot = (g * out).sum(axis=1, keepdims=True)
        return (out * (g - dot),)

    return _result(out, (a,), backward_fn)


def row_normalize(a: Tensor) -> Tensor:
    """L2-normalize each row; rows with (near-)zero norm map to zero rows.

    The zero-row plateau is treated as constant (zero gradient), matching its
    use as "no similarity to anything" in cosine attention.
    """
    if a.data.ndim != 2:
        raise ShapeError(f"row_normalize: expected a matrix, got shape {a.shape}")
    norms = np.sqrt((a.data * a.data).sum(axis=1, keepdims=True))
    safe = norms > _NORM_EPS
    out = np.where(safe, a.data / np.where(safe, norms, 1.0), 0.0)

    def backward_fn(g):
        dot = (g * out).sum(axis=1, keepdims=True)
        gx = np.where(safe, (g - out * dot) / np.where(safe, norms, 1.0), 0.0)
        return (gx,)

    return _result(out, (a,), backward_fn)


def layer_norm(
    x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS
) -> Tensor:
    """Row-wise layer normalization with learnable gain/bias."""
    if x.data.ndim != 2 or gain.shape != (x.shape[1],) or bias.shape != (x.shape[1],):
        raise ShapeError(
            f"layer_norm: x {x.shape} with gain {gain.shape}, bias {bias.shape}"
        )
    mu = x.data.mean(axis=1, keepdims=True)
    var = ((x.data - mu) ** 2).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def backward_fn(g):
        d = x.shape[1]
        dxhat = g * gain.data
        dgain = (g * xhat).sum(axis=0)
        dbias = g.sum(axis=0)
        dx = (
            inv
            / d
            * (
                d * dxhat
                - dxhat.sum(axis=1, keepdims=True)
                - xhat * (dxhat * xhat).sum(axis=1, keepdims=True)
            )
        )
        return (dx, dgain, dbias)

    return _result(out, (x, gain, bias), backward_fn)


def sum_all(a: Tensor) -> Tensor:
    return _result(a.data.sum(), (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size
    return _result(
        a.data.mean(), (a,), lambda g: (np.broadcast_to(g / n, a.shape).copy(),)
    )


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    if pred.shape != target.shape:
        raise ShapeError(f"mse_loss: shapes differ {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    n = max(diff.size, 1)
    out = (diff * diff).sum() / n

    def backward_fn(g):
        base = 2.0 * diff / n * g
        return (base, -base)

    return _result(out, (pred, target), backward_fn)


def bce_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Binary cross-entropy with predictions clamped to [eps, 1-eps]."""
    if pred.shape != target.shape:
        raise ShapeError(f"bce_loss: shapes differ {pred.shape} vs {target.shape}")
    p = np.clip(pred.data, BCE_EPS, 1.0 - BCE_EPS)
    t = target.data
    n = max(p.size, 1)
    out = -(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).sum() / n
    inside = (pred.data > BCE_EPS) & (pred.data < 1.0 - BCE_EPS)

    def backward_fn(g):
        gp = np.where(inside, (-t / p + (1.0 - t) / (1.0 - p)) / n, 0.0) * g
        gt = (np.log(1.0 - p) - np.log(p)) / n * g
        return (gp, gt)

    return _result(out, (pred, target), backward_fn)


# ---------------------------------------------------------------------------
# Finite-difference verification
# ---------------------------------------------------------------------------


def grad_check(
    fn: Callable[..., Tensor], inputs: Sequence[Tensor], epsilon: float = 1e-4
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``fn(*inputs)`` must build a scalar loss from the given tensors; each
    tensor with ``requires_grad`` is perturbed element-wise.
    """
    zero_grads(inputs)
    out = fn(*inputs)
    if out.data.size != 1:
        raise ShapeError(f"grad_check: fn must return a scalar, got {out.shape}")
    backward(out)
    worst = 0.0
    for t in inputs:
        if not t.requires_grad:
            continue
        analytic = np.zeros_like(t.data) if t.grad is None else t.grad
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            f_plus = fn(*inputs).item()
            flat[i] = orig - epsilon
            f_minus = fn(*inputs).item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            a = analytic.reshape(-1)[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
            worst = max(worst, err)
    return worst


def check_all_ops(seed: int = 0, epsilon: float = 1e-4) -> dict[str, float]:
    """Run grad_check on every forward op at random inputs; returns op -> error."""
    rng = np.random.default_rng(seed)

    def t(*shape, shift=0.0, positive=False):
        data = rng.standard_normal(shape)
        if positive:
            data = np.abs(data) + 0.5
        return Tensor(data + shift, requires_grad=True)

    cases: dict[str, tuple] = {}
    a, b = t(3, 4), t(4, 2)
    w1 = Tensor(rng.standard_normal((3, 2)))
    cases["matmul"] = (lambda x, y: sum_all(mul(matmul(x, y), w1)), [a, b])
    x = t(4, 5)
    w2 = Tensor(rng.standard_normal((5, 4)))
    cases["transpose"] = (lambda x: sum_all(mul(transpose(x), w2)), [x])
    x, y = t(3, 4), t(4)
    w3 = Tensor(rng.standard_normal((3, 4)))
    cases["add_broadcast"] = (lambda x, y: sum_all(mul(add(x, y), w3)), [x, y])
    x, y = t(3, 4), t(3, 4)
    cases["mul"] = (lambda x, y: sum_all(mul(mul(x, y), w3)), [x, y])
    x = t(3, 4)
    cases["scale"] = (lambda x: sum_all(mul(scale(x, -1.7), w3)), [x])
    x, y = t(3, 2), t(3, 3)
    w4 = Tensor(rng.standard_normal((3, 5)))
    cases["concat"] = (lambda x, y: sum_all(mul(concat(x, y), w4)), [x, y])
    table = t(6, 4)
    idx = [0, 3, 3, 5]
    w5 = Tensor(rng.standard_normal((4, 4)))
    cases["row_gather"] = (lambda tb: sum_all(mul(row_gather(tb, idx), w5)), [table])
    x = t(3, 4, shift=0.3)  # keep clear of the kink
    cases["relu"] = (lambda x: sum_all(mul(relu(x), w3)), [x])
    x = t(3, 4)
    cases["sigmoid"] = (lambda x: sum_all(mul(sigmoid(x), w3)), [x])
    x = t(3, 4)
    cases["exp"] = (lambda x: sum_all(mul(exp(x), w3)), [x])
    x = t(3, 4, positive=True)
    cases["reciprocal"] = (lambda x: sum_all(mul(reciprocal(x), w3)), [x])
    x = t(3, 4)
    cases["softmax"] = (lambda x: sum_all(mul(softmax_rows(x), w3)), [x])
    x, tau = t(3, 4), Tensor(np.array(0.3), requires_grad=True)
    cases["softmax_scaled"] = (
        lambda x, tau: sum_all(mul(softmax_rows(x, pre_scale=reciprocal(tau)), w3)),
        [x, tau],
    )
    x = t(3, 4, shift=1.0)
    cases["row_normalize"] = (lambda x: sum_all(mul(row_normalize(x), w3)), [x])
    x, gain, bias = t(5, 8), t(8), t(8)
    w6 = Tensor(rng.standard_normal((5, 8)))
    cases["layer_norm"] = (
        lambda x, g_, b_: sum_all(mul(layer_norm(x, g_, b_), w6)),
        [x, gain, bias],
    )
    x = t(3, 4)
    cases["sum"] = (lambda x: sum_all(mul(x, w3)), [x])
    x = t(3, 4)
    cases["mean"] = (lambda x: mean_all(mul(x, w3)), [x])
    p, y = t(6), Tensor(rng.uniform(0, 1, 6))
    cases["mse_loss"] = (lambda p: mse_loss(p, y), [p])
    p = Tensor(rng.uniform(0.05, 0.95, 6), requires_grad=True)
    yb = Tensor(rng.integers(0, 2, 6).astype(float))
    cases["bce_loss"] = (lambda p: bce_loss(p, yb), [p])

    return {
        name: grad_check(fn, inputs, epsilon) for name, (fn, inputs) in cases.items()
    }
