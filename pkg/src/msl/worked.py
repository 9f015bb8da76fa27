"""Small named frames used by the examples, the self-test and the docs."""

from __future__ import annotations

from .frame import Frame
from .maps import PointMap


def chain(n, labels=None):
    """Irreflexive chain with ``n`` points, each seeing the next one."""
    labels = labels or [f"x{i}" for i in range(n)]
    return Frame.from_edges(labels, [(labels[i], labels[i + 1]) for i in range(n - 1)])


def single_point():
    return Frame(("r",), (frozenset(),))


def f1():
    """The three-point chain a -> b -> c."""
    return Frame.from_edges("abc", [("a", "b"), ("b", "c")])


def x_ex():
    """A seven-point space over ``f1`` realising every split of the worked example."""
    labels = ("c", "b+", "b0", "a1", "a2", "a3", "a0")
    edges = [("b+", "c"), ("a1", "b+"), ("a1", "b0"), ("a2", "b+"), ("a3", "b0")]
    return Frame.from_edges(labels, edges)


def f_ex():
    X, F = x_ex(), f1()
    target = {"c": "c", "b+": "b", "b0": "b", "a1": "a", "a2": "a", "a3": "a", "a0": "a"}
    return PointMap(X, F, tuple(F.index(target[lab]) for lab in X.labels))


def f3():
    """The fully subdivided frame: a1 sees both b's, a2 and a3 one each, a4 none."""
    labels = ("a1", "a2", "a3", "a4", "b1", "b2", "c")
    edges = [("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a3", "b2"), ("b1", "c")]
    return Frame.from_edges(labels, edges)
