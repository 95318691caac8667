"""Binary trees, Horton-Strahler ordering, branch counting, and enumeration.

A tree is an immutable value: ``None`` is a leaf and a 2-tuple
``(left, right)`` is an internal node. Magnitude is the leaf count, so a
tree of magnitude n has exactly 2n-1 nodes.

Horton-Strahler orders follow the usual rules: a leaf has order 1; a node
whose children share order r has order r+1; otherwise the node takes the
larger child order. An order-r branch is a maximal path of order-r nodes,
and ``branch_counts`` tallies branches per order.

All traversals are iterative so deep (caterpillar-like) trees of any
magnitude are safe regardless of the interpreter recursion limit.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple, Optional, Tuple

from .combinatorics import catalan

Tree = Optional[tuple]
LEAF: Tree = None

DEFAULT_ENUMERATION_LIMIT = 14


class EnumerationLimitError(Exception):
    """Raised when an exhaustive operation is asked to exceed its ceiling."""


class TreeFormatError(ValueError):
    """Malformed tree text; ``position`` is the byte offset of the first error."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class OrderedTree(NamedTuple):
    """A tree node annotated with its Horton-Strahler order."""

    order: int
    left: Optional["OrderedTree"]
    right: Optional["OrderedTree"]


class BranchProfile(NamedTuple):
    """Branch counts per order: ``counts[i]`` is the number of order-(i+1) branches."""

    counts: Tuple[int, ...]

    @property
    def magnitude(self) -> int:
        return self.counts[0]

    @property
    def order(self) -> int:
        """Root order; counts at higher orders are implicitly zero."""
        return len(self.counts)

    def s(self, r: int) -> int:
        """Branch count at order r (zero above the root order)."""
        if r < 1:
            raise ValueError(f"order must be >= 1, got {r}")
        return self.counts[r - 1] if r <= len(self.counts) else 0

    def window(self, r: int, p: int) -> Tuple[int, ...]:
        """Counts at orders r, r+1, ..., r+p-1."""
        return tuple(self.s(r + j) for j in range(p))


def magnitude(t: Tree) -> int:
    """Leaf count of ``t``."""
    count = 0
    stack = [t]
    while stack:
        v = stack.pop()
        if v is None:
            count += 1
        else:
            stack.append(v[0])
            stack.append(v[1])
    return count


def _flatten(t: Tree):
    """Pre-order node list plus child indices (-1, -1 marks a leaf).

    Children always come after their parent in the list, so a reversed scan
    visits children before parents.
    """
    nodes = [t]
    kids = [(-1, -1)]
    i = 0
    while i < len(nodes):
        v = nodes[i]
        if v is not None:
            j = len(nodes)
            kids[i] = (j, j + 1)
            nodes.append(v[0])
            kids.append((-1, -1))
            nodes.append(v[1])
            kids.append((-1, -1))
        i += 1
    return nodes, kids


def _node_orders(t: Tree):
    nodes, kids = _flatten(t)
    orders = [1] * len(nodes)
    for i in range(len(nodes) - 1, -1, -1):
        a, b = kids[i]
        if a >= 0:
            oa = orders[a]
            ob = orders[b]
            orders[i] = oa + 1 if oa == ob else (oa if oa > ob else ob)
    return nodes, kids, orders


def strahler_orders(t: Tree) -> OrderedTree:
    """Annotate every node of ``t`` with its Horton-Strahler order."""
    nodes, kids, orders = _node_orders(t)
    annotated: list[Optional[OrderedTree]] = [None] * len(nodes)
    for i in range(len(nodes) - 1, -1, -1):
        a, b = kids[i]
        if a < 0:
            annotated[i] = OrderedTree(1, None, None)
        else:
            annotated[i] = OrderedTree(orders[i], annotated[a], annotated[b])
    return annotated[0]


def root_order(t: Tree) -> int:
    return _node_orders(t)[2][0]


def branch_counts(t: Tree) -> BranchProfile:
    """Branch profile of ``t``.

    A node heads a branch exactly when it has no parent or its parent has a
    different order, so one head per maximal order path.
    """
    nodes, kids, orders = _node_orders(t)
    counts = [0] * orders[0]
    counts[orders[0] - 1] += 1  # root is always a head
    for i, (a, b) in enumerate(kids):
        if a >= 0:
            o = orders[i]
            if orders[a] != o:
                counts[orders[a] - 1] += 1
            if orders[b] != o:
                counts[orders[b] - 1] += 1
    return BranchProfile(tuple(counts))


# --- canonical enumeration -------------------------------------------------
#
# Trees of magnitude n are ordered by left-subtree magnitude ascending, then
# recursively by left rank, then right rank. Unranking follows the same
# order, so enumerate_trees(n)[i] == unrank_tree(n, i).

_tree_lists: dict[int, list] = {1: [LEAF]}


def _all_trees(n: int) -> list:
    for k in range(2, n + 1):
        if k not in _tree_lists:
            _tree_lists[k] = [
                (l, r)
                for j in range(1, k)
                for l in _tree_lists[j]
                for r in _tree_lists[k - j]
            ]
    return _tree_lists[n]


def enumerate_trees(n: int, limit: int = DEFAULT_ENUMERATION_LIMIT) -> Iterator[Tree]:
    """Yield every magnitude-n tree exactly once, in canonical order."""
    if n < 1:
        raise ValueError(f"magnitude must be >= 1, got {n}")
    if n > limit:
        raise EnumerationLimitError(
            f"enumeration of magnitude {n} exceeds the limit {limit}"
        )
    if n == 1:
        yield LEAF
        return
    # Cache levels below n; stream the top level to keep memory flat.
    _all_trees(n - 1)
    for j in range(1, n):
        for l in _tree_lists[j]:
            for r in _tree_lists[n - j]:
                yield (l, r)


def unrank_tree(n: int, rank: int) -> Tree:
    """Tree at position ``rank`` of the canonical enumeration of magnitude n."""
    if n < 1:
        raise ValueError(f"magnitude must be >= 1, got {n}")
    if not 0 <= rank < catalan(n - 1):
        raise ValueError(f"rank {rank} out of range for magnitude {n}")
    if n == 1:
        return LEAF
    for j in range(1, n):
        block = catalan(j - 1) * catalan(n - j - 1)
        if rank < block:
            left_rank, right_rank = divmod(rank, catalan(n - j - 1))
            return (unrank_tree(j, left_rank), unrank_tree(n - j, right_rank))
        rank -= block
    raise AssertionError("unreachable: rank exhausted the Catalan total")


# --- text codec -------------------------------------------------------------
#
# Leaf is "*"; an internal node is "(" + left + " " + right + ")". No other
# whitespace, ASCII only.


def encode(t: Tree) -> str:
    out = []
    stack = [t]
    while stack:
        v = stack.pop()
        if v is None:
            out.append("*")
        elif isinstance(v, str):
            out.append(v)
        else:
            stack.append(")")
            stack.append(v[1])
            stack.append(" ")
            stack.append(v[0])
            stack.append("(")
    return "".join(out)


_OPEN = object()  # '(' seen, parsing the left subtree
_MID = object()  # left subtree done, parsing the right


def decode(text: str) -> Tree:
    """Parse the canonical tree text; rejects malformed input with its offset.

    Iterative (explicit stack), so arbitrarily deep chains decode safely.
    """
    n = len(text)
    stack: list = []
    i = 0
    while True:
        if i >= n:
            raise TreeFormatError("unexpected end of input", i)
        c = text[i]
        if c == "(":
            stack.append(_OPEN)
            i += 1
            continue
        if c != "*":
            raise TreeFormatError(f"expected '*' or '(', found {c!r}", i)
        node: Tree = LEAF
        i += 1
        # A subtree just completed; fold it into the enclosing nodes.
        while True:
            if stack and stack[-1] is _MID:
                if i >= n or text[i] != ")":
                    raise TreeFormatError("expected ')'", i)
                i += 1
                stack.pop()
                node = (stack.pop(), node)
                continue
            if stack and stack[-1] is _OPEN:
                if i >= n or text[i] != " ":
                    raise TreeFormatError("expected single space between subtrees", i)
                i += 1
                stack.pop()
                stack.append(node)
                stack.append(_MID)
                break
            # Stack empty: the whole input should be consumed.
            if i != n:
                raise TreeFormatError("trailing characters after tree", i)
            return node
