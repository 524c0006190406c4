"""Task networks over a boolean before-matrix, with Warshall closure.

Matrices are stored as one int bitmask per row: bit j set in row i means
task i must precede task j.  Every network held by a live search node is
transitively closed and irreflexive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence


class TaskInstance(NamedTuple):
    instance: int  # unique within one search path; names the node in plans
    sig: int       # ground task signature id


def close_rows(rows: list[int], n: int) -> list[int]:
    """In-place Warshall transitive closure over row bitmasks."""
    for k in range(n):
        bit = 1 << k
        rk = rows[k]  # stable during pass k: rows[k] |= rows[k] is a no-op
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= rk
    return rows


def close_rows_incremental(rows: list[int], n: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    """Restore closure of an already-closed matrix after adding `edges`."""
    for u, v in edges:
        if rows[u] >> v & 1:
            continue
        reach = rows[v] | (1 << v)
        for x in range(n):
            if x == u or rows[x] >> u & 1:
                rows[x] |= reach
    return rows


def warshall_closure(matrix: Sequence[Sequence[bool]]) -> list[list[bool]]:
    """Transitive closure of a square boolean matrix."""
    n = len(matrix)
    rows = [sum(1 << j for j, v in enumerate(row) if v) for row in matrix]
    close_rows(rows, n)
    return [[bool(rows[i] >> j & 1) for j in range(n)] for i in range(n)]


def rows_from_pairs(pairs: Sequence[tuple[int, int]], n: int) -> list[int]:
    rows = [0] * n
    for i, j in pairs:
        rows[i] |= 1 << j
    return rows


def has_cycle(rows: Sequence[int]) -> bool:
    """On a closed matrix any cycle shows up as a set diagonal bit."""
    return any(row >> i & 1 for i, row in enumerate(rows))


@dataclass(frozen=True)
class TaskNetwork:
    tasks: tuple[TaskInstance, ...]
    before: tuple[int, ...]  # closed row masks

    def __len__(self) -> int:
        return len(self.tasks)

    @property
    def is_empty(self) -> bool:
        return not self.tasks

    def free_tasks(self) -> list[int]:
        """Indices with no predecessor, in ascending index order."""
        preceded = 0
        for row in self.before:
            preceded |= row
        return [i for i in range(len(self.tasks)) if not preceded >> i & 1]

    def pairs(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i, row in enumerate(self.before)
            for j in range(len(self.tasks))
            if row >> j & 1
        ]

    def is_total_order(self) -> bool:
        n = len(self.tasks)
        for i in range(n):
            for j in range(i + 1, n):
                if not (self.before[i] >> j & 1 or self.before[j] >> i & 1):
                    return False
        return not has_cycle(self.before)

    def linearize(self) -> list[int]:
        """Indices in chain order; only meaningful for total orders."""
        n = len(self.tasks)
        succ_counts = [bin(row).count("1") for row in self.before]
        return sorted(range(n), key=lambda i: (-succ_counts[i], i))

    def remove_task(self, index: int) -> "TaskNetwork":
        """Drop a task's row and column; closure survives removal."""
        n = len(self.tasks)
        keep = [i for i in range(n) if i != index]
        tasks = tuple(self.tasks[i] for i in keep)
        rows = []
        for i in keep:
            row = self.before[i]
            packed = 0
            for new_j, j in enumerate(keep):
                if row >> j & 1:
                    packed |= 1 << new_j
            rows.append(packed)
        return TaskNetwork(tasks, tuple(rows))

    def canonical_key(self):
        """Hashable form invariant to instance ids: tasks stably sorted by
        signature, matrix permuted to match."""
        n = len(self.tasks)
        order = sorted(range(n), key=lambda i: (self.tasks[i].sig, i))
        pos = {old: new for new, old in enumerate(order)}
        sigs = tuple(self.tasks[i].sig for i in order)
        rows = []
        for i in order:
            packed = 0
            row = self.before[i]
            for j in range(n):
                if row >> j & 1:
                    packed |= 1 << pos[j]
            rows.append(packed)
        return sigs, tuple(rows)


def initial_network(
    sigs: Sequence[int], pairs: Sequence[tuple[int, int]]
) -> TaskNetwork:
    """Build the root network; instance ids are the task positions."""
    n = len(sigs)
    rows = close_rows(rows_from_pairs(pairs, n), n)
    tasks = tuple(TaskInstance(i, s) for i, s in enumerate(sigs))
    return TaskNetwork(tasks, tuple(rows))


def decompose(
    network: TaskNetwork,
    index: int,
    subtask_sigs: Sequence[int],
    method_pairs: Sequence[tuple[int, int]],
    first_instance: int,
) -> tuple["TaskNetwork | None", tuple[TaskInstance, ...]]:
    """Replace task `index` by the method's subtasks.

    External constraints are inherited by every new subtask, the method's
    internal ordering is installed, and the result is re-closed.  Returns
    (None, children) when the closure witnesses a cycle: the decomposition
    must be discarded, not the search node.
    """
    n = len(network.tasks)
    m = len(subtask_sigs)
    children = tuple(
        TaskInstance(first_instance + k, sig) for k, sig in enumerate(subtask_sigs)
    )

    # position map: old j -> new position (children occupy index .. index+m-1)
    def new_pos(j: int) -> int:
        return j if j < index else j - 1 + m

    tasks = (
        network.tasks[:index] + children + network.tasks[index + 1 :]
    )
    n2 = n - 1 + m
    rows = [0] * n2
    child_bits = 0
    for k in range(m):
        child_bits |= 1 << (index + k)
    for j in range(n):
        if j == index:
            continue
        row = network.before[j]
        packed = 0
        for t in range(n):
            if t == index or not row >> t & 1:
                continue
            packed |= 1 << new_pos(t)
        if row >> index & 1:  # j < removed task: j precedes every child
            packed |= child_bits
        rows[new_pos(j)] = packed
    removed_row = network.before[index]
    succ_bits = 0
    for t in range(n):
        if t != index and removed_row >> t & 1:
            succ_bits |= 1 << new_pos(t)
    for k in range(m):
        rows[index + k] = succ_bits
    for a, b in method_pairs:
        rows[index + a] |= 1 << (index + b)
    close_rows(rows, n2)
    if has_cycle(rows):
        return None, children
    return TaskNetwork(tasks, tuple(rows)), children
