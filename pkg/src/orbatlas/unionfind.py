class UnionFind:
    """Disjoint sets over 0..n-1; every root is the least member of its set."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def classes(self):
        """(class id per element, least member per class), ids ordered by least member."""
        roots = [self.find(x) for x in range(len(self.parent))]
        reps = sorted(set(roots))
        index = {r: k for k, r in enumerate(reps)}
        return [index[r] for r in roots], reps
