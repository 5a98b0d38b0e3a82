from itertools import combinations

BRUTE_FORCE_LIMIT = 9


class GraphTooLargeError(ValueError):
    pass


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def root(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def join(self, a, b):
        ra, rb = self.root(a), self.root(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def edge_key(u, v):
    return (u, v) if u < v else (v, u)


def kruskal(g, weight_fn=None):
    """
    Minimum spanning tree under weight_fn(w). Ties are broken by
    (weight, min endpoint, max endpoint).

    Returns:
        (edges, total under weight_fn, total under the original weights)
    """
    weight_fn = weight_fn or (lambda w: w)
    tree = UnionFind(g.nodes)
    ordered = sorted(g.edges(), key=lambda e: (weight_fn(e[2]), e[0], e[1]))
    chosen = []
    for u, v, w in ordered:
        if tree.join(u, v):
            chosen.append((u, v))
            if len(chosen) == g.n - 1:
                break
    return chosen, tree_weight(g, chosen, weight_fn), tree_weight(g, chosen)


def tree_weight(g, es, weight_fn=None):
    weight_fn = weight_fn or (lambda w: w)
    return sum(weight_fn(g.weight(u, v)) for u, v in es)


def is_spanning_tree(g, es):
    es = [edge_key(u, v) for u, v in es]
    if len(es) != g.n - 1 or len(set(es)) != len(es):
        return False
    if any(not g.has_edge(u, v) for u, v in es):
        return False
    forest = UnionFind(g.nodes)
    return all(forest.join(u, v) for u, v in es)


def spanning_trees(g):
    if g.n > BRUTE_FORCE_LIMIT:
        raise GraphTooLargeError(f"spanning-tree enumeration limited to n <= {BRUTE_FORCE_LIMIT}")
    pairs = [(u, v) for u, v, _ in g.edges()]
    for subset in combinations(pairs, g.n - 1):
        forest = UnionFind(g.nodes)
        if all(forest.join(u, v) for u, v in subset):
            yield list(subset)


def brute_force_mst_weight(g, weight_fn=None):
    return min(tree_weight(g, es, weight_fn) for es in spanning_trees(g))
