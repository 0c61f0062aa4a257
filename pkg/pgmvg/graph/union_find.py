# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import numpy as np


class UnionFind:
    """Disjoint sets over the integers 0..n-1, with union by rank and path
    compression.

    Args:
        n (int): Number of elements
    """

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.num_sets = int(n)

    def __len__(self):
        return self.parent.size

    def __repr__(self):
        return "UnionFind: %d elements in %d sets" % (len(self), self.num_sets)

    def find(self, x: int) -> int:
        root = int(x)
        while self.parent[root] != root:
            root = int(self.parent[root])
        # Path compression
        x = int(x)
        while self.parent[x] != root:
            next_x = int(self.parent[x])
            self.parent[x] = root
            x = next_x
        return root

    def union(self, a: int, b: int) -> int:
        """Merge the sets of a and b and return the new root."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.num_sets -= 1
        return ra

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def set_size(self, x: int) -> int:
        return int(self.size[self.find(x)])

    def roots(self) -> np.ndarray:
        """Root of every element, fully compressing all paths."""
        return np.array([self.find(x) for x in range(len(self))], dtype=np.int64)
