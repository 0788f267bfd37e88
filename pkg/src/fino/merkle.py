"""
Binary SHA-256 Merkle trees with domain-separated leaves and nodes.

Levels of odd width duplicate their last node. A proof carries the leaf
index and the tree size, so the verifier knows the exact path shape and a
proof cannot be replayed at the duplicated position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DecodeError, EmptyLeaves, IndexOutOfRange
from .wire import Reader, sha256, u8, u32

LEAF_TAG = b"\x00"
NODE_TAG = b"\x01"
HASH_SIZE = 32


def hash_leaf(leaf: bytes) -> bytes:
    return sha256(LEAF_TAG, leaf)


def hash_node(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_TAG, left, right)


def proof_length(size: int) -> int:
    return (size - 1).bit_length()


@dataclass(frozen=True)
class MerkleProof:
    index: int
    size: int
    siblings: tuple[bytes, ...]

    def encode(self) -> bytes:
        return u32(self.index) + u32(self.size) + u8(len(self.siblings)) + b"".join(self.siblings)

    @classmethod
    def decode(cls, data: bytes) -> "MerkleProof":
        r = Reader(data)
        proof = cls.read(r)
        r.expect_end()
        return proof

    @classmethod
    def read(cls, r: Reader) -> "MerkleProof":
        index, size, count = r.u32(), r.u32(), r.u8()
        return cls(index, size, tuple(r.take(HASH_SIZE) for _ in range(count)))


class MerkleTree:
    def __init__(self, levels: list[list[bytes]]):
        self.levels = levels

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def size(self) -> int:
        return len(self.levels[0])

    def prove(self, index: int) -> MerkleProof:
        return prove(self, index)


def build(leaves: Sequence[bytes]) -> MerkleTree:
    if not leaves:
        raise EmptyLeaves("cannot build a tree over zero leaves")
    level = [hash_leaf(leaf) for leaf in leaves]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
        level = [hash_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return MerkleTree(levels)


def root_of(leaves: Sequence[bytes]) -> bytes:
    return build(leaves).root


def prove(tree: MerkleTree, index: int) -> MerkleProof:
    if not 0 <= index < tree.size:
        raise IndexOutOfRange(f"leaf index {index} not in [0, {tree.size})")
    siblings = []
    i = index
    for level in tree.levels[:-1]:
        j = i ^ 1
        siblings.append(level[j] if j < len(level) else level[i])
        i //= 2
    return MerkleProof(index, tree.size, tuple(siblings))


def verify(root: bytes, leaf: bytes, proof: MerkleProof) -> bool:
    if proof.size < 1 or not 0 <= proof.index < proof.size:
        return False
    if len(proof.siblings) != proof_length(proof.size):
        return False
    node = hash_leaf(leaf)
    i = proof.index
    for sibling in proof.siblings:
        node = hash_node(sibling, node) if i & 1 else hash_node(node, sibling)
        i //= 2
    return node == root


def decode_proof(data: bytes) -> MerkleProof:
    try:
        return MerkleProof.decode(data)
    except (IndexError, ValueError) as exc:
        raise DecodeError(str(exc)) from exc
