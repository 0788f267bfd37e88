"""Merkle commitments over share encodings."""

import hashlib

import pytest
from hypothesis import given, strategies as st

from fino import merkle
from fino.errors import DecodeError, EmptyLeaves, IndexOutOfRange


def leaves(n):
    return [f"leaf-{i}".encode() for i in range(n)]


def flip(data: bytes, bit: int) -> bytes:
    b = bytearray(data)
    b[bit // 8] ^= 1 << (bit % 8)
    return bytes(b)


def reference_root(items):
    """Independent recomputation: tagged SHA-256, odd levels duplicate the last node."""
    level = [hashlib.sha256(b"\x00" + x).digest() for x in items]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [hashlib.sha256(b"\x01" + level[i] + level[i + 1]).digest() for i in range(0, len(level), 2)]
    return level[0]


class TestBuild:
    def test_single_leaf(self):
        assert merkle.root_of([b"x"]) == hashlib.sha256(b"\x00x").digest()

    def test_empty(self):
        with pytest.raises(EmptyLeaves):
            merkle.build([])

    @pytest.mark.parametrize("n", range(1, 34))
    def test_matches_reference(self, n):
        assert merkle.root_of(leaves(n)) == reference_root(leaves(n))

    def test_deterministic(self):
        assert merkle.root_of(leaves(16)) == merkle.root_of(leaves(16))

    def test_permutation_changes_root(self):
        xs = leaves(16)
        assert merkle.root_of(xs) != merkle.root_of(xs[1:] + xs[:1])
        assert merkle.root_of(xs) != merkle.root_of(list(reversed(xs)))

    def test_leaf_node_domain_separation(self):
        """A two-leaf root is not a leaf hash of the concatenated children."""
        a, b = merkle.hash_leaf(b"a"), merkle.hash_leaf(b"b")
        assert merkle.root_of([b"a", b"b"]) != merkle.hash_leaf(a + b)


class TestProofs:
    @pytest.mark.parametrize("n", [1, 2, 3, 5, 7, 16, 17, 32])
    def test_roundtrip_all(self, n):
        tree = merkle.build(leaves(n))
        for i, leaf in enumerate(leaves(n)):
            proof = tree.prove(i)
            assert len(proof.siblings) == merkle.proof_length(n)
            assert merkle.verify(tree.root, leaf, proof)

    def test_index_out_of_range(self):
        tree = merkle.build(leaves(4))
        with pytest.raises(IndexOutOfRange):
            tree.prove(4)

    @pytest.mark.parametrize("n", [1, 4, 7, 16, 32])
    def test_leaf_bit_flip_sweep(self, n):
        tree = merkle.build(leaves(n))
        for i, leaf in enumerate(leaves(n)):
            proof = tree.prove(i)
            for bit in range(len(leaf) * 8):
                assert not merkle.verify(tree.root, flip(leaf, bit), proof)

    @pytest.mark.parametrize("n", [2, 5, 16, 32])
    def test_sibling_bit_flip_sweep(self, n):
        tree = merkle.build(leaves(n))
        for i, leaf in enumerate(leaves(n)):
            proof = tree.prove(i)
            for j, sib in enumerate(proof.siblings):
                for bit in range(0, 256, 7):
                    bad = list(proof.siblings)
                    bad[j] = flip(sib, bit)
                    assert not merkle.verify(tree.root, leaf, merkle.MerkleProof(i, n, tuple(bad)))

    @pytest.mark.parametrize("n", [2, 5, 16, 32])
    def test_cross_check_sweep(self, n):
        tree = merkle.build(leaves(n))
        xs = leaves(n)
        for i in range(n):
            proof = tree.prove(i)
            for j in range(n):
                if j != i:
                    assert not merkle.verify(tree.root, xs[j], proof)

    def test_wrong_index_or_size(self):
        tree = merkle.build(leaves(7))
        p = tree.prove(6)
        assert not merkle.verify(tree.root, leaves(7)[6], merkle.MerkleProof(7, 7, p.siblings))
        assert not merkle.verify(tree.root, leaves(7)[6], merkle.MerkleProof(6, 16, p.siblings))
        assert not merkle.verify(tree.root, leaves(7)[6], merkle.MerkleProof(6, 7, p.siblings[:-1]))

    def test_duplicated_position_not_replayable(self):
        """In a 3-leaf tree the last leaf is duplicated, yet index 3 is out of range."""
        tree = merkle.build(leaves(3))
        p = tree.prove(2)
        assert not merkle.verify(tree.root, leaves(3)[2], merkle.MerkleProof(3, 3, p.siblings))

    @given(st.lists(st.binary(max_size=40), min_size=1, max_size=20), st.data())
    def test_completeness_property(self, items, data):
        tree = merkle.build(items)
        i = data.draw(st.integers(min_value=0, max_value=len(items) - 1))
        assert merkle.verify(tree.root, items[i], tree.prove(i))


class TestEncoding:
    def test_roundtrip(self):
        proof = merkle.build(leaves(9)).prove(4)
        assert merkle.decode_proof(proof.encode()) == proof

    def test_truncated(self):
        data = merkle.build(leaves(9)).prove(4).encode()
        with pytest.raises(DecodeError):
            merkle.decode_proof(data[:-1])
        with pytest.raises(DecodeError):
            merkle.decode_proof(data + b"\x00")
