import pytest
from hypothesis import given, settings, strategies as st

from fino.signing import Ed25519Signer, KeyRegistry

SIGNERS = [KeyRegistry, Ed25519Signer]


@pytest.mark.parametrize("cls", SIGNERS)
class TestSigner:
    def test_roundtrip(self, cls):
        s = cls(3)
        sig = s.sign("validator-1", b"hello")
        assert len(sig) == cls.signature_size
        assert s.verify("validator-1", b"hello", sig)

    def test_wrong_identity_or_data(self, cls):
        s = cls(3)
        sig = s.sign("validator-1", b"hello")
        assert not s.verify("validator-2", b"hello", sig)
        assert not s.verify("validator-1", b"hellO", sig)

    def test_deterministic_across_instances(self, cls):
        assert cls(7).sign("a", b"m") == cls(7).sign("a", b"m")
        assert cls(7).verify("a", b"m", cls(7).sign("a", b"m"))

    def test_seed_separates_keys(self, cls):
        assert not cls(8).verify("a", b"m", cls(7).sign("a", b"m"))

    def test_truncated_signature(self, cls):
        s = cls(0)
        assert not s.verify("a", b"m", s.sign("a", b"m")[:-1])
        assert not s.verify("a", b"m", b"")

    @settings(max_examples=40, deadline=None)
    @given(data=st.binary(max_size=64), bit=st.integers(0, 8 * 32 - 1))
    def test_any_bit_flip_rejected(self, cls, data, bit):
        s = cls(1)
        sig = bytearray(s.sign("x", data))
        sig[bit // 8] ^= 1 << (bit % 8)
        assert not s.verify("x", data, bytes(sig))


def test_ed25519_public_keys_distinct():
    s = Ed25519Signer(0)
    assert len(s.public_key("a")) == 32 and s.public_key("a") != s.public_key("b")


def test_keys_bytes_seed():
    assert KeyRegistry(b"\x00" * 16).sign("a", b"m") == KeyRegistry(0).sign("a", b"m")
