"""Exception types raised across the package."""


class FinoError(Exception):
    """Base class for all library errors."""


class DuplicateAbscissa(FinoError, ValueError):
    """Two interpolation points share the same x coordinate."""


class BadThreshold(FinoError, ValueError):
    """Threshold k outside 1 <= k <= n."""


class NotEnoughShares(FinoError, ValueError):
    """Fewer shares than the reconstruction threshold."""


class EmptyLeaves(FinoError, ValueError):
    """A Merkle tree needs at least one leaf."""


class IndexOutOfRange(FinoError, IndexError):
    pass


class InvalidCiphertext(FinoError, ValueError):
    """A threshold ciphertext failed its validity proof."""


class ShareVerificationFailed(FinoError, ValueError):
    """A decryption share failed its equality-of-discrete-log proof."""


class DecryptionFailed(FinoError, ValueError):
    """Combined decryption did not reproduce the ciphertext's integrity tag."""


class NotDelivered(FinoError, KeyError):
    """The message is not in the local DAG."""


class ConfigInvalid(FinoError, ValueError):
    """Simulation configuration violates a model bound."""


class DecodeError(FinoError, ValueError):
    """Malformed wire encoding."""
