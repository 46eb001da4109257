"""Static verifier for synchronisers built on a protocol-governed atomic
integer, with an exhaustive-interleaving permission oracle."""

__version__ = "0.1.0"
