"""Golden model of a shift/subtract modulus unit and a prime-finding
datapath built on it."""

__version__ = "0.1.0"
