"""Hemisystems of the Hermitian surface of PG(3,q^2) from embedded maximal curves."""

__version__ = "0.1.0"
