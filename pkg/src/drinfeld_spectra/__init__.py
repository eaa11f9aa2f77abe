"""Weighted quotient graphs of the Bruhat-Tits tree over F_q(T), their
discriminants, and spectral checks on the finite cores."""

__version__ = "0.1.0"
