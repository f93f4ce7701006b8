"""Exact verification toolkit for formal-degree identities on tame
elliptic scenario data: lattice arithmetic, jump-torsor length sums,
both sides of the degree comparison, and character-cocycle base change."""

__version__ = "0.1.0"
