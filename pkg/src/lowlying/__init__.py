"""Explicit-formula computations for the 1-level density of the family of pairs
L(s, chi_{f d1}) L(s, chi_{f d2}) twisted by a genus character of Q(sqrt(-D))."""

from .arith import Discriminant, kronecker, lambda_split, prime_table
from .explicit import dedekind_ef, ef_balance, ef_family_density, log_scale
from .family import enumerate_family, regime
from .lfun import dirichlet_L, find_zeros
from .quadforms import GenusCharacter, class_group, genus_characters
from .testfn import bump_pair, fejer_pair

__version__ = "0.1.0"

__all__ = [
    "Discriminant",
    "GenusCharacter",
    "bump_pair",
    "class_group",
    "dedekind_ef",
    "dirichlet_L",
    "ef_balance",
    "ef_family_density",
    "enumerate_family",
    "fejer_pair",
    "find_zeros",
    "genus_characters",
    "kronecker",
    "lambda_split",
    "log_scale",
    "prime_table",
    "regime",
]
