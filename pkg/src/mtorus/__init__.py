"""Stallings folding, labeled graph pairs and presentations of subgroups of mapping tori."""
from mtorus.freegroup import Alphabet, Endo, Word, apply_endo, compose_endo, is_injective, power_endo, twist
from mtorus.graph import LabeledGraph, basis, bouquet, rank, same_subgroup, tighten
from mtorus.pair import LabeledGraphPair, initial_pair, relative_rank, tighten_pair
from mtorus.presentation import Presentation, present, present_subgroup, verify_presentation
from mtorus.torus import STABLE, TorusWord, equal_in_torus, normalize, reduce_subgroup

__all__ = [
    "Alphabet", "Endo", "Word", "apply_endo", "compose_endo", "is_injective", "power_endo", "twist",
    "LabeledGraph", "basis", "bouquet", "rank", "same_subgroup", "tighten",
    "LabeledGraphPair", "initial_pair", "relative_rank", "tighten_pair",
    "Presentation", "present", "present_subgroup", "verify_presentation",
    "STABLE", "TorusWord", "equal_in_torus", "normalize", "reduce_subgroup",
]
