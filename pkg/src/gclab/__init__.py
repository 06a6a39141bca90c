"""Grammar-compression laboratory.

Re-Pair and Greedy compressors, four bit-exact grammar encodings, the
phrase-probability cost calculus relating parsings to k-order empirical
entropy, generalized de Bruijn adversarial words, and a harness that checks
every bound on real and synthetic inputs.
"""

from .textcore import Text, count_occurrences, empirical_entropy, entropy_profile
from .parsing import (
    Parsing,
    best_offset_parsing,
    is_natural_parsing,
    lz77_parse_nonself,
    lz78_parse,
    parsing_cost,
    phrase_probability,
    verify_parsing_bounds,
)
from .grammar import (
    FullGrammar,
    bad_grammar_fixture,
    check_irreducible,
    check_weakly_nonredundant,
    expansion_sum_check,
    induced_parsing,
    start_parsing,
)
from .repair import StopPolicy, repair_run, stop_point_report, worst_case_family
from .greedy import GreedyPolicy, greedy_run, greedy_stop_report
from .debruijn import GdBParams, base_debruijn, build_s0, generalized_word, verify_gdb
from . import coders

__all__ = [
    "Text",
    "count_occurrences",
    "empirical_entropy",
    "entropy_profile",
    "Parsing",
    "phrase_probability",
    "parsing_cost",
    "best_offset_parsing",
    "lz78_parse",
    "lz77_parse_nonself",
    "is_natural_parsing",
    "verify_parsing_bounds",
    "FullGrammar",
    "check_irreducible",
    "check_weakly_nonredundant",
    "expansion_sum_check",
    "induced_parsing",
    "start_parsing",
    "bad_grammar_fixture",
    "StopPolicy",
    "repair_run",
    "stop_point_report",
    "worst_case_family",
    "GreedyPolicy",
    "greedy_run",
    "greedy_stop_report",
    "GdBParams",
    "base_debruijn",
    "build_s0",
    "generalized_word",
    "verify_gdb",
    "coders",
]

__version__ = "0.1.0"
