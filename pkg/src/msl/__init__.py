"""Finite modal spaces, stable canonical rules and the subdivision construction."""

from .algebra import Algebra, dual_algebra, dual_frame, height, is_si
from .errors import BudgetExceeded, InvariantViolation, MSLError, ParseError, PreconditionError
from .filtration import greatest_filtration, least_filtration, verify_definable_filtration
from .formula import Rule, parse, parse_rule, rule_to_text, to_text
from .frame import OMEGA, Frame, Model, enumerate_frames, rank, truth_set, validates
from .maps import DomainSet, PointMap, find_stable_surjection, is_pmorphism
from .rules import gen_epsilon, gen_gamma, gen_jankov_rule, gen_rho, gen_stable_rule
from .subdivision import fmp_demo, subdivide

__version__ = "0.1.0"
