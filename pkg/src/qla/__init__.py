"""Exact symbolic kernel for Lie superalgebroids with homological sections."""

from qla.gpoly import EVEN, ODD, Coord, GradedPoly, ParseError, SuperChart, parse

__version__ = "0.1.0"

__all__ = ["EVEN", "ODD", "Coord", "GradedPoly", "ParseError", "SuperChart", "parse"]
