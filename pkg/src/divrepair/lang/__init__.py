"""The bundled mini-language: parser, printer, static scopes, interpreter."""
from .interpreter import DEFAULT_FUEL, ExecOutcome, MiniRuntimeError, Status, execute
from .nodes import Program, renumber, strip_sids
from .parser import MiniLangError, ParseError, SemanticError, is_valid, parse, validate
from .printer import pretty_print
from .scope import ProgramPoint, point_scopes

__all__ = [
    "DEFAULT_FUEL", "ExecOutcome", "MiniLangError", "MiniRuntimeError",
    "ParseError", "Program", "ProgramPoint", "SemanticError", "Status",
    "execute", "is_valid", "parse", "point_scopes", "pretty_print",
    "renumber", "strip_sids", "validate",
]
