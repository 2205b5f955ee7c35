from __future__ import annotations


class PgsoError(Exception):
    """Base error carrying a stable machine-readable ``code``."""

    def __init__(self, code: str, message: str = "") -> None:
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


class OntologyValidationError(PgsoError):
    """Raised by the parsers; ``errors`` holds every (code, message) found."""

    def __init__(self, errors: list[tuple[str, str]]) -> None:
        first_code = errors[0][0] if errors else "INVALID"
        summary = "; ".join(f"{c}: {m}" for c, m in errors)
        super().__init__(first_code, summary)
        self.errors = list(errors)

    @property
    def codes(self) -> set[str]:
        return {code for code, _ in self.errors}


class RuleNotApplicable(PgsoError):
    def __init__(self, message: str = "") -> None:
        super().__init__("RULE_NOT_APPLICABLE", message)


class NonConvergence(PgsoError):
    def __init__(self, message: str = "") -> None:
        super().__init__("NON_CONVERGENCE", message)
