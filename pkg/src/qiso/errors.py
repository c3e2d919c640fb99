"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class QisoError(Exception):
    exit_code = 1


class StructuralError(QisoError):
    """Input shapes are inconsistent (not an axiom violation)."""

    exit_code = 2


class InvalidSpaceError(QisoError):
    """The metric/measure axioms fail; carries the validation report."""

    exit_code = 2

    def __init__(self, report):
        self.report = report
        super().__init__("invalid metric space: " + "; ".join(str(v) for v in report.violations))


class PreconditionError(QisoError):
    exit_code = 3


class NotEmbeddableError(PreconditionError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"space is not Euclidean-embeddable (negative principal minor on {list(witness.indices)})")


class ResourceBoundError(QisoError):
    exit_code = 4
