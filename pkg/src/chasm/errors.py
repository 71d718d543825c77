"""Exception types shared across the toolkit."""


class ChasmError(Exception):
    """Base class for all toolkit errors."""


class ParseError(ChasmError):
    """Malformed circuit or branching-program text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapExceeded(ChasmError):
    """An exact expansion grew past the configured monomial cap."""

    def __init__(self, where, count, cap):
        self.where = where
        self.count = count
        self.cap = cap
        super().__init__(f"monomial cap exceeded at {where}: {count} > {cap}")


class StructureMismatch(ChasmError):
    """Circuit uses operations the target evaluation structure lacks."""


class PreconditionViolated(ChasmError):
    """Input circuit does not satisfy a pass precondition."""


class NotWeaklySkew(PreconditionViolated):
    """A multiplication gate has no operand with a private subcircuit."""

    def __init__(self, gate_id):
        self.gate_id = gate_id
        super().__init__(f"multiplication gate {gate_id} has no private operand")


class AddInputCondition(PreconditionViolated):
    """An addition gate is fed by something other than a leaf or a product."""

    def __init__(self, gate_id):
        self.gate_id = gate_id
        super().__init__(f"addition gate {gate_id} has a non-leaf, non-product input")


class NotTrimmed(PreconditionViolated):
    """Branching program has nodes off every source-to-sink path."""


class DegreeOverflow(ChasmError):
    """True output degree exceeds the configured homogenization limit."""


class LayerNotSkew(ChasmError):
    """A formal-degree layer failed the skewness check (internal error)."""

    def __init__(self, layer, gate_id):
        self.layer = layer
        self.gate_id = gate_id
        super().__init__(f"layer {layer}: multiplication gate {gate_id} is not skew")
